use super::blocking::{blocking_flow, is_blocking, Network};
use super::graph::{
    audit_flow, flow_value, in_flow, out_flow, project_to_base, shortcut_bfs, subflow_from, subflow_to,
};
use super::{FlowInstance, HandledGraph, Layers};
use crate::error::{Error, Result};
use std::sync::atomic::{AtomicU64, Ordering};

/// A source set `S′` and the sinks `T(S′)` it reaches in G.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessCut {
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
    /// `ℓ*` with `S′ = S^{≤ℓ*}`.
    pub level: usize,
    /// `a(S∖S′) + γ·b(T(S′))/(1+ε)`.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct IncLen {
    pub graph: HandledGraph,
    pub flow: Vec<f64>,
    /// Value added by the blocking flow.
    pub augmented: f64,
    /// Shortcut layers of the returned flow.
    pub layers: Layers,
    /// Flow mass below the zero threshold that was projected onto G because
    /// its edges left the intended subgraph (floating-point dust).
    pub rerouted: f64,
}

#[derive(Debug, Clone)]
pub struct NfpSolution {
    /// Flow on the edges of G.
    pub flow: Vec<f64>,
    pub value: f64,
    pub cut: WitnessCut,
    pub rounds: usize,
}

#[derive(Debug, Clone)]
pub struct MaxFlow {
    pub flow: Vec<f64>,
    pub value: f64,
    /// Value of the cut `a(S∖S′) + b(T(S′))` certifying the approximation.
    pub upper_bound: f64,
    pub rounds: usize,
}

const NONE: usize = usize::MAX;

static WITNESS_CHECKS: AtomicU64 = AtomicU64::new(0);

/// Number of witness-cut checks `solve_nfp` has passed in this process.
pub fn witness_checks() -> u64 {
    WITNESS_CHECKS.load(Ordering::Relaxed)
}

/// For every base vertex: the smallest level of a source reaching it, and
/// whether that level plus one also reaches it. Sources outside `S^{≤ℓ}` count
/// as level `ℓ+1`.
fn source_reach(inst: &FlowInstance, level: &[usize]) -> (Vec<usize>, Vec<bool>) {
    let n = inst.n_vertices();
    let mut lo = vec![NONE; n];
    let mut next = vec![false; n];
    for &v in inst.topological_order() {
        if inst.is_source(v) {
            lo[v] = level[v];
            continue;
        }
        for &e in inst.in_edges(v) {
            let u = inst.edges()[e].0;
            let (m2, p2) = (lo[u], next[u]);
            merge_min(&mut lo[v], &mut next[v], m2, p2);
        }
    }
    (lo, next)
}

fn merge_min(m: &mut usize, p: &mut bool, m2: usize, p2: bool) {
    if m2 == NONE {
        return;
    }
    if *m == NONE {
        *m = m2;
        *p = p2;
        return;
    }
    let lo = (*m).min(m2);
    let has = |mm: usize, pp: bool| (mm == lo && pp) || mm == lo + 1;
    *p = has(*m, *p) || has(m2, p2);
    *m = lo;
}

/// For every base vertex: the largest level of a sink it reaches, and whether
/// that level minus one is also reached.
fn sink_reach(inst: &FlowInstance, level: &[usize]) -> (Vec<usize>, Vec<bool>) {
    let n = inst.n_vertices();
    let mut hi = vec![NONE; n];
    let mut prev = vec![false; n];
    for &v in inst.topological_order().iter().rev() {
        if inst.is_sink(v) {
            hi[v] = level[v];
            continue;
        }
        for &e in inst.out_edges(v) {
            let u = inst.edges()[e].1;
            if hi[u] == NONE {
                continue;
            }
            if hi[v] == NONE {
                hi[v] = hi[u];
                prev[v] = prev[u];
                continue;
            }
            let top = hi[v].max(hi[u]);
            let has = |mm: usize, pp: bool| (mm == top && pp) || mm + 1 == top;
            prev[v] = has(hi[v], prev[v]) || has(hi[u], prev[u]);
            hi[v] = top;
        }
    }
    (hi, prev)
}

/// Membership tests for the subgraphs of one round.
struct Regions {
    lo: Vec<usize>,
    next: Vec<bool>,
    hi: Vec<usize>,
    prev: Vec<bool>,
}

impl Regions {
    /// `S^k ⇝ v`, exact whenever it matters below (`k ≤ lo+1`).
    fn reached_from_s(&self, k: usize, v: usize) -> bool {
        self.lo[v] == k || (self.lo[v] != NONE && self.lo[v] + 1 == k && self.next[v])
    }

    /// `v ⇝ T^k`, exact whenever `k ≥ hi-1`.
    fn to_t(&self, k: usize, v: usize) -> bool {
        self.hi[v] == k || (self.hi[v] != NONE && k + 1 == self.hi[v] && self.prev[v])
    }

    /// The `i` with `v ∈ G^{i,+}`.
    fn plus(&self, v: usize, ell: usize) -> Option<usize> {
        let i = self.lo[v];
        (i <= ell && self.to_t(i, v)).then_some(i)
    }

    /// `v ∈ G^{i,−}`: between `S^{i+1}` and `T^i`.
    fn minus(&self, i: usize, v: usize) -> bool {
        self.reached_from_s(i + 1, v) && self.to_t(i, v)
    }
}

/// One round of the length-increasing procedure.
///
/// Requires every augmenting shortcut path of `f0` to have length at least
/// `2ℓ+1` and returns a flow on a fresh handled graph (G plus `ℓ` new handles)
/// whose augmenting shortcut paths all have length at least `2ℓ+3`.
pub fn inc_len(inst: &FlowInstance, ell: usize, g0: &HandledGraph, f0: &[f64]) -> Result<IncLen> {
    let layers = shortcut_bfs(inst, g0, f0);
    inc_len_with(inst, ell, g0, f0, &layers)
}

fn inc_len_with(inst: &FlowInstance, ell: usize, g0: &HandledGraph, f0: &[f64], layers: &Layers) -> Result<IncLen> {
    let zero = inst.zero_tol();
    let feas = inst.feas_tol();
    if let Some(d) = layers.shortest_augmenting {
        if d < 2 * ell + 1 {
            return Err(Error::Invariant(format!("inc_len({ell}) called with an augmenting path of length {d}")));
        }
    }
    let n = inst.n_vertices();
    let capped = |x: Option<usize>| x.filter(|&i| i <= ell).unwrap_or(ell + 1);
    let mut level = vec![ell + 1; n];
    let mut s_at: Vec<Vec<usize>> = vec![Vec::new(); ell + 1];
    let mut t_at: Vec<Vec<usize>> = vec![Vec::new(); ell + 1];
    for s in inst.sources() {
        level[s] = capped(layers.source_level(s));
        if level[s] <= ell {
            s_at[level[s]].push(s);
        }
    }
    for t in inst.sinks() {
        level[t] = capped(layers.sink_level(t));
        if level[t] <= ell {
            t_at[level[t]].push(t);
        }
    }
    let (lo, next) = source_reach(inst, &level);
    let (hi, prev) = sink_reach(inst, &level);
    let regions = Regions { lo, next, hi, prev };
    let plus_of: Vec<Option<usize>> = (0..n).map(|v| regions.plus(v, ell)).collect();

    // G′ = G plus the handles G^{i,−}, i < ℓ.
    let mut g1 = HandledGraph::base(inst);
    let m_edges = inst.edges().len();
    let mut handle_edge: Vec<Vec<usize>> = Vec::with_capacity(ell);
    let mut copy = vec![NONE; n];
    for i in 0..ell {
        let h = g1.new_handle();
        for v in 0..n {
            copy[v] = if !regions.minus(i, v) {
                NONE
            } else if inst.is_source(v) || inst.is_sink(v) {
                v
            } else {
                g1.push_copy(v)
            };
        }
        let mut map = vec![NONE; m_edges];
        for (e, &(u, v)) in inst.edges().iter().enumerate() {
            if copy[u] != NONE && copy[v] != NONE {
                map[e] = g1.push_edge(copy[u], copy[v], e, Some(h));
            }
        }
        handle_edge.push(map);
    }
    if g1.n_vertices() > 3 * n || g1.n_edges() > 3 * inst.edges().len() {
        return Err(Error::Invariant(format!(
            "handled graph grew to {} vertices / {} edges over base {} / {}",
            g1.n_vertices(),
            g1.n_edges(),
            n,
            inst.edges().len()
        )));
    }

    // Peel f0 into the pieces and project each one.
    let mut rest = f0.to_vec();
    let mut f1 = vec![0.0; g1.n_edges()];
    let mut rerouted = 0.0;
    let mut place = |sub: &[f64], target: &dyn Fn(usize) -> Option<usize>, f1: &mut [f64], what: &str| -> Result<()> {
        for (e, &x) in sub.iter().enumerate() {
            if x <= 0.0 {
                continue;
            }
            let pre = g0.edge_pre[e];
            match target(pre) {
                Some(k) => f1[k] += x,
                None if x <= zero => {
                    f1[pre] += x;
                    rerouted += x;
                }
                None => {
                    return Err(Error::Invariant(format!(
                        "{what}: edge {e} (pre-image {pre}) carries {x} outside its target subgraph"
                    )))
                }
            }
        }
        Ok(())
    };
    for i in 0..=ell {
        let sub = subflow_from(inst, g0, &rest, &s_at[i]);
        subtract(&mut rest, &sub);
        let in_plus = |pre: usize| {
            let (u, v) = inst.edges()[pre];
            (plus_of[u] == Some(i) && plus_of[v] == Some(i)).then_some(pre)
        };
        place(&sub, &in_plus, &mut f1, "sub-flow from S^i")?;
        for s in s_at[..=i].iter().flatten() {
            let left = out_flow(g0, &rest, *s);
            if left > feas {
                return Err(Error::Invariant(format!("source {s} still sends {left} after peeling level {i}")));
            }
        }
        if i == ell {
            break;
        }
        let sub = subflow_to(inst, g0, &rest, &t_at[i]);
        subtract(&mut rest, &sub);
        let map = &handle_edge[i];
        let in_handle = |pre: usize| (map[pre] != NONE).then_some(map[pre]);
        place(&sub, &in_handle, &mut f1, "sub-flow into T^i")?;
        for t in t_at[..=i].iter().flatten() {
            let left = in_flow(g0, &rest, *t);
            if left > feas {
                return Err(Error::Invariant(format!("sink {t} still receives {left} after peeling level {i}")));
            }
        }
    }
    // What remains runs from S^{>ℓ} to T^{≥ℓ}; its vertices only meet G^{ℓ,+}.
    for (e, &x) in rest.iter().enumerate() {
        if x <= 0.0 {
            continue;
        }
        let pre = g0.edge_pre[e];
        let u = inst.edges()[pre].0;
        if x > zero && regions.lo[u] < ell {
            return Err(Error::Invariant(format!("leftover flow {x} on edge {e} below level {ell}")));
        }
        f1[pre] += x;
    }

    // Residual network R and a blocking flow on it.
    let nv = g1.n_vertices();
    let (s_star, t_star) = (nv, nv + 1);
    let mut arcs = Vec::new();
    let mut arc_edge = Vec::new();
    for e in 0..g1.m_base {
        let (u, v) = (g1.tail[e], g1.head[e]);
        if plus_of[u].is_some() && plus_of[u] == plus_of[v] {
            arcs.push((u, v, f64::INFINITY));
            arc_edge.push(Some((e, 1.0)));
        }
    }
    for e in g1.m_base..g1.n_edges() {
        arcs.push((g1.head[e], g1.tail[e], f1[e]));
        arc_edge.push(Some((e, -1.0)));
    }
    for &s in &s_at[0] {
        arcs.push((s_star, s, (inst.supply()[s] - out_flow(&g1, &f1, s)).max(0.0)));
        arc_edge.push(None);
    }
    for &t in &t_at[ell] {
        arcs.push((t, t_star, (inst.capacity(t) - in_flow(&g1, &f1, t)).max(0.0)));
        arc_edge.push(None);
    }
    let net = Network { n: nv + 2, source: s_star, sink: t_star, arcs };
    let g = blocking_flow(&net, zero)?;
    if !is_blocking(&net, &g, zero) {
        return Err(Error::Invariant("residual search found an unblocked path".into()));
    }
    let mut augmented = 0.0;
    for (k, &x) in g.iter().enumerate() {
        match arc_edge[k] {
            Some((e, sign)) => f1[e] = (f1[e] + sign * x).max(0.0),
            None if net.arcs[k].0 == s_star => augmented += x,
            None => {}
        }
    }

    audit_flow(inst, &g1, &f1, feas)?;
    let after = shortcut_bfs(inst, &g1, &f1);
    if let Some(d) = after.shortest_augmenting {
        if d < 2 * ell + 3 {
            return Err(Error::Invariant(format!("after inc_len({ell}) an augmenting path of length {d} remains")));
        }
    }
    Ok(IncLen { graph: g1, flow: f1, augmented, layers: after, rerouted })
}

fn subtract(rest: &mut [f64], sub: &[f64]) {
    for (r, s) in rest.iter_mut().zip(sub) {
        if *s > 0.0 {
            *r = if *s >= *r { 0.0 } else { *r - *s };
        }
    }
}

/// Runs rounds `ℓ = 0..=l_max`, stopping early once no augmenting path exists.
fn run_rounds(inst: &FlowInstance, l_max: usize) -> Result<(HandledGraph, Vec<f64>, Layers, usize)> {
    let mut g = HandledGraph::base(inst);
    let mut f = vec![0.0; g.n_edges()];
    let mut layers = shortcut_bfs(inst, &g, &f);
    let mut rounds = 0;
    for ell in 0..=l_max {
        if layers.shortest_augmenting.is_none() {
            break;
        }
        let step = inc_len_with(inst, ell, &g, &f, &layers)?;
        g = step.graph;
        f = step.flow;
        layers = step.layers;
        rounds += 1;
    }
    Ok((g, f, layers, rounds))
}

fn level_count(eps: f64, phi: f64, total: f64) -> usize {
    let x = (3.0 * total / phi).ln() / (1.0 + eps).ln();
    if x.is_finite() && x > 0.0 {
        x.floor() as usize
    } else {
        0
    }
}

/// Chooses `ℓ* ∈ [0, l]` minimizing `a(S^{>ℓ}) + γ·b(T^{≤ℓ})/scale`; ties go to the smaller `ℓ`.
fn best_prefix(inst: &FlowInstance, layers: &Layers, l: usize, scale: f64) -> WitnessCut {
    let total_a = inst.total_supply();
    let mut a_le = vec![0.0; l + 1];
    let mut b_le = vec![0.0; l + 1];
    for s in inst.sources() {
        if let Some(i) = layers.dist[s].filter(|d| d % 2 == 0).map(|d| d / 2).filter(|&i| i <= l) {
            a_le[i] += inst.supply()[s];
        }
    }
    for t in inst.sinks() {
        if let Some(i) = layers.dist[t].map(|d| (d - 1) / 2).filter(|&i| i <= l) {
            b_le[i] += inst.capacity(t);
        }
    }
    let mut best = (f64::INFINITY, 0);
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    for i in 0..=l {
        acc_a += a_le[i];
        acc_b += b_le[i];
        let val = (total_a - acc_a) + acc_b / scale;
        if val < best.0 {
            best = (val, i);
        }
    }
    let level = best.1;
    let sources: Vec<usize> =
        inst.sources().filter(|&s| layers.dist[s].is_some_and(|d| d % 2 == 0 && d / 2 <= level)).collect();
    let sinks = inst.reachable_sinks(&sources);
    let kept: f64 = sources.iter().map(|&s| inst.supply()[s]).sum();
    let reached: f64 = sinks.iter().map(|&t| inst.capacity(t)).sum();
    WitnessCut { sources, sinks, level, bound: (total_a - kept) + reached / scale }
}

/// Extracts `S′ = S^{≤ℓ*}` from a flow whose shortcut graph has no augmenting
/// path of length at most `2L+1`, `L = ⌊log_{1+ε}(3|a|₁/φ)⌋`.
pub fn find_cut(inst: &FlowInstance, g: &HandledGraph, f: &[f64], eps: f64, phi: f64) -> Result<WitnessCut> {
    check_params(eps, phi)?;
    let l = level_count(eps, phi, inst.total_supply());
    let layers = shortcut_bfs(inst, g, f);
    if let Some(d) = layers.shortest_augmenting {
        if d <= 2 * l + 1 {
            return Err(Error::Argument(format!("an augmenting path of length {d} <= 2L+1 = {} remains", 2 * l + 1)));
        }
    }
    Ok(best_prefix(inst, &layers, l, 1.0 + eps))
}

fn check_params(eps: f64, phi: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Argument(format!("ε = {eps} must be positive")));
    }
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(Error::Argument(format!("φ = {phi} must be positive")));
    }
    Ok(())
}

/// A flow for NFP_γ on G and a cut with
/// `a(S∖S′) + γ·b(T(S′))/(1+ε) ≤ val(f) + φ/3`.
pub fn solve_nfp(inst: &FlowInstance, eps: f64, phi: f64) -> Result<NfpSolution> {
    check_params(eps, phi)?;
    let feas = inst.feas_tol();
    if inst.gamma() == 0.0 {
        let sources: Vec<usize> = inst.sources().collect();
        let sinks = inst.reachable_sinks(&sources);
        let cut = WitnessCut { sources, sinks, level: 0, bound: 0.0 };
        WITNESS_CHECKS.fetch_add(1, Ordering::Relaxed);
        return Ok(NfpSolution { flow: vec![0.0; inst.edges().len()], value: 0.0, cut, rounds: 0 });
    }
    let l = level_count(eps, phi, inst.total_supply());
    let (g, f, layers, rounds) = run_rounds(inst, l)?;
    if let Some(d) = layers.shortest_augmenting {
        if d <= 2 * l + 1 {
            return Err(Error::Invariant(format!("augmenting path of length {d} survived {rounds} rounds")));
        }
    }
    let cut = best_prefix(inst, &layers, l, 1.0 + eps);
    let value = flow_value(inst, &g, &f);
    let flow = project_to_base(&g, &f);
    let base = HandledGraph::base(inst);
    audit_flow(inst, &base, &flow, feas)?;
    if cut.bound > value + phi / 3.0 + feas {
        return Err(Error::Invariant(format!("witness cut {} exceeds val + φ/3 = {}", cut.bound, value + phi / 3.0)));
    }
    WITNESS_CHECKS.fetch_add(1, Ordering::Relaxed);
    Ok(NfpSolution { flow, value, cut, rounds })
}

/// A flow of value at least `max-flow/(1+ε)` for the instance with `γ = 1`,
/// from `⌊1/ε⌋ + 1` length-increasing rounds. The returned `upper_bound` is a
/// cut value that certifies the ratio.
pub fn max_flow_approx(inst: &FlowInstance, eps: f64) -> Result<MaxFlow> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Argument(format!("ε = {eps} must be positive")));
    }
    if inst.gamma() != 1.0 {
        return Err(Error::Argument(format!("max_flow_approx needs γ = 1, got {}", inst.gamma())));
    }
    let l = (1.0 / eps).floor() as usize;
    let (g, f, layers, rounds) = run_rounds(inst, l)?;
    let value = flow_value(inst, &g, &f);
    let flow = project_to_base(&g, &f);
    let feas = inst.feas_tol();
    audit_flow(inst, &HandledGraph::base(inst), &flow, feas)?;
    let cut = best_prefix(inst, &layers, l + 1, 1.0);
    if cut.bound > (1.0 + eps) * value + feas {
        return Err(Error::Invariant(format!("cut {} does not certify flow {value} within 1+ε", cut.bound)));
    }
    Ok(MaxFlow { flow, value, upper_bound: cut.bound, rounds })
}

#[cfg(test)]
mod tests {
    use super::super::exact_max_flow;
    use super::*;

    fn inst(n: usize, edges: &[(usize, usize)], a: &[(usize, f64)], b: &[(usize, f64)], gamma: f64) -> FlowInstance {
        let mut sa = vec![0.0; n];
        let mut sb = vec![0.0; n];
        for &(v, x) in a {
            sa[v] = x;
        }
        for &(v, x) in b {
            sb[v] = x;
        }
        FlowInstance::new(n, edges.to_vec(), sa, sb, gamma).unwrap()
    }

    #[test]
    fn first_round_saturates_a_path() {
        let i = inst(3, &[(0, 1), (1, 2)], &[(0, 1.0)], &[(2, 1.0)], 1.0);
        let g = HandledGraph::base(&i);
        let out = inc_len(&i, 0, &g, &[0.0, 0.0]).unwrap();
        assert_eq!(out.flow, vec![1.0, 1.0]);
        assert_eq!(out.augmented, 1.0);
        assert_eq!(out.layers.shortest_augmenting, None);
    }

    #[test]
    fn saturated_flow_is_unchanged() {
        let i = inst(3, &[(0, 1), (1, 2)], &[(0, 1.0)], &[(2, 1.0)], 1.0);
        let g = HandledGraph::base(&i);
        let out = inc_len(&i, 0, &g, &[1.0, 1.0]).unwrap();
        assert_eq!(out.flow, vec![1.0, 1.0]);
        assert_eq!(out.augmented, 0.0);
    }

    /// Crossing gadget: s0 reaches t0 and t1, s1 reaches only t0. Starting from
    /// s0 → t0, the only augmenting path needs the backward hop t0 ⇢ s0.
    fn crossing() -> FlowInstance {
        // s0=0, s1=1, a=2, b=3, c=4, t0=5, t1=6.
        inst(7, &[(0, 2), (2, 5), (0, 4), (4, 6), (1, 3), (3, 5)], &[(0, 1.0), (1, 1.0)], &[(5, 1.0), (6, 1.0)], 1.0)
    }

    #[test]
    fn crossing_gadget_uses_a_handle() {
        let i = crossing();
        let g = HandledGraph::base(&i);
        let f0 = vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let l = shortcut_bfs(&i, &g, &f0);
        assert_eq!(l.shortest_augmenting, Some(3));
        let out = inc_len(&i, 1, &g, &f0).unwrap();
        assert_eq!(out.graph.handles, 1);
        let value = flow_value(&i, &out.graph, &out.flow);
        assert!((value - exact_max_flow(&i)).abs() < 1e-12, "{value}");
        assert_eq!(project_to_base(&out.graph, &out.flow), vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn nfp_examples() {
        let path = inst(3, &[(0, 1), (1, 2)], &[(0, 2.0)], &[(2, 1.0)], 1.0);
        let sol = solve_nfp(&path, 0.1, 0.1).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);

        // 2×2 complete bipartite reachability through internal vertices.
        let bip = inst(
            6,
            &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 5)],
            &[(0, 1.0), (1, 1.0)],
            &[(4, 1.0), (5, 1.0)],
            1.0,
        );
        let sol = solve_nfp(&bip, 0.1, 0.1).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);

        let zero = path.with_gamma(0.0).unwrap();
        let sol = solve_nfp(&zero, 0.1, 0.1).unwrap();
        assert_eq!(sol.value, 0.0);
        assert_eq!(sol.cut.sources, vec![0]);
    }

    #[test]
    fn cut_when_flow_is_maximum() {
        let i = crossing();
        let sol = solve_nfp(&i, 0.2, 0.3).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
        assert!(sol.cut.sources.is_empty());
        assert!(sol.cut.bound <= sol.value + 0.1 + 1e-12);
    }

    #[test]
    fn cut_for_blocked_source() {
        // s can only reach t with b = 1 while a = 3; the min cut is {s} with value γb/(1+ε).
        let i = inst(3, &[(0, 1), (1, 2)], &[(0, 3.0)], &[(2, 1.0)], 1.0);
        let sol = solve_nfp(&i, 0.5, 0.3).unwrap();
        assert_eq!(sol.cut.sources, vec![0]);
        assert!((sol.cut.bound - 1.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn find_cut_rejects_short_paths() {
        let i = inst(3, &[(0, 1), (1, 2)], &[(0, 1.0)], &[(2, 1.0)], 1.0);
        let g = HandledGraph::base(&i);
        assert!(find_cut(&i, &g, &[0.0, 0.0], 0.1, 0.1).is_err());
        let cut = find_cut(&i, &g, &[1.0, 1.0], 0.1, 0.1).unwrap();
        assert!(cut.sources.is_empty());
    }

    #[test]
    fn max_flow_examples() {
        let none = inst(3, &[(0, 1), (1, 2)], &[(0, 1.0)], &[(2, 1.0)], 1.0);
        let empty = FlowInstance::new(0, vec![], vec![], vec![], 1.0).unwrap();
        assert_eq!(max_flow_approx(&empty, 0.5).unwrap().value, 0.0);
        assert_eq!(max_flow_approx(&none, 0.5).unwrap().value, 1.0);
        // Disjoint pairs with matched supply and demand.
        let pairs = inst(6, &[(0, 1), (1, 2), (3, 4), (4, 5)], &[(0, 2.0), (3, 5.0)], &[(2, 2.0), (5, 5.0)], 1.0);
        assert_eq!(max_flow_approx(&pairs, 0.5).unwrap().value, 7.0);
        assert!(max_flow_approx(&pairs.with_gamma(2.0).unwrap(), 0.5).is_err());
    }
}
