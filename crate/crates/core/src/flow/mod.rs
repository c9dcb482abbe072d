//! Approximate flows on DAGs with source supplies and sink demands.
//!
//! The flow problem NFP_γ has uncapacitated edges, supply `a_s` at each source
//! and demand `γ·b_t` at each sink. [`solve_nfp`] returns a flow together with a
//! source set `S′` whose cut value `a(S∖S′) + γ·b(T(S′))/(1+ε)` is within `φ/3`
//! of the flow value, [`max_flow_approx`] gives a `1/(1+ε)`-approximate maximum
//! flow, and [`aggregate_oracle`] uses the cuts of a geometric sweep over γ to
//! optimize over the monotone polytope `{y ∈ [0,1]^V : y_v ≤ y_u ∀(v,u)}`.
//!
//! Flows are grown on handled graphs: `G` plus copies ("handles") of subgraphs
//! that share only sources and sinks with `G`. Each [`inc_len`] round raises the
//! shortest augmenting path in the source/sink shortcut graph by two.

mod aggregate;
mod blocking;
mod exact;
mod graph;
mod nfp;

pub use aggregate::{aggregate_oracle, gamma_grid, AggregateSolution};
pub use blocking::{blocking_flow, is_blocking, Network};
pub use exact::exact_max_flow;
pub use graph::{
    audit_flow, flow_value, project_to_base, project_to_subgraph, shortcut_bfs, subflow_from, subflow_to, HandledGraph,
    Layers,
};
pub use nfp::{
    find_cut, inc_len, max_flow_approx, solve_nfp, witness_checks, IncLen, MaxFlow, NfpSolution, WitnessCut,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Relative threshold below which residuals, flow values and slacks count as zero.
const ZERO_REL: f64 = 1e-12;
/// Relative feasibility tolerance for audits and certificate checks.
const FEAS_REL: f64 = 1e-9;

/// A DAG with per-vertex supply `a` and demand `b`, not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct RawNetwork {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub supply: Vec<f64>,
    pub demand: Vec<f64>,
}

/// JSON form: `{"vertices":N, "edges":[[u,v],..], "supplies":[[s,a],..], "demands":[[t,b],..], "gamma":g}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowFile {
    pub vertices: usize,
    #[serde(default)]
    pub edges: Vec<(usize, usize)>,
    #[serde(default)]
    pub supplies: Vec<(usize, f64)>,
    #[serde(default)]
    pub demands: Vec<(usize, f64)>,
    #[serde(default = "one")]
    pub gamma: f64,
}

fn one() -> f64 {
    1.0
}

impl FlowFile {
    pub fn from_json(text: &str) -> Result<FlowFile> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn network(&self) -> Result<RawNetwork> {
        let n = self.vertices;
        let mut supply = vec![0.0; n];
        let mut demand = vec![0.0; n];
        for (list, target, what) in [(&self.supplies, &mut supply, "supply"), (&self.demands, &mut demand, "demand")] {
            for &(v, x) in list {
                if v >= n {
                    return Err(Error::Validation(format!("{what} vertex {v} out of range 0..{n}")));
                }
                target[v] += x;
            }
        }
        let net = RawNetwork { n_vertices: n, edges: self.edges.clone(), supply, demand };
        net.validate()?;
        Ok(net)
    }
}

impl RawNetwork {
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vertices;
        if self.supply.len() != n || self.demand.len() != n {
            return Err(Error::Validation(format!("supply/demand vectors must have length {n}")));
        }
        for (v, (&a, &b)) in self.supply.iter().zip(&self.demand).enumerate() {
            if !(a >= 0.0 && a.is_finite() && b >= 0.0 && b.is_finite()) {
                return Err(Error::Validation(format!(
                    "vertex {v}: supply {a} and demand {b} must be finite and >= 0"
                )));
            }
        }
        for &(u, v) in &self.edges {
            if u >= n || v >= n {
                return Err(Error::Validation(format!("edge ({u}, {v}) out of range 0..{n}")));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop at {u}")));
            }
        }
        topological_order(n, &self.edges).map(|_| ())
    }
}

/// Kahn's algorithm, smallest ready vertex first.
fn topological_order(n: usize, edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(u, v) in edges {
        indeg[v] += 1;
        out[u].push(v);
    }
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(std::cmp::Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(u)) = ready.pop() {
        order.push(u);
        for &v in &out[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(std::cmp::Reverse(v));
            }
        }
    }
    if order.len() < n {
        return Err(Error::Validation(
            "graph has a directed cycle; contract strongly connected components first".into(),
        ));
    }
    Ok(order)
}

/// A normalized NFP_γ instance: sources have no in-edges, sinks no out-edges,
/// no vertex is both, no edge joins a source to a sink, and every vertex lies
/// on some source-to-sink path.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowInstance {
    n: usize,
    edges: Vec<(usize, usize)>,
    supply: Vec<f64>,
    demand: Vec<f64>,
    gamma: f64,
    order: Vec<usize>,
    rank: Vec<usize>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl FlowInstance {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, supply: Vec<f64>, demand: Vec<f64>, gamma: f64) -> Result<Self> {
        let net = RawNetwork { n_vertices: n, edges, supply, demand };
        net.validate()?;
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Validation(format!("γ = {gamma} must be finite and >= 0")));
        }
        let RawNetwork { edges, supply, demand, .. } = net;
        let order = topological_order(n, &edges)?;
        let mut rank = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            rank[v] = k;
        }
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for (e, &(u, v)) in edges.iter().enumerate() {
            out[u].push(e);
            inn[v].push(e);
        }
        let inst = FlowInstance { n, edges, supply, demand, gamma, order, rank, out, inn };
        inst.check_normalized()?;
        Ok(inst)
    }

    fn check_normalized(&self) -> Result<()> {
        for v in 0..self.n {
            let (s, t) = (self.is_source(v), self.is_sink(v));
            if s && t {
                return Err(Error::Validation(format!("vertex {v} is both a source and a sink")));
            }
            if s && !self.inn[v].is_empty() {
                return Err(Error::Validation(format!("source {v} has incoming edges")));
            }
            if t && !self.out[v].is_empty() {
                return Err(Error::Validation(format!("sink {v} has outgoing edges")));
            }
        }
        for &(u, v) in &self.edges {
            if self.is_source(u) && self.is_sink(v) {
                return Err(Error::Validation(format!("edge ({u}, {v}) joins a source to a sink")));
            }
        }
        let from_s = reach(self.n, &self.out, |e| self.edges[e].1, (0..self.n).filter(|&v| self.is_source(v)));
        let to_t = reach(self.n, &self.inn, |e| self.edges[e].0, (0..self.n).filter(|&v| self.is_sink(v)));
        if let Some(v) = (0..self.n).find(|&v| !(from_s[v] && to_t[v])) {
            return Err(Error::Validation(format!("vertex {v} is not on any source-to-sink path")));
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn supply(&self) -> &[f64] {
        &self.supply
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<FlowInstance> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Validation(format!("γ = {gamma} must be finite and >= 0")));
        }
        Ok(FlowInstance { gamma, ..self.clone() })
    }

    pub fn is_source(&self, v: usize) -> bool {
        v < self.n && self.supply[v] > 0.0
    }

    pub fn is_sink(&self, v: usize) -> bool {
        v < self.n && self.demand[v] > 0.0
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.is_source(v))
    }

    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.is_sink(v))
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn total_supply(&self) -> f64 {
        self.supply.iter().sum()
    }

    /// Sink capacity `γ·b_t`.
    pub fn capacity(&self, t: usize) -> f64 {
        self.gamma * self.demand[t]
    }

    pub(crate) fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }

    pub(crate) fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub(crate) fn in_edges(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub(crate) fn zero_tol(&self) -> f64 {
        ZERO_REL * self.total_supply().max(1.0)
    }

    pub(crate) fn feas_tol(&self) -> f64 {
        FEAS_REL * self.total_supply().max(1.0)
    }

    /// Sinks reachable in G from `sources`.
    pub fn reachable_sinks(&self, sources: &[usize]) -> Vec<usize> {
        let seen = reach(self.n, &self.out, |e| self.edges[e].1, sources.iter().copied());
        self.sinks().filter(|&t| seen[t]).collect()
    }

    /// Vertices reachable in G from `sources`.
    pub fn reachable_from(&self, sources: &[usize]) -> Vec<bool> {
        reach(self.n, &self.out, |e| self.edges[e].1, sources.iter().copied())
    }
}

fn reach(
    n: usize,
    adj: &[Vec<usize>],
    other: impl Fn(usize) -> usize,
    start: impl Iterator<Item = usize>,
) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for s in start {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &e in &adj[v] {
            let u = other(e);
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// How a normalized instance maps back to the raw network it came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LiftInfo {
    pub n_original: usize,
    /// Normalized index of each kept original vertex.
    pub vertex_map: Vec<Option<usize>>,
    /// Deleted original vertices and the value their y is fixed to.
    pub fixed: Vec<(usize, f64)>,
    /// Pendant vertices added: `(normalized index, original vertex it hangs off)`.
    pub pendants: Vec<(usize, usize)>,
    /// Normalized index of each original edge that survived.
    pub edge_map: Vec<Option<usize>>,
    /// `Σ a_v` over deleted vertices with y fixed to 1.
    pub offset: f64,
}

impl LiftInfo {
    /// True when normalization changed nothing.
    pub fn is_trivial(&self) -> bool {
        self.fixed.is_empty() && self.pendants.is_empty() && self.offset == 0.0
    }

    /// Extends y on the normalized graph to the original vertices.
    pub fn lift_y(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_original];
        for (v, m) in self.vertex_map.iter().enumerate() {
            if let Some(k) = m {
                out[v] = y[*k];
            }
        }
        for &(v, val) in &self.fixed {
            out[v] = val;
        }
        out
    }

    /// Restricts a flow on the normalized graph to the original edges. Pendant
    /// edges carry a vertex's own supply or demand and have no original edge.
    pub fn lift_flow(&self, f: &[f64]) -> Vec<f64> {
        self.edge_map.iter().map(|m| m.map_or(0.0, |k| f[k])).collect()
    }
}

/// Rewrites `net` into a normalized instance.
///
/// Vertices no source reaches get y = 0 and vertices that reach no sink get
/// y = 1 (their supply goes to the offset); both are deleted. A kept vertex with
/// supply that has in-edges, demand, or an edge into a sink hands its supply to
/// a fresh pendant source `s′ → v`; a kept vertex with demand that has
/// out-edges or supply hands it to a fresh pendant sink `v → t′`.
pub fn normalize(net: &RawNetwork, gamma: f64) -> Result<(FlowInstance, LiftInfo)> {
    net.validate()?;
    let n = net.n_vertices;
    let mut out = vec![Vec::new(); n];
    let mut inn = vec![Vec::new(); n];
    for (e, &(u, v)) in net.edges.iter().enumerate() {
        out[u].push(e);
        inn[v].push(e);
    }
    let from_s = reach(n, &out, |e| net.edges[e].1, (0..n).filter(|&v| net.supply[v] > 0.0));
    let to_t = reach(n, &inn, |e| net.edges[e].0, (0..n).filter(|&v| net.demand[v] > 0.0));

    let mut lift = LiftInfo {
        n_original: n,
        vertex_map: vec![None; n],
        edge_map: vec![None; net.edges.len()],
        ..LiftInfo::default()
    };
    let mut kept = 0;
    for v in 0..n {
        if !from_s[v] {
            lift.fixed.push((v, 0.0));
        } else if !to_t[v] {
            lift.fixed.push((v, 1.0));
            lift.offset += net.supply[v];
        } else {
            lift.vertex_map[v] = Some(kept);
            kept += 1;
        }
    }
    let mut edges = Vec::new();
    for (e, &(u, v)) in net.edges.iter().enumerate() {
        if let (Some(a), Some(b)) = (lift.vertex_map[u], lift.vertex_map[v]) {
            lift.edge_map[e] = Some(edges.len());
            edges.push((a, b));
        }
    }
    let mut supply: Vec<f64> = vec![0.0; kept];
    let mut demand: Vec<f64> = vec![0.0; kept];
    let mut has_in = vec![false; kept];
    let mut has_out = vec![false; kept];
    let mut feeds_sink = vec![false; kept];
    for (v, m) in lift.vertex_map.iter().enumerate() {
        if let Some(k) = *m {
            supply[k] = net.supply[v];
            demand[k] = net.demand[v];
        }
    }
    for &(a, b) in &edges {
        has_out[a] = true;
        has_in[b] = true;
        if demand[b] > 0.0 {
            feeds_sink[a] = true;
        }
    }
    let orig_of: Vec<usize> = {
        let mut o = vec![0; kept];
        for (v, m) in lift.vertex_map.iter().enumerate() {
            if let Some(k) = *m {
                o[k] = v;
            }
        }
        o
    };
    let mut next = kept;
    for k in 0..kept {
        if supply[k] > 0.0 && (has_in[k] || demand[k] > 0.0 || feeds_sink[k]) {
            supply.push(supply[k]);
            demand.push(0.0);
            supply[k] = 0.0;
            edges.push((next, k));
            lift.pendants.push((next, orig_of[k]));
            next += 1;
        }
    }
    for k in 0..kept {
        if demand[k] > 0.0 && (has_out[k] || supply[k] > 0.0 || lift.pendants.iter().any(|&(_, o)| o == orig_of[k])) {
            supply.push(0.0);
            demand.push(demand[k]);
            demand[k] = 0.0;
            edges.push((k, next));
            lift.pendants.push((next, orig_of[k]));
            next += 1;
        }
    }
    let inst = FlowInstance::new(next, edges, supply, demand, gamma)?;
    Ok((inst, lift))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n: usize, edges: &[(usize, usize)], a: &[f64], b: &[f64]) -> RawNetwork {
        RawNetwork { n_vertices: n, edges: edges.to_vec(), supply: a.to_vec(), demand: b.to_vec() }
    }

    #[test]
    fn normalized_input_is_a_fixed_point() {
        let raw = net(3, &[(0, 1), (1, 2)], &[2.0, 0.0, 0.0], &[0.0, 0.0, 1.0]);
        let (inst, lift) = normalize(&raw, 1.0).unwrap();
        assert!(lift.is_trivial());
        assert_eq!(inst.edges(), raw.edges.as_slice());
        assert_eq!(inst.supply(), raw.supply.as_slice());
    }

    #[test]
    fn isolated_supply_vertex_is_fixed_to_one() {
        let raw = net(4, &[(0, 1), (1, 2)], &[2.0, 0.0, 0.0, 3.0], &[0.0, 0.0, 1.0, 0.0]);
        let (inst, lift) = normalize(&raw, 1.0).unwrap();
        assert_eq!(inst.n_vertices(), 3);
        assert_eq!(lift.fixed, vec![(3, 1.0)]);
        assert_eq!(lift.offset, 3.0);
        assert_eq!(lift.lift_y(&[0.5, 0.5, 0.5]), vec![0.5, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn supply_with_in_edge_gets_pendant() {
        // 0 → 1 → 2, supplies at 0 and 1, demand at 2.
        let raw = net(3, &[(0, 1), (1, 2)], &[1.0, 4.0, 0.0], &[0.0, 0.0, 1.0]);
        let (inst, lift) = normalize(&raw, 1.0).unwrap();
        assert_eq!(inst.n_vertices(), 4);
        assert_eq!(lift.pendants, vec![(3, 1)]);
        assert_eq!(inst.supply()[3], 4.0);
        assert_eq!(inst.supply()[1], 0.0);
        assert!(inst.edges().contains(&(3, 1)));
    }

    #[test]
    fn source_sink_edge_and_dual_role() {
        // 0 → 1 directly; vertex 2 has both supply and demand.
        let raw = net(3, &[(0, 1)], &[1.0, 0.0, 2.0], &[0.0, 1.0, 5.0]);
        let (inst, lift) = normalize(&raw, 1.0).unwrap();
        // pendants: source for 0 (feeds a sink), source for 2, sink for 2.
        assert_eq!(lift.pendants.len(), 3);
        assert_eq!(inst.sources().count(), 2);
        assert_eq!(inst.sinks().count(), 2);
    }

    #[test]
    fn unreached_vertex_fixed_to_zero() {
        let raw = net(3, &[(2, 1)], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        let (inst, lift) = normalize(&raw, 1.0).unwrap();
        assert!(lift.fixed.contains(&(2, 0.0)));
        assert!(lift.fixed.contains(&(0, 1.0)));
        assert_eq!(lift.offset, 1.0);
        assert_eq!(inst.n_vertices(), 0);
    }

    #[test]
    fn cycle_rejected() {
        let raw = net(2, &[(0, 1), (1, 0)], &[1.0, 0.0], &[0.0, 1.0]);
        assert!(matches!(normalize(&raw, 1.0), Err(Error::Validation(_))));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":3,"edges":[[0,1],[1,2]],"supplies":[[0,2.0]],"demands":[[2,1.0]],"gamma":1}"#;
        let file = FlowFile::from_json(text).unwrap();
        let raw = file.network().unwrap();
        assert_eq!(raw.supply, vec![2.0, 0.0, 0.0]);
        let err = FlowFile::from_json("{\"vertices\":3,\n\"edges\":[[0,1]").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
