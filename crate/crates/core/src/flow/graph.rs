use super::FlowInstance;
use crate::error::{Error, Result};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

/// `G` plus handles. Vertices `0..n_base` and edges `0..m_base` are `G` itself;
/// later vertices are copies of internal vertices of `G`, later edges belong to handles.
#[derive(Debug, Clone, PartialEq)]
pub struct HandledGraph {
    pub n_base: usize,
    pub m_base: usize,
    /// Pre-image in G of every vertex.
    pub pi: Vec<usize>,
    pub tail: Vec<usize>,
    pub head: Vec<usize>,
    /// Pre-image in G of every edge.
    pub edge_pre: Vec<usize>,
    /// Handle index of every edge, `None` for edges of G.
    pub handle_of: Vec<Option<usize>>,
    pub handles: usize,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl HandledGraph {
    pub fn base(inst: &FlowInstance) -> HandledGraph {
        let n = inst.n_vertices();
        let m = inst.edges().len();
        let mut g = HandledGraph {
            n_base: n,
            m_base: m,
            pi: (0..n).collect(),
            tail: Vec::with_capacity(m),
            head: Vec::with_capacity(m),
            edge_pre: Vec::with_capacity(m),
            handle_of: Vec::with_capacity(m),
            handles: 0,
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
        };
        for (e, &(u, v)) in inst.edges().iter().enumerate() {
            g.push_edge(u, v, e, None);
        }
        g
    }

    pub fn n_vertices(&self) -> usize {
        self.pi.len()
    }

    pub fn n_edges(&self) -> usize {
        self.tail.len()
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub(crate) fn new_handle(&mut self) -> usize {
        self.handles += 1;
        self.handles - 1
    }

    pub(crate) fn push_copy(&mut self, pre: usize) -> usize {
        self.pi.push(pre);
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        self.pi.len() - 1
    }

    pub(crate) fn push_edge(&mut self, u: usize, v: usize, pre: usize, handle: Option<usize>) -> usize {
        let e = self.tail.len();
        self.tail.push(u);
        self.head.push(v);
        self.edge_pre.push(pre);
        self.handle_of.push(handle);
        self.out[u].push(e);
        self.inn[v].push(e);
        e
    }

    fn out_flow(&self, f: &[f64], v: usize) -> f64 {
        self.out[v].iter().map(|&e| f[e]).sum()
    }

    fn in_flow(&self, f: &[f64], v: usize) -> f64 {
        self.inn[v].iter().map(|&e| f[e]).sum()
    }
}

pub(crate) fn out_flow(g: &HandledGraph, f: &[f64], v: usize) -> f64 {
    g.out_flow(f, v)
}

pub(crate) fn in_flow(g: &HandledGraph, f: &[f64], v: usize) -> f64 {
    g.in_flow(f, v)
}

/// `val(f)`: total flow leaving the sources.
pub fn flow_value(inst: &FlowInstance, g: &HandledGraph, f: &[f64]) -> f64 {
    inst.sources().map(|s| g.out_flow(f, s)).sum()
}

/// Independent validity check: non-negativity, conservation at every vertex
/// outside S ∪ T, supply and demand limits.
pub fn audit_flow(inst: &FlowInstance, g: &HandledGraph, f: &[f64], tol: f64) -> Result<()> {
    if f.len() != g.n_edges() {
        return Err(Error::Invariant(format!("flow has {} entries for {} edges", f.len(), g.n_edges())));
    }
    if let Some(e) = f.iter().position(|&x| !(x >= -tol && x.is_finite())) {
        return Err(Error::Invariant(format!("flow on edge {e} is {}", f[e])));
    }
    for v in 0..g.n_vertices() {
        let (fin, fout) = (g.in_flow(f, v), g.out_flow(f, v));
        if inst.is_source(v) {
            if fout > inst.supply()[v] + tol {
                return Err(Error::Invariant(format!("source {v} sends {fout} > supply {}", inst.supply()[v])));
            }
        } else if inst.is_sink(v) {
            if fin > inst.capacity(v) + tol {
                return Err(Error::Invariant(format!("sink {v} receives {fin} > γb = {}", inst.capacity(v))));
            }
        } else if (fin - fout).abs() > tol {
            return Err(Error::Invariant(format!("conservation fails at vertex {v}: in {fin}, out {fout}")));
        }
    }
    Ok(())
}

fn rank(inst: &FlowInstance, g: &HandledGraph, v: usize) -> usize {
    inst.rank(g.pi[v])
}

/// The part of `f` sent by `from`: vertices are visited in topological order and
/// each forwards what it received along its out-edges, never exceeding `f`.
pub fn subflow_from(inst: &FlowInstance, g: &HandledGraph, f: &[f64], from: &[usize]) -> Vec<f64> {
    let mut sub = vec![0.0; f.len()];
    let mut amount = vec![0.0; g.n_vertices()];
    let mut queued = vec![false; g.n_vertices()];
    let mut heap = BinaryHeap::new();
    for &s in from {
        if !queued[s] {
            amount[s] = g.out_flow(f, s);
            queued[s] = true;
            heap.push(Reverse((rank(inst, g, s), s)));
        }
    }
    while let Some(Reverse((_, v))) = heap.pop() {
        if inst.is_sink(v) {
            continue;
        }
        let mut rem = amount[v];
        for &e in &g.out[v] {
            if rem <= 0.0 {
                break;
            }
            if f[e] <= 0.0 {
                continue;
            }
            let take = f[e].min(rem);
            sub[e] = take;
            rem -= take;
            let h = g.head[e];
            amount[h] += take;
            if !queued[h] {
                queued[h] = true;
                heap.push(Reverse((rank(inst, g, h), h)));
            }
        }
    }
    sub
}

/// The part of `f` received by `to`, peeled in reverse topological order.
pub fn subflow_to(inst: &FlowInstance, g: &HandledGraph, f: &[f64], to: &[usize]) -> Vec<f64> {
    let mut sub = vec![0.0; f.len()];
    let mut amount = vec![0.0; g.n_vertices()];
    let mut queued = vec![false; g.n_vertices()];
    let mut heap = BinaryHeap::new();
    for &t in to {
        if !queued[t] {
            amount[t] = g.in_flow(f, t);
            queued[t] = true;
            heap.push((rank(inst, g, t), t));
        }
    }
    while let Some((_, v)) = heap.pop() {
        if inst.is_source(v) {
            continue;
        }
        let mut rem = amount[v];
        for &e in &g.inn[v] {
            if rem <= 0.0 {
                break;
            }
            if f[e] <= 0.0 {
                continue;
            }
            let take = f[e].min(rem);
            sub[e] = take;
            rem -= take;
            let t = g.tail[e];
            amount[t] += take;
            if !queued[t] {
                queued[t] = true;
                heap.push((rank(inst, g, t), t));
            }
        }
    }
    sub
}

/// Projection onto G: sums flow over edges with the same pre-image.
pub fn project_to_base(g: &HandledGraph, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.m_base];
    for (e, &x) in f.iter().enumerate() {
        out[g.edge_pre[e]] += x;
    }
    out
}

/// Projection onto the subgraph of G induced by the base vertices marked in
/// `keep`. Fails on a support edge whose pre-image leaves that subgraph.
pub fn project_to_subgraph(inst: &FlowInstance, g: &HandledGraph, f: &[f64], keep: &[bool]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; g.m_base];
    for (e, &x) in f.iter().enumerate() {
        if x <= 0.0 {
            continue;
        }
        let pre = g.edge_pre[e];
        let (u, v) = inst.edges()[pre];
        if !(keep[u] && keep[v]) {
            return Err(Error::Invariant(format!(
                "edge {e} ({} → {}) carries {x} but its pre-image ({u} → {v}) is not in the target",
                g.tail[e], g.head[e]
            )));
        }
        out[pre] += x;
    }
    Ok(out)
}

/// Alternating shortcut-path distances, measured on the doubled graph
/// `{(v,0),(v,1)}`: layer 0 walks edges of G forward at cost 0, layer 1 walks
/// support edges backward at cost 0, a sink steps 0→1 and a source 1→0 at cost 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Layers {
    /// Distance of `(s,0)` for sources and of `(t,1)` for sinks; `None` if unreached.
    pub dist: Vec<Option<usize>>,
    /// Length of the shortest augmenting path, if any.
    pub shortest_augmenting: Option<usize>,
    pub unsatisfied: Vec<usize>,
    pub unsaturated: Vec<usize>,
}

impl Layers {
    /// `i` with `dist(s) = 2i`.
    pub fn source_level(&self, s: usize) -> Option<usize> {
        self.dist[s].map(|d| d / 2)
    }

    /// `i` with `dist(t) = 2i+1`.
    pub fn sink_level(&self, t: usize) -> Option<usize> {
        self.dist[t].map(|d| (d - 1) / 2)
    }

    /// S^i.
    pub fn sources_at(&self, inst: &FlowInstance, i: usize) -> Vec<usize> {
        inst.sources().filter(|&s| self.dist[s] == Some(2 * i)).collect()
    }

    /// T^i.
    pub fn sinks_at(&self, inst: &FlowInstance, i: usize) -> Vec<usize> {
        inst.sinks().filter(|&t| self.dist[t] == Some(2 * i + 1)).collect()
    }
}

pub fn shortcut_bfs(inst: &FlowInstance, g: &HandledGraph, f: &[f64]) -> Layers {
    let zero = inst.zero_tol();
    let nv = g.n_vertices();
    let mut dist = [vec![usize::MAX; nv], vec![usize::MAX; nv]];
    let mut deque = VecDeque::new();
    let mut unsatisfied = Vec::new();
    for s in inst.sources() {
        if inst.supply()[s] - g.out_flow(f, s) > zero {
            unsatisfied.push(s);
            dist[0][s] = 0;
            deque.push_back((s, 0usize));
        }
    }
    while let Some((v, layer)) = deque.pop_front() {
        let d = dist[layer][v];
        if layer == 0 {
            if inst.is_sink(v) && d + 1 < dist[1][v] {
                dist[1][v] = d + 1;
                deque.push_back((v, 1));
            }
            for &e in &g.out[v] {
                let u = g.head[e];
                if e < g.m_base && d < dist[0][u] {
                    dist[0][u] = d;
                    deque.push_front((u, 0));
                }
            }
        } else {
            if inst.is_source(v) && d + 1 < dist[0][v] {
                dist[0][v] = d + 1;
                deque.push_back((v, 0));
            }
            for &e in &g.inn[v] {
                let u = g.tail[e];
                if f[e] > zero && d < dist[1][u] {
                    dist[1][u] = d;
                    deque.push_front((u, 1));
                }
            }
        }
    }
    let mut out = vec![None; g.n_base];
    for s in inst.sources() {
        out[s] = (dist[0][s] != usize::MAX).then_some(dist[0][s]);
    }
    let mut unsaturated = Vec::new();
    let mut shortest: Option<usize> = None;
    for t in inst.sinks() {
        let d = (dist[1][t] != usize::MAX).then_some(dist[1][t]);
        out[t] = d;
        if inst.capacity(t) - g.in_flow(f, t) > zero {
            unsaturated.push(t);
            if let Some(d) = d {
                shortest = Some(shortest.map_or(d, |x: usize| x.min(d)));
            }
        }
    }
    Layers { dist: out, shortest_augmenting: shortest, unsatisfied, unsaturated }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two sources sharing one path edge: s0 → a, s1 → a, a → b, b → t.
    fn shared() -> FlowInstance {
        FlowInstance::new(
            5,
            vec![(0, 2), (1, 2), (2, 3), (3, 4)],
            vec![1.0, 2.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 5.0],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn subflow_of_one_source() {
        let inst = shared();
        let g = HandledGraph::base(&inst);
        let f = vec![1.0, 2.0, 3.0, 3.0];
        let sub = subflow_from(&inst, &g, &f, &[0]);
        assert_eq!(sub, vec![1.0, 0.0, 1.0, 1.0]);
        assert!(sub.iter().zip(&f).all(|(a, b)| a <= b));
        assert_eq!(subflow_from(&inst, &g, &f, &[0, 1]), f);
        assert_eq!(subflow_from(&inst, &g, &f, &[]), vec![0.0; 4]);
        let to = subflow_to(&inst, &g, &f, &[4]);
        assert_eq!(to, f);
    }

    #[test]
    fn projection_adds_copies() {
        // s → v → t with a handle copy v′ of v.
        let inst = FlowInstance::new(3, vec![(0, 1), (1, 2)], vec![2.0, 0.0, 0.0], vec![0.0, 0.0, 2.0], 1.0).unwrap();
        let mut g = HandledGraph::base(&inst);
        let h = g.new_handle();
        let c = g.push_copy(1);
        g.push_edge(0, c, 0, Some(h));
        g.push_edge(c, 2, 1, Some(h));
        let f = vec![0.5, 0.5, 1.5, 1.5];
        audit_flow(&inst, &g, &f, 1e-12).unwrap();
        assert_eq!(project_to_base(&g, &f), vec![2.0, 2.0]);
        assert_eq!(project_to_subgraph(&inst, &g, &f, &[true; 3]).unwrap(), vec![2.0, 2.0]);
        assert!(project_to_subgraph(&inst, &g, &f, &[true, true, false]).is_err());
    }

    #[test]
    fn bfs_on_zero_flow_is_reachability() {
        let inst = shared();
        let g = HandledGraph::base(&inst);
        let l = shortcut_bfs(&inst, &g, &[0.0; 4]);
        assert_eq!(l.dist[0], Some(0));
        assert_eq!(l.dist[1], Some(0));
        assert_eq!(l.dist[4], Some(1));
        assert_eq!(l.shortest_augmenting, Some(1));
    }

    #[test]
    fn bfs_backward_hop_through_saturated_sink() {
        // s0 → t0, s1 → t0 via internal vertices; s1 also → t1. t0 saturated by s1.
        // Vertices: s0=0, s1=1, a=2, b=3, c=4, t0=5, t1=6.
        let inst = FlowInstance::new(
            7,
            vec![(0, 2), (2, 5), (1, 3), (3, 5), (1, 4), (4, 6)],
            vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            1.0,
        )
        .unwrap();
        let g = HandledGraph::base(&inst);
        let f = vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let l = shortcut_bfs(&inst, &g, &f);
        assert_eq!(l.unsatisfied, vec![0]);
        assert_eq!(l.dist[5], Some(1));
        assert_eq!(l.source_level(1), Some(1));
        assert_eq!(l.sink_level(6), Some(1));
        assert_eq!(l.shortest_augmenting, Some(3));
    }

    #[test]
    fn all_satisfied_gives_empty_layers() {
        let inst = shared();
        let g = HandledGraph::base(&inst);
        let l = shortcut_bfs(&inst, &g, &[1.0, 2.0, 3.0, 3.0]);
        assert!(l.dist.iter().all(Option::is_none));
        assert_eq!(l.shortest_augmenting, None);
    }
}
