use super::FlowInstance;
use std::collections::VecDeque;

/// Exact maximum flow of NFP_γ by shortest augmenting paths (Edmonds–Karp) on
/// the reduction with a super-source feeding `a_s` and a super-sink taking
/// `γ·b_t`. Reference oracle for small instances.
pub fn exact_max_flow(inst: &FlowInstance) -> f64 {
    let n = inst.n_vertices();
    let (src, snk) = (n, n + 1);
    let big = inst.total_supply() + 1.0;
    // Arc k and k^1 are mutual reverses.
    let mut to = Vec::new();
    let mut cap = Vec::new();
    let mut adj = vec![Vec::new(); n + 2];
    let mut add = |u: usize, v: usize, c: f64, to: &mut Vec<usize>, cap: &mut Vec<f64>| {
        adj[u].push(to.len());
        to.push(v);
        cap.push(c);
        adj[v].push(to.len());
        to.push(u);
        cap.push(0.0);
    };
    for &(u, v) in inst.edges() {
        add(u, v, big, &mut to, &mut cap);
    }
    for s in inst.sources() {
        add(src, s, inst.supply()[s], &mut to, &mut cap);
    }
    for t in inst.sinks() {
        add(t, snk, inst.capacity(t), &mut to, &mut cap);
    }
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n + 2];
        let mut queue = VecDeque::from([src]);
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            if u == snk {
                found = true;
                break;
            }
            for &k in &adj[u] {
                let v = to[k];
                if v != src && prev[v] == usize::MAX && cap[k] > 1e-15 {
                    prev[v] = k;
                    queue.push_back(v);
                }
            }
        }
        if !found {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = snk;
        while v != src {
            let k = prev[v];
            push = push.min(cap[k]);
            v = to[k ^ 1];
        }
        let mut v = snk;
        while v != src {
            let k = prev[v];
            cap[k] -= push;
            cap[k ^ 1] += push;
            v = to[k ^ 1];
        }
        total += push;
    }
}
