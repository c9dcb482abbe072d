use crate::error::{Error, Result};

/// A capacitated DAG with a designated source and sink. Capacities may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub n: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<(usize, usize, f64)>,
}

impl Network {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for (a, &(u, _, _)) in self.arcs.iter().enumerate() {
            out[u].push(a);
        }
        out
    }

    fn check(&self) -> Result<()> {
        if self.source >= self.n || self.sink >= self.n || self.source == self.sink {
            return Err(Error::Argument("source and sink must be distinct vertices".into()));
        }
        let mut indeg = vec![0usize; self.n];
        for &(u, v, c) in &self.arcs {
            if u >= self.n || v >= self.n {
                return Err(Error::Argument(format!("arc ({u}, {v}) out of range")));
            }
            if !(c >= 0.0) {
                return Err(Error::Argument(format!("arc ({u}, {v}) has capacity {c}")));
            }
            indeg[v] += 1;
        }
        let out = self.adjacency();
        let mut stack: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(u) = stack.pop() {
            seen += 1;
            for &a in &out[u] {
                let v = self.arcs[a].1;
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
        if seen < self.n {
            return Err(Error::Argument("blocking flow needs an acyclic network".into()));
        }
        Ok(())
    }
}

/// A flow `g ≤ c` such that every source-to-sink path has an arc with
/// residual at most `zero`. Depth-first search with current-arc pointers: in a
/// DAG a vertex that once had no usable arc stays dead.
pub fn blocking_flow(net: &Network, zero: f64) -> Result<Vec<f64>> {
    net.check()?;
    let out = net.adjacency();
    let mut g = vec![0.0; net.arcs.len()];
    let mut ptr = vec![0usize; net.n];
    let mut dead = vec![false; net.n];
    let residual = |g: &[f64], a: usize| net.arcs[a].2 - g[a];
    let mut path: Vec<usize> = Vec::new();
    loop {
        path.clear();
        let mut v = net.source;
        while v != net.sink {
            let mut next = None;
            while ptr[v] < out[v].len() {
                let a = out[v][ptr[v]];
                if !dead[net.arcs[a].1] && residual(&g, a) > zero {
                    next = Some(a);
                    break;
                }
                ptr[v] += 1;
            }
            match next {
                Some(a) => {
                    path.push(a);
                    v = net.arcs[a].1;
                }
                None => {
                    dead[v] = true;
                    match path.pop() {
                        None => {
                            debug_assert!(is_blocking(net, &g, zero));
                            return Ok(g);
                        }
                        Some(a) => v = net.arcs[a].0,
                    }
                }
            }
        }
        let bottleneck = path.iter().map(|&a| residual(&g, a)).fold(f64::INFINITY, f64::min);
        if !bottleneck.is_finite() {
            return Err(Error::Argument("a source-to-sink path has unbounded capacity".into()));
        }
        for &a in &path {
            if residual(&g, a) == bottleneck {
                g[a] = net.arcs[a].2;
            } else {
                g[a] += bottleneck;
            }
        }
    }
}

/// Residual DFS: true iff no source-to-sink path has every residual above `zero`.
pub fn is_blocking(net: &Network, g: &[f64], zero: f64) -> bool {
    let out = net.adjacency();
    let mut seen = vec![false; net.n];
    let mut stack = vec![net.source];
    seen[net.source] = true;
    while let Some(u) = stack.pop() {
        if u == net.sink {
            return false;
        }
        for &a in &out[u] {
            let v = net.arcs[a].1;
            if !seen[v] && net.arcs[a].2 - g[a] > zero {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    true
}
