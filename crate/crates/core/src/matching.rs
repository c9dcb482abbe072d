//! Matching under Hall expansion and the grouping rounding of fractional assignments.

use crate::error::{Error, Result};
use crate::model::{Assignment, UnrelatedInstance};
use std::collections::VecDeque;

/// Bipartite graph with left side S (to be covered) and right side T.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionBipartite {
    pub n_left: usize,
    pub n_right: usize,
    pub adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// Right vertex matched to each left vertex.
    pub mate: Vec<usize>,
    pub phases: usize,
}

const NONE: usize = usize::MAX;

/// Hopcroft–Karp limited to `⌊log_{1+ε}|S|⌋ + 2` phases. With `(1+ε)`-expansion
/// no augmenting path longer than `2L+1` exists, so S is covered by then.
pub fn match_expanding(h: &ExpansionBipartite, eps: f64) -> Result<Matching> {
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("ε = {eps} must be positive")));
    }
    let n = h.n_left;
    if n == 0 {
        return Ok(Matching { mate: Vec::new(), phases: 0 });
    }
    let l = ((n as f64).ln() / (1.0 + eps).ln()).floor() as usize + 1;
    let mut mate_l = vec![NONE; n];
    let mut mate_r = vec![NONE; h.n_right];
    let mut dist = vec![0usize; n];
    let mut it = vec![0usize; n];
    let mut phases = 0;
    let mut matched = 0;

    while matched < n && phases < l + 1 {
        phases += 1;
        // BFS layering from free left vertices.
        let mut queue = VecDeque::new();
        for u in 0..n {
            if mate_l[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = usize::MAX;
        while let Some(u) = queue.pop_front() {
            if dist[u] >= found {
                continue;
            }
            for &v in &h.adj[u] {
                let w = mate_r[v];
                if w == NONE {
                    found = found.min(dist[u] + 1);
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if found == usize::MAX {
            break;
        }
        it.iter_mut().for_each(|x| *x = 0);
        for u in 0..n {
            if mate_l[u] == NONE && augment(u, h, &mut mate_l, &mut mate_r, &dist, &mut it, found) {
                matched += 1;
            }
        }
    }
    if let Some(u) = mate_l.iter().position(|&v| v == NONE) {
        return Err(Error::Infeasible(format!("expansion violated: left vertex {u} unmatched after {phases} phases")));
    }
    Ok(Matching { mate: mate_l, phases })
}

fn augment(
    u: usize,
    h: &ExpansionBipartite,
    mate_l: &mut [usize],
    mate_r: &mut [usize],
    dist: &[usize],
    it: &mut [usize],
    limit: usize,
) -> bool {
    while it[u] < h.adj[u].len() {
        let v = h.adj[u][it[u]];
        it[u] += 1;
        let w = mate_r[v];
        let ok = if w == NONE {
            dist[u] + 1 == limit
        } else {
            dist[w] == dist[u] + 1 && augment(w, h, mate_l, mate_r, dist, it, limit)
        };
        if ok {
            mate_l[u] = v;
            mate_r[v] = u;
            return true;
        }
    }
    false
}

/// Result of [`round_by_grouping`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    pub assignment: Assignment,
    /// Edges of the job–group graph H.
    pub h_edges: usize,
    /// Group vertices (i, r) over all machines.
    pub groups: usize,
    pub phases: usize,
}

/// Support threshold below which a fractional value is ignored.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Rounds `x` (one value per instance edge, `x(δ(j)) = 1`) to an assignment with
/// machine load at most `(1+ε) Σ_j p_{i,j} x_{j,i} + max_{j∈σ⁻¹(i)} p_{i,j}`.
///
/// Per machine, support jobs are laid out by nonincreasing p on `[0, x(δ(i))]`
/// and cut into windows of width `1/(1+ε)`; a job links to every window its
/// segment overlaps (open intervals). Each window then takes at most one job.
pub fn round_by_grouping(inst: &UnrelatedInstance, x: &[f64], eps: f64) -> Result<Grouping> {
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("ε = {eps} must be positive")));
    }
    if x.len() != inst.edges.len() {
        return Err(Error::Argument(format!("x has {} values for {} edges", x.len(), inst.edges.len())));
    }
    let mut job_mass = vec![0.0; inst.n_jobs];
    for (e, &v) in inst.edges.iter().zip(x) {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Argument(format!("x on edge ({}, {}) is {v}", e.job, e.machine)));
        }
        job_mass[e.job] += v;
    }
    if let Some(j) = job_mass.iter().position(|&s| (s - 1.0).abs() > 1e-6) {
        return Err(Error::Argument(format!("x(δ(job {j})) = {} is not 1", job_mass[j])));
    }

    let mut per_machine: Vec<Vec<usize>> = vec![Vec::new(); inst.n_machines];
    for (k, e) in inst.edges.iter().enumerate() {
        if x[k] >= SUPPORT_EPS {
            per_machine[e.machine].push(k);
        }
    }
    let scale = 1.0 + eps;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); inst.n_jobs];
    let mut group_machine = Vec::new();
    let mut fractional_load = vec![0.0; inst.n_machines];
    let mut h_edges = 0;
    for (i, ks) in per_machine.iter_mut().enumerate() {
        ks.sort_by(|&a, &b| inst.edges[b].p.cmp(&inst.edges[a].p).then(inst.edges[a].job.cmp(&inst.edges[b].job)));
        let total: f64 = ks.iter().map(|&k| x[k]).sum();
        fractional_load[i] = ks.iter().map(|&k| x[k] * inst.edges[k].p as f64).sum();
        let r_max = (scale * total).ceil() as usize;
        let base = group_machine.len();
        group_machine.extend(std::iter::repeat_n(i, r_max));
        let mut z_prev = 0.0;
        for &k in ks.iter() {
            let z = z_prev + x[k];
            let r_lo = ((z_prev * scale).floor() as usize).max(1);
            let r_hi = ((z * scale).ceil() as usize + 1).min(r_max);
            for r in r_lo..=r_hi {
                let lo = (r - 1) as f64 / scale;
                let hi = r as f64 / scale;
                if z_prev < hi && lo < z {
                    adj[inst.edges[k].job].push(base + r - 1);
                    h_edges += 1;
                }
            }
            z_prev = z;
        }
    }
    let h = ExpansionBipartite { n_left: inst.n_jobs, n_right: group_machine.len(), adj };
    let m = match_expanding(&h, eps)?;
    let machine_of: Vec<usize> = m.mate.iter().map(|&g| group_machine[g]).collect();
    let assignment = Assignment { machine_of };

    let adjacency = inst.job_adjacency();
    let mut load = vec![0.0; inst.n_machines];
    let mut biggest = vec![0.0f64; inst.n_machines];
    for (j, &i) in assignment.machine_of.iter().enumerate() {
        let p = adjacency[j].iter().find(|&&(mi, _)| mi == i).map(|&(_, p)| p as f64).unwrap_or(f64::NAN);
        load[i] += p;
        biggest[i] = biggest[i].max(p);
    }
    for i in 0..inst.n_machines {
        let bound = scale * fractional_load[i] + biggest[i];
        if !(load[i] <= bound * (1.0 + 1e-9) + 1e-9) {
            return Err(Error::Invariant(format!(
                "grouping load {} on machine {i} exceeds (1+ε)·{} + {}",
                load[i], fractional_load[i], biggest[i]
            )));
        }
    }
    Ok(Grouping { assignment, h_edges, groups: group_machine.len(), phases: m.phases })
}
