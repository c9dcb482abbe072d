//! Instances, solutions and exact objective evaluation.

mod brute;
mod generate;
mod io;

pub use brute::{brute_force_prec, brute_force_unrelated, PrecOracleCaps, DEFAULT_JOB_CAP, DEFAULT_SIZE_CAP};
pub use generate::{generate, Family, GenParams};
pub use io::{Instance, Solution};

use crate::error::{Error, Result};
use std::cmp::Ordering;

/// A processing-time edge between a job and a machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub job: usize,
    pub machine: usize,
    pub p: u64,
}

/// Unrelated machines: job j can run on machine i in time p_{i,j} when (j, i) is an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct UnrelatedInstance {
    pub n_jobs: usize,
    pub n_machines: usize,
    pub edges: Vec<Edge>,
    pub weights: Option<Vec<u64>>,
    pub q: Option<f64>,
}

/// Identical machines with precedence arcs `(j, j2)` meaning j must finish before j2 starts.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecInstance {
    pub n_jobs: usize,
    pub sizes: Vec<u64>,
    pub weights: Vec<u64>,
    pub m: usize,
    pub prec: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub machine_of: Vec<usize>,
}

/// Job j occupies the interval (C_j - p_j, C_j].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub completion: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    Makespan,
    WeightedCompletion,
    /// L_q norm of machine loads.
    Lq(f64),
}

/// An objective value. Makespan and weighted completion are exact integers;
/// the L_q norm is derived from exact integer loads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub objective: Objective,
    pub value: f64,
    pub exact: Option<u128>,
}

impl ObjectiveValue {
    fn integral(objective: Objective, v: u128) -> Self {
        ObjectiveValue { objective, value: v as f64, exact: Some(v) }
    }

    /// Ratio against a reference value, 1 when both are zero.
    pub fn ratio_to(&self, reference: &ObjectiveValue) -> f64 {
        match (self.exact, reference.exact) {
            (Some(0), Some(0)) => 1.0,
            (Some(a), Some(b)) => a as f64 / b as f64,
            _ if self.value == 0.0 && reference.value == 0.0 => 1.0,
            _ => self.value / reference.value,
        }
    }
}

impl UnrelatedInstance {
    /// Checks the structural invariants: indices in range, p ≥ 1, no duplicate pairs,
    /// every job has an edge, weights and q well formed.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        let mut has_edge = vec![false; self.n_jobs];
        for e in &self.edges {
            if e.job >= self.n_jobs {
                return Err(Error::Validation(format!("edge job index {} >= n_jobs {}", e.job, self.n_jobs)));
            }
            if e.machine >= self.n_machines {
                return Err(Error::Validation(format!(
                    "edge machine index {} >= n_machines {}",
                    e.machine, self.n_machines
                )));
            }
            if e.p == 0 {
                return Err(Error::Validation(format!("edge ({}, {}) has p = 0", e.job, e.machine)));
            }
            if !seen.insert((e.job, e.machine)) {
                return Err(Error::Validation(format!("duplicate edge ({}, {})", e.job, e.machine)));
            }
            has_edge[e.job] = true;
        }
        if let Some(j) = has_edge.iter().position(|&h| !h) {
            return Err(Error::Validation(format!("job {j} has no incident edge")));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.n_jobs {
                return Err(Error::Validation(format!("weights has length {}, expected {}", w.len(), self.n_jobs)));
            }
            if let Some(j) = w.iter().position(|&x| x == 0) {
                return Err(Error::Validation(format!("job {j} has weight 0")));
            }
        }
        if let Some(q) = self.q {
            if !(q.is_finite() && q > 1.0) {
                return Err(Error::Validation(format!("norm exponent q = {q} must be > 1")));
            }
        }
        Ok(())
    }

    /// Per-job list of `(machine, p)`, sorted by machine.
    pub fn job_adjacency(&self) -> Vec<Vec<(usize, u64)>> {
        let mut adj = vec![Vec::new(); self.n_jobs];
        for e in &self.edges {
            adj[e.job].push((e.machine, e.p));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Weight of job j; absent weights count as 1.
    pub fn weight(&self, j: usize) -> u64 {
        self.weights.as_ref().map_or(1, |w| w[j])
    }

    /// True when every job has the same p on all of its edges.
    pub fn is_restricted_assignment(&self) -> bool {
        let mut size: Vec<Option<u64>> = vec![None; self.n_jobs];
        self.edges.iter().all(|e| match size[e.job] {
            None => {
                size[e.job] = Some(e.p);
                true
            }
            Some(p) => p == e.p,
        })
    }

    /// Assigns every job to a machine of minimum p (ties to the smaller machine index).
    pub fn greedy_min_p(&self) -> Assignment {
        let machine_of = self
            .job_adjacency()
            .iter()
            .map(|a| a.iter().min_by_key(|&&(i, p)| (p, i)).map_or(0, |&(i, _)| i))
            .collect();
        Assignment { machine_of }
    }

    fn assigned_sizes(&self, a: &Assignment) -> Result<Vec<u64>> {
        if a.machine_of.len() != self.n_jobs {
            return Err(Error::Validation(format!(
                "assignment has {} entries, instance has {} jobs",
                a.machine_of.len(),
                self.n_jobs
            )));
        }
        let adj = self.job_adjacency();
        a.machine_of
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                adj[j]
                    .binary_search_by_key(&i, |&(m, _)| m)
                    .map(|k| adj[j][k].1)
                    .map_err(|_| Error::Validation(format!("job {j} assigned to machine {i} without an edge")))
            })
            .collect()
    }

    /// Integer machine loads under an assignment.
    pub fn loads(&self, a: &Assignment) -> Result<Vec<u128>> {
        let sizes = self.assigned_sizes(a)?;
        let mut loads = vec![0u128; self.n_machines];
        for (j, &i) in a.machine_of.iter().enumerate() {
            loads[i] += sizes[j] as u128;
        }
        Ok(loads)
    }

    pub fn evaluate(&self, a: &Assignment, objective: Objective) -> Result<ObjectiveValue> {
        match objective {
            Objective::Makespan => {
                let loads = self.loads(a)?;
                Ok(ObjectiveValue::integral(objective, loads.into_iter().max().unwrap_or(0)))
            }
            Objective::Lq(q) => {
                if !(q.is_finite() && q >= 1.0) {
                    return Err(Error::Argument(format!("norm exponent q = {q} must be >= 1")));
                }
                let loads = self.loads(a)?;
                Ok(ObjectiveValue { objective, value: lq_norm(&loads, q), exact: None })
            }
            Objective::WeightedCompletion => {
                let sizes = self.assigned_sizes(a)?;
                let weights: Vec<u64> = (0..self.n_jobs).map(|j| self.weight(j)).collect();
                let mut per_machine = vec![Vec::new(); self.n_machines];
                for (j, &i) in a.machine_of.iter().enumerate() {
                    per_machine[i].push(j);
                }
                let mut total = 0u128;
                for jobs in &mut per_machine {
                    smith_sort(jobs, &sizes, &weights);
                    let mut t = 0u128;
                    for &j in jobs.iter() {
                        t += sizes[j] as u128;
                        total += weights[j] as u128 * t;
                    }
                }
                Ok(ObjectiveValue::integral(objective, total))
            }
        }
    }
}

/// (Σ L_i^q)^{1/q}; computed relative to the largest load to avoid overflow.
pub fn lq_norm(loads: &[u128], q: f64) -> f64 {
    let max = loads.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return 0.0;
    }
    let mx = max as f64;
    let s: f64 = loads.iter().map(|&l| (l as f64 / mx).powf(q)).sum();
    mx * s.powf(1.0 / q)
}

/// Compares two jobs by Smith's ratio p/w (zero weight last), ties by index.
pub fn smith_cmp(a: usize, b: usize, p: &[u64], w: &[u64]) -> Ordering {
    let lhs = p[a] as u128 * w[b] as u128;
    let rhs = p[b] as u128 * w[a] as u128;
    match (w[a] == 0, w[b] == 0) {
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (true, true) => a.cmp(&b),
        _ => lhs.cmp(&rhs).then(a.cmp(&b)),
    }
}

/// Sorts job indices into Smith order. `p` and `w` are indexed by job.
pub fn smith_sort(jobs: &mut [usize], p: &[u64], w: &[u64]) {
    jobs.sort_by(|&a, &b| smith_cmp(a, b, p, w));
}

impl PrecInstance {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Validation("machine count m must be >= 1".into()));
        }
        if self.sizes.len() != self.n_jobs {
            return Err(Error::Validation(format!("sizes has length {}, expected {}", self.sizes.len(), self.n_jobs)));
        }
        if self.weights.len() != self.n_jobs {
            return Err(Error::Validation(format!(
                "weights has length {}, expected {}",
                self.weights.len(),
                self.n_jobs
            )));
        }
        if let Some(j) = self.sizes.iter().position(|&p| p == 0) {
            return Err(Error::Validation(format!("job {j} has size 0")));
        }
        for &(a, b) in &self.prec {
            if a >= self.n_jobs || b >= self.n_jobs {
                return Err(Error::Validation(format!("precedence arc ({a}, {b}) out of range")));
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Kahn order with the smallest ready index first; errors on a cycle.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let mut indeg = vec![0usize; self.n_jobs];
        let succ = self.successors();
        for &(_, b) in &self.prec {
            indeg[b] += 1;
        }
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
            (0..self.n_jobs).filter(|&j| indeg[j] == 0).map(std::cmp::Reverse).collect();
        let mut order = Vec::with_capacity(self.n_jobs);
        while let Some(std::cmp::Reverse(j)) = ready.pop() {
            order.push(j);
            for &k in &succ[j] {
                indeg[k] -= 1;
                if indeg[k] == 0 {
                    ready.push(std::cmp::Reverse(k));
                }
            }
        }
        if order.len() < self.n_jobs {
            let j = (0..self.n_jobs).find(|&j| indeg[j] > 0).unwrap_or(0);
            return Err(Error::Validation(format!("precedence arcs contain a cycle through job {j}")));
        }
        Ok(order)
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut s = vec![Vec::new(); self.n_jobs];
        for &(a, b) in &self.prec {
            s[a].push(b);
        }
        s
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut s = vec![Vec::new(); self.n_jobs];
        for &(a, b) in &self.prec {
            s[b].push(a);
        }
        s
    }

    pub fn total_size(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// Checks completion ≥ size, precedence, and that no unit slot hosts more than m jobs.
    pub fn check_schedule(&self, s: &Schedule) -> Result<()> {
        if s.completion.len() != self.n_jobs {
            return Err(Error::Validation(format!(
                "schedule has {} entries, instance has {} jobs",
                s.completion.len(),
                self.n_jobs
            )));
        }
        for j in 0..self.n_jobs {
            if s.completion[j] < self.sizes[j] {
                return Err(Error::Validation(format!(
                    "job {j} completes at {} before its size {}",
                    s.completion[j], self.sizes[j]
                )));
            }
        }
        for &(a, b) in &self.prec {
            if s.completion[a] > s.completion[b] - self.sizes[b] {
                return Err(Error::Validation(format!("precedence {a} before {b} violated")));
            }
        }
        // Ends sort before starts at the same instant, intervals being half-open.
        let mut events: Vec<(u64, i8)> = Vec::with_capacity(2 * self.n_jobs);
        for j in 0..self.n_jobs {
            events.push((s.completion[j] - self.sizes[j], 1));
            events.push((s.completion[j], -1));
        }
        events.sort_unstable();
        let mut running = 0i64;
        for (t, d) in events {
            running += d as i64;
            if running > self.m as i64 {
                return Err(Error::Validation(format!("more than {} jobs run right after time {t}", self.m)));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, s: &Schedule) -> Result<ObjectiveValue> {
        self.check_schedule(s)?;
        let v = (0..self.n_jobs).map(|j| self.weights[j] as u128 * s.completion[j] as u128).sum();
        Ok(ObjectiveValue::integral(Objective::WeightedCompletion, v))
    }
}

impl Schedule {
    pub fn start(&self, j: usize, sizes: &[u64]) -> u64 {
        self.completion[j] - sizes[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_machine(p: &[u64], w: &[u64]) -> UnrelatedInstance {
        UnrelatedInstance {
            n_jobs: p.len(),
            n_machines: 1,
            edges: p.iter().enumerate().map(|(j, &p)| Edge { job: j, machine: 0, p }).collect(),
            weights: Some(w.to_vec()),
            q: None,
        }
    }

    #[test]
    fn smith_order_on_one_machine() {
        let inst = one_machine(&[1, 2], &[2, 1]);
        let v = inst.evaluate(&Assignment { machine_of: vec![0, 0] }, Objective::WeightedCompletion).unwrap();
        assert_eq!(v.exact, Some(5));
    }

    #[test]
    fn empty_load_makespan_is_zero() {
        let inst = UnrelatedInstance { n_jobs: 0, n_machines: 1, edges: vec![], weights: None, q: None };
        let v = inst.evaluate(&Assignment { machine_of: vec![] }, Objective::Makespan).unwrap();
        assert_eq!(v.exact, Some(0));
    }

    #[test]
    fn l2_of_three_four() {
        assert!((lq_norm(&[3, 4], 2.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn assignment_off_edge_is_rejected() {
        let inst = UnrelatedInstance {
            n_jobs: 1,
            n_machines: 2,
            edges: vec![Edge { job: 0, machine: 0, p: 3 }],
            weights: None,
            q: None,
        };
        let err = inst.evaluate(&Assignment { machine_of: vec![1] }, Objective::Makespan).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn schedule_checks() {
        let inst = PrecInstance { n_jobs: 2, sizes: vec![2, 1], weights: vec![1, 1], m: 1, prec: vec![(0, 1)] };
        assert_eq!(inst.evaluate(&Schedule { completion: vec![2, 3] }).unwrap().exact, Some(5));
        assert!(inst.check_schedule(&Schedule { completion: vec![3, 1] }).is_err());
        assert!(inst.check_schedule(&Schedule { completion: vec![2, 2] }).is_err());
        let par = PrecInstance { n_jobs: 2, sizes: vec![1, 1], weights: vec![1, 1], m: 1, prec: vec![] };
        assert!(par.check_schedule(&Schedule { completion: vec![1, 1] }).is_err());
        assert!(par.check_schedule(&Schedule { completion: vec![1, 2] }).is_ok());
    }

    #[test]
    fn cycle_is_rejected() {
        let inst = PrecInstance { n_jobs: 2, sizes: vec![1, 1], weights: vec![1, 1], m: 1, prec: vec![(0, 1), (1, 0)] };
        assert!(matches!(inst.validate(), Err(Error::Validation(_))));
    }
}
