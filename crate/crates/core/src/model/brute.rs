//! Exhaustive oracles for desk-scale instances.

use super::{Assignment, Objective, ObjectiveValue, PrecInstance, Schedule, UnrelatedInstance};
use crate::error::{Error, Result};

pub const DEFAULT_JOB_CAP: usize = 8;
pub const DEFAULT_SIZE_CAP: u64 = 40;

/// Enumerates every assignment (mixed radix over each job's edges) and returns
/// the first optimum met.
pub fn brute_force_unrelated(
    inst: &UnrelatedInstance,
    objective: Objective,
    job_cap: usize,
) -> Result<(Assignment, ObjectiveValue)> {
    if inst.n_jobs > job_cap {
        return Err(Error::Cap(format!("{} jobs exceed the oracle cap {job_cap}", inst.n_jobs)));
    }
    inst.validate()?;
    let adj = inst.job_adjacency();
    let n = inst.n_jobs;
    let mut choice = vec![0usize; n];
    let mut best: Option<(Vec<usize>, ObjectiveValue)> = None;
    loop {
        let a = Assignment { machine_of: (0..n).map(|j| adj[j][choice[j]].0).collect() };
        let v = inst.evaluate(&a, objective)?;
        let better = match &best {
            None => true,
            Some((_, b)) => match (v.exact, b.exact) {
                (Some(x), Some(y)) => x < y,
                _ => v.value < b.value,
            },
        };
        if better {
            best = Some((a.machine_of, v));
        }
        // Mixed-radix increment.
        let mut k = 0;
        while k < n {
            choice[k] += 1;
            if choice[k] < adj[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    let (machine_of, v) = best.expect("at least one assignment is enumerated");
    Ok((Assignment { machine_of }, v))
}

/// Caps for [`brute_force_prec`].
#[derive(Debug, Clone, Copy)]
pub struct PrecOracleCaps {
    pub jobs: usize,
    pub total_size: u64,
}

impl Default for PrecOracleCaps {
    fn default() -> Self {
        PrecOracleCaps { jobs: DEFAULT_JOB_CAP, total_size: DEFAULT_SIZE_CAP }
    }
}

struct PrecSearch<'a> {
    inst: &'a PrecInstance,
    preds: Vec<Vec<usize>>,
    chain: Vec<u64>,
    completion: Vec<Option<u64>>,
    start: Vec<u64>,
    best_value: u128,
    best: Vec<u64>,
}

impl PrecSearch<'_> {
    /// Jobs are placed in nondecreasing start order, equal starts by index.
    /// Starts are restricted to 0 and completion times: left-shifting any optimum
    /// until it is blocked stops every job at a predecessor's completion or at
    /// the completion of a job that frees a machine.
    fn dfs(&mut self, placed: usize, last_start: u64, last_job: usize, cost: u128) {
        let n = self.inst.n_jobs;
        if placed == n {
            if cost < self.best_value {
                self.best_value = cost;
                self.best = self.completion.iter().map(|c| c.unwrap()).collect();
            }
            return;
        }
        let mut bound = cost;
        for j in 0..n {
            if self.completion[j].is_none() {
                let c = (last_start + self.inst.sizes[j]).max(self.chain[j]);
                bound += self.inst.weights[j] as u128 * c as u128;
            }
        }
        if bound >= self.best_value {
            return;
        }
        let mut events: Vec<u64> = std::iter::once(0).chain(self.completion.iter().flatten().copied()).collect();
        events.sort_unstable();
        events.dedup();
        for j in 0..n {
            if self.completion[j].is_some() {
                continue;
            }
            let mut ready = last_start;
            let mut ok = true;
            for &k in &self.preds[j] {
                match self.completion[k] {
                    Some(c) => ready = ready.max(c),
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            for &t in &events {
                if t < ready || (t == last_start && placed > 0 && j < last_job) {
                    continue;
                }
                let busy =
                    (0..n).filter(|&k| matches!(self.completion[k], Some(c) if self.start[k] <= t && t < c)).count();
                if busy >= self.inst.m {
                    continue;
                }
                let c = t + self.inst.sizes[j];
                self.completion[j] = Some(c);
                self.start[j] = t;
                self.dfs(placed + 1, t, j, cost + self.inst.weights[j] as u128 * c as u128);
                self.completion[j] = None;
            }
        }
    }
}

/// Exact minimum weighted completion time by a pruned search over event-driven start times.
pub fn brute_force_prec(inst: &PrecInstance, caps: PrecOracleCaps) -> Result<(Schedule, ObjectiveValue)> {
    if inst.n_jobs > caps.jobs {
        return Err(Error::Cap(format!("{} jobs exceed the oracle cap {}", inst.n_jobs, caps.jobs)));
    }
    if inst.total_size() > caps.total_size {
        return Err(Error::Cap(format!("total size {} exceeds the oracle cap {}", inst.total_size(), caps.total_size)));
    }
    inst.validate()?;
    let preds = inst.predecessors();
    let mut chain = vec![0u64; inst.n_jobs];
    for j in inst.topological_order()? {
        chain[j] = inst.sizes[j] + preds[j].iter().map(|&k| chain[k]).max().unwrap_or(0);
    }
    // Serial schedule in topological order seeds the incumbent.
    let mut t = 0;
    let mut serial = vec![0u64; inst.n_jobs];
    for j in inst.topological_order()? {
        t += inst.sizes[j];
        serial[j] = t;
    }
    let serial_value: u128 = (0..inst.n_jobs).map(|j| inst.weights[j] as u128 * serial[j] as u128).sum();
    let mut s = PrecSearch {
        inst,
        preds,
        chain,
        completion: vec![None; inst.n_jobs],
        start: vec![0; inst.n_jobs],
        best_value: serial_value + 1,
        best: serial,
    };
    s.dfs(0, 0, 0, 0);
    let schedule = Schedule { completion: s.best };
    let v = inst.evaluate(&schedule)?;
    Ok((schedule, v))
}

#[cfg(test)]
mod tests {
    use super::super::Edge;
    use super::*;

    fn edges(list: &[(usize, usize, u64)]) -> Vec<Edge> {
        list.iter().map(|&(job, machine, p)| Edge { job, machine, p }).collect()
    }

    #[test]
    fn unrelated_examples() {
        let two = UnrelatedInstance {
            n_jobs: 2,
            n_machines: 2,
            edges: edges(&[(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)]),
            weights: None,
            q: None,
        };
        assert_eq!(brute_force_unrelated(&two, Objective::Makespan, 8).unwrap().1.exact, Some(1));

        let one = UnrelatedInstance {
            n_jobs: 1,
            n_machines: 2,
            edges: edges(&[(0, 0, 3), (0, 1, 5)]),
            weights: None,
            q: None,
        };
        assert_eq!(brute_force_unrelated(&one, Objective::Makespan, 8).unwrap().1.exact, Some(3));

        let three = UnrelatedInstance {
            n_jobs: 3,
            n_machines: 2,
            edges: edges(&[(0, 0, 2), (0, 1, 3), (1, 0, 2), (1, 1, 2), (2, 0, 4), (2, 1, 1)]),
            weights: None,
            q: None,
        };
        assert_eq!(brute_force_unrelated(&three, Objective::Makespan, 8).unwrap().1.exact, Some(3));
    }

    #[test]
    fn unrelated_cap() {
        let big = UnrelatedInstance {
            n_jobs: 9,
            n_machines: 1,
            edges: (0..9).map(|j| Edge { job: j, machine: 0, p: 1 }).collect(),
            weights: None,
            q: None,
        };
        assert!(matches!(brute_force_unrelated(&big, Objective::Makespan, 8), Err(Error::Cap(_))));
    }

    #[test]
    fn prec_examples() {
        let chain = PrecInstance { n_jobs: 2, sizes: vec![2, 1], weights: vec![1, 1], m: 1, prec: vec![(0, 1)] };
        let (s, v) = brute_force_prec(&chain, PrecOracleCaps::default()).unwrap();
        assert_eq!(s.completion, vec![2, 3]);
        assert_eq!(v.exact, Some(5));

        let par = PrecInstance { n_jobs: 2, sizes: vec![1, 1], weights: vec![1, 1], m: 2, prec: vec![] };
        assert_eq!(brute_force_prec(&par, PrecOracleCaps::default()).unwrap().1.exact, Some(2));

        let smith = PrecInstance { n_jobs: 2, sizes: vec![1, 3], weights: vec![3, 1], m: 1, prec: vec![] };
        assert_eq!(brute_force_prec(&smith, PrecOracleCaps::default()).unwrap().1.exact, Some(7));
    }

    #[test]
    fn prec_needs_idle_gap_when_blocked() {
        // m = 2: job 2 depends on job 0 (long); job 1 short; job 3 depends on job 1.
        let inst = PrecInstance {
            n_jobs: 4,
            sizes: vec![4, 1, 1, 1],
            weights: vec![1, 1, 10, 1],
            m: 2,
            prec: vec![(0, 2), (1, 3)],
        };
        let (_, v) = brute_force_prec(&inst, PrecOracleCaps::default()).unwrap();
        // 0:(0,4] 1:(0,1] 3:(1,2] 2:(4,5] → 4 + 1 + 50 + 2 = 57.
        assert_eq!(v.exact, Some(57));
    }
}
