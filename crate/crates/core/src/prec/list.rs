use super::critical::CriticalCounters;
use super::idle::IdleIntervals;
use crate::error::{Error, Result};
use crate::model::{PrecInstance, Schedule};
use std::cmp::Ordering;

/// Busy and idle unit slots before a job's completion, measured when the job
/// is placed. A slot is busy when all `m` machines run in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotProfile {
    pub busy: u64,
    pub idle: u64,
}

/// Handling order: nondecreasing `F`, ties by topological rank, then index.
/// Rejects `F` that is negative, non-finite, or decreasing along an arc.
pub fn handling_order(inst: &PrecInstance, f: &[f64]) -> Result<Vec<usize>> {
    inst.validate()?;
    if f.len() != inst.n_jobs {
        return Err(Error::Argument(format!("F has {} entries, expected {}", f.len(), inst.n_jobs)));
    }
    if let Some(j) = f.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Argument(format!("F_{j} = {} is not a finite nonnegative number", f[j])));
    }
    if let Some(&(a, b)) = inst.prec.iter().find(|&&(a, b)| f[a] > f[b]) {
        return Err(Error::Argument(format!("F_{a} = {} exceeds F_{b} = {} although {a} precedes {b}", f[a], f[b])));
    }
    let mut rank = vec![0; inst.n_jobs];
    for (r, j) in inst.topological_order()?.into_iter().enumerate() {
        rank[j] = r;
    }
    let mut order: Vec<usize> = (0..inst.n_jobs).collect();
    order.sort_by(|&a, &b| {
        f[a].partial_cmp(&f[b]).unwrap_or(Ordering::Equal).then(rank[a].cmp(&rank[b])).then(a.cmp(&b))
    });
    Ok(order)
}

/// List scheduling: handle jobs by `F` and start each one at the earliest time
/// after its predecessors finish at which all of its slots have a free machine.
pub fn list_scheduling(inst: &PrecInstance, f: &[f64]) -> Result<Schedule> {
    let order = handling_order(inst, f)?;
    let preds = inst.predecessors();
    let mut idle = IdleIntervals::new();
    let mut crit = CriticalCounters::new(inst.m);
    let mut completion = vec![0u64; inst.n_jobs];
    for j in order {
        let ready = preds[j].iter().map(|&k| completion[k]).max().unwrap_or(0);
        let p = inst.sizes[j];
        let start = idle.find(ready, p);
        debug_assert!(crit.contains(start), "start {start} is not a critical point");
        crit.insert(start + p);
        for (tau, next) in crit.increase(start, start + p)? {
            idle.remove(tau, next)?;
        }
        completion[j] = start + p;
    }
    Ok(Schedule { completion })
}

/// Slot-by-slot list scheduling, with the busy/idle profile of every job.
/// Runs in `O(n · p(J))`.
pub fn list_scheduling_naive(inst: &PrecInstance, f: &[f64]) -> Result<(Schedule, Vec<SlotProfile>)> {
    let order = handling_order(inst, f)?;
    let preds = inst.predecessors();
    let horizon = inst.total_size() as usize;
    let mut running = vec![0usize; horizon];
    let mut completion = vec![0u64; inst.n_jobs];
    let mut profile = vec![SlotProfile { busy: 0, idle: 0 }; inst.n_jobs];
    for j in order {
        let ready = preds[j].iter().map(|&k| completion[k]).max().unwrap_or(0) as usize;
        let p = inst.sizes[j] as usize;
        let start = (ready..)
            .find(|&s| (s..s + p).all(|k| running[k] < inst.m))
            .expect("list schedules never exceed the total size");
        for slot in &mut running[start..start + p] {
            *slot += 1;
        }
        let c = start + p;
        completion[j] = c as u64;
        let busy = running[..c].iter().filter(|&&r| r == inst.m).count() as u64;
        profile[j] = SlotProfile { busy, idle: c as u64 - busy };
    }
    Ok((Schedule { completion }, profile))
}
