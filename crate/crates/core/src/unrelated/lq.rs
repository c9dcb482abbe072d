use super::{
    check_eps, guess_grid, rho_unchecked, search_guesses, solve_and_rescale, LpStats, Rounding, TauGrid,
    UnrelatedSolution,
};
use crate::error::{Error, Result};
use crate::matching::round_by_grouping;
use crate::model::{Assignment, Edge, Objective, UnrelatedInstance};
use crate::mpc::MpcProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqBranch {
    /// q = 2: independent assignment by `y`, derandomized on `E[Σ L_i²]`.
    Independent,
    /// Restricted assignment: grouping on `y`.
    Restricted,
    /// Grouping on the doubled fast half `y′`.
    General,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LqOptions {
    /// Force a rounding branch instead of picking the best applicable one.
    pub branch: Option<LqBranch>,
}

/// `c = τ^q − (τ − p)^q`: the growth of `Σ L^q` when a job of length `p`
/// finishing at `τ` is added.
pub fn lq_cost_coefficient(q: f64, tau: f64, p: f64) -> f64 {
    tau.powf(q) - (tau - p).max(0.0).powf(q)
}

/// Keeps the fastest half of a job's fractional assignment, doubled:
/// `y′_k = min((1 − Σ_{k′<k} y′_{k′})₊, 2y_k)` with machines already sorted
/// by nondecreasing `p`.
pub fn double_fast_half(y: &[f64]) -> Vec<f64> {
    let mut used = 0.0f64;
    y.iter()
        .map(|&v| {
            let out = (1.0 - used).max(0.0).min(2.0 * v);
            used += out;
            out
        })
        .collect()
}

pub fn solve_lq(inst: &UnrelatedInstance, eps: f64) -> Result<UnrelatedSolution> {
    solve_lq_with(inst, eps, &LqOptions::default())
}

/// Approximates the minimum L_q norm of machine loads for `q = inst.q > 1`.
///
/// Sizes are first brought into a polynomial range: with `P′ = max_j min_i p`,
/// edges above `nP′` are dropped, a job with some edge below `εP′/n` is fixed
/// there, and the rest is divided by `εP′/n`. Guesses `P` then go through the
/// time-indexed LP with objective `Σ c·x ≤ (1+ε)^q P^q`; `y = Σ_d x` is rounded
/// by the branch for the instance (or the forced one).
pub fn solve_lq_with(inst: &UnrelatedInstance, eps: f64, opts: &LqOptions) -> Result<UnrelatedSolution> {
    let q = inst.q.ok_or_else(|| Error::Argument("the L_q objective needs q".into()))?;
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::Argument(format!("q = {q} must exceed 1 (q = 1 is solved by greedy min-p)")));
    }
    check_eps(eps)?;
    inst.validate()?;
    let branch = match opts.branch {
        Some(LqBranch::Independent) if q != 2.0 => {
            return Err(Error::Argument(format!("independent rounding needs q = 2, got {q}")))
        }
        Some(LqBranch::Restricted) if !inst.is_restricted_assignment() => {
            return Err(Error::Argument("restricted rounding needs equal sizes per job".into()))
        }
        Some(b) => b,
        None if q == 2.0 => LqBranch::Independent,
        None if inst.is_restricted_assignment() => LqBranch::Restricted,
        None => LqBranch::General,
    };
    let delta = eps / 2.0;
    let n = inst.n_jobs;
    let adj = inst.job_adjacency();
    let min_p: Vec<u64> = adj.iter().map(|a| a.iter().map(|&(_, p)| p).min().unwrap_or(0)).collect();
    let p_prime = min_p.iter().copied().max().unwrap_or(0) as f64;
    let unit = eps * p_prime / n as f64;

    let mut machine_of = vec![usize::MAX; n];
    let mut rest = Vec::new();
    for j in 0..n {
        if (min_p[j] as f64) < unit {
            machine_of[j] = adj[j].iter().find(|&&(_, p)| p == min_p[j]).map(|&(i, _)| i).unwrap_or(0);
        } else {
            rest.push(j);
        }
    }
    let mut local = vec![usize::MAX; n];
    for (l, &j) in rest.iter().enumerate() {
        local[j] = l;
    }
    let cap = n as f64 * p_prime;
    let sub = UnrelatedInstance {
        n_jobs: rest.len(),
        n_machines: inst.n_machines,
        edges: inst
            .edges
            .iter()
            .filter(|e| local[e.job] != usize::MAX && e.p as f64 <= cap)
            .map(|e| Edge { job: local[e.job], ..*e })
            .collect(),
        weights: None,
        q: Some(q),
    };

    let mut stats = LpStats::default();
    let mut guess = 0.0;
    let mut fractional_cost = None;
    let mut t_value = None;
    let mut audit_flagged = false;
    if !rest.is_empty() {
        let scaled: Vec<f64> = sub.edges.iter().map(|e| e.p as f64 / unit).collect();
        let (ub, lb) = bounds(&sub, &scaled, q);
        let guesses = guess_grid(ub, lb, delta);
        let (k, lp) = search_guesses(&guesses, |p| attempt(&sub, &scaled, q, p, delta, &mut stats))?;
        stats.vars = lp.vars;
        stats.rows = lp.rows;
        stats.nonzeros = lp.nonzeros;
        guess = guesses[k] * unit;

        let y = lp.y;
        let mut g = vec![0.0; sub.n_machines];
        let mut pq = 0.0;
        let mut biggest: f64 = 0.0;
        for (e, (&v, &s)) in sub.edges.iter().zip(y.iter().zip(&scaled)) {
            g[e.machine] += v * s;
            pq += v * s.powf(q);
            if v > 0.0 {
                biggest = biggest.max(s);
            }
        }
        let gq: f64 = g.iter().map(|x| x.powf(q)).sum();
        let phi = guesses[k].powf(q);
        let slack = (1.0 + delta).powf(8.0 * q);
        audit_flagged = pq > slack * phi || gq > slack * phi;
        t_value = Some(gq.powf(1.0 / q).max(pq.powf(1.0 / q)).max(biggest) * unit);

        let sub_assignment = match branch {
            LqBranch::Independent => {
                let (a, initial) = derandomize_squares(&sub, &y)?;
                fractional_cost = Some(initial);
                a
            }
            LqBranch::Restricted => round_by_grouping(&sub, &y, delta)?.assignment,
            LqBranch::General => round_by_grouping(&sub, &doubled(&sub, &y), delta)?.assignment,
        };
        for (l, &j) in rest.iter().enumerate() {
            machine_of[j] = sub_assignment.machine_of[l];
        }
    }
    let assignment = Assignment { machine_of };
    let value = inst.evaluate(&assignment, Objective::Lq(q))?;
    Ok(UnrelatedSolution {
        assignment,
        value,
        guess,
        lp: stats,
        rounding: match branch {
            LqBranch::Independent => Rounding::IndependentDerandomized,
            LqBranch::Restricted => Rounding::GroupingOnY,
            LqBranch::General => Rounding::GroupingOnDoubled,
        },
        fractional_cost,
        rounding_cost: None,
        t_value,
        audit_flagged,
    })
}

/// Upper bound from greedy min-p, lower bound `max(max_j min p, (Σ_j min p^q)^{1/q})`.
fn bounds(sub: &UnrelatedInstance, scaled: &[f64], q: f64) -> (f64, f64) {
    let mut best = vec![(f64::INFINITY, 0usize); sub.n_jobs];
    for (e, &s) in sub.edges.iter().zip(scaled) {
        if (s, e.machine) < best[e.job] {
            best[e.job] = (s, e.machine);
        }
    }
    let mut loads = vec![0.0; sub.n_machines];
    for &(s, i) in &best {
        loads[i] += s;
    }
    let ub = loads.iter().map(|l: &f64| l.powf(q)).sum::<f64>().powf(1.0 / q);
    let lb =
        best.iter().map(|b| b.0.powf(q)).sum::<f64>().powf(1.0 / q).max(best.iter().map(|b| b.0).fold(0.0, f64::max));
    (ub.max(lb), lb)
}

struct Lp {
    /// `y` per edge of the sub-instance.
    y: Vec<f64>,
    vars: usize,
    rows: usize,
    nonzeros: usize,
}

fn attempt(
    sub: &UnrelatedInstance,
    scaled: &[f64],
    q: f64,
    p_guess: f64,
    delta: f64,
    stats: &mut LpStats,
) -> Result<Option<Lp>> {
    let grid = TauGrid::covering(delta, p_guess)?;
    let big_d = grid.d();
    let phi = p_guess.powf(q);
    let mut edge_of = Vec::new();
    let mut job_vars = vec![Vec::new(); sub.n_jobs];
    let mut objective = Vec::new();
    let mut capacity = vec![Vec::new(); sub.n_machines * big_d];
    for (k, e) in sub.edges.iter().enumerate() {
        let p = scaled[k];
        if p > p_guess {
            continue;
        }
        let Some(d0) = grid.first_at_least(p) else { continue };
        for d in d0..=big_d {
            let c = edge_of.len();
            edge_of.push(k);
            job_vars[e.job].push(c);
            let tau_d = grid.tau(d);
            objective.push((c, lq_cost_coefficient(q, tau_d, p) / ((1.0 + delta).powf(q) * phi)));
            for r in 1..=big_d {
                let tau_r = grid.tau(r);
                let v = rho_unchecked(p, tau_d, tau_r);
                if v > 0.0 {
                    capacity[e.machine * big_d + r - 1].push((c, v / tau_r));
                }
            }
        }
    }
    if job_vars.iter().any(|v| v.is_empty()) {
        return Ok(None);
    }
    let mut packing = vec![objective];
    packing.extend(capacity.into_iter().filter(|r| !r.is_empty()));
    let problem = MpcProblem {
        n_vars: edge_of.len(),
        packing,
        covering: job_vars.iter().map(|v| v.iter().map(|&c| (c, 1.0)).collect()).collect(),
    };
    let Some(lp) = solve_and_rescale(&problem, &job_vars, delta, stats)? else {
        return Ok(None);
    };
    let mut y = vec![0.0; sub.edges.len()];
    for (c, &k) in edge_of.iter().enumerate() {
        y[k] += lp.x[c];
    }
    Ok(Some(Lp { y, vars: edge_of.len(), rows: lp.rows, nonzeros: lp.nonzeros }))
}

/// Applies [`double_fast_half`] per job over its edges sorted by `(p, machine)`.
fn doubled(sub: &UnrelatedInstance, y: &[f64]) -> Vec<f64> {
    let mut by_job = vec![Vec::new(); sub.n_jobs];
    for (k, e) in sub.edges.iter().enumerate() {
        by_job[e.job].push(k);
    }
    let mut out = vec![0.0; y.len()];
    for ks in &mut by_job {
        ks.sort_by_key(|&k| (sub.edges[k].p, sub.edges[k].machine));
        let ys: Vec<f64> = ks.iter().map(|&k| y[k]).collect();
        let d = double_fast_half(&ys);
        let total: f64 = d.iter().sum();
        for (&k, v) in ks.iter().zip(d) {
            out[k] = v / total;
        }
    }
    out
}

/// Conditional expectation on `Q = Σ_i (Σ_j y p)² − Σ y²p² + Σ y p²`, the
/// expected `Σ L_i²` of independent assignment. A job contributes
/// `2p·L_i^{−j} + p²` on machine `i`. Returns the assignment and the initial `Q`.
fn derandomize_squares(sub: &UnrelatedInstance, y: &[f64]) -> Result<(Assignment, f64)> {
    let mut load = vec![0.0; sub.n_machines];
    let mut by_job = vec![Vec::new(); sub.n_jobs];
    let mut cost = 0.0;
    for (k, e) in sub.edges.iter().enumerate() {
        let p = e.p as f64;
        load[e.machine] += y[k] * p;
        by_job[e.job].push(k);
        cost += y[k] * p * p - y[k] * y[k] * p * p;
    }
    cost += load.iter().map(|l| l * l).sum::<f64>();
    let initial = cost;
    let mut machine_of = vec![0; sub.n_jobs];
    for (j, ks) in by_job.iter().enumerate() {
        let mut expected = 0.0;
        let mut best: Option<(f64, usize)> = None;
        for &k in ks {
            let e = sub.edges[k];
            let p = e.p as f64;
            let c = 2.0 * p * (load[e.machine] - y[k] * p) + p * p;
            expected += y[k] * c;
            if y[k] > 0.0 && best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, k));
            }
        }
        let (c, pick) = best.ok_or_else(|| Error::Invariant(format!("job {j} has no support edge")))?;
        let next = cost - expected + c;
        if next > cost + 1e-9 * cost.abs().max(1.0) {
            return Err(Error::Invariant(format!("expected Σ L² rose from {cost} to {next} at job {j}")));
        }
        cost = next;
        for &k in ks {
            let e = sub.edges[k];
            let target = if k == pick { 1.0 } else { 0.0 };
            load[e.machine] += (target - y[k]) * e.p as f64;
        }
        machine_of[j] = sub.edges[pick].machine;
    }
    let exact: f64 = load.iter().map(|l| l * l).sum();
    if (exact - cost).abs() > 1e-6 * exact.max(1.0) {
        return Err(Error::Invariant(format!("tracked Σ L² {cost} differs from the loads' {exact}")));
    }
    Ok((Assignment { machine_of }, initial))
}
