//! Unrelated-machine pipelines: build a time-indexed or assignment LP as a
//! mixed packing/covering system, search the guess parameter, solve, round.

mod completion;
mod lq;
mod makespan;

pub use completion::{solve_weighted_completion, WctOptions};
pub use lq::{double_fast_half, lq_cost_coefficient, solve_lq, solve_lq_with, LqBranch, LqOptions};
pub use makespan::solve_makespan;

use crate::error::{Error, Result};
use crate::model::{Assignment, ObjectiveValue};
use crate::mpc::{solve_mpc, MpcProblem, MpcStatus};
use serde::Serialize;

/// Volume of a job of length `p` finishing at `c` that is processed before `theta`.
pub fn rho(p: f64, c: f64, theta: f64) -> Result<f64> {
    if !(p >= 0.0 && p <= c) {
        return Err(Error::Argument(format!("ρ needs 0 ≤ p ≤ C, got p = {p}, C = {c}")));
    }
    if !(theta > 0.0) {
        return Err(Error::Argument(format!("ρ needs θ > 0, got {theta}")));
    }
    Ok(rho_unchecked(p, c, theta))
}

pub(crate) fn rho_unchecked(p: f64, c: f64, theta: f64) -> f64 {
    (p + theta - c).max(0.0).min(p)
}

/// Geometric time grid `τ_0 = 0`, `τ_d = (1+ε)^{d−1}`, truncated at the
/// smallest `D` with `τ_D ≥ target`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauGrid {
    taus: Vec<f64>,
}

impl TauGrid {
    pub fn covering(eps: f64, target: f64) -> Result<TauGrid> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Argument(format!("grid ratio ε = {eps} must be positive")));
        }
        if !target.is_finite() {
            return Err(Error::Argument(format!("grid target {target} is not finite")));
        }
        let mut taus = vec![0.0, 1.0];
        while taus[taus.len() - 1] < target {
            taus.push((1.0 + eps).powi(taus.len() as i32 - 1));
        }
        Ok(TauGrid { taus })
    }

    /// `D`.
    pub fn d(&self) -> usize {
        self.taus.len() - 1
    }

    pub fn tau(&self, d: usize) -> f64 {
        self.taus[d]
    }

    /// `η_d = τ_{d+1} − τ_d` for `d < D`.
    pub fn eta(&self, d: usize) -> f64 {
        self.taus[d + 1] - self.taus[d]
    }

    /// Smallest `d ≥ 1` with `τ_d ≥ p`, if any.
    pub fn first_at_least(&self, p: f64) -> Option<usize> {
        (1..self.taus.len()).find(|&d| self.taus[d] >= p)
    }
}

/// LP statistics of a pipeline run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LpStats {
    /// Guesses whose LP was solved (successful or not).
    pub guesses: usize,
    /// Shape of the LP at the accepted guess.
    pub vars: usize,
    pub rows: usize,
    pub nonzeros: usize,
    /// Solver iterations summed over all guesses.
    pub iterations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    Grouping,
    ThetaOrder,
    ConditionalExpectation,
    IndependentDerandomized,
    GroupingOnY,
    GroupingOnDoubled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnrelatedSolution {
    pub assignment: Assignment,
    pub value: ObjectiveValue,
    /// Accepted guess (`P` or `Φ`) in the units of the input.
    pub guess: f64,
    pub lp: LpStats,
    pub rounding: Rounding,
    /// Expected cost of the fractional point under independent assignment,
    /// for the derandomized roundings.
    pub fractional_cost: Option<f64>,
    /// Cost of the schedule in the rounding's own order (θ order).
    pub rounding_cost: Option<f64>,
    /// `T` of the fractional assignment, L_q runs only (input units).
    pub t_value: Option<f64>,
    /// Fractional L_q terms exceeded `(1+ε)^{8q}Φ`; reported, not fatal.
    pub audit_flagged: bool,
}

/// Ascending geometric guesses `ub/(1+ε)^k` down to the last one `≥ lb`.
pub(crate) fn guess_grid(ub: f64, lb: f64, eps: f64) -> Vec<f64> {
    let mut out = vec![ub];
    let mut k = 1;
    loop {
        let g = ub / (1.0 + eps).powi(k);
        if g < lb {
            break;
        }
        out.push(g);
        k += 1;
    }
    out.reverse();
    out
}

/// Binary search for the smallest guess whose attempt succeeds, assuming every
/// guess at least the optimum succeeds. The top guess must succeed.
pub(crate) fn search_guesses<T>(
    guesses: &[f64],
    mut attempt: impl FnMut(f64) -> Result<Option<T>>,
) -> Result<(usize, T)> {
    let top = guesses.len() - 1;
    let mut best = match attempt(guesses[top])? {
        Some(t) => (top, t),
        None => {
            return Err(Error::Invariant(format!(
                "the largest guess {} failed although it bounds the optimum",
                guesses[top]
            )))
        }
    };
    // guesses[lo] is known to fail when lo ≥ 0.
    let mut lo: isize = -1;
    while (best.0 as isize) - lo > 1 {
        let mid = ((lo + best.0 as isize) / 2) as usize;
        match attempt(guesses[mid])? {
            Some(t) => best = (mid, t),
            None => lo = mid as isize,
        }
    }
    Ok(best)
}

/// A solved LP over job-grouped variables, rescaled so every job has mass 1.
pub(crate) struct SolvedLp {
    pub x: Vec<f64>,
    pub rows: usize,
    pub nonzeros: usize,
}

/// Solves `problem`, whose covering rows are exactly the per-job sums over
/// `job_vars`, divides each job's mass by its covering total, and re-checks
/// the packing rows against `(1+ε)²`. `None` means the guess failed.
pub(crate) fn solve_and_rescale(
    problem: &MpcProblem,
    job_vars: &[Vec<usize>],
    eps: f64,
    stats: &mut LpStats,
) -> Result<Option<SolvedLp>> {
    stats.guesses += 1;
    let res = solve_mpc(problem, eps)?;
    stats.iterations += res.stats.iterations;
    if res.status == MpcStatus::Exhausted {
        return Ok(None);
    }
    let mut x = res.x;
    for vars in job_vars {
        let mass: f64 = vars.iter().map(|&v| x[v]).sum();
        if !(mass > 0.0) {
            return Err(Error::Invariant("solved LP leaves a job without mass".into()));
        }
        for &v in vars {
            x[v] /= mass;
        }
    }
    let act = problem.activity(&x);
    let cap = (1.0 + eps).powi(2);
    if act.max_packing > cap + 1e-9 {
        return Err(Error::Invariant(format!(
            "rescaled LP point has packing activity {} above (1+ε)² = {cap}",
            act.max_packing
        )));
    }
    Ok(Some(SolvedLp { x, rows: problem.rows(), nonzeros: problem.nonzeros() }))
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("ε = {eps} outside (0, 1)")));
    }
    Ok(())
}

/// Fenwick tree over `f64` with point add and prefix sum.
#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    pub fn new(n: usize) -> Self {
        Fenwick { tree: vec![0.0; n + 1] }
    }

    pub fn add(&mut self, pos: usize, delta: f64) {
        let mut k = pos + 1;
        while k < self.tree.len() {
            self.tree[k] += delta;
            k += k & k.wrapping_neg();
        }
    }

    /// Sum over positions `< end`.
    pub fn prefix(&self, end: usize) -> f64 {
        let mut k = end;
        let mut s = 0.0;
        while k > 0 {
            s += self.tree[k];
            k -= k & k.wrapping_neg();
        }
        s
    }

    pub fn total(&self) -> f64 {
        self.prefix(self.tree.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_examples() {
        assert_eq!(rho(3.0, 5.0, 4.0).unwrap(), 2.0);
        assert_eq!(rho(3.0, 5.0, 5.0).unwrap(), 3.0);
        assert_eq!(rho(3.0, 5.0, 2.0).unwrap(), 0.0);
        assert_eq!(rho(3.0, 5.0, 1.5).unwrap(), 0.0);
        assert_eq!(rho(3.0, 5.0, 9.0).unwrap(), 3.0);
        assert!(matches!(rho(6.0, 5.0, 1.0), Err(Error::Argument(_))));
        assert!(matches!(rho(1.0, 5.0, 0.0), Err(Error::Argument(_))));
    }

    #[test]
    fn grid_is_minimal() {
        let g = TauGrid::covering(1.0, 5.0).unwrap();
        // 0, 1, 2, 4, 8
        assert_eq!(g.d(), 4);
        assert_eq!(g.tau(0), 0.0);
        assert_eq!(g.tau(4), 8.0);
        assert_eq!(g.eta(2), 2.0);
        assert_eq!(g.first_at_least(3.0), Some(3));
        assert_eq!(g.first_at_least(9.0), None);
        assert_eq!(TauGrid::covering(0.5, 1.0).unwrap().d(), 1);
        assert_eq!(TauGrid::covering(0.5, 0.0).unwrap().d(), 1);
    }

    #[test]
    fn guesses_cover_the_range() {
        let g = guess_grid(8.0, 1.0, 1.0);
        assert_eq!(g, vec![1.0, 2.0, 4.0, 8.0]);
        assert_eq!(guess_grid(3.0, 3.0, 0.5), vec![3.0]);
    }

    #[test]
    fn search_finds_threshold() {
        let grid: Vec<f64> = (0..10).map(f64::from).collect();
        let mut calls = 0;
        let (k, v) = search_guesses(&grid, |g| {
            calls += 1;
            Ok((g >= 6.0).then_some(g))
        })
        .unwrap();
        assert_eq!((k, v), (6, 6.0));
        assert!(calls <= 5);
        assert!(search_guesses(&grid, |_| Ok(None::<()>)).is_err());
    }

    #[test]
    fn fenwick_prefix_sums() {
        let mut f = Fenwick::new(5);
        for (i, v) in [3.0, 1.0, 4.0, 1.0, 5.0].into_iter().enumerate() {
            f.add(i, v);
        }
        assert_eq!(f.prefix(0), 0.0);
        assert_eq!(f.prefix(3), 8.0);
        assert_eq!(f.total(), 14.0);
        f.add(2, -4.0);
        assert_eq!(f.prefix(3), 4.0);
    }
}
