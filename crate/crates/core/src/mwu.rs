//! Packing LP `max ax, x ∈ Q, Px ≤ 1` by multiplicative weights over an oracle for Q.
//!
//! Each round aggregates the packing rows with weights `u_i = exp(ερ·P_i x)` into
//! a single row `b = (u/|u|₁)P`, asks the oracle for `y ∈ Q` with `b·y ≤ 1+ε` and
//! near-optimal `a·y`, and moves `x ← x + δy` with the largest step that raises
//! no row by more than `1/ρ`. The result is a convex combination of oracle outputs.

use crate::error::{Error, Result};
use crate::mpc::Row;

/// The aggregated problem: given `b`, return `y ∈ Q` with `b·y ≤ 1+ε` and
/// `a·y ≥ max_{y*∈Q, b·y*≤1} a·y* − φ`.
pub trait PackingOracle {
    fn solve(&mut self, b: &[f64], eps: f64, phi: f64) -> Result<Vec<f64>>;
}

impl<F> PackingOracle for F
where
    F: FnMut(&[f64], f64, f64) -> Result<Vec<f64>>,
{
    fn solve(&mut self, b: &[f64], eps: f64, phi: f64) -> Result<Vec<f64>> {
        self(b, eps, phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingProblem {
    pub n_vars: usize,
    pub p: Vec<Row>,
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuOptions {
    /// Iteration cap is `ceil(c · m̄ · max(ln m̄, 1) / ε²) + 1`.
    pub iteration_constant: f64,
}

impl Default for MwuOptions {
    fn default() -> Self {
        MwuOptions { iteration_constant: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwuOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// max_i P_i x of the returned point.
    pub max_load: f64,
    pub objective: f64,
}

/// Progress state; `log_u` is kept incrementally and cross-checked against `loads`.
#[derive(Debug, Clone)]
pub struct MwuState {
    pub t: f64,
    pub log_u: Vec<f64>,
    pub loads: Vec<f64>,
    pub x: Vec<f64>,
    pub rho: f64,
}

impl MwuState {
    fn aggregate(&self, problem: &PackingProblem) -> Vec<f64> {
        let shift = self.log_u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let u: Vec<f64> = self.log_u.iter().map(|l| (l - shift).exp()).collect();
        let total: f64 = u.iter().sum();
        let mut b = vec![0.0; problem.n_vars];
        for (i, row) in problem.p.iter().enumerate() {
            let w = u[i] / total;
            for &(c, v) in row {
                b[c] += w * v;
            }
        }
        b
    }
}

pub fn solve_packing(
    problem: &PackingProblem,
    oracle: &mut dyn PackingOracle,
    eps: f64,
    phi: f64,
    opts: &MwuOptions,
) -> Result<MwuOutcome> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("ε = {eps} outside (0, 1)")));
    }
    if !(phi > 0.0) {
        return Err(Error::Argument(format!("φ = {phi} must be positive")));
    }
    if problem.a.len() != problem.n_vars {
        return Err(Error::Validation(format!(
            "objective has length {}, expected {}",
            problem.a.len(),
            problem.n_vars
        )));
    }
    let m = problem.p.len();
    let log_m = (m.max(1) as f64).ln().max(1.0);
    let rho = log_m / (eps * eps);
    let cap = (opts.iteration_constant * m.max(1) as f64 * log_m / (eps * eps)).ceil() as usize + 1;
    let mut st = MwuState { t: 0.0, log_u: vec![0.0; m], loads: vec![0.0; m], x: vec![0.0; problem.n_vars], rho };
    let mut iterations = 0usize;

    while st.t < 1.0 {
        iterations += 1;
        if iterations > cap {
            return Err(Error::Invariant(format!(
                "packing solver exceeded its iteration cap {cap}; the oracle broke its contract"
            )));
        }
        let b = if m == 0 { vec![0.0; problem.n_vars] } else { st.aggregate(problem) };
        let y = oracle.solve(&b, eps, phi)?;
        if y.len() != problem.n_vars {
            return Err(Error::Invariant(format!("oracle returned {} values, expected {}", y.len(), problem.n_vars)));
        }
        let py: Vec<f64> = problem.p.iter().map(|row| row.iter().map(|&(c, v)| v * y[c]).sum()).collect();
        let remaining = 1.0 - st.t;
        let mut delta = remaining;
        for &v in &py {
            if v > 0.0 {
                delta = delta.min(1.0 / (rho * v));
            }
        }
        if !(delta > 0.0) {
            return Err(Error::Invariant(format!("non-positive step {delta}")));
        }
        for (xv, yv) in st.x.iter_mut().zip(&y) {
            *xv += delta * yv;
        }
        for i in 0..m {
            st.loads[i] += delta * py[i];
            st.log_u[i] += delta * eps * rho * py[i];
        }
        st.t = if delta >= remaining { 1.0 } else { st.t + delta };
        debug_assert!(weights_consistent(problem, &st, eps), "weights drifted from exp(ερ·Px)");
    }

    let max_load = problem.p.iter().map(|row| row.iter().map(|&(c, v)| v * st.x[c]).sum::<f64>()).fold(0.0, f64::max);
    let bound = (1.0 + eps).powi(2) + eps;
    if max_load > bound + 1e-9 {
        return Err(Error::Invariant(format!("packing load {max_load} exceeds (1+ε)²+ε = {bound}")));
    }
    let objective = problem.a.iter().zip(&st.x).map(|(a, x)| a * x).sum();
    Ok(MwuOutcome { x: st.x, iterations, max_load, objective })
}

fn weights_consistent(problem: &PackingProblem, st: &MwuState, eps: f64) -> bool {
    problem.p.iter().enumerate().all(|(i, row)| {
        let direct: f64 = row.iter().map(|&(c, v)| v * st.x[c]).sum();
        (st.log_u[i] / (eps * st.rho) - direct).abs() <= 1e-7 * direct.abs().max(1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Q = [0,1]^n with a linear objective and one aggregated constraint:
    /// fractional knapsack solved greedily, exact.
    fn box_oracle(a: Vec<f64>) -> impl FnMut(&[f64], f64, f64) -> Result<Vec<f64>> {
        move |b: &[f64], _eps, _phi| {
            let n = a.len();
            let mut y = vec![0.0; n];
            let mut order: Vec<usize> = (0..n).collect();
            let key = |j: usize| if b[j] == 0.0 { f64::INFINITY } else { a[j] / b[j] };
            order.sort_by(|&p, &q| key(q).partial_cmp(&key(p)).unwrap());
            let mut cap = 1.0;
            for j in order {
                if a[j] <= 0.0 && b[j] > 0.0 {
                    continue;
                }
                if b[j] == 0.0 {
                    y[j] = 1.0;
                } else {
                    y[j] = (cap / b[j]).min(1.0);
                    cap -= y[j] * b[j];
                }
            }
            Ok(y)
        }
    }

    #[test]
    fn single_row_reaches_one() {
        let prob = PackingProblem { n_vars: 1, p: vec![vec![(0, 1.0)]], a: vec![1.0] };
        let mut oracle = box_oracle(vec![1.0]);
        let out = solve_packing(&prob, &mut oracle, 0.1, 0.01, &MwuOptions::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-12);
        // ρ = 1/ε² with the ln guard, so each step is ε² of the unit budget.
        assert!((100..=101).contains(&out.iterations), "{}", out.iterations);
    }

    #[test]
    fn zero_objective() {
        let prob = PackingProblem { n_vars: 2, p: vec![vec![(0, 1.0), (1, 1.0)]], a: vec![0.0, 0.0] };
        let mut oracle = |_: &[f64], _: f64, _: f64| Ok(vec![0.0, 0.0]);
        let out = solve_packing(&prob, &mut oracle, 0.2, 0.1, &MwuOptions::default()).unwrap();
        assert_eq!(out.objective, 0.0);
    }

    #[test]
    fn vacuous_row_does_not_limit_step() {
        let prob = PackingProblem { n_vars: 1, p: vec![vec![], vec![(0, 1.0)]], a: vec![1.0] };
        let mut oracle = box_oracle(vec![1.0]);
        let out = solve_packing(&prob, &mut oracle, 0.2, 0.1, &MwuOptions::default()).unwrap();
        assert!(out.max_load <= 1.2f64.powi(2) + 0.2);
    }

    #[test]
    fn two_rows_conflict() {
        // max x0 + x1 s.t. x0 + x1 ≤ 1, x0 ≤ 0.5 over the unit box: optimum 1.
        let prob = PackingProblem { n_vars: 2, p: vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0)]], a: vec![1.0, 1.0] };
        let mut oracle = box_oracle(vec![1.0, 1.0]);
        let eps = 0.1;
        let out = solve_packing(&prob, &mut oracle, eps, 0.01, &MwuOptions::default()).unwrap();
        assert!(out.max_load <= (1.0 + eps).powi(2) + eps + 1e-9);
        assert!(out.objective >= 1.0 - 0.01 - 1e-9, "{}", out.objective);
    }

    #[test]
    fn broken_oracle_is_caught() {
        let prob = PackingProblem { n_vars: 1, p: vec![vec![(0, 1.0)]], a: vec![1.0] };
        let mut oracle = |_: &[f64], _: f64, _: f64| Ok(vec![5.0]);
        let err = solve_packing(&prob, &mut oracle, 0.1, 0.1, &MwuOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
    }
}
