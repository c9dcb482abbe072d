//! Width-independent mixed packing/covering feasibility.
//!
//! Finds x ≥ 0 with `Px ≤ (1+ε)·1` and `Cx ≥ 1/(1+ε)·1` whenever `Px ≤ 1, Cx ≥ 1`
//! is feasible. The method is a phased multiplicative-weights scheme: packing
//! rows carry weights `(1+e)^{P_i x}`, active covering rows carry `(1-e)^{C_i x}`,
//! and a column is raised while its price ratio
//! `λ_j = P_jᵀy / C_{j,A}ᵀz` stays within `(1+e)` of the global ratio `|y|/|z_A|`
//! fixed at the start of the phase. Covering rows retire at a target `U` chosen
//! so that the final scaled point meets the contract. A full pass without any
//! raise proves infeasibility; that case, a spent iteration budget and a failed
//! post-hoc check are all reported as [`MpcStatus::Exhausted`].

use crate::error::{Error, Result};
use serde::Serialize;

/// A sparse row: `(column, coefficient)` pairs.
pub type Row = Vec<(usize, f64)>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MpcProblem {
    pub n_vars: usize,
    pub packing: Vec<Row>,
    pub covering: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpcStatus {
    Solved,
    Exhausted,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MpcStats {
    pub rows: usize,
    pub nonzeros: usize,
    pub phases: u64,
    pub increments: u64,
    pub iterations: u64,
    pub budget: u64,
    /// A pass found no admissible column: the exact system is infeasible.
    pub certified_infeasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcResult {
    pub status: MpcStatus,
    pub x: Vec<f64>,
    pub stats: MpcStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcOptions {
    /// Iteration budget is `budget_constant · N̄ · ln(max(m̄, 2)) / ε²`.
    pub budget_constant: f64,
}

impl Default for MpcOptions {
    fn default() -> Self {
        MpcOptions { budget_constant: 10.0 }
    }
}

/// Row activities of a candidate point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activity {
    /// max_i P_i x, 0 without packing rows.
    pub max_packing: f64,
    /// min_i C_i x, +∞ without covering rows.
    pub min_covering: f64,
}

impl Activity {
    pub fn within(&self, eps: f64, tol: f64) -> bool {
        self.max_packing <= 1.0 + eps + tol && self.min_covering >= 1.0 / (1.0 + eps) - tol
    }
}

fn row_dot(row: &Row, x: &[f64]) -> f64 {
    row.iter().map(|&(c, v)| v * x[c]).sum()
}

impl MpcProblem {
    pub fn new(n_vars: usize) -> Self {
        MpcProblem { n_vars, packing: Vec::new(), covering: Vec::new() }
    }

    pub fn nonzeros(&self) -> usize {
        self.packing.iter().chain(&self.covering).map(|r| r.iter().filter(|e| e.1 != 0.0).count()).sum()
    }

    pub fn rows(&self) -> usize {
        self.packing.len() + self.covering.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (kind, rows) in [("packing", &self.packing), ("covering", &self.covering)] {
            for (r, row) in rows.iter().enumerate() {
                for &(c, v) in row {
                    if c >= self.n_vars {
                        return Err(Error::Validation(format!(
                            "{kind} row {r} references column {c} >= {}",
                            self.n_vars
                        )));
                    }
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::Validation(format!("{kind} row {r} has coefficient {v}")));
                    }
                }
            }
        }
        if let Some(r) = self.covering.iter().position(|row| row.iter().all(|e| e.1 == 0.0)) {
            return Err(Error::Validation(format!("covering row {r} has no non-zero entry")));
        }
        Ok(())
    }

    /// Direct matrix-vector products, independent of solver state.
    pub fn activity(&self, x: &[f64]) -> Activity {
        Activity {
            max_packing: self.packing.iter().map(|r| row_dot(r, x)).fold(0.0, f64::max),
            min_covering: self.covering.iter().map(|r| row_dot(r, x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// `{"packing":{"rows":..},"covering":{"rows":..},"x":[..]}` for offline inspection.
    pub fn debug_json(&self, x: Option<&[f64]>) -> serde_json::Value {
        let rows = |rs: &[Row]| {
            serde_json::json!({
                "rows": rs.iter().map(|r| r.iter().map(|&(c, v)| serde_json::json!([c, v])).collect::<Vec<_>>()).collect::<Vec<_>>()
            })
        };
        serde_json::json!({
            "packing": rows(&self.packing),
            "covering": rows(&self.covering),
            "x": x,
        })
    }
}

pub fn solve_mpc(problem: &MpcProblem, eps: f64) -> Result<MpcResult> {
    solve_mpc_with(problem, eps, &MpcOptions::default())
}

/// Covering target `U` such that the weight analysis bounds
/// `max_i P_i x ≤ (1+ε)² U` once every covering row reaches `U`.
fn covering_target(eps: f64, inner: f64, m_pack: usize, m_cover: usize) -> f64 {
    let c1 = -(1.0 - inner).ln() / (1.0 + inner).ln();
    let log_rows = (m_pack.max(1) as f64).ln() + (1.0 + inner) * (m_cover.max(1) as f64).ln();
    let slack = (1.0 + eps).powi(2) - (1.0 + inner) * c1;
    debug_assert!(slack > 0.0);
    (((1.0 + inner) * c1 + log_rows / (1.0 + inner).ln()) / slack).ceil().max(1.0)
}

struct Columns {
    pack: Vec<Vec<(usize, f64)>>,
    cover: Vec<Vec<(usize, f64)>>,
}

fn transpose(n: usize, rows: &[Row]) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for &(c, v) in row {
            if v > 0.0 {
                cols[c].push((r, v));
            }
        }
    }
    cols
}

const RESCALE_HIGH: f64 = 1e150;
const RESCALE_LOW: f64 = 1e-150;

pub fn solve_mpc_with(problem: &MpcProblem, eps: f64, opts: &MpcOptions) -> Result<MpcResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("ε = {eps} outside (0, 1)")));
    }
    problem.validate()?;
    let n = problem.n_vars;
    let m_pack = problem.packing.len();
    let m_cover = problem.covering.len();
    let m_bar = m_pack + m_cover;
    let nnz = problem.nonzeros();
    let budget = (opts.budget_constant * nnz.max(1) as f64 * (m_bar.max(2) as f64).ln() / (eps * eps)).ceil() as u64;
    let mut stats = MpcStats { rows: m_bar, nonzeros: nnz, budget, ..MpcStats::default() };
    if m_cover == 0 {
        return Ok(MpcResult { status: MpcStatus::Solved, x: vec![0.0; n], stats });
    }

    let inner = eps / 2.0;
    let target = covering_target(eps, inner, m_pack, m_cover);
    let up = (1.0 + inner).ln();
    let down = (1.0 - inner).ln();
    let cols = Columns { pack: transpose(n, &problem.packing), cover: transpose(n, &problem.covering) };

    let mut x = vec![0.0f64; n];
    let mut pack_act = vec![0.0f64; m_pack];
    let mut cover_act = vec![0.0f64; m_cover];
    let mut active = vec![true; m_cover];
    let mut n_active = m_cover;
    let mut y = vec![1.0f64; m_pack];
    let mut z = vec![1.0f64; m_cover];

    loop {
        // Fresh weights each phase: shift exponents so the largest y and z are 1.
        let top = pack_act.iter().copied().fold(0.0, f64::max);
        for i in 0..m_pack {
            y[i] = ((pack_act[i] - top) * up).exp();
        }
        let low = (0..m_cover).filter(|&i| active[i]).map(|i| cover_act[i]).fold(f64::INFINITY, f64::min);
        for i in 0..m_cover {
            z[i] = if active[i] { ((cover_act[i] - low) * down).exp() } else { 0.0 };
        }
        let mut y_sum: f64 = y.iter().sum();
        let mut z_sum: f64 = z.iter().sum();
        let mut tau = (1.0 + inner) * y_sum / z_sum;
        stats.phases += 1;
        stats.iterations += 1;
        let mut raised = false;

        for j in 0..n {
            loop {
                let mut cz = 0.0;
                let mut cmax = 0.0f64;
                for &(r, v) in &cols.cover[j] {
                    if active[r] {
                        cz += v * z[r];
                        cmax = cmax.max(v);
                    }
                }
                if cmax == 0.0 {
                    break;
                }
                let mut py = 0.0f64;
                let mut pmax = 0.0f64;
                for &(r, v) in &cols.pack[j] {
                    py += v * y[r];
                    pmax = pmax.max(v);
                }
                if py > tau * cz {
                    break;
                }
                let delta = 1.0 / pmax.max(cmax);
                x[j] += delta;
                raised = true;
                stats.increments += 1;
                stats.iterations += 1;
                for &(r, v) in &cols.pack[j] {
                    pack_act[r] += v * delta;
                    let old = y[r];
                    y[r] *= (v * delta * up).exp();
                    y_sum += y[r] - old;
                }
                for &(r, v) in &cols.cover[j] {
                    cover_act[r] += v * delta;
                    if !active[r] {
                        continue;
                    }
                    let old = z[r];
                    if cover_act[r] >= target {
                        active[r] = false;
                        n_active -= 1;
                        z[r] = 0.0;
                    } else {
                        z[r] *= (v * delta * down).exp();
                    }
                    z_sum -= old - z[r];
                }
                if n_active == 0 {
                    return Ok(finish(problem, eps, x, stats));
                }
                if y_sum > RESCALE_HIGH {
                    let c = 1.0 / y_sum;
                    y.iter_mut().for_each(|v| *v *= c);
                    y_sum = y.iter().sum();
                    tau *= c;
                }
                if z_sum < RESCALE_LOW || z_sum <= 0.0 {
                    let s: f64 = z.iter().sum();
                    let c = 1.0 / s;
                    z.iter_mut().for_each(|v| *v *= c);
                    z_sum = z.iter().sum();
                    tau *= s;
                }
                if stats.iterations > budget {
                    return Ok(MpcResult { status: MpcStatus::Exhausted, x, stats });
                }
            }
        }
        if !raised {
            stats.certified_infeasible = true;
            return Ok(MpcResult { status: MpcStatus::Exhausted, x, stats });
        }
        if stats.iterations > budget {
            return Ok(MpcResult { status: MpcStatus::Exhausted, x, stats });
        }
    }
}

/// Scales the raw point into the contract window and re-verifies it.
fn finish(problem: &MpcProblem, eps: f64, x: Vec<f64>, stats: MpcStats) -> MpcResult {
    let act = problem.activity(&x);
    // Any s in [maxP/(1+ε), (1+ε)·minC] works; take the geometric midpoint.
    let s = if act.max_packing > 0.0 { (act.max_packing * act.min_covering).sqrt() } else { act.min_covering };
    let scaled: Vec<f64> = x.iter().map(|v| v / s).collect();
    let status = if problem.activity(&scaled).within(eps, 1e-9) { MpcStatus::Solved } else { MpcStatus::Exhausted };
    MpcResult { status, x: scaled, stats }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(n: usize, packing: Vec<Row>, covering: Vec<Row>) -> MpcProblem {
        MpcProblem { n_vars: n, packing, covering }
    }

    #[test]
    fn simplex_point() {
        let p = problem(2, vec![vec![(0, 1.0), (1, 1.0)]], vec![vec![(0, 1.0), (1, 1.0)]]);
        let r = solve_mpc(&p, 0.1).unwrap();
        assert_eq!(r.status, MpcStatus::Solved);
        let s = r.x[0] + r.x[1];
        assert!((1.0 / 1.1 - 1e-9..=1.1 + 1e-9).contains(&s), "{s}");
    }

    #[test]
    fn needs_factor_two() {
        let p = problem(1, vec![vec![(0, 2.0)]], vec![vec![(0, 1.0)]]);
        let r = solve_mpc(&p, 0.1).unwrap();
        assert_eq!(r.status, MpcStatus::Exhausted);
    }

    #[test]
    fn covering_only() {
        let p = problem(1, vec![], vec![vec![(0, 1.0)]]);
        let r = solve_mpc(&p, 0.1).unwrap();
        assert_eq!(r.status, MpcStatus::Solved);
        assert!(r.x[0] >= 1.0 / 1.1 - 1e-9);
    }

    #[test]
    fn no_covering_rows_is_zero() {
        let p = problem(2, vec![vec![(0, 1.0)]], vec![]);
        let r = solve_mpc(&p, 0.3).unwrap();
        assert_eq!(r.status, MpcStatus::Solved);
        assert_eq!(r.x, vec![0.0, 0.0]);
    }

    #[test]
    fn argument_checks() {
        let p = problem(1, vec![], vec![vec![(0, 1.0)]]);
        assert!(matches!(solve_mpc(&p, 0.0), Err(Error::Argument(_))));
        assert!(matches!(solve_mpc(&p, 1.0), Err(Error::Argument(_))));
        let empty = problem(1, vec![], vec![vec![]]);
        assert!(matches!(solve_mpc(&empty, 0.1), Err(Error::Validation(_))));
        let neg = problem(1, vec![vec![(0, -1.0)]], vec![vec![(0, 1.0)]]);
        assert!(matches!(solve_mpc(&neg, 0.1), Err(Error::Validation(_))));
    }

    #[test]
    fn assignment_lp() {
        // Two jobs, two machines, loads at most 1 with p = 1 each: one job per machine.
        let p = problem(
            4,
            vec![vec![(0, 1.0), (2, 1.0)], vec![(1, 1.0), (3, 1.0)]],
            vec![vec![(0, 1.0), (1, 1.0)], vec![(2, 1.0), (3, 1.0)]],
        );
        let r = solve_mpc(&p, 0.2).unwrap();
        assert_eq!(r.status, MpcStatus::Solved);
        assert!(p.activity(&r.x).within(0.2, 1e-9));
    }

    #[test]
    fn debug_dump_shape() {
        let p = problem(2, vec![vec![(0, 1.0)]], vec![vec![(1, 2.0)]]);
        let v = p.debug_json(None);
        assert_eq!(v["covering"]["rows"][0][0], serde_json::json!([1, 2.0]));
    }
}
