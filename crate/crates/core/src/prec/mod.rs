//! Precedence-constrained scheduling on identical machines, `P|prec|Σ w_j C_j`.
//!
//! The time-indexed LP over `x_{j,d}` (fraction of `j` finished by `τ_d`) is a
//! packing problem over a monotone polytope, so it is solved with the
//! multiplicative-weights driver and the flow-based aggregate oracle. Its
//! fractional completion times `C_j` then feed list scheduling.

mod critical;
mod idle;
mod list;

pub use critical::CriticalCounters;
pub use idle::{IdleIntervals, OPEN};
pub use list::{handling_order, list_scheduling, list_scheduling_naive, SlotProfile};

use crate::error::{Error, Result};
use crate::flow::{aggregate_oracle, RawNetwork};
use crate::model::{ObjectiveValue, PrecInstance, Schedule};
use crate::mwu::{solve_packing, MwuOptions, PackingProblem};
use crate::unrelated::TauGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Instances above this total size are rejected.
pub const MAX_TOTAL_SIZE: u64 = 1 << 40;
/// The busy/idle audit replays the schedule slot by slot up to this total size.
const PROFILE_AUDIT_CAP: u64 = 1 << 16;
const REPAIR_TOL: f64 = 1e-6;

/// Longest chain ending at each job, `q_j = p_j + max_{k ≺ j} q_k`.
pub fn chain_bounds(inst: &PrecInstance) -> Result<Vec<u64>> {
    let preds = inst.predecessors();
    let mut q = vec![0u64; inst.n_jobs];
    for j in inst.topological_order()? {
        q[j] = inst.sizes[j] + preds[j].iter().map(|&k| q[k]).max().unwrap_or(0);
    }
    Ok(q)
}

/// The LP as a packing problem. Free variables are `(j, d)` with
/// `1 ≤ d < D` and `τ_d ≥ q_j`; all others are fixed (`x_{j,D} = 1`, the rest 0).
#[derive(Debug, Clone)]
pub struct PrecLp {
    pub grid: TauGrid,
    pub q: Vec<u64>,
    /// `(j, d)` of each free variable.
    pub vars: Vec<(usize, usize)>,
    /// `(u, v)` means `x_u ≤ x_v`.
    pub edges: Vec<(usize, usize)>,
    pub packing: PackingProblem,
    pub total_weight: f64,
}

impl PrecLp {
    pub fn build(inst: &PrecInstance, eps: f64) -> Result<PrecLp> {
        inst.validate()?;
        if inst.total_size() > MAX_TOTAL_SIZE {
            return Err(Error::Validation(format!("total size {} exceeds 2^40", inst.total_size())));
        }
        let q = chain_bounds(inst)?;
        let grid = TauGrid::covering(eps, inst.total_size() as f64)?;
        let big_d = grid.d();
        let mut var_of = vec![vec![None; big_d + 1]; inst.n_jobs];
        let mut vars = Vec::new();
        for j in 0..inst.n_jobs {
            for d in 1..big_d {
                if grid.tau(d) >= q[j] as f64 {
                    var_of[j][d] = Some(vars.len());
                    vars.push((j, d));
                }
            }
        }
        let mut edges = Vec::new();
        for j in 0..inst.n_jobs {
            for d in 1..big_d.saturating_sub(1) {
                if let (Some(u), Some(v)) = (var_of[j][d], var_of[j][d + 1]) {
                    edges.push((u, v));
                }
            }
        }
        // j ≺ j′ forces x_{j′,d} ≤ x_{j,d}; where j′ is free so is j.
        for &(j, k) in &inst.prec {
            for d in 1..big_d {
                if let (Some(u), Some(v)) = (var_of[k][d], var_of[j][d]) {
                    edges.push((u, v));
                }
            }
        }
        let m = inst.m as f64;
        let mut rows = vec![Vec::new(); big_d];
        for (c, &(j, d)) in vars.iter().enumerate() {
            rows[d].push((c, inst.sizes[j] as f64 / (m * grid.tau(d))));
        }
        let a = vars.iter().map(|&(j, d)| inst.weights[j] as f64 * grid.eta(d)).collect();
        Ok(PrecLp {
            q,
            packing: PackingProblem { n_vars: vars.len(), p: rows.into_iter().filter(|r| !r.is_empty()).collect(), a },
            vars,
            edges,
            total_weight: inst.weights.iter().map(|&w| w as f64).sum(),
            grid,
        })
    }

    /// Expands free values to the full table `x[j][d]`, `0 ≤ d ≤ D`.
    pub fn table(&self, n_jobs: usize, x: &[f64]) -> Vec<Vec<f64>> {
        let big_d = self.grid.d();
        let mut t = vec![vec![0.0; big_d + 1]; n_jobs];
        for row in &mut t {
            row[big_d] = 1.0;
        }
        for (c, &(j, d)) in self.vars.iter().enumerate() {
            t[j][d] = x[c].clamp(0.0, 1.0);
        }
        t
    }
}

/// Solved LP with completion times `C_j = τ_D − Σ_{d<D} η_d x_{j,d}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalCompletion {
    #[serde(skip)]
    pub grid: TauGrid,
    /// `x[j][d]` for `0 ≤ d ≤ D`, monotone in `d` and along precedence arcs.
    pub x: Vec<Vec<f64>>,
    pub completion: Vec<f64>,
    /// `Σ_j w_j C_j`.
    pub value: f64,
    /// Largest packing row activity `max_d p(x_{·,d})/(mτ_d)`.
    pub max_load: f64,
    /// `max_{j*} p({j : C_j ≤ C_{j*}}) / (m·C_{j*})`.
    pub volume_ratio: f64,
    pub iterations: usize,
    pub vars: usize,
    pub rows: usize,
    pub nonzeros: usize,
}

/// Solves the LP, repairs float drift in `x`, computes `C` and audits it.
pub fn solve_prec_lp(inst: &PrecInstance, eps: f64) -> Result<FractionalCompletion> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("ε = {eps} outside (0, 1)")));
    }
    let lp = PrecLp::build(inst, eps)?;
    let a_total: f64 = lp.packing.a.iter().sum();
    let phi = eps * lp.total_weight;
    let (x, iterations) = if lp.vars.is_empty() || !(a_total > 0.0) || !(phi > 0.0) {
        (vec![0.0; lp.vars.len()], 0)
    } else {
        // Oracle precision ε′ with (1+ε′)² = 1+ε.
        let inner = (1.0 + eps).sqrt() - 1.0;
        let mut oracle = |b: &[f64], _eps: f64, phi: f64| -> Result<Vec<f64>> {
            let net = RawNetwork {
                n_vertices: lp.vars.len(),
                edges: lp.edges.clone(),
                supply: lp.packing.a.clone(),
                demand: b.to_vec(),
            };
            Ok(aggregate_oracle(&net, inner, phi.min(0.45 * a_total))?.y)
        };
        let out = solve_packing(&lp.packing, &mut oracle, eps, phi, &MwuOptions::default())?;
        (out.x, out.iterations)
    };
    let mut table = lp.table(inst.n_jobs, &x);
    repair(inst, &mut table)?;
    let big_d = lp.grid.d();
    let max_load = (1..big_d)
        .map(|d| {
            let vol: f64 = (0..inst.n_jobs).map(|j| inst.sizes[j] as f64 * table[j][d]).sum();
            vol / (inst.m as f64 * lp.grid.tau(d))
        })
        .fold(0.0, f64::max);
    let mut completion: Vec<f64> =
        table.iter().map(|row| lp.grid.tau(big_d) - (0..big_d).map(|d| lp.grid.eta(d) * row[d]).sum::<f64>()).collect();
    // x is monotone along arcs, so this only absorbs summation rounding.
    for j in inst.topological_order()? {
        for &k in &inst.successors()[j] {
            completion[k] = completion[k].max(completion[j]);
        }
    }
    let volume_ratio = (0..inst.n_jobs)
        .map(|js| {
            let vol: u64 = (0..inst.n_jobs).filter(|&j| completion[j] <= completion[js]).map(|j| inst.sizes[j]).sum();
            vol as f64 / (inst.m as f64 * completion[js])
        })
        .fold(0.0, f64::max);
    let fc = FractionalCompletion {
        volume_ratio,
        value: (0..inst.n_jobs).map(|j| inst.weights[j] as f64 * completion[j]).sum(),
        grid: lp.grid.clone(),
        x: table,
        completion,
        max_load,
        iterations,
        vars: lp.vars.len(),
        rows: lp.packing.p.len(),
        nonzeros: lp.packing.p.iter().map(Vec::len).sum(),
    };
    audit_fractional(inst, &fc, &lp.q, eps)?;
    Ok(fc)
}

/// Makes `x` exactly monotone: raise each job to its successors' values
/// (successors first), then to the running maximum over `d`.
fn repair(inst: &PrecInstance, x: &mut [Vec<f64>]) -> Result<()> {
    let succ = inst.successors();
    let mut order = inst.topological_order()?;
    order.reverse();
    let mut drift = 0.0f64;
    for j in order {
        for d in 0..x[j].len() {
            let mut v = x[j][d];
            for &k in &succ[j] {
                v = v.max(x[k][d]);
            }
            if d > 0 {
                v = v.max(x[j][d - 1]);
            }
            drift = drift.max(v - x[j][d]);
            x[j][d] = v;
        }
    }
    if drift > REPAIR_TOL {
        return Err(Error::Invariant(format!("LP point violates monotonicity by {drift}")));
    }
    Ok(())
}

fn audit_fractional(inst: &PrecInstance, fc: &FractionalCompletion, q: &[u64], eps: f64) -> Result<()> {
    let c = &fc.completion;
    for j in 0..inst.n_jobs {
        if c[j] < q[j] as f64 * (1.0 - 1e-9) {
            return Err(Error::Invariant(format!("C_{j} = {} below its chain bound {}", c[j], q[j])));
        }
    }
    for &(j, k) in &inst.prec {
        if c[j] > c[k] {
            return Err(Error::Invariant(format!("C_{j} = {} exceeds C_{k} = {}", c[j], c[k])));
        }
    }
    // Volume finished by C_{j*}: 2ξ/(1−ε) per machine and unit time, ξ the packing load.
    let factor = (2.0 + 5.0 * eps).max(2.0 * fc.max_load / (1.0 - eps));
    if fc.volume_ratio > factor * (1.0 + 1e-9) {
        return Err(Error::Invariant(format!("volume ratio {} exceeds {factor}", fc.volume_ratio)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecMode {
    /// One machine: sequence by `C`.
    Single,
    /// Unit sizes: list scheduling by `C`.
    UnitDet,
    /// Unit sizes: list scheduling by the `θ`-point of `x`, best of several `θ`.
    UnitTheta,
    /// List scheduling by `C_j + q_j − p_j`.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecOptions {
    pub mode: PrecMode,
    pub seed: u64,
    /// Number of `θ` draws for [`PrecMode::UnitTheta`].
    pub repetitions: usize,
}

impl Default for PrecOptions {
    fn default() -> Self {
        PrecOptions { mode: PrecMode::General, seed: 0, repetitions: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecSolution {
    pub schedule: Schedule,
    pub value: ObjectiveValue,
    pub fractional: FractionalCompletion,
    pub mode: PrecMode,
    /// The `θ` behind the returned schedule in [`PrecMode::UnitTheta`].
    pub theta: Option<f64>,
}

/// `D^θ_j`: `τ_d` for the smallest `d` with `x_{j,d} ≥ θ`.
pub fn theta_targets(x: &[Vec<f64>], grid: &TauGrid, theta: f64) -> Vec<f64> {
    x.iter()
        .map(|row| {
            let d = row.iter().position(|&v| v >= theta).unwrap_or(row.len() - 1);
            grid.tau(d)
        })
        .collect()
}

/// Sequences jobs by `C` on the single machine (ties by topological rank).
pub fn sequence_by(inst: &PrecInstance, f: &[f64]) -> Result<Schedule> {
    let mut t = 0;
    let mut completion = vec![0; inst.n_jobs];
    for j in handling_order(inst, f)? {
        t += inst.sizes[j];
        completion[j] = t;
    }
    Ok(Schedule { completion })
}

pub fn solve_prec(inst: &PrecInstance, eps: f64, opts: &PrecOptions) -> Result<PrecSolution> {
    inst.validate()?;
    match opts.mode {
        PrecMode::Single if inst.m != 1 => {
            return Err(Error::Argument(format!("single-machine rounding needs m = 1, got m = {}", inst.m)))
        }
        PrecMode::UnitDet | PrecMode::UnitTheta if inst.sizes.iter().any(|&p| p != 1) => {
            return Err(Error::Argument("unit rounding needs all sizes equal to 1".into()))
        }
        PrecMode::UnitTheta if opts.repetitions == 0 => {
            return Err(Error::Argument("θ rounding needs at least one repetition".into()))
        }
        _ => {}
    }
    let frac = solve_prec_lp(inst, eps)?;
    let q = chain_bounds(inst)?;
    let c = &frac.completion;
    let (schedule, theta) = match opts.mode {
        PrecMode::Single => (sequence_by(inst, c)?, None),
        PrecMode::UnitDet => {
            let s = list_scheduling(inst, c)?;
            audit_profile(inst, c, &s, |j| q[j] as f64)?;
            (s, None)
        }
        PrecMode::General => {
            let f: Vec<f64> = (0..inst.n_jobs).map(|j| c[j] + (q[j] - inst.sizes[j]) as f64).collect();
            for &(j, k) in &inst.prec {
                if f[k] - f[j] < inst.sizes[j] as f64 * (1.0 - 1e-9) {
                    return Err(Error::Invariant(format!("F_{k} − F_{j} = {} below p_{j}", f[k] - f[j])));
                }
            }
            let s = list_scheduling(inst, &f)?;
            audit_profile(inst, &f, &s, |j| f[j] + inst.sizes[j] as f64)?;
            (s, None)
        }
        PrecMode::UnitTheta => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut best: Option<(u128, Schedule, f64)> = None;
            for _ in 0..opts.repetitions {
                let theta = 1.0 - rng.gen::<f64>();
                let f = theta_targets(&frac.x, &frac.grid, theta);
                let s = list_scheduling(inst, &f)?;
                audit_profile(inst, &f, &s, |j| q[j] as f64)?;
                let v = inst.evaluate(&s)?.exact.expect("integral objective");
                if best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, s, theta));
                }
            }
            let (_, s, theta) = best.expect("at least one repetition");
            (s, Some(theta))
        }
    };
    let value = inst.evaluate(&schedule)?;
    Ok(PrecSolution { schedule, value, fractional: frac, mode: opts.mode, theta })
}

/// Replays the list schedule slot by slot (small instances only) and checks
/// `T_busy ≤ p({j : F_j ≤ F_{j*}})/m` and `T_idle ≤ idle_cap(j*)` for every job.
fn audit_profile(inst: &PrecInstance, f: &[f64], s: &Schedule, idle_cap: impl Fn(usize) -> f64) -> Result<()> {
    if inst.total_size() > PROFILE_AUDIT_CAP {
        return Ok(());
    }
    let (naive, profile) = list_scheduling_naive(inst, f)?;
    if &naive != s {
        return Err(Error::Invariant("list scheduling engines disagree".into()));
    }
    for js in 0..inst.n_jobs {
        let vol: u64 = (0..inst.n_jobs).filter(|&j| f[j] <= f[js]).map(|j| inst.sizes[j]).sum();
        let pr = profile[js];
        if pr.busy as f64 > vol as f64 / inst.m as f64 + 1e-9 {
            return Err(Error::Invariant(format!("job {js}: {} busy slots exceed volume {vol}/m", pr.busy)));
        }
        if pr.idle as f64 > idle_cap(js) + 1e-9 {
            return Err(Error::Invariant(format!("job {js}: {} idle slots exceed {}", pr.idle, idle_cap(js))));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{brute_force_prec, generate, Family, GenParams, Instance, PrecOracleCaps};

    fn inst(sizes: &[u64], weights: &[u64], m: usize, prec: &[(usize, usize)]) -> PrecInstance {
        PrecInstance { n_jobs: sizes.len(), sizes: sizes.to_vec(), weights: weights.to_vec(), m, prec: prec.to_vec() }
    }

    #[test]
    fn chain_bounds_examples() {
        assert_eq!(chain_bounds(&inst(&[2, 3], &[1, 1], 1, &[(0, 1)])).unwrap(), vec![2, 5]);
        let diamond = inst(&[1, 2, 3, 1], &[1; 4], 2, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(chain_bounds(&diamond).unwrap()[3], 5);
    }

    #[test]
    fn lp_shape() {
        let i = inst(&[2, 3], &[1, 1], 1, &[(0, 1)]);
        let lp = PrecLp::build(&i, 0.5).unwrap();
        // τ: 0, 1, 1.5, 2.25, 3.375, 5.0625; D = 5.
        assert_eq!(lp.grid.d(), 5);
        assert!(lp.vars.iter().all(|&(j, d)| d < 5 && lp.grid.tau(d) >= lp.q[j] as f64));
        assert_eq!(lp.vars, vec![(0, 3), (0, 4)]);
        assert_eq!(lp.edges, vec![(0, 1)]);
    }

    #[test]
    fn single_job_single_machine() {
        let eps = 0.2;
        let i = inst(&[3], &[2], 1, &[]);
        let sol = solve_prec(&i, eps, &PrecOptions { mode: PrecMode::Single, ..PrecOptions::default() }).unwrap();
        assert_eq!(sol.schedule.completion, vec![3]);
        let c = sol.fractional.completion[0];
        assert!(c >= 3.0 && c <= (1.0 + eps) * 3.0 + 1e-9, "C = {c}");
    }

    #[test]
    fn two_independent_unit_jobs() {
        let eps = 0.2;
        let i = inst(&[1, 1], &[1, 1], 2, &[]);
        let sol = solve_prec(&i, eps, &PrecOptions { mode: PrecMode::UnitDet, ..PrecOptions::default() }).unwrap();
        assert_eq!(sol.schedule.completion, vec![1, 1]);
        for &c in &sol.fractional.completion {
            assert!(c <= 1.0 + 3.0 * eps, "C = {c}");
        }
    }

    #[test]
    fn integral_theta_points_ignore_theta() {
        let grid = TauGrid::covering(0.5, 4.0).unwrap();
        let x = vec![vec![0.0, 1.0, 1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0, 1.0, 1.0]];
        let a = theta_targets(&x, &grid, 0.01);
        assert_eq!(a, theta_targets(&x, &grid, 1.0));
        assert_eq!(a, vec![1.0, 2.25]);
    }

    #[test]
    fn mode_preconditions() {
        let i = inst(&[2, 1], &[1, 1], 2, &[]);
        let single = PrecOptions { mode: PrecMode::Single, ..PrecOptions::default() };
        assert!(matches!(solve_prec(&i, 0.2, &single), Err(Error::Argument(_))));
        let unit = PrecOptions { mode: PrecMode::UnitDet, ..PrecOptions::default() };
        assert!(matches!(solve_prec(&i, 0.2, &unit), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_weights_still_schedule() {
        let i = inst(&[1, 2], &[0, 0], 1, &[(0, 1)]);
        let sol = solve_prec(&i, 0.2, &PrecOptions { mode: PrecMode::Single, ..PrecOptions::default() }).unwrap();
        assert_eq!(sol.schedule.completion, vec![1, 3]);
    }

    fn seeded(seed: u64, family: Family, m: usize) -> PrecInstance {
        let params = GenParams { n: 5, m, p_max: 6, w_max: 10, ..GenParams::default() };
        match generate(seed, family, &params).unwrap() {
            Instance::Prec(p) => p,
            _ => unreachable!(),
        }
    }

    #[test]
    fn ratios_on_seeded_instances() {
        let eps = 0.2;
        let caps = PrecOracleCaps { jobs: 8, total_size: 60 };
        let cases = [
            (Family::PrecRandomDag, 1, PrecMode::Single, 2.0),
            (Family::PrecUnit, 2, PrecMode::UnitTheta, 1.0 + 2f64.sqrt()),
            (Family::PrecUnit, 2, PrecMode::UnitDet, 3.0),
            (Family::PrecRandomDag, 2, PrecMode::General, 6.0),
        ];
        for (family, m, mode, bound) in cases {
            for seed in 0..2 {
                let i = seeded(seed, family, m);
                let sol = solve_prec(&i, eps, &PrecOptions { mode, seed, repetitions: 20 }).unwrap();
                let (_, opt) = brute_force_prec(&i, caps).unwrap();
                let ratio = sol.value.ratio_to(&opt);
                assert!(ratio <= bound + 3.0 * eps, "{mode:?} seed {seed}: ratio {ratio}");
            }
        }
    }
}
