//! Problem dispatch shared by `solve` and `bench`.

use clap::ValueEnum;
use schedkit::model::{
    brute_force_prec, brute_force_unrelated, Instance, Objective, ObjectiveValue, PrecInstance, PrecOracleCaps,
    Solution, UnrelatedInstance,
};
use schedkit::prec::{solve_prec, PrecMode, PrecOptions};
use schedkit::unrelated::{
    solve_lq_with, solve_makespan, solve_weighted_completion, LqBranch, LqOptions, Rounding, UnrelatedSolution,
    WctOptions,
};
use schedkit::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Cmax,
    Wct,
    Lq,
    Prec,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Cmax => "cmax",
            Problem::Wct => "wct",
            Problem::Lq => "lq",
            Problem::Prec => "prec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Single,
    UnitTheta,
    UnitDet,
    General,
}

impl From<Mode> for PrecMode {
    fn from(m: Mode) -> PrecMode {
        match m {
            Mode::Single => PrecMode::Single,
            Mode::UnitTheta => PrecMode::UnitTheta,
            Mode::UnitDet => PrecMode::UnitDet,
            Mode::General => PrecMode::General,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    Independent,
    Restricted,
    General,
}

impl From<Branch> for LqBranch {
    fn from(b: Branch) -> LqBranch {
        match b {
            Branch::Independent => LqBranch::Independent,
            Branch::Restricted => LqBranch::Restricted,
            Branch::General => LqBranch::General,
        }
    }
}

/// Everything a solver run needs besides the instance.
#[derive(Debug, Clone, Copy)]
pub struct SolveSpec {
    pub problem: Problem,
    pub eps: f64,
    pub q: Option<f64>,
    pub det: bool,
    pub seed: u64,
    pub mode: Mode,
    pub repetitions: usize,
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LpReport {
    pub guesses: usize,
    pub vars: usize,
    pub rows: usize,
    pub nonzeros: usize,
    pub iterations: u64,
}

pub struct Solved {
    pub solution: Solution,
    pub value: ObjectiveValue,
    pub guess: Option<f64>,
    pub lp: LpReport,
    /// The approximation bound that applies to the rounding actually used.
    pub bound: f64,
    /// Problem-specific extras for the report.
    pub details: Value,
}

pub fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::Makespan => "makespan",
        Objective::WeightedCompletion => "weighted_completion",
        Objective::Lq(_) => "lq",
    }
}

pub fn objective_json(v: &ObjectiveValue) -> Value {
    let mut out = json!({ "objective": objective_name(v.objective), "value": v.value });
    if let Objective::Lq(q) = v.objective {
        out["q"] = json!(q);
    }
    if let Some(e) = v.exact {
        out["exact"] = json!(e);
    }
    out
}

fn unrelated(inst: &Instance, problem: Problem) -> Result<&UnrelatedInstance> {
    match inst {
        Instance::Unrelated(u) => Ok(u),
        Instance::Prec(_) => Err(Error::Argument(format!("--problem {} needs an unrelated instance", problem.name()))),
    }
}

fn prec(inst: &Instance) -> Result<&PrecInstance> {
    match inst {
        Instance::Prec(p) => Ok(p),
        Instance::Unrelated(_) => Err(Error::Argument("--problem prec needs a prec instance".into())),
    }
}

/// The L_q exponent: the flag wins over the instance field.
pub fn lq_instance(inst: &UnrelatedInstance, q: Option<f64>) -> Result<UnrelatedInstance> {
    let q = q.or(inst.q).ok_or_else(|| Error::Argument("lq needs --q or a q field in the instance".into()))?;
    Ok(UnrelatedInstance { q: Some(q), ..inst.clone() })
}

pub fn objective_for(inst: &Instance, spec: &SolveSpec) -> Result<Objective> {
    Ok(match spec.problem {
        Problem::Cmax => Objective::Makespan,
        Problem::Wct | Problem::Prec => Objective::WeightedCompletion,
        Problem::Lq => Objective::Lq(lq_instance(unrelated(inst, spec.problem)?, spec.q)?.q.unwrap_or(2.0)),
    })
}

fn from_unrelated(s: UnrelatedSolution, bound: f64, extra: Value) -> Solved {
    let mut details = json!({ "rounding": s.rounding });
    if let Some(c) = s.fractional_cost {
        details["fractional_cost"] = json!(c);
    }
    if let Some(c) = s.rounding_cost {
        details["rounding_cost"] = json!(c);
    }
    if let Some(t) = s.t_value {
        details["t_value"] = json!(t);
    }
    if s.audit_flagged {
        details["audit_flagged"] = json!(true);
    }
    if let (Value::Object(d), Value::Object(e)) = (&mut details, extra) {
        d.extend(e);
    }
    Solved {
        solution: Solution::Assignment(s.assignment),
        value: s.value,
        guess: Some(s.guess),
        lp: LpReport {
            guesses: s.lp.guesses,
            vars: s.lp.vars,
            rows: s.lp.rows,
            nonzeros: s.lp.nonzeros,
            iterations: s.lp.iterations,
        },
        bound,
        details,
    }
}

pub fn solve(inst: &Instance, spec: &SolveSpec) -> Result<Solved> {
    let eps = spec.eps;
    match spec.problem {
        Problem::Cmax => {
            let s = solve_makespan(unrelated(inst, spec.problem)?, eps)?;
            Ok(from_unrelated(s, 2.0 + 3.0 * eps, json!({})))
        }
        Problem::Wct => {
            let opts = WctOptions { deterministic: spec.det, seed: spec.seed, thin_constraints: false };
            let s = solve_weighted_completion(unrelated(inst, spec.problem)?, eps, &opts)?;
            Ok(from_unrelated(s, 1.5 + 3.0 * eps, json!({ "deterministic": spec.det })))
        }
        Problem::Lq => {
            let u = lq_instance(unrelated(inst, spec.problem)?, spec.q)?;
            let opts = LqOptions { branch: spec.branch.map(Into::into) };
            let s = solve_lq_with(&u, eps, &opts)?;
            let base = match s.rounding {
                Rounding::IndependentDerandomized => 2f64.sqrt(),
                Rounding::GroupingOnY => 2.0,
                _ => 4.0,
            };
            Ok(from_unrelated(s, base + 3.0 * eps, json!({ "q": u.q })))
        }
        Problem::Prec => {
            let p = prec(inst)?;
            let opts = PrecOptions { mode: spec.mode.into(), seed: spec.seed, repetitions: spec.repetitions };
            let s = solve_prec(p, eps, &opts)?;
            let base = match s.mode {
                PrecMode::Single => 2.0,
                PrecMode::UnitTheta => 1.0 + 2f64.sqrt(),
                PrecMode::UnitDet => 3.0,
                PrecMode::General => 6.0,
            };
            let f = &s.fractional;
            let details = json!({
                "mode": s.mode,
                "theta": s.theta,
                "fractional_value": f.value,
                "fractional_completion": f.completion,
                "max_load": f.max_load,
                "volume_ratio": f.volume_ratio,
            });
            Ok(Solved {
                solution: Solution::Schedule(s.schedule),
                value: s.value,
                guess: None,
                lp: LpReport {
                    guesses: 1,
                    vars: f.vars,
                    rows: f.rows,
                    nonzeros: f.nonzeros,
                    iterations: f.iterations as u64,
                },
                bound: base + 3.0 * eps,
                details,
            })
        }
    }
}

/// Brute-force optimum, or `None` when the instance exceeds the oracle caps.
pub fn oracle(inst: &Instance, spec: &SolveSpec, caps: PrecOracleCaps) -> Result<Option<ObjectiveValue>> {
    let out = match spec.problem {
        Problem::Prec => brute_force_prec(prec(inst)?, caps).map(|(_, v)| v),
        _ => {
            let objective = objective_for(inst, spec)?;
            let u = match objective {
                Objective::Lq(_) => lq_instance(unrelated(inst, spec.problem)?, spec.q)?,
                _ => unrelated(inst, spec.problem)?.clone(),
            };
            brute_force_unrelated(&u, objective, caps.jobs).map(|(_, v)| v)
        }
    };
    match out {
        Ok(v) => Ok(Some(v)),
        Err(Error::Cap(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Re-evaluates a solution from scratch.
pub fn evaluate(inst: &Instance, solution: &Solution, objective: Objective) -> Result<ObjectiveValue> {
    match (inst, solution) {
        (Instance::Unrelated(u), Solution::Assignment(a)) => u.evaluate(a, objective),
        (Instance::Prec(p), Solution::Schedule(s)) => p.evaluate(s),
        (Instance::Unrelated(_), Solution::Schedule(_)) => {
            Err(Error::Validation("an unrelated instance needs an assignment, not completion times".into()))
        }
        (Instance::Prec(_), Solution::Assignment(_)) => {
            Err(Error::Validation("a prec instance needs completion times, not an assignment".into()))
        }
    }
}
