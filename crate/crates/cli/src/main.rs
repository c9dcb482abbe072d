mod bench;
mod run;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use run::{Branch, Mode, Problem, SolveSpec};
use schedkit::flow::{exact_max_flow, max_flow_approx, normalize, FlowFile};
use schedkit::model::{generate, Family, GenParams, Instance, PrecOracleCaps, Solution};
use schedkit::Error;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Approximation algorithms for unrelated-machine and precedence-constrained scheduling.
#[derive(Parser)]
#[command(name = "schedkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print a run report.
    Solve(SolveArgs),
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Re-evaluate a solution against an instance.
    Verify(VerifyArgs),
    /// Approximate maximum flow on a DAG.
    Flow(FlowArgs),
    /// Ratio table against brute-force optima, as CSV.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long)]
    eps: f64,
    /// L_q exponent; overrides the instance's q.
    #[arg(long)]
    q: Option<f64>,
    /// Deterministic rounding for wct.
    #[arg(long)]
    det: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rounding mode for prec.
    #[arg(long, value_enum, default_value_t = Mode::General)]
    mode: Mode,
    /// θ draws for prec unit-theta.
    #[arg(long, default_value_t = 20)]
    repetitions: usize,
    /// Force an L_q rounding branch.
    #[arg(long, value_enum)]
    branch: Option<Branch>,
}

impl SolverFlags {
    fn spec(&self) -> SolveSpec {
        SolveSpec {
            problem: self.problem,
            eps: self.eps,
            q: self.q,
            det: self.det,
            seed: self.seed,
            mode: self.mode,
            repetitions: self.repetitions,
            branch: self.branch,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    solver: SolverFlags,
    input: PathBuf,
    /// Solution file; without it the solution is embedded in the report.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also compute the brute-force optimum when the instance is small enough.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args, Clone)]
struct GenFlags {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    p_max: u64,
    #[arg(long, default_value_t = 10)]
    w_max: u64,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long)]
    max_arcs: Option<usize>,
}

impl GenFlags {
    fn params(&self, q: Option<f64>) -> GenParams {
        GenParams {
            n: self.n,
            m: self.m,
            p_max: self.p_max,
            w_max: self.w_max,
            density: self.density,
            max_arcs: self.max_arcs,
            q,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// unrelated_dense, unrelated_sparse, restricted_assignment, prec_chain, prec_random_dag or prec_unit.
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    params: GenFlags,
    #[arg(long)]
    q: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    solution: PathBuf,
    /// Objective for unrelated instances; defaults to the `problem` recorded in the solution file.
    #[arg(long, value_enum)]
    problem: Option<Problem>,
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    eps: f64,
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also compute the exact maximum flow.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    solver: SolverFlags,
    /// Generator family; defaults by problem and mode.
    #[arg(long)]
    family: Option<String>,
    /// Half-open seed range `A..B`.
    #[arg(long, default_value = "0..20")]
    seeds: String,
    /// Comma-separated ε values; overrides --eps.
    #[arg(long, value_delimiter = ',')]
    eps_list: Vec<f64>,
    #[command(flatten)]
    params: GenFlags,
    /// Job cap of the brute-force oracles.
    #[arg(long, default_value_t = schedkit::model::DEFAULT_JOB_CAP)]
    oracle_jobs: usize,
    /// Total-size cap of the precedence oracle.
    #[arg(long, default_value_t = schedkit::model::DEFAULT_SIZE_CAP)]
    oracle_size: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

fn cmd_solve(args: &SolveArgs) -> anyhow::Result<()> {
    let spec = args.solver.spec();
    let inst = Instance::from_json(&read(&args.input)?)?;
    let start = Instant::now();
    let solved = run::solve(&inst, &spec)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let oracle = if args.oracle { run::oracle(&inst, &spec, PrecOracleCaps::default())? } else { None };

    let mut doc = solved.solution.to_value();
    doc["problem"] = json!(spec.problem.name());
    doc["eps"] = json!(spec.eps);
    doc["seed"] = json!(spec.seed);
    doc["objective"] = run::objective_json(&solved.value);
    doc["guess"] = json!(solved.guess);
    doc["lp"] = json!(solved.lp);

    let mut report = json!({
        "problem": spec.problem.name(),
        "eps": spec.eps,
        "seed": spec.seed,
        "guess": solved.guess,
        "objective": run::objective_json(&solved.value),
        "oracle": oracle.map(|o| o.value),
        "ratio": oracle.map(|o| solved.value.ratio_to(&o)),
        "bound": solved.bound,
        "wall_ms": wall_ms,
        "lp": solved.lp,
        "details": solved.details,
    });
    match &args.output {
        Some(p) => {
            write_or_print(Some(p), &pretty(&doc))?;
            report["solution_file"] = json!(p.display().to_string());
        }
        None => report["solution"] = doc,
    }
    write_or_print(args.report.as_deref(), &pretty(&report))
}

fn cmd_gen(args: &GenArgs) -> anyhow::Result<()> {
    let family: Family = args.family.parse()?;
    let inst = generate(args.seed, family, &args.params.params(args.q))?;
    write_or_print(args.output.as_deref(), &inst.to_json())
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<()> {
    let inst = Instance::from_json(&read(&args.instance)?)?;
    let text = read(&args.solution)?;
    let solution = Solution::from_json(&text)?;
    let raw: Value = serde_json::from_str(&text).map_err(Error::from)?;
    let recorded = raw.get("problem").and_then(Value::as_str);
    let problem = match (args.problem, &inst, recorded) {
        (Some(p), _, _) => p,
        (None, Instance::Prec(_), _) => Problem::Prec,
        (None, Instance::Unrelated(_), Some("cmax")) => Problem::Cmax,
        (None, Instance::Unrelated(_), Some("wct")) => Problem::Wct,
        (None, Instance::Unrelated(_), Some("lq")) => Problem::Lq,
        (None, Instance::Unrelated(_), _) => {
            return Err(Error::Argument("pass --problem: the solution file does not record one".into()).into())
        }
    };
    let q = args.q.or_else(|| raw.pointer("/objective/q").and_then(Value::as_f64));
    let spec =
        SolveSpec { problem, eps: 0.5, q, det: true, seed: 0, mode: Mode::General, repetitions: 1, branch: None };
    let value = run::evaluate(&inst, &solution, run::objective_for(&inst, &spec)?)?;
    let mut out = run::objective_json(&value);
    if let Some(claimed) = raw.pointer("/objective/value").and_then(Value::as_f64) {
        let ok = match (value.exact, raw.pointer("/objective/exact").and_then(Value::as_u64)) {
            (Some(a), Some(b)) => a == b as u128,
            _ => (claimed - value.value).abs() <= 1e-9 * value.value.abs().max(1.0),
        };
        out["claimed"] = json!(claimed);
        out["matches"] = json!(ok);
        if !ok {
            println!("{}", pretty(&out));
            return Err(Error::Validation(format!("claimed value {claimed} differs from {}", value.value)).into());
        }
    }
    println!("{}", pretty(&out));
    Ok(())
}

fn cmd_flow(args: &FlowArgs) -> anyhow::Result<()> {
    let file = FlowFile::from_json(&read(&args.input)?)?;
    if !(file.gamma >= 0.0 && file.gamma.is_finite()) {
        return Err(Error::Validation(format!("gamma = {} must be finite and >= 0", file.gamma)).into());
    }
    let mut net = file.network()?;
    for b in &mut net.demand {
        *b *= file.gamma;
    }
    let (inst, lift) = normalize(&net, 1.0)?;
    let start = Instant::now();
    let mf = max_flow_approx(&inst, args.eps)?;
    let mut out = json!({
        "eps": args.eps,
        "value": mf.value,
        "upper_bound": mf.upper_bound,
        "rounds": mf.rounds,
        "wall_ms": start.elapsed().as_secs_f64() * 1e3,
        "flow": lift.lift_flow(&mf.flow),
    });
    if args.exact {
        out["exact"] = json!(exact_max_flow(&inst));
    }
    write_or_print(args.output.as_deref(), &pretty(&out))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Validation(_) | Error::Argument(_)) | None => 1,
        Some(Error::Infeasible(_) | Error::Cap(_)) => 2,
        Some(Error::Invariant(_)) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Flow(a) => cmd_flow(a),
        Command::Bench(a) => bench::cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
