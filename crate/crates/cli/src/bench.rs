use crate::run::{self, Branch, Mode, Problem, SolveSpec};
use crate::{write_or_print, BenchArgs};
use schedkit::model::{generate, Family, PrecOracleCaps};
use schedkit::Error;
use std::fmt::Write;

pub const HEADER: &str = "seed,problem,eps,value,oracle,ratio,bound,pass";

fn seed_range(s: &str) -> Result<std::ops::Range<u64>, Error> {
    let bad = || Error::Argument(format!("seed range {s:?} is not of the form A..B"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    Ok(a.trim().parse().map_err(|_| bad())?..b.trim().parse().map_err(|_| bad())?)
}

fn default_family(spec: &SolveSpec) -> Family {
    match (spec.problem, spec.mode, spec.branch) {
        (Problem::Prec, Mode::UnitDet | Mode::UnitTheta, _) => Family::PrecUnit,
        (Problem::Prec, _, _) => Family::PrecRandomDag,
        (Problem::Lq, _, Some(Branch::Restricted)) => Family::RestrictedAssignment,
        _ => Family::UnrelatedDense,
    }
}

pub fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let base = args.solver.spec();
    let family = match &args.family {
        Some(f) => f.parse()?,
        None => default_family(&base),
    };
    let eps_list = if args.eps_list.is_empty() { vec![base.eps] } else { args.eps_list.clone() };
    let caps = PrecOracleCaps { jobs: args.oracle_jobs, total_size: args.oracle_size };
    let params = args.params.params(if base.problem == Problem::Lq { base.q } else { None });

    let mut csv = String::from(HEADER);
    for seed in seed_range(&args.seeds)? {
        let inst = generate(seed, family, &params)?;
        for &eps in &eps_list {
            let spec = SolveSpec { eps, seed, ..base };
            let solved = run::solve(&inst, &spec)?;
            let (oracle, ratio, pass) = match run::oracle(&inst, &spec, caps)? {
                Some(o) => {
                    let r = solved.value.ratio_to(&o);
                    (o.value.to_string(), format!("{r:.6}"), (r <= solved.bound + 1e-9).to_string())
                }
                None => ("NA".into(), "NA".into(), "NA".into()),
            };
            write!(
                csv,
                "\n{seed},{},{eps},{},{oracle},{ratio},{:.6},{pass}",
                spec.problem.name(),
                solved.value.value,
                solved.bound
            )
            .expect("writing to a String cannot fail");
        }
    }
    write_or_print(args.output.as_deref(), &csv)
}
