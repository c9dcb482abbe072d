use super::{check_eps, guess_grid, search_guesses, solve_and_rescale, LpStats, Rounding, UnrelatedSolution};
use crate::error::Result;
use crate::matching::round_by_grouping;
use crate::model::{Assignment, Objective, UnrelatedInstance};
use crate::mpc::MpcProblem;

/// Minimizes the makespan within `2+O(ε)` of the optimum.
///
/// Guesses `P` come from a geometric grid between a volume lower bound and the
/// greedy min-p makespan; grid ratio, LP accuracy and grouping slack all use
/// `ε/3`, so the accepted guess is below `(1+ε/3)·OPT` and the rounded load at
/// most `(1+ε/3)³P + P`.
pub fn solve_makespan(inst: &UnrelatedInstance, eps: f64) -> Result<UnrelatedSolution> {
    check_eps(eps)?;
    inst.validate()?;
    let delta = eps / 3.0;
    let greedy = inst.greedy_min_p();
    let ub = inst.evaluate(&greedy, Objective::Makespan)?.value;
    let adj = inst.job_adjacency();
    let min_p: Vec<f64> = adj.iter().map(|a| a.iter().map(|&(_, p)| p).min().unwrap_or(0) as f64).collect();
    let lb = min_p.iter().copied().fold(0.0, f64::max).max(min_p.iter().sum::<f64>() / inst.n_machines as f64);
    let guesses = guess_grid(ub, lb, delta);

    let mut stats = LpStats::default();
    let (k, (assignment, vars, rows, nonzeros)) = search_guesses(&guesses, |p| attempt(inst, p, delta, &mut stats))?;
    stats.vars = vars;
    stats.rows = rows;
    stats.nonzeros = nonzeros;
    let value = inst.evaluate(&assignment, Objective::Makespan)?;
    Ok(UnrelatedSolution {
        assignment,
        value,
        guess: guesses[k],
        lp: stats,
        rounding: Rounding::Grouping,
        fractional_cost: None,
        rounding_cost: None,
        t_value: None,
        audit_flagged: false,
    })
}

type Attempt = (Assignment, usize, usize, usize);

fn attempt(inst: &UnrelatedInstance, p_guess: f64, delta: f64, stats: &mut LpStats) -> Result<Option<Attempt>> {
    // Columns are the edges with p ≤ P.
    let cols: Vec<usize> = (0..inst.edges.len()).filter(|&k| inst.edges[k].p as f64 <= p_guess).collect();
    let mut job_vars = vec![Vec::new(); inst.n_jobs];
    let mut machine_rows = vec![Vec::new(); inst.n_machines];
    for (c, &k) in cols.iter().enumerate() {
        let e = inst.edges[k];
        job_vars[e.job].push(c);
        machine_rows[e.machine].push((c, e.p as f64 / p_guess));
    }
    if job_vars.iter().any(|v| v.is_empty()) {
        return Ok(None);
    }
    let problem = MpcProblem {
        n_vars: cols.len(),
        packing: machine_rows.into_iter().filter(|r| !r.is_empty()).collect(),
        covering: job_vars.iter().map(|v| v.iter().map(|&c| (c, 1.0)).collect()).collect(),
    };
    let Some(lp) = solve_and_rescale(&problem, &job_vars, delta, stats)? else {
        return Ok(None);
    };
    let mut x = vec![0.0; inst.edges.len()];
    for (c, &k) in cols.iter().enumerate() {
        x[k] = lp.x[c];
    }
    let g = round_by_grouping(inst, &x, delta)?;
    Ok(Some((g.assignment, cols.len(), lp.rows, lp.nonzeros)))
}
