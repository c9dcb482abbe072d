use proptest::prelude::*;
use schedkit::matching::{match_expanding, round_by_grouping, ExpansionBipartite};
use schedkit::model::{
    brute_force_prec, brute_force_unrelated, generate, Assignment, Edge, Family, GenParams, Instance, Objective,
    PrecInstance, PrecOracleCaps, UnrelatedInstance,
};
use schedkit::mpc::{solve_mpc, MpcProblem, MpcStatus};
use schedkit::mwu::{solve_packing, MwuOptions, PackingProblem};
use schedkit::prec::{list_scheduling, list_scheduling_naive, solve_prec_lp};
use schedkit::unrelated::rho;

fn unrelated(max_n: usize, max_m: usize) -> impl Strategy<Value = UnrelatedInstance> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::option::weighted(0.7, 1u64..10), n * m),
            prop::collection::vec(1u64..8, n),
            prop::collection::vec(0..m, n),
        )
            .prop_map(move |(ps, w, fallback)| {
                let mut edges = Vec::new();
                for j in 0..n {
                    let before = edges.len();
                    for i in 0..m {
                        if let Some(p) = ps[j * m + i] {
                            edges.push(Edge { job: j, machine: i, p });
                        }
                    }
                    if edges.len() == before {
                        edges.push(Edge { job: j, machine: fallback[j], p: 1 + (w[j] % 5) });
                    }
                }
                UnrelatedInstance { n_jobs: n, n_machines: m, edges, weights: Some(w), q: None }
            })
    })
}

fn random_assignment(inst: &UnrelatedInstance, picks: &[usize]) -> Assignment {
    let adj = inst.job_adjacency();
    Assignment { machine_of: (0..inst.n_jobs).map(|j| adj[j][picks[j] % adj[j].len()].0).collect() }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn relabel_unrelated(inst: &UnrelatedInstance, perm: &[usize]) -> UnrelatedInstance {
    let mut weights = vec![0; inst.n_jobs];
    for j in 0..inst.n_jobs {
        weights[perm[j]] = inst.weight(j);
    }
    UnrelatedInstance {
        edges: inst.edges.iter().map(|e| Edge { job: perm[e.job], ..*e }).collect(),
        weights: Some(weights),
        ..inst.clone()
    }
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_completion_is_best_machine_order(
        inst in unrelated(6, 3),
        picks in prop::collection::vec(0usize..4, 6),
    ) {
        let a = random_assignment(&inst, &picks);
        let got = inst.evaluate(&a, Objective::WeightedCompletion).unwrap().exact.unwrap();
        let p_of = |j: usize| inst.edges.iter().find(|e| e.job == j && e.machine == a.machine_of[j]).unwrap().p;
        let mut best = 0u128;
        for i in 0..inst.n_machines {
            let jobs: Vec<usize> = (0..inst.n_jobs).filter(|&j| a.machine_of[j] == i).collect();
            best += permutations(&jobs)
                .into_iter()
                .map(|order| {
                    let mut t = 0u128;
                    order.iter().map(|&j| { t += p_of(j) as u128; t * inst.weight(j) as u128 }).sum::<u128>()
                })
                .min()
                .unwrap_or(0);
        }
        prop_assert_eq!(got, best);
    }

    #[test]
    fn brute_force_ignores_job_labels(inst in unrelated(5, 3), seed in any::<u64>()) {
        let perm = {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut p: Vec<usize> = (0..inst.n_jobs).collect();
            p.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            p
        };
        let other = relabel_unrelated(&inst, &perm);
        for obj in [Objective::Makespan, Objective::WeightedCompletion, Objective::Lq(2.0)] {
            let a = brute_force_unrelated(&inst, obj, 8).unwrap().1;
            let b = brute_force_unrelated(&other, obj, 8).unwrap().1;
            prop_assert!((a.value - b.value).abs() <= 1e-9 * a.value.max(1.0));
        }
    }

    #[test]
    fn prec_brute_force_ignores_job_labels(seed in 0u64..500, perm in permutation(5)) {
        let params = GenParams { n: 5, m: 2, p_max: 4, ..GenParams::default() };
        let Instance::Prec(inst) = generate(seed, Family::PrecRandomDag, &params).unwrap() else { unreachable!() };
        let mut sizes = vec![0; 5];
        let mut weights = vec![0; 5];
        for j in 0..5 {
            sizes[perm[j]] = inst.sizes[j];
            weights[perm[j]] = inst.weights[j];
        }
        let other = PrecInstance {
            sizes,
            weights,
            prec: inst.prec.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
            ..inst.clone()
        };
        let a = brute_force_prec(&inst, PrecOracleCaps::default()).unwrap().1;
        let b = brute_force_prec(&other, PrecOracleCaps::default()).unwrap().1;
        prop_assert_eq!(a.exact, b.exact);
    }

    #[test]
    fn generator_is_deterministic(seed in any::<u64>(), n in 1usize..10, m in 1usize..4, fam in 0usize..6) {
        let family = [
            Family::UnrelatedDense,
            Family::UnrelatedSparse,
            Family::RestrictedAssignment,
            Family::PrecChain,
            Family::PrecRandomDag,
            Family::PrecUnit,
        ][fam];
        let params = GenParams { n, m, ..GenParams::default() };
        prop_assert_eq!(generate(seed, family, &params).unwrap().to_json(), generate(seed, family, &params).unwrap().to_json());
    }

    #[test]
    fn rho_is_monotone_in_theta(p in 0.0f64..20.0, extra in 0.0f64..20.0, t1 in 0.001f64..50.0, dt in 0.0f64..50.0) {
        let c = p + extra;
        let a = rho(p, c, t1).unwrap();
        let b = rho(p, c, t1 + dt).unwrap();
        prop_assert!(a <= b);
        prop_assert!((0.0..=p).contains(&a));
    }

    #[test]
    fn list_schedules_are_valid_and_match_the_reference(seed in 0u64..10_000, n in 1usize..10, m in 1usize..4, fs in prop::collection::vec(0u8..4, 10)) {
        let params = GenParams { n, m, p_max: 5, ..GenParams::default() };
        let Instance::Prec(inst) = generate(seed, Family::PrecRandomDag, &params).unwrap() else { unreachable!() };
        let preds = inst.predecessors();
        let mut f = vec![0.0; n];
        for j in inst.topological_order().unwrap() {
            f[j] = preds[j].iter().map(|&k| f[k]).fold(0.0, f64::max) + fs[j] as f64;
        }
        let s = list_scheduling(&inst, &f).unwrap();
        inst.check_schedule(&s).unwrap();
        let (naive, profile) = list_scheduling_naive(&inst, &f).unwrap();
        prop_assert_eq!(&s, &naive);
        for (pr, &c) in profile.iter().zip(&s.completion) {
            prop_assert_eq!(pr.busy + pr.idle, c);
        }
    }
}

/// A system whose packing and covering rows are built around a planted point.
fn planted_system(n: usize, coeffs: &[u8], rows: usize, slack: f64) -> (MpcProblem, MpcProblem) {
    let x: Vec<f64> = (0..n).map(|k| 0.2 + (coeffs[k] % 5) as f64 * 0.2).collect();
    let mut packing = Vec::new();
    let mut covering = Vec::new();
    let mut scaled_packing = Vec::new();
    let mut scaled_covering = Vec::new();
    for r in 0..rows {
        let row: Vec<(usize, f64)> = (0..n)
            .filter(|&k| !coeffs[(r * 7 + k * 3) % coeffs.len()].is_multiple_of(3))
            .map(|k| (k, 1.0 + coeffs[(r + k) % coeffs.len()] as f64))
            .collect();
        if row.is_empty() {
            continue;
        }
        let act: f64 = row.iter().map(|&(k, v)| v * x[k]).sum();
        let scale = 1.0 + r as f64;
        if r % 2 == 0 {
            packing.push(row.iter().map(|&(k, v)| (k, v / (act * slack))).collect());
            // Same row with the constraint multiplied by `scale` before folding the right-hand side.
            scaled_packing.push(row.iter().map(|&(k, v)| (k, v * scale / (act * slack * scale))).collect());
        } else {
            covering.push(row.iter().map(|&(k, v)| (k, v * slack / act)).collect());
            scaled_covering.push(row.iter().map(|&(k, v)| (k, v * scale * slack / (act * scale))).collect());
        }
    }
    (
        MpcProblem { n_vars: n, packing, covering },
        MpcProblem { n_vars: n, packing: scaled_packing, covering: scaled_covering },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mpc_row_scaling_keeps_the_feasible_set(n in 1usize..8, coeffs in prop::collection::vec(0u8..9, 24), rows in 1usize..8) {
        let eps = 0.2;
        let (a, b) = planted_system(n, &coeffs, rows, 1.5);
        let ra = solve_mpc(&a, eps).unwrap();
        let rb = solve_mpc(&b, eps).unwrap();
        prop_assert_eq!(ra.status, MpcStatus::Solved);
        prop_assert_eq!(rb.status, MpcStatus::Solved);
        // Each solution is checked against the other normalization too.
        prop_assert!(a.activity(&rb.x).within(eps, 1e-9));
        prop_assert!(b.activity(&ra.x).within(eps, 1e-9));
    }

    #[test]
    fn mpc_larger_eps_stays_solved(n in 1usize..8, coeffs in prop::collection::vec(0u8..9, 24), rows in 1usize..8) {
        let (a, _) = planted_system(n, &coeffs, rows, 1.0);
        for (lo, hi) in [(0.1, 0.2), (0.2, 0.4)] {
            if solve_mpc(&a, lo).unwrap().status == MpcStatus::Solved {
                prop_assert_eq!(solve_mpc(&a, hi).unwrap().status, MpcStatus::Solved);
            }
        }
    }

    #[test]
    fn mwu_reaches_t_one_within_load(n in 1usize..8, coeffs in prop::collection::vec(1u8..9, 40), rows in 1usize..6, eps in 0.1f64..0.5) {
        let p: Vec<Vec<(usize, f64)>> = (0..rows)
            .map(|r| (0..n).map(|k| (k, coeffs[(r * n + k) % coeffs.len()] as f64 / (2.0 * n as f64))).collect())
            .collect();
        let a: Vec<f64> = (0..n).map(|k| coeffs[(k * 5 + 1) % coeffs.len()] as f64).collect();
        let problem = PackingProblem { n_vars: n, p, a: a.clone() };
        // Exact oracle over the box [0,1]^n: fractional knapsack by a/b.
        let mut oracle = |b: &[f64], _eps: f64, _phi: f64| {
            let mut order: Vec<usize> = (0..b.len()).collect();
            order.sort_by(|&i, &j| (a[j] * b[i]).partial_cmp(&(a[i] * b[j])).unwrap());
            let mut y = vec![0.0; b.len()];
            let mut room = 1.0;
            for k in order {
                if b[k] <= 0.0 {
                    y[k] = 1.0;
                } else if room > 0.0 {
                    y[k] = (room / b[k]).min(1.0);
                    room -= y[k] * b[k];
                }
            }
            Ok(y)
        };
        let out = solve_packing(&problem, &mut oracle, eps, 0.1, &MwuOptions::default()).unwrap();
        prop_assert!(out.max_load <= (1.0 + eps).powi(2) + eps + 1e-9);
        prop_assert!(out.x.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn expanding_matchings_cover_when_possible(nl in 1usize..8, nr in 1usize..10, mask in prop::collection::vec(prop::bool::weighted(0.4), 80)) {
        let adj: Vec<Vec<usize>> = (0..nl).map(|u| (0..nr).filter(|&v| mask[u * 10 + v]).collect()).collect();
        let h = ExpansionBipartite { n_left: nl, n_right: nr, adj: adj.clone() };
        let coverable = covers(&adj, 0, &mut vec![false; nr]);
        match match_expanding(&h, 0.1) {
            Ok(m) => {
                let mut used = vec![false; nr];
                for (u, &v) in m.mate.iter().enumerate() {
                    prop_assert!(adj[u].contains(&v));
                    prop_assert!(!used[v]);
                    used[v] = true;
                }
            }
            Err(_) => prop_assert!(!coverable),
        }
    }

    #[test]
    fn grouping_graph_size(inst in unrelated(7, 3), raw in prop::collection::vec(0.0f64..1.0, 21), eps in 0.05f64..0.5) {
        let adj = inst.job_adjacency();
        let mut x = vec![0.0; inst.edges.len()];
        for j in 0..inst.n_jobs {
            let ks: Vec<usize> = (0..inst.edges.len()).filter(|&k| inst.edges[k].job == j).collect();
            let total: f64 = ks.iter().enumerate().map(|(t, _)| raw[(j * 3 + t) % raw.len()] + 0.01).sum();
            for (t, &k) in ks.iter().enumerate() {
                x[k] = (raw[(j * 3 + t) % raw.len()] + 0.01) / total;
            }
            debug_assert!(!adj[j].is_empty());
        }
        let g = round_by_grouping(&inst, &x, eps).unwrap();
        let bound = inst.edges.len() + ((1.0 + eps) * inst.n_jobs as f64).ceil() as usize + inst.n_machines;
        prop_assert!(g.h_edges <= bound);
    }
}

/// Brute force: can every left vertex from `u` on be matched to a distinct right vertex?
fn covers(adj: &[Vec<usize>], u: usize, used: &mut Vec<bool>) -> bool {
    if u == adj.len() {
        return true;
    }
    for &v in &adj[u] {
        if !used[v] {
            used[v] = true;
            let ok = covers(adj, u + 1, used);
            used[v] = false;
            if ok {
                return true;
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn prec_lp_is_near_the_optimum(seed in 0u64..1000, m in 1usize..3) {
        let eps = 0.2;
        let params = GenParams { n: 4, m, p_max: 4, w_max: 6, ..GenParams::default() };
        let Instance::Prec(inst) = generate(seed, Family::PrecRandomDag, &params).unwrap() else { unreachable!() };
        let frac = solve_prec_lp(&inst, eps).unwrap();
        let opt = brute_force_prec(&inst, PrecOracleCaps::default()).unwrap().1;
        let w: f64 = inst.weights.iter().map(|&w| w as f64).sum();
        prop_assert!(frac.value <= (1.0 + eps).powi(2) * opt.value + eps * w + 1e-9, "LP {} vs OPT {}", frac.value, opt.value);
    }
}
