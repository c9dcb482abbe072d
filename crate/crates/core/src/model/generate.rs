use super::{Edge, Instance, PrecInstance, UnrelatedInstance};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    UnrelatedDense,
    UnrelatedSparse,
    RestrictedAssignment,
    PrecChain,
    PrecRandomDag,
    PrecUnit,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Ok(match s {
            "unrelated_dense" => Family::UnrelatedDense,
            "unrelated_sparse" => Family::UnrelatedSparse,
            "restricted_assignment" => Family::RestrictedAssignment,
            "prec_chain" => Family::PrecChain,
            "prec_random_dag" => Family::PrecRandomDag,
            "prec_unit" => Family::PrecUnit,
            other => return Err(Error::Argument(format!("unknown family {other:?}"))),
        })
    }
}

/// Generator knobs. `density` is the edge probability for sparse and restricted
/// families and the arc probability for precedence families.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub m: usize,
    pub p_max: u64,
    pub w_max: u64,
    pub density: f64,
    /// Caps the number of precedence arcs; extra arcs are dropped.
    pub max_arcs: Option<usize>,
    pub q: Option<f64>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { n: 6, m: 2, p_max: 10, w_max: 10, density: 0.5, max_arcs: None, q: None }
    }
}

pub fn generate(seed: u64, family: Family, params: &GenParams) -> Result<Instance> {
    let GenParams { n, m, p_max, w_max, density, .. } = *params;
    if m == 0 {
        return Err(Error::Argument("machine count must be >= 1".into()));
    }
    if p_max == 0 || w_max == 0 {
        return Err(Error::Argument("p_max and w_max must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Argument(format!("density {density} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = match family {
        Family::UnrelatedDense | Family::UnrelatedSparse | Family::RestrictedAssignment => {
            let mut edges = Vec::new();
            for j in 0..n {
                let mut machines: Vec<usize> = match family {
                    Family::UnrelatedDense => (0..m).collect(),
                    _ => (0..m).filter(|_| rng.gen_bool(density)).collect(),
                };
                if machines.is_empty() {
                    machines.push(rng.gen_range(0..m));
                }
                let own = rng.gen_range(1..=p_max);
                for i in machines {
                    let p = if family == Family::RestrictedAssignment { own } else { rng.gen_range(1..=p_max) };
                    edges.push(Edge { job: j, machine: i, p });
                }
            }
            let weights = (0..n).map(|_| rng.gen_range(1..=w_max)).collect();
            Instance::Unrelated(UnrelatedInstance {
                n_jobs: n,
                n_machines: m,
                edges,
                weights: Some(weights),
                q: params.q,
            })
        }
        Family::PrecChain | Family::PrecRandomDag | Family::PrecUnit => {
            let sizes: Vec<u64> =
                (0..n).map(|_| if family == Family::PrecUnit { 1 } else { rng.gen_range(1..=p_max) }).collect();
            let weights = (0..n).map(|_| rng.gen_range(1..=w_max)).collect();
            let mut prec = Vec::new();
            if family == Family::PrecChain {
                // Disjoint chains: consecutive jobs linked with probability `density`.
                for j in 1..n {
                    if rng.gen_bool(density) {
                        prec.push((j - 1, j));
                    }
                }
            } else {
                for a in 0..n {
                    for b in a + 1..n {
                        if rng.gen_bool(density) {
                            prec.push((a, b));
                        }
                    }
                }
            }
            if let Some(cap) = params.max_arcs {
                prec.truncate(cap);
            }
            Instance::Prec(PrecInstance { n_jobs: n, sizes, weights, m, prec })
        }
    };
    Ok(inst)
}
