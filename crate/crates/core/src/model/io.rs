//! JSON forms of instances and solutions.
//!
//! Numbers are read as signed integers first so that a negative size is a
//! validation error rather than a parse error.

use super::{Assignment, Edge, PrecInstance, Schedule, UnrelatedInstance};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Unrelated(UnrelatedInstance),
    Prec(PrecInstance),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Assignment(Assignment),
    Schedule(Schedule),
}

/// Flat form so that serde reports missing fields with a position.
#[derive(Serialize, Deserialize)]
struct RawInstance {
    kind: String,
    n_jobs: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_machines: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(i64, i64, i64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sizes: Option<Vec<i64>>,
    #[serde(default)]
    weights: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prec: Option<Vec<(i64, i64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawSolution {
    Assignment { assignment: Vec<usize> },
    Schedule { completion: Vec<u64> },
}

fn count(name: &str, v: i64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Validation(format!("{name} = {v} must be non-negative")))
}

fn positive(name: &str, v: i64) -> Result<u64> {
    if v < 1 {
        return Err(Error::Validation(format!("{name} = {v} must be a positive integer")));
    }
    Ok(v as u64)
}

fn non_negative(name: &str, v: i64) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::Validation(format!("{name} = {v} must be non-negative")))
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Instance> {
        let raw: RawInstance = serde_json::from_str(text)?;
        let missing = |f: &str| Error::Validation(format!("{} instance is missing \"{f}\"", raw.kind));
        let inst = match raw.kind.as_str() {
            "unrelated" => {
                let edges = raw
                    .edges
                    .clone()
                    .ok_or_else(|| missing("edges"))?
                    .into_iter()
                    .map(|(j, i, p)| {
                        Ok(Edge {
                            job: count("edge job", j)?,
                            machine: count("edge machine", i)?,
                            p: positive(&format!("p of edge ({j}, {i})"), p)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let weights = raw
                    .weights
                    .clone()
                    .map(|w| w.into_iter().map(|x| positive("weight", x)).collect::<Result<Vec<_>>>())
                    .transpose()?;
                let u = UnrelatedInstance {
                    n_jobs: count("n_jobs", raw.n_jobs)?,
                    n_machines: count("n_machines", raw.n_machines.ok_or_else(|| missing("n_machines"))?)?,
                    edges,
                    weights,
                    q: raw.q,
                };
                u.validate()?;
                Instance::Unrelated(u)
            }
            "prec" => {
                let p = PrecInstance {
                    n_jobs: count("n_jobs", raw.n_jobs)?,
                    m: count("m", raw.m.ok_or_else(|| missing("m"))?)?,
                    sizes: raw
                        .sizes
                        .clone()
                        .ok_or_else(|| missing("sizes"))?
                        .into_iter()
                        .map(|x| positive("size", x))
                        .collect::<Result<_>>()?,
                    weights: raw
                        .weights
                        .clone()
                        .ok_or_else(|| missing("weights"))?
                        .into_iter()
                        .map(|x| non_negative("weight", x))
                        .collect::<Result<_>>()?,
                    prec: raw
                        .prec
                        .clone()
                        .unwrap_or_default()
                        .into_iter()
                        .map(|(a, b)| Ok((count("prec job", a)?, count("prec job", b)?)))
                        .collect::<Result<_>>()?,
                };
                p.validate()?;
                Instance::Prec(p)
            }
            other => return Err(Error::Validation(format!("unknown instance kind {other:?}"))),
        };
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        let raw = match self {
            Instance::Unrelated(u) => RawInstance {
                kind: "unrelated".into(),
                n_jobs: u.n_jobs as i64,
                n_machines: Some(u.n_machines as i64),
                m: None,
                edges: Some(u.edges.iter().map(|e| (e.job as i64, e.machine as i64, e.p as i64)).collect()),
                sizes: None,
                weights: u.weights.as_ref().map(|w| w.iter().map(|&x| x as i64).collect()),
                prec: None,
                q: u.q,
            },
            Instance::Prec(p) => RawInstance {
                kind: "prec".into(),
                n_jobs: p.n_jobs as i64,
                n_machines: None,
                m: Some(p.m as i64),
                edges: None,
                sizes: Some(p.sizes.iter().map(|&x| x as i64).collect()),
                weights: Some(p.weights.iter().map(|&x| x as i64).collect()),
                prec: Some(p.prec.iter().map(|&(a, b)| (a as i64, b as i64)).collect()),
                q: None,
            },
        };
        serde_json::to_string(&raw).expect("instance serialization cannot fail")
    }
}

impl Solution {
    pub fn from_json(text: &str) -> Result<Solution> {
        let raw: RawSolution = serde_json::from_str(text)?;
        Ok(match raw {
            RawSolution::Assignment { assignment } => Solution::Assignment(Assignment { machine_of: assignment }),
            RawSolution::Schedule { completion } => Solution::Schedule(Schedule { completion }),
        })
    }

    pub fn to_json(&self) -> String {
        let raw = match self {
            Solution::Assignment(a) => RawSolution::Assignment { assignment: a.machine_of.clone() },
            Solution::Schedule(s) => RawSolution::Schedule { completion: s.completion.clone() },
        };
        serde_json::to_string(&raw).expect("solution serialization cannot fail")
    }

    /// The solution as a JSON value, for embedding in larger reports.
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json()).expect("round trip of own output")
    }
}
