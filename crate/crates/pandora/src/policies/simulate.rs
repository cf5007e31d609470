//! Reproducible Monte-Carlo simulation of the index policy.
//!
//! Randomness comes from a fixed, documented generator so that traces are
//! reproducible across implementations, runs, and thread counts: the draw
//! for (seed, trial, box) is
//!
//! ```text
//! u = mix(mix(mix(seed) ^ trial) ^ box) / 2^64
//! ```
//!
//! where `mix` is the SplitMix64 finalizer and `box` is the 1-based box
//! index.  `u` is treated as the exact rational `k / 2^64` and values are
//! sampled by inverse CDF over the sorted support, partitioning `[0, 1)`
//! into half-open intervals in support order.  Per-trial streams depend only
//! on (seed, trial index), so parallel scheduling cannot change results.
//!
//! The policy itself follows the descending-index rule: open the unopened
//! box with the largest positive index as long as that index exceeds every
//! revealed value; take the best revealed value once it comes out on top.
//! Equal indices break toward the lowest box index, and when a revealed
//! value ties the best remaining index the value is taken (continuing would
//! net exactly zero).

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::index::compute_index;
use crate::instance::PnoiInstance;
use crate::scalar::Scalar;

/// Deterministic simulation parameters: same seed, same traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimulationConfig {
    pub seed: u64,
    pub trials: u64,
}

/// One step of a simulated policy run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub action: TraceAction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub revealed: Option<Scalar>,
    pub running_cost: Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAction {
    /// Open box `i` (0-based internally, 1-based in JSON).
    Open(usize),
    /// Take the already-revealed value of box `i` and stop.
    TakeRevealed(usize),
    /// Take box `i` without opening it and stop.
    TakeUnopened(usize),
    /// Stop with nothing.
    Quit,
}

impl Serialize for TraceAction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            TraceAction::Quit => s.serialize_str("quit"),
            TraceAction::Open(i) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("open", &(i + 1))?;
                m.end()
            }
            TraceAction::TakeRevealed(i) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("take", &(i + 1))?;
                m.end()
            }
            TraceAction::TakeUnopened(i) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("take-unopened", &(i + 1))?;
                m.end()
            }
        }
    }
}

/// A full simulated run; `payoff` is the value taken minus all costs paid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolicyTrace {
    pub steps: Vec<TraceStep>,
    pub payoff: Scalar,
}

impl PolicyTrace {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    fn taken_box(&self) -> Option<(usize, bool)> {
        self.steps.last().and_then(|s| match s.action {
            TraceAction::TakeRevealed(i) => Some((i, true)),
            TraceAction::TakeUnopened(i) => Some((i, false)),
            _ => None,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace {trace} references box {index}, but the instance has {n}")]
    BoxOutOfRange { trace: usize, index: usize, n: usize },
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The exact uniform draw `k / 2^64` for (seed, trial, 1-based box).
fn unit_draw(seed: u64, trial: u64, box_index_1: u64) -> Scalar {
    let k = mix(mix(mix(seed) ^ trial) ^ box_index_1);
    Scalar::from_ratio(BigInt::from(k), BigInt::from(1u128 << 64))
}

/// Inverse-CDF sample over the sorted support via half-open intervals.
fn sample(dist: &crate::dist::DiscreteDistribution, u: &Scalar) -> Scalar {
    let mut cum = Scalar::zero();
    for (v, p) in dist.iter() {
        cum += p;
        if u < &cum {
            return v.clone();
        }
    }
    dist.max_value().clone()
}

/// Simulate the index policy for `cfg.trials` independent trials.
///
/// Trials run in parallel; output order and content depend only on
/// (instance, seed).
pub fn run_index_policy(inst: &PnoiInstance, cfg: &SimulationConfig) -> Vec<PolicyTrace> {
    let taus: Vec<Scalar> = inst.boxes().iter().map(compute_index).collect();
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let values: Vec<Scalar> = inst
                .boxes()
                .iter()
                .enumerate()
                .map(|(i, b)| sample(b.dist(), &unit_draw(cfg.seed, trial, i as u64 + 1)))
                .collect();
            simulate_one(inst, &taus, &values)
        })
        .collect()
}

fn simulate_one(inst: &PnoiInstance, taus: &[Scalar], values: &[Scalar]) -> PolicyTrace {
    let n = inst.n();
    let mut opened = vec![false; n];
    let mut steps = Vec::new();
    let mut running_cost = Scalar::zero();
    let mut best: Option<(usize, Scalar)> = None;

    loop {
        // largest positive unopened index, ties to the lowest box
        let cand = (0..n)
            .filter(|&i| !opened[i] && taus[i].is_positive())
            .max_by(|&a, &b| taus[a].cmp(&taus[b]).then(b.cmp(&a)));
        let best_is_positive = matches!(&best, Some((_, v)) if v.is_positive());

        let open_next = match (cand, best_is_positive) {
            (Some(i), true) => {
                let (_, v) = best.as_ref().expect("positive best");
                // a value that ties the top index wins: continuing nets zero
                if &taus[i] > v {
                    Some(i)
                } else {
                    None
                }
            }
            (Some(i), false) => Some(i),
            (None, _) => None,
        };

        let Some(i) = open_next else {
            if best_is_positive {
                let (i, v) = best.expect("positive best");
                steps.push(TraceStep {
                    action: TraceAction::TakeRevealed(i),
                    revealed: None,
                    running_cost: running_cost.clone(),
                });
                return PolicyTrace {
                    steps,
                    payoff: v - running_cost,
                };
            }
            // nothing positive anywhere: quit with nothing
            steps.push(TraceStep {
                action: TraceAction::Quit,
                revealed: None,
                running_cost: running_cost.clone(),
            });
            return PolicyTrace {
                steps,
                payoff: -running_cost,
            };
        };

        opened[i] = true;
        running_cost += inst.box_at(i).cost();
        let v = values[i].clone();
        steps.push(TraceStep {
            action: TraceAction::Open(i),
            revealed: Some(v.clone()),
            running_cost: running_cost.clone(),
        });
        if best.as_ref().map(|(_, b)| &v > b).unwrap_or(true) {
            best = Some((i, v));
        }
    }
}

/// True iff every opened box whose revealed value strictly exceeds its index
/// is the box finally taken, across all traces.  Vacuously true when empty.
pub fn check_non_exposed(traces: &[PolicyTrace], inst: &PnoiInstance) -> Result<bool, TraceError> {
    let taus: Vec<Scalar> = inst.boxes().iter().map(compute_index).collect();
    for (t, trace) in traces.iter().enumerate() {
        let taken = trace.taken_box();
        for step in &trace.steps {
            let TraceAction::Open(i) = step.action else {
                continue;
            };
            if i >= inst.n() {
                return Err(TraceError::BoxOutOfRange {
                    trace: t,
                    index: i + 1,
                    n: inst.n(),
                });
            }
            let Some(v) = &step.revealed else { continue };
            if v > &taus[i] && taken != Some((i, true)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Mean and standard error of trace payoffs.  The mean is exact; the
/// standard error involves a square root and is reported as a double.
#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub trials: u64,
    pub mean: Scalar,
    pub stderr: f64,
}

pub fn summarize_traces(traces: &[PolicyTrace]) -> TraceSummary {
    let n = traces.len() as u64;
    if n == 0 {
        return TraceSummary {
            trials: 0,
            mean: Scalar::zero(),
            stderr: 0.0,
        };
    }
    let count = Scalar::from(n);
    let mean: Scalar = traces.iter().map(|t| &t.payoff).sum::<Scalar>() / &count;
    let var: Scalar = traces
        .iter()
        .map(|t| {
            let d = &t.payoff - &mean;
            &d * &d
        })
        .sum::<Scalar>()
        / &count;
    TraceSummary {
        trials: n,
        mean,
        stderr: (var.to_f64() / n as f64).sqrt(),
    }
}
