//! Committed-prefix policies with per-box switch thresholds.
//!
//! A structured policy commits to an ordered list of boxes and opens them in
//! order.  Revealing a value at or above the box's threshold switches to the
//! index policy over everything still unopened, with the best value seen so
//! far as a free outside option.  Running off the end of the list takes the
//! final committed box unopened.  An empty commitment is the plain index
//! policy; a single commitment takes that box sight unseen.
//!
//! Optimal policies always have this shape, so exhausting over (ordered
//! subset, thresholds) recovers the optimum.  Thresholds only matter through
//! which support values trigger the switch, so candidates are each box's own
//! support values plus a "never" sentinel — a lossless restriction that makes
//! the search finite.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::dp::{SizeError, SolveLimits};
use crate::index::IndexContinuation;
use crate::instance::PnoiInstance;
use crate::scalar::Scalar;

/// Switch threshold for one committed box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Threshold {
    /// Switch on any revealed value `>=` this.
    At(Scalar),
    /// Never switch at this box.
    Never,
}

/// An ordered committed subset with thresholds for all but the last box.
/// `committed` holds 0-based indices; the JSON form is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredPolicy {
    pub committed: Vec<usize>,
    pub thresholds: Vec<Threshold>,
}

impl StructuredPolicy {
    /// The pure index policy: nothing committed.
    pub fn index_policy() -> Self {
        StructuredPolicy {
            committed: Vec::new(),
            thresholds: Vec::new(),
        }
    }

    pub fn is_index_policy(&self) -> bool {
        self.committed.is_empty()
    }

    pub fn validate(&self, inst: &PnoiInstance) -> Result<(), PolicyError> {
        let expected = self.committed.len().saturating_sub(1);
        if self.thresholds.len() != expected {
            return Err(PolicyError::ThresholdCount {
                got: self.thresholds.len(),
                expected,
            });
        }
        let mut seen = vec![false; inst.n()];
        for &i in &self.committed {
            if i >= inst.n() {
                return Err(PolicyError::BoxOutOfRange { index: i + 1, n: inst.n() });
            }
            if seen[i] {
                return Err(PolicyError::DuplicateBox { index: i + 1 });
            }
            seen[i] = true;
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RawStructuredPolicy::from(self)).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self, PolicyError> {
        let raw: RawStructuredPolicy =
            serde_json::from_str(s).map_err(|e| PolicyError::Json(e.to_string()))?;
        raw.try_into()
    }
}

/// JSON mirror: `{ "sigma": [1, 2], "thresholds": ["1"] }`, thresholds are
/// rational strings or the sentinel `"never"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawStructuredPolicy {
    sigma: Vec<usize>,
    thresholds: Vec<String>,
}

impl From<&StructuredPolicy> for RawStructuredPolicy {
    fn from(p: &StructuredPolicy) -> Self {
        RawStructuredPolicy {
            sigma: p.committed.iter().map(|i| i + 1).collect(),
            thresholds: p
                .thresholds
                .iter()
                .map(|t| match t {
                    Threshold::At(v) => v.to_string(),
                    Threshold::Never => "never".to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<RawStructuredPolicy> for StructuredPolicy {
    type Error = PolicyError;

    fn try_from(raw: RawStructuredPolicy) -> Result<Self, PolicyError> {
        let mut committed = Vec::with_capacity(raw.sigma.len());
        for i in raw.sigma {
            if i == 0 {
                return Err(PolicyError::BoxOutOfRange { index: 0, n: 0 });
            }
            committed.push(i - 1);
        }
        let thresholds = raw
            .thresholds
            .into_iter()
            .map(|s| {
                if s == "never" {
                    Ok(Threshold::Never)
                } else {
                    s.parse::<Scalar>()
                        .map(Threshold::At)
                        .map_err(|e| PolicyError::Json(e.to_string()))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(StructuredPolicy {
            committed,
            thresholds,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("box {index} committed twice")]
    DuplicateBox { index: usize },
    #[error("committed box {index} out of range for {n} boxes")]
    BoxOutOfRange { index: usize, n: usize },
    #[error("{got} thresholds for a policy that needs {expected}")]
    ThresholdCount { got: usize, expected: usize },
    #[error("malformed policy JSON: {0}")]
    Json(String),
}

/// Exact expected payoff of a structured policy.
pub fn evaluate_structured_policy(
    inst: &PnoiInstance,
    policy: &StructuredPolicy,
) -> Result<Scalar, PolicyError> {
    policy.validate(inst)?;
    let mut cont = IndexContinuation::new(inst);
    Ok(evaluate_inner(inst, policy, &mut cont))
}

fn evaluate_inner(
    inst: &PnoiInstance,
    policy: &StructuredPolicy,
    cont: &mut IndexContinuation,
) -> Scalar {
    let full: u32 = (1u32 << inst.n()) - 1;
    if policy.committed.is_empty() {
        return cont.value(full, &Scalar::zero());
    }
    // remaining_mask[k] = boxes unopened after the first k committed opens
    let mut remaining_mask = vec![full; policy.committed.len() + 1];
    for (k, &i) in policy.committed.iter().enumerate() {
        remaining_mask[k + 1] = remaining_mask[k] & !(1 << i);
    }
    let mut memo: HashMap<(usize, Scalar), Scalar> = HashMap::new();
    eval_from(inst, policy, cont, &remaining_mask, 0, Scalar::zero(), &mut memo)
}

fn eval_from(
    inst: &PnoiInstance,
    policy: &StructuredPolicy,
    cont: &mut IndexContinuation,
    remaining_mask: &[u32],
    pos: usize,
    best: Scalar,
    memo: &mut HashMap<(usize, Scalar), Scalar>,
) -> Scalar {
    let key = (pos, best.clone());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let i = policy.committed[pos];
    let value = if pos + 1 == policy.committed.len() {
        // out of thresholds: take the final committed box unopened
        inst.box_at(i).dist().expected_value()
    } else {
        let mut acc = -inst.box_at(i).cost();
        for (v, p) in inst.box_at(i).dist().iter() {
            let seen = best.clone().max(v.clone());
            let triggered = match &policy.thresholds[pos] {
                Threshold::At(t) => v >= t,
                Threshold::Never => false,
            };
            let branch = if triggered {
                cont.value(remaining_mask[pos + 1], &seen)
            } else {
                eval_from(inst, policy, cont, remaining_mask, pos + 1, seen, memo)
            };
            acc += &(p * &branch);
        }
        acc
    };
    memo.insert(key, value.clone());
    value
}

/// Exhaustive search over ordered subsets and support-valued thresholds.
///
/// The maximizer equals the optimal PNOI value exactly.  Ties go to the
/// first policy in enumeration order: subsets by depth-first extension in
/// ascending box index, thresholds position by position in ascending
/// support order with `never` last.
pub fn best_structured_policy(
    inst: &PnoiInstance,
) -> Result<(StructuredPolicy, Scalar), SizeError> {
    let limits = SolveLimits::default();
    if inst.n() > limits.search_boxes {
        return Err(SizeError {
            n: inst.n(),
            limit: limits.search_boxes,
        });
    }
    let mut cont = IndexContinuation::new(inst);
    let index_policy = StructuredPolicy::index_policy();
    let mut best_value = evaluate_inner(inst, &index_policy, &mut cont);
    let mut best_policy = index_policy;

    let mut committed = Vec::new();
    let mut used = vec![false; inst.n()];
    extend_sequence(
        inst,
        &mut cont,
        &mut committed,
        &mut used,
        &mut best_policy,
        &mut best_value,
    );
    Ok((best_policy, best_value))
}

fn extend_sequence(
    inst: &PnoiInstance,
    cont: &mut IndexContinuation,
    committed: &mut Vec<usize>,
    used: &mut [bool],
    best_policy: &mut StructuredPolicy,
    best_value: &mut Scalar,
) {
    for i in 0..inst.n() {
        if used[i] {
            continue;
        }
        used[i] = true;
        committed.push(i);
        let mut thresholds = Vec::with_capacity(committed.len().saturating_sub(1));
        enumerate_thresholds(
            inst,
            cont,
            committed,
            &mut thresholds,
            best_policy,
            best_value,
        );
        extend_sequence(inst, cont, committed, used, best_policy, best_value);
        committed.pop();
        used[i] = false;
    }
}

fn enumerate_thresholds(
    inst: &PnoiInstance,
    cont: &mut IndexContinuation,
    committed: &[usize],
    thresholds: &mut Vec<Threshold>,
    best_policy: &mut StructuredPolicy,
    best_value: &mut Scalar,
) {
    if thresholds.len() + 1 == committed.len() || committed.len() <= 1 {
        let policy = StructuredPolicy {
            committed: committed.to_vec(),
            thresholds: thresholds.clone(),
        };
        let value = evaluate_inner(inst, &policy, cont);
        if value > *best_value {
            *best_value = value;
            *best_policy = policy;
        }
        return;
    }
    let pos = thresholds.len();
    let box_index = committed[pos];
    let support: Vec<Scalar> = inst
        .box_at(box_index)
        .dist()
        .iter()
        .map(|(v, _)| v.clone())
        .collect();
    for v in support {
        thresholds.push(Threshold::At(v));
        enumerate_thresholds(inst, cont, committed, thresholds, best_policy, best_value);
        thresholds.pop();
    }
    thresholds.push(Threshold::Never);
    enumerate_thresholds(inst, cont, committed, thresholds, best_policy, best_value);
    thresholds.pop();
}
