//! Exact dynamic program over (unopened-subset, best-revealed-value) states.
//!
//! The Bellman recursion is
//!
//! ```text
//! V(S, b) = max { b,
//!                 max_{i in S} E[v_i],                          (take unopened)
//!                 max_{i in S} -c_i + Σ_v Pr[v]·V(S\{i}, max(b, v)) }
//! ```
//!
//! with argmax ties broken by action order quit < take-unopened(lowest
//! index) < open(lowest index), so the table is deterministic and
//! regression-testable.  The classic variant simply drops the take-unopened
//! branch, and must then equal `E[max(0, max κ)]` exactly.
//!
//! Keying on the best value alone is sound because values are independent
//! and only the running maximum matters to any continuation.

use std::collections::HashMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::instance::PnoiInstance;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("instance has {n} boxes, over the limit of {limit} for exhaustive solving")]
pub struct SizeError {
    pub n: usize,
    pub limit: usize,
}

/// Limits for exhaustive solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolveLimits {
    /// Max boxes for the subset DP (2^n × support states).
    pub dp_boxes: usize,
    /// Max boxes for ordered-subset policy search.
    pub search_boxes: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            dp_boxes: 14,
            search_boxes: 6,
        }
    }
}

/// Action recorded at a DP state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpAction {
    /// Stop and keep the best revealed value (0 if none).
    Quit,
    /// Take box `i` (0-based) without opening it and stop.
    TakeUnopened(usize),
    /// Open box `i` (0-based).
    Open(usize),
}

impl Serialize for DpAction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DpAction::Quit => s.serialize_str("quit"),
            DpAction::TakeUnopened(i) => {
                let mut m = s.serialize_struct("a", 1)?;
                m.serialize_field("take-unopened", &(i + 1))?;
                m.end()
            }
            DpAction::Open(i) => {
                let mut m = s.serialize_struct("a", 1)?;
                m.serialize_field("open", &(i + 1))?;
                m.end()
            }
        }
    }
}

/// Memoized value-to-go map: (unopened mask, best value) → (value, action).
#[derive(Debug, Clone)]
pub struct ValueTable {
    n: usize,
    entries: HashMap<(u32, Scalar), (Scalar, DpAction)>,
}

/// One exported row; `unopened` holds 1-based box indices.
#[derive(Debug, Clone, Serialize)]
pub struct ValueTableRow {
    pub unopened: Vec<usize>,
    pub best: Scalar,
    pub value: Scalar,
    pub action: DpAction,
}

impl ValueTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, mask: u32, best: &Scalar) -> Option<&(Scalar, DpAction)> {
        self.entries.get(&(mask, best.clone()))
    }

    /// Rows sorted by (mask, best) for byte-stable output.
    pub fn rows(&self) -> Vec<ValueTableRow> {
        let mut keys: Vec<&(u32, Scalar)> = self.entries.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|key| {
                let (value, action) = &self.entries[key];
                ValueTableRow {
                    unopened: (0..self.n).filter(|i| key.0 & (1 << i) != 0).map(|i| i + 1).collect(),
                    best: key.1.clone(),
                    value: value.clone(),
                    action: *action,
                }
            })
            .collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.rows()).expect("serializable")
    }
}

/// Optimal expected payoff with non-obligatory inspection, plus the table.
pub fn optimal_value(inst: &PnoiInstance) -> Result<(Scalar, ValueTable), SizeError> {
    optimal_value_with(inst, SolveLimits::default())
}

pub fn optimal_value_with(
    inst: &PnoiInstance,
    limits: SolveLimits,
) -> Result<(Scalar, ValueTable), SizeError> {
    solve(inst, limits.dp_boxes, true)
}

/// Optimal expected payoff when every selected box must be opened first.
/// Equals `max_kappa_expectation` exactly; asserting that equality is the
/// executable form of the index-policy optimality theorem.
pub fn classic_optimal_value(inst: &PnoiInstance) -> Result<Scalar, SizeError> {
    solve(inst, SolveLimits::default().dp_boxes, false).map(|(v, _)| v)
}

fn solve(
    inst: &PnoiInstance,
    limit: usize,
    allow_take_unopened: bool,
) -> Result<(Scalar, ValueTable), SizeError> {
    let n = inst.n();
    if n > limit {
        return Err(SizeError { n, limit });
    }
    let mut table = ValueTable {
        n,
        entries: HashMap::new(),
    };
    let full: u32 = (1u32 << n) - 1;
    let root = visit(inst, full, &Scalar::zero(), allow_take_unopened, &mut table);
    Ok((root, table))
}

fn visit(
    inst: &PnoiInstance,
    mask: u32,
    best: &Scalar,
    allow_take: bool,
    table: &mut ValueTable,
) -> Scalar {
    let key = (mask, best.clone());
    if let Some((v, _)) = table.entries.get(&key) {
        return v.clone();
    }
    // Candidates in tie-break order; a later candidate must be strictly
    // better to displace an earlier one.
    let mut value = best.clone();
    let mut action = DpAction::Quit;
    for i in 0..inst.n() {
        if mask & (1 << i) == 0 {
            continue;
        }
        if allow_take {
            let take = inst.box_at(i).dist().expected_value();
            if take > value {
                value = take;
                action = DpAction::TakeUnopened(i);
            }
        }
    }
    for i in 0..inst.n() {
        if mask & (1 << i) == 0 {
            continue;
        }
        let pbox = inst.box_at(i);
        let mut open = -pbox.cost();
        for (v, p) in pbox.dist().iter() {
            let next_best = if v > best { v } else { best };
            let cont = visit(inst, mask & !(1 << i), next_best, allow_take, table);
            open += &(p * &cont);
        }
        if open > value {
            value = open;
            action = DpAction::Open(i);
        }
    }
    table.entries.insert(key, (value.clone(), action));
    value
}
