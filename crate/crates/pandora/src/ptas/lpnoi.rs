//! The rounded-state decision process and its exact solver.
//!
//! After large-value discretization, the process keeps paying *raw*
//! marginals — opening box `i` at state `I` yields `max(I, v_i) - I - c_i`
//! — but the successor state is rounded up to a discretization point:
//! `f(I, open i) = roundup(max(I, v_i))`.  Taking a box unopened pays
//! `E[v_i] - I` and ends the process, as does the bare end action (payoff
//! 0).  Overestimating only what one already *has* makes the rounded
//! optimum a lower bound on the true one, and executing any rounded-state
//! policy on the raw instance can only gain payoff back.
//!
//! At desk scale the rounded process is solved exactly by the same
//! subset/state recursion as the raw oracle, skipping actions with strictly
//! negative expected marginal payoff (an optimal policy never needs one).

use std::collections::HashMap;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact::SizeError;
use crate::index::compute_index;
use crate::instance::PnoiInstance;
use crate::ptas::discretize::{DiscretizeError, LargePoints};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpnoiError {
    #[error(transparent)]
    Size(#[from] SizeError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error("policy has no action for state (unopened {mask:#b}, state {state})")]
    MissingState { mask: u32, state: Scalar },
    #[error("state {0} is not a large discretization point")]
    NotAPoint(Scalar),
    #[error("instance has {got} boxes, the rounded process has {expected}")]
    BoxCountMismatch { got: usize, expected: usize },
}

/// A base instance together with its large-value rounding.
#[derive(Debug, Clone)]
pub struct LpnoiInstance {
    base: PnoiInstance,
    points: LargePoints,
}

/// Build the rounded-state view of `inst`.  Requires every value to be
/// at most the top discretization point.
pub fn build_lpnoi(inst: PnoiInstance, points: LargePoints) -> Result<LpnoiInstance, LpnoiError> {
    let max_v = inst.max_value();
    if &max_v > points.top() {
        return Err(LpnoiError::Discretize(DiscretizeError::AboveTop {
            value: max_v,
            top: points.top().clone(),
        }));
    }
    Ok(LpnoiInstance { base: inst, points })
}

impl LpnoiInstance {
    pub fn base(&self) -> &PnoiInstance {
        &self.base
    }

    pub fn points(&self) -> &LargePoints {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Successor state for opening box `i` on revealed value `v`.
    pub fn next_state(&self, state: &Scalar, v: &Scalar) -> Scalar {
        let raised = if v > state { v.clone() } else { state.clone() };
        self.points.round_up(&raised).expect("values under the top point")
    }

    /// `E[G(I, open i)] = E[(v_i - I)_+] - c_i`, the expected raw marginal.
    pub fn open_marginal(&self, state: &Scalar, i: usize) -> Scalar {
        self.base.box_at(i).dist().expected_excess(state) - self.base.box_at(i).cost()
    }
}

/// Action prescribed at an (unopened-set, state) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsdpAction {
    /// Stop; the accumulated marginals are the payoff.
    End,
    /// Take box `i` unopened and stop.
    Take(usize),
    /// Open box `i`.
    Open(usize),
}

impl Serialize for SsdpAction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SsdpAction::End => s.serialize_str("end"),
            SsdpAction::Take(i) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("take-unopened", &(i + 1))?;
                m.end()
            }
            SsdpAction::Open(i) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("open", &(i + 1))?;
                m.end()
            }
        }
    }
}

/// A total map from reachable (unopened-set, state) pairs to actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsdpPolicy {
    n: usize,
    actions: HashMap<(u32, Scalar), SsdpAction>,
}

#[derive(Serialize)]
struct PolicyRow<'a> {
    unopened: Vec<usize>,
    state: &'a Scalar,
    action: &'a SsdpAction,
}

impl SsdpPolicy {
    pub fn get(&self, mask: u32, state: &Scalar) -> Option<SsdpAction> {
        self.actions.get(&(mask, state.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Rows sorted by (mask, state) for stable output.
    pub fn to_json_string(&self) -> String {
        let mut keys: Vec<&(u32, Scalar)> = self.actions.keys().collect();
        keys.sort();
        let rows: Vec<PolicyRow> = keys
            .into_iter()
            .map(|key| PolicyRow {
                unopened: (0..self.n)
                    .filter(|i| key.0 & (1 << i) != 0)
                    .map(|i| i + 1)
                    .collect(),
                state: &key.1,
                action: &self.actions[key],
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("serializable")
    }
}

/// Exact optimum of the rounded process from (all boxes, state 0), with the
/// argmax policy over every reachable state.  Ties break end < take(lowest)
/// < open(lowest).
pub fn solve_ssdp_exact(lp: &LpnoiInstance) -> Result<(Scalar, SsdpPolicy), LpnoiError> {
    let n = lp.n();
    let limit = crate::exact::SolveLimits::default().dp_boxes;
    if n > limit {
        return Err(SizeError { n, limit }.into());
    }
    let mut policy = SsdpPolicy {
        n,
        actions: HashMap::new(),
    };
    let mut memo: HashMap<(u32, Scalar), Scalar> = HashMap::new();
    let full: u32 = (1u32 << n) - 1;
    let value = visit(lp, full, &Scalar::zero(), &mut memo, &mut policy);
    Ok((value, policy))
}

fn visit(
    lp: &LpnoiInstance,
    mask: u32,
    state: &Scalar,
    memo: &mut HashMap<(u32, Scalar), Scalar>,
    policy: &mut SsdpPolicy,
) -> Scalar {
    let key = (mask, state.clone());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let mut best = Scalar::zero();
    let mut action = SsdpAction::End;
    for i in 0..lp.n() {
        if mask & (1 << i) == 0 {
            continue;
        }
        let take = lp.base().box_at(i).dist().expected_value() - state;
        if take > best {
            best = take;
            action = SsdpAction::Take(i);
        }
    }
    for i in 0..lp.n() {
        if mask & (1 << i) == 0 {
            continue;
        }
        // an optimal policy never needs a negative-expected-marginal open
        if lp.open_marginal(state, i).is_negative() {
            continue;
        }
        let pbox = lp.base().box_at(i);
        let mut open = -pbox.cost();
        for (v, p) in pbox.dist().iter() {
            let gain = (v - state).positive_part();
            let next = lp.next_state(state, v);
            let cont = visit(lp, mask & !(1 << i), &next, memo, policy);
            open += &(p * (gain + cont));
        }
        if open > best {
            best = open;
            action = SsdpAction::Open(i);
        }
    }
    memo.insert(key.clone(), best.clone());
    policy.actions.insert(key, action);
    best
}

/// Expected marginal payoff of the quasi-index stage at a large state `v`:
/// open every box in `mask` whose expected marginal is positive, highest
/// index first (ties to the lower box), stopping once the state rises.
pub fn quasi_index_value(lp: &LpnoiInstance, mask: u32, v: &Scalar) -> Result<Scalar, LpnoiError> {
    if !lp.points.contains(v) {
        return Err(LpnoiError::NotAPoint(v.clone()));
    }
    let mut qualifying: Vec<usize> = (0..lp.n())
        .filter(|&i| mask & (1 << i) != 0 && lp.open_marginal(v, i).is_positive())
        .collect();
    let taus: Vec<Scalar> = lp.base.boxes().iter().map(compute_index).collect();
    qualifying.sort_by(|&a, &b| taus[b].cmp(&taus[a]).then(a.cmp(&b)));

    let mut total = Scalar::zero();
    let mut reach = Scalar::one();
    for &i in &qualifying {
        total += &(&reach * lp.open_marginal(v, i));
        reach *= &lp.base.box_at(i).dist().cdf(v);
    }
    Ok(total)
}

/// Execute `policy` on `inst`, driving its decisions with rounded states
/// while paying raw marginals.  `observe` maps a raw revealed value to the
/// value the policy sees (identity when `inst` is the process' own base;
/// the small-value grid floor when lifting across both discretizations).
pub fn lift_policy_with(
    lp: &LpnoiInstance,
    policy: &SsdpPolicy,
    inst: &PnoiInstance,
    observe: &dyn Fn(&Scalar) -> Scalar,
) -> Result<Scalar, LpnoiError> {
    if inst.n() != lp.n() {
        return Err(LpnoiError::BoxCountMismatch {
            got: inst.n(),
            expected: lp.n(),
        });
    }
    let full: u32 = (1u32 << lp.n()) - 1;
    let mut memo = HashMap::new();
    lift(
        lp,
        policy,
        inst,
        observe,
        full,
        &Scalar::zero(),
        &Scalar::zero(),
        &mut memo,
    )
}

/// Expected payoff of `policy` executed on the process' own base instance.
pub fn lift_policy(
    lp: &LpnoiInstance,
    policy: &SsdpPolicy,
    inst: &PnoiInstance,
) -> Result<Scalar, LpnoiError> {
    lift_policy_with(lp, policy, inst, &|v| v.clone())
}

#[allow(clippy::too_many_arguments)]
fn lift(
    lp: &LpnoiInstance,
    policy: &SsdpPolicy,
    inst: &PnoiInstance,
    observe: &dyn Fn(&Scalar) -> Scalar,
    mask: u32,
    policy_state: &Scalar,
    true_state: &Scalar,
    memo: &mut HashMap<(u32, Scalar, Scalar), Scalar>,
) -> Result<Scalar, LpnoiError> {
    let key = (mask, policy_state.clone(), true_state.clone());
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let action = policy
        .get(mask, policy_state)
        .ok_or_else(|| LpnoiError::MissingState {
            mask,
            state: policy_state.clone(),
        })?;
    let value = match action {
        SsdpAction::End => Scalar::zero(),
        SsdpAction::Take(i) => inst.box_at(i).dist().expected_value() - true_state,
        SsdpAction::Open(i) => {
            let pbox = inst.box_at(i);
            let mut acc = -pbox.cost();
            for (v, p) in pbox.dist().iter() {
                let gain = (v - true_state).positive_part();
                let seen = observe(v);
                let next_policy_state = lp.next_state(policy_state, &seen);
                let next_true = if v > true_state { v.clone() } else { true_state.clone() };
                let cont = lift(
                    lp,
                    policy,
                    inst,
                    observe,
                    mask & !(1 << i),
                    &next_policy_state,
                    &next_true,
                    memo,
                )?;
                acc += &(p * (gain + cont));
            }
            acc
        }
    };
    memo.insert(key, value.clone());
    Ok(value)
}
