//! Randomized verification suites.
//!
//! Each suite draws instances from the deterministic generators in
//! [`crate::gen`] and checks one family of exact identities or inequalities
//! against an independent oracle.  A failure reports the case index and the
//! offending instance as JSON, so any red run is reproducible from
//! (suite, seed, case).  The command-line `verify` subcommand and the
//! acceptance test suite both drive these.

use std::fmt;
use std::str::FromStr;

use crate::exact::{
    best_structured_policy, classic_optimal_value, optimal_value, DpAction, ValueTable,
};
use crate::gen::{
    random_instance, random_large_value_instance, random_lclrs3_instance, small_multisets,
    GenConfig,
};
use crate::index::max_kappa_expectation;
use crate::instance::PnoiInstance;
use crate::lclrs3::{
    best_permutation, evaluate_normal_policy, loss, partition_answer, permutations,
    reduce_partition,
};
use crate::ptas::{
    build_lpnoi, choose_theta, f_value, large_points, lift_policy, ptas_pipeline, s_discretize,
    solve_ssdp_exact, w_value,
};
use crate::scalar::Scalar;

/// The named verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// classic DP value = E[max(0, max κ)] exactly.
    IndexIdentity,
    /// best structured policy = optimal value exactly.
    Structure,
    /// best normal permutation = optimal value on LCLRS3 instances.
    Normal,
    /// the payoff identity holds for every permutation.
    Eq1,
    /// reduction answers match subset-sum brute force.
    Reduction,
    /// F >= W everywhere and W >= (1-ε)F above the threshold.
    Sandwich,
    /// grid-flooring inequalities and the threshold bracket.
    Discretization,
    /// lifted payoffs dominate rounded ones; end-to-end quality.
    Lift,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::IndexIdentity,
        Suite::Structure,
        Suite::Normal,
        Suite::Eq1,
        Suite::Reduction,
        Suite::Sandwich,
        Suite::Discretization,
        Suite::Lift,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::IndexIdentity => "index-identity",
            Suite::Structure => "structure",
            Suite::Normal => "normal",
            Suite::Eq1 => "eq1",
            Suite::Reduction => "reduction",
            Suite::Sandwich => "sandwich",
            Suite::Discretization => "discretization",
            Suite::Lift => "lift",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSuite(pub String);

impl fmt::Display for UnknownSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown suite `{}`", self.0)
    }
}

impl std::error::Error for UnknownSuite {}

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .iter()
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

/// One failed case.
#[derive(Debug, Clone)]
pub struct Failure {
    pub case: u64,
    pub message: String,
    pub instance_json: Option<String>,
}

/// Outcome of running a suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases_run: u64,
    pub failures: Vec<Failure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Run `cases` randomized checks of `suite` at `seed`.
pub fn run_suite(suite: Suite, seed: u64, cases: u64) -> SuiteReport {
    let mut failures = Vec::new();
    let mut check = |case: u64, inst: Option<&PnoiInstance>, result: Result<(), String>| {
        if let Err(message) = result {
            failures.push(Failure {
                case,
                message,
                instance_json: inst.map(|i| i.to_json_string()),
            });
        }
    };
    let mut cases_run = 0;
    match suite {
        Suite::IndexIdentity => {
            let cfg = GenConfig::default();
            for case in 0..cases {
                let inst = random_instance(seed, case, &cfg);
                check(case, Some(&inst), index_identity_case(&inst));
                cases_run += 1;
            }
        }
        Suite::Structure => {
            let cfg = GenConfig::default().with_boxes(5).with_support(3);
            for case in 0..cases {
                let inst = random_instance(seed, case, &cfg);
                check(case, Some(&inst), structure_case(&inst));
                cases_run += 1;
            }
        }
        Suite::Normal => {
            for case in 0..cases {
                let inst = random_lclrs3_instance(seed, case, 5);
                check(case, Some(inst.inner()), normal_case(&inst));
                cases_run += 1;
            }
        }
        Suite::Eq1 => {
            for case in 0..cases {
                let inst = random_lclrs3_instance(seed, case, 5);
                check(case, Some(inst.inner()), eq1_case(&inst));
                cases_run += 1;
            }
        }
        Suite::Reduction => {
            for (case, source) in small_multisets(3).into_iter().enumerate() {
                if cases_run >= cases {
                    break;
                }
                let result = reduction_case(&source);
                check(case as u64, None, result.map_err(|m| format!("S={source:?}: {m}")));
                cases_run += 1;
            }
        }
        Suite::Sandwich => {
            for case in 0..cases {
                let inst = random_large_value_instance(seed, case, 6);
                check(case, Some(&inst), sandwich_case(&inst));
                cases_run += 1;
            }
        }
        Suite::Discretization => {
            let cfg = GenConfig::default();
            for case in 0..cases {
                let inst = random_instance(seed, case, &cfg);
                check(case, Some(&inst), discretization_case(&inst));
                cases_run += 1;
            }
        }
        Suite::Lift => {
            for case in 0..cases {
                let inst = random_large_value_instance(seed, case, 6);
                check(case, Some(&inst), lift_case(&inst));
                cases_run += 1;
            }
        }
    }
    SuiteReport {
        suite,
        cases_run,
        failures,
    }
}

fn index_identity_case(inst: &PnoiInstance) -> Result<(), String> {
    let dp = classic_optimal_value(inst).map_err(|e| e.to_string())?;
    let closed = max_kappa_expectation(inst);
    if dp != closed {
        return Err(format!("classic DP {dp} != E[max(0, max kappa)] {closed}"));
    }
    Ok(())
}

fn structure_case(inst: &PnoiInstance) -> Result<(), String> {
    let (opt, _) = optimal_value(inst).map_err(|e| e.to_string())?;
    let (_, best) = best_structured_policy(inst).map_err(|e| e.to_string())?;
    if best != opt {
        return Err(format!("best structured policy {best} != optimal {opt}"));
    }
    Ok(())
}

fn normal_case(inst: &crate::lclrs3::Lclrs3Instance) -> Result<(), String> {
    let (opt, _) = optimal_value(inst.inner()).map_err(|e| e.to_string())?;
    let (_, best) = best_permutation(inst).map_err(|e| e.to_string())?;
    if best != opt {
        return Err(format!("best normal permutation {best} != optimal {opt}"));
    }
    Ok(())
}

fn eq1_case(inst: &crate::lclrs3::Lclrs3Instance) -> Result<(), String> {
    let n = inst.n();
    let classic = max_kappa_expectation(inst.inner());
    for sigma in permutations(n) {
        let payoff = evaluate_normal_policy(inst, &sigma).map_err(|e| e.to_string())?;
        let l = loss(inst, &sigma).map_err(|e| e.to_string())?;
        let mut saved = inst.box_at(sigma[n - 1]).cost.clone();
        for &i in &sigma[..n - 1] {
            saved *= &inst.box_at(i).r;
        }
        if classic != &payoff + &l - &saved {
            return Err(format!(
                "identity fails at sigma {sigma:?}: {classic} != {payoff} + {l} - {saved}"
            ));
        }
    }
    Ok(())
}

/// Independent oracle for the Partition question: subset-sum enumeration.
pub fn partition_brute_force(source: &[u64]) -> bool {
    let total: u64 = source.iter().sum();
    if !total.is_multiple_of(2) {
        return false;
    }
    let target = total / 2;
    let mut reachable = vec![false; target as usize + 1];
    reachable[0] = true;
    for &s in source {
        for sum in (s as usize..reachable.len()).rev() {
            if reachable[sum - s as usize] {
                reachable[sum] = true;
            }
        }
    }
    reachable[target as usize]
}

fn reduction_case(source: &[u64]) -> Result<(), String> {
    let red = reduce_partition(source).map_err(|e| e.to_string())?;
    let answer = partition_answer(&red).map_err(|e| e.to_string())?;
    let expected = partition_brute_force(source);
    if answer != expected {
        return Err(format!("reduction says {answer}, subset-sum says {expected}"));
    }
    // the optimal permutation parks the expensive box last
    let (sigma, _) = best_permutation(red.instance()).map_err(|e| e.to_string())?;
    if *sigma.last().unwrap() != red.final_box() {
        return Err(format!("optimal permutation {sigma:?} does not end at the final box"));
    }
    // the high/low index ratio is pinned exactly
    if red.k2() / red.k1() != *red.t() {
        return Err("k2/k1 != t".to_string());
    }
    Ok(())
}

fn sandwich_case(inst: &PnoiInstance) -> Result<(), String> {
    let eps = Scalar::frac(1, 4);
    let theta = choose_theta(inst, &eps).map_err(|e| e.to_string())?;
    let full: u32 = (1u32 << inst.n()) - 1;

    // breakpoints of both F and W: the clipped supports (plus 0 and θ);
    // both functions are linear between consecutive checkpoints, so the
    // inequalities there extend to every v
    let mut checkpoints: Vec<Scalar> = inst
        .boxes()
        .iter()
        .flat_map(|b| {
            crate::index::kappa_distribution(b)
                .iter()
                .map(|(v, _)| v.clone())
                .collect::<Vec<_>>()
        })
        .filter(|v| !v.is_negative())
        .collect();
    checkpoints.push(Scalar::zero());
    checkpoints.push(theta.value.clone());
    checkpoints.push(inst.max_value());
    crate::scalar::sort_dedup(&mut checkpoints);

    for v in &checkpoints {
        let f = f_value(inst, full, v);
        let w = w_value(inst, full, v);
        if w > f {
            return Err(format!("W({v}) = {w} exceeds F({v}) = {f}"));
        }
        if v >= &theta.value && w < (Scalar::one() - &eps) * &f {
            return Err(format!("W({v}) = {w} below (1-eps)F = {}", f.to_f64()));
        }
    }
    Ok(())
}

fn discretization_case(inst: &PnoiInstance) -> Result<(), String> {
    let eps = Scalar::frac(1, 4);
    let theta = choose_theta(inst, &eps).map_err(|e| e.to_string())?;
    let (opt, _) = optimal_value(inst).map_err(|e| e.to_string())?;

    // θ bracket from the half-approximation guarantee
    let lower = &opt / &eps;
    let upper = Scalar::from(2u64) * &opt / &eps;
    if theta.value < lower || theta.value > upper {
        return Err(format!("theta {} escapes [OPT/eps, 2OPT/eps]", theta.value));
    }

    let small = s_discretize(inst, &theta);
    let (opt_s, table) = optimal_value(&small).map_err(|e| e.to_string())?;
    if opt_s > opt {
        return Err(format!("flooring raised the optimum: {opt_s} > {opt}"));
    }
    // calibrated loss bound for the grid stage
    let slack = Scalar::from(3u64) * &eps * &opt;
    if &opt - &opt_s > slack {
        return Err(format!("grid stage lost too much: {opt} -> {opt_s}"));
    }
    // the floor-optimal policy, replayed on the raw instance, only gains
    let replay = replay_table(&table, inst, &theta);
    if replay < opt_s {
        return Err(format!("replay on raw instance {replay} below {opt_s}"));
    }
    Ok(())
}

/// Execute the optimal policy of the floored instance on the raw one:
/// decisions read the floored best-so-far, payoffs accrue raw values.
fn replay_table(table: &ValueTable, raw: &PnoiInstance, theta: &crate::ptas::Theta) -> Scalar {
    fn go(
        table: &ValueTable,
        raw: &PnoiInstance,
        theta: &crate::ptas::Theta,
        mask: u32,
        policy_best: Scalar,
        true_best: Scalar,
    ) -> Scalar {
        let (_, action) = table
            .get(mask, &policy_best)
            .expect("table is total over reachable states");
        match *action {
            DpAction::Quit => true_best,
            DpAction::TakeUnopened(i) => raw.box_at(i).dist().expected_value(),
            DpAction::Open(i) => {
                let mut acc = -raw.box_at(i).cost();
                for (v, p) in raw.box_at(i).dist().iter() {
                    let seen = theta.grid_floor(v);
                    let next_policy = seen.max(policy_best.clone());
                    let next_true = v.clone().max(true_best.clone());
                    let cont = go(table, raw, theta, mask & !(1 << i), next_policy, next_true);
                    acc += &(p * cont);
                }
                acc
            }
        }
    }
    let full: u32 = (1u32 << raw.n()) - 1;
    go(table, raw, theta, full, Scalar::zero(), Scalar::zero())
}

fn lift_case(inst: &PnoiInstance) -> Result<(), String> {
    let eps = Scalar::frac(1, 4);
    let theta = choose_theta(inst, &eps).map_err(|e| e.to_string())?;
    let points = large_points(inst, &theta);
    let lp = build_lpnoi(inst.clone(), points).map_err(|e| e.to_string())?;
    let (rounded, policy) = solve_ssdp_exact(&lp).map_err(|e| e.to_string())?;
    let lifted = lift_policy(&lp, &policy, inst).map_err(|e| e.to_string())?;
    if lifted < rounded {
        return Err(format!("lifted payoff {lifted} below rounded value {rounded}"));
    }
    let (opt, _) = optimal_value(inst).map_err(|e| e.to_string())?;
    if rounded > opt {
        return Err(format!("rounded optimum {rounded} exceeds true optimum {opt}"));
    }
    // calibrated two-stage bound and the full pipeline
    let slack = Scalar::from(5u64) * &eps * &opt;
    if &opt - &rounded > slack {
        return Err(format!("rounding lost too much: {opt} -> {rounded}"));
    }
    let result = ptas_pipeline(inst, &eps).map_err(|e| e.to_string())?;
    if result.lifted_payoff > opt {
        return Err(format!(
            "pipeline payoff {} exceeds the optimum {opt}",
            result.lifted_payoff
        ));
    }
    if &opt - &result.lifted_payoff > slack {
        return Err(format!(
            "pipeline payoff {} below (1-5eps)·{opt}",
            result.lifted_payoff
        ));
    }
    Ok(())
}
