//! End-to-end composition of the two discretizations.
//!
//! Pipeline: pick `θ` from the half-approximation, floor small values onto
//! the `θ·ε²` grid, choose large-value points, solve the rounded process
//! exactly, and execute the solved policy back on the *original* instance,
//! feeding it grid-floored, rounded-up observations while banking raw
//! payoffs.  Each stage loses at most an `ε`-fraction of the optimum, and
//! the lifted payoff can only recover value, so the result lands within a
//! small multiple of `ε` of optimal while the policy itself only ever saw
//! a constant-sized state space.

use thiserror::Error;

use crate::instance::PnoiInstance;
use crate::ptas::discretize::{
    choose_theta, large_points, s_discretize, DiscretizeError, Theta,
};
use crate::ptas::lpnoi::{
    build_lpnoi, lift_policy_with, solve_ssdp_exact, LpnoiError, LpnoiInstance, SsdpPolicy,
};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PtasError {
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Lpnoi(#[from] LpnoiError),
}

/// Everything the pipeline produced, including the solved rounded process
/// so the policy can be re-executed or exported.
#[derive(Debug, Clone)]
pub struct PtasResult {
    pub theta: Theta,
    pub process: LpnoiInstance,
    pub policy: SsdpPolicy,
    /// Optimal value of the discretized process.
    pub discretized_value: Scalar,
    /// Exact expected payoff of the lifted policy on the original instance.
    pub lifted_payoff: Scalar,
}

impl PtasResult {
    /// Number of large-value discretization points.
    pub fn m(&self) -> usize {
        self.process.points().m()
    }
}

/// Run the full pipeline on `inst` at accuracy `epsilon ∈ (0, 1/2]`.
pub fn ptas_pipeline(inst: &PnoiInstance, epsilon: &Scalar) -> Result<PtasResult, PtasError> {
    let theta = choose_theta(inst, epsilon)?;
    let small = s_discretize(inst, &theta);
    let points = large_points(&small, &theta);
    let process = build_lpnoi(small, points)?;
    let (discretized_value, policy) = solve_ssdp_exact(&process)?;
    let lifted_payoff = lift_policy_with(&process, &policy, inst, &|v| theta.grid_floor(v))?;
    Ok(PtasResult {
        theta,
        process,
        policy,
        discretized_value,
        lifted_payoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDistribution;
    use crate::exact::optimal_value;
    use crate::instance::PnoiBox;

    fn coin_box(cost: Scalar) -> PnoiBox {
        PnoiBox::new(
            cost,
            DiscreteDistribution::new(vec![
                (Scalar::zero(), Scalar::frac(1, 2)),
                (Scalar::one(), Scalar::frac(1, 2)),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identity_discretization_is_exact() {
        // values on the grid: alg = 1/2 makes the step (1/4-epsilon) 1/4,
        // so {0, 1} are untouched and every stage is the identity
        let inst = PnoiInstance::new(vec![
            coin_box(Scalar::frac(1, 4)),
            coin_box(Scalar::frac(1, 4)),
        ])
        .unwrap();
        let result = ptas_pipeline(&inst, &Scalar::frac(1, 4)).unwrap();
        assert_eq!(result.theta.grid_step(), Scalar::frac(1, 4));
        let opt = optimal_value(&inst).unwrap().0;
        assert_eq!(result.lifted_payoff, opt);
        assert_eq!(result.discretized_value, opt);
    }

    #[test]
    fn feasibility_and_quality_with_large_values() {
        let big = PnoiBox::new(
            Scalar::frac(3, 2),
            DiscreteDistribution::new(vec![
                (Scalar::zero(), Scalar::frac(1, 2)),
                (Scalar::from(25u64), Scalar::frac(3, 8)),
                (Scalar::from(75u64), Scalar::frac(1, 8)),
            ])
            .unwrap(),
        )
        .unwrap();
        let inst = PnoiInstance::new(vec![big, coin_box(Scalar::frac(1, 8))]).unwrap();
        let opt = optimal_value(&inst).unwrap().0;
        for eps in [Scalar::frac(1, 4), Scalar::frac(1, 10)] {
            let result = ptas_pipeline(&inst, &eps).unwrap();
            assert!(result.lifted_payoff <= opt);
            assert!(result.lifted_payoff >= result.discretized_value);
            let slack = Scalar::from(5u64) * &eps * &opt;
            assert!(
                &opt - &result.lifted_payoff <= slack,
                "payoff {} vs opt {} at eps {}",
                result.lifted_payoff.to_f64(),
                opt.to_f64(),
                eps.to_f64()
            );
        }
    }

    #[test]
    fn zero_instance_degenerates_cleanly() {
        let dead = PnoiBox::new(
            Scalar::one(),
            DiscreteDistribution::deterministic(Scalar::zero()),
        )
        .unwrap();
        let inst = PnoiInstance::new(vec![dead]).unwrap();
        let result = ptas_pipeline(&inst, &Scalar::frac(1, 10)).unwrap();
        assert_eq!(result.lifted_payoff, Scalar::zero());
        assert_eq!(result.theta.value, Scalar::zero());
    }

    #[test]
    fn epsilon_validation() {
        let inst = PnoiInstance::new(vec![coin_box(Scalar::frac(1, 8))]).unwrap();
        assert!(ptas_pipeline(&inst, &Scalar::zero()).is_err());
        assert!(ptas_pipeline(&inst, &Scalar::one()).is_err());
    }
}
