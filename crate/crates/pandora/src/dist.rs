//! Finite value distributions.
//!
//! A [`DiscreteDistribution`] is a finite list of `(value, probability)`
//! masses, kept sorted strictly increasing by value with equal values merged,
//! so that two distributions are equal exactly when they are the same
//! distribution.  Probabilities are positive rationals summing to exactly 1.
//!
//! Values may be negative here: clipping a value at a negative index
//! produces a mass below zero.  Instance-level validation separately
//! requires the values *inside boxes* to be non-negative.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistributionError {
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("probability {0} is not positive")]
    NonPositiveProbability(Scalar),
    #[error("probabilities sum to {0}, not 1")]
    SumNotOne(Scalar),
}

/// A finite distribution over exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Scalar, Scalar)>", into = "Vec<(Scalar, Scalar)>")]
pub struct DiscreteDistribution {
    support: Vec<(Scalar, Scalar)>,
}

impl DiscreteDistribution {
    /// Build from `(value, probability)` masses.  Input order is irrelevant;
    /// equal values are merged.  Probabilities must be positive and sum to 1.
    pub fn new(masses: Vec<(Scalar, Scalar)>) -> Result<Self, DistributionError> {
        if masses.is_empty() {
            return Err(DistributionError::EmptySupport);
        }
        for (_, p) in &masses {
            if !p.is_positive() {
                return Err(DistributionError::NonPositiveProbability(p.clone()));
            }
        }
        let merged = merge(masses);
        let total: Scalar = merged.iter().map(|(_, p)| p).sum();
        if total != Scalar::one() {
            return Err(DistributionError::SumNotOne(total));
        }
        Ok(DiscreteDistribution { support: merged })
    }

    /// Point mass at `value`.
    pub fn deterministic(value: Scalar) -> Self {
        DiscreteDistribution {
            support: vec![(value, Scalar::one())],
        }
    }

    pub fn support(&self) -> &[(Scalar, Scalar)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Scalar, Scalar)> {
        self.support.iter()
    }

    pub fn min_value(&self) -> &Scalar {
        &self.support.first().expect("nonempty support").0
    }

    pub fn max_value(&self) -> &Scalar {
        &self.support.last().expect("nonempty support").0
    }

    /// `E[v]`.
    pub fn expected_value(&self) -> Scalar {
        self.support.iter().map(|(v, p)| v * p).sum()
    }

    /// `E[(v - t)_+]`, the expected excess above `t`.
    pub fn expected_excess(&self, t: &Scalar) -> Scalar {
        self.support
            .iter()
            .filter(|(v, _)| v > t)
            .map(|(v, p)| (v - t) * p)
            .sum()
    }

    /// `Pr[v <= t]`.
    pub fn cdf(&self, t: &Scalar) -> Scalar {
        self.support
            .iter()
            .take_while(|(v, _)| v <= t)
            .map(|(_, p)| p)
            .sum()
    }

    /// Pushforward under `f`, with masses at colliding images merged.
    pub fn map_values(&self, mut f: impl FnMut(&Scalar) -> Scalar) -> Self {
        let masses = self
            .support
            .iter()
            .map(|(v, p)| (f(v), p.clone()))
            .collect();
        DiscreteDistribution {
            support: merge(masses),
        }
    }
}

fn merge(mut masses: Vec<(Scalar, Scalar)>) -> Vec<(Scalar, Scalar)> {
    masses.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(Scalar, Scalar)> = Vec::with_capacity(masses.len());
    for (v, p) in masses {
        match merged.last_mut() {
            Some((lv, lp)) if *lv == v => *lp += p,
            _ => merged.push((v, p)),
        }
    }
    merged
}

impl From<DiscreteDistribution> for Vec<(Scalar, Scalar)> {
    fn from(d: DiscreteDistribution) -> Self {
        d.support
    }
}

impl TryFrom<Vec<(Scalar, Scalar)>> for DiscreteDistribution {
    type Error = DistributionError;
    fn try_from(masses: Vec<(Scalar, Scalar)>) -> Result<Self, Self::Error> {
        DiscreteDistribution::new(masses)
    }
}
