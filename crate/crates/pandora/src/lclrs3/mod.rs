//! Low-cost-low-return-support-3 instances.
//!
//! A box belongs to this family when its values sit inside {0, 1/2, 1} with
//! positive mass `p` at 1, its cost is strictly positive, its expected value
//! is strictly below 1/2, and its index is at least 1/2 — which pins the
//! index to the closed form `τ = 1 - c/p`.  For such instances the optimal
//! policy is a *normal* policy: a permutation that opens boxes in order,
//! stops on a 1, switches to the index policy with outside option 1/2 on a
//! 1/2, and takes the last box unopened after an all-zero prefix.  Finding
//! the optimal permutation is the computational core the Partition
//! reduction embeds into.

mod diagnostics;
mod normal;
mod reduction;

pub use diagnostics::{default_precision, h_diagnostics, DiagnosticsError, ReductionDiagnostics};
pub use normal::{
    best_permutation, evaluate_normal_policy, g_value, loss, permutations, utility, NormalError,
};
pub use reduction::{
    partition_answer, reduce_partition, ReductionError, ReductionMeta, ReductionOutput,
};

use crate::index::compute_index;
use crate::instance::{PnoiInstance, Violation, Violations};
use crate::scalar::Scalar;

/// Per-box masses and derived index of an LCLRS3 box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lclrs3Box {
    /// Mass at value 1 (strictly positive).
    pub p: Scalar,
    /// Mass at value 1/2 (may be zero).
    pub q: Scalar,
    /// Mass at value 0 (may be zero).
    pub r: Scalar,
    pub cost: Scalar,
    /// Index, always `1 - cost/p` here.
    pub tau: Scalar,
}

/// A validated LCLRS3 instance wrapping the underlying boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lclrs3Instance {
    inner: PnoiInstance,
    boxes: Vec<Lclrs3Box>,
}

impl Lclrs3Instance {
    pub fn from_instance(inst: PnoiInstance) -> Result<Self, Violations> {
        let violations = lclrs3_violations(&inst);
        if !violations.is_empty() {
            return Err(Violations(violations));
        }
        let boxes = inst
            .boxes()
            .iter()
            .map(|b| {
                let mass_at = |v: &Scalar| -> Scalar {
                    b.dist()
                        .iter()
                        .filter(|(value, _)| value == v)
                        .map(|(_, p)| p.clone())
                        .sum()
                };
                Lclrs3Box {
                    p: mass_at(&Scalar::one()),
                    q: mass_at(&Scalar::frac(1, 2)),
                    r: mass_at(&Scalar::zero()),
                    cost: b.cost().clone(),
                    tau: compute_index(b),
                }
            })
            .collect();
        Ok(Lclrs3Instance { inner: inst, boxes })
    }

    pub fn n(&self) -> usize {
        self.boxes.len()
    }

    pub fn inner(&self) -> &PnoiInstance {
        &self.inner
    }

    pub fn box_at(&self, i: usize) -> &Lclrs3Box {
        &self.boxes[i]
    }

    pub fn boxes(&self) -> &[Lclrs3Box] {
        &self.boxes
    }
}

/// True together with no violations exactly when the instance satisfies the
/// three defining conditions of the family.
pub fn is_lclrs3(inst: &PnoiInstance) -> (bool, Vec<Violation>) {
    let v = lclrs3_violations(inst);
    (v.is_empty(), v)
}

fn lclrs3_violations(inst: &PnoiInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let half = Scalar::frac(1, 2);
    for (i, b) in inst.boxes().iter().enumerate() {
        let at = |message: String| Violation {
            box_index: Some(i + 1),
            message,
        };
        for (v, _) in b.dist().iter() {
            if !v.is_zero() && *v != half && *v != Scalar::one() {
                out.push(at(format!("support value {v} outside {{0, 1/2, 1}}")));
            }
        }
        let p: Scalar = b
            .dist()
            .iter()
            .filter(|(v, _)| *v == Scalar::one())
            .map(|(_, m)| m.clone())
            .sum();
        if !p.is_positive() {
            out.push(at("no mass at value 1 (p = 0)".into()));
        }
        if !b.cost().is_positive() {
            out.push(at("cost is not strictly positive".into()));
        }
        if b.dist().expected_value() >= half {
            out.push(at(format!(
                "expected value {} is not strictly below 1/2",
                b.dist().expected_value()
            )));
        }
        if p.is_positive() && compute_index(b) < half {
            out.push(at(format!("index {} is below 1/2", compute_index(b))));
        }
    }
    out
}

#[cfg(test)]
pub(crate) fn test_box(p: Scalar, q: Scalar, cost: Scalar) -> crate::instance::PnoiBox {
    use crate::dist::DiscreteDistribution;
    use crate::instance::PnoiBox;
    let mut masses = vec![(Scalar::one(), p.clone())];
    if q.is_positive() {
        masses.push((Scalar::frac(1, 2), q.clone()));
    }
    let r = Scalar::one() - &p - &q;
    if r.is_positive() {
        masses.push((Scalar::zero(), r));
    }
    PnoiBox::new(cost, DiscreteDistribution::new(masses).unwrap()).unwrap()
}
