//! Value discretization: the small-value grid and the large-value points.
//!
//! Both stages are anchored at a threshold `θ = 2·ALG/ε`, where `ALG` is
//! the half-approximation; since `ALG ∈ [OPT/2, OPT]` this lands `θ` in
//! `[OPT/ε, 2·OPT/ε]` without knowing `OPT`.  Values at or below `θ` are
//! floored onto the grid `⌊x/(θ·ε²)⌋·θ·ε²`.  Values above `θ` are never
//! moved in the payoff; instead the *state* after revealing one is rounded
//! up to one of few discretization points chosen so that the additive
//! surplus bound `F([n], ·)` drops by at most `ε·ALG ≤ ε·OPT` between
//! consecutive points.  `F` is piecewise linear with breakpoints on the
//! clipped-value supports, so the sweep is exact: subdivide each linear
//! stretch finely enough, then greedily coalesce.

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::dist::DiscreteDistribution;
use crate::index::{expected_best, kappa_distribution};
use crate::instance::{PnoiBox, PnoiInstance};
use crate::policies::half_approx;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiscretizeError {
    #[error("epsilon {0} outside (0, 1/2]")]
    BadEpsilon(Scalar),
    #[error("value {value} above the top discretization point {top}")]
    AboveTop { value: Scalar, top: Scalar },
}

/// The large-value threshold and the approximation it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theta {
    /// `2·alg_payoff/epsilon`, inside `[OPT/ε, 2·OPT/ε]`.
    pub value: Scalar,
    /// The half-approximation payoff the threshold was derived from.
    pub alg_payoff: Scalar,
    pub epsilon: Scalar,
}

impl Theta {
    /// Grid step `θ·ε²` of the small-value discretization.
    pub fn grid_step(&self) -> Scalar {
        &self.value * &self.epsilon * &self.epsilon
    }

    /// Floor `x` onto the small-value grid (identity for a zero step).
    pub fn grid_floor(&self, x: &Scalar) -> Scalar {
        let step = self.grid_step();
        if step.is_zero() {
            return x.clone();
        }
        Scalar::from_bigint((x / &step).floor()) * &step
    }
}

/// Fix `θ = 2·half_approx/ε`.  Requires `0 < ε <= 1/2`.
pub fn choose_theta(inst: &PnoiInstance, epsilon: &Scalar) -> Result<Theta, DiscretizeError> {
    if !epsilon.is_positive() || epsilon > &Scalar::frac(1, 2) {
        return Err(DiscretizeError::BadEpsilon(epsilon.clone()));
    }
    let alg = half_approx(inst);
    Ok(Theta {
        value: Scalar::from(2u64) * &alg / epsilon,
        alg_payoff: alg,
        epsilon: epsilon.clone(),
    })
}

/// Replace every support value by its grid floor, merging collisions.
/// Costs are untouched.
pub fn s_discretize(inst: &PnoiInstance, theta: &Theta) -> PnoiInstance {
    let boxes = inst
        .boxes()
        .iter()
        .map(|b| {
            let dist = b.dist().map_values(|v| theta.grid_floor(v));
            PnoiBox::new(b.cost().clone(), dist).expect("flooring keeps values nonnegative")
        })
        .collect();
    PnoiInstance::new(boxes).expect("box count unchanged")
}

/// `F(S, v) = Σ_{i in S} E[(κ_i - v)_+]`: the additive surplus bound.
pub fn f_value(inst: &PnoiInstance, mask: u32, v: &Scalar) -> Scalar {
    (0..inst.n())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| kappa_distribution(inst.box_at(i)).expected_excess(v))
        .sum()
}

/// `W(S, v) = E[(max_{i in S} κ_i - v)_+]`: the exact surplus of handing
/// the boxes in `S` to the index policy with outside option `v`.
pub fn w_value(inst: &PnoiInstance, mask: u32, v: &Scalar) -> Scalar {
    let kappas: Vec<DiscreteDistribution> = (0..inst.n())
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| kappa_distribution(inst.box_at(i)))
        .collect();
    let refs: Vec<&DiscreteDistribution> = kappas.iter().collect();
    expected_best(&refs, v) - v
}

/// The sorted large-value discretization points `θ = θ₁ < … < θ_m = MaxV`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargePoints {
    theta: Scalar,
    points: Vec<Scalar>,
}

impl LargePoints {
    pub fn theta(&self) -> &Scalar {
        &self.theta
    }

    pub fn points(&self) -> &[Scalar] {
        &self.points
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn top(&self) -> &Scalar {
        self.points.last().expect("nonempty")
    }

    pub fn contains(&self, v: &Scalar) -> bool {
        self.points.binary_search(v).is_ok()
    }

    /// Round up to the smallest point `>= x`; identity below `θ`.
    pub fn round_up(&self, x: &Scalar) -> Result<Scalar, DiscretizeError> {
        if x < &self.theta {
            return Ok(x.clone());
        }
        match self.points.iter().find(|p| *p >= x) {
            Some(p) => Ok(p.clone()),
            None => Err(DiscretizeError::AboveTop {
                value: x.clone(),
                top: self.top().clone(),
            }),
        }
    }
}

/// Sweep the breakpoints of `F([n], ·)` from `θ` to the maximum value,
/// keeping every consecutive `F`-drop at most `ε·alg_payoff`.
pub fn large_points(inst: &PnoiInstance, theta: &Theta) -> LargePoints {
    let max_v = inst.max_value();
    if max_v <= theta.value {
        return LargePoints {
            theta: theta.value.clone(),
            points: vec![theta.value.clone()],
        };
    }
    let budget = &theta.epsilon * &theta.alg_payoff;
    let full: u32 = (1u32 << inst.n()) - 1;
    let f_at = |v: &Scalar| f_value(inst, full, v);

    // knots: clipped-value breakpoints inside (θ, MaxV), then MaxV itself
    let mut knots: Vec<Scalar> = inst
        .boxes()
        .iter()
        .flat_map(|b| kappa_distribution(b).iter().map(|(v, _)| v.clone()).collect::<Vec<_>>())
        .filter(|v| v > &theta.value && v < &max_v)
        .collect();
    knots.push(max_v.clone());
    crate::scalar::sort_dedup(&mut knots);

    // fine pass: subdivide each linear stretch so every step drops <= budget
    let mut fine = vec![theta.value.clone()];
    let mut prev = theta.value.clone();
    let mut f_prev = f_at(&prev);
    for knot in knots {
        let f_knot = f_at(&knot);
        let drop = &f_prev - &f_knot;
        let pieces = if drop.is_positive() {
            (&drop / &budget).floor().to_u64().unwrap_or(0) + 1
        } else {
            1
        };
        for j in 1..=pieces {
            fine.push(&prev + (&knot - &prev) * Scalar::from(j) / Scalar::from(pieces));
        }
        prev = knot;
        f_prev = f_knot;
    }

    // coalesce greedily, keeping each kept gap within budget
    let mut points = vec![theta.value.clone()];
    let mut f_cur = f_at(&theta.value);
    let mut i = 1;
    while i < fine.len() {
        let mut j = i;
        while j + 1 < fine.len() && &f_cur - f_at(&fine[j + 1]) <= budget {
            j += 1;
        }
        points.push(fine[j].clone());
        f_cur = f_at(&fine[j]);
        i = j + 1;
    }
    LargePoints {
        theta: theta.value.clone(),
        points,
    }
}
