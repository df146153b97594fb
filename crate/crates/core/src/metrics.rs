//! Group fairness metrics of a deterministic predictor, evaluated against
//! a distribution over the *true* sensitive attribute, and the closed-form
//! expressions for SD / SD' / EOD / EOD' in terms of the original table.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::distribution::{delta_table, JointDistribution};
use crate::model::{ldp_cell, PredictionTable, Provenance};
use crate::rr::{Odds, RRParams};
use crate::theory::{check_reliable_y, check_uniform_discrimination, ReliableY, UniformDiscrimination};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("group A={group} has zero mass")]
    ZeroGroupMass { group: u8 },
    #[error("EOD undefined: P[Y=1, A={group}] = 0")]
    UndefinedEod { group: u8 },
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FairnessReport {
    pub sd: BigRational,
    /// `CSD_x ∈ {−1, 0, 1}` per x.
    pub csd: Vec<i8>,
    pub eod: Option<BigRational>,
    pub accuracy: BigRational,
    pub provenance: Provenance,
}

/// `P[Ŷ=1 | A=a]`.
pub fn acceptance_rate(
    pred: &PredictionTable,
    dist: &JointDistribution,
    a: u8,
) -> Result<BigRational, MetricsError> {
    let mass = dist.group_mass(a);
    if mass.is_zero() {
        return Err(MetricsError::ZeroGroupMass { group: a });
    }
    let accepted: BigRational = (0..dist.nx())
        .filter(|&x| pred.get(x, a) == 1)
        .map(|x| dist.cell_mass(x, a))
        .sum();
    Ok(accepted / mass)
}

/// `P[Ŷ=1 | Y=1, A=a]`.
pub fn true_positive_rate(
    pred: &PredictionTable,
    dist: &JointDistribution,
    a: u8,
) -> Result<BigRational, MetricsError> {
    let mass = dist.positive_mass(a);
    if mass.is_zero() {
        return Err(MetricsError::UndefinedEod { group: a });
    }
    let hits: BigRational = (0..dist.nx())
        .filter(|&x| pred.get(x, a) == 1)
        .map(|x| dist.p(1, x, a).clone())
        .sum();
    Ok(hits / mass)
}

/// `SD = P[Ŷ=1 | A=1] − P[Ŷ=1 | A=0]`, conditioning on the true `A`.
pub fn statistical_disparity(
    pred: &PredictionTable,
    dist: &JointDistribution,
) -> Result<BigRational, MetricsError> {
    Ok(acceptance_rate(pred, dist, 1)? - acceptance_rate(pred, dist, 0)?)
}

/// `CSD_x = Ŷ^x_1 − Ŷ^x_0` for each x.
pub fn conditional_sd(pred: &PredictionTable) -> Vec<i8> {
    pred.rows()
        .iter()
        .map(|r| r[1] as i8 - r[0] as i8)
        .collect()
}

/// `EOD = P[Ŷ=1 | Y=1, A=1] − P[Ŷ=1 | Y=1, A=0]`.
pub fn equal_opportunity_diff(
    pred: &PredictionTable,
    dist: &JointDistribution,
) -> Result<BigRational, MetricsError> {
    Ok(true_positive_rate(pred, dist, 1)? - true_positive_rate(pred, dist, 0)?)
}

pub fn accuracy(pred: &PredictionTable, dist: &JointDistribution) -> BigRational {
    let mut acc = BigRational::zero();
    for x in 0..dist.nx() {
        for a in 0..2u8 {
            acc += dist.p(pred.get(x, a), x, a);
        }
    }
    acc
}

/// All four metrics. Fails only if a group has zero mass; an undefined
/// EOD is recorded as `None`.
pub fn fairness_report(
    pred: &PredictionTable,
    dist: &JointDistribution,
) -> Result<FairnessReport, MetricsError> {
    let eod = match equal_opportunity_diff(pred, dist) {
        Ok(v) => Some(v),
        Err(MetricsError::UndefinedEod { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(FairnessReport {
        sd: statistical_disparity(pred, dist)?,
        csd: conditional_sd(pred),
        eod,
        accuracy: accuracy(pred, dist),
        provenance: pred.provenance(),
    })
}

/// Which branch of the three-way SD quantification applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SdBranch {
    /// `∃x Γ^x_1 > Γ^x_0`.
    Group1Favoured,
    /// `∀x Γ^x_1 = Γ^x_0` (or no x where both are defined).
    NoDifference,
    /// `∃x Γ^x_1 < Γ^x_0`.
    Group0Favoured,
}

impl SdBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            SdBranch::Group1Favoured => "exists-gamma1-gt-gamma0",
            SdBranch::NoDifference => "all-gamma-equal",
            SdBranch::Group0Favoured => "exists-gamma1-lt-gamma0",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdClosedForm {
    pub value: BigRational,
    pub branch: SdBranch,
}

/// Critical ratio `−num/den` with `den = 0` read as `+∞`.
fn neg_ratio(num: &BigRational, den: &BigRational) -> Option<BigRational> {
    (!den.is_zero()).then(|| -(num / den))
}

fn odds_cmp(odds: &Odds, ratio: &Option<BigRational>) -> Ordering {
    match ratio {
        None if odds.is_infinite() => Ordering::Equal,
        None => Ordering::Less,
        Some(r) if !r.is_positive() => Ordering::Greater,
        Some(r) => odds.compare(r).ordering,
    }
}

fn conditional_weights(dist: &JointDistribution, a: u8) -> Result<Vec<BigRational>, MetricsError> {
    let mass = dist.group_mass(a);
    if mass.is_zero() {
        return Err(MetricsError::ZeroGroupMass { group: a });
    }
    Ok((0..dist.nx()).map(|x| dist.cell_mass(x, a) / &mass).collect())
}

/// SD (or SD' when `params` is given) from the index sets of the original
/// Δ table, weighted by `P[x | A=a]`. Requires uniform discrimination.
///
/// With direction `∃x Γ^x_1 > Γ^x_0`:
///
/// ```text
/// SD' = Σ_{x ∈ both}  P[x|A=1] − P[x|A=0]  +  Σ_{x ∈ only1} P[x|A=1]
/// both  = {Δ_1, Δ_0 ≥ 0} ∪ {Δ_1 > 0 > Δ_0, −Δ_0/Δ_1 ≤ e^ε ≤ −Δ_1/Δ_0}
/// only1 = {Δ_1 ≥ 0 > Δ_0, e^ε ≥ −Δ_0/Δ_1, e^ε > −Δ_1/Δ_0}
/// ```
///
/// mirrored for the other direction. Without `params` the threshold
/// conditions drop out. Under `X ⊥ A` both weights equal `P[x]`.
pub fn sd_closed_form(
    dist: &JointDistribution,
    params: Option<&RRParams>,
) -> Result<SdClosedForm, MetricsError> {
    let branch = match check_uniform_discrimination(dist) {
        UniformDiscrimination::Holds { direction: 1 } => SdBranch::Group1Favoured,
        UniformDiscrimination::Holds { direction: -1 } => SdBranch::Group0Favoured,
        UniformDiscrimination::Holds { .. } | UniformDiscrimination::Vacuous => {
            SdBranch::NoDifference
        }
        UniformDiscrimination::Violated { favours_1_at, favours_0_at } => {
            return Err(MetricsError::AssumptionViolated(format!(
                "uniform discrimination: Gamma favours group 1 at x={} and group 0 at x={}",
                dist.x_domain()[favours_1_at],
                dist.x_domain()[favours_0_at]
            )))
        }
    };
    let w1 = conditional_weights(dist, 1)?;
    let w0 = conditional_weights(dist, 0)?;
    let deltas = delta_table(dist);
    let odds = params.map(RRParams::odds);

    let mut value = BigRational::zero();
    for x in 0..dist.nx() {
        let (d1, d0) = (deltas.get(x, 1), deltas.get(x, 0));
        let both_nonneg = !d1.is_negative() && !d0.is_negative();
        let (both, only1, only0) = match &odds {
            None => (
                both_nonneg,
                !d1.is_negative() && d0.is_negative(),
                d1.is_negative() && !d0.is_negative(),
            ),
            Some(odds) => {
                let r01 = neg_ratio(d0, d1);
                let r10 = neg_ratio(d1, d0);
                let ge = |r: &Option<BigRational>| odds_cmp(odds, r) != Ordering::Less;
                let le = |r: &Option<BigRational>| odds_cmp(odds, r) != Ordering::Greater;
                let gt = |r: &Option<BigRational>| odds_cmp(odds, r) == Ordering::Greater;
                let both = both_nonneg
                    || (d1.is_positive() && d0.is_negative() && ge(&r01) && le(&r10))
                    || (d0.is_positive() && d1.is_negative() && ge(&r10) && le(&r01));
                let only1 = !d1.is_negative() && d0.is_negative() && ge(&r01) && gt(&r10);
                let only0 = !d0.is_negative() && d1.is_negative() && ge(&r10) && gt(&r01);
                (both, only1, only0)
            }
        };
        if both {
            value += &w1[x] - &w0[x];
        }
        match branch {
            SdBranch::Group1Favoured if only1 => value += &w1[x],
            SdBranch::Group0Favoured if only0 => value -= &w0[x],
            _ => {}
        }
    }
    Ok(SdClosedForm { value, branch })
}

/// EOD (or EOD') from the Δ sign sets, weighted by `P[x | Y=1, A=a]`.
/// Requires reliable `Y`.
pub fn eod_closed_form(
    dist: &JointDistribution,
    params: Option<&RRParams>,
) -> Result<BigRational, MetricsError> {
    if let ReliableY::Violated { x, .. } = check_reliable_y(dist) {
        return Err(MetricsError::AssumptionViolated(format!(
            "reliable Y: P[Y=1|x,A] depends on A at x={}",
            dist.x_domain()[x]
        )));
    }
    let positive = [0u8, 1].map(|a| dist.positive_mass(a));
    for a in 0..2u8 {
        if positive[a as usize].is_zero() {
            return Err(MetricsError::UndefinedEod { group: a });
        }
    }
    let deltas = delta_table(dist);
    let odds = params.map(RRParams::odds);
    let predicted = |x: usize, a: u8| -> bool {
        let (d_a, d_abar) = (deltas.get(x, a), deltas.get(x, 1 - a));
        match &odds {
            None => !d_a.is_negative(),
            Some(odds) => ldp_cell(d_a, d_abar, odds).0 == 1,
        }
    };
    let mut value = BigRational::zero();
    for x in 0..dist.nx() {
        if predicted(x, 1) {
            value += dist.p(1, x, 1) / &positive[1];
        }
        if predicted(x, 0) {
            value -= dist.p(1, x, 0) / &positive[0];
        }
    }
    Ok(value)
}

/// `true` when `after` lies between 0 and `before` (inclusive), and is 0
/// when `before` is 0.
pub fn sandwiched<T: Zero + PartialOrd>(before: &T, after: &T) -> bool {
    let zero = T::zero();
    if *before > zero {
        zero <= *after && after <= before
    } else if *before < zero {
        before <= after && *after <= zero
    } else {
        after.is_zero()
    }
}
