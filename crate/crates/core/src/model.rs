//! Deterministic majority-vote predictors.
//!
//! The baseline model predicts 1 on `(x, a)` iff `Δ^x_a ≥ 0`. The LDP model
//! applies the same rule to the obfuscated table; by the channel identity
//! `Δ'^x_a = p·Δ^x_a + (1−p)·Δ^x_ā` its prediction can be read off the
//! original table with a three-way case split on the signs of `Δ^x_a`,
//! `Δ^x_ā` and a comparison of `e^ε` with `−Δ^x_ā / Δ^x_a`.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::distribution::{delta_table, DeltaTable, JointDistribution};
use crate::rr::{Odds, RRParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Baseline,
    LdpClosedForm,
    FromDistribution,
    /// Fitted from sampled records.
    Empirical,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Baseline => "baseline",
            Provenance::LdpClosedForm => "ldp-closed-form",
            Provenance::FromDistribution => "from-distribution",
            Provenance::Empirical => "empirical",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `Ŷ^x_a ∈ {0, 1}` for every `(x, a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictionTable {
    y_hat: Vec<[u8; 2]>,
    provenance: Provenance,
    /// Cells whose real-ε comparison fell within the tie tolerance.
    boundary_cells: Vec<(usize, u8)>,
}

impl PredictionTable {
    pub fn new(y_hat: Vec<[u8; 2]>, provenance: Provenance) -> Self {
        debug_assert!(y_hat.iter().flatten().all(|&v| v <= 1));
        PredictionTable {
            y_hat,
            provenance,
            boundary_cells: Vec::new(),
        }
    }

    /// A table that ignores `a`.
    pub fn constant_in_a(values: &[u8], provenance: Provenance) -> Self {
        Self::new(values.iter().map(|&v| [v, v]).collect(), provenance)
    }

    pub fn get(&self, x: usize, a: u8) -> u8 {
        self.y_hat[x][a as usize]
    }

    pub fn nx(&self) -> usize {
        self.y_hat.len()
    }

    pub fn rows(&self) -> &[[u8; 2]] {
        &self.y_hat
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn boundary_cells(&self) -> &[(usize, u8)] {
        &self.boundary_cells
    }

    /// Cell-for-cell equality, ignoring provenance.
    pub fn same_predictions(&self, other: &PredictionTable) -> bool {
        self.y_hat == other.y_hat
    }

    pub fn is_constant_in_a(&self) -> bool {
        self.y_hat.iter().all(|r| r[0] == r[1])
    }
}

fn majority(delta: &BigRational) -> u8 {
    u8::from(!delta.is_negative())
}

/// Assumption-1 rule: `Ŷ^x_a = 1` iff `Δ^x_a ≥ 0`.
pub fn baseline_predictor(dist: &JointDistribution) -> PredictionTable {
    let deltas = delta_table(dist);
    let rows = (0..dist.nx())
        .map(|x| [0u8, 1].map(|a| majority(deltas.get(x, a))))
        .collect();
    PredictionTable::new(rows, Provenance::Baseline)
}

/// Same rule applied to an obfuscated (or empirical) table.
pub fn predictor_from_distribution(dist_prime: &JointDistribution) -> PredictionTable {
    let mut t = baseline_predictor(dist_prime);
    t.provenance = Provenance::FromDistribution;
    t
}

/// LDP prediction for one cell from the original `Δ^x_a`, `Δ^x_ā`.
/// Returns the prediction and whether a real-ε comparison was a tie.
pub(crate) fn ldp_cell(d_a: &BigRational, d_abar: &BigRational, odds: &Odds) -> (u8, bool) {
    match (d_a.signum_cmp(), d_abar.signum_cmp()) {
        (Ordering::Less, Ordering::Less | Ordering::Equal) => (0, false),
        (Ordering::Equal | Ordering::Greater, Ordering::Equal | Ordering::Greater) => (1, false),
        // Δ' = (1−p)Δ_ā < 0 unless the channel is the identity.
        (Ordering::Equal, Ordering::Less) => (u8::from(odds.is_infinite()), false),
        (Ordering::Greater, Ordering::Less) => {
            // 1 iff e^ε ≥ −Δ_ā/Δ_a
            let c = odds.compare(&(-(d_abar / d_a)));
            (u8::from(c.ordering != Ordering::Less), c.boundary)
        }
        (Ordering::Less, Ordering::Greater) => {
            // 1 iff e^ε ≤ −Δ_ā/Δ_a
            let c = odds.compare(&(-(d_abar / d_a)));
            (u8::from(c.ordering != Ordering::Greater), c.boundary)
        }
    }
}

trait SignumCmp {
    fn signum_cmp(&self) -> Ordering;
}

impl SignumCmp for BigRational {
    fn signum_cmp(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

/// LDP model prediction from the original distribution, by case analysis
/// on the original Δ table.
pub fn ldp_predictor_closed_form(dist: &JointDistribution, params: &RRParams) -> PredictionTable {
    ldp_predictor_from_deltas(&delta_table(dist), params)
}

pub(crate) fn ldp_predictor_from_deltas(deltas: &DeltaTable, params: &RRParams) -> PredictionTable {
    let odds = params.odds();
    let mut boundary_cells = Vec::new();
    let rows = (0..deltas.nx())
        .map(|x| {
            [0u8, 1].map(|a| {
                let (v, tie) = ldp_cell(deltas.get(x, a), deltas.get(x, 1 - a), &odds);
                if tie {
                    boundary_cells.push((x, a));
                }
                v
            })
        })
        .collect();
    PredictionTable {
        y_hat: rows,
        provenance: Provenance::LdpClosedForm,
        boundary_cells,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    BothNonneg,
    BothNonpos,
    A1PosA0Neg,
    A1NegA0Pos,
    /// `Δ^x_1 = Δ^x_0 = 0`.
    Degenerate,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::BothNonneg => "both-nonneg",
            CaseTag::BothNonpos => "both-nonpos",
            CaseTag::A1PosA0Neg => "a1pos-a0neg",
            CaseTag::A1NegA0Pos => "a1neg-a0pos",
            CaseTag::Degenerate => "degenerate",
        }
    }
}

/// Where group `a`'s LDP prediction at some `x` changes as ε varies.
#[derive(Clone, Debug, PartialEq)]
pub struct Flip {
    pub group: u8,
    /// `−Δ^x_ā / Δ^x_a`.
    pub ratio: BigRational,
    pub epsilon_star: f64,
    /// Prediction for `ε < ε*` (strictly below the threshold).
    pub below: u8,
    /// Prediction for `ε > ε*`, equal to the baseline prediction.
    pub above: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct XThreshold {
    pub x: usize,
    pub case: CaseTag,
    /// `−Δ^x_0 / Δ^x_1`, defined when `Δ^x_1 ≠ 0`.
    pub ratio_0_over_1: Option<BigRational>,
    /// `−Δ^x_1 / Δ^x_0`, defined when `Δ^x_0 ≠ 0`.
    pub ratio_1_over_0: Option<BigRational>,
    pub flips: Vec<Flip>,
}

impl XThreshold {
    /// The largest flip threshold at this `x`, if any group flips.
    pub fn governing_epsilon(&self) -> Option<f64> {
        self.flips
            .iter()
            .map(|f| f.epsilon_star)
            .max_by(|a, b| a.total_cmp(b))
    }

    pub fn flip_for(&self, group: u8) -> Option<&Flip> {
        self.flips.iter().find(|f| f.group == group)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdTable {
    pub rows: Vec<XThreshold>,
}

impl ThresholdTable {
    /// All flip thresholds, ascending.
    pub fn epsilons(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .rows
            .iter()
            .flat_map(|r| r.flips.iter().map(|f| f.epsilon_star))
            .collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// Distance in ε from `eps` to the nearest flip threshold.
    pub fn distance_to_nearest(&self, eps: f64) -> Option<f64> {
        self.epsilons()
            .into_iter()
            .map(|t| (t - eps).abs())
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Per-x case tags, critical ratios and flip thresholds.
pub fn flip_thresholds(dist: &JointDistribution) -> ThresholdTable {
    let deltas = delta_table(dist);
    let rows = (0..dist.nx())
        .map(|x| {
            let d1 = deltas.get(x, 1);
            let d0 = deltas.get(x, 0);
            let case = match (d1.signum_cmp(), d0.signum_cmp()) {
                (Ordering::Equal, Ordering::Equal) => CaseTag::Degenerate,
                (Ordering::Greater, Ordering::Less) => CaseTag::A1PosA0Neg,
                (Ordering::Less, Ordering::Greater) => CaseTag::A1NegA0Pos,
                (s1, s0) if s1 != Ordering::Less && s0 != Ordering::Less => CaseTag::BothNonneg,
                _ => CaseTag::BothNonpos,
            };
            let ratio_0_over_1 = (!d1.is_zero()).then(|| -(d0 / d1));
            let ratio_1_over_0 = (!d0.is_zero()).then(|| -(d1 / d0));
            let mut flips = Vec::new();
            if matches!(case, CaseTag::A1PosA0Neg | CaseTag::A1NegA0Pos) {
                for a in [0u8, 1] {
                    let (d_a, d_abar) = (deltas.get(x, a), deltas.get(x, 1 - a));
                    let ratio = -(d_abar / d_a);
                    let ln = crate::prob::to_f64(&ratio).ln();
                    if d_a.is_positive() {
                        // 1 iff e^ε ≥ ratio: flips only if ratio > 1.
                        if ln > 0.0 {
                            flips.push(Flip {
                                group: a,
                                ratio,
                                epsilon_star: ln,
                                below: 0,
                                above: 1,
                            });
                        }
                    } else if ln >= 0.0 {
                        // 1 iff e^ε ≤ ratio: flips if ratio ≥ 1.
                        flips.push(Flip {
                            group: a,
                            ratio,
                            epsilon_star: ln,
                            below: 1,
                            above: 0,
                        });
                    }
                }
            }
            XThreshold {
                x,
                case,
                ratio_0_over_1,
                ratio_1_over_0,
                flips,
            }
        })
        .collect();
    ThresholdTable { rows }
}
