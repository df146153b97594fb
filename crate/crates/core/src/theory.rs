//! Assumption checkers, the obfuscated Γ table, and the verdict tying the
//! baseline and LDP metrics to the theorem statements.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::{independence_check, GammaTable, JointDistribution};
use crate::metrics::{fairness_report, sandwiched, MetricsError};
use crate::model::{baseline_predictor, ldp_predictor_closed_form};
use crate::prob::to_f64;
use crate::rr::RRParams;

/// Absolute tolerance used by [`check_reliable_y_tolerance`] by default.
pub const DEFAULT_RELIABLE_Y_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UniformDiscrimination {
    /// `direction` is +1 when group 1 is favoured somewhere, −1 for group
    /// 0, and 0 when all defined comparisons are ties.
    Holds { direction: i8 },
    Violated { favours_1_at: usize, favours_0_at: usize },
    /// No x has both Γ values defined.
    Vacuous,
}

impl UniformDiscrimination {
    pub fn holds(&self) -> bool {
        !matches!(self, UniformDiscrimination::Violated { .. })
    }

    pub fn direction(&self) -> Option<i8> {
        match self {
            UniformDiscrimination::Holds { direction } => Some(*direction),
            UniformDiscrimination::Vacuous => Some(0),
            UniformDiscrimination::Violated { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReliableY {
    Holds,
    /// `deviation = P[Y=1|x,A=1] − P[Y=1|x,A=0]` at the first offending x.
    Violated { x: usize, deviation: BigRational },
}

impl ReliableY {
    pub fn holds(&self) -> bool {
        matches!(self, ReliableY::Holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssumptionReport {
    pub uniform_discrimination: UniformDiscrimination,
    pub reliable_y: ReliableY,
    pub x_independent_a: bool,
}

fn sign_of(v: &BigRational) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

fn uniform_from_gammas(gammas: &GammaTable) -> UniformDiscrimination {
    let mut favours_1 = None;
    let mut favours_0 = None;
    let mut defined = false;
    for x in 0..gammas.nx() {
        let (Some(g1), Some(g0)) = (gammas.get(x, 1), gammas.get(x, 0)) else {
            continue;
        };
        defined = true;
        match sign_of(&(g1 - g0)) {
            1 => {
                favours_1.get_or_insert(x);
            }
            -1 => {
                favours_0.get_or_insert(x);
            }
            _ => {}
        }
    }
    match (favours_1, favours_0) {
        (Some(favours_1_at), Some(favours_0_at)) => UniformDiscrimination::Violated {
            favours_1_at,
            favours_0_at,
        },
        (Some(_), None) => UniformDiscrimination::Holds { direction: 1 },
        (None, Some(_)) => UniformDiscrimination::Holds { direction: -1 },
        (None, None) if defined => UniformDiscrimination::Holds { direction: 0 },
        (None, None) => UniformDiscrimination::Vacuous,
    }
}

pub fn check_uniform_discrimination(dist: &JointDistribution) -> UniformDiscrimination {
    uniform_from_gammas(&crate::distribution::gamma_table(dist))
}

fn positive_rate(dist: &JointDistribution, x: usize, a: u8) -> Option<BigRational> {
    let mass = dist.cell_mass(x, a);
    (!mass.is_zero()).then(|| dist.p(1, x, a) / mass)
}

fn reliable_y_with(dist: &JointDistribution, ok: impl Fn(&BigRational) -> bool) -> ReliableY {
    for x in 0..dist.nx() {
        if let (Some(r1), Some(r0)) = (positive_rate(dist, x, 1), positive_rate(dist, x, 0)) {
            let deviation = r1 - r0;
            if !ok(&deviation) {
                return ReliableY::Violated { x, deviation };
            }
        }
    }
    ReliableY::Holds
}

/// Exact check of `P[Y=1|x,A=1] = P[Y=1|x,A=0]` on every x where both
/// cells carry mass.
pub fn check_reliable_y(dist: &JointDistribution) -> ReliableY {
    reliable_y_with(dist, |d| d.is_zero())
}

/// Same as [`check_reliable_y`] with an absolute tolerance, for empirical
/// distributions.
pub fn check_reliable_y_tolerance(dist: &JointDistribution, tolerance: f64) -> ReliableY {
    reliable_y_with(dist, |d| to_f64(d).abs() <= tolerance)
}

pub fn assumption_report(dist: &JointDistribution) -> AssumptionReport {
    AssumptionReport {
        uniform_discrimination: check_uniform_discrimination(dist),
        reliable_y: check_reliable_y(dist),
        x_independent_a: independence_check(dist).independent,
    }
}

/// Γ computed on the obfuscated distribution, written in terms of the
/// original one:
/// `Γ'^x_a = (pΔ^x_a + (1−p)Δ^x_ā) / (pP[x,a] + (1−p)P[x,ā])`.
pub fn gamma_prime(dist: &JointDistribution, params: &RRParams) -> GammaTable {
    let p = params.retention_rational();
    let q = BigRational::from_integer(1.into()) - &p;
    let values = (0..dist.nx())
        .map(|x| {
            [0u8, 1].map(|a| {
                let b = 1 - a;
                let den = &p * dist.cell_mass(x, a) + &q * dist.cell_mass(x, b);
                (!den.is_zero()).then(|| (&p * dist.delta(x, a) + &q * dist.delta(x, b)) / den)
            })
        })
        .collect();
    GammaTable::from_values(values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Unchanged,
    PartiallyReduced,
    Eliminated,
    Flipped,
    /// Same sign, larger magnitude.
    Amplified,
}

impl Regime {
    pub fn classify(sd: &BigRational, sd_prime: &BigRational) -> Regime {
        if sd == sd_prime {
            Regime::Unchanged
        } else if sd_prime.is_zero() {
            Regime::Eliminated
        } else if sign_of(sd) * sign_of(sd_prime) < 0 {
            Regime::Flipped
        } else if sd_prime.abs() < sd.abs() {
            Regime::PartiallyReduced
        } else {
            Regime::Amplified
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Unchanged => "unchanged",
            Regime::PartiallyReduced => "partially-reduced",
            Regime::Eliminated => "eliminated",
            Regime::Flipped => "flipped",
            Regime::Amplified => "amplified",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// CSD' between 0 and CSD, per x.
    CsdSandwich,
    /// SD' between 0 and SD when X ⊥ A and uniform discrimination hold.
    SdSandwichIndependent,
    /// SD' ≤ SD (or ≥, or =) by the uniform-discrimination direction.
    SdOrdering,
    /// EOD' between 0 and EOD under reliable Y.
    EodSandwich,
}

impl Theorem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::CsdSandwich => "csd-sandwich",
            Theorem::SdSandwichIndependent => "sd-sandwich-independent",
            Theorem::SdOrdering => "sd-ordering",
            Theorem::EodSandwich => "eod-sandwich",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Holds,
    Violated { detail: String },
    /// A premise failed; `conclusion_holds` records whether the
    /// conclusion happened to hold anyway.
    NotApplicable { premise: String, conclusion_holds: bool },
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Holds => "pass",
            CheckStatus::Violated { .. } => "fail",
            CheckStatus::NotApplicable { .. } => "not-applicable",
        }
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, CheckStatus::Violated { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremCheck {
    pub theorem: Theorem,
    pub status: CheckStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Paradox {
    /// Every CSD points one way (weakly, at least one strictly) while SD
    /// points the other way.
    AssociationReversal,
    /// Every CSD is 0 while SD is not.
    Yule,
}

impl Paradox {
    pub fn detect(sd: &BigRational, csd: &[i8]) -> Option<Paradox> {
        let s = sign_of(sd);
        if s == 0 {
            return None;
        }
        if csd.iter().all(|&c| c == 0) {
            return Some(Paradox::Yule);
        }
        let opposite = -s;
        (csd.iter().all(|&c| c == 0 || c == opposite)).then_some(Paradox::AssociationReversal)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Paradox::AssociationReversal => "association-reversal",
            Paradox::Yule => "yule",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub epsilon: f64,
    pub retention: f64,
    pub regime: Regime,
    pub sd: (BigRational, BigRational),
    pub csd: Vec<(i8, i8)>,
    pub eod: Option<(BigRational, BigRational)>,
    pub accuracy: (BigRational, BigRational),
    pub theorems: Vec<TheoremCheck>,
    pub paradox: Option<Paradox>,
    pub paradox_prime: Option<Paradox>,
    /// Cells whose LDP prediction sits within the float tie tolerance of a
    /// flip threshold.
    pub boundary_cells: Vec<(usize, u8)>,
    pub assumptions: AssumptionReport,
}

impl Verdict {
    pub fn theorem(&self, t: Theorem) -> &CheckStatus {
        &self
            .theorems
            .iter()
            .find(|c| c.theorem == t)
            .expect("every theorem is checked")
            .status
    }

    pub fn has_violation(&self) -> bool {
        self.theorems.iter().any(|c| c.status.is_violation())
    }
}

fn status(premise: Option<&str>, conclusion: bool, detail: impl FnOnce() -> String) -> CheckStatus {
    match premise {
        Some(p) => CheckStatus::NotApplicable {
            premise: p.to_string(),
            conclusion_holds: conclusion,
        },
        None if conclusion => CheckStatus::Holds,
        None => CheckStatus::Violated { detail: detail() },
    }
}

/// Baseline and LDP metrics of the majority-vote model, the regime, and
/// every theorem checked against its premises.
pub fn theorem_verdict(dist: &JointDistribution, params: &RRParams) -> Result<Verdict, MetricsError> {
    let base_pred = baseline_predictor(dist);
    let ldp_pred = ldp_predictor_closed_form(dist, params);
    let base = fairness_report(&base_pred, dist)?;
    let ldp = fairness_report(&ldp_pred, dist)?;
    let assumptions = assumption_report(dist);
    let csd: Vec<(i8, i8)> = base.csd.iter().copied().zip(ldp.csd.iter().copied()).collect();
    let eod = base.eod.clone().zip(ldp.eod.clone());

    let mut theorems = Vec::with_capacity(4);
    let bad_x: Vec<usize> = (0..csd.len())
        .filter(|&x| !sandwiched(&csd[x].0, &csd[x].1))
        .collect();
    theorems.push(TheoremCheck {
        theorem: Theorem::CsdSandwich,
        status: status(None, bad_x.is_empty(), || {
            format!("CSD' outside [0, CSD] at x={}", dist.x_domain()[bad_x[0]])
        }),
    });

    let sd_sandwich = sandwiched(&base.sd, &ldp.sd);
    let premise = if !assumptions.uniform_discrimination.holds() {
        Some("uniform discrimination violated")
    } else if !assumptions.x_independent_a {
        Some("X and A dependent")
    } else {
        None
    };
    theorems.push(TheoremCheck {
        theorem: Theorem::SdSandwichIndependent,
        status: status(premise, sd_sandwich, || "SD' outside [0, SD]".into()),
    });

    let direction = assumptions.uniform_discrimination.direction();
    let ordered = match direction {
        Some(1) | None => ldp.sd <= base.sd,
        Some(-1) => base.sd <= ldp.sd,
        Some(_) => base.sd == ldp.sd,
    };
    theorems.push(TheoremCheck {
        theorem: Theorem::SdOrdering,
        status: status(
            direction.is_none().then_some("uniform discrimination violated"),
            ordered,
            || format!("SD/SD' ordering broken for direction {}", direction.unwrap_or(0)),
        ),
    });

    let eod_premise = if !assumptions.reliable_y.holds() {
        Some("reliable Y violated")
    } else if eod.is_none() {
        Some("EOD undefined")
    } else {
        None
    };
    let eod_ok = eod.as_ref().is_some_and(|(e, e2)| sandwiched(e, e2));
    theorems.push(TheoremCheck {
        theorem: Theorem::EodSandwich,
        status: status(eod_premise, eod_ok, || "EOD' outside [0, EOD]".into()),
    });

    Ok(Verdict {
        epsilon: params.epsilon(),
        retention: params.retention(),
        regime: Regime::classify(&base.sd, &ldp.sd),
        paradox: Paradox::detect(&base.sd, &base.csd),
        paradox_prime: Paradox::detect(&ldp.sd, &ldp.csd),
        sd: (base.sd, ldp.sd),
        csd,
        eod,
        accuracy: (base.accuracy, ldp.accuracy),
        theorems,
        boundary_cells: ldp_pred.boundary_cells().to_vec(),
        assumptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::gamma_table;
    use crate::prob::ratio;
    use crate::scenarios::builtin_scenario;

    fn dist(name: &str) -> JointDistribution {
        builtin_scenario(name).unwrap().dist
    }

    #[test]
    fn german_violates_uniform_discrimination() {
        assert_eq!(
            check_uniform_discrimination(&dist("german")),
            UniformDiscrimination::Violated { favours_1_at: 1, favours_0_at: 0 }
        );
    }

    #[test]
    fn s1_direction() {
        assert_eq!(
            check_uniform_discrimination(&dist("S1")),
            UniformDiscrimination::Holds { direction: 1 }
        );
        let sym = JointDistribution::from_fn(vec!["0".into(), "1".into()], |y, x, _| {
            ratio(1 + y as i64 + 2 * x as i64, 20)
        })
        .unwrap();
        assert_eq!(
            check_uniform_discrimination(&sym),
            UniformDiscrimination::Holds { direction: 0 }
        );
        assert_eq!(check_reliable_y(&sym), ReliableY::Holds);
    }

    #[test]
    fn vacuous_when_no_shared_support() {
        let d = JointDistribution::from_fn(vec!["0".into(), "1".into()], |y, x, a| {
            if (x as u8) == a && y == 1 { ratio(1, 2) } else { ratio(0, 1) }
        })
        .unwrap();
        assert_eq!(check_uniform_discrimination(&d), UniformDiscrimination::Vacuous);
    }

    #[test]
    fn reliable_y_checks() {
        assert!(!check_reliable_y(&dist("S3")).holds());
        assert!(!check_reliable_y(&dist("S5")).holds());
        match check_reliable_y(&dist("S7")) {
            ReliableY::Violated { x, deviation } => {
                assert_eq!(x, 0);
                assert_eq!(deviation, ratio(9, 14));
            }
            other => panic!("{other:?}"),
        }
        assert!(check_reliable_y_tolerance(&dist("S7"), 1.0).holds());
    }

    #[test]
    fn gamma_prime_values() {
        let d = dist("S1");
        let p = RRParams::from_retention(ratio(3, 4)).unwrap();
        let g = gamma_prime(&d, &p);
        assert_eq!(g.get(0, 1), Some(&ratio(3, 4)));
        assert_eq!(g.get(0, 0), Some(&ratio(-1, 8)));
        let id = RRParams::from_retention(ratio(1, 1)).unwrap();
        for name in ["S1", "S6", "german", "lsac"] {
            let d = dist(name);
            assert_eq!(gamma_prime(&d, &id), gamma_table(&d));
        }
    }

    #[test]
    fn regime_classification() {
        let r = |a: i64, b: i64| Regime::classify(&ratio(a, 100), &ratio(b, 100));
        assert_eq!(r(50, 50), Regime::Unchanged);
        assert_eq!(r(50, 0), Regime::Eliminated);
        assert_eq!(r(40, -34), Regime::Flipped);
        assert_eq!(r(40, 20), Regime::PartiallyReduced);
        assert_eq!(r(-40, -60), Regime::Amplified);
        assert_eq!(r(0, 0), Regime::Unchanged);
        assert_eq!(r(0, 10), Regime::Amplified);
    }

    #[test]
    fn s1_verdict_at_half() {
        let v = theorem_verdict(&dist("S1"), &RRParams::from_epsilon(0.5).unwrap()).unwrap();
        assert_eq!(v.regime, Regime::Eliminated);
        assert_eq!(v.theorem(Theorem::CsdSandwich), &CheckStatus::Holds);
        assert_eq!(v.theorem(Theorem::SdSandwichIndependent), &CheckStatus::Holds);
        assert_eq!(v.theorem(Theorem::SdOrdering), &CheckStatus::Holds);
        // Reliable Y fails on S1 at x=0, yet EOD' = EOD = 0.
        assert_eq!(
            v.theorem(Theorem::EodSandwich),
            &CheckStatus::NotApplicable {
                premise: "reliable Y violated".into(),
                conclusion_holds: true
            }
        );
        assert_eq!(v.csd, vec![(1, 0), (0, 0)]);
    }

    #[test]
    fn s5_verdict_amplified_flip() {
        let v = theorem_verdict(&dist("S5"), &RRParams::from_epsilon(0.3).unwrap()).unwrap();
        assert_eq!(v.regime, Regime::Flipped);
        assert_eq!(v.sd, (ratio(2, 5), ratio(-12, 25)));
        assert!(v.sd.1.abs() > v.sd.0.abs());
        assert_eq!(v.theorem(Theorem::SdOrdering), &CheckStatus::Holds);
        assert!(matches!(v.theorem(Theorem::EodSandwich), CheckStatus::NotApplicable { .. }));
    }

    #[test]
    fn s4_yule_persists() {
        let d = dist("S4");
        for eps in crate::scenarios::SYNTHETIC_EPS_GRID {
            let v = theorem_verdict(&d, &RRParams::from_epsilon(eps).unwrap()).unwrap();
            assert_eq!(v.regime, Regime::Unchanged);
            assert_eq!(v.csd, vec![(0, 0), (0, 0)]);
            assert_eq!(v.paradox, Some(Paradox::Yule));
            assert_eq!(v.paradox_prime, Some(Paradox::Yule));
        }
    }

    #[test]
    fn german_verdict_marks_premises() {
        let v = theorem_verdict(&dist("german"), &RRParams::from_epsilon(1.0).unwrap()).unwrap();
        assert!(matches!(
            v.theorem(Theorem::SdOrdering),
            CheckStatus::NotApplicable { premise, .. } if premise == "uniform discrimination violated"
        ));
        assert!(!v.has_violation());
    }

    #[test]
    fn paradox_detection() {
        assert_eq!(Paradox::detect(&ratio(1, 5), &[-1, 0]), Some(Paradox::AssociationReversal));
        assert_eq!(Paradox::detect(&ratio(1, 5), &[0, 0]), Some(Paradox::Yule));
        assert_eq!(Paradox::detect(&ratio(1, 5), &[1, -1]), None);
        assert_eq!(Paradox::detect(&ratio(0, 1), &[0, 0]), None);
    }
}
