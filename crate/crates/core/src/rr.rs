//! Binary randomized response on the sensitive attribute.
//!
//! `RR(a)` reports `a` with probability `p = e^ε / (e^ε + 1)` and the
//! flipped bit otherwise. Parameters come in two modes: a real `ε` (as
//! used by sweeps and the CLI) or an exact rational `p` (used wherever a
//! closed form is cross-checked, since `p` is irrational for rational
//! `ε > 0`).

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::distribution::JointDistribution;
use crate::prob::{render_rational, to_f64};

/// Absolute tolerance when comparing a real `ε` against `ln(ratio)`.
pub const EPSILON_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RrError {
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("epsilon must be finite, got {0}")]
    NonFiniteEpsilon(f64),
    #[error("retention probability must lie in [1/2, 1], got {0}")]
    RetentionOutOfRange(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RRParams {
    epsilon: f64,
    p: f64,
    p_exact: Option<BigRational>,
}

/// `e^ε`, i.e. `p / (1 − p)`, in the form the closed forms compare against.
#[derive(Clone, Debug, PartialEq)]
pub enum Odds {
    Exact(BigRational),
    /// `p = 1`.
    Infinite,
    /// Real `ε`; comparisons are made in log space.
    Real(f64),
}

/// Result of comparing the odds against a critical ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OddsComparison {
    pub ordering: Ordering,
    /// Set when a real `ε` lies within [`EPSILON_TIE_TOLERANCE`] of `ln(ratio)`.
    pub boundary: bool,
}

impl Odds {
    /// Compares `e^ε` with a strictly positive ratio.
    pub fn compare(&self, ratio: &BigRational) -> OddsComparison {
        debug_assert!(ratio.is_positive());
        match self {
            Odds::Exact(o) => OddsComparison {
                ordering: o.cmp(ratio),
                boundary: false,
            },
            Odds::Infinite => OddsComparison {
                ordering: Ordering::Greater,
                boundary: false,
            },
            Odds::Real(eps) => {
                let gap = eps - to_f64(ratio).ln();
                if gap.abs() <= EPSILON_TIE_TOLERANCE {
                    OddsComparison {
                        ordering: Ordering::Equal,
                        boundary: true,
                    }
                } else {
                    OddsComparison {
                        ordering: if gap > 0.0 {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        },
                        boundary: false,
                    }
                }
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Odds::Infinite)
    }
}

impl RRParams {
    /// Real-ε mode: `p = e^ε / (e^ε + 1)` in double precision.
    pub fn from_epsilon(epsilon: f64) -> Result<Self, RrError> {
        if epsilon.is_nan() || epsilon.is_infinite() {
            return Err(RrError::NonFiniteEpsilon(epsilon));
        }
        if epsilon < 0.0 {
            return Err(RrError::NegativeEpsilon(epsilon));
        }
        Ok(RRParams {
            epsilon,
            p: 1.0 / (1.0 + (-epsilon).exp()),
            p_exact: None,
        })
    }

    /// Exact mode: `p ∈ [1/2, 1]` given as a rational. `p = 1` means `ε = ∞`.
    pub fn from_retention(p: BigRational) -> Result<Self, RrError> {
        let half = BigRational::new(1.into(), 2.into());
        if p < half || p > BigRational::one() {
            return Err(RrError::RetentionOutOfRange(render_rational(&p)));
        }
        let pf = to_f64(&p);
        let epsilon = if p.is_one() {
            f64::INFINITY
        } else {
            (to_f64(&(&p / (BigRational::one() - &p)))).ln()
        };
        Ok(RRParams {
            epsilon,
            p: pf,
            p_exact: Some(p),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn retention(&self) -> f64 {
        self.p
    }

    pub fn exact_retention(&self) -> Option<&BigRational> {
        self.p_exact.as_ref()
    }

    /// `p` as a rational: the exact value, or the exact binary value of the
    /// double in real-ε mode.
    pub fn retention_rational(&self) -> BigRational {
        self.p_exact
            .clone()
            .unwrap_or_else(|| BigRational::from_float(self.p).expect("p is finite"))
    }

    pub fn odds(&self) -> Odds {
        match &self.p_exact {
            Some(p) if p.is_one() => Odds::Infinite,
            Some(p) => Odds::Exact(p / (BigRational::one() - p)),
            None => Odds::Real(self.epsilon),
        }
    }

    /// Checks the ε-LDP ratio bound `max(p, 1−p) / min(p, 1−p) ≤ e^ε`.
    pub fn satisfies_ldp_bound(&self) -> bool {
        match &self.p_exact {
            Some(p) => {
                let q = BigRational::one() - p;
                if q.is_zero() {
                    return true;
                }
                let bound = p.max(&q) / p.min(&q);
                self.odds().compare(&bound).ordering != Ordering::Less
            }
            None => {
                let (hi, lo) = (self.p.max(1.0 - self.p), self.p.min(1.0 - self.p));
                hi / lo <= self.epsilon.exp() * (1.0 + 1e-12)
            }
        }
    }

    /// The channel equivalent to applying `self` and then `next`:
    /// retention `pq + (1−p)(1−q)`.
    pub fn then(&self, next: &RRParams) -> RRParams {
        match (&self.p_exact, &next.p_exact) {
            (Some(p), Some(q)) => {
                let one = BigRational::one();
                let r = p * q + (&one - p) * (&one - q);
                RRParams::from_retention(r).expect("composition stays in [1/2, 1]")
            }
            _ => {
                let (p, q) = (self.p, next.p);
                let r = p * q + (1.0 - p) * (1.0 - q);
                let epsilon = if r >= 1.0 {
                    f64::INFINITY
                } else {
                    (r / (1.0 - r)).ln()
                };
                RRParams {
                    epsilon,
                    p: r,
                    p_exact: None,
                }
            }
        }
    }
}

/// Distribution of `(Y, X, A')` with `A' = RR(A)`:
/// `P'[y,x,a] = p·P[y,x,a] + (1−p)·P[y,x,ā]`.
pub fn obfuscate_distribution(dist: &JointDistribution, params: &RRParams) -> JointDistribution {
    let p = params.retention_rational();
    let q = BigRational::one() - &p;
    JointDistribution::from_fn(dist.x_domain().to_vec(), |y, x, a| {
        &p * dist.p(y, x, a) + &q * dist.p(y, x, 1 - a)
    })
    .expect("the RR channel preserves total mass")
}

/// Reports `a` with probability `p`, `1 − a` otherwise.
pub fn randomize_record<R: Rng + ?Sized>(a: u8, params: &RRParams, rng: &mut R) -> u8 {
    debug_assert!(a <= 1);
    if rng.gen::<f64>() < params.p {
        a
    } else {
        1 - a
    }
}

/// Seeded, random-access stream of per-record generators: record `i`
/// always consumes the ChaCha8 words at `2i, 2i+1` of the stream keyed by
/// `seed`, so its draw depends only on `(seed, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecordStream {
    seed: u64,
}

const CHUNK: usize = 4096;

impl RecordStream {
    pub fn new(seed: u64) -> Self {
        RecordStream { seed }
    }

    /// Generator positioned at record `index`; successive `gen::<f64>()`
    /// calls yield records `index, index + 1, ...`.
    pub fn rng_at(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(u128::from(index) * 2);
        rng
    }

    pub fn uniform(&self, index: u64) -> f64 {
        let mut rng = self.rng_at(index);
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Randomizes every bit; chunks run in parallel, results do not depend
    /// on scheduling.
    pub fn randomize(&self, bits: &[u8], params: &RRParams) -> Vec<u8> {
        let mut out = vec![0u8; bits.len()];
        out.par_chunks_mut(CHUNK)
            .zip(bits.par_chunks(CHUNK))
            .enumerate()
            .for_each(|(chunk, (dst, src))| {
                let mut rng = self.rng_at((chunk * CHUNK) as u64);
                for (d, &a) in dst.iter_mut().zip(src) {
                    *d = randomize_record(a, params, &mut rng);
                }
            });
        out
    }

    /// Sequential reference for [`RecordStream::randomize`].
    pub fn randomize_sequential(&self, bits: &[u8], params: &RRParams) -> Vec<u8> {
        let mut rng = self.rng_at(0);
        bits.iter()
            .map(|&a| randomize_record(a, params, &mut rng))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::delta_table;
    use crate::prob::ratio;
    use crate::scenarios::{builtin_scenario, SCENARIO_NAMES};

    #[test]
    fn retention_from_epsilon() {
        let p = RRParams::from_epsilon(3f64.ln()).unwrap();
        assert!((p.retention() - 0.75).abs() < 1e-15);
        assert_eq!(RRParams::from_epsilon(0.0).unwrap().retention(), 0.5);
        // 1 / (1 + e^-16)
        let p16 = RRParams::from_epsilon(16.0).unwrap().retention();
        assert!((p16 - 0.999_999_887_464_837_9).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert_eq!(
            RRParams::from_epsilon(-0.1),
            Err(RrError::NegativeEpsilon(-0.1))
        );
        assert!(matches!(
            RRParams::from_epsilon(f64::NAN),
            Err(RrError::NonFiniteEpsilon(_))
        ));
        assert!(matches!(
            RRParams::from_epsilon(f64::INFINITY),
            Err(RrError::NonFiniteEpsilon(_))
        ));
        assert!(RRParams::from_retention(ratio(2, 5)).is_err());
        assert!(RRParams::from_retention(ratio(11, 10)).is_err());
    }

    #[test]
    fn exact_retention_matches_epsilon() {
        let p = RRParams::from_retention(ratio(3, 4)).unwrap();
        assert!((p.epsilon() - 3f64.ln()).abs() < 1e-12);
        assert_eq!(p.odds(), Odds::Exact(ratio(3, 1)));
        let p1 = RRParams::from_retention(ratio(1, 1)).unwrap();
        assert_eq!(p1.odds(), Odds::Infinite);
        assert!(p1.epsilon().is_infinite());
        let half = RRParams::from_retention(ratio(1, 2)).unwrap();
        assert_eq!(half.epsilon(), 0.0);
    }

    #[test]
    fn real_odds_ties_within_tolerance() {
        let eps = (7f64 / 3.0).ln();
        let c = Odds::Real(eps).compare(&ratio(7, 3));
        assert_eq!(c.ordering, Ordering::Equal);
        assert!(c.boundary);
        let c = Odds::Real(eps + 1e-9).compare(&ratio(7, 3));
        assert_eq!(c.ordering, Ordering::Greater);
        assert!(!c.boundary);
    }

    #[test]
    fn ldp_bound_holds() {
        for p in [ratio(1, 2), ratio(5, 8), ratio(3, 4), ratio(9, 10), ratio(1, 1)] {
            assert!(RRParams::from_retention(p).unwrap().satisfies_ldp_bound());
        }
        for eps in [0.0, 0.1, 0.85, 2.0, 16.0] {
            assert!(RRParams::from_epsilon(eps).unwrap().satisfies_ldp_bound());
        }
    }

    #[test]
    fn identity_and_total_mixing() {
        let d = builtin_scenario("S3").unwrap().dist;
        let id = obfuscate_distribution(&d, &RRParams::from_retention(ratio(1, 1)).unwrap());
        assert_eq!(id, d);
        let mixed = obfuscate_distribution(&d, &RRParams::from_retention(ratio(1, 2)).unwrap());
        for y in 0..2 {
            for x in 0..d.nx() {
                let avg = (d.p(y, x, 0) + d.p(y, x, 1)) / BigRational::from_integer(2.into());
                assert_eq!(mixed.p(y, x, 0), &avg);
                assert_eq!(mixed.p(y, x, 1), &avg);
            }
        }
    }

    #[test]
    fn s1_channel_arithmetic() {
        let d = builtin_scenario("S1").unwrap().dist;
        let o = obfuscate_distribution(&d, &RRParams::from_retention(ratio(3, 4)).unwrap());
        assert_eq!(o.p(1, 0, 1), &ratio(2625, 10_000));
    }

    #[test]
    fn lemma1_and_marginals_on_builtins() {
        let ps = [ratio(1, 2), ratio(5, 8), ratio(3, 4), ratio(9, 10), ratio(1, 1)];
        for name in SCENARIO_NAMES {
            let d = builtin_scenario(name).unwrap().dist;
            let delta = delta_table(&d);
            for p in &ps {
                let params = RRParams::from_retention(p.clone()).unwrap();
                let o = obfuscate_distribution(&d, &params);
                let od = delta_table(&o);
                let q = BigRational::one() - p;
                for x in 0..d.nx() {
                    for a in 0..2u8 {
                        assert_eq!(
                            od.get(x, a),
                            &(p * delta.get(x, a) + &q * delta.get(x, 1 - a))
                        );
                    }
                    for y in 0..2u8 {
                        assert_eq!(o.p(y, x, 0) + o.p(y, x, 1), d.p(y, x, 0) + d.p(y, x, 1));
                    }
                }
            }
        }
    }

    #[test]
    fn composition_of_channels() {
        let d = builtin_scenario("S6").unwrap().dist;
        let p = RRParams::from_retention(ratio(3, 4)).unwrap();
        let q = RRParams::from_retention(ratio(9, 10)).unwrap();
        let twice = obfuscate_distribution(&obfuscate_distribution(&d, &p), &q);
        let once = obfuscate_distribution(&d, &p.then(&q));
        assert_eq!(twice, once);
        assert_eq!(p.then(&q).exact_retention(), Some(&ratio(7, 10)));
    }

    #[test]
    fn identity_channel_always_retains() {
        let params = RRParams::from_retention(ratio(1, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!((0..10_000).all(|_| randomize_record(1, &params, &mut rng) == 1));
    }

    fn retained_fraction(a: u8, params: &RRParams, seed: u64) -> f64 {
        let n = 1_000_000usize;
        let out = RecordStream::new(seed).randomize(&vec![a; n], params);
        out.iter().filter(|&&b| b == a).count() as f64 / n as f64
    }

    #[test]
    fn retention_concentrates() {
        // 3σ of Binomial(10^6, p) / 10^6.
        let f = retained_fraction(1, &RRParams::from_retention(ratio(3, 4)).unwrap(), 11);
        assert!((f - 0.75).abs() <= 0.0013, "{f}");
        let f = retained_fraction(0, &RRParams::from_retention(ratio(1, 2)).unwrap(), 12);
        assert!((f - 0.5).abs() <= 0.0015, "{f}");
    }

    #[test]
    fn parallel_matches_sequential() {
        let params = RRParams::from_epsilon(0.5).unwrap();
        let bits: Vec<u8> = (0..50_000).map(|i| (i % 3 == 0) as u8).collect();
        let s = RecordStream::new(99);
        assert_eq!(s.randomize(&bits, &params), s.randomize_sequential(&bits, &params));
        assert_ne!(
            s.randomize(&bits, &params),
            RecordStream::new(100).randomize(&bits, &params)
        );
    }

    #[test]
    fn record_draw_is_position_addressed() {
        let s = RecordStream::new(5);
        let mut rng = s.rng_at(0);
        let seq: Vec<f64> = (0..10).map(|_| rng.gen::<f64>()).collect();
        for (i, v) in seq.iter().enumerate() {
            assert_eq!(*v, s.uniform(i as u64));
        }
    }
}
