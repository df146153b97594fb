//! Seeded random distributions and the theorem property suites run by
//! `verify`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distribution::{delta_table, gamma_table, JointDistribution};
use crate::metrics::{eod_closed_form, fairness_report, sandwiched, sd_closed_form};
use crate::model::{baseline_predictor, ldp_predictor_closed_form};
use crate::prob::ratio;
use crate::rr::{obfuscate_distribution, RRParams};
use crate::scenarios::all_scenarios;
use crate::sim::derive_seed;
use crate::theory::{
    check_reliable_y, check_uniform_discrimination, gamma_prime, UniformDiscrimination,
};

/// Retention probabilities every suite is run at.
pub fn retention_grid() -> Vec<BigRational> {
    vec![ratio(1, 2), ratio(5, 8), ratio(3, 4), ratio(9, 10), ratio(1, 1)]
}

fn weights<R: Rng>(rng: &mut R, k: usize) -> Vec<u64> {
    // Coarse weights produce ties, zero cells and zero deltas; fine ones
    // approximate a uniform draw on the simplex.
    let coarse = rng.gen_bool(0.5);
    loop {
        let w: Vec<u64> = (0..k)
            .map(|_| {
                if coarse {
                    rng.gen_range(0..=4)
                } else if rng.gen_bool(0.03) {
                    0
                } else {
                    (-rng.gen::<f64>().max(1e-12).ln() * 1000.0).round() as u64
                }
            })
            .collect();
        if w.iter().any(|&v| v > 0) {
            return w;
        }
    }
}

fn normalize(w: &[u64]) -> Vec<BigRational> {
    let total: u64 = w.iter().sum();
    w.iter()
        .map(|&v| BigRational::new(BigInt::from(v), BigInt::from(total)))
        .collect()
}

fn labels(nx: usize) -> Vec<String> {
    (0..nx).map(|x| x.to_string()).collect()
}

fn both_groups(d: &JointDistribution) -> bool {
    d.group_mass(0).is_positive() && d.group_mass(1).is_positive()
}

/// Cell masses drawn on the simplex; both groups have mass.
pub fn random_simplex<R: Rng>(rng: &mut R, nx: usize) -> JointDistribution {
    loop {
        let cells = normalize(&weights(rng, 4 * nx));
        let d = JointDistribution::from_cells(labels(nx), cells).expect("normalized weights");
        if both_groups(&d) {
            return d;
        }
    }
}

fn conditional<R: Rng>(rng: &mut R) -> BigRational {
    if rng.gen_bool(0.5) {
        ratio(rng.gen_range(0..=4), 4)
    } else {
        ratio(rng.gen_range(0..=1000), 1000)
    }
}

/// `P[x,a]` from `P[x]·P[a]` with a free `P[Y=1 | x, a]`.
pub fn random_independent<R: Rng>(rng: &mut R, nx: usize) -> JointDistribution {
    let px = normalize(&weights(rng, nx));
    let pa1 = ratio(rng.gen_range(1..=9), 10);
    let pa = [BigRational::one() - &pa1, pa1];
    let q: Vec<[BigRational; 2]> = (0..nx).map(|_| [conditional(rng), conditional(rng)]).collect();
    JointDistribution::from_fn(labels(nx), |y, x, a| {
        let qy = &q[x][a as usize];
        let qy = if y == 1 { qy.clone() } else { BigRational::one() - qy };
        &px[x] * &pa[a as usize] * qy
    })
    .expect("product of marginals")
}

/// Free `P[x,a]` with a shared `P[Y=1 | x]`, so reliable `Y` holds.
pub fn random_reliable_y<R: Rng>(rng: &mut R, nx: usize) -> JointDistribution {
    loop {
        let pxa = normalize(&weights(rng, 2 * nx));
        let q: Vec<BigRational> = (0..nx).map(|_| conditional(rng)).collect();
        let d = JointDistribution::from_fn(labels(nx), |y, x, a| {
            let qy = if y == 1 { q[x].clone() } else { BigRational::one() - &q[x] };
            &pxa[x * 2 + a as usize] * qy
        })
        .expect("composed distribution");
        if both_groups(&d) {
            return d;
        }
    }
}

fn reject<R: Rng>(
    rng: &mut R,
    nx: usize,
    draw: fn(&mut R, usize) -> JointDistribution,
) -> JointDistribution {
    loop {
        let d = draw(rng, nx);
        if check_uniform_discrimination(&d).holds() && both_groups(&d) {
            return d;
        }
    }
}

/// Simplex draw conditioned on uniform discrimination.
pub fn random_uniform_discrimination<R: Rng>(rng: &mut R, nx: usize) -> JointDistribution {
    reject(rng, nx, random_simplex)
}

/// Independent draw conditioned on uniform discrimination.
pub fn random_independent_uniform<R: Rng>(rng: &mut R, nx: usize) -> JointDistribution {
    reject(rng, nx, random_independent)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    /// Distribution × retention pairs checked.
    pub cases: usize,
    pub violations: usize,
    /// First few failure descriptions.
    pub examples: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

type Check = fn(&JointDistribution, &BigRational) -> Result<(), String>;

struct Suite {
    name: &'static str,
    draw: fn(&mut ChaCha8Rng, usize) -> JointDistribution,
    check: Check,
}

fn params(p: &BigRational) -> RRParams {
    RRParams::from_retention(p.clone()).expect("grid retention is valid")
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(what()) }
}

fn csd_sandwich(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    let base = crate::metrics::conditional_sd(&baseline_predictor(d));
    let ldp = crate::metrics::conditional_sd(&ldp_predictor_closed_form(d, &params(p)));
    for x in 0..d.nx() {
        ensure(sandwiched(&base[x], &ldp[x]), || {
            format!("x={x}: CSD={} CSD'={}", base[x], ldp[x])
        })?;
    }
    Ok(())
}

fn sd_pair(d: &JointDistribution, p: &BigRational) -> Result<(BigRational, BigRational), String> {
    let sd = |t| crate::metrics::statistical_disparity(&t, d).map_err(|e| e.to_string());
    Ok((sd(baseline_predictor(d))?, sd(ldp_predictor_closed_form(d, &params(p)))?))
}

fn sd_sandwich(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    let (sd, sd2) = sd_pair(d, p)?;
    ensure(sandwiched(&sd, &sd2), || format!("SD={sd} SD'={sd2}"))
}

fn sd_ordering(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    let (sd, sd2) = sd_pair(d, p)?;
    let ok = match check_uniform_discrimination(d).direction() {
        Some(1) => sd2 <= sd,
        Some(-1) => sd <= sd2,
        Some(_) => sd == sd2,
        None => return Err("drawn instance violates uniform discrimination".into()),
    };
    ensure(ok, || format!("SD={sd} SD'={sd2}"))
}

fn eod_sandwich(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    ensure(check_reliable_y(d).holds(), || "drawn instance violates reliable Y".into())?;
    let base = fairness_report(&baseline_predictor(d), d).map_err(|e| e.to_string())?;
    let ldp = fairness_report(&ldp_predictor_closed_form(d, &params(p)), d).map_err(|e| e.to_string())?;
    match (base.eod, ldp.eod) {
        (Some(e), Some(e2)) => ensure(sandwiched(&e, &e2), || format!("EOD={e} EOD'={e2}")),
        // Undefined EOD: nothing to check.
        _ => Ok(()),
    }
}

fn lemma1(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    let q = BigRational::one() - p;
    let before = delta_table(d);
    let after = delta_table(&obfuscate_distribution(d, &params(p)));
    for x in 0..d.nx() {
        for a in 0..2u8 {
            let expected = p * before.get(x, a) + &q * before.get(x, 1 - a);
            ensure(after.get(x, a) == &expected, || format!("x={x} a={a}"))?;
        }
    }
    Ok(())
}

fn diff_sign(g: &crate::distribution::GammaTable, x: usize) -> Option<i8> {
    let d = g.get(x, 1)? - g.get(x, 0)?;
    Some(if d.is_positive() { 1 } else if d.is_negative() { -1 } else { 0 })
}

fn lemma3(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    let before = gamma_table(d);
    let after = gamma_prime(d, &params(p));
    // At p = 1/2 both groups see the same mixture, so Γ'_1 = Γ'_0.
    let collapsed = *p == ratio(1, 2);
    for x in 0..d.nx() {
        if let (Some(s), Some(s2)) = (diff_sign(&before, x), diff_sign(&after, x)) {
            let expected = if collapsed { 0 } else { s };
            ensure(s2 == expected, || format!("x={x}: sign {s} became {s2}"))?;
        }
    }
    Ok(())
}

fn closed_forms(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    let rr = params(p);
    let (sd, sd2) = sd_pair(d, p)?;
    let c = sd_closed_form(d, None).map_err(|e| e.to_string())?;
    let c2 = sd_closed_form(d, Some(&rr)).map_err(|e| e.to_string())?;
    ensure(c.value == sd, || format!("SD closed form {} vs {sd}", c.value))?;
    ensure(c2.value == sd2, || format!("SD' closed form {} vs {sd2}", c2.value))
}

fn eod_closed_forms(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    let rr = params(p);
    let base = fairness_report(&baseline_predictor(d), d).map_err(|e| e.to_string())?;
    let ldp = fairness_report(&ldp_predictor_closed_form(d, &rr), d).map_err(|e| e.to_string())?;
    let (Some(e), Some(e2)) = (base.eod, ldp.eod) else {
        return Ok(());
    };
    let c = eod_closed_form(d, None).map_err(|e| e.to_string())?;
    let c2 = eod_closed_form(d, Some(&rr)).map_err(|e| e.to_string())?;
    ensure(c == e && c2 == e2, || format!("EOD {c}/{e}, EOD' {c2}/{e2}"))
}

fn channel(d: &JointDistribution, p: &BigRational) -> Result<(), String> {
    let o = obfuscate_distribution(d, &params(p));
    let total: BigRational = o.cells().iter().sum();
    ensure(total.is_one(), || format!("mass {total}"))?;
    for y in 0..2u8 {
        for x in 0..d.nx() {
            let m = |t: &JointDistribution| t.p(y, x, 0) + t.p(y, x, 1);
            ensure(m(d) == m(&o), || format!("P[y={y}, x={x}] changed"))?;
        }
    }
    Ok(())
}

fn suites() -> Vec<Suite> {
    vec![
        Suite { name: "csd-sandwich", draw: random_simplex, check: csd_sandwich },
        Suite { name: "sd-sandwich-independent", draw: random_independent_uniform, check: sd_sandwich },
        Suite { name: "sd-ordering", draw: random_uniform_discrimination, check: sd_ordering },
        Suite { name: "eod-sandwich", draw: random_reliable_y, check: eod_sandwich },
        Suite { name: "delta-mixing", draw: random_simplex, check: lemma1 },
        Suite { name: "gamma-order-preserved", draw: random_simplex, check: lemma3 },
        Suite { name: "sd-closed-form", draw: random_uniform_discrimination, check: closed_forms },
        Suite { name: "eod-closed-form", draw: random_reliable_y, check: eod_closed_forms },
        Suite { name: "channel-marginals", draw: random_simplex, check: channel },
    ]
}

pub fn suite_names() -> Vec<&'static str> {
    suites().iter().map(|s| s.name).collect()
}

const MAX_EXAMPLES: usize = 5;

/// Runs every suite on `draws` random distributions (`|x_domain|` cycling
/// through 2..=5) at every retention in [`retention_grid`]. Deterministic
/// in `seed`.
pub fn run_suites(draws: usize, seed: u64) -> Vec<SuiteReport> {
    let grid = retention_grid();
    suites()
        .into_iter()
        .enumerate()
        .map(|(s, suite)| {
            let failures: Vec<String> = (0..draws)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i, s));
                    let d = (suite.draw)(&mut rng, 2 + i % 4);
                    grid.iter()
                        .filter_map(|p| {
                            (suite.check)(&d, p)
                                .err()
                                .map(|e| format!("draw {i}, p={p}: {e}\n{}", d.to_json()))
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
            SuiteReport {
                name: suite.name,
                cases: draws * grid.len(),
                violations: failures.len(),
                examples: failures.into_iter().take(MAX_EXAMPLES).collect(),
            }
        })
        .collect()
}

/// Runs each suite on the builtin scenarios whose premises hold.
pub fn run_builtin_suites() -> Vec<SuiteReport> {
    let grid = retention_grid();
    let scenarios = all_scenarios();
    suites()
        .into_iter()
        .map(|suite| {
            let mut cases = 0;
            let mut failures = Vec::new();
            for s in &scenarios {
                let d = &s.dist;
                let premise = match suite.name {
                    "sd-sandwich-independent" => {
                        crate::distribution::independence_check(d).independent
                            && check_uniform_discrimination(d).holds()
                    }
                    "sd-ordering" | "sd-closed-form" => !matches!(
                        check_uniform_discrimination(d),
                        UniformDiscrimination::Violated { .. }
                    ),
                    "eod-sandwich" | "eod-closed-form" => check_reliable_y(d).holds(),
                    _ => true,
                };
                if !premise {
                    continue;
                }
                for p in &grid {
                    cases += 1;
                    if let Err(e) = (suite.check)(d, p) {
                        failures.push(format!("{}, p={p}: {e}", s.name));
                    }
                }
            }
            SuiteReport {
                name: suite.name,
                cases,
                violations: failures.len(),
                examples: failures.into_iter().take(MAX_EXAMPLES).collect(),
            }
        })
        .collect()
}
