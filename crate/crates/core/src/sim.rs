//! Monte Carlo replication: sample records, obfuscate `A` on the training
//! split, fit majority-vote models on both versions, and score them on
//! the untouched test split.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{parse_distribution, DistributionError, JointDistribution};
use crate::metrics::{fairness_report, FairnessReport, MetricsError};
use crate::model::{baseline_predictor, ldp_predictor_closed_form, PredictionTable, Provenance};
use crate::prob::to_f64;
use crate::rr::{RRParams, RecordStream, RrError};
use crate::scenarios::{builtin_scenario, UnknownScenario};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    UnknownScenario(#[from] UnknownScenario),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Rr(#[from] RrError),
    #[error("run {run}, eps {epsilon}: {source}")]
    Metrics {
        run: usize,
        epsilon: f64,
        source: MetricsError,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Record {
    pub a: u8,
    pub x: usize,
    pub y: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    pub records: Vec<Record>,
    pub seed: u64,
    pub n: usize,
}

/// splitmix64 finalizer, used to derive independent stream keys.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one `(run, stream)` pair under `base`. Streams 0 and 1 are the
/// sample and the split; stream `2 + i` obfuscates at the i-th ε.
pub fn derive_seed(base: u64, run: usize, stream: usize) -> u64 {
    mix(mix(mix(base) ^ run as u64) ^ stream as u64)
}

const SAMPLE_CHUNK: usize = 4096;

/// `n` i.i.d. records by inverse CDF over the flattened `(y, x, a)` table.
pub fn sample(dist: &JointDistribution, n: usize, seed: u64) -> SampleSet {
    let mut cdf: Vec<f64> = dist
        .cells()
        .iter()
        .scan(0.0, |acc, c| {
            *acc += to_f64(c);
            Some(*acc)
        })
        .collect();
    // Pin the tail to 1 and keep zero-mass cells unreachable.
    let last = dist
        .cells()
        .iter()
        .rposition(|c| c != &num_traits::Zero::zero())
        .expect("a distribution has positive mass");
    for c in &mut cdf[last..] {
        *c = 1.0;
    }
    let nx = dist.nx();
    let stream = RecordStream::new(seed);
    let mut records = vec![Record { a: 0, x: 0, y: 0 }; n];
    records
        .par_chunks_mut(SAMPLE_CHUNK)
        .enumerate()
        .for_each(|(chunk, out)| {
            let mut rng = stream.rng_at((chunk * SAMPLE_CHUNK) as u64);
            for r in out {
                let u: f64 = rng.gen();
                let idx = cdf.partition_point(|&c| c <= u).min(last);
                // idx = (y·nx + x)·2 + a
                *r = Record {
                    a: (idx % 2) as u8,
                    x: (idx / 2) % nx,
                    y: (idx / 2 / nx) as u8,
                };
            }
        });
    SampleSet { records, seed, n }
}

/// Per-cell counts in `(y, x, a)` order.
fn counts(records: &[Record], a_values: Option<&[u8]>, nx: usize) -> Vec<u64> {
    let mut c = vec![0u64; 4 * nx];
    for (i, r) in records.iter().enumerate() {
        let a = a_values.map_or(r.a, |v| v[i]);
        c[(r.y as usize * nx + r.x) * 2 + a as usize] += 1;
    }
    c
}

/// Empirical distribution of the records, using their original `A`.
pub fn empirical_distribution(
    records: &[Record],
    x_domain: &[String],
) -> Result<JointDistribution, DistributionError> {
    JointDistribution::from_counts(x_domain.to_vec(), &counts(records, None, x_domain.len()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FittedModel {
    pub table: PredictionTable,
    /// `(x, a)` cells with no training records; they predict 0.
    pub absent_cells: Vec<(usize, u8)>,
}

/// Majority vote on empirical counts: `Ŷ = 1` iff `#(Y=1) ≥ #(Y=0)` in
/// the cell, and 0 for cells never seen. `a_values` replaces the records'
/// `A` (the obfuscated column) when given.
pub fn fit_majority(records: &[Record], a_values: Option<&[u8]>, nx: usize) -> FittedModel {
    let c = counts(records, a_values, nx);
    let mut absent_cells = Vec::new();
    let rows = (0..nx)
        .map(|x| {
            [0u8, 1].map(|a| {
                let pos = c[(nx + x) * 2 + a as usize];
                let neg = c[x * 2 + a as usize];
                if pos + neg == 0 {
                    absent_cells.push((x, a));
                    0
                } else {
                    u8::from(pos >= neg)
                }
            })
        })
        .collect();
    FittedModel {
        table: PredictionTable::new(rows, Provenance::Empirical),
        absent_cells,
    }
}

/// Train/test split by a seeded uniform shuffle. With `train_fraction = 1`
/// (or a split leaving no test records) the full sample is the test set.
pub fn split(records: &[Record], train_fraction: f64, seed: u64) -> (Vec<Record>, Vec<Record>) {
    let mut shuffled = records.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = shuffled.len();
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1.min(n), n);
    let test = if n_train == n {
        shuffled.clone()
    } else {
        shuffled[n_train..].to_vec()
    };
    shuffled.truncate(n_train);
    (shuffled, test)
}

fn default_n() -> usize {
    100_000
}

fn default_runs() -> usize {
    100
}

fn default_train_fraction() -> f64 {
    0.8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Builtin scenario name; exclusive with `dist`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// Path to a distribution document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<PathBuf>,
    /// Defaults to the scenario's grid (synthetic grid for documents).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// Thread count; `None` uses the global pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn for_scenario(name: &str) -> Self {
        ExperimentConfig {
            scenario: Some(name.to_string()),
            dist: None,
            eps_grid: None,
            n: default_n(),
            runs: default_runs(),
            seed: 0,
            train_fraction: default_train_fraction(),
            workers: None,
        }
    }

    pub fn from_json(json: &str) -> Result<Self, SimError> {
        serde_json::from_str(json).map_err(|e| SimError::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Resolves the scenario and grid and validates the numeric fields.
    pub fn resolve(&self) -> Result<(String, JointDistribution, Vec<f64>), SimError> {
        let (name, dist, default_grid) = match (&self.scenario, &self.dist) {
            (Some(_), Some(_)) => {
                return Err(SimError::InvalidConfig(
                    "scenario and dist are mutually exclusive".into(),
                ))
            }
            (None, None) => {
                return Err(SimError::InvalidConfig("one of scenario or dist is required".into()))
            }
            (Some(name), None) => {
                let s = builtin_scenario(name)?;
                let grid = s.default_eps_grid();
                (s.name.to_string(), s.dist, grid)
            }
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
                    path: path.clone(),
                    source,
                })?;
                let grid = crate::scenarios::SYNTHETIC_EPS_GRID.to_vec();
                (path.display().to_string(), parse_distribution(&text)?, grid)
            }
        };
        let grid = self.eps_grid.clone().unwrap_or(default_grid);
        if grid.is_empty() {
            return Err(SimError::InvalidConfig("eps_grid is empty".into()));
        }
        if let Some(e) = grid.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(SimError::InvalidConfig(format!("epsilon {e} is not a positive finite value")));
        }
        if self.runs == 0 {
            return Err(SimError::InvalidConfig("runs must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(SimError::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(SimError::InvalidConfig(format!(
                "train_fraction {} outside (0, 1]",
                self.train_fraction
            )));
        }
        if self.workers == Some(0) {
            return Err(SimError::InvalidConfig("workers must be at least 1".into()));
        }
        Ok((name, dist, grid))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub run: usize,
    pub eps_index: usize,
    pub baseline: FairnessReport,
    pub ldp: FairnessReport,
    pub baseline_model: FittedModel,
    pub ldp_model: FittedModel,
    /// Whether the empirical LDP table equals the closed-form one.
    pub ldp_matches_analytic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyticPoint {
    pub baseline: FairnessReport,
    pub ldp: FairnessReport,
    pub ldp_table: PredictionTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub scenario: String,
    pub x_domain: Vec<String>,
    pub eps_grid: Vec<f64>,
    pub config: ExperimentConfig,
    /// Ordered by run, then ε index.
    pub runs: Vec<RunResult>,
    /// One per ε, from the exact distribution.
    pub analytic: Vec<AnalyticPoint>,
}

impl SweepResult {
    pub fn at(&self, eps_index: usize) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter(move |r| r.eps_index == eps_index)
    }

    pub fn table_matches(&self, eps_index: usize) -> usize {
        self.at(eps_index).filter(|r| r.ldp_matches_analytic).count()
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<SweepResult, SimError> {
    let (name, dist, grid) = config.resolve()?;
    run_experiment_on(&name, &dist, &grid, config)
}

/// Runs the experiment on an explicit distribution and grid; the
/// scenario fields of `config` are ignored.
pub fn run_experiment_on(
    name: &str,
    dist: &JointDistribution,
    grid: &[f64],
    config: &ExperimentConfig,
) -> Result<SweepResult, SimError> {
    let params = grid
        .iter()
        .map(|&e| RRParams::from_epsilon(e))
        .collect::<Result<Vec<_>, _>>()?;
    let metric_err = |run: usize, epsilon: f64| move |source| SimError::Metrics { run, epsilon, source };

    let base_exact = fairness_report(&baseline_predictor(dist), dist)
        .map_err(metric_err(0, f64::INFINITY))?;
    let analytic = params
        .iter()
        .map(|p| {
            let t = ldp_predictor_closed_form(dist, p);
            Ok(AnalyticPoint {
                baseline: base_exact.clone(),
                ldp: fairness_report(&t, dist).map_err(metric_err(0, p.epsilon()))?,
                ldp_table: t,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    let one_run = |run: usize| -> Result<Vec<RunResult>, SimError> {
        let s = sample(dist, config.n, derive_seed(config.seed, run, 0));
        let (train, test) = split(&s.records, config.train_fraction, derive_seed(config.seed, run, 1));
        let test_dist = empirical_distribution(&test, dist.x_domain())?;
        let baseline_model = fit_majority(&train, None, dist.nx());
        let baseline = fairness_report(&baseline_model.table, &test_dist)
            .map_err(metric_err(run, f64::INFINITY))?;
        let a: Vec<u8> = train.iter().map(|r| r.a).collect();
        params
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let stream = RecordStream::new(derive_seed(config.seed, run, 2 + i));
                let a_prime = stream.randomize(&a, p);
                let ldp_model = fit_majority(&train, Some(&a_prime), dist.nx());
                let ldp = fairness_report(&ldp_model.table, &test_dist)
                    .map_err(metric_err(run, p.epsilon()))?;
                Ok(RunResult {
                    run,
                    eps_index: i,
                    baseline: baseline.clone(),
                    ldp,
                    ldp_matches_analytic: ldp_model.table.same_predictions(&analytic[i].ldp_table),
                    baseline_model: baseline_model.clone(),
                    ldp_model,
                })
            })
            .collect()
    };
    let collect = || -> Result<Vec<RunResult>, SimError> {
        let per_run = (0..config.runs)
            .into_par_iter()
            .map(one_run)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(per_run.into_iter().flatten().collect())
    };
    let runs = match config.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?
            .install(collect)?,
        None => collect()?,
    };
    Ok(SweepResult {
        scenario: name.to_string(),
        x_domain: dist.x_domain().to_vec(),
        eps_grid: grid.to_vec(),
        config: config.clone(),
        runs,
        analytic,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub epsilon: f64,
    pub metric: String,
    /// x label for per-x metrics.
    pub group_or_x: Option<String>,
    pub mean: f64,
    /// Sample standard deviation (0 for a single run).
    pub sd: f64,
    pub count: usize,
    pub analytic: Option<f64>,
    pub gap: Option<f64>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean, sample standard deviation, count and gap to the analytic value
/// per `(ε, metric)`. Runs with an undefined metric are left out of that
/// metric's count.
pub fn aggregate(result: &SweepResult) -> Vec<SummaryRow> {
    type Getter = fn(&FairnessReport) -> Option<f64>;
    let scalar: [(&str, bool, Getter); 6] = [
        ("sd", false, |r| Some(to_f64(&r.sd))),
        ("sd_prime", true, |r| Some(to_f64(&r.sd))),
        ("eod", false, |r| r.eod.as_ref().map(to_f64)),
        ("eod_prime", true, |r| r.eod.as_ref().map(to_f64)),
        ("accuracy", false, |r| Some(to_f64(&r.accuracy))),
        ("accuracy_prime", true, |r| Some(to_f64(&r.accuracy))),
    ];
    let mut rows = Vec::new();
    for (i, &epsilon) in result.eps_grid.iter().enumerate() {
        let runs: Vec<&RunResult> = result.at(i).collect();
        let exact = &result.analytic[i];
        let mut push = |metric: String, group_or_x: Option<String>, values: Vec<f64>, analytic: Option<f64>| {
            if values.is_empty() {
                return;
            }
            let (mean, sd) = mean_sd(&values);
            rows.push(SummaryRow {
                epsilon,
                metric,
                group_or_x,
                mean,
                sd,
                count: values.len(),
                analytic,
                gap: analytic.map(|a| (mean - a).abs()),
            });
        };
        for (metric, primed, get) in scalar {
            let pick = |r: &RunResult| get(if primed { &r.ldp } else { &r.baseline });
            let values = runs.iter().filter_map(|r| pick(r)).collect();
            let analytic = get(if primed { &exact.ldp } else { &exact.baseline });
            push(metric.to_string(), None, values, analytic);
        }
        for (x, label) in result.x_domain.iter().enumerate() {
            for (metric, primed) in [("csd", false), ("csd_prime", true)] {
                let values = runs
                    .iter()
                    .map(|r| f64::from(if primed { r.ldp.csd[x] } else { r.baseline.csd[x] }))
                    .collect();
                let exact_csd = if primed { exact.ldp.csd[x] } else { exact.baseline.csd[x] };
                push(metric.to_string(), Some(label.clone()), values, Some(f64::from(exact_csd)));
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::builtin_scenario;

    fn s1() -> JointDistribution {
        builtin_scenario("S1").unwrap().dist
    }

    fn small_config(name: &str, eps: &[f64], n: usize, runs: usize) -> ExperimentConfig {
        ExperimentConfig {
            eps_grid: Some(eps.to_vec()),
            n,
            runs,
            seed: 7,
            ..ExperimentConfig::for_scenario(name)
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = s1();
        assert_eq!(sample(&d, 5000, 3), sample(&d, 5000, 3));
        assert_ne!(sample(&d, 5000, 3).records, sample(&d, 5000, 4).records);
    }

    #[test]
    fn sample_marginal_concentrates() {
        let s = sample(&s1(), 100_000, 11);
        let a1 = s.records.iter().filter(|r| r.a == 1).count() as f64 / 1e5;
        assert!((a1 - 0.7).abs() < 0.0043, "{a1}");
        // Zero-mass cells never appear.
        assert!(!s.records.iter().any(|r| r.y == 0 && r.a == 1));
    }

    #[test]
    fn point_mass_sample() {
        let d = JointDistribution::from_fn(vec!["u".into(), "v".into()], |y, x, a| {
            num_rational::BigRational::from_integer(i64::from(y == 0 && x == 1 && a == 1).into())
        })
        .unwrap();
        let s = sample(&d, 1000, 0);
        assert!(s.records.iter().all(|r| *r == Record { a: 1, x: 1, y: 0 }));
    }

    #[test]
    fn split_sizes() {
        let s = sample(&s1(), 1000, 1);
        let (train, test) = split(&s.records, 0.8, 5);
        assert_eq!((train.len(), test.len()), (800, 200));
        let (train, test) = split(&s.records, 1.0, 5);
        assert_eq!((train.len(), test.len()), (1000, 1000));
    }

    #[test]
    fn fit_majority_ties_and_absent_cells() {
        let recs = [
            Record { a: 1, x: 0, y: 1 },
            Record { a: 1, x: 0, y: 0 },
            Record { a: 0, x: 0, y: 0 },
        ];
        let m = fit_majority(&recs, None, 2);
        assert_eq!(m.table.rows(), &[[0, 1], [0, 0]]);
        assert_eq!(m.absent_cells, vec![(1, 0), (1, 1)]);
        // Obfuscated column moves the negative record into group 1 and
        // leaves a 1-1 tie in group 0.
        let m = fit_majority(&recs, Some(&[0, 0, 1]), 2);
        assert_eq!(m.table.rows(), &[[1, 0], [0, 0]]);
    }

    #[test]
    fn evaluation_uses_original_attribute() {
        // The test-set distribution is the same at every ε; only the
        // training column is randomized.
        let cfg = small_config("S1", &[0.1, 8.0], 2000, 2);
        let res = run_experiment(&cfg).unwrap();
        for run in 0..2 {
            let r: Vec<&RunResult> = res.runs.iter().filter(|r| r.run == run).collect();
            assert_eq!(r[0].baseline, r[1].baseline);
        }
        let s = sample(&s1(), 2000, derive_seed(7, 0, 0));
        let (_, test) = split(&s.records, 0.8, derive_seed(7, 0, 1));
        let test_dist = empirical_distribution(&test, s1().x_domain()).unwrap();
        let expected = fairness_report(&res.runs[0].baseline_model.table, &test_dist).unwrap();
        assert_eq!(res.runs[0].baseline, expected);
    }

    #[test]
    fn reruns_and_worker_counts_agree() {
        let mut cfg = small_config("S2", &[0.5, 2.0], 3000, 6);
        let a = run_experiment(&cfg).unwrap();
        assert_eq!(a, run_experiment(&cfg).unwrap());
        cfg.workers = Some(1);
        let one = run_experiment(&cfg).unwrap();
        cfg.workers = Some(3);
        let three = run_experiment(&cfg).unwrap();
        assert_eq!(one.runs, three.runs);
        assert_eq!(one.runs, a.runs);
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for run in 0..100 {
            for stream in 0..12 {
                assert!(seen.insert(derive_seed(0, run, stream)));
            }
        }
    }

    #[test]
    fn aggregate_single_run() {
        let res = run_experiment(&small_config("S1", &[8.0], 1000, 1)).unwrap();
        let rows = aggregate(&res);
        let sd = rows.iter().find(|r| r.metric == "sd").unwrap();
        assert_eq!(sd.count, 1);
        assert_eq!(sd.sd, 0.0);
        assert_eq!(sd.mean, to_f64(&res.runs[0].baseline.sd));
        assert_eq!(sd.analytic, Some(0.5));
        assert!(rows.iter().any(|r| r.metric == "csd_prime" && r.group_or_x.as_deref() == Some("0")));
    }

    #[test]
    fn s1_means_near_analytic() {
        let res = run_experiment(&small_config("S1", &[0.5, 8.0], 100_000, 20)).unwrap();
        let rows = aggregate(&res);
        let get = |eps: f64, m: &str| rows.iter().find(|r| r.epsilon == eps && r.metric == m).unwrap();
        assert!(get(8.0, "sd").gap.unwrap() < 0.02);
        assert!(get(8.0, "sd_prime").gap.unwrap() < 0.02);
        assert!(get(0.5, "sd_prime").mean.abs() < 0.02);
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::for_scenario("S1");
            f(&mut c);
            matches!(c.resolve(), Err(SimError::InvalidConfig(_)))
        };
        assert!(bad(|c| c.eps_grid = Some(vec![])));
        assert!(bad(|c| c.eps_grid = Some(vec![1.0, -0.5])));
        assert!(bad(|c| c.runs = 0));
        assert!(bad(|c| c.train_fraction = 0.0));
        assert!(bad(|c| c.dist = Some("x.json".into())));
        let mut c = ExperimentConfig::for_scenario("nope");
        assert!(matches!(c.resolve(), Err(SimError::UnknownScenario(_))));
        c.scenario = Some("s5".into());
        assert_eq!(c.resolve().unwrap().2.len(), 10);
    }

    #[test]
    fn config_json_round_trip() {
        let c = small_config("S2", &[0.5, 2.0], 10, 3);
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
        let parsed = ExperimentConfig::from_json(r#"{"scenario": "S1"}"#).unwrap();
        assert_eq!(parsed, ExperimentConfig::for_scenario("S1"));
        assert!(ExperimentConfig::from_json(r#"{"scenario": "S1", "bogus": 1}"#).is_err());
    }
}
