//! Report documents emitted by the CLI and their CSV / JSON encodings.
//!
//! Every real number is rounded to 12 significant digits before it enters
//! a document, so a JSON report parses back into an equal value.

use std::collections::BTreeMap;
use std::io::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use ldpfair::distribution::{gamma_table, independence_check, JointDistribution};
use ldpfair::metrics::{acceptance_rate, true_positive_rate, FairnessReport};
use ldpfair::model::{flip_thresholds, PredictionTable};
use ldpfair::prob::{fraction_string, to_f64};
use ldpfair::scenarios::{Scenario, ScenarioKind};
use ldpfair::sim::{aggregate, ExperimentConfig, SweepResult};
use ldpfair::theory::{
    assumption_report, CheckStatus, ReliableY, UniformDiscrimination, Verdict,
};
use ldpfair::verify::SuiteReport;

pub const SWEEP_CSV_HEADER: [&str; 9] = [
    "scenario",
    "epsilon",
    "run",
    "metric",
    "group_or_x",
    "baseline",
    "ldp",
    "analytic_baseline",
    "analytic_ldp",
];

/// Rounds to 12 significant digits.
pub fn sig12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

fn sig12_str(v: f64) -> String {
    sig12(v).to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Num {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl Num {
    pub fn exact(r: &BigRational) -> Num {
        Num {
            value: sig12(to_f64(r)),
            exact: Some(fraction_string(r)),
        }
    }

    pub fn real(v: f64) -> Num {
        Num {
            value: sig12(v),
            exact: None,
        }
    }
}

fn label(dist: &JointDistribution, x: usize) -> String {
    dist.x_domain()[x].clone()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub name: String,
    pub kind: String,
    pub x_domain: Vec<String>,
    pub default_eps_grid: Vec<f64>,
    pub notes: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioList {
    pub scenarios: Vec<ScenarioDoc>,
}

pub fn scenario_list(all: &[Scenario]) -> ScenarioList {
    ScenarioList {
        scenarios: all
            .iter()
            .map(|s| ScenarioDoc {
                name: s.name.to_string(),
                kind: match s.kind {
                    ScenarioKind::Synthetic => "synthetic",
                    ScenarioKind::RealWorld => "real-world",
                }
                .to_string(),
                x_domain: s.dist.x_domain().to_vec(),
                default_eps_grid: s.default_eps_grid(),
                notes: s.notes.to_string(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    pub favours_1: String,
    pub favours_0: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaDoc {
    pub a1: Option<Num>,
    pub a0: Option<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformDoc {
    /// `holds`, `violated` or `vacuous`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Witnesses>,
    pub gamma: BTreeMap<String, GammaDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliableDoc {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsDoc {
    pub uniform_discrimination: UniformDoc,
    pub reliable_y: ReliableDoc,
    pub x_independent_a: bool,
    pub independence_max_deviation: Num,
}

impl AssumptionsDoc {
    pub fn uniform_violated(&self) -> bool {
        self.uniform_discrimination.status == "violated"
    }
}

pub fn assumptions_doc(dist: &JointDistribution) -> AssumptionsDoc {
    let report = assumption_report(dist);
    let gammas = gamma_table(dist);
    let gamma = (0..dist.nx())
        .map(|x| {
            (
                label(dist, x),
                GammaDoc {
                    a1: gammas.get(x, 1).map(Num::exact),
                    a0: gammas.get(x, 0).map(Num::exact),
                },
            )
        })
        .collect();
    let uniform_discrimination = match report.uniform_discrimination {
        UniformDiscrimination::Holds { direction } => UniformDoc {
            status: "holds".into(),
            direction: Some(direction),
            witnesses: None,
            gamma,
        },
        UniformDiscrimination::Violated { favours_1_at, favours_0_at } => UniformDoc {
            status: "violated".into(),
            direction: None,
            witnesses: Some(Witnesses {
                favours_1: label(dist, favours_1_at),
                favours_0: label(dist, favours_0_at),
            }),
            gamma,
        },
        UniformDiscrimination::Vacuous => UniformDoc {
            status: "vacuous".into(),
            direction: None,
            witnesses: None,
            gamma,
        },
    };
    let reliable_y = match report.reliable_y {
        ReliableY::Holds => ReliableDoc {
            status: "holds".into(),
            x: None,
            deviation: None,
        },
        ReliableY::Violated { x, deviation } => ReliableDoc {
            status: "violated".into(),
            x: Some(label(dist, x)),
            deviation: Some(Num::exact(&deviation)),
        },
    };
    AssumptionsDoc {
        uniform_discrimination,
        reliable_y,
        x_independent_a: report.x_independent_a,
        independence_max_deviation: Num::exact(&independence_check(dist).max_deviation),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionsReport {
    pub scenario: String,
    pub x_domain: Vec<String>,
    pub assumptions: AssumptionsDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremDoc {
    pub theorem: String,
    /// `pass`, `fail` or `not-applicable`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion_holds: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub epsilon: f64,
    pub retention: f64,
    pub regime: String,
    pub sd_pair: [Num; 2],
    pub csd_pairs: BTreeMap<String, [i8; 2]>,
    pub eod_pair: Option<[Num; 2]>,
    pub accuracy_pair: [Num; 2],
    pub theorems: Vec<TheoremDoc>,
    pub paradox: Option<String>,
    pub paradox_prime: Option<String>,
    /// `(x, a)` cells decided within the ε tie tolerance.
    pub boundary_cells: Vec<(String, u8)>,
}

pub fn verdict_doc(dist: &JointDistribution, v: &Verdict) -> VerdictDoc {
    VerdictDoc {
        epsilon: sig12(v.epsilon),
        retention: sig12(v.retention),
        regime: v.regime.as_str().to_string(),
        sd_pair: [Num::exact(&v.sd.0), Num::exact(&v.sd.1)],
        csd_pairs: v
            .csd
            .iter()
            .enumerate()
            .map(|(x, &(a, b))| (label(dist, x), [a, b]))
            .collect(),
        eod_pair: v.eod.as_ref().map(|(a, b)| [Num::exact(a), Num::exact(b)]),
        accuracy_pair: [Num::exact(&v.accuracy.0), Num::exact(&v.accuracy.1)],
        theorems: v
            .theorems
            .iter()
            .map(|t| {
                let (premise, conclusion_holds, detail) = match &t.status {
                    CheckStatus::Holds => (None, None, None),
                    CheckStatus::Violated { detail } => (None, None, Some(detail.clone())),
                    CheckStatus::NotApplicable { premise, conclusion_holds } => {
                        (Some(premise.clone()), Some(*conclusion_holds), None)
                    }
                };
                TheoremDoc {
                    theorem: t.theorem.as_str().to_string(),
                    status: t.status.as_str().to_string(),
                    premise,
                    conclusion_holds,
                    detail,
                }
            })
            .collect(),
        paradox: v.paradox.map(|p| p.as_str().to_string()),
        paradox_prime: v.paradox_prime.map(|p| p.as_str().to_string()),
        boundary_cells: v
            .boundary_cells
            .iter()
            .map(|&(x, a)| (label(dist, x), a))
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub sd: Num,
    pub sd_prime: Vec<Num>,
    pub csd: BTreeMap<String, i8>,
    pub csd_prime: BTreeMap<String, Vec<i8>>,
    pub eod: Option<Num>,
    pub eod_prime: Vec<Option<Num>>,
    pub accuracy: Num,
    pub accuracy_prime: Vec<Num>,
}

/// Acceptance and true-positive rates per group (`a0`, `a1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerGroupDoc {
    pub acceptance_rate: BTreeMap<String, Num>,
    pub acceptance_rate_prime: BTreeMap<String, Vec<Num>>,
    pub tpr: BTreeMap<String, Option<Num>>,
    pub tpr_prime: BTreeMap<String, Vec<Option<Num>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub scenario: String,
    pub x_domain: Vec<String>,
    /// Primed metrics and verdicts are aligned with this list.
    pub epsilon: Vec<f64>,
    pub metrics: MetricsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_group: Option<PerGroupDoc>,
    pub assumptions: AssumptionsDoc,
    pub verdict: Vec<VerdictDoc>,
}

/// One analytic point: the LDP predictor and the verdict at one ε.
pub struct AnalyticPoint {
    pub epsilon: f64,
    pub table: PredictionTable,
    pub report: FairnessReport,
    pub verdict: Verdict,
}

fn group_key(a: u8) -> String {
    format!("a{a}")
}

pub fn analyze_report(
    scenario: &str,
    dist: &JointDistribution,
    baseline_table: &PredictionTable,
    baseline: &FairnessReport,
    points: &[AnalyticPoint],
    per_group: bool,
) -> AnalyzeReport {
    let labels = dist.x_domain();
    let metrics = MetricsDoc {
        sd: Num::exact(&baseline.sd),
        sd_prime: points.iter().map(|p| Num::exact(&p.report.sd)).collect(),
        csd: labels.iter().cloned().zip(baseline.csd.iter().copied()).collect(),
        csd_prime: labels
            .iter()
            .enumerate()
            .map(|(x, l)| (l.clone(), points.iter().map(|p| p.report.csd[x]).collect()))
            .collect(),
        eod: baseline.eod.as_ref().map(Num::exact),
        eod_prime: points.iter().map(|p| p.report.eod.as_ref().map(Num::exact)).collect(),
        accuracy: Num::exact(&baseline.accuracy),
        accuracy_prime: points.iter().map(|p| Num::exact(&p.report.accuracy)).collect(),
    };
    let per_group = per_group.then(|| {
        let acc = |t: &PredictionTable, a| acceptance_rate(t, dist, a).ok().map(|r| Num::exact(&r));
        let tpr = |t: &PredictionTable, a| true_positive_rate(t, dist, a).ok().map(|r| Num::exact(&r));
        PerGroupDoc {
            acceptance_rate: [0u8, 1]
                .iter()
                .filter_map(|&a| acc(baseline_table, a).map(|v| (group_key(a), v)))
                .collect(),
            acceptance_rate_prime: [0u8, 1]
                .iter()
                .map(|&a| (group_key(a), points.iter().filter_map(|p| acc(&p.table, a)).collect()))
                .collect(),
            tpr: [0u8, 1].iter().map(|&a| (group_key(a), tpr(baseline_table, a))).collect(),
            tpr_prime: [0u8, 1]
                .iter()
                .map(|&a| (group_key(a), points.iter().map(|p| tpr(&p.table, a)).collect()))
                .collect(),
        }
    });
    AnalyzeReport {
        scenario: scenario.to_string(),
        x_domain: labels.to_vec(),
        epsilon: points.iter().map(|p| sig12(p.epsilon)).collect(),
        metrics,
        per_group,
        assumptions: assumptions_doc(dist),
        verdict: points.iter().map(|p| verdict_doc(dist, &p.verdict)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipDoc {
    pub group: u8,
    pub ratio: Num,
    pub epsilon_star: f64,
    pub below: u8,
    pub above: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRowDoc {
    pub x: String,
    pub case: String,
    pub ratio_0_over_1: Option<Num>,
    pub ratio_1_over_0: Option<Num>,
    pub governing_epsilon: Option<f64>,
    pub flips: Vec<FlipDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsReport {
    pub scenario: String,
    pub rows: Vec<ThresholdRowDoc>,
}

pub fn thresholds_report(scenario: &str, dist: &JointDistribution) -> ThresholdsReport {
    let table = flip_thresholds(dist);
    ThresholdsReport {
        scenario: scenario.to_string(),
        rows: table
            .rows
            .iter()
            .map(|r| ThresholdRowDoc {
                x: label(dist, r.x),
                case: r.case.as_str().to_string(),
                ratio_0_over_1: r.ratio_0_over_1.as_ref().map(Num::exact),
                ratio_1_over_0: r.ratio_1_over_0.as_ref().map(Num::exact),
                governing_epsilon: r.governing_epsilon().map(sig12),
                flips: r
                    .flips
                    .iter()
                    .map(|f| FlipDoc {
                        group: f.group,
                        ratio: Num::exact(&f.ratio),
                        epsilon_star: sig12(f.epsilon_star),
                        below: f.below,
                        above: f.above,
                    })
                    .collect(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetricsDoc {
    pub sd: Num,
    pub csd: BTreeMap<String, i8>,
    pub eod: Option<Num>,
    pub accuracy: Num,
}

fn run_metrics(dist_labels: &[String], r: &FairnessReport) -> RunMetricsDoc {
    RunMetricsDoc {
        sd: Num::exact(&r.sd),
        csd: dist_labels.iter().cloned().zip(r.csd.iter().copied()).collect(),
        eod: r.eod.as_ref().map(Num::exact),
        accuracy: Num::exact(&r.accuracy),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunDoc {
    pub run: usize,
    pub epsilon: f64,
    pub baseline: RunMetricsDoc,
    pub ldp: RunMetricsDoc,
    pub ldp_matches_analytic: bool,
    pub absent_cells: Vec<(String, u8)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub epsilon: f64,
    pub metric: String,
    pub group_or_x: Option<String>,
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
    pub analytic: Option<f64>,
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub scenario: String,
    pub epsilon: Vec<f64>,
    pub config: ExperimentConfig,
    /// Runs whose LDP table equals the closed form, per ε.
    pub table_matches: Vec<usize>,
    pub summary: Vec<SummaryDoc>,
    pub runs: Vec<RunDoc>,
}

pub fn simulate_report(result: &SweepResult) -> SimulateReport {
    let labels = &result.x_domain;
    SimulateReport {
        scenario: result.scenario.clone(),
        epsilon: result.eps_grid.iter().map(|&e| sig12(e)).collect(),
        config: result.config.clone(),
        table_matches: (0..result.eps_grid.len()).map(|i| result.table_matches(i)).collect(),
        summary: aggregate(result)
            .into_iter()
            .map(|r| SummaryDoc {
                epsilon: sig12(r.epsilon),
                metric: r.metric,
                group_or_x: r.group_or_x,
                mean: sig12(r.mean),
                sd: sig12(r.sd),
                count: r.count,
                analytic: r.analytic.map(sig12),
                gap: r.gap.map(sig12),
            })
            .collect(),
        runs: result
            .runs
            .iter()
            .map(|r| RunDoc {
                run: r.run,
                epsilon: sig12(result.eps_grid[r.eps_index]),
                baseline: run_metrics(labels, &r.baseline),
                ldp: run_metrics(labels, &r.ldp),
                ldp_matches_analytic: r.ldp_matches_analytic,
                absent_cells: r
                    .ldp_model
                    .absent_cells
                    .iter()
                    .map(|&(x, a)| (labels[x].clone(), a))
                    .collect(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteDoc {
    pub suite: String,
    pub cases: usize,
    pub violations: usize,
    pub examples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub draws: usize,
    pub seed: u64,
    pub random: Vec<SuiteDoc>,
    pub builtin: Vec<SuiteDoc>,
    pub violations: usize,
}

pub fn verify_report(draws: usize, seed: u64, random: &[SuiteReport], builtin: &[SuiteReport]) -> VerifyReport {
    let doc = |r: &SuiteReport| SuiteDoc {
        suite: r.name.to_string(),
        cases: r.cases,
        violations: r.violations,
        examples: r.examples.clone(),
    };
    VerifyReport {
        draws,
        seed,
        random: random.iter().map(doc).collect(),
        builtin: builtin.iter().map(doc).collect(),
        violations: random.iter().chain(builtin).map(|r| r.violations).sum(),
    }
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, doc: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    writeln!(out)
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().from_writer(out)
}

fn opt(v: Option<&Num>) -> String {
    v.map(|n| sig12_str(n.value)).unwrap_or_default()
}

/// Sweep-schema rows for an analytic report: baseline and LDP columns
/// carry the closed-form values, duplicated in the analytic columns.
pub fn write_analyze_csv(out: &mut dyn Write, r: &AnalyzeReport) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    let m = &r.metrics;
    for (i, &eps) in r.epsilon.iter().enumerate() {
        let mut row = |metric: &str, key: &str, base: String, ldp: String| {
            w.write_record([
                r.scenario.as_str(),
                &sig12_str(eps),
                "",
                metric,
                key,
                &base,
                &ldp,
                &base,
                &ldp,
            ])
        };
        row("sd", "", opt(Some(&m.sd)), opt(Some(&m.sd_prime[i])))?;
        for x in &r.x_domain {
            row("csd", x, m.csd[x].to_string(), m.csd_prime[x][i].to_string())?;
        }
        row("eod", "", opt(m.eod.as_ref()), opt(m.eod_prime[i].as_ref()))?;
        row("accuracy", "", opt(Some(&m.accuracy)), opt(Some(&m.accuracy_prime[i])))?;
        if let Some(g) = &r.per_group {
            for key in ["a0", "a1"] {
                row(
                    "acceptance_rate",
                    key,
                    opt(g.acceptance_rate.get(key)),
                    opt(g.acceptance_rate_prime.get(key).and_then(|v| v.get(i))),
                )?;
                row(
                    "tpr",
                    key,
                    opt(g.tpr.get(key).and_then(Option::as_ref)),
                    opt(g.tpr_prime.get(key).and_then(|v| v[i].as_ref())),
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_simulate_csv(out: &mut dyn Write, r: &SimulateReport, analytic: &AnalyzeReport) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    let a = &analytic.metrics;
    for run in &r.runs {
        let i = r
            .epsilon
            .iter()
            .position(|&e| e == run.epsilon)
            .expect("run epsilon is on the grid");
        let mut row = |metric: &str, key: &str, cols: [String; 4]| {
            w.write_record([
                r.scenario.as_str(),
                &sig12_str(run.epsilon),
                &run.run.to_string(),
                metric,
                key,
                &cols[0],
                &cols[1],
                &cols[2],
                &cols[3],
            ])
        };
        let (b, l) = (&run.baseline, &run.ldp);
        row("sd", "", [opt(Some(&b.sd)), opt(Some(&l.sd)), opt(Some(&a.sd)), opt(Some(&a.sd_prime[i]))])?;
        for x in &r.runs[0].baseline.csd.keys().cloned().collect::<Vec<_>>() {
            row(
                "csd",
                x,
                [
                    b.csd[x].to_string(),
                    l.csd[x].to_string(),
                    a.csd[x].to_string(),
                    a.csd_prime[x][i].to_string(),
                ],
            )?;
        }
        row(
            "eod",
            "",
            [opt(b.eod.as_ref()), opt(l.eod.as_ref()), opt(a.eod.as_ref()), opt(a.eod_prime[i].as_ref())],
        )?;
        row(
            "accuracy",
            "",
            [
                opt(Some(&b.accuracy)),
                opt(Some(&l.accuracy)),
                opt(Some(&a.accuracy)),
                opt(Some(&a.accuracy_prime[i])),
            ],
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_thresholds_csv(out: &mut dyn Write, r: &ThresholdsReport) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["scenario", "x", "case", "group", "ratio", "epsilon_star", "below", "above"])?;
    for row in &r.rows {
        if row.flips.is_empty() {
            w.write_record([r.scenario.as_str(), &row.x, &row.case, "", "", "", "", ""])?;
        }
        for f in &row.flips {
            w.write_record([
                r.scenario.as_str(),
                &row.x,
                &row.case,
                &f.group.to_string(),
                f.ratio.exact.as_deref().unwrap_or_default(),
                &sig12_str(f.epsilon_star),
                &f.below.to_string(),
                &f.above.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_assumptions_csv(out: &mut dyn Write, r: &AssumptionsReport) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["scenario", "check", "status", "detail"])?;
    let a = &r.assumptions;
    let u = &a.uniform_discrimination;
    let detail = match (&u.direction, &u.witnesses) {
        (Some(d), _) => format!("direction={d}"),
        (_, Some(wit)) => format!("favours_1_at={};favours_0_at={}", wit.favours_1, wit.favours_0),
        _ => String::new(),
    };
    w.write_record([r.scenario.as_str(), "uniform_discrimination", &u.status, &detail])?;
    let ry = &a.reliable_y;
    let detail = match (&ry.x, &ry.deviation) {
        (Some(x), Some(d)) => format!("x={x};deviation={}", d.exact.as_deref().unwrap_or_default()),
        _ => String::new(),
    };
    w.write_record([r.scenario.as_str(), "reliable_y", &ry.status, &detail])?;
    w.write_record([
        r.scenario.as_str(),
        "x_independent_a",
        if a.x_independent_a { "holds" } else { "violated" },
        &format!("max_deviation={}", a.independence_max_deviation.exact.as_deref().unwrap_or_default()),
    ])?;
    for (x, g) in &u.gamma {
        for (key, v) in [("gamma_a1", &g.a1), ("gamma_a0", &g.a0)] {
            w.write_record([
                r.scenario.as_str(),
                &format!("{key}[{x}]"),
                if v.is_some() { "defined" } else { "undefined" },
                &v.as_ref().and_then(|n| n.exact.clone()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_scenarios_csv(out: &mut dyn Write, r: &ScenarioList) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["name", "kind", "x_domain_size", "notes"])?;
    for s in &r.scenarios {
        w.write_record([s.name.as_str(), &s.kind, &s.x_domain.len().to_string(), &s.notes])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_verify_csv(out: &mut dyn Write, r: &VerifyReport) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["scope", "suite", "cases", "violations"])?;
    for (scope, suites) in [("random", &r.random), ("builtin", &r.builtin)] {
        for s in suites {
            w.write_record([scope, &s.suite, &s.cases.to_string(), &s.violations.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
