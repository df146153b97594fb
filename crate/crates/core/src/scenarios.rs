//! Builtin scenario registry: the seven synthetic tables and the four
//! coarse real-world tables (Compas, Adult, German credit, LSAC).

use thiserror::Error;

use crate::distribution::{DistributionDoc, JointDistribution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scenario {0:?}")]
pub struct UnknownScenario(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Synthetic,
    RealWorld,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: &'static str,
    pub kind: ScenarioKind,
    pub dist: JointDistribution,
    pub notes: &'static str,
}

pub const SCENARIO_NAMES: [&str; 11] = [
    "S1", "S2", "S3", "S4", "S5", "S6", "S7", "compas", "adult", "german", "lsac",
];

/// Privacy levels swept for the synthetic tables.
pub const SYNTHETIC_EPS_GRID: [f64; 10] = [16.0, 8.0, 2.0, 1.0, 0.85, 0.5, 0.4, 0.3, 0.2, 0.1];
/// Privacy levels swept for the real-world tables.
pub const REAL_EPS_GRID: [f64; 8] = [16.0, 8.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.5];

struct Entry {
    name: &'static str,
    kind: ScenarioKind,
    // Rows per x value: P[Y=1,A=1], P[Y=1,A=0], P[Y=0,A=1], P[Y=0,A=0].
    y1a1: &'static [&'static str],
    y1a0: &'static [&'static str],
    y0a1: &'static [&'static str],
    y0a0: &'static [&'static str],
    notes: &'static str,
}

const REGISTRY: [Entry; 11] = [
    Entry {
        name: "S1",
        kind: ScenarioKind::Synthetic,
        y1a1: &["0.35", "0.35"],
        y1a0: &["0", "0.15"],
        y0a1: &["0", "0"],
        y0a0: &["0.15", "0"],
        notes: "X independent of A. Uniform discrimination holds (group 1 favoured); \
                reliable-Y fails at x=0. Group-0 prediction at x=0 flips at eps = ln(7/3).",
    },
    Entry {
        name: "S2",
        kind: ScenarioKind::Synthetic,
        y1a1: &["0.28", "0.38"],
        y1a0: &["0", "0.12"],
        y0a1: &["0", "0"],
        y0a0: &["0.22", "0"],
        notes: "X depends on A. Uniform discrimination holds (group 1 favoured); \
                reliable-Y fails at x=0. Flip at eps = ln(14/11).",
    },
    Entry {
        name: "S3",
        kind: ScenarioKind::Synthetic,
        y1a1: &["0.03", "0.17", "0.03"],
        y1a0: &["0", "0.17", "0.03"],
        y0a1: &["0.24", "0.03", "0"],
        y0a0: &["0.1", "0.2", "0"],
        notes: "X depends on A; SD changes sign under obfuscation with |SD'| < |SD| \
                (0.40 -> -0.34 below eps = ln(14/3)). Reliable-Y fails.",
    },
    Entry {
        name: "S4",
        kind: ScenarioKind::Synthetic,
        y1a1: &["0", "0.4"],
        y1a0: &["0.03", "0.34"],
        y0a1: &["0.03", "0.07"],
        y0a0: &["0.13", "0"],
        notes: "Yule's association paradox: CSD_x = 0 for every x while SD = 0.26. \
                Obfuscation leaves every metric unchanged.",
    },
    Entry {
        name: "S5",
        kind: ScenarioKind::Synthetic,
        y1a1: &["0.03", "0.17", "0.03"],
        y1a0: &["0", "0.17", "0.03"],
        y0a1: &["0.24", "0.03", "0"],
        y0a0: &["0.03", "0.27", "0"],
        notes: "X depends on A; SD changes sign and grows in magnitude under obfuscation \
                (0.40 -> -0.48 below eps = ln(1.4)). Reliable-Y fails.",
    },
    Entry {
        name: "S6",
        kind: ScenarioKind::Synthetic,
        y1a1: &["0.05", "0.08", "0.09", "0.13", "0.14"],
        y1a0: &["0.02", "0.03", "0.06", "0.03", "0.04"],
        y0a1: &["0.04", "0.02", "0.01", "0.06", "0"],
        y0a0: &["0.06", "0.04", "0.02", "0.08", "0"],
        notes: "Five-valued X depending on A; three opposite-signed cells with distinct \
                flip thresholds.",
    },
    Entry {
        name: "S7",
        kind: ScenarioKind::Synthetic,
        y1a1: &["0.05", "0.07", "0.04", "0.06", "0.05"],
        y1a0: &["0.05", "0.07", "0.04", "0.06", "0.05"],
        y0a1: &["0", "0.06", "0.05", "0.02", "0"],
        y0a0: &["0.09", "0.04", "0.06", "0.02", "0.12"],
        notes: "Meant to satisfy reliable-Y, but the table as printed gives \
                P[Y=1|x=0,A=1] = 1 vs P[Y=1|x=0,A=0] = 5/14, so the checker reports a \
                violation. The table is kept as printed.",
    },
    Entry {
        name: "compas",
        kind: ScenarioKind::RealWorld,
        y1a1: &["0.12", "0.03"],
        y1a0: &["0.06", "0.03"],
        y0a1: &["0.15", "0.1"],
        y0a0: &["0.25", "0.26"],
        notes: "Coarse Compas table: A=1 non-black, X=1 many priors, Y=1 low risk score.",
    },
    Entry {
        name: "adult",
        kind: ScenarioKind::RealWorld,
        y1a1: &["0.06", "0.53"],
        y1a0: &["0.02", "0.21"],
        y0a1: &["0.03", "0.06"],
        y0a0: &["0.02", "0.07"],
        notes: "Coarse Adult table: A=1 men, X=1 high education, Y=1 high income.",
    },
    Entry {
        name: "german",
        kind: ScenarioKind::RealWorld,
        y1a1: &["0.23", "0.27"],
        y1a0: &["0.08", "0.13"],
        y0a1: &["0.06", "0.13"],
        y0a0: &["0.01", "0.09"],
        notes: "Coarse German credit table: A=1 male, X=1 duly repaid. Violates uniform \
                discrimination (Gamma favours group 0 at x=0, group 1 at x=1).",
    },
    Entry {
        name: "lsac",
        kind: ScenarioKind::RealWorld,
        y1a1: &["0.43", "0.47"],
        y1a0: &["0.03", "0.01"],
        y0a1: &["0.02", "0.02"],
        y0a0: &["0.01", "0.01"],
        notes: "Coarse LSAC table: A=0 black, X=1 high GPA, Y=1 passed the bar. \
                Delta at (x=1, A=0) is exactly 0.",
    },
];

impl Entry {
    fn build(&self) -> Scenario {
        let row = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let nx = self.y1a1.len();
        let doc = DistributionDoc {
            x_domain: (0..nx).map(|x| x.to_string()).collect(),
            p: [
                ("y1", [("a1", self.y1a1), ("a0", self.y1a0)]),
                ("y0", [("a1", self.y0a1), ("a0", self.y0a0)]),
            ]
            .into_iter()
            .map(|(y, groups)| {
                (
                    y.to_string(),
                    groups
                        .into_iter()
                        .map(|(a, v)| (a.to_string(), row(v)))
                        .collect(),
                )
            })
            .collect(),
        };
        Scenario {
            name: self.name,
            kind: self.kind,
            dist: doc
                .into_distribution()
                .expect("builtin tables are valid distributions"),
            notes: self.notes,
        }
    }
}

/// Looks up a builtin scenario (case-insensitive).
pub fn builtin_scenario(name: &str) -> Result<Scenario, UnknownScenario> {
    REGISTRY
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .map(Entry::build)
        .ok_or_else(|| UnknownScenario(name.to_string()))
}

pub fn all_scenarios() -> Vec<Scenario> {
    REGISTRY.iter().map(Entry::build).collect()
}

impl Scenario {
    /// The privacy grid used for this kind of scenario.
    pub fn default_eps_grid(&self) -> Vec<f64> {
        match self.kind {
            ScenarioKind::Synthetic => SYNTHETIC_EPS_GRID.to_vec(),
            ScenarioKind::RealWorld => REAL_EPS_GRID.to_vec(),
        }
    }
}
