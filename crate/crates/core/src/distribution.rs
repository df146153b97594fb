//! Joint distributions over `(Y, X, A)` with binary `Y`, binary `A` and a
//! finite, labelled `X` domain, plus the statistics derived from them.

use std::collections::{BTreeMap, HashSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{parse_rational, render_rational, ParseRationalError, Prob};

#[derive(Debug, Error)]
pub enum DistributionError {
    #[error("x_domain is empty")]
    EmptyDomain,
    #[error("duplicate x label {0:?}")]
    DuplicateLabel(String),
    #[error("missing cell {0}")]
    MissingCell(String),
    #[error("cell {cell} has negative mass {value}")]
    NegativeEntry { cell: String, value: String },
    #[error("entries sum to {total}, not 1")]
    SumNotOne { total: String },
    #[error("cell {cell}: {source}")]
    InvalidNumber {
        cell: String,
        #[source]
        source: ParseRationalError,
    },
    #[error("expected {expected} cells, got {actual}")]
    CellCount { expected: usize, actual: usize },
    #[error("malformed distribution document: {0}")]
    Json(#[from] serde_json::Error),
}

/// Exact joint probability table `P[Y=y, X=x, A=a]`.
///
/// Cells are stored flat in `(y, x, a)` order; `x` indexes `x_domain`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDistribution {
    x_domain: Vec<String>,
    cells: Vec<BigRational>,
}

fn cell_name(y: u8, label: &str, a: u8) -> String {
    format!("(y={y}, x={label}, a={a})")
}

impl JointDistribution {
    /// Builds a distribution from a cell function; validates labels,
    /// non-negativity and total mass.
    pub fn from_fn<F>(x_domain: Vec<String>, mut mass: F) -> Result<Self, DistributionError>
    where
        F: FnMut(u8, usize, u8) -> BigRational,
    {
        let nx = x_domain.len();
        let mut cells = Vec::with_capacity(4 * nx);
        for y in 0..2u8 {
            for x in 0..nx {
                for a in 0..2u8 {
                    cells.push(mass(y, x, a));
                }
            }
        }
        Self::from_cells(x_domain, cells)
    }

    /// `cells` must be in `(y, x, a)` order, `4 * |x_domain|` entries.
    pub fn from_cells(
        x_domain: Vec<String>,
        cells: Vec<BigRational>,
    ) -> Result<Self, DistributionError> {
        if x_domain.is_empty() {
            return Err(DistributionError::EmptyDomain);
        }
        let mut seen = HashSet::new();
        for label in &x_domain {
            if !seen.insert(label.as_str()) {
                return Err(DistributionError::DuplicateLabel(label.clone()));
            }
        }
        let expected = 4 * x_domain.len();
        if cells.len() != expected {
            return Err(DistributionError::CellCount {
                expected,
                actual: cells.len(),
            });
        }
        let dist = JointDistribution { x_domain, cells };
        for y in 0..2u8 {
            for x in 0..dist.nx() {
                for a in 0..2u8 {
                    let v = dist.p(y, x, a);
                    if v.is_negative() {
                        return Err(DistributionError::NegativeEntry {
                            cell: cell_name(y, &dist.x_domain[x], a),
                            value: render_rational(v),
                        });
                    }
                }
            }
        }
        let total: BigRational = dist.cells.iter().sum();
        if !total.is_one() {
            return Err(DistributionError::SumNotOne {
                total: render_rational(&total),
            });
        }
        Ok(dist)
    }

    /// Empirical distribution from cell counts in `(y, x, a)` order.
    pub fn from_counts(x_domain: Vec<String>, counts: &[u64]) -> Result<Self, DistributionError> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(DistributionError::SumNotOne {
                total: "0".to_string(),
            });
        }
        let cells = counts
            .iter()
            .map(|&c| BigRational::new(c.into(), total.into()))
            .collect();
        Self::from_cells(x_domain, cells)
    }

    pub fn x_domain(&self) -> &[String] {
        &self.x_domain
    }

    pub fn nx(&self) -> usize {
        self.x_domain.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.x_domain.iter().position(|l| l == label)
    }

    #[inline]
    pub fn cell_index(&self, y: u8, x: usize, a: u8) -> usize {
        (y as usize * self.nx() + x) * 2 + a as usize
    }

    /// Flattened cells in `(y, x, a)` order.
    pub fn cells(&self) -> &[BigRational] {
        &self.cells
    }

    /// `P[Y=y, X=x, A=a]`.
    pub fn p(&self, y: u8, x: usize, a: u8) -> &BigRational {
        &self.cells[self.cell_index(y, x, a)]
    }

    /// `P[X=x, A=a]`.
    pub fn cell_mass(&self, x: usize, a: u8) -> BigRational {
        self.p(0, x, a) + self.p(1, x, a)
    }

    /// `P[A=a]`.
    pub fn group_mass(&self, a: u8) -> BigRational {
        (0..self.nx()).map(|x| self.cell_mass(x, a)).sum()
    }

    /// `P[X=x]`.
    pub fn x_mass(&self, x: usize) -> BigRational {
        self.cell_mass(x, 0) + self.cell_mass(x, 1)
    }

    /// `P[Y=1, A=a]`.
    pub fn positive_mass(&self, a: u8) -> BigRational {
        (0..self.nx()).map(|x| self.p(1, x, a).clone()).sum()
    }

    /// `Δ^x_a = P[Y=1,x,a] − P[Y=0,x,a]`.
    pub fn delta(&self, x: usize, a: u8) -> BigRational {
        self.p(1, x, a) - self.p(0, x, a)
    }

    pub fn to_doc(&self) -> DistributionDoc {
        let row = |y: u8, a: u8| -> Vec<String> {
            (0..self.nx())
                .map(|x| render_rational(self.p(y, x, a)))
                .collect()
        };
        let mut p = BTreeMap::new();
        for y in [1u8, 0] {
            let mut groups = BTreeMap::new();
            for a in [1u8, 0] {
                groups.insert(format!("a{a}"), row(y, a));
            }
            p.insert(format!("y{y}"), groups);
        }
        DistributionDoc {
            x_domain: self.x_domain.clone(),
            p,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("distribution doc serializes")
    }
}

/// On-disk distribution document:
///
/// ```json
/// {"x_domain": ["0","1"],
///  "p": {"y1": {"a1": ["0.35","0.35"], "a0": ["0","0.15"]},
///        "y0": {"a1": ["0","0"],       "a0": ["0.15","0"]}}}
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionDoc {
    pub x_domain: Vec<String>,
    pub p: BTreeMap<String, BTreeMap<String, Vec<String>>>,
}

impl DistributionDoc {
    pub fn into_distribution(self) -> Result<JointDistribution, DistributionError> {
        let nx = self.x_domain.len();
        if nx == 0 {
            return Err(DistributionError::EmptyDomain);
        }
        let mut cells = vec![BigRational::zero(); 4 * nx];
        for y in 0..2u8 {
            let y_key = format!("y{y}");
            let groups = self
                .p
                .get(&y_key)
                .ok_or_else(|| DistributionError::MissingCell(y_key.clone()))?;
            for a in 0..2u8 {
                let a_key = format!("a{a}");
                let row = groups
                    .get(&a_key)
                    .ok_or_else(|| DistributionError::MissingCell(format!("{y_key}.{a_key}")))?;
                for x in 0..nx {
                    let label = &self.x_domain[x];
                    let raw = row.get(x).ok_or_else(|| {
                        DistributionError::MissingCell(cell_name(y, label, a))
                    })?;
                    let value =
                        parse_rational(raw).map_err(|source| DistributionError::InvalidNumber {
                            cell: cell_name(y, label, a),
                            source,
                        })?;
                    cells[(y as usize * nx + x) * 2 + a as usize] = value;
                }
                if row.len() > nx {
                    return Err(DistributionError::CellCount {
                        expected: nx,
                        actual: row.len(),
                    });
                }
            }
        }
        JointDistribution::from_cells(self.x_domain, cells)
    }
}

/// Parses a JSON distribution document into an exact distribution.
pub fn parse_distribution(json: &str) -> Result<JointDistribution, DistributionError> {
    let doc: DistributionDoc = serde_json::from_str(json)?;
    doc.into_distribution()
}

/// `Δ^x_a` for every cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaTable {
    values: Vec<[BigRational; 2]>,
}

impl DeltaTable {
    pub fn get(&self, x: usize, a: u8) -> &BigRational {
        &self.values[x][a as usize]
    }

    pub fn nx(&self) -> usize {
        self.values.len()
    }
}

pub fn delta_table(dist: &JointDistribution) -> DeltaTable {
    DeltaTable {
        values: (0..dist.nx())
            .map(|x| [dist.delta(x, 0), dist.delta(x, 1)])
            .collect(),
    }
}

/// `Γ^x_a = P[Y=1|x,a] − P[Y=0|x,a]`; `None` where `P[x,a] = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaTable {
    values: Vec<[Option<BigRational>; 2]>,
}

impl GammaTable {
    pub(crate) fn from_values(values: Vec<[Option<BigRational>; 2]>) -> Self {
        GammaTable { values }
    }

    pub fn get(&self, x: usize, a: u8) -> Option<&BigRational> {
        self.values[x][a as usize].as_ref()
    }

    pub fn nx(&self) -> usize {
        self.values.len()
    }
}

pub fn gamma_table(dist: &JointDistribution) -> GammaTable {
    let values = (0..dist.nx())
        .map(|x| {
            [0u8, 1].map(|a| {
                let mass = dist.cell_mass(x, a);
                (!mass.is_zero()).then(|| dist.delta(x, a) / mass)
            })
        })
        .collect();
    GammaTable { values }
}

/// Marginal and conditional tables. A conditional row is `None` when its
/// conditioning event has zero mass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginalSet {
    pub p_a: [Prob; 2],
    pub p_x: Vec<Prob>,
    /// `P[X=x | A=a]`, indexed `[a][x]`.
    pub p_x_given_a: [Option<Vec<Prob>>; 2],
    /// `P[X=x | Y=1, A=a]`, indexed `[a][x]`.
    pub p_x_given_y1_a: [Option<Vec<Prob>>; 2],
    /// `P[X=x | Y=1]`.
    pub p_x_given_y1: Option<Vec<Prob>>,
}

fn prob(value: BigRational) -> Prob {
    Prob::new(value).expect("derived from a validated distribution")
}

fn conditional_row(
    masses: impl Iterator<Item = BigRational>,
    total: &BigRational,
) -> Option<Vec<Prob>> {
    if total.is_zero() {
        return None;
    }
    Some(masses.map(|m| prob(m / total)).collect())
}

pub fn marginals(dist: &JointDistribution) -> MarginalSet {
    let nx = dist.nx();
    let p_a = [0u8, 1].map(|a| prob(dist.group_mass(a)));
    let p_x = (0..nx).map(|x| prob(dist.x_mass(x))).collect();
    let p_x_given_a = [0u8, 1].map(|a| {
        conditional_row((0..nx).map(|x| dist.cell_mass(x, a)), p_a[a as usize].value())
    });
    let p_x_given_y1_a = [0u8, 1].map(|a| {
        conditional_row(
            (0..nx).map(|x| dist.p(1, x, a).clone()),
            &dist.positive_mass(a),
        )
    });
    let y1_total = dist.positive_mass(0) + dist.positive_mass(1);
    let p_x_given_y1 = conditional_row(
        (0..nx).map(|x| dist.p(1, x, 0) + dist.p(1, x, 1)),
        &y1_total,
    );
    MarginalSet {
        p_a,
        p_x,
        p_x_given_a,
        p_x_given_y1_a,
        p_x_given_y1,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceReport {
    pub independent: bool,
    /// `max_{x,a} |P[x,a] − P[x]·P[a]|`.
    pub max_deviation: BigRational,
}

/// Exact test of `X ⊥ A`.
pub fn independence_check(dist: &JointDistribution) -> IndependenceReport {
    let p_a = [dist.group_mass(0), dist.group_mass(1)];
    let mut max_deviation = BigRational::zero();
    for x in 0..dist.nx() {
        let px = dist.x_mass(x);
        for a in 0..2u8 {
            let dev = (dist.cell_mass(x, a) - &px * &p_a[a as usize]).abs();
            if dev > max_deviation {
                max_deviation = dev;
            }
        }
    }
    IndependenceReport {
        independent: max_deviation.is_zero(),
        max_deviation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::ratio;
    use crate::scenarios::builtin_scenario;

    const S1_DOC: &str = r#"{"x_domain": ["0","1"], "p": {"y1": {"a1": ["0.35","0.35"], "a0": ["0","0.15"]}, "y0": {"a1": ["0","0"], "a0": ["0.15","0"]}}}"#;

    fn s1() -> JointDistribution {
        parse_distribution(S1_DOC).unwrap()
    }

    #[test]
    fn parses_s1_document() {
        let d = s1();
        assert_eq!(d.p(1, 0, 1), &ratio(7, 20));
        assert_eq!(d.p(0, 0, 0), &ratio(3, 20));
        assert_eq!(d, builtin_scenario("S1").unwrap().dist);
    }

    #[test]
    fn rejects_mass_not_one() {
        let doc = S1_DOC.replace(r#""a0": ["0.15","0"]"#, r#""a0": ["0.14","0"]"#);
        assert!(matches!(
            parse_distribution(&doc),
            Err(DistributionError::SumNotOne { total }) if total == "0.99"
        ));
    }

    #[test]
    fn rejects_negative_entry() {
        let doc = r#"{"x_domain": ["0"], "p": {"y1": {"a1": ["−0.1"], "a0": ["0.5"]}, "y0": {"a1": ["0.3"], "a0": ["0.3"]}}}"#;
        assert!(matches!(
            parse_distribution(doc),
            Err(DistributionError::NegativeEntry { .. })
        ));
    }

    #[test]
    fn rejects_duplicate_and_missing() {
        let dup = S1_DOC.replace(r#"["0","1"], "p""#, r#"["0","0"], "p""#);
        assert!(matches!(
            parse_distribution(&dup),
            Err(DistributionError::DuplicateLabel(l)) if l == "0"
        ));
        let short = S1_DOC.replace(r#""a0": ["0.15","0"]"#, r#""a0": ["0.15"]"#);
        assert!(matches!(
            parse_distribution(&short),
            Err(DistributionError::MissingCell(_))
        ));
        let no_group = r#"{"x_domain": ["0"], "p": {"y1": {"a1": ["1"]}, "y0": {"a1": ["0"], "a0": ["0"]}}}"#;
        assert!(matches!(
            parse_distribution(no_group),
            Err(DistributionError::MissingCell(_))
        ));
        let empty = r#"{"x_domain": [], "p": {}}"#;
        assert!(matches!(
            parse_distribution(empty),
            Err(DistributionError::EmptyDomain)
        ));
        assert!(matches!(
            parse_distribution("{"),
            Err(DistributionError::Json(_))
        ));
    }

    #[test]
    fn s1_deltas() {
        let t = delta_table(&s1());
        assert_eq!(t.get(0, 1), &ratio(7, 20));
        assert_eq!(t.get(0, 0), &ratio(-3, 20));
        assert_eq!(t.get(1, 1), &ratio(7, 20));
        assert_eq!(t.get(1, 0), &ratio(3, 20));
    }

    #[test]
    fn german_gammas() {
        let g = gamma_table(&builtin_scenario("german").unwrap().dist);
        assert_eq!(g.get(0, 1), Some(&ratio(17, 29)));
        assert_eq!(g.get(0, 0), Some(&ratio(7, 9)));
        assert_eq!(g.get(1, 1), Some(&ratio(7, 20)));
        assert_eq!(g.get(1, 0), Some(&ratio(2, 11)));
    }

    #[test]
    fn gamma_undefined_on_null_cell() {
        let d = JointDistribution::from_fn(vec!["u".into(), "v".into()], |y, x, a| {
            match (y, x, a) {
                (1, 0, 1) => ratio(1, 2),
                (0, 1, 0) => ratio(1, 2),
                _ => ratio(0, 1),
            }
        })
        .unwrap();
        let g = gamma_table(&d);
        assert_eq!(g.get(0, 1), Some(&ratio(1, 1)));
        assert_eq!(g.get(0, 0), None);
        assert_eq!(g.get(1, 1), None);
        assert_eq!(g.get(1, 0), Some(&ratio(-1, 1)));
    }

    #[test]
    fn marginal_values() {
        let m = marginals(&s1());
        assert_eq!(m.p_a[1].value(), &ratio(7, 10));
        let compas = marginals(&builtin_scenario("compas").unwrap().dist);
        assert_eq!(compas.p_a[0].value(), &ratio(3, 5));
        let sum: BigRational = compas.p_x.iter().map(|p| p.value().clone()).sum();
        assert!(sum.is_one());
        let zero_y1 = JointDistribution::from_fn(vec!["0".into()], |y, _, _| {
            if y == 0 { ratio(1, 2) } else { ratio(0, 1) }
        })
        .unwrap();
        let m = marginals(&zero_y1);
        assert!(m.p_x_given_y1.is_none());
        assert!(m.p_x_given_y1_a[0].is_none());
        assert!(m.p_x_given_a[0].is_some());
    }

    #[test]
    fn independence() {
        let r = independence_check(&s1());
        assert!(r.independent);
        assert!(r.max_deviation.is_zero());
        let r = independence_check(&builtin_scenario("S2").unwrap().dist);
        assert!(!r.independent);
        assert!(r.max_deviation > BigRational::zero());
    }

    #[test]
    fn delta_plus_twice_negative_mass_is_cell_mass() {
        for name in crate::scenarios::SCENARIO_NAMES {
            let d = builtin_scenario(name).unwrap().dist;
            let t = delta_table(&d);
            for x in 0..d.nx() {
                for a in 0..2u8 {
                    let two = BigRational::from_integer(2.into());
                    assert_eq!(t.get(x, a) + two * d.p(0, x, a), d.cell_mass(x, a));
                }
            }
        }
    }

    #[test]
    fn builtins_round_trip_through_json() {
        for name in crate::scenarios::SCENARIO_NAMES {
            let d = builtin_scenario(name).unwrap().dist;
            assert_eq!(parse_distribution(&d.to_json()).unwrap(), d, "{name}");
        }
    }
}
