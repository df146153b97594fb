//! Brute-force reference computations written directly from the metric
//! definitions. Nothing here calls the library's model, metric or channel
//! code; only the table entries are read from a `JointDistribution`.

#![allow(dead_code)]

use ldpfair::distribution::JointDistribution;
use num_rational::BigRational as Q;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub nx: usize,
    // [y][x][a]
    cells: Vec<[[Q; 2]; 2]>,
}

impl Table {
    pub fn read(d: &JointDistribution) -> Table {
        let nx = d.nx();
        let mut cells = vec![[[Q::zero(), Q::zero()], [Q::zero(), Q::zero()]]; nx];
        for (x, c) in cells.iter_mut().enumerate() {
            for y in 0..2u8 {
                for a in 0..2u8 {
                    c[y as usize][a as usize] = d.p(y, x, a).clone();
                }
            }
        }
        Table { nx, cells }
    }

    pub fn p(&self, y: usize, x: usize, a: usize) -> &Q {
        &self.cells[x][y][a]
    }

    pub fn total(&self) -> Q {
        self.cells.iter().flatten().flatten().sum()
    }
}

/// `P'[y,x,a] = p·P[y,x,a] + (1−p)·P[y,x,1−a]`.
pub fn obfuscate(t: &Table, p: &Q) -> Table {
    let q = Q::one() - p;
    let mut out = t.clone();
    for x in 0..t.nx {
        for y in 0..2 {
            for a in 0..2 {
                out.cells[x][y][a] = p * t.p(y, x, a) + &q * t.p(y, x, 1 - a);
            }
        }
    }
    out
}

pub fn delta(t: &Table, x: usize, a: usize) -> Q {
    t.p(1, x, a) - t.p(0, x, a)
}

/// Majority vote, ties to 1.
pub fn majority(t: &Table) -> Vec<[u8; 2]> {
    (0..t.nx)
        .map(|x| [0, 1].map(|a| u8::from(t.p(1, x, a) >= t.p(0, x, a))))
        .collect()
}

fn rate(t: &Table, pred: &[[u8; 2]], a: usize, positives_only: bool) -> Option<Q> {
    let mut num = Q::zero();
    let mut den = Q::zero();
    for (x, row) in pred.iter().enumerate() {
        let mass = if positives_only {
            t.p(1, x, a).clone()
        } else {
            t.p(1, x, a) + t.p(0, x, a)
        };
        if row[a] == 1 {
            num += &mass;
        }
        den += mass;
    }
    (!den.is_zero()).then(|| num / den)
}

pub fn sd(t: &Table, pred: &[[u8; 2]]) -> Option<Q> {
    Some(rate(t, pred, 1, false)? - rate(t, pred, 0, false)?)
}

pub fn eod(t: &Table, pred: &[[u8; 2]]) -> Option<Q> {
    Some(rate(t, pred, 1, true)? - rate(t, pred, 0, true)?)
}

pub fn csd(pred: &[[u8; 2]]) -> Vec<i8> {
    pred.iter().map(|r| r[1] as i8 - r[0] as i8).collect()
}

pub fn accuracy(t: &Table, pred: &[[u8; 2]]) -> Q {
    let mut acc = Q::zero();
    for (x, row) in pred.iter().enumerate() {
        for a in 0..2 {
            acc += t.p(row[a] as usize, x, a);
        }
    }
    acc
}

/// `Γ^x_a = (P[1,x,a] − P[0,x,a]) / P[x,a]`.
pub fn gamma(t: &Table) -> Vec<[Option<Q>; 2]> {
    (0..t.nx)
        .map(|x| {
            [0, 1].map(|a| {
                let mass = t.p(1, x, a) + t.p(0, x, a);
                (!mass.is_zero()).then(|| delta(t, x, a) / mass)
            })
        })
        .collect()
}

/// Direction of uniform discrimination, `None` when it fails.
pub fn uniform_direction(t: &Table) -> Option<i8> {
    let mut up = false;
    let mut down = false;
    for g in gamma(t) {
        if let [Some(g0), Some(g1)] = &g {
            up |= g1 > g0;
            down |= g1 < g0;
        }
    }
    match (up, down) {
        (true, true) => None,
        (true, false) => Some(1),
        (false, true) => Some(-1),
        (false, false) => Some(0),
    }
}

pub fn independent(t: &Table) -> bool {
    let total_a: Vec<Q> = (0..2)
        .map(|a| (0..t.nx).map(|x| t.p(1, x, a) + t.p(0, x, a)).sum())
        .collect();
    (0..t.nx).all(|x| {
        let px: Q = (0..2).map(|a| t.p(1, x, a) + t.p(0, x, a)).sum();
        (0..2).all(|a| t.p(1, x, a) + t.p(0, x, a) == &px * &total_a[a])
    })
}

pub fn reliable_y(t: &Table) -> bool {
    (0..t.nx).all(|x| {
        let m = |a: usize| t.p(1, x, a) + t.p(0, x, a);
        let (m1, m0) = (m(1), m(0));
        m1.is_zero() || m0.is_zero() || t.p(1, x, 1) / m1 == t.p(1, x, 0) / m0
    })
}

/// `0` between `before` and `after` in the sandwich sense.
pub fn between<T: PartialOrd + Zero>(before: &T, after: &T) -> bool {
    let z = T::zero();
    if *before > z {
        z <= *after && after <= before
    } else if *before < z {
        before <= after && *after <= z
    } else {
        after.is_zero()
    }
}

pub fn sign(q: &Q) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// The double `e^ε / (e^ε + 1)` as an exact rational.
pub fn retention_of(eps: f64) -> Q {
    Q::from_float(1.0 / (1.0 + (-eps).exp())).expect("finite")
}
