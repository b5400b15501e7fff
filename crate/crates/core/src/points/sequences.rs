//! Ordered interpolation node sequences.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LejaRecursive,
    LejaGreedy,
    RLeja,
    Chebyshev,
    Integer,
    Equiangular,
    Custom,
}

/// Points in order; the order defines the Newton structure of any projector
/// built from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSequence {
    pub dim: usize,
    pub points: Vec<Vec<C64>>,
    pub provenance: Provenance,
}

impl PointSequence {
    pub fn new(dim: usize, points: Vec<Vec<C64>>, provenance: Provenance) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { what: "point dimension", expected: dim, found: bad.len() });
        }
        Ok(PointSequence { dim, points, provenance })
    }

    /// One-dimensional sequence from scalars.
    pub fn scalar(values: Vec<C64>, provenance: Provenance) -> Self {
        PointSequence { dim: 1, points: values.into_iter().map(|v| vec![v]).collect(), provenance }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// First coordinates; meaningful for one-dimensional sequences.
    pub fn scalars(&self) -> Vec<C64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    pub fn prefix(&self, len: usize) -> PointSequence {
        PointSequence { dim: self.dim, points: self.points[..len].to_vec(), provenance: self.provenance }
    }

    /// Complex scalars `a` mapped to real planar points `(Re a, Im a)`.
    pub fn to_real_plane(&self) -> Result<PointSequence> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { what: "planar embedding input", expected: 1, found: self.dim });
        }
        Ok(PointSequence {
            dim: 2,
            points: self.points.iter().map(|p| vec![C64::new(p[0].re, 0.0), C64::new(p[0].im, 0.0)]).collect(),
            provenance: self.provenance,
        })
    }
}

/// Leja sequence on the unit circle by recursive doubling: `S_1 = (1, -1)`,
/// and `S_{2^{n+1}}` appends `exp(i pi / 2^n) * S_{2^n}` to `S_{2^n}`.
pub fn leja_disk(count: usize) -> Result<PointSequence> {
    if count < 2 || !count.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("Leja count must be a power of two >= 2, got {count}")));
    }
    let mut pts = vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
    while pts.len() < count {
        let rho = C64::from_polar(1.0, PI / pts.len() as f64);
        let rotated: Vec<C64> = pts.iter().map(|a| a * rho).collect();
        pts.extend(rotated);
    }
    Ok(PointSequence::scalar(pts, Provenance::LejaRecursive))
}

/// `sum_j ln|z - a_j|`, the log of the Leja objective.
pub fn leja_objective(prefix: &[C64], z: C64) -> f64 {
    prefix.iter().map(|a| (z - a).norm().ln()).sum()
}

/// Greedy Leja selection from a finite sample. The first point has maximal
/// modulus (smallest argument in `[0, 2pi)` among ties); every later point
/// maximizes the log distance sum to those already chosen, the earliest
/// sample index winning ties.
pub fn leja_greedy_oracle(sample: &[C64], count: usize) -> PointSequence {
    let mut chosen = Vec::with_capacity(count);
    if sample.is_empty() || count == 0 {
        return PointSequence::scalar(chosen, Provenance::LejaGreedy);
    }
    let arg = |z: &C64| {
        let a = z.arg();
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    };
    let max_mod = sample.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let first = sample
        .iter()
        .filter(|z| z.norm() >= max_mod * (1.0 - 1e-12))
        .min_by(|a, b| arg(a).total_cmp(&arg(b)))
        .copied()
        .expect("sample is nonempty");
    chosen.push(first);
    let mut score: Vec<f64> = sample.iter().map(|z| (z - first).norm().ln()).collect();
    while chosen.len() < count.min(sample.len()) {
        let mut best = 0;
        for (i, s) in score.iter().enumerate() {
            if *s > score[best] {
                best = i;
            }
        }
        let next = sample[best];
        chosen.push(next);
        for (s, z) in score.iter_mut().zip(sample) {
            *s += (z - next).norm().ln();
        }
    }
    PointSequence::scalar(chosen, Provenance::LejaGreedy)
}

/// Greedy Leja ordering of a finite node set (all nodes kept).
pub fn leja_order(nodes: &PointSequence) -> PointSequence {
    let mut out = leja_greedy_oracle(&nodes.scalars(), nodes.len());
    out.provenance = nodes.provenance;
    out
}

/// Real parts of a unit-circle sequence, in order, with repeats removed.
pub fn r_leja(leja: &PointSequence) -> Result<PointSequence> {
    let mut out: Vec<C64> = Vec::new();
    for (i, p) in leja.points.iter().enumerate() {
        if leja.dim != 1 || (p[0].norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("point {i} is not on the unit circle")));
        }
        let x = p[0].re;
        if !out.iter().any(|y| (y.re - x).abs() <= 1e-12) {
            out.push(C64::new(x, 0.0));
        }
    }
    Ok(PointSequence::scalar(out, Provenance::RLeja))
}

/// Chebyshev–Gauss nodes `cos((2k+1) pi / (2d+2))`, `k = 0..=d`.
pub fn chebyshev_nodes(d: usize) -> PointSequence {
    let pts = (0..=d)
        .map(|k| C64::new(((2 * k + 1) as f64 * PI / (2 * d + 2) as f64).cos(), 0.0))
        .collect();
    PointSequence::scalar(pts, Provenance::Chebyshev)
}

pub fn integer_nodes(d: usize) -> PointSequence {
    PointSequence::scalar((0..=d).map(|k| C64::new(k as f64, 0.0)).collect(), Provenance::Integer)
}

/// The `d+1`-th roots of unity.
pub fn equiangular(d: usize) -> PointSequence {
    let pts = (0..=d).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / (d + 1) as f64)).collect();
    PointSequence::scalar(pts, Provenance::Equiangular)
}

/// `m` equally spaced points on the unit circle, starting at 1.
pub fn circle_grid(m: usize) -> Vec<C64> {
    (0..m).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect()
}
