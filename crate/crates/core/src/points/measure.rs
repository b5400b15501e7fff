//! Discrete probability measures and their orthonormal polynomials.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{basis, dim, graded_lex_rank, Polynomial, C64};

/// Quadrature nodes with positive weights summing to one. `exactness` is the
/// total degree up to which integrals of polynomials (in `z` and, on the
/// circle, `conj z`) are reproduced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeasure {
    domain: String,
    nodes: Vec<Vec<C64>>,
    weights: Vec<f64>,
    exactness: usize,
}

impl QuadratureMeasure {
    pub fn new(domain: impl Into<String>, nodes: Vec<Vec<C64>>, weights: Vec<f64>, exactness: usize) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::DimensionMismatch { what: "quadrature weights", expected: nodes.len(), found: weights.len() });
        }
        let d = nodes[0].len();
        if let Some(bad) = nodes.iter().find(|x| x.len() != d) {
            return Err(Error::DimensionMismatch { what: "quadrature node dimension", expected: d, found: bad.len() });
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidArgument("quadrature weights must be positive".into()));
        }
        Ok(QuadratureMeasure { domain: domain.into(), nodes, weights, exactness })
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn nodes(&self) -> &[Vec<C64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    /// `∫ f dm`.
    pub fn integrate<F: Fn(&[C64]) -> C64>(&self, f: F) -> C64 {
        self.nodes.iter().zip(&self.weights).map(|(x, &w)| f(x) * w).sum()
    }

    /// `∫ p conj(q) dm`.
    pub fn inner(&self, p: &Polynomial, q: &Polynomial) -> C64 {
        self.integrate(|x| p.eval(x) * q.eval(x).conj())
    }
}

/// Normalized arc length `dθ/2π` sampled at `m` equally spaced points.
pub fn circle_measure(m: usize) -> QuadratureMeasure {
    let nodes = super::sequences::circle_grid(m).into_iter().map(|z| vec![z]).collect();
    QuadratureMeasure { domain: "circle".into(), nodes, weights: vec![1.0 / m as f64; m], exactness: m - 1 }
}

/// Arcsine measure `dx / (pi sqrt(1 - x^2))` on `[-1, 1]` via `m`
/// Chebyshev–Gauss nodes.
pub fn chebyshev_measure(m: usize) -> QuadratureMeasure {
    let nodes = (0..m)
        .map(|k| vec![C64::new(((2 * k + 1) as f64 * PI / (2 * m) as f64).cos(), 0.0)])
        .collect();
    QuadratureMeasure { domain: "chebyshev".into(), nodes, weights: vec![1.0 / m as f64; m], exactness: 2 * m - 1 }
}

pub fn product_measure(a: &QuadratureMeasure, b: &QuadratureMeasure) -> QuadratureMeasure {
    let mut nodes = Vec::with_capacity(a.nodes.len() * b.nodes.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (x, wx) in a.nodes.iter().zip(&a.weights) {
        for (y, wy) in b.nodes.iter().zip(&b.weights) {
            nodes.push([x.as_slice(), y.as_slice()].concat());
            weights.push(wx * wy);
        }
    }
    QuadratureMeasure {
        domain: format!("{}x{}", a.domain, b.domain),
        nodes,
        weights,
        exactness: a.exactness.min(b.exactness),
    }
}

/// `b_alpha` for all `|alpha| <= degree` in graded-lex order; `b_alpha` has
/// leading monomial `z^alpha` with a positive real coefficient.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrthonormalBasis {
    pub nvars: usize,
    pub degree: usize,
    pub polys: Vec<Polynomial>,
    /// `max |<q_i, q_j> - delta_ij|` over the orthonormalized sample vectors
    /// produced by the process.
    pub orthogonality_residual: f64,
}

impl OrthonormalBasis {
    /// Gram matrix `<b_i, b_j>` under `m`.
    pub fn gram(&self, m: &QuadratureMeasure) -> Vec<Vec<C64>> {
        let vals: Vec<Vec<C64>> =
            m.nodes().iter().map(|x| self.polys.iter().map(|p| p.eval_accurate(x)).collect()).collect();
        let n = self.polys.len();
        let mut g = vec![vec![C64::default(); n]; n];
        for (v, &w) in vals.iter().zip(m.weights()) {
            for i in 0..n {
                for j in 0..n {
                    g[i][j] += v[i] * v[j].conj() * w;
                }
            }
        }
        g
    }
}

/// Gram–Schmidt in graded-lex order, carried out on sampled values at the
/// quadrature nodes while tracking monomial coefficients.
///
/// The candidate for `b_alpha` is `z_i b_{alpha - e_i}` (with `i` the first
/// variable present in `alpha`) rather than `z^alpha` itself. Graded-lex is a
/// monomial order, so the candidate still has leading monomial `z^alpha` and
/// the result is the same polynomial, but the projection coefficients stay of
/// unit size. Each candidate is orthogonalized twice.
pub fn gram_schmidt_basis(m: &QuadratureMeasure, degree: usize) -> Result<OrthonormalBasis> {
    if m.exactness() < 2 * degree {
        return Err(Error::Precondition(format!(
            "measure exactness {} is below 2d = {}",
            m.exactness(),
            2 * degree
        )));
    }
    let n = m.dim();
    let size = dim(n, degree);
    let idx = basis(n, degree);
    let w = m.weights();
    let inner = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).zip(w).map(|((a, b), &wi)| a * b.conj() * wi).sum() };
    let mut coeffs: Vec<Vec<C64>> = Vec::with_capacity(size);
    let mut samples: Vec<Vec<C64>> = Vec::with_capacity(size);
    for (a, alpha) in idx.iter().enumerate() {
        let (mut v, mut c) = match alpha.0.iter().position(|&e| e > 0) {
            None => (vec![C64::new(1.0, 0.0); w.len()], {
                let mut c = vec![C64::default(); size];
                c[0] = C64::new(1.0, 0.0);
                c
            }),
            Some(i) => {
                let mut prev = alpha.clone();
                prev.0[i] -= 1;
                let p = graded_lex_rank(&prev);
                let v: Vec<C64> = samples[p].iter().zip(m.nodes()).map(|(q, x)| q * x[i]).collect();
                let mut c = vec![C64::default(); size];
                for (g, &cg) in idx.iter().zip(&coeffs[p]) {
                    if cg.re != 0.0 || cg.im != 0.0 {
                        let mut up = g.clone();
                        up.0[i] += 1;
                        c[graded_lex_rank(&up)] += cg;
                    }
                }
                (v, c)
            }
        };
        let norm0 = inner(&v, &v).re.sqrt();
        for _pass in 0..2 {
            for (cb, vb) in coeffs.iter().zip(&samples) {
                let h = inner(&v, vb);
                for (x, y) in v.iter_mut().zip(vb) {
                    *x -= h * y;
                }
                for (x, y) in c.iter_mut().zip(cb) {
                    *x -= h * y;
                }
            }
        }
        let norm = inner(&v, &v).re.sqrt();
        if !(norm > 1e-12 * norm0) {
            return Err(Error::SingularGram { index: a });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        c.iter_mut().for_each(|x| *x /= norm);
        samples.push(v);
        coeffs.push(c);
    }
    let mut residual = 0.0f64;
    for (i, u) in samples.iter().enumerate() {
        for (j, v) in samples.iter().enumerate().take(i + 1) {
            let target = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((inner(u, v) - target).norm());
        }
    }
    let polys = coeffs
        .into_iter()
        .map(|c| Polynomial::from_coeffs(n, degree, c).expect("coefficient length"))
        .collect();
    Ok(OrthonormalBasis { nvars: n, degree, polys, orthogonality_residual: residual })
}

/// Sampled sup norms of orthonormal polynomials, grouped by degree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BmDiagnostic {
    /// `max_{|alpha| = j} ||b_alpha||_K` for `j = 0..=degree`.
    pub sup_by_degree: Vec<f64>,
    /// `exp` of the least-squares slope of `ln sup` against `j`.
    pub rate: f64,
}

pub fn bm_diagnostic(basis_set: &OrthonormalBasis, grid: &[Vec<C64>]) -> BmDiagnostic {
    let idx = basis(basis_set.nvars, basis_set.degree);
    let mut sup = vec![0.0f64; basis_set.degree + 1];
    for (p, alpha) in basis_set.polys.iter().zip(idx.iter()) {
        let j = alpha.degree() as usize;
        let s = grid.iter().map(|x| p.eval_accurate(x).norm()).fold(0.0, f64::max);
        sup[j] = sup[j].max(s);
    }
    let xs: Vec<f64> = (0..sup.len()).map(|j| j as f64).collect();
    let ys: Vec<f64> = sup.iter().map(|s| s.ln()).collect();
    let rate = if sup.len() >= 2 { crate::analysis::linear_fit(&xs, &ys).slope.exp() } else { 1.0 };
    BmDiagnostic { sup_by_degree: sup, rate }
}
