//! Interpolation-condition functionals.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::simplex::{simplex_monomial_moment, GrundmannMoller};
use super::testfn::Differentiable;
use crate::error::{Error, Result};
use crate::poly::{basis, falling, graded_lex_rank, monomial_values, power_table, split_ranks, MultiIndex, Polynomial, C64};
use crate::points::QuadratureMeasure;

/// Simplex quadrature exactness used for a Kergin condition inside a
/// projector of degree `d` when it is applied to a non-polynomial function.
pub fn default_simplex_exactness(d: usize) -> usize {
    2 * d + 5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    /// `f(a)`.
    PointEval { point: Vec<C64> },
    /// `D^alpha f(a)`, without factorial normalization.
    DerivativeEval { alpha: MultiIndex, point: Vec<C64> },
    /// `∫_{S_k} D^alpha f(z_0 + sum_i t_i (z_i - z_0)) dt` with `k = |alpha|`.
    Kergin {
        alpha: MultiIndex,
        nodes: Vec<Vec<C64>>,
        #[serde(default = "kergin_default_exactness")]
        exactness: usize,
    },
    /// `sum_i w_i f(x_i) conj(b(x_i))` over the measure's quadrature nodes.
    InnerProduct { basis: Polynomial, measure: Arc<QuadratureMeasure> },
    /// `mu ⊗ nu` acting on functions of `(z^1, z^2)`.
    Tensor { left: Box<Functional>, right: Box<Functional> },
}

fn kergin_default_exactness() -> usize {
    default_simplex_exactness(0)
}

impl Functional {
    pub fn point(point: Vec<C64>) -> Self {
        Functional::PointEval { point }
    }

    pub fn point_real(x: &[f64]) -> Self {
        Functional::PointEval { point: x.iter().map(|&v| C64::new(v, 0.0)).collect() }
    }

    pub fn derivative(alpha: MultiIndex, point: Vec<C64>) -> Result<Self> {
        if alpha.nvars() != point.len() {
            return Err(Error::DimensionMismatch {
                what: "derivative order vs point",
                expected: point.len(),
                found: alpha.nvars(),
            });
        }
        Ok(Functional::DerivativeEval { alpha, point })
    }

    /// Kergin condition on the node prefix `z_0..z_{|alpha|}`.
    pub fn kergin(alpha: MultiIndex, nodes: Vec<Vec<C64>>, exactness: usize) -> Result<Self> {
        let k = alpha.degree() as usize;
        if nodes.len() != k + 1 {
            return Err(Error::DimensionMismatch { what: "Kergin node count", expected: k + 1, found: nodes.len() });
        }
        if let Some(bad) = nodes.iter().find(|z| z.len() != alpha.nvars()) {
            return Err(Error::DimensionMismatch {
                what: "Kergin node dimension",
                expected: alpha.nvars(),
                found: bad.len(),
            });
        }
        Ok(Functional::Kergin { alpha, nodes, exactness })
    }

    pub fn inner_product(basis: Polynomial, measure: Arc<QuadratureMeasure>) -> Result<Self> {
        if basis.nvars() != measure.dim() {
            return Err(Error::DimensionMismatch {
                what: "inner product basis vs measure",
                expected: measure.dim(),
                found: basis.nvars(),
            });
        }
        Ok(Functional::InnerProduct { basis, measure })
    }

    pub fn tensor(left: Functional, right: Functional) -> Self {
        Functional::Tensor { left: Box::new(left), right: Box::new(right) }
    }

    /// Ambient variable count.
    pub fn nvars(&self) -> usize {
        match self {
            Functional::PointEval { point } => point.len(),
            Functional::DerivativeEval { point, .. } => point.len(),
            Functional::Kergin { alpha, .. } => alpha.nvars(),
            Functional::InnerProduct { measure, .. } => measure.dim(),
            Functional::Tensor { left, right } => left.nvars() + right.nvars(),
        }
    }

    /// Same functional with every Kergin quadrature set to `exactness`.
    pub fn with_simplex_exactness(&self, exactness: usize) -> Functional {
        match self {
            Functional::Kergin { alpha, nodes, .. } => {
                Functional::Kergin { alpha: alpha.clone(), nodes: nodes.clone(), exactness }
            }
            Functional::Tensor { left, right } => Functional::tensor(
                left.with_simplex_exactness(exactness),
                right.with_simplex_exactness(exactness),
            ),
            other => other.clone(),
        }
    }

    /// `mu(e_gamma)` for every monomial with `|gamma| <= degree`, in graded-lex order.
    pub fn monomial_values(&self, degree: usize) -> Vec<C64> {
        match self {
            Functional::PointEval { point } => monomial_values(point, degree),
            Functional::DerivativeEval { alpha, point } => {
                let pw = power_table(point, degree);
                basis(point.len(), degree)
                    .iter()
                    .map(|g| {
                        if !alpha.divides(g) {
                            return C64::default();
                        }
                        g.0.iter()
                            .zip(&alpha.0)
                            .enumerate()
                            .map(|(i, (&gi, &ai))| pw[i][(gi - ai) as usize] * falling(gi, ai))
                            .product()
                    })
                    .collect()
            }
            Functional::Kergin { alpha, nodes, .. } => {
                let k = alpha.degree() as usize;
                let n = alpha.nvars();
                if k > degree {
                    return vec![C64::default(); crate::poly::dim(n, degree)];
                }
                let moments = kergin_moments(nodes, degree - k);
                basis(n, degree)
                    .iter()
                    .map(|g| {
                        if !alpha.divides(g) {
                            return C64::default();
                        }
                        let factor: f64 = g.0.iter().zip(&alpha.0).map(|(&gi, &ai)| falling(gi, ai)).product();
                        let reduced = MultiIndex(g.0.iter().zip(&alpha.0).map(|(gi, ai)| gi - ai).collect());
                        moments[graded_lex_rank(&reduced)] * factor
                    })
                    .collect()
            }
            Functional::InnerProduct { basis: b, measure } => {
                let mut out = vec![C64::default(); crate::poly::dim(b.nvars(), degree)];
                for (x, &w) in measure.nodes().iter().zip(measure.weights()) {
                    let scale = b.eval(x).conj() * w;
                    for (o, m) in out.iter_mut().zip(monomial_values(x, degree)) {
                        *o += m * scale;
                    }
                }
                out
            }
            Functional::Tensor { left, right } => {
                let lv = left.monomial_values(degree);
                let rv = right.monomial_values(degree);
                split_ranks(left.nvars(), right.nvars(), degree)
                    .iter()
                    .map(|&(a, b)| lv[a] * rv[b])
                    .collect()
            }
        }
    }

    /// Exact value on a polynomial, through its graded-lex coefficients.
    pub fn apply_to_polynomial(&self, p: &Polynomial) -> Result<C64> {
        if p.nvars() != self.nvars() {
            return Err(Error::DimensionMismatch { what: "polynomial variables", expected: self.nvars(), found: p.nvars() });
        }
        Ok(self
            .monomial_values(p.degree())
            .iter()
            .zip(p.coeffs())
            .map(|(m, c)| m * c)
            .sum())
    }

    /// Value on a function with exact derivatives. Kergin conditions use a
    /// Grundmann–Möller rule of the stored exactness; tensor functionals are
    /// evaluated as iterated applications.
    pub fn apply_to_function(&self, f: &dyn Differentiable) -> Result<C64> {
        match self {
            Functional::PointEval { point } => f.value_at(point),
            Functional::DerivativeEval { alpha, point } => f.derivative_at(&alpha.0, point),
            Functional::Kergin { alpha, nodes, exactness } => {
                let k = alpha.degree() as usize;
                if k == 0 {
                    return f.derivative_at(&alpha.0, &nodes[0]);
                }
                let z0 = &nodes[0];
                let edges: Vec<Vec<C64>> =
                    nodes[1..].iter().map(|z| z.iter().zip(z0).map(|(a, b)| a - b).collect()).collect();
                let mut x = vec![C64::default(); z0.len()];
                let mut acc = C64::default();
                let mut err = None;
                GrundmannMoller::with_exactness(k, *exactness).for_each(|lambda, w| {
                    if err.is_some() {
                        return;
                    }
                    x.copy_from_slice(z0);
                    for (e, &l) in edges.iter().zip(&lambda[1..]) {
                        for (xi, ei) in x.iter_mut().zip(e) {
                            *xi += ei * l;
                        }
                    }
                    match f.derivative_at(&alpha.0, &x) {
                        Ok(v) => acc += v * w,
                        Err(e) => err = Some(e),
                    }
                });
                match err {
                    Some(e) => Err(e),
                    None => Ok(acc),
                }
            }
            Functional::InnerProduct { basis: b, measure } => {
                let mut acc = C64::default();
                for (x, &w) in measure.nodes().iter().zip(measure.weights()) {
                    acc += f.value_at(x)? * b.eval(x).conj() * w;
                }
                Ok(acc)
            }
            Functional::Tensor { left, right } => {
                left.apply_to_function(&Partial { f, inner: right, split: left.nvars() })
            }
        }
    }
}

/// `x ↦ nu(f(x, ·))`, the function of the first block left after applying
/// the inner functional to the second.
struct Partial<'a> {
    f: &'a dyn Differentiable,
    inner: &'a Functional,
    split: usize,
}

impl Differentiable for Partial<'_> {
    fn derivative_at(&self, alpha: &[u32], x: &[C64]) -> Result<C64> {
        debug_assert_eq!(alpha.len(), self.split);
        self.inner.apply_to_function(&Slice { f: self.f, alpha, x })
    }
}

/// `y ↦ D^(alpha, ·) f(x, y)` with `x` and `alpha` frozen.
struct Slice<'a> {
    f: &'a dyn Differentiable,
    alpha: &'a [u32],
    x: &'a [C64],
}

impl Differentiable for Slice<'_> {
    fn derivative_at(&self, beta: &[u32], y: &[C64]) -> Result<C64> {
        let mut order = self.alpha.to_vec();
        order.extend_from_slice(beta);
        let mut z = self.x.to_vec();
        z.extend_from_slice(y);
        self.f.derivative_at(&order, &z)
    }
}

/// `∫_{S_k} x(t)^delta dt` for all `|delta| <= m`, where `x(t)` is the affine
/// parametrization of the simplex spanned by `nodes` and `k = nodes.len() - 1`.
fn kergin_moments(nodes: &[Vec<C64>], m: usize) -> Vec<C64> {
    let z0 = &nodes[0];
    let n = z0.len();
    let k = nodes.len() - 1;
    if k == 0 {
        return monomial_values(z0, m);
    }
    // coordinate j of x(t) as a degree-one polynomial in t_1..t_k
    let coords: Vec<Polynomial> = (0..n)
        .map(|j| {
            let mut c = vec![z0[j]];
            c.extend(nodes[1..].iter().map(|z| z[j] - z0[j]));
            Polynomial::from_coeffs(k, 1, c).expect("affine coordinate")
        })
        .collect();
    let moments: Vec<f64> = basis(k, m).iter().map(|b| simplex_monomial_moment(b, k)).collect();
    let idx = basis(n, m);
    let mut powers: Vec<Polynomial> = Vec::with_capacity(idx.len());
    let mut out = Vec::with_capacity(idx.len());
    for delta in idx.iter() {
        let p = match delta.0.iter().position(|&e| e > 0) {
            None => Polynomial::constant(k, C64::new(1.0, 0.0)),
            Some(i) => {
                let mut prev = delta.clone();
                prev.0[i] -= 1;
                powers[graded_lex_rank(&prev)].multiply(&coords[i])
            }
        };
        out.push(p.coeffs().iter().zip(&moments).map(|(c, &mu)| c * mu).sum());
        powers.push(p);
    }
    out
}
