//! Newton-structured projectors: assembly, solves, truncations, summands
//! and Newton products.

use nalgebra::{ColPivQR, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::functionals::{Differentiable, Functional};
use crate::poly::{dim, Polynomial, C64};

/// Leading blocks whose condition estimate exceeds this are rejected.
pub const CONDITION_THRESHOLD: f64 = 1e12;

/// A projector onto polynomials of degree `<= d` given by leveled
/// interpolation conditions `J_0, ..., J_d`.
///
/// Rows of the system matrix are the functionals in level order and columns
/// the monomials in graded-lex order, so the leading `C(n+j, n)` square block
/// is the system of the truncation to degree `j`. Every leading block is
/// factorized (after row equilibration) when the projector is built.
#[derive(Clone, Debug)]
pub struct NewtonStructuredProjector {
    nvars: usize,
    degree: usize,
    levels: Vec<Vec<Functional>>,
    matrix: DMatrix<C64>,
    blocks: Vec<Block>,
}

#[derive(Clone, Debug)]
struct Block {
    row_scale: Vec<f64>,
    qr: ColPivQR<C64, Dyn, Dyn>,
    condition: f64,
}

impl Block {
    fn factor(matrix: &DMatrix<C64>, size: usize, level: usize) -> Result<Block> {
        let mut a = matrix.view((0, 0), (size, size)).into_owned();
        let mut row_scale = Vec::with_capacity(size);
        for mut row in a.row_iter_mut() {
            let m = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::NestedUnisolvenceFailure { level, condition: f64::INFINITY });
            }
            row.iter_mut().for_each(|v| *v /= m);
            row_scale.push(1.0 / m);
        }
        let qr = ColPivQR::new(a);
        let r = qr.r();
        let diag: Vec<f64> = (0..size).map(|i| r[(i, i)].norm()).collect();
        let hi = diag.iter().cloned().fold(0.0, f64::max);
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= CONDITION_THRESHOLD) {
            return Err(Error::NestedUnisolvenceFailure { level, condition });
        }
        Ok(Block { row_scale, qr, condition })
    }

    fn solve(&self, rhs: &[C64]) -> DVector<C64> {
        let b = DVector::from_iterator(rhs.len(), rhs.iter().zip(&self.row_scale).map(|(v, s)| v * *s));
        self.qr.solve(&b).expect("block was checked to be nonsingular")
    }
}

impl NewtonStructuredProjector {
    /// Assembles and factorizes the system of the leveled conditions.
    pub fn build(levels: Vec<Vec<Functional>>) -> Result<Self> {
        let nvars = levels
            .first()
            .and_then(|l| l.first())
            .map(Functional::nvars)
            .ok_or_else(|| Error::InvalidArgument("projector needs at least the level-0 condition".into()))?;
        let degree = levels.len() - 1;
        for (j, level) in levels.iter().enumerate() {
            let expected = dim(nvars, j) - if j == 0 { 0 } else { dim(nvars, j - 1) };
            if level.len() != expected {
                return Err(Error::DimensionMismatch { what: "level size", expected, found: level.len() });
            }
            if let Some(bad) = level.iter().find(|f| f.nvars() != nvars) {
                return Err(Error::DimensionMismatch { what: "functional variables", expected: nvars, found: bad.nvars() });
            }
        }
        let size = dim(nvars, degree);
        let mut matrix = DMatrix::<C64>::zeros(size, size);
        for (r, f) in levels.iter().flatten().enumerate() {
            for (c, v) in f.monomial_values(degree).into_iter().enumerate() {
                matrix[(r, c)] = v;
            }
        }
        Self::from_matrix(nvars, levels, matrix)
    }

    fn from_matrix(nvars: usize, levels: Vec<Vec<Functional>>, matrix: DMatrix<C64>) -> Result<Self> {
        let degree = levels.len() - 1;
        let blocks = (0..=degree)
            .map(|j| Block::factor(&matrix, dim(nvars, j), j))
            .collect::<Result<Vec<_>>>()?;
        Ok(NewtonStructuredProjector { nvars, degree, levels, matrix, blocks })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn levels(&self) -> &[Vec<Functional>] {
        &self.levels
    }

    /// All conditions in level order.
    pub fn functionals(&self) -> impl Iterator<Item = &Functional> {
        self.levels.iter().flatten()
    }

    /// `M[mu, gamma] = mu(e_gamma)`.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Condition estimate of each leading block after row equilibration.
    pub fn conditions(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.condition).collect()
    }

    /// `(mu(f))_mu` in level order.
    pub fn values_of(&self, f: &dyn Differentiable) -> Result<Vec<C64>> {
        self.functionals().map(|mu| mu.apply_to_function(f)).collect()
    }

    /// `(mu(p))_mu` in level order, computed exactly from coefficients.
    pub fn values_of_polynomial(&self, p: &Polynomial) -> Result<Vec<C64>> {
        self.functionals().map(|mu| mu.apply_to_polynomial(p)).collect()
    }

    /// `Pi_j` from condition values; `values` may be longer than needed.
    pub fn solve_level(&self, j: usize, values: &[C64]) -> Polynomial {
        let size = dim(self.nvars, j);
        let c = self.blocks[j].solve(&values[..size]);
        Polynomial::from_coeffs(self.nvars, j, c.iter().copied().collect()).expect("block size matches")
    }

    pub fn apply(&self, f: &dyn Differentiable) -> Result<Polynomial> {
        Ok(self.solve_level(self.degree, &self.values_of(f)?))
    }

    pub fn apply_polynomial(&self, p: &Polynomial) -> Result<Polynomial> {
        Ok(self.solve_level(self.degree, &self.values_of_polynomial(p)?))
    }

    /// `Pi_0 f, ..., Pi_d f` from one pass over the conditions.
    pub fn apply_levels(&self, f: &dyn Differentiable) -> Result<Vec<Polynomial>> {
        let values = self.values_of(f)?;
        Ok((0..=self.degree).map(|j| self.solve_level(j, &values)).collect())
    }

    pub fn apply_levels_polynomial(&self, p: &Polynomial) -> Result<Vec<Polynomial>> {
        let values = self.values_of_polynomial(p)?;
        Ok((0..=self.degree).map(|j| self.solve_level(j, &values)).collect())
    }

    /// The projector of degree `j` given by `J_0..J_j`.
    pub fn truncate(&self, j: usize) -> Result<Self> {
        if j > self.degree {
            return Err(Error::InvalidArgument(format!("truncation degree {j} exceeds {}", self.degree)));
        }
        let size = dim(self.nvars, j);
        let matrix = self.matrix.view((0, 0), (size, size)).into_owned();
        Self::from_matrix(self.nvars, self.levels[..=j].to_vec(), matrix)
    }

    /// `pi_k f = Pi_k f - Pi_{k-1} f`.
    pub fn newton_summand(&self, k: usize, f: &dyn Differentiable) -> Result<Polynomial> {
        if k > self.degree {
            return Err(Error::InvalidArgument(format!("summand index {k} exceeds {}", self.degree)));
        }
        let values: Vec<C64> = self.functionals().take(dim(self.nvars, k)).map(|mu| mu.apply_to_function(f)).collect::<Result<_>>()?;
        Ok(summand_from(self, k, &values))
    }

    /// All summands `pi_0 f, ..., pi_d f`.
    pub fn newton_summands(&self, f: &dyn Differentiable) -> Result<Vec<Polynomial>> {
        let values = self.values_of(f)?;
        Ok((0..=self.degree).map(|k| summand_from(self, k, &values)).collect())
    }

    pub fn newton_summands_polynomial(&self, p: &Polynomial) -> Result<Vec<Polynomial>> {
        let values = self.values_of_polynomial(p)?;
        Ok((0..=self.degree).map(|k| summand_from(self, k, &values)).collect())
    }
}

fn summand_from(p: &NewtonStructuredProjector, k: usize, values: &[C64]) -> Polynomial {
    let hi = p.solve_level(k, values);
    if k == 0 {
        return hi;
    }
    hi.sub(&p.solve_level(k - 1, values).with_degree(k))
}

/// Newton product: level `i` holds `mu ⊗ nu` for `mu` in level `i1` of the
/// first factor and `nu` in level `i2` of the second, `i1 + i2 = i`, with
/// `i1` descending.
pub fn newton_product(p1: &NewtonStructuredProjector, p2: &NewtonStructuredProjector) -> Result<NewtonStructuredProjector> {
    if p1.degree != p2.degree {
        return Err(Error::InvalidArgument(format!(
            "Newton product needs equal degrees, got {} and {}",
            p1.degree, p2.degree
        )));
    }
    let d = p1.degree;
    let levels = (0..=d)
        .map(|i| {
            let mut level = Vec::new();
            for i1 in (0..=i).rev() {
                for mu in &p1.levels[i1] {
                    for nu in &p2.levels[i - i1] {
                        level.push(Functional::tensor(mu.clone(), nu.clone()));
                    }
                }
            }
            level
        })
        .collect();
    NewtonStructuredProjector::build(levels)
}

/// `sum_{i+j<=d} pi^1_i(f1) ⊗ pi^2_j(f2)`.
pub fn apply_product_formula(
    p1: &NewtonStructuredProjector,
    p2: &NewtonStructuredProjector,
    f1: &dyn Differentiable,
    f2: &dyn Differentiable,
) -> Result<Polynomial> {
    if p1.degree != p2.degree {
        return Err(Error::InvalidArgument("product formula needs equal degrees".into()));
    }
    let d = p1.degree;
    let s1 = p1.newton_summands(f1)?;
    let s2 = p2.newton_summands(f2)?;
    let mut out = Polynomial::zero(p1.nvars + p2.nvars, d);
    for (i, a) in s1.iter().enumerate() {
        for b in s2.iter().take(d + 1 - i) {
            out = out.add(&a.tensor_embed(b));
        }
    }
    Ok(out.with_degree(d))
}

/// Index pairs `(i1, i2)` with `d + 1 <= i1 + i2`, `i1 <= a`, `i2 <= b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BSet {
    pub d: usize,
    pub a: usize,
    pub b: usize,
}

impl BSet {
    pub fn new(d: usize, a: usize, b: usize) -> Self {
        BSet { d, a, b }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.a).flat_map(move |i1| {
            let lo = (self.d + 1).saturating_sub(i1);
            (lo..=self.b).map(move |i2| (i1, i2))
        })
    }

    pub fn card(&self) -> usize {
        self.iter().count()
    }

    /// `(a + 1)(b + 1)`.
    pub fn card_bound(&self) -> usize {
        (self.a + 1) * (self.b + 1)
    }

    pub fn contains(&self, i1: usize, i2: usize) -> bool {
        self.d < i1 + i2 && i1 <= self.a && i2 <= self.b
    }
}

/// `sum_{(i1, i2) in B(d, |alpha|, |beta|)} pi^1_{i1}(p_alpha) ⊗ pi^2_{i2}(p_beta)`,
/// which equals `p_alpha ⊗ p_beta - Pi_d(p_alpha ⊗ p_beta)` for the Newton
/// product of the degree-`d` truncations.
pub fn residual_expansion(
    p1: &NewtonStructuredProjector,
    p2: &NewtonStructuredProjector,
    d: usize,
    pa: &Polynomial,
    pb: &Polynomial,
) -> Result<Polynomial> {
    let a = pa.effective_degree(0.0);
    let b = pb.effective_degree(0.0);
    if a + b < d + 1 {
        return Err(Error::Precondition(format!("|alpha| + |beta| = {} must be at least d + 1 = {}", a + b, d + 1)));
    }
    if p1.degree < a || p2.degree < b || d > p1.degree.min(p2.degree) {
        return Err(Error::Precondition(format!(
            "factor degrees ({}, {}) must cover |alpha| = {a}, |beta| = {b} and d = {d}",
            p1.degree, p2.degree
        )));
    }
    let s1 = p1.newton_summands_polynomial(pa)?;
    let s2 = p2.newton_summands_polynomial(pb)?;
    let mut out = Polynomial::zero(p1.nvars + p2.nvars, a + b);
    for (i1, i2) in BSet::new(d, a, b).iter() {
        out = out.add(&s1[i1].tensor_embed(&s2[i2]).with_degree(a + b));
    }
    Ok(out)
}
