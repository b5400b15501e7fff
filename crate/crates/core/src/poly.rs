//! Dense multivariate polynomials over `C64` in graded-lex monomial order.
//!
//! Monomials of total degree at most `d` in `n` variables are ranked first by
//! total degree and then lexicographically with the first variable most
//! significant, so `x` precedes `y` and `x^2` precedes `xy`. Because the
//! ranks of all monomials of degree `<= j` form the prefix `0..C(n+j, n)`,
//! raising a degree bound only appends zero coefficients.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Exponent vector `alpha` of a monomial `z^alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        assert!(!exponents.is_empty(), "multi-index needs at least one variable");
        MultiIndex(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    /// Unit index `e_i`.
    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Componentwise `self <= other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Concatenation `(alpha, beta)` used by tensor products.
    pub fn join(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    /// `alpha!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `ln(n!)`, summed exactly over integers.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Falling factorial `g (g-1) ... (g-a+1)`.
pub(crate) fn falling(g: u32, a: u32) -> f64 {
    if a > g {
        return 0.0;
    }
    ((g - a + 1)..=g).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient with overflow detection.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Dimension `C(n+d, n)` of the space of polynomials of degree `<= d` in `n` variables.
pub fn monomial_count(nvars: usize, degree: usize) -> Result<usize> {
    if nvars == 0 {
        return Err(Error::InvalidArgument("polynomials need at least one variable".into()));
    }
    nvars
        .checked_add(degree)
        .and_then(|s| binomial(s, nvars))
        .ok_or(Error::Overflow { nvars, degree })
}

/// Infallible `monomial_count` for sizes already validated by construction.
pub(crate) fn dim(nvars: usize, degree: usize) -> usize {
    monomial_count(nvars, degree).expect("polynomial space dimension overflow")
}

/// Number of monomials of exact total degree `j`.
fn homogeneous_count(nvars: usize, j: usize) -> usize {
    binomial(j + nvars - 1, nvars - 1).expect("overflow")
}

/// Graded-lex rank of `alpha`.
pub fn graded_lex_rank(alpha: &MultiIndex) -> usize {
    let n = alpha.nvars();
    let deg = alpha.degree() as usize;
    let mut rank = if deg == 0 { 0 } else { dim(n, deg - 1) };
    // Count same-degree indices that come first: those with a larger exponent
    // in the first variable where the prefix agrees.
    let mut remaining = deg;
    for (i, &a) in alpha.0.iter().enumerate().take(n - 1) {
        let rest = n - i - 1;
        for v in (a as usize + 1)..=remaining {
            rank += homogeneous_count(rest, remaining - v);
        }
        remaining -= a as usize;
    }
    rank
}

/// All multi-indices with `|alpha| <= degree`, in graded-lex order.
pub fn enumerate(nvars: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(dim(nvars, degree));
    let mut buf = vec![0u32; nvars];
    for j in 0..=degree {
        push_homogeneous(&mut buf, 0, j as u32, &mut out);
    }
    out
}

fn push_homogeneous(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos == buf.len() - 1 {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for v in (0..=remaining).rev() {
        buf[pos] = v;
        push_homogeneous(buf, pos + 1, remaining - v, out);
    }
}

/// Cached graded-lex enumeration for `(nvars, degree)`.
pub fn basis(nvars: usize, degree: usize) -> Arc<Vec<MultiIndex>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<MultiIndex>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("basis cache poisoned");
    guard
        .entry((nvars, degree))
        .or_insert_with(|| Arc::new(enumerate(nvars, degree)))
        .clone()
}

/// For each monomial of degree `<= degree` in `n1 + n2` variables, the ranks of
/// its first-block and second-block factors.
pub(crate) fn split_ranks(n1: usize, n2: usize, degree: usize) -> Arc<Vec<(usize, usize)>> {
    type Key = (usize, usize, usize);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<(usize, usize)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("split cache poisoned").get(&(n1, n2, degree)) {
        return hit.clone();
    }
    let joint = basis(n1 + n2, degree);
    let table: Vec<(usize, usize)> = joint
        .iter()
        .map(|g| {
            let left = MultiIndex(g.0[..n1].to_vec());
            let right = MultiIndex(g.0[n1..].to_vec());
            (graded_lex_rank(&left), graded_lex_rank(&right))
        })
        .collect();
    let table = Arc::new(table);
    cache
        .lock()
        .expect("split cache poisoned")
        .insert((n1, n2, degree), table.clone());
    table
}

/// Powers `z_i^k` for `k <= degree`, one row per coordinate.
pub(crate) fn power_table(z: &[C64], degree: usize) -> Vec<Vec<C64>> {
    z.iter()
        .map(|&zi| {
            let mut row = Vec::with_capacity(degree + 1);
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..=degree {
                row.push(acc);
                acc *= zi;
            }
            row
        })
        .collect()
}

/// Values `z^gamma` for every monomial of degree `<= degree`.
pub fn monomial_values(z: &[C64], degree: usize) -> Vec<C64> {
    let pw = power_table(z, degree);
    basis(z.len(), degree)
        .iter()
        .map(|g| g.0.iter().enumerate().map(|(i, &e)| pw[i][e as usize]).product())
        .collect()
}

/// A polynomial in `nvars` variables with coefficients for every monomial of
/// degree `<= degree`, stored in graded-lex order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    degree: usize,
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        Polynomial { nvars, degree, coeffs: vec![C64::new(0.0, 0.0); dim(nvars, degree)] }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        Polynomial { nvars, degree: 0, coeffs: vec![c] }
    }

    pub fn from_coeffs(nvars: usize, degree: usize, coeffs: Vec<C64>) -> Result<Self> {
        let expected = monomial_count(nvars, degree)?;
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Polynomial { nvars, degree, coeffs })
    }

    /// The monomial `c z^alpha`.
    pub fn monomial(alpha: &MultiIndex, c: C64) -> Self {
        let mut p = Polynomial::zero(alpha.nvars(), alpha.degree() as usize);
        p.coeffs[graded_lex_rank(alpha)] = c;
        p
    }

    /// The coordinate function `z_i`.
    pub fn variable(nvars: usize, i: usize) -> Self {
        Polynomial::monomial(&MultiIndex::unit(nvars, i), C64::new(1.0, 0.0))
    }

    /// Builds a polynomial from `(alpha, coefficient)` terms.
    pub fn from_terms(nvars: usize, terms: &[(MultiIndex, C64)]) -> Self {
        let degree = terms.iter().map(|(a, _)| a.degree() as usize).max().unwrap_or(0);
        let mut p = Polynomial::zero(nvars, degree);
        for (a, c) in terms {
            assert_eq!(a.nvars(), nvars, "term has wrong variable count");
            p.coeffs[graded_lex_rank(a)] += c;
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Degree bound (storage size), not necessarily attained.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C64 {
        if alpha.degree() as usize > self.degree {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[graded_lex_rank(alpha)]
    }

    /// Highest total degree with a coefficient above `tol` in modulus.
    pub fn effective_degree(&self, tol: f64) -> usize {
        let idx = basis(self.nvars, self.degree);
        self.coeffs
            .iter()
            .zip(idx.iter())
            .filter(|(c, _)| c.norm() > tol)
            .map(|(_, a)| a.degree() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Same polynomial with degree bound `degree`; truncates if smaller.
    pub fn with_degree(&self, degree: usize) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(dim(self.nvars, degree), C64::new(0.0, 0.0));
        Polynomial { nvars: self.nvars, degree, coeffs }
    }

    /// Part of total degree exactly `j`.
    pub fn homogeneous_part(&self, j: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars, j);
        if j <= self.degree {
            let lo = if j == 0 { 0 } else { dim(self.nvars, j - 1) };
            let hi = dim(self.nvars, j);
            out.coeffs[lo..hi].copy_from_slice(&self.coeffs[lo..hi]);
        }
        out
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        assert_eq!(z.len(), self.nvars, "evaluation point has wrong dimension");
        let pw = power_table(z, self.degree);
        let idx = basis(self.nvars, self.degree);
        self.coeffs
            .iter()
            .zip(idx.iter())
            .filter(|(c, _)| c.re != 0.0 || c.im != 0.0)
            .map(|(c, g)| {
                let m: C64 = g.0.iter().enumerate().map(|(i, &e)| pw[i][e as usize]).product();
                c * m
            })
            .sum()
    }

    pub fn eval_real(&self, x: &[f64]) -> C64 {
        let z: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.eval(&z)
    }

    /// Evaluation in double-double arithmetic, for polynomials whose
    /// monomial terms cancel by many orders of magnitude.
    pub fn eval_accurate(&self, z: &[C64]) -> C64 {
        use crate::dd::CDd;
        assert_eq!(z.len(), self.nvars, "evaluation point has wrong dimension");
        let pw: Vec<Vec<CDd>> = z
            .iter()
            .map(|&zi| {
                let zi = CDd::from(zi);
                let mut row = vec![CDd::one()];
                for k in 0..self.degree {
                    row.push(row[k].mul(zi));
                }
                row
            })
            .collect();
        let idx = basis(self.nvars, self.degree);
        let mut acc = CDd::default();
        for (c, g) in self.coeffs.iter().zip(idx.iter()) {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let mut term = CDd::from(*c);
            for (i, &e) in g.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul(pw[i][e as usize]);
                }
            }
            acc = acc.add(term);
        }
        acc.value()
    }

    fn check_same_space(&self, other: &Polynomial) {
        assert_eq!(self.nvars, other.nvars, "polynomials live in different variable counts");
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        self.check_same_space(other);
        let degree = self.degree.max(other.degree);
        let mut out = self.with_degree(degree);
        for (o, c) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o += c;
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    /// Product; degree bound is the sum of the bounds.
    pub fn multiply(&self, other: &Polynomial) -> Polynomial {
        self.check_same_space(other);
        let degree = self.degree + other.degree;
        let mut out = Polynomial::zero(self.nvars, degree);
        let ia = basis(self.nvars, self.degree);
        let ib = basis(self.nvars, other.degree);
        for (ca, a) in self.coeffs.iter().zip(ia.iter()) {
            if ca.re == 0.0 && ca.im == 0.0 {
                continue;
            }
            for (cb, b) in other.coeffs.iter().zip(ib.iter()) {
                if cb.re == 0.0 && cb.im == 0.0 {
                    continue;
                }
                out.coeffs[graded_lex_rank(&a.add(b))] += ca * cb;
            }
        }
        out
    }

    /// `D^alpha p`; the degree bound drops by `|alpha|`.
    pub fn derivative(&self, alpha: &MultiIndex) -> Polynomial {
        assert_eq!(alpha.nvars(), self.nvars, "derivative order has wrong dimension");
        let k = alpha.degree() as usize;
        if k > self.degree {
            return Polynomial::zero(self.nvars, 0);
        }
        let mut out = Polynomial::zero(self.nvars, self.degree - k);
        let idx = basis(self.nvars, self.degree);
        for (c, g) in self.coeffs.iter().zip(idx.iter()) {
            if !alpha.divides(g) {
                continue;
            }
            let factor: f64 = g.0.iter().zip(&alpha.0).map(|(&gi, &ai)| falling(gi, ai)).product();
            let reduced = MultiIndex(g.0.iter().zip(&alpha.0).map(|(gi, ai)| gi - ai).collect());
            out.coeffs[graded_lex_rank(&reduced)] += c * factor;
        }
        out
    }

    /// Exact value of `D^alpha p` at `z`.
    pub fn derivative_at(&self, alpha: &MultiIndex, z: &[C64]) -> C64 {
        if alpha.0.iter().all(|&a| a == 0) {
            return self.eval(z);
        }
        self.derivative(alpha).eval(z)
    }

    /// `(p ⊗ q)(z1, z2) = p(z1) q(z2)` in `n1 + n2` variables.
    pub fn tensor_embed(&self, other: &Polynomial) -> Polynomial {
        let n = self.nvars + other.nvars;
        let degree = self.degree + other.degree;
        let mut out = Polynomial::zero(n, degree);
        let ia = basis(self.nvars, self.degree);
        let ib = basis(other.nvars, other.degree);
        for (ca, a) in self.coeffs.iter().zip(ia.iter()) {
            if ca.re == 0.0 && ca.im == 0.0 {
                continue;
            }
            for (cb, b) in other.coeffs.iter().zip(ib.iter()) {
                out.coeffs[graded_lex_rank(&a.join(b))] += ca * cb;
            }
        }
        out
    }

    /// Polynomial in more variables that ignores the new ones; the original
    /// variables occupy positions `offset..offset + self.nvars`.
    pub fn lift(&self, total_vars: usize, offset: usize) -> Polynomial {
        assert!(offset + self.nvars <= total_vars);
        let mut out = Polynomial::zero(total_vars, self.degree);
        let idx = basis(self.nvars, self.degree);
        for (c, a) in self.coeffs.iter().zip(idx.iter()) {
            let mut e = vec![0u32; total_vars];
            e[offset..offset + self.nvars].copy_from_slice(&a.0);
            out.coeffs[graded_lex_rank(&MultiIndex(e))] += c;
        }
        out
    }

    /// Max modulus of coefficient differences after padding to a common degree.
    pub fn max_coeff_distance(&self, other: &Polynomial) -> f64 {
        self.check_same_space(other);
        let degree = self.degree.max(other.degree);
        let a = self.with_degree(degree);
        let b = other.with_degree(degree);
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    nvars: usize,
    degree: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialRepr {
            nvars: self.nvars,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolynomialRepr::deserialize(d)?;
        let coeffs = repr.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect();
        Polynomial::from_coeffs(repr.nvars, repr.degree, coeffs).map_err(D::Error::custom)
    }
}
