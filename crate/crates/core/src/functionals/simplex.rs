//! Integration over the standard simplex `S_k = {t in [0,1]^k : sum t_i <= 1}`.

use crate::poly::{ln_factorial, MultiIndex};

/// `∫_{S_k} t^beta dt = prod(beta_i!) / (|beta| + k)!`.
pub fn simplex_monomial_moment(beta: &MultiIndex, k: usize) -> f64 {
    assert!(k >= 1, "simplex dimension must be positive");
    assert_eq!(beta.nvars(), k, "exponent length must equal the simplex dimension");
    let num: f64 = beta.0.iter().map(|&b| ln_factorial(b)).sum();
    let den = ln_factorial(beta.degree() + k as u32);
    (num - den).exp()
}

/// Grundmann–Möller rule of polynomial exactness `2s + 1` on `S_k`.
///
/// Points are produced in barycentric form `(lambda_0, ..., lambda_k)` with
/// `t_i = lambda_i` for `i >= 1`. Weights integrate against `dt`, so they sum
/// to `1/k!`. The rule has `C(s+k+1, k+1)` nodes and alternating weights.
#[derive(Clone, Copy, Debug)]
pub struct GrundmannMoller {
    pub dim: usize,
    pub s: usize,
}

impl GrundmannMoller {
    /// Smallest rule that integrates polynomials of degree `exactness` exactly.
    pub fn with_exactness(dim: usize, exactness: usize) -> Self {
        GrundmannMoller { dim, s: exactness.saturating_sub(1).div_ceil(2) }
    }

    pub fn exactness(&self) -> usize {
        2 * self.s + 1
    }

    pub fn node_count(&self) -> usize {
        crate::poly::binomial(self.s + self.dim + 1, self.dim + 1).unwrap_or(usize::MAX)
    }

    /// Calls `visit(lambda, weight)` for each node.
    pub fn for_each<F: FnMut(&[f64], f64)>(&self, mut visit: F) {
        let n = self.dim;
        let d = 2 * self.s + 1;
        let mut beta = vec![0u32; n + 1];
        let mut lambda = vec![0.0; n + 1];
        for i in 0..=self.s {
            let denom = (d + n - 2 * i) as f64;
            // (-1)^i 2^{-2s} (d+n-2i)^d / (i! (d+n-i)!)
            let ln_mag = d as f64 * denom.ln()
                - (2 * self.s) as f64 * std::f64::consts::LN_2
                - ln_factorial(i as u32)
                - ln_factorial((d + n - i) as u32);
            let w = if i % 2 == 0 { ln_mag.exp() } else { -ln_mag.exp() };
            compositions(&mut beta, 0, (self.s - i) as u32, &mut |b| {
                for (l, &bj) in lambda.iter_mut().zip(b) {
                    *l = (2 * bj + 1) as f64 / denom;
                }
                visit(&lambda, w);
            });
        }
    }
}

fn compositions<F: FnMut(&[u32])>(buf: &mut [u32], pos: usize, remaining: u32, visit: &mut F) {
    if pos == buf.len() - 1 {
        buf[pos] = remaining;
        visit(buf);
        return;
    }
    for v in 0..=remaining {
        buf[pos] = v;
        compositions(buf, pos + 1, remaining - v, visit);
    }
}
