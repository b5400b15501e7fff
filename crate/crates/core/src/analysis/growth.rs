//! Growth quantities of entire functions: monomial maxima on norm balls,
//! weighted sup norms of monomials, coefficient bounds, the Gelfond constant
//! and point densities.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::Differentiable;
use crate::points::PointSequence;
use crate::poly::{MultiIndex, C64};

/// Norms on `C^n` whose unit balls are invariant under coordinatewise
/// rotations, so they only depend on the moduli `|z_i|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Norm {
    LInf,
    L1,
    L2,
    /// `a1 N1(z1) + a2 N2(z2)` with `z1` the first `split` coordinates.
    WeightedSum { split: usize, a1: f64, a2: f64, first: Box<Norm>, second: Box<Norm> },
    /// `(a1 N1(z1)^omega + a2 N2(z2)^omega)^(1/omega)`.
    PowerCombined { split: usize, a1: f64, a2: f64, omega: f64, first: Box<Norm>, second: Box<Norm> },
}

/// `x^x` with `0^0 = 1`, in logs.
fn xlnx(k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * k.ln()
    }
}

impl Norm {
    fn check(&self) -> Result<()> {
        match self {
            Norm::WeightedSum { a1, a2, first, second, .. } | Norm::PowerCombined { a1, a2, first, second, .. } => {
                if !(*a1 > 0.0 && *a2 > 0.0) {
                    return Err(Error::InvalidArgument(format!("norm weights must be positive, got {a1}, {a2}")));
                }
                if let Norm::PowerCombined { omega, .. } = self {
                    if !(*omega > 0.0) {
                        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
                    }
                }
                first.check()?;
                second.check()
            }
            _ => Ok(()),
        }
    }

    /// The norm of any point with coordinate moduli `r`.
    pub fn of_moduli(&self, r: &[f64]) -> f64 {
        match self {
            Norm::LInf => r.iter().cloned().fold(0.0, f64::max),
            Norm::L1 => r.iter().sum(),
            Norm::L2 => r.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::WeightedSum { split, a1, a2, first, second } => {
                a1 * first.of_moduli(&r[..*split]) + a2 * second.of_moduli(&r[*split..])
            }
            Norm::PowerCombined { split, a1, a2, omega, first, second } => {
                (a1 * first.of_moduli(&r[..*split]).powf(*omega) + a2 * second.of_moduli(&r[*split..]).powf(*omega))
                    .powf(1.0 / omega)
            }
        }
    }

    pub fn of(&self, z: &[C64]) -> f64 {
        self.of_moduli(&z.iter().map(|c| c.norm()).collect::<Vec<_>>())
    }

    /// `delta_N(alpha) = max { |z^alpha| : N(z) <= 1 }` in closed form.
    pub fn delta(&self, alpha: &MultiIndex) -> Result<f64> {
        self.check()?;
        Ok(self.ln_delta(alpha.exponents()).exp())
    }

    fn ln_delta(&self, alpha: &[u32]) -> f64 {
        let k: f64 = alpha.iter().map(|&a| a as f64).sum();
        match self {
            Norm::LInf => 0.0,
            Norm::L1 => alpha.iter().map(|&a| xlnx(a as f64)).sum::<f64>() - xlnx(k),
            Norm::L2 => 0.5 * (alpha.iter().map(|&a| xlnx(a as f64)).sum::<f64>() - xlnx(k)),
            Norm::WeightedSum { split, a1, a2, first, second } | Norm::PowerCombined { split, a1, a2, first, second, .. } => {
                let (b1, b2) = alpha.split_at(*split);
                let k1: f64 = b1.iter().map(|&a| a as f64).sum();
                let k2 = k - k1;
                let bracket = xlnx(k1) + xlnx(k2) - xlnx(k) - k1 * a1.ln() - k2 * a2.ln();
                let scale = match self {
                    Norm::PowerCombined { omega, .. } => 1.0 / omega,
                    _ => 1.0,
                };
                scale * bracket + first.ln_delta(b1) + second.ln_delta(b2)
            }
        }
    }
}

/// Order `omega`, scale `A` and norm of the growth space
/// `{ f : M_N(f, r) <= M exp(A r^omega) }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub omega: f64,
    pub a: f64,
    pub norm: Norm,
}

/// `sup_r M_N(z^alpha, r) exp(-A r^omega) = delta_N(alpha) (|alpha| / (e omega A))^(|alpha| / omega)`.
pub fn growth_norm_monomial(alpha: &MultiIndex, params: &GrowthParams) -> Result<f64> {
    if !(params.omega > 0.0 && params.a > 0.0) {
        return Err(Error::InvalidArgument(format!("omega and A must be positive, got {} and {}", params.omega, params.a)));
    }
    let k = alpha.degree() as f64;
    let delta = params.norm.delta(alpha)?;
    if k == 0.0 {
        return Ok(delta);
    }
    Ok(delta * ((k / (E * params.omega * params.a)).ln() * k / params.omega).exp())
}

/// Sampled `M_N(f, t) = max { |f(z)| : N(z) = t }` over `n` variables.
///
/// `directions * n` points of a Kronecker sequence in the parameter box
/// (moduli on the positive part of the sphere, one phase per coordinate)
/// are evaluated, then the eight best are refined by compass search.
pub fn sphere_max(f: &dyn Fn(&[C64]) -> C64, norm: &Norm, n: usize, t: f64, directions: usize) -> f64 {
    let dims = 2 * n - 1;
    let upper: Vec<f64> = (0..dims).map(|j| if j < n - 1 { PI / 2.0 } else { 2.0 * PI }).collect();
    let point = |p: &[f64]| -> Vec<C64> {
        let mut x = vec![1.0; n];
        for (j, &th) in p[..n - 1].iter().enumerate() {
            x[j] *= th.cos();
            for v in &mut x[j + 1..] {
                *v *= th.sin();
            }
        }
        let s = norm.of_moduli(&x);
        x.iter().zip(&p[n - 1..]).map(|(&m, &phi)| C64::from_polar(t * m / s, phi)).collect()
    };
    let value = |p: &[f64]| f(&point(p)).norm();

    // R-sequence: phi_d is the positive root of x^(d+1) = x + 1
    let mut g = 2.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (dims as f64 + 1.0));
    }
    let steps: Vec<f64> = (1..=dims).map(|j| g.powi(-(j as i32)).fract()).collect();
    let count = directions.max(1) * n;
    let mut samples: Vec<(f64, Vec<f64>)> = (0..count)
        .map(|i| {
            let p: Vec<f64> = steps.iter().zip(&upper).map(|(s, u)| ((0.5 + s * i as f64).fract()) * u).collect();
            (value(&p), p)
        })
        .collect();
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = samples[0].0;
    for (v0, p0) in samples.into_iter().take(8) {
        let (mut v, mut p) = (v0, p0);
        let mut h = 0.05;
        while h > 1e-11 {
            let mut improved = false;
            for j in 0..dims {
                for sgn in [1.0, -1.0] {
                    let mut q = p.clone();
                    q[j] = (q[j] + sgn * h * upper[j]).clamp(0.0, upper[j]);
                    let vq = value(&q);
                    if vq > v {
                        v = vq;
                        p = q;
                        improved = true;
                    }
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        best = best.max(v);
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffBound {
    /// `|a_alpha|`.
    pub coefficient: f64,
    /// Sampled `M_N(f, t)`.
    pub sphere_max: f64,
    pub delta: f64,
    /// `t^-|alpha| M_N(f, t) / delta_N(alpha)`.
    pub bound: f64,
    /// `|a_alpha| <= bound` up to a relative `1e-9` sampling allowance.
    pub holds: bool,
}

/// Cauchy-type bound on the power series coefficient `a_alpha = D^alpha f(0) / alpha!`.
pub fn power_series_coeff_bound(
    f: &dyn Differentiable,
    alpha: &MultiIndex,
    norm: &Norm,
    t: f64,
    directions: usize,
) -> Result<CoeffBound> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {t}")));
    }
    let n = alpha.nvars();
    let zero = vec![C64::default(); n];
    let coefficient = (f.derivative_at(alpha.exponents(), &zero)? / alpha.factorial()).norm();
    let err = std::cell::RefCell::new(None);
    let m = sphere_max(
        &|z| match f.value_at(z) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                C64::default()
            }
        },
        norm,
        n,
        t,
        directions,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let delta = norm.delta(alpha)?;
    let bound = t.powi(-(alpha.degree() as i32)) * m / delta;
    Ok(CoeffBound { coefficient, sphere_max: m, delta, bound, holds: coefficient <= bound * (1.0 + 1e-9) })
}

/// `c(omega) = ∫_0^{1/2} t^(omega-1) / (1 - t) dt`, computed as
/// `(1/omega) ∫_0^{2^-omega} du / (1 - u^(1/omega))` after `t = u^(1/omega)`.
pub fn gelfond_constant(omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let b = 0.5f64.powf(omega);
    let out = quadrature::integrate(|u: f64| 1.0 / (1.0 - u.powf(1.0 / omega)), 0.0, b, 1e-14 * omega);
    Ok(out.integral / omega)
}

/// Empirical `liminf_r N(r) / r^omega`, `N(r) = #{ i : N(a_i) <= r }`.
///
/// Norms are sorted first. The infimum is taken over 400 log-spaced radii
/// between `sqrt(r_top)` and `r_top`, where `r_top = min(rmax, largest norm)`
/// keeps the finite sequence from looking sparse beyond its end.
pub fn omega_density(points: &PointSequence, norm: &Norm, omega: f64, rmax: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let mut norms: Vec<f64> = points.points.iter().map(|p| norm.of(p)).collect();
    norms.sort_by(f64::total_cmp);
    let top = rmax.min(*norms.last().ok_or_else(|| Error::InvalidArgument("empty point sequence".into()))?);
    if !(top > 1.0) {
        return Err(Error::InvalidArgument(format!("radius range must extend beyond 1, got {top}")));
    }
    let lo = top.sqrt().ln();
    let hi = top.ln();
    let steps = 400;
    Ok((0..=steps)
        .map(|i| {
            let r = (lo + (hi - lo) * i as f64 / steps as f64).exp();
            let count = norms.partition_point(|&x| x <= r);
            count as f64 / r.powf(omega)
        })
        .fold(f64::INFINITY, f64::min))
}
