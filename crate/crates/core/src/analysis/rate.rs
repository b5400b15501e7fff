//! Geometric convergence rates from sup-error sequences.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::extremal::CompactModel;
use super::fit::linear_fit;
use crate::error::{Error, Result};
use crate::functionals::TestFunction;
use crate::points::QuadratureMeasure;
use crate::poly::C64;
use crate::projector::NewtonStructuredProjector;
use crate::zoo::orthogonal;

/// Log-linear fit `ln e_d ≈ d ln q + c` over the tail half of the degrees
/// that lie above the rounding floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Degrees entering the regression.
    pub degrees: Vec<usize>,
    /// `q = exp(slope)`; zero when the errors drop to the floor faster
    /// than any geometric trend.
    pub rate: f64,
    /// `exp(slope ± 2 stderr)`.
    pub rate_band: (f64, f64),
    /// First degree judged to be at the rounding floor, if any.
    pub floor_degree: Option<usize>,
}

/// Errors smaller than this fraction of the largest one may be at the floor.
const FLOOR_RELATIVE: f64 = 1e-7;

/// Errors below this multiple of the function scale are rounding noise.
const FLOOR_ROUNDING: f64 = 100.0 * f64::EPSILON;

/// Fits the geometric rate of `errors[i]` at `degrees[i]`.
///
/// The floor starts at the first degree whose error is below
/// `1e-7 * max` and is never improved upon by a factor of ten over at
/// least two further degrees, or whose error is below `100 eps` times the
/// largest error.
/// Degrees from there on are dropped; if the drop into the floor is much
/// steeper than the fitted trend (exact reproduction), the rate is zero.
pub fn fit_geometric_rate(degrees: &[usize], errors: &[f64]) -> Result<RateFit> {
    fit_geometric_rate_scaled(degrees, errors, 0.0)
}

/// As [`fit_geometric_rate`], with the rounding floor measured against
/// `max(scale, largest error)`; pass the sup norm of the approximated
/// function as `scale`.
pub fn fit_geometric_rate_scaled(degrees: &[usize], errors: &[f64], scale: f64) -> Result<RateFit> {
    if degrees.len() != errors.len() {
        return Err(Error::DimensionMismatch { what: "degrees vs errors", expected: degrees.len(), found: errors.len() });
    }
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("degrees must be strictly increasing".into()));
    }
    let emax = errors.iter().cloned().fold(0.0, f64::max);
    let at_floor = |i: usize| {
        let e = errors[i];
        e <= FLOOR_ROUNDING * emax.max(scale)
            || (i + 2 < errors.len() && e <= FLOOR_RELATIVE * emax && errors[i..].iter().all(|&x| x >= e / 10.0))
    };
    let floor = (0..errors.len()).find(|&i| errors[i] <= 0.0 || at_floor(i));
    let usable = floor.unwrap_or(errors.len());
    let floor_degree = floor.map(|i| degrees[i]);
    if usable < 2 {
        return Ok(RateFit { degrees: degrees[..usable].to_vec(), rate: 0.0, rate_band: (0.0, 0.0), floor_degree });
    }
    let start = (usable / 2).min(usable - 2);
    let xs: Vec<f64> = degrees[start..usable].iter().map(|&d| d as f64).collect();
    let ys: Vec<f64> = errors[start..usable].iter().map(|e| e.ln()).collect();
    let fit = linear_fit(&xs, &ys);
    if let Some(i) = floor {
        let predicted = fit.intercept + fit.slope * degrees[i] as f64;
        if errors[i] <= 0.0 || predicted - errors[i].ln() > 1e3f64.ln() {
            return Ok(RateFit { degrees: degrees[start..usable].to_vec(), rate: 0.0, rate_band: (0.0, 0.0), floor_degree });
        }
    }
    let band = 2.0 * fit.slope_stderr;
    Ok(RateFit {
        degrees: degrees[start..usable].to_vec(),
        rate: fit.slope.exp(),
        rate_band: ((fit.slope - band).exp(), (fit.slope + band).exp()),
        floor_degree,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub degrees: Vec<usize>,
    pub sup_errors: Vec<f64>,
    pub fit: RateFit,
    /// `1 / rate`; infinite when the errors reached the floor abruptly.
    pub rho: f64,
    pub rho_band: (f64, f64),
}

/// Sup error of the orthogonal projections `P_d f`, `d = 1..=dmax`, on
/// `grid`, and the rate `rho` fitted from them.
///
/// If the monomial system of the orthogonal projector becomes too
/// ill-conditioned before `dmax`, the sweep stops one degree below the
/// failing level.
pub fn rho_estimate(
    f: &TestFunction,
    k: &CompactModel,
    dmax: usize,
    m: Arc<QuadratureMeasure>,
    grid: &[Vec<C64>],
) -> Result<RhoEstimate> {
    if let Some(l) = f.pole_forms().into_iter().find(|l| k.meets_zero_set(l)) {
        return Err(Error::Pole { locus: l.describe() });
    }
    let p = orthogonal_capped(m, dmax)?;
    let values: Vec<C64> = grid.iter().map(|x| f.eval(x)).collect::<Result<_>>()?;
    let levels = p.apply_levels(f)?;
    let degrees: Vec<usize> = (1..levels.len()).collect();
    let sup_errors: Vec<f64> = degrees
        .iter()
        .map(|&d| grid.iter().zip(&values).map(|(x, v)| (levels[d].eval(x) - v).norm()).fold(0.0, f64::max))
        .collect();
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let fit = fit_geometric_rate_scaled(&degrees, &sup_errors, scale)?;
    let inv = |q: f64| if q > 0.0 { 1.0 / q } else { f64::INFINITY };
    Ok(RhoEstimate {
        rho: inv(fit.rate),
        rho_band: (inv(fit.rate_band.1), inv(fit.rate_band.0)),
        degrees,
        sup_errors,
        fit,
    })
}

/// The orthogonal projector of the highest degree `<= dmax` whose leading
/// blocks pass the conditioning check.
pub fn orthogonal_capped(m: Arc<QuadratureMeasure>, dmax: usize) -> Result<NewtonStructuredProjector> {
    let mut d = dmax;
    loop {
        match orthogonal(m.clone(), d) {
            Err(Error::NestedUnisolvenceFailure { level, .. }) if level >= 2 => d = level - 1,
            other => return other,
        }
    }
}
