//! Model compact sets, their extremal functions and level sets, and sampled
//! Bernstein–Walsh checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{Affine, TestFunction};
use crate::poly::{Polynomial, C64};

/// `[-1, 1]` and the closed unit disk in `C`, and products of those.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "factors", rename_all = "snake_case")]
pub enum CompactModel {
    Interval,
    Disk,
    Product(Vec<CompactModel>),
}

impl CompactModel {
    /// One-variable factors, flattened.
    pub fn factors(&self) -> Vec<CompactModel> {
        match self {
            CompactModel::Product(v) => v.iter().flat_map(|m| m.factors()).collect(),
            other => vec![other.clone()],
        }
    }

    pub fn dim(&self) -> usize {
        self.factors().len()
    }

    /// Deterministic samples of the set: Chebyshev–Lobatto points on the
    /// interval, `res` angles times `res / 8` radii (plus the center) on the
    /// disk, tensor grids on products.
    pub fn sample(&self, res: usize) -> Vec<Vec<C64>> {
        let res = res.max(2);
        let per: Vec<Vec<C64>> = self
            .factors()
            .iter()
            .map(|f| match f {
                CompactModel::Interval => {
                    (0..res).map(|k| C64::new((PI * k as f64 / (res - 1) as f64).cos(), 0.0)).collect()
                }
                CompactModel::Disk => {
                    let nr = (res / 8).max(2);
                    let mut pts = vec![C64::default()];
                    for i in 1..=nr {
                        let r = i as f64 / nr as f64;
                        pts.extend((0..res).map(|k| C64::from_polar(r, 2.0 * PI * k as f64 / res as f64)));
                    }
                    pts
                }
                CompactModel::Product(_) => unreachable!("factors are flattened"),
            })
            .collect();
        tensor_points(&per)
    }

    /// Whether the zero set of `l` meets the set. Forms in one variable are
    /// decided exactly; others by sampling at resolution 256.
    pub fn meets_zero_set(&self, l: &Affine) -> bool {
        let factors = self.factors();
        let support = l.support();
        if support.is_empty() {
            return l.constant.norm() == 0.0;
        }
        if support.len() == 1 && support[0] < factors.len() {
            let i = support[0];
            let z = -l.constant / l.coeffs[i];
            return match factors[i] {
                CompactModel::Interval => z.im.abs() <= 1e-14 && z.re.abs() <= 1.0 + 1e-14,
                _ => z.norm() <= 1.0 + 1e-14,
            };
        }
        let scale = l.coeffs.iter().map(|c| c.norm()).sum::<f64>();
        self.sample(256).iter().any(|x| l.eval(x).norm() <= 1e-9 * scale)
    }
}

fn tensor_points(per: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = vec![Vec::new()];
    for pts in per {
        out = out
            .iter()
            .flat_map(|prefix| {
                pts.iter().map(move |&p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    out
}

/// Extremal (Green) function with pole at infinity: `log|z + sqrt(z^2 - 1)|`
/// on the interval, `max(0, log|z|)` on the disk, the maximum over factors
/// on products.
pub fn extremal_value(k: &CompactModel, z: &[C64]) -> Result<f64> {
    let factors = k.factors();
    if z.len() != factors.len() {
        return Err(Error::DimensionMismatch { what: "point vs compact model", expected: factors.len(), found: z.len() });
    }
    Ok(factors
        .iter()
        .zip(z)
        .map(|(f, &x)| match f {
            CompactModel::Interval => {
                let one = C64::new(1.0, 0.0);
                // this product of principal roots selects the branch with |w| >= 1
                let w = x + (x - one).sqrt() * (x + one).sqrt();
                w.norm().ln().max(0.0)
            }
            _ => x.norm().ln().max(0.0),
        })
        .fold(0.0, f64::max))
}

/// `rho(f)` for functions whose only singularities are zero sets of affine
/// forms in a single variable: `exp` of the smallest extremal value over
/// those zero sets (a factor's zero sits in a hyperplane that meets `K` in
/// every other coordinate). `None` for forms in several variables,
/// infinity for entire functions.
pub fn pole_rho(f: &TestFunction, k: &CompactModel) -> Option<f64> {
    let factors = k.factors();
    let mut rho = f64::INFINITY;
    for l in f.pole_forms() {
        let support = l.support();
        if support.len() != 1 || support[0] >= factors.len() {
            return None;
        }
        let i = support[0];
        let z = -l.constant / l.coeffs[i];
        let v = extremal_value(&factors[i], &[z]).ok()?;
        rho = rho.min(v.exp());
    }
    Some(rho)
}

/// Points with `V_K = ln R`: the radius-`R` circle for the disk, the image of
/// that circle under `w -> (w + 1/w) / 2` for the interval. For products the
/// tensor grid of factor boundaries is returned (`m` points per factor),
/// which carries the maximum modulus of polynomials on the level set.
pub fn level_set_boundary(k: &CompactModel, r: f64, m: usize) -> Result<Vec<Vec<C64>>> {
    if !(r > 1.0) {
        return Err(Error::InvalidArgument(format!("level R must exceed 1, got {r}")));
    }
    let per: Vec<Vec<C64>> = k
        .factors()
        .iter()
        .map(|f| {
            (0..m)
                .map(|j| {
                    let w = C64::from_polar(r, 2.0 * PI * j as f64 / m as f64);
                    match f {
                        CompactModel::Interval => (w + w.inv()) * 0.5,
                        _ => w,
                    }
                })
                .collect()
        })
        .collect();
    Ok(tensor_points(&per))
}

/// `‖p‖_{K_R} / (R^{deg p} ‖p‖_K)` with both sup norms sampled at
/// resolution `res`. Bernstein–Walsh gives at most one.
pub fn bws_check(p: &Polynomial, k: &CompactModel, r: f64, res: usize) -> Result<f64> {
    if p.nvars() != k.dim() {
        return Err(Error::DimensionMismatch { what: "polynomial vs compact model", expected: k.dim(), found: p.nvars() });
    }
    let sup = |pts: &[Vec<C64>]| pts.iter().map(|x| p.eval(x).norm()).fold(0.0, f64::max);
    let on_k = sup(&k.sample(res));
    let on_kr = sup(&level_set_boundary(k, r, res)?);
    let deg = p.effective_degree(0.0) as i32;
    Ok(on_kr / (r.powi(deg) * on_k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiIndex;
    use rand::{Rng, SeedableRng};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn square() -> CompactModel {
        CompactModel::Product(vec![CompactModel::Interval, CompactModel::Disk])
    }

    #[test]
    fn extremal_examples() {
        let i = CompactModel::Interval;
        for x in [-1.0, -0.3, 0.0, 0.99, 1.0] {
            assert!(extremal_value(&i, &[r(x)]).unwrap().abs() < 1e-12);
        }
        assert!((extremal_value(&CompactModel::Disk, &[r(2.0)]).unwrap() - 2f64.ln()).abs() < 1e-15);
        let v = extremal_value(&i, &[r(2.0)]).unwrap();
        assert!((v - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-14);
        // branch check on the negative axis and in the lower half plane
        assert!((extremal_value(&i, &[r(-2.0)]).unwrap() - v).abs() < 1e-14);
        let z = C64::new(0.3, -0.8);
        assert!((extremal_value(&i, &[z]).unwrap() - extremal_value(&i, &[z.conj()]).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn interval_value_matches_chebyshev_growth() {
        // |2 T_d(z)|^{1/d} = exp V(z) (1 + O(exp(-2 d V))); T_d = cosh(d acosh z)
        let z = C64::new(0.4, 0.7);
        let d = 60.0;
        let t = (z.acosh() * d).cosh();
        let v = extremal_value(&CompactModel::Interval, &[z]).unwrap();
        assert!(((2.0 * t).norm().ln() / d - v).abs() < 1e-12);
    }

    #[test]
    fn extremal_is_nonnegative_and_product_is_max() {
        let k = square();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let z = [C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)), C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))];
            let v = extremal_value(&k, &z).unwrap();
            let v1 = extremal_value(&CompactModel::Interval, &z[..1]).unwrap();
            let v2 = extremal_value(&CompactModel::Disk, &z[1..]).unwrap();
            assert!(v >= 0.0);
            assert!((v - v1.max(v2)).abs() < 1e-12);
        }
        for z in k.sample(64) {
            assert!(extremal_value(&k, &z).unwrap() < 1e-12);
        }
    }

    #[test]
    fn level_sets_have_constant_value() {
        for k in [CompactModel::Interval, CompactModel::Disk, square()] {
            for rr in [1.5, 2.0, 5.0] {
                for z in level_set_boundary(&k, rr, 40).unwrap() {
                    assert!((extremal_value(&k, &z).unwrap() - rr.ln()).abs() < 1e-10);
                }
            }
        }
        // ellipse semi-axes
        let pts = level_set_boundary(&CompactModel::Interval, 2.0, 4).unwrap();
        assert!((pts[0][0].re - 1.25).abs() < 1e-15);
        assert!((pts[1][0].im - 0.75).abs() < 1e-15);
        assert!(level_set_boundary(&CompactModel::Disk, 1.0, 4).is_err());
    }

    #[test]
    fn bws_examples() {
        let zd = Polynomial::monomial(&MultiIndex::new(vec![7]), r(1.0));
        assert!((bws_check(&zd, &CompactModel::Disk, 2.0, 128).unwrap() - 1.0).abs() < 1e-12);

        // T_6 = 32x^6 - 48x^4 + 18x^2 - 1 has ellipse sup (R^6 + R^-6) / 2
        let t6 = Polynomial::from_terms(
            1,
            &[
                (MultiIndex::new(vec![6]), r(32.0)),
                (MultiIndex::new(vec![4]), r(-48.0)),
                (MultiIndex::new(vec![2]), r(18.0)),
                (MultiIndex::new(vec![0]), r(-1.0)),
            ],
        );
        let ratio = bws_check(&t6, &CompactModel::Interval, 2.0, 256).unwrap();
        assert!(ratio > 0.5 && ratio <= 1.0);
        assert!((ratio - (64.0 + 1.0 / 64.0) / 2.0 / 64.0).abs() < 1e-9);
    }

    #[test]
    fn pole_locus_membership() {
        let k = square();
        assert!(k.meets_zero_set(&Affine::real(&[1.0], -0.5)));
        assert!(!k.meets_zero_set(&Affine::real(&[1.0], -2.0)));
        assert!(k.meets_zero_set(&Affine::real(&[0.0, 2.0], C64::new(0.0, 1.0).re)));
        assert!(!k.meets_zero_set(&Affine::real(&[0.0, 1.0], -1.5)));
        assert!(!k.meets_zero_set(&Affine::new(vec![r(1.0)], C64::new(0.0, -0.5))));
    }

    #[test]
    fn pole_rho_examples() {
        let k = CompactModel::Product(vec![CompactModel::Interval, CompactModel::Interval]);
        let f = TestFunction::Product(vec![
            TestFunction::Recip(Affine::real(&[1.0], -2.0)),
            TestFunction::Recip(Affine::real(&[0.0, 1.0], -3.0)),
        ]);
        assert!((pole_rho(&f, &k).unwrap() - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert_eq!(pole_rho(&TestFunction::Exp(Affine::real(&[1.0, 1.0], 0.0)), &k), Some(f64::INFINITY));
        assert_eq!(pole_rho(&TestFunction::Recip(Affine::real(&[1.0, 1.0], -5.0)), &k), None);
        let disk = CompactModel::Disk;
        assert!((pole_rho(&TestFunction::Recip(Affine::real(&[2.0], -6.0)), &disk).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn serde_form() {
        let k: CompactModel = serde_json::from_str(r#"{"kind":"product","factors":[{"kind":"interval"},{"kind":"disk"}]}"#).unwrap();
        assert_eq!(k, square());
    }
}
