//! Double-double complex arithmetic for evaluating polynomials whose monomial
//! coefficients cancel heavily (orthonormal polynomials at high degree).

use crate::poly::C64;

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub(crate) fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub(crate) fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::renorm(s, e + self.lo + o.lo)
    }

    pub(crate) fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub(crate) fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    pub(crate) fn value(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CDd {
    re: Dd,
    im: Dd,
}

impl CDd {
    pub(crate) fn from(z: C64) -> Self {
        CDd { re: Dd::from(z.re), im: Dd::from(z.im) }
    }

    pub(crate) fn one() -> Self {
        CDd { re: Dd::from(1.0), im: Dd::default() }
    }

    pub(crate) fn add(self, o: CDd) -> CDd {
        CDd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    pub(crate) fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub(crate) fn value(self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}
