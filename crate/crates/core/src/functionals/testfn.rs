//! Closed-form test functions with exact partial derivatives.
//!
//! Config files describe them in a prefix grammar:
//!
//! ```text
//! 1.5 | [re, im]                      constant
//! ["const", c]                        constant
//! ["x", i]                            coordinate z_i
//! ["affine", [c_0, c_1, ...], c]      sum c_i z_i + c
//! ["exp", <affine>]                   exp of an affine form
//! ["recip", <affine>]                 1 / affine form
//! ["pow", <affine>, k]                affine form to the k-th power
//! ["poly", {nvars, degree, coeffs}]   explicit polynomial
//! ["add", e_1, e_2, ...]              sum
//! ["mul", e_1, e_2, ...]              product
//! ```

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::{falling, factorial, MultiIndex, Polynomial, C64};

/// A function that can report exact partial derivatives at a point.
pub trait Differentiable {
    /// `D^alpha f(z)`; `alpha` and `z` have the function's variable count.
    fn derivative_at(&self, alpha: &[u32], z: &[C64]) -> Result<C64>;

    fn value_at(&self, z: &[C64]) -> Result<C64> {
        let zero = vec![0u32; z.len()];
        self.derivative_at(&zero, z)
    }
}

impl Differentiable for Polynomial {
    fn derivative_at(&self, alpha: &[u32], z: &[C64]) -> Result<C64> {
        Ok(Polynomial::derivative_at(self, &MultiIndex(alpha.to_vec()), z))
    }
}

/// `sum_i coeffs[i] z_i + constant`. Missing trailing coefficients are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    pub coeffs: Vec<C64>,
    pub constant: C64,
}

impl Affine {
    pub fn new(coeffs: Vec<C64>, constant: C64) -> Self {
        Affine { coeffs, constant }
    }

    pub fn real(coeffs: &[f64], constant: f64) -> Self {
        Affine {
            coeffs: coeffs.iter().map(|&c| C64::new(c, 0.0)).collect(),
            constant: C64::new(constant, 0.0),
        }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.coeffs.iter().zip(z).map(|(c, x)| c * x).sum::<C64>() + self.constant
    }

    fn coeff(&self, i: usize) -> C64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    /// `prod_i c_i^{alpha_i}`, the chain-rule factor of `D^alpha g(l(z))`.
    fn chain_factor(&self, alpha: &[u32]) -> C64 {
        alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| self.coeff(i).powu(a))
            .product()
    }

    /// Variables with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() > 0.0 {
                s.push_str(&format!("({c})*z{i} + "));
            }
        }
        s.push_str(&format!("({}) = 0", self.constant));
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    Const(C64),
    Coord(usize),
    Affine(Affine),
    Exp(Affine),
    Recip(Affine),
    Pow(Affine, u32),
    Poly(Polynomial),
    Sum(Vec<TestFunction>),
    Product(Vec<TestFunction>),
}

impl TestFunction {
    /// Smallest ambient dimension the expression makes sense in.
    pub fn min_nvars(&self) -> usize {
        use TestFunction::*;
        match self {
            Const(_) => 0,
            Coord(i) => i + 1,
            Affine(l) | Exp(l) | Recip(l) | Pow(l, _) => l.coeffs.len(),
            Poly(p) => p.nvars(),
            Sum(v) | Product(v) => v.iter().map(|f| f.min_nvars()).max().unwrap_or(0),
        }
    }

    /// Affine forms whose zero sets are poles.
    pub fn pole_forms(&self) -> Vec<&Affine> {
        use TestFunction::*;
        match self {
            Recip(l) => vec![l],
            Sum(v) | Product(v) => v.iter().flat_map(|f| f.pole_forms()).collect(),
            _ => Vec::new(),
        }
    }

    /// True when the expression is a polynomial (no exp or reciprocal).
    pub fn as_polynomial(&self, nvars: usize) -> Option<Polynomial> {
        use TestFunction::*;
        let one = C64::new(1.0, 0.0);
        match self {
            Const(c) => Some(Polynomial::constant(nvars, *c)),
            Coord(i) => Some(Polynomial::variable(nvars, *i)),
            Affine(l) => Some(affine_poly(l, nvars)),
            Pow(l, k) => {
                let base = affine_poly(l, nvars);
                Some((0..*k).fold(Polynomial::constant(nvars, one), |acc, _| acc.multiply(&base)))
            }
            Poly(p) => (p.nvars() == nvars).then(|| p.clone()),
            Sum(v) => v.iter().try_fold(Polynomial::constant(nvars, C64::default()), |acc, f| {
                f.as_polynomial(nvars).map(|p| acc.add(&p))
            }),
            Product(v) => v.iter().try_fold(Polynomial::constant(nvars, one), |acc, f| {
                f.as_polynomial(nvars).map(|p| acc.multiply(&p))
            }),
            Exp(_) | Recip(_) => None,
        }
    }

    /// The same function of variables `offset..` in a space of `total`
    /// variables; `Poly` nodes are lifted accordingly.
    pub fn embed(&self, total: usize, offset: usize) -> TestFunction {
        use TestFunction as T;
        let shift = |l: &Affine| {
            let mut coeffs = vec![C64::default(); offset];
            coeffs.extend_from_slice(&l.coeffs);
            Affine::new(coeffs, l.constant)
        };
        match self {
            T::Const(c) => T::Const(*c),
            T::Coord(i) => T::Coord(i + offset),
            T::Affine(l) => T::Affine(shift(l)),
            T::Exp(l) => T::Exp(shift(l)),
            T::Recip(l) => T::Recip(shift(l)),
            T::Pow(l, k) => T::Pow(shift(l), *k),
            T::Poly(p) => T::Poly(p.lift(total, offset)),
            T::Sum(v) => T::Sum(v.iter().map(|f| f.embed(total, offset)).collect()),
            T::Product(v) => T::Product(v.iter().map(|f| f.embed(total, offset)).collect()),
        }
    }

    /// `(z^1, z^2) ↦ f(z^1) g(z^2)` with `f` using the first `n1` variables
    /// and `g` the following `n2`.
    pub fn tensor(f: &TestFunction, n1: usize, g: &TestFunction, n2: usize) -> TestFunction {
        TestFunction::Product(vec![f.embed(n1 + n2, 0), g.embed(n1 + n2, n1)])
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        self.value_at(z)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        parse(v)
    }

    pub fn to_json(&self) -> Value {
        use TestFunction::*;
        match self {
            Const(c) => json!(["const", complex_json(*c)]),
            Coord(i) => json!(["x", i]),
            Affine(l) => affine_json("affine", l),
            Exp(l) => json!(["exp", affine_json("affine", l)]),
            Recip(l) => json!(["recip", affine_json("affine", l)]),
            Pow(l, k) => json!(["pow", affine_json("affine", l), k]),
            Poly(p) => json!(["poly", serde_json::to_value(p).expect("polynomial serializes")]),
            Sum(v) => {
                let mut a = vec![json!("add")];
                a.extend(v.iter().map(|f| f.to_json()));
                Value::Array(a)
            }
            Product(v) => {
                let mut a = vec![json!("mul")];
                a.extend(v.iter().map(|f| f.to_json()));
                Value::Array(a)
            }
        }
    }
}

fn affine_poly(l: &Affine, nvars: usize) -> Polynomial {
    let mut p = Polynomial::constant(nvars, l.constant).with_degree(1);
    for (i, c) in l.coeffs.iter().enumerate().take(nvars) {
        p = p.add(&Polynomial::variable(nvars, i).scale(*c));
    }
    p
}

impl Differentiable for TestFunction {
    fn derivative_at(&self, alpha: &[u32], z: &[C64]) -> Result<C64> {
        use TestFunction::*;
        let order: u32 = alpha.iter().sum();
        let zero = C64::new(0.0, 0.0);
        Ok(match self {
            Const(c) => {
                if order == 0 {
                    *c
                } else {
                    zero
                }
            }
            Coord(i) => match order {
                0 => z[*i],
                1 if alpha[*i] == 1 => C64::new(1.0, 0.0),
                _ => zero,
            },
            Affine(l) => match order {
                0 => l.eval(z),
                1 => l.coeff(alpha.iter().position(|&a| a == 1).expect("order one")),
                _ => zero,
            },
            Exp(l) => l.chain_factor(alpha) * l.eval(z).exp(),
            Recip(l) => {
                let v = l.eval(z);
                if v.norm() == 0.0 {
                    return Err(Error::Pole { locus: l.describe() });
                }
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                l.chain_factor(alpha) * sign * factorial(order) * v.powi(-(order as i32) - 1)
            }
            Pow(l, k) => {
                if order > *k {
                    zero
                } else {
                    l.chain_factor(alpha) * falling(*k, order) * l.eval(z).powu(k - order)
                }
            }
            Poly(p) => Polynomial::derivative_at(p, &MultiIndex(alpha.to_vec()), z),
            Sum(v) => {
                let mut acc = zero;
                for f in v {
                    acc += f.derivative_at(alpha, z)?;
                }
                acc
            }
            Product(v) => leibniz(v, alpha, z)?,
        })
    }
}

/// Generalized Leibniz rule over a list of factors.
fn leibniz(factors: &[TestFunction], alpha: &[u32], z: &[C64]) -> Result<C64> {
    match factors {
        [] => Ok(if alpha.iter().all(|&a| a == 0) { C64::new(1.0, 0.0) } else { C64::default() }),
        [only] => only.derivative_at(alpha, z),
        [first, rest @ ..] => {
            let mut acc = C64::default();
            let mut beta = vec![0u32; alpha.len()];
            let mut gamma = vec![0u32; alpha.len()];
            loop {
                let mut binom = 1.0;
                for i in 0..alpha.len() {
                    gamma[i] = alpha[i] - beta[i];
                    binom *= falling(alpha[i], beta[i]) / factorial(beta[i]);
                }
                let left = first.derivative_at(&beta, z)?;
                if left.norm() != 0.0 {
                    acc += left * binom * leibniz(rest, &gamma, z)?;
                }
                // odometer over beta <= alpha
                let mut i = 0;
                loop {
                    if i == alpha.len() {
                        return Ok(acc);
                    }
                    if beta[i] < alpha[i] {
                        beta[i] += 1;
                        break;
                    }
                    beta[i] = 0;
                    i += 1;
                }
            }
        }
    }
}

fn complex_json(c: C64) -> Value {
    if c.im == 0.0 {
        json!(c.re)
    } else {
        json!([c.re, c.im])
    }
}

fn affine_json(tag: &str, l: &Affine) -> Value {
    let coeffs: Vec<Value> = l.coeffs.iter().map(|&c| complex_json(c)).collect();
    json!([tag, coeffs, complex_json(l.constant)])
}

fn parse_complex(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => Ok(C64::new(
            a[0].as_f64().unwrap_or(f64::NAN),
            a[1].as_f64().unwrap_or(f64::NAN),
        )),
        other => Err(Error::Parse(format!("expected a number or [re, im], got {other}"))),
    }
}

fn parse_affine(v: &Value) -> Result<Affine> {
    let arr = v.as_array().ok_or_else(|| Error::Parse(format!("expected an affine form, got {v}")))?;
    match arr.as_slice() {
        [tag, coeffs, constant] if tag == "affine" => {
            let coeffs = coeffs
                .as_array()
                .ok_or_else(|| Error::Parse("affine coefficients must be a list".into()))?
                .iter()
                .map(parse_complex)
                .collect::<Result<Vec<_>>>()?;
            Ok(Affine::new(coeffs, parse_complex(constant)?))
        }
        [tag, i] if tag == "x" => {
            let i = i.as_u64().ok_or_else(|| Error::Parse("coordinate index must be an integer".into()))? as usize;
            let mut coeffs = vec![C64::default(); i + 1];
            coeffs[i] = C64::new(1.0, 0.0);
            Ok(Affine::new(coeffs, C64::default()))
        }
        _ => Err(Error::Parse(format!("expected [\"affine\", coeffs, c] or [\"x\", i], got {v}"))),
    }
}

fn parse(v: &Value) -> Result<TestFunction> {
    if v.is_number() {
        return Ok(TestFunction::Const(parse_complex(v)?));
    }
    let arr = v.as_array().ok_or_else(|| Error::Parse(format!("unexpected expression {v}")))?;
    if arr.len() == 2 && arr.iter().all(Value::is_number) {
        return Ok(TestFunction::Const(parse_complex(v)?));
    }
    let tag = arr
        .first()
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse(format!("expression must start with a tag: {v}")))?;
    let args = &arr[1..];
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Parse(format!("'{tag}' takes {n} argument(s), got {}", args.len())))
        }
    };
    Ok(match tag {
        "const" => {
            arity(1)?;
            TestFunction::Const(parse_complex(&args[0])?)
        }
        "x" => {
            arity(1)?;
            TestFunction::Coord(
                args[0].as_u64().ok_or_else(|| Error::Parse("coordinate index must be an integer".into()))? as usize,
            )
        }
        "affine" => TestFunction::Affine(parse_affine(v)?),
        "exp" => {
            arity(1)?;
            TestFunction::Exp(parse_affine(&args[0])?)
        }
        "recip" => {
            arity(1)?;
            TestFunction::Recip(parse_affine(&args[0])?)
        }
        "pow" => {
            arity(2)?;
            let k = args[1].as_u64().ok_or_else(|| Error::Parse("power must be a non-negative integer".into()))?;
            TestFunction::Pow(parse_affine(&args[0])?, k as u32)
        }
        "poly" => {
            arity(1)?;
            TestFunction::Poly(serde_json::from_value(args[0].clone())?)
        }
        "add" => TestFunction::Sum(args.iter().map(parse).collect::<Result<_>>()?),
        "mul" => TestFunction::Product(args.iter().map(parse).collect::<Result<_>>()?),
        other => return Err(Error::Parse(format!("unknown expression tag '{other}'"))),
    })
}

impl Serialize for TestFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TestFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        parse(&v).map_err(serde::de::Error::custom)
    }
}
