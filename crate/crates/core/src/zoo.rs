//! Concrete Newton-structured projectors: Taylor, Lagrange, Kergin and
//! orthogonal projectors, plus a JSON description format for them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{default_simplex_exactness, Functional};
use crate::points::{
    chebyshev_measure, chebyshev_nodes, circle_measure, equiangular, gram_schmidt_basis, integer_nodes, leja_disk,
    leja_order, product_measure, r_leja, PointSequence, QuadratureMeasure,
};
use crate::poly::{basis, dim, C64};
use crate::projector::{newton_product, NewtonStructuredProjector};

/// Taylor projector at `a`: level `j` holds `D^alpha f(a)` for `|alpha| = j`.
pub fn taylor(a: &[C64], d: usize) -> Result<NewtonStructuredProjector> {
    let n = a.len();
    if n == 0 {
        return Err(Error::InvalidArgument("Taylor center needs at least one coordinate".into()));
    }
    let idx = basis(n, d);
    let levels = (0..=d)
        .map(|j| {
            idx[level_range(n, j)].iter().map(|alpha| Functional::derivative(alpha.clone(), a.to_vec())).collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    NewtonStructuredProjector::build(levels)
}

/// Univariate Lagrange projector with the ordered nodes `a_0, ..., a_d`;
/// level `j` is evaluation at `a_j`. Extra nodes are ignored.
pub fn lagrange(nodes: &[C64], d: usize) -> Result<NewtonStructuredProjector> {
    if nodes.len() < d + 1 {
        return Err(Error::InvalidArgument(format!("Lagrange needs {} nodes, got {}", d + 1, nodes.len())));
    }
    for j in 1..=d {
        if nodes[..j].iter().any(|&a| a == nodes[j]) {
            return Err(Error::DuplicateNode { index: j });
        }
    }
    let levels = nodes[..=d].iter().map(|&a| vec![Functional::point(vec![a])]).collect();
    NewtonStructuredProjector::build(levels)
}

/// Kergin projector with the ordered nodes `z_0, ..., z_d` (repeats
/// allowed). Simplex quadrature uses exactness `2d + 5`.
pub fn kergin(nodes: &[Vec<C64>], d: usize) -> Result<NewtonStructuredProjector> {
    kergin_with_exactness(nodes, d, default_simplex_exactness(d))
}

pub fn kergin_with_exactness(nodes: &[Vec<C64>], d: usize, exactness: usize) -> Result<NewtonStructuredProjector> {
    if nodes.len() < d + 1 {
        return Err(Error::InvalidArgument(format!("Kergin needs {} nodes, got {}", d + 1, nodes.len())));
    }
    let n = nodes[0].len();
    if n == 0 {
        return Err(Error::InvalidArgument("Kergin nodes need at least one coordinate".into()));
    }
    let idx = basis(n, d);
    let levels = (0..=d)
        .map(|j| {
            idx[level_range(n, j)]
                .iter()
                .map(|alpha| Functional::kergin(alpha.clone(), nodes[..=j].to_vec(), exactness))
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    NewtonStructuredProjector::build(levels)
}

/// Orthogonal projector for the discrete measure `m`: level `j` holds
/// `<f, b_alpha>` for the orthonormal polynomials with `|alpha| = j`.
pub fn orthogonal(m: Arc<QuadratureMeasure>, d: usize) -> Result<NewtonStructuredProjector> {
    let b = gram_schmidt_basis(&m, d)?;
    let n = m.dim();
    let levels = (0..=d)
        .map(|j| {
            b.polys[level_range(n, j)]
                .iter()
                .map(|p| Functional::inner_product(p.clone(), m.clone()))
                .collect()
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    NewtonStructuredProjector::build(levels)
}

fn level_range(n: usize, j: usize) -> std::ops::Range<usize> {
    let lo = if j == 0 { 0 } else { dim(n, j - 1) };
    lo..dim(n, j)
}

/// A complex number written either as a real number or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "CxRepr", into = "CxRepr")]
pub struct Cx(pub C64);

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum CxRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<CxRepr> for Cx {
    fn from(r: CxRepr) -> Self {
        match r {
            CxRepr::Real(x) => Cx(C64::new(x, 0.0)),
            CxRepr::Pair([re, im]) => Cx(C64::new(re, im)),
        }
    }
}

impl From<Cx> for CxRepr {
    fn from(c: Cx) -> Self {
        if c.0.im == 0.0 {
            CxRepr::Real(c.0.re)
        } else {
            CxRepr::Pair([c.0.re, c.0.im])
        }
    }
}

fn unwrap_cx(v: &[Cx]) -> Vec<C64> {
    v.iter().map(|c| c.0).collect()
}

/// Named node sequences. Families whose nodes depend on the degree
/// (Chebyshev, integer, equiangular) are generated for the requested `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFamily {
    /// Recursive Leja sequence on the unit circle.
    Leja,
    /// Distinct real parts of the Leja sequence.
    RLeja,
    /// Chebyshev–Gauss nodes in their natural order.
    Chebyshev,
    /// Chebyshev–Gauss nodes reordered greedily (Leja order).
    ChebyshevLeja,
    Integer,
    Equiangular,
    /// Roots of unity reordered greedily (Leja order).
    EquiangularLeja,
}

impl NodeFamily {
    /// At least `count` scalar nodes.
    pub fn generate(self, count: usize) -> Result<PointSequence> {
        let d = count.max(1) - 1;
        Ok(match self {
            NodeFamily::Leja => leja_disk(count.max(2).next_power_of_two())?.prefix(count),
            NodeFamily::RLeja => {
                let mut m = 2;
                loop {
                    let s = r_leja(&leja_disk(m)?)?;
                    if s.len() >= count {
                        break s.prefix(count);
                    }
                    m *= 2;
                }
            }
            NodeFamily::Chebyshev => chebyshev_nodes(d),
            NodeFamily::ChebyshevLeja => leja_order(&chebyshev_nodes(d)),
            NodeFamily::Integer => integer_nodes(d),
            NodeFamily::Equiangular => equiangular(d),
            NodeFamily::EquiangularLeja => leja_order(&equiangular(d)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarNodes {
    Explicit(Vec<Cx>),
    Family { family: NodeFamily },
}

impl ScalarNodes {
    pub fn resolve(&self, count: usize) -> Result<Vec<C64>> {
        match self {
            ScalarNodes::Explicit(v) => Ok(unwrap_cx(v)),
            ScalarNodes::Family { family } => Ok(family.generate(count)?.scalars()),
        }
    }
}

/// Kergin nodes: explicit points, or a scalar family used either as complex
/// points in one variable or as `(Re, Im)` points in the real plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointNodes {
    Explicit(Vec<Vec<Cx>>),
    Family {
        family: NodeFamily,
        #[serde(default)]
        real_plane: bool,
    },
}

impl PointNodes {
    pub fn resolve(&self, count: usize) -> Result<Vec<Vec<C64>>> {
        match self {
            PointNodes::Explicit(v) => Ok(v.iter().map(|p| unwrap_cx(p)).collect()),
            PointNodes::Family { family, real_plane } => {
                let s = family.generate(count)?;
                Ok(if *real_plane { s.to_real_plane()?.points } else { s.points })
            }
        }
    }
}

/// Quadrature measure description. When `nodes` is omitted the rule is
/// sized to be exact on degree `2d` for the projector degree `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Circle {
        #[serde(default)]
        nodes: Option<usize>,
    },
    Chebyshev {
        #[serde(default)]
        nodes: Option<usize>,
    },
    Product { left: Box<MeasureSpec>, right: Box<MeasureSpec> },
}

impl MeasureSpec {
    pub fn build(&self, d: usize) -> QuadratureMeasure {
        match self {
            MeasureSpec::Circle { nodes } => circle_measure(nodes.unwrap_or(2 * d + 1)),
            MeasureSpec::Chebyshev { nodes } => chebyshev_measure(nodes.unwrap_or(d + 1)),
            MeasureSpec::Product { left, right } => product_measure(&left.build(d), &right.build(d)),
        }
    }
}

/// JSON description of a projector, e.g.
/// `{"kind": "kergin", "nodes": [[0, 0], [1, 0], [0, 1]], "degree": 2}`.
/// Products compose two sub-descriptions of equal degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZooSpec {
    Taylor {
        center: Vec<Cx>,
        degree: usize,
    },
    Lagrange {
        nodes: ScalarNodes,
        degree: usize,
    },
    Kergin {
        nodes: PointNodes,
        degree: usize,
        #[serde(default)]
        exactness: Option<usize>,
    },
    Orthogonal {
        measure: MeasureSpec,
        degree: usize,
    },
    Product {
        left: Box<ZooSpec>,
        right: Box<ZooSpec>,
    },
}

impl ZooSpec {
    pub fn degree(&self) -> usize {
        match self {
            ZooSpec::Taylor { degree, .. }
            | ZooSpec::Lagrange { degree, .. }
            | ZooSpec::Kergin { degree, .. }
            | ZooSpec::Orthogonal { degree, .. } => *degree,
            ZooSpec::Product { left, .. } => left.degree(),
        }
    }

    /// The same description at another degree.
    pub fn with_degree(&self, d: usize) -> ZooSpec {
        let mut s = self.clone();
        match &mut s {
            ZooSpec::Taylor { degree, .. }
            | ZooSpec::Lagrange { degree, .. }
            | ZooSpec::Kergin { degree, .. }
            | ZooSpec::Orthogonal { degree, .. } => *degree = d,
            ZooSpec::Product { left, right } => {
                **left = left.with_degree(d);
                **right = right.with_degree(d);
            }
        }
        s
    }

    pub fn build(&self) -> Result<NewtonStructuredProjector> {
        match self {
            ZooSpec::Taylor { center, degree } => taylor(&unwrap_cx(center), *degree),
            ZooSpec::Lagrange { nodes, degree } => lagrange(&nodes.resolve(degree + 1)?, *degree),
            ZooSpec::Kergin { nodes, degree, exactness } => kergin_with_exactness(
                &nodes.resolve(degree + 1)?,
                *degree,
                exactness.unwrap_or(default_simplex_exactness(*degree)),
            ),
            ZooSpec::Orthogonal { measure, degree } => orthogonal(Arc::new(measure.build(*degree)), *degree),
            ZooSpec::Product { left, right } => newton_product(&left.build()?, &right.build()?),
        }
    }
}
