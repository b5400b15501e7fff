//! Newton-structured polynomial projectors and the experiments built on them.
//!
//! * [`poly`]: dense complex multivariate polynomials in graded-lex order.
//! * [`functionals`]: interpolation conditions (point, derivative, Kergin,
//!   inner product, tensor) and closed-form test functions.
//! * [`points`]: Leja and Chebyshev node sequences, quadrature measures,
//!   Gram–Schmidt orthonormal bases.
//! * [`projector`]: building, applying, truncating and multiplying projectors.
//! * [`zoo`]: Taylor, Lagrange, Kergin and orthogonal projectors.
//! * [`analysis`]: extremal functions, Bernstein–Walsh checks, rate fits and
//!   entire-function growth quantities.
//! * [`experiments`]: reproducible sweeps and report output.

pub mod analysis;
mod dd;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod points;
pub mod poly;
pub mod projector;
pub mod zoo;

pub use error::{Error, Result};
pub use poly::{MultiIndex, Polynomial, C64};
