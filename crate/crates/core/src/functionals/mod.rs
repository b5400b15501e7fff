//! Interpolation conditions and the functions they are applied to.

mod functional;
pub mod simplex;
pub mod testfn;

pub use functional::{default_simplex_exactness, Functional};
pub use simplex::{simplex_monomial_moment, GrundmannMoller};
pub use testfn::{Affine, Differentiable, TestFunction};
