//! Node sequences and quadrature measures.

mod measure;
mod sequences;

pub use measure::{
    bm_diagnostic, chebyshev_measure, circle_measure, gram_schmidt_basis, product_measure, BmDiagnostic,
    OrthonormalBasis, QuadratureMeasure,
};
pub use sequences::{
    chebyshev_nodes, circle_grid, equiangular, integer_nodes, leja_disk, leja_greedy_oracle, leja_objective,
    leja_order, r_leja, PointSequence, Provenance,
};
