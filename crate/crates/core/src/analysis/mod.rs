//! Extremal functions, approximation rates and growth quantities.

mod extremal;
mod fit;
mod growth;
mod rate;

pub use extremal::{bws_check, extremal_value, level_set_boundary, pole_rho, CompactModel};
pub use growth::{
    gelfond_constant, growth_norm_monomial, omega_density, power_series_coeff_bound, sphere_max, CoeffBound, GrowthParams,
    Norm,
};
pub use fit::{linear_fit, LinearFit};
pub use rate::{fit_geometric_rate, fit_geometric_rate_scaled, orthogonal_capped, rho_estimate, RateFit, RhoEstimate};
