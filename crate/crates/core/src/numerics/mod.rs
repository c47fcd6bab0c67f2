//! Special functions and semi-infinite quadrature.

mod quadrature;
mod special;

pub use quadrature::{integrate_semi_infinite, integrate_semi_infinite_fixed, integrate_semi_infinite_scaled, Quadrature, QuadratureSpec};
pub use special::{
    beta_fn, digamma, ln_beta, log_gamma, normal_cdf, normal_pdf, normal_sf, regularized_lower_gamma,
    regularized_upper_gamma, upper_incomplete_gamma,
};

pub(crate) use special::{lgamma, phi, big_phi, big_phi_bar, gamma_q, gamma_p, psi};
