//! Special functions and adaptive quadrature used by the analytic oracles.

// Coefficient tables are kept exactly as published.
#![allow(clippy::excessive_precision)]

mod gamma;
mod incgamma;
mod quad;

pub use gamma::{gamma, ln_gamma};
pub use incgamma::{
    exp_integral_e1, regularized_lower_gamma, regularized_upper_gamma, upper_incomplete_gamma,
};
pub use quad::{
    integrate_1d, integrate_2d, integrate_box_2d, integrate_interval, QuadResult, QuadratureSpec,
};
