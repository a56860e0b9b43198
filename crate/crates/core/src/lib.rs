//! Simulation and analytic verification toolkit for the inhomogeneous random
//! graph ensemble `G_n(alpha, eps)` with infinite-mean Pareto fitness.
//!
//! Vertex `i` carries an i.i.d. weight `W_i` with `P(W > w) = w^-alpha`
//! (`0 < alpha < 1`), and each pair `{i, j}` is joined independently with
//! probability `1 - exp(-eps * W_i * W_j)`.
//!
//! The crate is split along the same lines as the workflow:
//!
//! * [`heavytail`] samples weights and evaluates their exact distribution functions.
//! * [`specfun`] holds the special functions and adaptive quadrature.
//! * [`graphgen`] samples graphs (naive and skip-and-accept samplers) and coarse-grains them.
//! * [`motifs`] measures degrees, wedges, triangles, dust and tail statistics.
//! * [`oracles`] computes finite-n and limiting predictions for those statistics.
//! * [`harness`] runs seeded ensembles, experiments and the verification suite.

// `!(x > 0.0)` is the NaN-rejecting form used throughout argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graphgen;
pub mod harness;
pub mod heavytail;
pub mod motifs;
pub mod oracles;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};

/// Version string embedded in every emitted table and report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a float with 17 significant digits, the precision used by every
/// serialized output of this crate. Parsing the result recovers the value exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
