//! Analytic predictions for the simulated statistics: exact finite-n
//! expectations by quadrature, small-scale asymptotics, and the limiting
//! degree law in closed form.

mod brute;
mod dust;
mod joint;
mod laplace;
mod mixed_poisson;
mod motif_moments;

pub use brute::{brute_force_triangles, brute_force_wedges};
pub use dust::{dust_expectation, dust_expectation_product_form, dust_thresholds, DustThresholds};
pub use joint::{joint_pgf_gap_bound, joint_pgf_limit, JointPgf};
pub use laplace::{
    expected_degree_asymptotic, expected_degree_exact, karamata_check, laplace, one_minus_laplace,
    one_minus_product_laplace, KaramataReport, KaramataRow,
};
pub use mixed_poisson::{wedge_tail_asymptotic, MixedPoissonLaw};
pub use motif_moments::{
    expected_triangles, expected_wedges, half_index_factor, triangle_limit_constant, MomentMode,
};

use crate::error::Result;
use crate::specfun::{integrate_interval, QuadratureSpec};

pub(crate) fn oracle_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        max_subdivisions: 4000,
    }
}

/// Integrates over `(0, 1)`, splitting at the given interior points.
pub(crate) fn integrate_unit<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64]) -> Result<f64> {
    let spec = oracle_spec();
    let mut edges = vec![0.0];
    edges.extend(breaks.iter().copied().filter(|b| *b > 0.0 && *b < 1.0));
    edges.push(1.0);
    edges.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in edges.windows(2) {
        if w[1] > w[0] {
            total += integrate_interval(&mut f, w[0], w[1], &spec)?.value;
        }
    }
    Ok(total)
}
