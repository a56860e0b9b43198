//! Expected per-node wedge and triangle counts.

use serde::{Deserialize, Serialize};

use super::laplace::one_minus_laplace;
use super::{integrate_unit, oracle_spec};
use crate::error::{invalid, Result};
use crate::heavytail::TailIndex;
use crate::specfun::{gamma, integrate_interval};

/// Which formula an expectation is evaluated with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMode {
    /// Integrals reduced to independent one-dimensional factors
    /// `I = int_1^inf (1 - e^(-eps A)) A^(-alpha/2 - 1) dA` through the
    /// substitution `A = xy, B = xz, C = yz`, treated as a map onto the box.
    #[default]
    ExactFactorized,
    /// Leading small-`eps` term of the factorized formula.
    Asymptotic,
    /// The expectation over the true domain, reduced by exact conditioning
    /// on the shared weight and then integrated numerically.
    Exact,
}

fn check(n: usize, epsilon: f64) -> Result<()> {
    if n < 3 {
        return Err(invalid(format!(
            "need n >= 3 for wedges and triangles, got {n}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

fn pairs(n: usize) -> f64 {
    (n - 1) as f64 * (n - 2) as f64
}

/// `int_1^inf (1 - e^(-eps A)) A^(-b-1) dA = (1 - e^-eps + eps^b Gamma(1 - b; eps)) / b`
/// for `b = alpha/2`; equal to `2/alpha - eps^(alpha/2) Gamma(-alpha/2; eps)` without
/// the cancellation.
pub fn half_index_factor(epsilon: f64, alpha: TailIndex) -> Result<f64> {
    let half = TailIndex::new(alpha.get() / 2.0)?;
    Ok(one_minus_laplace(epsilon, half)? / half.get())
}

/// `E[W_n(i)]`, unordered-pair (½-normalized) wedges at node `i`.
pub fn expected_wedges(n: usize, epsilon: f64, alpha: TailIndex, mode: MomentMode) -> Result<f64> {
    check(n, epsilon)?;
    let a = alpha.get();
    match mode {
        MomentMode::ExactFactorized => {
            let i = half_index_factor(epsilon, alpha)?;
            Ok(pairs(n) / 4.0 * a.powi(3) * i * i * 2.0 / a)
        }
        MomentMode::Asymptotic => {
            let g = gamma(-a / 2.0)?;
            Ok(a * a * g * g / 2.0 * epsilon.powf(a) * (n as f64).powi(2))
        }
        MomentMode::Exact => {
            // E[p_ij p_ik] = E[(1 - phi(eps W))^2] with phi the weight transform.
            let second = integrate_unit(
                |u| {
                    let psi =
                        one_minus_laplace(epsilon * u.powf(-1.0 / a), alpha).unwrap_or(f64::NAN);
                    psi * psi
                },
                &[epsilon.powf(a)],
            )?;
            Ok(pairs(n) / 2.0 * second)
        }
    }
}

/// `E[Delta_n(i)]`, per-node triangles with the 1/6 double-sum normalization.
pub fn expected_triangles(
    n: usize,
    epsilon: f64,
    alpha: TailIndex,
    mode: MomentMode,
) -> Result<f64> {
    check(n, epsilon)?;
    let a = alpha.get();
    match mode {
        MomentMode::ExactFactorized => {
            let i = half_index_factor(epsilon, alpha)?;
            Ok(pairs(n) * a.powi(3) / 12.0 * i.powi(3))
        }
        MomentMode::Asymptotic => Ok(a.powi(3) / 12.0
            * triangle_limit_constant(alpha)?
            * epsilon.powf(1.5 * a)
            * (n as f64).powi(2)),
        MomentMode::Exact => Ok(pairs(n) / 6.0 * triangle_probability(epsilon, alpha)?),
    }
}

/// `E[p_xy p_xz p_yz]` for three independent weights. Conditioning on `x` gives
/// `E_x[p_xy p_xz] = psi(eps y) + psi(eps z) - psi(eps (y + z))`, `psi = 1 - phi`,
/// leaving a two-dimensional integral in uniform coordinates.
fn triangle_probability(epsilon: f64, alpha: TailIndex) -> Result<f64> {
    let a = alpha.get();
    let psi = |s: f64| one_minus_laplace(s, alpha).unwrap_or(f64::NAN);
    let kink = epsilon.powf(a);
    let spec = oracle_spec();
    let inner_spec = crate::specfun::QuadratureSpec {
        rel_tol: spec.rel_tol * 0.1,
        abs_tol: spec.abs_tol * 0.1,
        ..spec
    };
    let mut failure = None;
    let outer = |u: f64, failure: &mut Option<crate::Error>| -> f64 {
        let y = u.powf(-1.0 / a);
        let psi_y = psi(epsilon * y);
        let f = |v: f64| {
            let z = v.powf(-1.0 / a);
            let mixed = psi_y + psi(epsilon * z) - psi(epsilon * (y + z));
            -(-epsilon * y * z).exp_m1() * mixed
        };
        // Kinks where eps z = 1 and eps y z = 1.
        let mut breaks = vec![kink, kink / u];
        breaks.retain(|b| *b > 0.0 && *b < 1.0);
        breaks.sort_by(f64::total_cmp);
        let mut edges = vec![0.0];
        edges.extend(breaks);
        edges.push(1.0);
        let mut total = 0.0;
        for w in edges.windows(2) {
            match integrate_interval(f, w[0], w[1], &inner_spec) {
                Ok(r) => total += r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    return f64::NAN;
                }
            }
        }
        total
    };
    let mut value = 0.0;
    for (lo, hi) in [(0.0, kink.min(1.0)), (kink.min(1.0), 1.0)] {
        if hi > lo {
            let r = integrate_interval(|u| outer(u, &mut failure), lo, hi, &spec);
            if let Some(e) = failure.take() {
                return Err(e);
            }
            value += r?.value;
        }
    }
    Ok(value)
}

/// `-Gamma(-alpha/2)^3`, the limit of `12 Delta_n / (alpha^3 n^(3/2))` at the critical scale.
pub fn triangle_limit_constant(alpha: TailIndex) -> Result<f64> {
    Ok(-gamma(-alpha.get() / 2.0)?.powi(3))
}
