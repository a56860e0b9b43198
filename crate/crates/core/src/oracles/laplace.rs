//! Laplace transforms of the weight law and of the product of two weights,
//! expected degrees, and the Tauberian consistency check.

use serde::{Deserialize, Serialize};

use super::{integrate_unit, oracle_spec};
use crate::error::{invalid, Result};
use crate::heavytail::TailIndex;
use crate::specfun::{gamma, integrate_1d, integrate_interval, upper_incomplete_gamma};

/// `1 - E[exp(-s W)] = 1 - e^-s + s^alpha Gamma(1 - alpha; s)`, free of cancellation.
pub fn one_minus_laplace(s: f64, alpha: TailIndex) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(invalid(format!("Laplace argument must be >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.get();
    Ok(-(-s).exp_m1() + s.powf(a) * upper_incomplete_gamma(1.0 - a, s)?)
}

/// `E[exp(-s W)] = alpha s^alpha Gamma(-alpha; s)`.
pub fn laplace(s: f64, alpha: TailIndex) -> Result<f64> {
    if s < 1.0 {
        return Ok(1.0 - one_minus_laplace(s, alpha)?);
    }
    let a = alpha.get();
    Ok(a * s.powf(a) * upper_incomplete_gamma(-a, s)?)
}

/// `ln E[exp(-s W)]`, accurate both for small `s` and where the transform is tiny.
pub(crate) fn ln_laplace(s: f64, alpha: TailIndex) -> Result<f64> {
    if s < 1.0 {
        Ok((-one_minus_laplace(s, alpha)?).ln_1p())
    } else {
        Ok(laplace(s, alpha)?.ln())
    }
}

fn check_eps(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    Ok(())
}

/// `1 - E[exp(-eps W1 W2)]`, integrating `1 - e^(-eps t)` against the density
/// `alpha^2 t^(-alpha-1) ln t` of the product, in log coordinates split at `ln(1/eps)`.
pub fn one_minus_product_laplace(epsilon: f64, alpha: TailIndex) -> Result<f64> {
    check_eps(epsilon)?;
    let a = alpha.get();
    let f = |y: f64| -(-epsilon * y.exp()).exp_m1() * a * a * (-a * y).exp() * y;
    let spec = oracle_spec();
    let split = (1.0 / epsilon).ln();
    if split > 0.0 {
        let head = integrate_interval(f, 0.0, split, &spec)?;
        let tail = integrate_1d(f, split, &spec)?;
        Ok(head.value + tail.value)
    } else {
        Ok(integrate_1d(f, 0.0, &spec)?.value)
    }
}

/// `E[D_n(i)] = (n - 1) (1 - E[exp(-eps W1 W2)])`.
pub fn expected_degree_exact(n: usize, epsilon: f64, alpha: TailIndex) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    Ok((n - 1) as f64 * one_minus_product_laplace(epsilon, alpha)?)
}

/// `(n - 1) Gamma(1 - alpha) alpha eps^alpha ln(1/eps)`.
pub fn expected_degree_asymptotic(n: usize, epsilon: f64, alpha: TailIndex) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let a = alpha.get();
    Ok((n - 1) as f64 * gamma(1.0 - a)? * a * epsilon.powf(a) * (1.0 / epsilon).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KaramataRow {
    pub epsilon: f64,
    /// `1 - E[exp(-eps W)]` by quadrature.
    pub weight_transform: f64,
    /// Ratio against `Gamma(1 - alpha) eps^alpha`.
    pub weight_ratio: f64,
    /// `1 - E[exp(-eps W1 W2)]` by quadrature.
    pub product_transform: f64,
    /// Ratio against `Gamma(1 - alpha) alpha eps^alpha ln(1/eps)`; NaN for `eps >= 1`.
    pub product_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KaramataReport {
    pub alpha: f64,
    pub tolerance: f64,
    pub rows: Vec<KaramataRow>,
    /// `|ratio - 1|` shrinks along the grid.
    pub weight_monotone: bool,
    pub product_monotone: bool,
    /// Last grid point within `tolerance` of 1.
    pub weight_converged: bool,
    pub product_converged: bool,
}

impl KaramataReport {
    pub fn passed(&self) -> bool {
        self.weight_monotone
            && self.weight_converged
            && self.product_monotone
            && self.product_converged
    }
}

/// Evaluates both Laplace transforms by quadrature along a grid of scales
/// decreasing to 0 and compares them with their small-scale equivalents.
pub fn karamata_check(
    alpha: TailIndex,
    eps_grid: &[f64],
    tolerance: f64,
) -> Result<KaramataReport> {
    if eps_grid.is_empty() {
        return Err(invalid("empty epsilon grid"));
    }
    if eps_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("epsilon grid must be strictly decreasing"));
    }
    let a = alpha.get();
    let c = gamma(1.0 - a)?;
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        check_eps(eps)?;
        // Uniform coordinates u = w^-alpha, kink where eps w = 1.
        let weight_transform =
            integrate_unit(|u| -(-eps * u.powf(-1.0 / a)).exp_m1(), &[eps.powf(a)])?;
        let product_transform = one_minus_product_laplace(eps, alpha)?;
        let product_ratio = if eps < 1.0 {
            product_transform / (c * a * eps.powf(a) * (1.0 / eps).ln())
        } else {
            f64::NAN
        };
        rows.push(KaramataRow {
            epsilon: eps,
            weight_transform,
            weight_ratio: weight_transform / (c * eps.powf(a)),
            product_transform,
            product_ratio,
        });
    }
    let monotone = |ratios: Vec<f64>| {
        ratios
            .windows(2)
            .all(|w| w[0].is_nan() || (w[1] - 1.0).abs() <= (w[0] - 1.0).abs())
    };
    let last = rows.last().expect("grid is nonempty");
    Ok(KaramataReport {
        alpha: a,
        tolerance,
        weight_monotone: monotone(rows.iter().map(|r| r.weight_ratio).collect()),
        product_monotone: monotone(rows.iter().map(|r| r.product_ratio).collect()),
        weight_converged: (last.weight_ratio - 1.0).abs() <= tolerance,
        product_converged: (last.product_ratio - 1.0).abs() <= tolerance,
        rows,
    })
}
