use serde::{Deserialize, Serialize};

use super::integrate_unit;
use super::laplace::{ln_laplace, one_minus_product_laplace};
use crate::error::{invalid, Result};
use crate::heavytail::TailIndex;
use crate::specfun::gamma;

fn check(n: usize, epsilon: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    Ok(())
}

/// Expected number of isolated nodes, `n E_W[phi(eps W)^(n-1)]`, where
/// `phi` is the Laplace transform of one weight. The neighbours of a node share
/// its weight, so this is not a power of the product transform.
pub fn dust_expectation(n: usize, epsilon: f64, alpha: TailIndex) -> Result<f64> {
    check(n, epsilon)?;
    if n == 1 {
        return Ok(1.0);
    }
    let a = alpha.get();
    let m = (n - 1) as f64;
    let f = |u: f64| {
        let s = epsilon * u.powf(-1.0 / a);
        ln_laplace(s, alpha).map_or(f64::NAN, |l| (m * l).exp())
    };
    // Most of the mass sits where eps W is of order 1 / n or smaller.
    let mut breaks = vec![epsilon.powf(a), (epsilon * m).powf(a)];
    breaks.retain(|b| *b < 1.0);
    breaks.sort_by(f64::total_cmp);
    Ok(n as f64 * integrate_unit(f, &breaks)?)
}

/// `n E[exp(-eps W1 W2)]^(n-1)`, the expectation obtained by treating the
/// events "i not adjacent to j" as independent across `j`. A lower bound on
/// [`dust_expectation`] by Jensen's inequality.
pub fn dust_expectation_product_form(n: usize, epsilon: f64, alpha: TailIndex) -> Result<f64> {
    check(n, epsilon)?;
    let q = one_minus_product_laplace(epsilon, alpha)?;
    Ok(n as f64 * ((n - 1) as f64 * (-q).ln_1p()).exp())
}

/// Critical-scale constants for the isolated-node transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DustThresholds {
    /// `(1 / Gamma(1 - alpha))^(1/alpha)`.
    pub k1: f64,
    /// `(1 / (Gamma(1 - alpha) (2 - 2^alpha)))^(1/alpha)`.
    pub k2: f64,
}

impl DustThresholds {
    /// Whether `k` lies in the window where the two sufficient conditions overlap.
    pub fn in_overlap(&self, k: f64) -> bool {
        let (lo, hi) = if self.k1 <= self.k2 {
            (self.k1, self.k2)
        } else {
            (self.k2, self.k1)
        };
        k > lo && k < hi
    }
}

pub fn dust_thresholds(alpha: TailIndex) -> Result<DustThresholds> {
    let a = alpha.get();
    let c = gamma(1.0 - a)?;
    Ok(DustThresholds {
        k1: (1.0 / c).powf(1.0 / a),
        k2: (1.0 / (c * (2.0 - 2f64.powf(a)))).powf(1.0 / a),
    })
}
