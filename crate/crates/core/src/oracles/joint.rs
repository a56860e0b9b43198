use serde::{Deserialize, Serialize};

use super::{integrate_unit, oracle_spec};
use crate::error::{invalid, Result};
use crate::heavytail::TailIndex;
use crate::specfun::{gamma, integrate_box_2d};

/// Limiting joint PGF of two degrees, its marginals' product, and their gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPgf {
    pub joint: f64,
    /// `E[t^D] E[s^D]` under independence.
    pub product: f64,
}

impl JointPgf {
    pub fn gap(&self) -> f64 {
        self.joint - self.product
    }
}

fn check_unit(name: &str, z: f64) -> Result<()> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(invalid(format!("{name} must lie in (0, 1], got {z}")));
    }
    Ok(())
}

/// `E[exp(-c {(1-t)(1-s)[(W1+W2)^a - W1^a - W2^a] + (1-t) W1^a + (1-s) W2^a})]`
/// over independent weights, with `c = Gamma(1 - a)`.
///
/// Integrated in uniform coordinates `u = W1^-a`, `v = W2^-a`, where the weight
/// density is flat on the unit square.
pub fn joint_pgf_limit(t: f64, s: f64, alpha: TailIndex) -> Result<JointPgf> {
    check_unit("t", t)?;
    check_unit("s", s)?;
    let a = alpha.get();
    let c = gamma(1.0 - a)?;
    let (ht, hs) = (1.0 - t, 1.0 - s);
    let exponent = |u: f64, v: f64| {
        let (x, y) = (1.0 / u, 1.0 / v);
        let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
        // (W1 + W2)^a without overflow.
        let sum_pow = hi * (1.0 + (lo / hi).powf(1.0 / a)).powf(a);
        // Rearranged so every term is nonnegative.
        c * (ht * hs * sum_pow + ht * s * x + hs * t * y)
    };
    let joint = integrate_box_2d(
        |u, v| (-exponent(u, v)).exp(),
        (0.0, 1.0),
        (0.0, 1.0),
        &oracle_spec(),
    )?
    .value;
    let marginal = |h: f64| integrate_unit(|u| (-c * h / u).exp(), &[]);
    Ok(JointPgf {
        joint,
        product: marginal(ht)? * marginal(hs)?,
    })
}

/// Explicit upper bound on `|joint - product|` at `t = 1 - eta`, `s = 1 - gamma`:
/// `c [eta gamma (ln(1 + 1/(c eta)) + ln(1 + 1/(c gamma)))
///     + (1/2) sum_{k>=2} 2^k / (k (k-1)) (eta gamma^k + eta^k gamma)]`.
pub fn joint_pgf_gap_bound(eta: f64, gamma_: f64, alpha: TailIndex) -> Result<f64> {
    for (name, z) in [("eta", eta), ("gamma", gamma_)] {
        if !(z > 0.0 && z < 0.5) {
            return Err(invalid(format!("{name} must lie in (0, 1/2), got {z}")));
        }
    }
    let c = gamma(1.0 - alpha.get())?;
    // sum_{k>=2} z^k / (k (k-1)) = (1 - z) ln(1 - z) + z.
    let series = |z: f64| (1.0 - z) * (-z).ln_1p() + z;
    let logs = (1.0 + 1.0 / (c * eta)).ln() + (1.0 + 1.0 / (c * gamma_)).ln();
    Ok(c * (eta * gamma_ * logs + 0.5 * (eta * series(2.0 * gamma_) + gamma_ * series(2.0 * eta))))
}
