use std::f64::consts::PI;

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_5;

pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (z - 1).
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// `sin(pi x)` with exact argument reduction, so zeros land on the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x * 0.5).round();
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Complete gamma function for real, non-pole arguments.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() || is_pole(x) {
        return Err(Error::Pole(x));
    }
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
        return Ok(PI / (sin_pi(x) * gamma_positive(1.0 - x)));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(z: f64) -> f64 {
    if z == z.floor() && z <= 23.0 {
        // Exact factorials while they are representable.
        return (1..z as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    let x = z - 1.0;
    let t = x + LANCZOS_G + 0.5;
    // Split the power so large arguments overflow as late as possible.
    let half = t.powf(0.5 * (x + 0.5));
    SQRT_TWO_PI * half * (-t).exp() * half * lanczos_sum(x)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(crate::error::invalid(format!(
            "ln_gamma needs x > 0, got {x}"
        )));
    }
    if x < 0.5 {
        return Ok((PI / sin_pi(x)).ln() - ln_gamma_positive(1.0 - x));
    }
    Ok(ln_gamma_positive(x))
}

fn ln_gamma_positive(z: f64) -> f64 {
    if z < 20.0 {
        return gamma_positive(z).ln();
    }
    let x = z - 1.0;
    let t = x + LANCZOS_G + 0.5;
    (x + 0.5) * t.ln() - t + (SQRT_TWO_PI * lanczos_sum(x)).ln()
}
