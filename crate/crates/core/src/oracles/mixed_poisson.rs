use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::heavytail::TailIndex;
use crate::specfun::{exp_integral_e1, gamma, regularized_lower_gamma, regularized_upper_gamma};

/// Limiting degree law: Poisson with random rate `c W^alpha`, `c = Gamma(1 - alpha)`.
///
/// The rate is Pareto with index 1 on `(c, inf)`, which gives
/// `pmf(0) = e^-c - c E1(c)`, `pmf(1) = c E1(c)` and
/// `pmf(k) = c Q(k - 1, c) / (k (k - 1))` for `k >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPoissonLaw {
    alpha: TailIndex,
    c: f64,
}

impl MixedPoissonLaw {
    pub fn new(alpha: TailIndex) -> Result<Self> {
        Ok(Self {
            alpha,
            c: gamma(1.0 - alpha.get())?,
        })
    }

    pub fn alpha(&self) -> TailIndex {
        self.alpha
    }

    /// Mixing constant `Gamma(1 - alpha)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn pmf(&self, k: u64) -> Result<f64> {
        let c = self.c;
        Ok(match k {
            0 => (-c).exp() - c * exp_integral_e1(c)?,
            1 => c * exp_integral_e1(c)?,
            _ => {
                let k = k as f64;
                c * regularized_upper_gamma(k - 1.0, c)? / (k * (k - 1.0))
            }
        })
    }

    /// `pmf(0..=max_k)`, built with a running Poisson CDF.
    pub fn pmf_table(&self, max_k: usize) -> Result<Vec<f64>> {
        let c = self.c;
        let mut out = Vec::with_capacity(max_k + 1);
        out.push(self.pmf(0)?);
        if max_k >= 1 {
            out.push(self.pmf(1)?);
        }
        // Q(m, c) = P(Poisson(c) <= m - 1).
        let mut term = (-c).exp();
        let mut q = 0.0;
        for k in 2..=max_k {
            let m = (k - 2) as f64;
            if k > 2 {
                term *= c / m;
            }
            q += term;
            let kf = k as f64;
            out.push(c * q.min(1.0) / (kf * (kf - 1.0)));
        }
        Ok(out)
    }

    /// `P(D > k)`, from the exact identity
    /// `P(D > k) = c/k - c sum_{m > k} P(m - 1, c) / (m (m - 1))` for `k >= 1`.
    pub fn ccdf(&self, k: u64) -> Result<f64> {
        let c = self.c;
        if k == 0 {
            return Ok(1.0 - self.pmf(0)?);
        }
        let lead = c / k as f64;
        let mut correction = 0.0;
        let mut m = k + 1;
        loop {
            let mf = m as f64;
            let term = regularized_lower_gamma(mf - 1.0, c)? / (mf * (mf - 1.0));
            correction += term;
            // Terms decay faster than geometrically once m - 1 exceeds c.
            if (term < 1e-18 * correction.max(1e-300) && mf > c + 1.0) || term == 0.0 {
                break;
            }
            m += 1;
        }
        Ok((lead - c * correction).max(0.0))
    }

    /// `E[t^D] = e^(-c(1-t)) - c(1-t) E1(c(1-t))`.
    pub fn pgf(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("t must lie in [0, 1], got {t}")));
        }
        let x = self.c * (1.0 - t);
        if x == 0.0 {
            return Ok(1.0);
        }
        Ok((-x).exp() - x * exp_integral_e1(x)?)
    }
}

/// Tail equivalent of the ordered-pair wedge count in the limit,
/// `P(D (D - 1) > x) ~ Gamma(1 - alpha) x^(-1/2)`.
pub fn wedge_tail_asymptotic(x: f64, alpha: TailIndex) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid(format!("x must be positive, got {x}")));
    }
    Ok(gamma(1.0 - alpha.get())? / x.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::integrate_unit;
    use crate::specfun::ln_gamma;

    fn law(a: f64) -> MixedPoissonLaw {
        MixedPoissonLaw::new(TailIndex::new(a).unwrap()).unwrap()
    }

    // Integrates the Poisson(c w^alpha) pmf against the weight density, in
    // uniform coordinates u = w^-alpha where the rate is c / u.
    fn integration_oracle(a: f64, k: u64) -> f64 {
        let c = gamma(1.0 - a).unwrap();
        integrate_unit(
            |u| {
                let rate = c / u;
                (k as f64 * rate.ln() - rate - ln_gamma(k as f64 + 1.0).unwrap()).exp()
            },
            &[],
        )
        .unwrap()
    }

    #[test]
    fn pmf_examples() {
        let l = law(0.5);
        let c = std::f64::consts::PI.sqrt();
        assert!((l.c() - c).abs() < 1e-15);
        let p2 = l.pmf(2).unwrap();
        assert!((p2 - 0.5 * c * (-c).exp()).abs() < 1e-15);
        assert!((p2 - 0.1506).abs() < 1e-4);
        let p0 = l.pmf(0).unwrap();
        assert!((p0 - 0.050_633_197_482_683).abs() < 1e-12);
        for k in [0, 1, 2, 3, 7, 20] {
            let want = integration_oracle(0.5, k);
            assert!((l.pmf(k).unwrap() - want).abs() < 1e-9, "k={k}");
        }
        for k in [0, 2, 5] {
            let want = integration_oracle(0.3, k);
            assert!((law(0.3).pmf(k).unwrap() - want).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn table_matches_pointwise() {
        let l = law(0.7);
        let table = l.pmf_table(300).unwrap();
        for (k, p) in table.iter().enumerate() {
            let q = l.pmf(k as u64).unwrap();
            assert!((p - q).abs() < 1e-13 * q.max(1e-300) + 1e-16, "k={k}");
            assert!(*p >= 0.0);
        }
    }

    #[test]
    fn mass_is_conserved() {
        for a in [0.3, 0.5, 0.7] {
            let l = law(a);
            let big_k = 10_000;
            let head: f64 = l.pmf_table(big_k).unwrap().iter().sum();
            let total = head + l.ccdf(big_k as u64).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "a={a}: {total}");
            for k in [0u64, 1, 2, 10] {
                let partial: f64 = (0..=k).map(|j| l.pmf(j).unwrap()).sum();
                assert!(
                    (partial + l.ccdf(k).unwrap() - 1.0).abs() < 1e-12,
                    "a={a} k={k}"
                );
            }
        }
    }

    #[test]
    fn ccdf_tail_constant() {
        for a in [0.3, 0.5, 0.7] {
            let l = law(a);
            let mut prev = 0.0;
            for k in [1u64, 3, 10, 100, 1000, 10_000] {
                let scaled = k as f64 * l.ccdf(k).unwrap();
                assert!(scaled >= prev && scaled <= l.c(), "a={a} k={k}");
                prev = scaled;
            }
            assert!((prev / l.c() - 1.0).abs() < 0.01);
        }
        let l = law(0.5);
        let scaled = 1e5 * l.ccdf(100_000).unwrap();
        assert!((scaled / l.c() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ccdf_non_increasing() {
        let l = law(0.4);
        let mut prev = 1.0;
        for k in 0..500 {
            let v = l.ccdf(k).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn pgf_matches_series() {
        let l = law(0.5);
        let table = l.pmf_table(20_000).unwrap();
        for t in [0.0f64, 0.1, 0.5, 0.9] {
            let series: f64 = table
                .iter()
                .enumerate()
                .map(|(k, p)| p * t.powi(k as i32))
                .sum();
            assert!((l.pgf(t).unwrap() - series).abs() < 1e-10, "t={t}");
        }
        assert_eq!(l.pgf(1.0).unwrap(), 1.0);
        assert!(l.pgf(1.5).is_err());
    }

    #[test]
    fn wedge_tail() {
        let v = wedge_tail_asymptotic(100.0, TailIndex::new(0.5).unwrap()).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 10.0).abs() < 1e-15);
    }
}
