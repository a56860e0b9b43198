//! Pareto fitness: `P(W > w) = w^-alpha` for `w > 1`, with `0 < alpha < 1`.
//!
//! Also the exact law of the product of two independent weights. Since
//! `log W ~ Exp(alpha)`, `log(W1 W2)` is Gamma(2, 1/alpha) and
//! `P(W1 W2 > x) = x^-alpha (1 + alpha log x)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::UniformStream;

/// Tail index `alpha`, strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TailIndex(f64);

impl TailIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(invalid(format!(
                "tail index must lie in (0, 1), got {alpha}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for TailIndex {
    type Error = crate::Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<TailIndex> for f64 {
    fn from(value: TailIndex) -> f64 {
        value.0
    }
}

/// An i.i.d. Pareto fitness sample `(W_1, ..., W_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
    alpha: TailIndex,
    seed: u64,
}

impl WeightVector {
    /// Wraps externally produced weights, e.g. read back from CSV.
    pub fn from_values(values: Vec<f64>, alpha: TailIndex, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("weight vector must be nonempty"));
        }
        if let Some(bad) = values.iter().find(|w| !(**w >= 1.0)) {
            return Err(invalid(format!("weights must be >= 1, found {bad}")));
        }
        Ok(Self {
            values,
            alpha,
            seed,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha(&self) -> TailIndex {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// CSV with header `index,weight`, one row per vertex (0-based).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "weight"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([i.to_string(), crate::fmt_f64(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R, alpha: TailIndex, seed: u64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut values = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let index: usize = parse_field(&record, 0)?;
            if index != row {
                return Err(crate::Error::Parse(format!(
                    "weights CSV out of order: row {row} has index {index}"
                )));
            }
            values.push(parse_field(&record, 1)?);
        }
        Self::from_values(values, alpha, seed)
    }
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize) -> Result<T> {
    record
        .get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| crate::Error::Parse(format!("bad field {i} in record {record:?}")))
}

/// Inverse CDF: `(1 - u)^(-1/alpha)`.
pub fn pareto_quantile(u: f64, alpha: TailIndex) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(invalid(format!(
            "quantile level must lie in [0, 1), got {u}"
        )));
    }
    Ok(quantile_unchecked(u, alpha.get()))
}

#[inline]
pub(crate) fn quantile_unchecked(u: f64, alpha: f64) -> f64 {
    (1.0 - u).powf(-1.0 / alpha)
}

/// `P(W > w)`: 1 on `(0, 1]`, `w^-alpha` above.
pub fn pareto_ccdf(w: f64, alpha: TailIndex) -> Result<f64> {
    if !(w > 0.0) {
        return Err(invalid(format!("pareto_ccdf needs w > 0, got {w}")));
    }
    Ok(if w <= 1.0 { 1.0 } else { w.powf(-alpha.get()) })
}

/// Draws `n` weights from `UniformStream::new(seed)`, one uniform per weight,
/// in index order.
pub fn sample_weights(n: usize, alpha: TailIndex, seed: u64) -> Result<WeightVector> {
    if n == 0 {
        return Err(invalid("cannot sample an empty weight vector"));
    }
    let mut stream = UniformStream::new(seed);
    let values = (0..n)
        .map(|_| quantile_unchecked(stream.next_f64(), alpha.get()))
        .collect();
    Ok(WeightVector {
        values,
        alpha,
        seed,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProductTailMode {
    /// `x^-alpha (1 + alpha log x)`.
    #[default]
    Exact,
    /// `alpha x^-alpha log x`, the leading term as `x -> inf`.
    Asymptotic,
}

/// `P(W1 W2 > x)` for independent weights.
pub fn product_ccdf(x: f64, alpha: TailIndex, mode: ProductTailMode) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(invalid(format!("product_ccdf needs x >= 1, got {x}")));
    }
    let a = alpha.get();
    let lx = x.ln();
    let power = (-a * lx).exp();
    Ok(match mode {
        ProductTailMode::Exact => power * (1.0 + a * lx),
        ProductTailMode::Asymptotic => a * power * lx,
    })
}

/// Subexponential approximation `P(W1 + W2 > x) ~ 2 x^-alpha`, capped at 1.
pub fn sum_ccdf_asymptotic(x: f64, alpha: TailIndex) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(invalid(format!(
            "sum_ccdf_asymptotic needs x >= 2, got {x}"
        )));
    }
    Ok((2.0 * x.powf(-alpha.get())).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(x: f64) -> TailIndex {
        TailIndex::new(x).unwrap()
    }

    #[test]
    fn tail_index_bounds() {
        assert!(TailIndex::new(0.0).is_err());
        assert!(TailIndex::new(1.0).is_err());
        assert!(TailIndex::new(f64::NAN).is_err());
        assert!(TailIndex::new(0.999).is_ok());
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(pareto_quantile(0.0, a(0.5)).unwrap(), 1.0);
        assert!((pareto_quantile(0.75, a(0.5)).unwrap() - 16.0).abs() < 1e-12);
        assert!((pareto_quantile(0.5, a(0.25)).unwrap() - 16.0).abs() < 1e-12);
        assert!(pareto_quantile(1.0, a(0.5)).is_err());
        assert!(pareto_quantile(-0.1, a(0.5)).is_err());
    }

    #[test]
    fn ccdf_examples() {
        assert_eq!(pareto_ccdf(0.5, a(0.3)).unwrap(), 1.0);
        assert_eq!(pareto_ccdf(1.0, a(0.7)).unwrap(), 1.0);
        assert!((pareto_ccdf(4.0, a(0.5)).unwrap() - 0.5).abs() < 1e-15);
        assert!(pareto_ccdf(0.0, a(0.5)).is_err());
    }

    #[test]
    fn sample_weights_rejects_empty_and_is_deterministic() {
        assert!(sample_weights(0, a(0.5), 1).is_err());
        let x = sample_weights(1000, a(0.5), 99).unwrap();
        let y = sample_weights(1000, a(0.5), 99).unwrap();
        assert_eq!(x, y);
        assert!(x.values().iter().all(|w| *w >= 1.0));
        let z = sample_weights(1000, a(0.5), 100).unwrap();
        assert_ne!(x.values(), z.values());
    }

    #[test]
    fn exceedance_fraction_matches_binomial() {
        let n = 1_000_000;
        let w = sample_weights(n, a(0.5), 7).unwrap();
        let p = pareto_ccdf(4.0, a(0.5)).unwrap();
        let hits = w.values().iter().filter(|v| **v > 4.0).count() as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn kolmogorov_smirnov_against_analytic_cdf() {
        let n = 1_000_000;
        let alpha = a(0.5);
        let mut v = sample_weights(n, alpha, 2024).unwrap().values().to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut d: f64 = 0.0;
        for (i, x) in v.iter().enumerate() {
            let cdf = 1.0 - pareto_ccdf(*x, alpha).unwrap();
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
        }
        // 1% critical value of the one-sample KS statistic.
        assert!(d < 1.628 / (n as f64).sqrt(), "KS distance {d}");
    }

    #[test]
    fn product_ccdf_examples() {
        let al = a(0.5);
        assert_eq!(product_ccdf(1.0, al, ProductTailMode::Exact).unwrap(), 1.0);
        let e2 = 2f64.exp();
        let v = product_ccdf(e2, al, ProductTailMode::Exact).unwrap();
        assert!((v - 2.0 * (-1f64).exp()).abs() < 1e-14);
        assert!((v - 0.73576).abs() < 1e-5);
        let v = product_ccdf(100.0, al, ProductTailMode::Exact).unwrap();
        assert!((v - 0.1 * (1.0 + 0.5 * 100f64.ln())).abs() < 1e-14);
        assert!((v - 0.33026).abs() < 1e-5);
        assert!(product_ccdf(0.5, al, ProductTailMode::Exact).is_err());
    }

    #[test]
    fn product_ccdf_monte_carlo() {
        // Independent route: pairs of sampled weights.
        let alpha = a(0.5);
        let m = 10_000_000;
        let mut s = UniformStream::new(5150);
        let xs = [2f64.exp(), 100.0];
        let mut hits = [0u64; 2];
        for _ in 0..m {
            let p = quantile_unchecked(s.next_f64(), 0.5) * quantile_unchecked(s.next_f64(), 0.5);
            for (h, x) in hits.iter_mut().zip(xs) {
                if p > x {
                    *h += 1;
                }
            }
        }
        for (h, x) in hits.iter().zip(xs) {
            let p = product_ccdf(x, alpha, ProductTailMode::Exact).unwrap();
            let se = (p * (1.0 - p) / m as f64).sqrt();
            assert!((*h as f64 / m as f64 - p).abs() < 3.0 * se, "x = {x}");
        }
    }

    #[test]
    fn sum_ccdf_examples() {
        let al = a(0.5);
        assert_eq!(sum_ccdf_asymptotic(4.0, al).unwrap(), 1.0);
        assert!((sum_ccdf_asymptotic(100.0, al).unwrap() - 0.2).abs() < 1e-15);
        assert!(sum_ccdf_asymptotic(1.0, al).is_err());
    }

    #[test]
    fn sum_ccdf_monte_carlo_within_ten_percent() {
        let m = 10_000_000;
        let mut s = UniformStream::new(77);
        let x = 1e4;
        let hits = (0..m)
            .filter(|_| {
                quantile_unchecked(s.next_f64(), 0.5) + quantile_unchecked(s.next_f64(), 0.5) > x
            })
            .count();
        let est = hits as f64 / m as f64;
        let approx = sum_ccdf_asymptotic(x, a(0.5)).unwrap();
        assert!((est / approx - 1.0).abs() < 0.1, "estimate {est}");
    }

    #[test]
    fn weights_csv_round_trip() {
        let w = sample_weights(50, a(0.4), 3).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let back = WeightVector::read_csv(buf.as_slice(), a(0.4), 3).unwrap();
        assert_eq!(w, back);
    }

    proptest! {
        #[test]
        fn ccdf_inverts_quantile(u in 0.0f64..0.999_999, alpha in 0.05f64..0.95) {
            let al = a(alpha);
            let w = pareto_quantile(u, al).unwrap();
            prop_assert!(w >= 1.0);
            let back = pareto_ccdf(w, al).unwrap();
            prop_assert!(((back - (1.0 - u)) / (1.0 - u)).abs() < 1e-12);
        }

        #[test]
        fn quantile_is_monotone(u in 0.0f64..0.99, du in 1e-9f64..0.009, alpha in 0.05f64..0.95) {
            let al = a(alpha);
            prop_assert!(pareto_quantile(u + du, al).unwrap() >= pareto_quantile(u, al).unwrap());
        }

        #[test]
        fn product_ccdf_non_increasing(x in 1.0f64..1e8, f in 1.0f64..10.0, alpha in 0.05f64..0.95) {
            let al = a(alpha);
            let lo = product_ccdf(x, al, ProductTailMode::Exact).unwrap();
            let hi = product_ccdf(x * f, al, ProductTailMode::Exact).unwrap();
            prop_assert!(hi <= lo);
        }

        #[test]
        fn exact_over_asymptotic_ratio(lx in 1.0f64..200.0, alpha in 0.05f64..0.95) {
            let al = a(alpha);
            let x = lx.exp();
            let exact = product_ccdf(x, al, ProductTailMode::Exact).unwrap();
            let asym = product_ccdf(x, al, ProductTailMode::Asymptotic).unwrap();
            let ratio = exact / asym;
            prop_assert!((ratio - 1.0).abs() <= 1.0 / (alpha * lx) * (1.0 + 1e-12));
        }
    }
}
