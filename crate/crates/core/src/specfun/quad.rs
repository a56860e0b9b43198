use std::cell::RefCell;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerances and subdivision budget for the adaptive integrator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(invalid(format!("bad quadrature spec {self:?}")));
        }
        Ok(())
    }

    fn tighter(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

// 21-point Kronrod nodes (positive half, descending) and weights; the odd
// entries are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_034_637_193,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive 21-point Gauss-Kronrod integration over the finite interval `[a, b]`.
///
/// Always bisects the panel with the largest error estimate. Fails with
/// [`Error::NoConvergence`] when the subdivision budget runs out or the
/// integrand produces a non-finite value.
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("finite bounds required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
            evaluations: 0,
        });
    }
    let mut evaluations = 21;
    let (value, error) = gauss_kronrod(&mut f, a, b);
    let mut total = value;
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut subdivisions = 0;

    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::NoConvergence {
                estimate: total,
                error_estimate: total_err,
                subdivisions,
            });
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            break;
        }
        let Some(panel) = heap.pop() else {
            // Every remaining panel is too narrow to split.
            return Err(Error::NoConvergence {
                estimate: total,
                error_estimate: total_err,
                subdivisions,
            });
        };
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NoConvergence {
                estimate: total,
                error_estimate: total_err,
                subdivisions,
            });
        }
        let mid = 0.5 * (panel.a + panel.b);
        if mid <= panel.a || mid >= panel.b || (panel.b - panel.a) < 4.0 * f64::EPSILON * mid.abs()
        {
            frozen_value += panel.value;
            frozen_err += panel.error;
            continue;
        }
        let (v1, e1) = gauss_kronrod(&mut f, panel.a, mid);
        let (v2, e2) = gauss_kronrod(&mut f, mid, panel.b);
        evaluations += 42;
        subdivisions += 1;
        total += v1 + v2 - panel.value;
        total_err += e1 + e2 - panel.error;
        heap.push(Panel {
            a: panel.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: panel.b,
            value: v2,
            error: e2,
        });
        if subdivisions % 64 == 0 {
            // Refresh the running sums to stop drift.
            total = heap.iter().map(|p| p.value).sum::<f64>() + frozen_value;
            total_err = heap.iter().map(|p| p.error).sum::<f64>() + frozen_err;
        }
    }
    Ok(QuadResult {
        value: total,
        error_estimate: total_err,
        subdivisions,
        evaluations,
    })
}

/// `int_lower^inf f(t) dt`.
///
/// For `lower > 0` the substitution `t = lower / u` maps onto `(0, 1]`;
/// otherwise `t = lower + (1 - u) / u` is used.
pub fn integrate_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    lower: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    if !lower.is_finite() {
        return Err(invalid(format!("finite lower bound required, got {lower}")));
    }
    if lower > 0.0 {
        integrate_interval(
            |u| {
                let t = lower / u;
                f(t) * lower / (u * u)
            },
            0.0,
            1.0,
            spec,
        )
    } else {
        integrate_interval(
            |u| {
                let t = lower + (1.0 - u) / u;
                f(t) / (u * u)
            },
            0.0,
            1.0,
            spec,
        )
    }
}

/// Iterated integration of `f(x, y)` over `[x_range] x [y_range]` with finite bounds.
/// The inner integrals run at a tolerance ten times tighter than `spec`.
pub fn integrate_box_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    x_range: (f64, f64),
    y_range: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let inner_spec = spec.tighter(0.1);
    let failure = RefCell::new(None);
    let outer = integrate_interval(
        |x| match integrate_interval(|y| f(x, y), y_range.0, y_range.1, &inner_spec) {
            Ok(r) => r.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        x_range.0,
        x_range.1,
        spec,
    );
    finish_nested(outer, failure)
}

/// `int_{lower.0}^inf int_{lower.1}^inf f(x, y) dy dx`, iterated [`integrate_1d`].
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    lower: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let inner_spec = spec.tighter(0.1);
    let failure = RefCell::new(None);
    let outer = integrate_1d(
        |x| match integrate_1d(|y| f(x, y), lower.1, &inner_spec) {
            Ok(r) => r.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        lower.0,
        spec,
    );
    finish_nested(outer, failure)
}

fn finish_nested(outer: Result<QuadResult>, failure: RefCell<Option<Error>>) -> Result<QuadResult> {
    match (outer, failure.into_inner()) {
        (_, Some(inner)) => Err(inner),
        (result, None) => result,
    }
}
