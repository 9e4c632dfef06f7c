//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error satisfies `max(abs_tol, rel_tol * |I|)` or the subdivision budget is
//! spent. Error estimates use the QUADPACK rescaling.

// Nodes and weights are the published 30-digit values.
#![allow(clippy::excessive_precision)]

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_063_729,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Tolerances and budget shared by every integral in the analytical engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Split point, in multiples of the cluster radius, beyond which the
    /// inter-cluster distance integral is mapped onto a finite interval.
    pub tail_cutoff_multiplier: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 200,
            tail_cutoff_multiplier: 50.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.abs_tol > 0.0) {
            errs.push(format!("abs_tol must be > 0 (got {})", self.abs_tol));
        }
        if !(self.rel_tol > 0.0) {
            errs.push(format!("rel_tol must be > 0 (got {})", self.rel_tol));
        }
        if self.max_subdivisions < 1 {
            errs.push("max_subdivisions must be >= 1".into());
        }
        if !(self.tail_cutoff_multiplier > 1.0) {
            errs.push(format!(
                "tail_cutoff_multiplier must be > 1 (got {})",
                self.tail_cutoff_multiplier
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errs))
        }
    }

    /// Same budget with a much smaller absolute floor, for integrals nested
    /// inside another one.
    pub(crate) fn nested(&self) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: self.abs_tol * 1e-4,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for k in 0..10 {
        let dx = half * XGK[k];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[k] = f1;
        fv2[k] = f2;
        kronrod += WGK[k] * (f1 + f2);
        res_abs += WGK[k] * (f1.abs() + f2.abs());
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for k in 0..10 {
        res_asc += WGK[k] * ((fv1[k] - mean).abs() + (fv2[k] - mean).abs());
    }
    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = gauss_kronrod(&f, a, b);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut intervals = 1;
    loop {
        if !total.is_finite() {
            return Err(Error::Numerical {
                context: format!("quadrature on [{a}, {b}]"),
                estimate: total,
                error: total_err,
                evaluations,
            });
        }
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if intervals >= cfg.max_subdivisions {
            return Err(Error::Numerical {
                context: format!("quadrature on [{a}, {b}]"),
                estimate: total,
                error: total_err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval below floating-point resolution; accept what we have
            heap.push(worst);
            break;
        }
        let (v1, e1) = gauss_kronrod(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, worst.b);
        evaluations += 42;
        intervals += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        // periodically resum to shed accumulated cancellation error
        if intervals % 32 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Integrates over consecutive breakpoints, each piece with its own budget.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let mut acc = QuadResult {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    for w in breakpoints.windows(2) {
        let r = integrate(&f, w[0], w[1], cfg)?;
        acc.value += r.value;
        acc.error += r.error;
        acc.evaluations += r.evaluations;
    }
    Ok(acc)
}

/// Integrates over `[a, ∞)` through `x = a t^{-q}`, `t ∈ (0, 1]` (requires
/// `a > 0`). For `f ~ x^{-p}` with `p > 1`, `q = 2/(p - 1)` leaves a
/// mapped integrand that vanishes linearly at `t = 0`.
pub fn integrate_tail<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    decay: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    debug_assert!(a > 0.0 && decay > 1.0);
    let q = 2.0 / (decay - 1.0);
    integrate(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let x = a * t.powf(-q);
            if !x.is_finite() {
                return 0.0;
            }
            f(x) * q * x / t
        },
        0.0,
        1.0,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x, 0.0, 2.0, &QuadratureConfig::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_and_singular_derivative() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, &cfg).unwrap();
        assert!((r.value - (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0).abs() < 1e-9);
        let r = integrate(f64::sqrt, 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn tail_integral() {
        let cfg = QuadratureConfig::default();
        // ∫_2^∞ x^{-3} dx = 1/8
        let r = integrate_tail(|x| x.powi(-3), 2.0, 3.0, &cfg).unwrap();
        assert!((r.value - 0.125).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = QuadratureConfig {
            max_subdivisions: 2,
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            ..QuadratureConfig::default()
        };
        let err = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig {
            abs_tol: 0.0,
            max_subdivisions: 0,
            ..QuadratureConfig::default()
        };
        match bad.validate() {
            Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
