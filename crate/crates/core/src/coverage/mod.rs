//! Rate coverage of ranked cluster users under perfect, imperfect and
//! worst-case SIC, plus the OMA baseline and ergodic rates.
//!
//! All entry points integrate over the serving distance `r̂` of the rank of
//! interest. [`Analyzer`] owns the caches; the free functions build a fresh
//! one per call.

mod analyzer;

use serde::{Deserialize, Serialize};

pub use analyzer::Analyzer;

use crate::error::Result;
use crate::geometry::NetworkParams;
use crate::laplace::QuadratureConfig;
use crate::SicMode;

/// Largest cluster size for which imperfect SIC enumerates all `2^{m-1}`
/// detection combinations.
pub const COMBINATION_CAP: usize = 16;

/// Which inter-cluster Laplace transform to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InterPath {
    #[default]
    Exact,
    /// Closed-form Jensen bound; overestimates the transform, so coverage
    /// computed with it is optimistic.
    #[serde(alias = "bound", alias = "jensen")]
    JensenBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageOptions {
    pub inter: InterPath,
    /// Drop the noise term entirely.
    pub interference_limited: bool,
    pub quadrature: QuadratureConfig,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        CoverageOptions {
            inter: InterPath::Exact,
            interference_limited: false,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Sequential decoding probabilities `p_(1)..p_(c̄)` at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionProfile {
    pub threshold: f64,
    pub probabilities: Vec<f64>,
}

impl DetectionProfile {
    /// Probability that rank `m` (1-based) is detected.
    pub fn get(&self, m: usize) -> Option<f64> {
        m.checked_sub(1).and_then(|i| self.probabilities.get(i).copied())
    }
}

/// Ergodic rate of one rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageRate {
    pub nats: f64,
    /// Coverage had not decayed below the floor by the integration cap.
    pub diverged: bool,
}

impl AverageRate {
    pub fn bits(&self) -> f64 {
        self.nats / std::f64::consts::LN_2
    }
}

/// Arithmetic mean of per-rank coverages.
pub fn mean_cluster(per_rank: &[f64]) -> f64 {
    if per_rank.is_empty() {
        return f64::NAN;
    }
    per_rank.iter().sum::<f64>() / per_rank.len() as f64
}

pub fn coverage_perfect(
    m: usize,
    sinr_target: f64,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<f64> {
    Analyzer::new(params.clone(), options.clone())?.coverage_perfect(m, sinr_target)
}

pub fn coverage_perfect_series_alpha4(
    m: usize,
    sinr_target: f64,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<f64> {
    Analyzer::new(params.clone(), options.clone())?.coverage_perfect_series_alpha4(m, sinr_target)
}

pub fn detection_profile_exact(
    threshold: f64,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<DetectionProfile> {
    Analyzer::new(params.clone(), options.clone())?.detection_profile_exact(threshold)
}

pub fn detection_prob_worst(
    m: usize,
    threshold: f64,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<f64> {
    Analyzer::new(params.clone(), options.clone())?.detection_prob_worst(m, threshold)
}

pub fn coverage_imperfect(
    m: usize,
    sinr_target: f64,
    threshold: f64,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<f64> {
    Analyzer::new(params.clone(), options.clone())?.coverage_imperfect(m, sinr_target, threshold)
}

pub fn coverage_worst(
    m: usize,
    sinr_target: f64,
    threshold: f64,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<f64> {
    Analyzer::new(params.clone(), options.clone())?.coverage_worst(m, sinr_target, threshold)
}

/// OMA coverage for target rate `rate_target` in bps/Hz.
pub fn coverage_oma(
    m: usize,
    rate_target: f64,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<f64> {
    Analyzer::new(params.clone(), options.clone())?.coverage_oma(m, rate_target)
}

pub fn coverage_oma_closed_form(m: usize, rate_target: f64, params: &NetworkParams) -> Result<f64> {
    Analyzer::new(params.clone(), CoverageOptions::default())?.coverage_oma_closed_form(m, rate_target)
}

pub fn mean_cluster_coverage(
    mode: SicMode,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<f64> {
    Analyzer::new(params.clone(), options.clone())?.mean_cluster_coverage(mode)
}

pub fn average_rate(
    m: usize,
    mode: SicMode,
    params: &NetworkParams,
    options: &CoverageOptions,
) -> Result<AverageRate> {
    Analyzer::new(params.clone(), options.clone())?.average_rate(m, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pdf_rank_distance, RateTargets};
    use crate::laplace::{laplace_inter_bound, laplace_intra_additional, laplace_intra_perfect};

    fn small() -> NetworkParams {
        NetworkParams {
            users_per_cluster: 4,
            noise_power: 0.0,
            ..NetworkParams::default()
        }
        .with_bs_count(8.0)
    }

    fn bound_opts() -> CoverageOptions {
        CoverageOptions {
            inter: InterPath::JensenBound,
            interference_limited: true,
            ..CoverageOptions::default()
        }
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn perfect_matches_direct_integral() {
        let p = small();
        let an = Analyzer::new(p.clone(), bound_opts()).unwrap();
        let g = 0.7;
        for m in 1..=4 {
            let oracle = simpson(
                |r| {
                    if r == 0.0 {
                        return 0.0;
                    }
                    let s = g * r.powi(4) / p.tx_power;
                    laplace_intra_perfect(s, m, r, &p, &QuadratureConfig::default()).unwrap()
                        * laplace_inter_bound(s, &p).unwrap()
                        * pdf_rank_distance(r, m, 4, p.cluster_radius).unwrap()
                },
                0.0,
                p.cluster_radius,
                2000,
            );
            let got = an.coverage_perfect(m, g).unwrap();
            assert!((got - oracle).abs() < 1e-7, "m={m}: {got} vs {oracle}");
        }
    }

    #[test]
    fn coverage_decreases_with_target() {
        let an = Analyzer::new(small(), bound_opts()).unwrap();
        let mut last = 1.0;
        for g in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let c = an.coverage_perfect(2, g).unwrap();
            assert!(c <= last + 1e-12 && (0.0..=1.0).contains(&c));
            last = c;
        }
    }

    #[test]
    fn series_matches_integral() {
        let an = Analyzer::new(small(), bound_opts()).unwrap();
        for m in 1..=4 {
            for g in [0.3, 7.0] {
                let a = an.coverage_perfect(m, g).unwrap();
                let b = an.coverage_perfect_series_alpha4(m, g).unwrap();
                assert!((a - b).abs() < 1e-6, "m={m} γ={g}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn series_rejects_noise_and_other_exponents() {
        let p = NetworkParams { noise_power: 1.0, ..small() };
        let an = Analyzer::new(p, CoverageOptions::default()).unwrap();
        assert!(an.coverage_perfect_series_alpha4(1, 1.0).is_err());
        let p = NetworkParams { pathloss_exponent: 3.5, ..small() };
        let an = Analyzer::new(p, bound_opts()).unwrap();
        assert!(an.coverage_perfect_series_alpha4(1, 1.0).is_err());
    }

    #[test]
    fn oma_closed_form_matches_integral() {
        for c in [1usize, 3, 6] {
            let p = NetworkParams { users_per_cluster: c, rate_targets: RateTargets::Shared(0.5), ..small() };
            let an = Analyzer::new(p, bound_opts()).unwrap();
            for m in 1..=c {
                let a = an.coverage_oma(m, 0.5).unwrap();
                let b = an.coverage_oma_closed_form(m, 0.5).unwrap();
                assert!((a - b).abs() < 1e-7, "c̄={c} m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn oma_single_interferer_exact_equals_bound() {
        let p = small();
        let ex = Analyzer::new(p.clone(), CoverageOptions { interference_limited: true, ..Default::default() }).unwrap();
        let bd = Analyzer::new(p, bound_opts()).unwrap();
        let a = ex.coverage_oma(2, 0.4).unwrap();
        let b = bd.coverage_oma(2, 0.4).unwrap();
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn imperfect_with_certain_detection_is_perfect() {
        let an = Analyzer::new(small(), bound_opts()).unwrap();
        for m in 1..=4 {
            let a = an.coverage_imperfect_with(m, 0.5, &vec![1.0; m - 1]).unwrap();
            let b = an.coverage_perfect(m, 0.5).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn enumeration_matches_factorized_product() {
        let p = small();
        let cfg = QuadratureConfig::default();
        let an = Analyzer::new(p.clone(), bound_opts()).unwrap();
        let det = [0.9, 0.6, 0.3];
        let m = 4;
        let g = 0.8;
        let oracle = simpson(
            |r| {
                if r == 0.0 {
                    return 0.0;
                }
                let s = g * r.powi(4) / p.tx_power;
                let mut prod = 1.0;
                for j in 0..m - 1 {
                    let mut only = vec![true; m - 1];
                    only[j] = false;
                    let lam = laplace_intra_additional(s, m, r, &only, &p, &cfg).unwrap();
                    prod *= det[j] + (1.0 - det[j]) * lam;
                }
                prod * laplace_intra_perfect(s, m, r, &p, &cfg).unwrap()
                    * laplace_inter_bound(s, &p).unwrap()
                    * pdf_rank_distance(r, m, 4, p.cluster_radius).unwrap()
            },
            0.0,
            p.cluster_radius,
            1000,
        );
        let got = an.coverage_imperfect_with(m, g, &det).unwrap();
        assert!((got - oracle).abs() < 1e-7, "{got} vs {oracle}");
    }

    #[test]
    fn detection_profile_is_consistent() {
        let an = Analyzer::new(small(), bound_opts()).unwrap();
        let prof = an.detection_profile_exact(1.0).unwrap();
        assert_eq!(prof.probabilities.len(), 4);
        assert!((prof.get(1).unwrap() - an.coverage_perfect(1, 1.0).unwrap()).abs() < 1e-12);
        for (m, &pm) in prof.probabilities.iter().enumerate() {
            assert!((0.0..=1.0).contains(&pm));
            assert!(pm <= an.coverage_perfect(m + 1, 1.0).unwrap() + 1e-10);
        }
        assert_eq!(prof.get(0), None);
    }

    #[test]
    fn worst_case_below_perfect() {
        let an = Analyzer::new(small(), bound_opts()).unwrap();
        assert_eq!(an.detection_prob_worst(1, 1.0).unwrap(), 1.0);
        for m in 1..=4 {
            let w = an.coverage_worst(m, 0.5, 1.0).unwrap();
            assert!(w <= an.coverage_perfect(m, 0.5).unwrap() + 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let p = NetworkParams { users_per_cluster: COMBINATION_CAP + 1, ..small() };
        let an = Analyzer::new(p, bound_opts()).unwrap();
        assert!(matches!(
            an.detection_profile_exact(1.0),
            Err(crate::Error::Unsupported(_))
        ));
        assert!(an.coverage_worst(3, 1.0, 1.0).is_ok());
    }

    #[test]
    fn noise_lowers_coverage() {
        let quiet = Analyzer::new(small(), CoverageOptions { inter: InterPath::JensenBound, ..Default::default() }).unwrap();
        let noisy = Analyzer::new(
            NetworkParams { noise_power: 0.05, pathloss_reference: 1.0, ..small() },
            CoverageOptions { inter: InterPath::JensenBound, ..Default::default() },
        )
        .unwrap();
        assert!(noisy.coverage_perfect(3, 1.0).unwrap() < quiet.coverage_perfect(3, 1.0).unwrap());
    }

    #[test]
    fn average_rate_is_finite_and_ordered() {
        let an = Analyzer::new(small(), bound_opts()).unwrap();
        let r1 = an.average_rate(1, SicMode::PerfectSic).unwrap();
        let r4 = an.average_rate(4, SicMode::PerfectSic).unwrap();
        assert!(!r1.diverged && r1.nats > 0.0);
        assert!(r4.nats > 0.0);
        let oma = an.average_rate(1, SicMode::Oma).unwrap();
        assert!(oma.nats > 0.0 && oma.nats.is_finite());
        assert!((r1.bits() - r1.nats / std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn mean_of_ranks() {
        assert!((mean_cluster(&[0.2, 0.4]) - 0.3).abs() < 1e-15);
        assert!(mean_cluster(&[]).is_nan());
    }
}
