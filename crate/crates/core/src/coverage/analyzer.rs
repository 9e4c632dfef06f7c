use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::geometry::{pdf_rank_distance, NetworkParams};
use crate::laplace::quadrature::{integrate, QuadratureConfig};
use crate::laplace::{
    beta_fn, hyp1f1_regularized, inner_factors, inter_exponent, laplace_inter_bound_with,
    outer_factor_alpha4, outer_factor_quadrature,
};
use crate::SicMode;

use super::{AverageRate, CoverageOptions, DetectionProfile, InterPath, COMBINATION_CAP};

/// Upper end, in nats, of the average-rate integral.
const RATE_CAP_NATS: f64 = 64.0;
const RATE_FLOOR: f64 = 1e-6;

/// Analytical coverage engine for one parameter set.
///
/// Inter-cluster transforms are memoized by `(active users, s·P_u)`, so
/// repeated integrals over the same quadrature nodes (ranks, modes) share
/// their most expensive factor. Safe to share across threads.
pub struct Analyzer {
    params: NetworkParams,
    options: CoverageOptions,
    inter_cache: Mutex<HashMap<(usize, u64), f64>>,
    profiles: Mutex<HashMap<u64, DetectionProfile>>,
}

impl Analyzer {
    pub fn new(params: NetworkParams, options: CoverageOptions) -> Result<Self> {
        params.validate()?;
        options.quadrature.validate()?;
        Ok(Analyzer {
            params,
            options,
            inter_cache: Mutex::new(HashMap::new()),
            profiles: Mutex::new(HashMap::new()),
        })
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn options(&self) -> &CoverageOptions {
        &self.options
    }

    fn cfg(&self) -> &QuadratureConfig {
        &self.options.quadrature
    }

    fn noise_factor(&self, gamma_target: f64, r_hat: f64) -> f64 {
        let n0 = self.params.effective_noise();
        if self.options.interference_limited || n0 == 0.0 {
            return 1.0;
        }
        (-gamma_target * n0 * r_hat.powf(self.params.pathloss_exponent) / self.params.tx_power)
            .exp()
    }

    /// Inter-cluster transform at `s·P_u = sp` with `active` users per cluster.
    pub fn inter_laplace(&self, sp: f64, active: usize) -> Result<f64> {
        if sp == 0.0 || self.params.bs_intensity == 0.0 {
            return Ok(1.0);
        }
        let s = sp / self.params.tx_power;
        match self.options.inter {
            InterPath::JensenBound => laplace_inter_bound_with(s, active, &self.params),
            InterPath::Exact => {
                let key = (active, sp.to_bits());
                if let Some(v) = self.inter_cache.lock().unwrap().get(&key) {
                    return Ok(*v);
                }
                let e = inter_exponent(sp, active, &self.params, self.cfg())?;
                let v = (-2.0 * PI * self.params.bs_intensity * e).exp();
                self.inter_cache.lock().unwrap().insert(key, v);
                Ok(v)
            }
        }
    }

    fn outer_factor(&self, sp: f64, r_hat: f64) -> Result<f64> {
        if self.params.pathloss_exponent == 4.0 {
            Ok(outer_factor_alpha4(sp, r_hat, self.params.cluster_radius))
        } else {
            outer_factor_quadrature(sp, r_hat, &self.params, self.cfg())
        }
    }

    /// `∫_0^R noise(r̂) · intra(r̂) · L_inter(γ r̂^α) · f_{r_(m)}(r̂) dr̂`.
    fn average_over_rank<F>(&self, m: usize, target: f64, active: usize, intra: F) -> Result<f64>
    where
        F: Fn(f64, f64) -> Result<f64>,
    {
        self.params.check_rank(m)?;
        if !(target >= 0.0) {
            return Err(Error::Domain(format!("SINR target must be >= 0 (got {target})")));
        }
        let p = &self.params;
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let integrand = |r_hat: f64| -> f64 {
            let pdf = pdf_rank_distance(r_hat, m, p.users_per_cluster, p.cluster_radius)
                .unwrap_or(0.0);
            if pdf == 0.0 || r_hat <= 0.0 {
                return 0.0;
            }
            let sp = target * r_hat.powf(p.pathloss_exponent);
            let value = intra(sp, r_hat).and_then(|a| Ok(a * self.inter_laplace(sp, active)?));
            match value {
                Ok(v) => v * self.noise_factor(target, r_hat) * pdf,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let q = integrate(integrand, 0.0, p.cluster_radius, self.cfg());
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(q?.value.clamp(0.0, 1.0))
    }

    /// Perfect-SIC rate coverage of rank `m` at SINR target `gamma_target`.
    pub fn coverage_perfect(&self, m: usize, gamma_target: f64) -> Result<f64> {
        let outer = (self.params.users_per_cluster.saturating_sub(m)) as i32;
        self.average_over_rank(m, gamma_target, self.params.users_per_cluster, |sp, r_hat| {
            if outer == 0 {
                return Ok(1.0);
            }
            Ok(self.outer_factor(sp, r_hat)?.powi(outer))
        })
    }

    fn check_cap(&self) -> Result<()> {
        if self.params.users_per_cluster > COMBINATION_CAP {
            return Err(Error::Unsupported(format!(
                "exact imperfect-SIC enumeration is limited to c̄ <= {COMBINATION_CAP} \
                 (got {}); use worst-case mode or the Monte-Carlo engine",
                self.params.users_per_cluster
            )));
        }
        Ok(())
    }

    /// `Σ_b A(b) P(SINR_{m,b} >= target)` given detection probabilities of
    /// ranks `1..m-1`. The combination sum runs inside the r̂ integral.
    fn coverage_with_weights(&self, m: usize, target: f64, detect: &[f64]) -> Result<f64> {
        debug_assert_eq!(detect.len() + 1, m);
        let outer = (self.params.users_per_cluster - m) as i32;
        let combos = 1usize << (m - 1);
        self.average_over_rank(m, target, self.params.users_per_cluster, |sp, r_hat| {
            let base = if outer == 0 {
                1.0
            } else {
                self.outer_factor(sp, r_hat)?.powi(outer)
            };
            if m == 1 {
                return Ok(base);
            }
            let inner = inner_factors(sp, m, r_hat, &self.params, self.cfg())?;
            let mut total = 0.0;
            for bits in 0..combos {
                let mut weight = 1.0;
                let mut extra = 1.0;
                for (j, (&p, &lambda)) in detect.iter().zip(&inner).enumerate() {
                    if bits >> j & 1 == 1 {
                        weight *= p;
                    } else {
                        weight *= 1.0 - p;
                        extra *= lambda;
                    }
                }
                total += weight * extra;
            }
            Ok(base * total)
        })
    }

    /// Sequential detection probabilities `p_(1..c̄)` at threshold `theta`.
    pub fn detection_profile_exact(&self, theta: f64) -> Result<DetectionProfile> {
        self.check_cap()?;
        if !(theta > 0.0) {
            return Err(Error::Domain(format!("detection threshold must be > 0 (got {theta})")));
        }
        if let Some(p) = self.profiles.lock().unwrap().get(&theta.to_bits()) {
            return Ok(p.clone());
        }
        let mut p = Vec::with_capacity(self.params.users_per_cluster);
        for m in 1..=self.params.users_per_cluster {
            let next = self.coverage_with_weights(m, theta, &p)?;
            p.push(next);
        }
        let profile = DetectionProfile {
            threshold: theta,
            probabilities: p,
        };
        self.profiles
            .lock()
            .unwrap()
            .insert(theta.to_bits(), profile.clone());
        Ok(profile)
    }

    /// Imperfect-SIC rate coverage of rank `m`, detection weights at `theta`.
    pub fn coverage_imperfect(&self, m: usize, gamma_target: f64, theta: f64) -> Result<f64> {
        self.params.check_rank(m)?;
        self.check_cap()?;
        if m == 1 {
            return self.coverage_perfect(1, gamma_target);
        }
        let profile = self.detection_profile_exact(theta)?;
        self.coverage_with_weights(m, gamma_target, &profile.probabilities[..m - 1])
    }

    /// Imperfect-SIC coverage with caller-supplied detection probabilities for
    /// ranks `1..m-1`.
    pub fn coverage_imperfect_with(
        &self,
        m: usize,
        gamma_target: f64,
        detection: &[f64],
    ) -> Result<f64> {
        self.params.check_rank(m)?;
        self.check_cap()?;
        if detection.len() + 1 != m {
            return Err(Error::Domain(format!(
                "need {} detection probabilities (got {})",
                m - 1,
                detection.len()
            )));
        }
        if detection.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Domain("detection probabilities must lie in [0, 1]".into()));
        }
        self.coverage_with_weights(m, gamma_target, detection)
    }

    /// `Π_{i<m} P(SINR_i >= θ)` with perfect-SIC SINRs.
    pub fn detection_prob_worst(&self, m: usize, theta: f64) -> Result<f64> {
        self.params.check_rank(m)?;
        let mut acc = 1.0;
        for i in 1..m {
            acc *= self.coverage_perfect(i, theta)?;
        }
        Ok(acc)
    }

    pub fn coverage_worst(&self, m: usize, gamma_target: f64, theta: f64) -> Result<f64> {
        Ok(self.detection_prob_worst(m, theta)? * self.coverage_perfect(m, gamma_target)?)
    }

    /// OMA coverage of rank `m` at OMA SINR target `gamma_oma`: no intra-cluster
    /// interference and one active user per interfering cluster.
    pub fn coverage_oma_target(&self, m: usize, gamma_oma: f64) -> Result<f64> {
        self.average_over_rank(m, gamma_oma, 1, |_, _| Ok(1.0))
    }

    /// OMA coverage of rank `m` for target rate `rate_target` (bps/Hz).
    pub fn coverage_oma(&self, m: usize, rate_target: f64) -> Result<f64> {
        self.coverage_oma_target(m, oma_target(rate_target, self.params.users_per_cluster))
    }

    /// Closed form `Γ(c̄+1) ₁F̃₁(m; 1+c̄; -K R²)` of the OMA coverage, valid
    /// without noise and with the Jensen inter-cluster transform;
    /// `K = πλ γ^{2/α} B(1 - 2/α, 1 + 2/α)`.
    pub fn coverage_oma_closed_form(&self, m: usize, rate_target: f64) -> Result<f64> {
        self.params.check_rank(m)?;
        let p = &self.params;
        let c = p.users_per_cluster as f64;
        let delta = 2.0 / p.pathloss_exponent;
        let g = oma_target(rate_target, p.users_per_cluster);
        let k = PI * p.bs_intensity * g.powf(delta) * beta_fn(1.0 - delta, 1.0 + delta)?;
        let x = -k * p.cluster_radius * p.cluster_radius;
        Ok(gamma(c + 1.0) * hyp1f1_regularized(m as f64, c + 1.0, x)?)
    }

    /// Interference-limited `α = 4` perfect-SIC coverage under the Jensen
    /// bound, written as a finite sum of integrals over `z = r̂²/R² ∈ [0, 1]`.
    pub fn coverage_perfect_series_alpha4(&self, m: usize, gamma_target: f64) -> Result<f64> {
        let p = &self.params;
        if p.pathloss_exponent != 4.0 {
            return Err(Error::Unsupported(format!(
                "series form needs α = 4 (got {})",
                p.pathloss_exponent
            )));
        }
        if p.noise_power > 0.0 && !self.options.interference_limited {
            return Err(Error::Unsupported(
                "series form is interference-limited; set interference_limited or N0 = 0".into(),
            ));
        }
        p.check_rank(m)?;
        if !(gamma_target > 0.0) {
            return Err(Error::Domain(format!("SINR target must be > 0 (got {gamma_target})")));
        }
        let c = p.users_per_cluster;
        let cf = c as f64;
        let sg = gamma_target.sqrt();
        let acot = |x: f64| if x == 0.0 { PI / 2.0 } else { (1.0 / x).atan() };
        let a = sg * acot(sg) - 1.0;
        let rate = PI
            * p.bs_intensity
            * p.cluster_radius
            * p.cluster_radius
            * sg
            * cf
            * beta_fn(0.5, cf + 0.5)?;
        let norm = beta_fn(m as f64, (1 + c - m) as f64)?;
        let mut total = 0.0;
        for i in 0..=(c - m) {
            let g_i = a.powi((c - m - i) as i32) * binomial(c - m, i) / norm;
            let q = integrate(
                |z| {
                    let g = 1.0 - sg * z * acot(sg * z);
                    g.powi(i as i32) * z.powi((c - i - 1) as i32) * (-rate * z).exp()
                },
                0.0,
                1.0,
                self.cfg(),
            )?;
            total += g_i * q.value;
        }
        Ok(total)
    }

    /// Rank-`m` coverage at the parameter set's own targets.
    pub fn coverage(&self, m: usize, mode: SicMode) -> Result<f64> {
        let theta = self.params.detection_threshold;
        match mode {
            SicMode::PerfectSic => self.coverage_perfect(m, self.params.sinr_target(m)),
            SicMode::ImperfectSic => self.coverage_imperfect(m, self.params.sinr_target(m), theta),
            SicMode::WorstCaseSic => self.coverage_worst(m, self.params.sinr_target(m), theta),
            SicMode::Oma => self.coverage_oma(m, self.params.rate_target(m)),
        }
    }

    pub fn per_rank_coverage(&self, mode: SicMode) -> Result<Vec<f64>> {
        (1..=self.params.users_per_cluster)
            .map(|m| self.coverage(m, mode))
            .collect()
    }

    /// Mean rate coverage of the cluster: the average over ranks.
    pub fn mean_cluster_coverage(&self, mode: SicMode) -> Result<f64> {
        Ok(super::mean_cluster(&self.per_rank_coverage(mode)?))
    }

    /// Coverage at an arbitrary SINR target for the given mode.
    fn coverage_at(&self, m: usize, mode: SicMode, target: f64) -> Result<f64> {
        let theta = self.params.detection_threshold;
        match mode {
            SicMode::PerfectSic | SicMode::WorstCaseSic => self.coverage_perfect(m, target),
            SicMode::ImperfectSic => self.coverage_imperfect(m, target, theta),
            SicMode::Oma => self.coverage_oma_target(m, target),
        }
    }

    /// Ergodic rate `∫_0^∞ P(SINR > e^t - 1) dt` of rank `m` in nats.
    ///
    /// Worst-case SIC scales the perfect-SIC rate by the worst-case detection
    /// probability; OMA carries the `1/c̄` time share.
    pub fn average_rate(&self, m: usize, mode: SicMode) -> Result<AverageRate> {
        self.params.check_rank(m)?;
        let cov = |t: f64| self.coverage_at(m, mode, t.exp_m1());
        let mut upper = 1.0;
        let mut diverged = false;
        while cov(upper)? > RATE_FLOOR {
            upper *= 2.0;
            if upper > RATE_CAP_NATS {
                upper = RATE_CAP_NATS;
                diverged = true;
                break;
            }
        }
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let q = integrate(
            |t| match cov(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            upper,
            self.cfg(),
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let mut nats = q?.value;
        match mode {
            SicMode::WorstCaseSic => {
                nats *= self.detection_prob_worst(m, self.params.detection_threshold)?
            }
            SicMode::Oma => nats /= self.params.users_per_cluster as f64,
            _ => {}
        }
        Ok(AverageRate { nats, diverged })
    }
}

pub(crate) fn oma_target(rate_target: f64, users_per_cluster: usize) -> f64 {
    (rate_target * users_per_cluster as f64).exp2() - 1.0
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
