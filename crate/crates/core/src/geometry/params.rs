use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-rank target rates in bps/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RateTargets {
    /// One target `R_th` shared by every rank.
    Shared(f64),
    /// `R_m` for ranks `1..=c̄`, in rank order.
    PerRank(Vec<f64>),
}

/// Scalar model parameters of the cluster network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Base-station (cluster center) intensity, clusters per km².
    pub bs_intensity: f64,
    /// Users per cluster, `c̄`.
    pub users_per_cluster: usize,
    /// Cluster radius `R` in km.
    pub cluster_radius: f64,
    /// Path-loss exponent `α`, must exceed 2.
    pub pathloss_exponent: f64,
    /// User transmit power in watts.
    pub tx_power: f64,
    /// Noise power in watts; zero means interference-limited.
    pub noise_power: f64,
    /// Distance in km at which path loss is unity. Received power is
    /// `P_u h (r / d0)^{-α}`; it only matters against the noise.
    pub pathloss_reference: f64,
    /// Detection threshold `θ` (linear SINR) used by the SIC chain.
    pub detection_threshold: f64,
    pub rate_targets: RateTargets,
    /// Side of the square simulation window in km.
    pub region_side: f64,
}

impl Default for NetworkParams {
    /// Baseline setup: 2 clusters per 10x10 km², 8 users, R = 0.8 km,
    /// α = 4, 2 W, 1e-14 W noise with path loss referenced to 1 m,
    /// 0 dB detection threshold and 3 bps/Hz per user.
    fn default() -> Self {
        NetworkParams {
            bs_intensity: 2.0 / 100.0,
            users_per_cluster: 8,
            cluster_radius: 0.8,
            pathloss_exponent: 4.0,
            tx_power: 2.0,
            noise_power: 1e-14,
            pathloss_reference: 1e-3,
            detection_threshold: 1.0,
            rate_targets: RateTargets::Shared(3.0),
            region_side: 10.0,
        }
    }
}

impl NetworkParams {
    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.bs_intensity >= 0.0 && self.bs_intensity.is_finite()) {
            errs.push(format!("bs_intensity must be >= 0 (got {})", self.bs_intensity));
        }
        if self.users_per_cluster < 1 {
            errs.push("users_per_cluster must be >= 1".to_string());
        }
        if !(self.cluster_radius > 0.0 && self.cluster_radius.is_finite()) {
            errs.push(format!("cluster_radius must be > 0 (got {})", self.cluster_radius));
        }
        if !(self.pathloss_exponent > 2.0 && self.pathloss_exponent.is_finite()) {
            errs.push(format!(
                "pathloss_exponent: α>2 required (got {})",
                self.pathloss_exponent
            ));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            errs.push(format!("tx_power must be > 0 (got {})", self.tx_power));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            errs.push(format!("noise_power must be >= 0 (got {})", self.noise_power));
        }
        if !(self.pathloss_reference > 0.0 && self.pathloss_reference.is_finite()) {
            errs.push(format!(
                "pathloss_reference must be > 0 (got {})",
                self.pathloss_reference
            ));
        }
        if !(self.detection_threshold > 0.0 && self.detection_threshold.is_finite()) {
            errs.push(format!(
                "detection_threshold must be > 0 (got {})",
                self.detection_threshold
            ));
        }
        match &self.rate_targets {
            RateTargets::Shared(r) => {
                if !(*r > 0.0 && r.is_finite()) {
                    errs.push(format!("rate target must be > 0 (got {r})"));
                }
            }
            RateTargets::PerRank(rs) => {
                if rs.len() != self.users_per_cluster {
                    errs.push(format!(
                        "per-rank rate targets: expected {} entries, got {}",
                        self.users_per_cluster,
                        rs.len()
                    ));
                }
                if let Some(bad) = rs.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
                    errs.push(format!("rate targets must all be > 0 (got {bad})"));
                }
            }
        }
        if !(self.region_side > 0.0 && self.region_side.is_finite()) {
            errs.push(format!("region_side must be > 0 (got {})", self.region_side));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errs))
        }
    }

    /// Noise on the scale of `P_u h r^{-α}` with `r` in km:
    /// `N0 · d0^{-α}`.
    pub fn effective_noise(&self) -> f64 {
        self.noise_power * self.pathloss_reference.powf(-self.pathloss_exponent)
    }

    /// Expected number of clusters in the simulation window, `λ_m|A|`.
    pub fn bs_count(&self) -> f64 {
        self.bs_intensity * self.region_side * self.region_side
    }

    /// Sets the intensity so that the window holds `count` clusters on average.
    pub fn with_bs_count(mut self, count: f64) -> Self {
        self.bs_intensity = count / (self.region_side * self.region_side);
        self
    }

    pub fn rate_target(&self, m: usize) -> f64 {
        match &self.rate_targets {
            RateTargets::Shared(r) => *r,
            RateTargets::PerRank(rs) => rs[m - 1],
        }
    }

    /// NOMA SINR target of rank `m`: `2^{R_m} - 1`.
    pub fn sinr_target(&self, m: usize) -> f64 {
        self.rate_target(m).exp2() - 1.0
    }

    /// OMA SINR target of rank `m`: `2^{R_m c̄} - 1` (TDMA over `c̄` slots).
    pub fn oma_target(&self, m: usize) -> f64 {
        (self.rate_target(m) * self.users_per_cluster as f64).exp2() - 1.0
    }

    pub(crate) fn check_rank(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.users_per_cluster {
            return Err(Error::Domain(format!(
                "rank {m} outside 1..={}",
                self.users_per_cluster
            )));
        }
        Ok(())
    }
}

/// Rank `m`, conditioning distance `r̂` and an optional secondary rank `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankQuery {
    pub rank: usize,
    pub conditioning_distance: f64,
    pub secondary_rank: Option<usize>,
}

impl RankQuery {
    pub fn validate(&self, users_per_cluster: usize, cluster_radius: f64) -> Result<()> {
        let mut errs = Vec::new();
        if self.rank == 0 || self.rank > users_per_cluster {
            errs.push(format!("rank {} outside 1..={users_per_cluster}", self.rank));
        }
        let r = self.conditioning_distance;
        if !(r > 0.0 && r <= cluster_radius) {
            errs.push(format!("conditioning distance {r} outside (0, {cluster_radius}]"));
        }
        if let Some(j) = self.secondary_rank {
            if j == 0 || j > users_per_cluster {
                errs.push(format!("secondary rank {j} outside 1..={users_per_cluster}"));
            }
            if j == self.rank {
                errs.push("secondary rank must differ from rank".to_string());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        NetworkParams::default().validate().unwrap();
        assert!((NetworkParams::default().bs_count() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validate_lists_every_violation() {
        let p = NetworkParams {
            users_per_cluster: 0,
            pathloss_exponent: 2.0,
            tx_power: -1.0,
            ..NetworkParams::default()
        };
        match p.validate() {
            Err(Error::InvalidParams(v)) => {
                assert_eq!(v.len(), 3, "{v:?}");
                assert!(v.iter().any(|e| e.contains("α>2 required")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn targets() {
        let p = NetworkParams {
            rate_targets: RateTargets::Shared(1.5),
            ..NetworkParams::default()
        };
        assert_eq!(p.oma_target(1), 4095.0);
        assert!((p.sinr_target(3) - (2f64.powf(1.5) - 1.0)).abs() < 1e-15);
        let q = NetworkParams::default();
        assert_eq!(q.sinr_target(1), 7.0);
    }

    #[test]
    fn rank_query() {
        let q = RankQuery {
            rank: 3,
            conditioning_distance: 0.4,
            secondary_rank: Some(3),
        };
        assert!(q.validate(8, 0.8).is_err());
        let ok = RankQuery {
            secondary_rank: Some(5),
            ..q
        };
        ok.validate(8, 0.8).unwrap();
    }
}
