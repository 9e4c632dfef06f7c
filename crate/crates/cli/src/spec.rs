use std::path::PathBuf;
use std::str::FromStr;

use pcp_noma::coverage::{CoverageOptions, InterPath};
use pcp_noma::laplace::QuadratureConfig;
use pcp_noma::montecarlo::{Baseline, RankingRule, SimOptions};
use pcp_noma::{NetworkParams, RateTargets, SicMode};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Montecarlo,
    PppBaseline,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Montecarlo => "montecarlo",
            Engine::PppBaseline => "ppp_baseline",
        }
    }
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" | "analysis" => Ok(Engine::Analytic),
            "montecarlo" | "mc" | "simulation" => Ok(Engine::Montecarlo),
            "ppp_baseline" | "ppp" => Ok(Engine::PppBaseline),
            other => Err(format!("unknown engine '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    ClusterRadius,
    /// Expected clusters in the window, `λ|A|`.
    BsCount,
    UsersPerCluster,
    RateTarget,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::ClusterRadius => "cluster_radius",
            SweepAxis::BsCount => "bs_count",
            SweepAxis::UsersPerCluster => "users_per_cluster",
            SweepAxis::RateTarget => "rate_target",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    /// Expected clusters in the window, `λ|A|`.
    pub bs_count: f64,
    pub region_side: f64,
    pub users_per_cluster: i64,
    pub cluster_radius: f64,
    pub pathloss_exponent: f64,
    pub tx_power: f64,
    pub noise_power: f64,
    pub pathloss_reference: f64,
    pub detection_threshold: Option<f64>,
    pub detection_threshold_db: Option<f64>,
    pub rate_target: Option<f64>,
    pub rate_targets: Option<Vec<f64>>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let p = NetworkParams::default();
        NetworkSection {
            bs_count: p.bs_count(),
            region_side: p.region_side,
            users_per_cluster: p.users_per_cluster as i64,
            cluster_radius: p.cluster_radius,
            pathloss_exponent: p.pathloss_exponent,
            tx_power: p.tx_power,
            noise_power: p.noise_power,
            pathloss_reference: p.pathloss_reference,
            detection_threshold: None,
            detection_threshold_db: None,
            rate_target: None,
            rate_targets: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub trials: usize,
    pub seed: u64,
    pub wraparound: bool,
    pub ranking_rule: RankingRule,
    pub fixed_cluster_count: Option<usize>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let o = SimOptions::default();
        SimulationSection {
            trials: o.n_trials,
            seed: o.rng_seed,
            wraparound: o.wraparound,
            ranking_rule: o.ranking_rule,
            fixed_cluster_count: o.fixed_cluster_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub inter_laplace: InterPath,
    pub interference_limited: bool,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub tail_cutoff_multiplier: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        AnalysisSection {
            inter_laplace: InterPath::Exact,
            interference_limited: false,
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            max_subdivisions: q.max_subdivisions,
            tail_cutoff_multiplier: q.tail_cutoff_multiplier,
        }
    }
}

/// One experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub network: NetworkSection,
    pub sweep: SweepSection,
    pub modes: Vec<String>,
    pub engines: Vec<String>,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub output: Option<PathBuf>,
}

/// Command-line values that replace the file's.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub output: Option<PathBuf>,
    pub engines: Vec<String>,
    pub modes: Vec<String>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment spec serializes")
    }

    /// Flags take precedence over the file, which takes precedence over the
    /// built-in defaults.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.simulation.seed = seed;
        }
        if let Some(trials) = o.trials {
            self.simulation.trials = trials;
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
        if !o.engines.is_empty() {
            self.engines = o.engines.clone();
        }
        if !o.modes.is_empty() {
            self.modes = o.modes.clone();
        }
    }

    pub fn parsed_modes(&self) -> Result<Vec<SicMode>, Vec<String>> {
        parse_set(&self.modes, "modes", |s| SicMode::from_str(s).map_err(|e| e.to_string()))
    }

    pub fn parsed_engines(&self) -> Result<Vec<Engine>, Vec<String>> {
        parse_set(&self.engines, "engines", Engine::from_str)
    }

    fn threshold(&self) -> Result<f64, String> {
        match (self.network.detection_threshold, self.network.detection_threshold_db) {
            (Some(_), Some(_)) => {
                Err("network: give detection_threshold or detection_threshold_db, not both".into())
            }
            (Some(t), None) => Ok(t),
            (None, Some(db)) => Ok(10f64.powf(db / 10.0)),
            (None, None) => Ok(NetworkParams::default().detection_threshold),
        }
    }

    fn base_targets(&self) -> Result<RateTargets, String> {
        match (&self.network.rate_target, &self.network.rate_targets) {
            (Some(_), Some(_)) => Err("network: give rate_target or rate_targets, not both".into()),
            (Some(r), None) => Ok(RateTargets::Shared(*r)),
            (None, Some(rs)) => Ok(RateTargets::PerRank(rs.clone())),
            (None, None) => Ok(NetworkParams::default().rate_targets),
        }
    }

    /// Parameters at one sweep value.
    pub fn params_at(&self, value: f64) -> Result<NetworkParams, Vec<String>> {
        let n = &self.network;
        let mut errs = Vec::new();
        let threshold = self.threshold().unwrap_or_else(|e| {
            errs.push(e);
            f64::NAN
        });
        let mut targets = self.base_targets().unwrap_or_else(|e| {
            errs.push(e);
            RateTargets::Shared(f64::NAN)
        });
        let mut users = n.users_per_cluster;
        let mut radius = n.cluster_radius;
        let mut count = n.bs_count;
        match self.sweep.axis {
            SweepAxis::ClusterRadius => radius = value,
            SweepAxis::BsCount => count = value,
            SweepAxis::RateTarget => targets = RateTargets::Shared(value),
            SweepAxis::UsersPerCluster => {
                if value.fract() != 0.0 || value < 1.0 {
                    errs.push(format!("sweep: users_per_cluster values must be integers >= 1 (got {value})"));
                }
                users = value as i64;
            }
        }
        if users < 1 {
            errs.push(format!("users_per_cluster must be >= 1 (got {users})"));
        }
        if !(count > 0.0) {
            errs.push(format!("bs_count must be > 0 (got {count})"));
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let params = NetworkParams {
            bs_intensity: 1.0,
            users_per_cluster: users as usize,
            cluster_radius: radius,
            pathloss_exponent: n.pathloss_exponent,
            tx_power: n.tx_power,
            noise_power: n.noise_power,
            pathloss_reference: n.pathloss_reference,
            detection_threshold: threshold,
            rate_targets: targets,
            region_side: n.region_side,
        }
        .with_bs_count(count);
        match params.validate() {
            Ok(()) => Ok(params),
            Err(pcp_noma::Error::InvalidParams(list)) => Err(list),
            Err(e) => Err(vec![e.to_string()]),
        }
    }

    pub fn coverage_options(&self) -> CoverageOptions {
        let a = &self.analysis;
        CoverageOptions {
            inter: a.inter_laplace,
            interference_limited: a.interference_limited,
            quadrature: QuadratureConfig {
                abs_tol: a.abs_tol,
                rel_tol: a.rel_tol,
                max_subdivisions: a.max_subdivisions,
                tail_cutoff_multiplier: a.tail_cutoff_multiplier,
            },
        }
    }

    pub fn sim_options(&self, baseline: Baseline) -> SimOptions {
        let s = &self.simulation;
        SimOptions {
            n_trials: s.trials,
            rng_seed: s.seed,
            wraparound: s.wraparound,
            ranking_rule: s.ranking_rule,
            baseline,
            fixed_cluster_count: s.fixed_cluster_count,
        }
    }

    /// Checks every field and reports all violations together.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut errs = Vec::new();
        if self.sweep.values.is_empty() {
            errs.push("sweep.values: must not be empty".to_string());
        }
        if let Some(v) = self.sweep.values.iter().find(|v| !v.is_finite()) {
            errs.push(format!("sweep.values: must be finite (got {v})"));
        }
        if let Err(e) = self.parsed_modes() {
            errs.extend(e);
        }
        let engines = self.parsed_engines().unwrap_or_else(|e| {
            errs.extend(e);
            Vec::new()
        });
        let mut seen = Vec::new();
        for &v in &self.sweep.values {
            if let Err(list) = self.params_at(v) {
                for e in list {
                    let e = if self.sweep.values.len() > 1 {
                        format!("at {} = {v}: {e}", self.sweep.axis.as_str())
                    } else {
                        e
                    };
                    if !seen.contains(&e) {
                        seen.push(e);
                    }
                }
            }
        }
        errs.extend(seen);
        if self.sweep.values.is_empty() {
            if let Err(list) = self.params_at(self.network.cluster_radius) {
                errs.extend(list);
            }
        }
        if let Err(pcp_noma::Error::InvalidParams(list)) = self.coverage_options().quadrature.validate() {
            errs.extend(list.into_iter().map(|e| format!("analysis: {e}")));
        }
        let sims = engines.iter().any(|e| *e != Engine::Analytic);
        if sims && self.simulation.trials < pcp_noma::montecarlo::MIN_TRIALS {
            errs.push(format!(
                "simulation.trials: at least {} needed (got {})",
                pcp_noma::montecarlo::MIN_TRIALS,
                self.simulation.trials
            ));
        }
        if self.simulation.fixed_cluster_count == Some(0) {
            errs.push("simulation.fixed_cluster_count: must be >= 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(errs))
        }
    }
}

fn parse_set<T: Ord + Copy>(
    raw: &[String],
    field: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Vec<T>, Vec<String>> {
    if raw.is_empty() {
        return Err(vec![format!("{field}: at least one entry required")]);
    }
    let mut out = Vec::new();
    let mut errs = Vec::new();
    for s in raw {
        match parse(s) {
            Ok(v) => out.push(v),
            Err(e) => errs.push(format!("{field}: {e}")),
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    out.sort();
    out.dedup();
    Ok(out)
}
