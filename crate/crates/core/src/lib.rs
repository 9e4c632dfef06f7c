//! Rate coverage of uplink NOMA in Matern-cluster cellular networks.
//!
//! Two engines share one parameter model:
//!
//! * an analytical engine ([`laplace`], [`coverage`]) built on order-statistics
//!   distance laws and Laplace transforms of the intra- and inter-cluster
//!   interference, evaluated by adaptive Gauss-Kronrod quadrature;
//! * a Monte-Carlo engine ([`montecarlo`]) that samples full network
//!   realizations and runs the actual SIC decoding chain.
//!
//! [`geometry`] holds the point-process samplers and every distance density
//! the analysis needs.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coverage;
pub mod error;
pub mod geometry;
pub mod laplace;
pub mod montecarlo;

pub use error::{Error, Result};
pub use geometry::{NetworkParams, RateTargets};

use serde::{Deserialize, Serialize};

/// How the base station handles the intra-cluster signals of lower ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SicMode {
    PerfectSic,
    ImperfectSic,
    WorstCaseSic,
    Oma,
}

impl SicMode {
    pub const ALL: [SicMode; 4] = [
        SicMode::PerfectSic,
        SicMode::ImperfectSic,
        SicMode::WorstCaseSic,
        SicMode::Oma,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SicMode::PerfectSic => "perfect",
            SicMode::ImperfectSic => "imperfect",
            SicMode::WorstCaseSic => "worst",
            SicMode::Oma => "oma",
        }
    }
}

impl std::fmt::Display for SicMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SicMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perfect" | "perfect_sic" | "perfectsic" => Ok(SicMode::PerfectSic),
            "imperfect" | "imperfect_sic" | "imperfectsic" => Ok(SicMode::ImperfectSic),
            "worst" | "worst_case" | "worstcasesic" | "worst_case_sic" => {
                Ok(SicMode::WorstCaseSic)
            }
            "oma" => Ok(SicMode::Oma),
            other => Err(Error::Domain(format!("unknown SIC mode '{other}'"))),
        }
    }
}
