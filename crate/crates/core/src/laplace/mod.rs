//! Laplace transforms of the intra- and inter-cluster interference, plus the
//! quadrature and special-function kernels they rest on.
//!
//! Transforms take `s` in the units of `1/P_u · km^{-α}`, so that in coverage
//! use `s = γ r̂^α / P_u`.

mod inter;
mod intra;
pub mod quadrature;
pub mod special;

pub use inter::{laplace_inter_bound, laplace_inter_bound_with, laplace_inter_exact, laplace_inter_exact_with};
pub use intra::{
    laplace_intra_additional, laplace_intra_imperfect, laplace_intra_perfect,
    laplace_intra_perfect_alpha4, laplace_intra_perfect_quadrature,
};
pub use quadrature::{integrate, QuadResult, QuadratureConfig};
pub use special::{beta_fn, hyp1f1_regularized, incomplete_beta};

pub(crate) use inter::inter_exponent;
pub(crate) use intra::{inner_factors, outer_factor_alpha4, outer_factor_quadrature};

/// Inputs of one intra-cluster transform evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceQuery {
    pub s: f64,
    pub rank: usize,
    pub conditioning_distance: f64,
    /// `detected[j-1]` is true when rank `j` was decoded and cancelled.
    pub detected: Vec<bool>,
}

impl LaplaceQuery {
    pub fn validate(&self) -> crate::Result<()> {
        let mut errs = Vec::new();
        if !(self.s >= 0.0) {
            errs.push(format!("s must be >= 0 (got {})", self.s));
        }
        if self.rank == 0 || self.detected.len() + 1 != self.rank {
            errs.push(format!(
                "combination length {} does not match rank {}",
                self.detected.len(),
                self.rank
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(crate::Error::InvalidParams(errs))
        }
    }

    pub fn evaluate(
        &self,
        params: &crate::NetworkParams,
        cfg: &QuadratureConfig,
    ) -> crate::Result<f64> {
        self.validate()?;
        laplace_intra_imperfect(
            self.s,
            self.rank,
            self.conditioning_distance,
            &self.detected,
            params,
            cfg,
        )
    }
}
