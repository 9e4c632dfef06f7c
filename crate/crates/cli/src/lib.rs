//! Declarative sweep runner for the `pcp-noma` coverage engines.
//!
//! An experiment file fixes a base parameter set, one sweep axis, the SIC
//! modes and the engines to run. [`run_experiment`] evaluates every
//! combination and returns a table that is sorted and, for a fixed seed,
//! identical across runs and thread counts.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod presets;
mod run;
mod spec;

pub use presets::{preset, PRESET_NAMES};
pub use run::{run_experiment, write_csv, Metadata, ResultTable, Row, RowError, RowRank};
pub use spec::{
    AnalysisSection, Engine, ExperimentSpec, NetworkSection, Overrides, SimulationSection,
    SweepAxis, SweepSection,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse experiment file: {0}")]
    Parse(String),
    #[error("invalid experiment:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
    #[error("unknown preset '{0}' (available: fig3 fig4 fig5 fig6 fig7 fig8)")]
    UnknownPreset(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{0} evaluation(s) failed; see the metadata file")]
    Numerical(usize),
}

impl CliError {
    /// Process exit code: 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Read { .. }
            | CliError::Parse(_)
            | CliError::Invalid(_)
            | CliError::UnknownPreset(_) => 1,
            CliError::Write { .. } | CliError::Numerical(_) => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_errors_exit_with_one_and_run_errors_with_two() {
        assert_eq!(CliError::Parse("x".into()).exit_code(), 1);
        assert_eq!(CliError::Invalid(vec![]).exit_code(), 1);
        let io = || std::io::Error::other("x");
        assert_eq!(CliError::Read { path: "a".into(), source: io() }.exit_code(), 1);
        assert_eq!(CliError::Write { path: "a".into(), source: io() }.exit_code(), 2);
        assert_eq!(CliError::Numerical(3).exit_code(), 2);
    }

    #[test]
    fn invalid_message_lists_each_problem() {
        let msg = CliError::Invalid(vec!["a bad".into(), "b bad".into()]).to_string();
        assert!(msg.contains("- a bad") && msg.contains("- b bad"));
    }
}
