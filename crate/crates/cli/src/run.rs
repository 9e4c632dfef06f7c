use std::io::Write;
use std::time::Instant;

use pcp_noma::coverage::Analyzer;
use pcp_noma::montecarlo::{estimate_coverage_modes, estimate_ppp_baseline_modes, Baseline};
use pcp_noma::{NetworkParams, SicMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::spec::{Engine, ExperimentSpec};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RowRank {
    Rank(usize),
    /// Mean over the cluster; sorts after every rank.
    Mean,
}

impl std::fmt::Display for RowRank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowRank::Rank(m) => write!(f, "{m}"),
            RowRank::Mean => f.write_str("mean"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub sweep_value: f64,
    pub engine: Engine,
    pub mode: SicMode,
    pub rank: RowRank,
    /// `None` when undefined (empty PPP rank) or when the evaluation failed.
    pub estimate: Option<f64>,
    pub ci95: Option<f64>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub sweep_value: f64,
    pub engine: Engine,
    pub mode: Option<SicMode>,
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub name: String,
    pub version: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub sweep_axis: &'static str,
    pub spec: ExperimentSpec,
    pub notes: Vec<String>,
    pub errors: Vec<RowError>,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

struct Task {
    index: usize,
    value: f64,
    engine: Engine,
}

fn error_code(e: &pcp_noma::Error) -> &'static str {
    match e {
        pcp_noma::Error::Domain(_) => "domain",
        pcp_noma::Error::Unsupported(_) => "unsupported",
        pcp_noma::Error::Numerical { .. } => "numerical",
        pcp_noma::Error::InvalidParams(_) => "invalid_params",
    }
}

fn run_analytic(
    spec: &ExperimentSpec,
    params: &NetworkParams,
    modes: &[SicMode],
    value: f64,
    rows: &mut Vec<Row>,
    errors: &mut Vec<RowError>,
) {
    let fail = |mode: Option<SicMode>, e: pcp_noma::Error| RowError {
        sweep_value: value,
        engine: Engine::Analytic,
        mode,
        code: error_code(&e),
        message: e.to_string(),
    };
    let analyzer = match Analyzer::new(params.clone(), spec.coverage_options()) {
        Ok(a) => a,
        Err(e) => {
            errors.push(fail(None, e));
            return;
        }
    };
    for &mode in modes {
        let start = Instant::now();
        match analyzer.per_rank_coverage(mode) {
            Ok(per_rank) => {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                let mean = pcp_noma::coverage::mean_cluster(&per_rank);
                let all = per_rank
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| (RowRank::Rank(i + 1), c))
                    .chain([(RowRank::Mean, mean)]);
                for (rank, c) in all {
                    rows.push(Row {
                        sweep_value: value,
                        engine: Engine::Analytic,
                        mode,
                        rank,
                        estimate: Some(c),
                        ci95: None,
                        runtime_ms: ms,
                    });
                }
            }
            Err(e) => errors.push(fail(Some(mode), e)),
        }
    }
}

fn run_task(spec: &ExperimentSpec, modes: &[SicMode], task: &Task) -> (Vec<Row>, Vec<RowError>) {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let params = spec.params_at(task.value).expect("validated before running");
    let start = Instant::now();
    let fail = |e: pcp_noma::Error| RowError {
        sweep_value: task.value,
        engine: task.engine,
        mode: None,
        code: error_code(&e),
        message: e.to_string(),
    };
    match task.engine {
        Engine::Analytic => run_analytic(spec, &params, modes, task.value, &mut rows, &mut errors),
        Engine::Montecarlo => {
            match estimate_coverage_modes(&params, modes, &spec.sim_options(Baseline::Mcp)) {
                Ok(reports) => {
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    for r in reports {
                        let all = r
                            .per_rank
                            .iter()
                            .enumerate()
                            .map(|(i, e)| (RowRank::Rank(i + 1), Some(*e)))
                            .chain([(RowRank::Mean, Some(r.mean))]);
                        push_estimates(&mut rows, task, r.mode, all, ms);
                    }
                }
                Err(e) => errors.push(fail(e)),
            }
        }
        Engine::PppBaseline => {
            match estimate_ppp_baseline_modes(&params, modes, &spec.sim_options(Baseline::PppUsers)) {
                Ok(reports) => {
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    for r in reports {
                        let all = r
                            .per_rank
                            .iter()
                            .enumerate()
                            .map(|(i, e)| (RowRank::Rank(i + 1), *e))
                            .chain([(RowRank::Mean, r.mean)]);
                        push_estimates(&mut rows, task, r.mode, all, ms);
                    }
                }
                Err(e) => errors.push(fail(e)),
            }
        }
    }
    (rows, errors)
}

fn push_estimates(
    rows: &mut Vec<Row>,
    task: &Task,
    mode: SicMode,
    all: impl Iterator<Item = (RowRank, Option<pcp_noma::montecarlo::CoverageEstimate>)>,
    ms: f64,
) {
    for (rank, e) in all {
        rows.push(Row {
            sweep_value: task.value,
            engine: task.engine,
            mode,
            rank,
            estimate: e.map(|e| e.estimate),
            ci95: e.map(|e| e.half_width_95),
            runtime_ms: ms,
        });
    }
}

/// Runs every (sweep value, engine) pair on the rayon pool and assembles
/// the rows in a fixed order regardless of completion order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable, CliError> {
    spec.validate()?;
    let modes = spec.parsed_modes().map_err(CliError::Invalid)?;
    let engines = spec.parsed_engines().map_err(CliError::Invalid)?;
    let tasks: Vec<Task> = spec
        .sweep
        .values
        .iter()
        .enumerate()
        .flat_map(|(index, &value)| engines.iter().map(move |&engine| Task { index, value, engine }))
        .collect();

    let results: Vec<(Vec<Row>, Vec<RowError>)> =
        tasks.par_iter().map(|t| run_task(spec, &modes, t)).collect();

    let mut keyed: Vec<(usize, Row)> = Vec::new();
    let mut errors = Vec::new();
    for (task, (rows, errs)) in tasks.iter().zip(results) {
        keyed.extend(rows.into_iter().map(|r| (task.index, r)));
        errors.extend(errs);
    }
    keyed.sort_by(|(ia, a), (ib, b)| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(ia.cmp(ib))
            .then(a.mode.cmp(&b.mode))
            .then(a.rank.cmp(&b.rank))
            .then(a.engine.cmp(&b.engine))
    });

    let mut notes = Vec::new();
    if engines.contains(&Engine::PppBaseline) {
        notes.push(
            "ppp_baseline: rank m is estimated only over cells holding at least m users; \
             an empty estimate means no such cell occurred. The mean pools all users of the \
             central cell. OMA uses the realized cell load for its time share."
                .to_string(),
        );
    }
    notes.push("analytic rows carry no ci95; montecarlo ci95 is a 95% normal half-width".into());

    Ok(ResultTable {
        rows: keyed.into_iter().map(|(_, r)| r).collect(),
        metadata: Metadata {
            name: spec.name.clone(),
            version: env!("CARGO_PKG_VERSION"),
            seed: spec.simulation.seed,
            trials: spec.simulation.trials,
            sweep_axis: spec.sweep.axis.as_str(),
            spec: spec.clone(),
            notes,
            errors,
        },
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the table as CSV. Wall times go in `runtime_ms` only when
/// `timing` is set, so that default output is reproducible byte for byte.
pub fn write_csv<W: Write>(table: &ResultTable, out: W, timing: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "sweep_axis",
        "sweep_value",
        "engine",
        "mode",
        "rank",
        "estimate",
        "ci95",
        "runtime_ms",
    ])?;
    for r in &table.rows {
        w.write_record([
            table.metadata.sweep_axis.to_string(),
            r.sweep_value.to_string(),
            r.engine.as_str().to_string(),
            r.mode.as_str().to_string(),
            r.rank.to_string(),
            fmt_opt(r.estimate),
            fmt_opt(r.ci95),
            if timing { format!("{:.3}", r.runtime_ms) } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}
