use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcp_noma_cli::{preset, run_experiment, write_csv, CliError, ExperimentSpec, Overrides};

/// Rate coverage of uplink NOMA in clustered cellular networks.
#[derive(Parser)]
#[command(name = "pcp-noma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file (or `preset:NAME`) and write CSV plus a JSON sidecar.
    Run {
        spec: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// CSV destination; `-` for stdout. Defaults to the file's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict to these engines (repeatable): analytic, montecarlo, ppp_baseline.
        #[arg(long = "engine")]
        engines: Vec<String>,
        /// Restrict to these modes (repeatable): perfect, imperfect, worst, oma.
        #[arg(long = "mode")]
        modes: Vec<String>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Fill the runtime_ms column (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Check an experiment file and list every problem found.
    Validate { spec: String },
    /// Print a shipped experiment file: fig3 fig4 fig5 fig6 fig7 fig8.
    Preset { name: String },
}

fn load(arg: &str) -> Result<ExperimentSpec, CliError> {
    if let Some(name) = arg.strip_prefix("preset:") {
        return Ok(preset(name)?.1);
    }
    let text = fs::read_to_string(arg).map_err(|source| CliError::Read {
        path: arg.to_string(),
        source,
    })?;
    ExperimentSpec::from_toml(&text)
}

fn sidecar_path(csv: &std::path::Path) -> PathBuf {
    let mut p = csv.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Preset { name } => {
            let (text, _) = preset(&name)?;
            print!("{text}");
            Ok(())
        }
        Command::Validate { spec } => {
            load(&spec)?.validate()?;
            println!("ok");
            Ok(())
        }
        Command::Run { spec, seed, trials, out, engines, modes, threads, timing } => {
            let mut s = load(&spec)?;
            s.apply(&Overrides { seed, trials, output: out, engines, modes });
            let table = match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .expect("thread pool")
                    .install(|| run_experiment(&s))?,
                None => run_experiment(&s)?,
            };
            let dest = s.output.clone().unwrap_or_else(|| PathBuf::from("-"));
            let write_err = |source: io::Error| CliError::Write {
                path: dest.display().to_string(),
                source,
            };
            if dest.as_os_str() == "-" {
                let stdout = io::stdout();
                write_csv(&table, stdout.lock(), timing).map_err(|e| write_err(e.into()))?;
            } else {
                let file = fs::File::create(&dest).map_err(write_err)?;
                write_csv(&table, file, timing).map_err(|e| write_err(e.into()))?;
                let meta = serde_json::to_string_pretty(&table.metadata).expect("metadata serializes");
                fs::write(sidecar_path(&dest), meta + "\n").map_err(write_err)?;
            }
            if !table.metadata.errors.is_empty() {
                for e in &table.metadata.errors {
                    let _ = writeln!(io::stderr(), "error [{}] {}", e.code, e.message);
                }
                return Err(CliError::Numerical(table.metadata.errors.len()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pcp-noma: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
