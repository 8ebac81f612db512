use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcorr::kclassical::DEFAULT_TOL;
use qcorr::{io, MeasurementClass, OptimizerConfig};
use qcorr_cli::suites::{self, Suite};
use qcorr_cli::{canon, commands, fixtures};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "qcorr", version, about = "Quantum correlation measures, K-classicality and restricted LOCC gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Optimizer restarts.
    #[arg(long, global = true, default_value_t = 20)]
    restarts: usize,
    /// Optimizer stopping tolerance (spread of simplex values).
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also search rank-1 POVMs for the classical correlation.
    #[arg(long, global = true)]
    povm: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy, mutual information, classical correlation and discord of a state.
    Measure {
        #[arg(long)]
        state: PathBuf,
    },
    /// Decide K-classicality for a measurement class.
    Kclassical {
        #[arg(long)]
        state: PathBuf,
        /// rank1 | rankr:R | minout:N | all
        #[arg(long, default_value = "all")]
        class: MeasurementClass,
        /// Largest mutual-information drop accepted as preserved.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        drop_tol: f64,
    },
    /// Run a seeded randomized suite.
    Suite {
        /// theorem1 | petz | equivalence
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Directory for counterexample dumps.
        #[arg(long, default_value = "qcorr-counterexamples")]
        dump: PathBuf,
    },
    /// Check whether a restricted gate needs entanglement.
    Probe {
        #[arg(long)]
        gate: PathBuf,
    },
    /// Evolve a noisy product family through a gate sequence.
    Nmr {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5")]
        levels: Vec<f64>,
    },
    /// Write the golden fixture files.
    Fixtures {
        /// Defaults to the fixture directory.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

enum Failure {
    Suite,
    Input(String),
}

impl From<qcorr::Error> for Failure {
    fn from(e: qcorr::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn emit(report: &Value, common: &Common) -> Result<(), Failure> {
    let text = match common.format {
        Format::Json => canon::to_json(report),
        Format::Csv => canon::to_csv(report),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(format!("Io: {e}")))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn witness_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.witness.json"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    if let Some(jobs) = c.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Failure::Input(format!("InvalidInput: {e}")))?;
    }
    let opt = OptimizerConfig { restarts: c.restarts, tol: c.tol, seed: c.seed, povm: c.povm, ..Default::default() };
    match &cli.command {
        Command::Measure { state } => {
            let rho = io::read_state(&fixtures::resolve(state))?;
            emit(&commands::measure(&rho, &opt), c)
        }
        Command::Kclassical { state, class, drop_tol } => {
            let rho = io::read_state(&fixtures::resolve(state))?;
            let (mut report, witness) = commands::kclassical(&rho, *class, *drop_tol, &opt);
            if let (Some(w), Some(out)) = (witness, &c.out) {
                let path = witness_path(out);
                io::write_instrument(&path, &w)?;
                report["witness_file"] = Value::String(path.display().to_string());
            }
            emit(&report, c)
        }
        Command::Suite { suite, trials, dump } => {
            let suite = *suite;
            let run = suites::run_suite(suite, *trials, c.seed, &opt)?;
            emit(&run.report, c)?;
            if !run.passed {
                suites::dump_counterexamples(dump, suite, &run.counterexamples)?;
                eprintln!("{} counterexamples written to {}", run.counterexamples.len(), dump.display());
                return Err(Failure::Suite);
            }
            Ok(())
        }
        Command::Probe { gate } => {
            let gate = io::read_gate(&fixtures::resolve(gate))?;
            emit(&commands::probe(&gate, &opt), c)
        }
        Command::Nmr { state, sequence, levels } => {
            let rho0 = io::read_state(&fixtures::resolve(state))?;
            let gates = io::read_sequence(&fixtures::resolve(sequence))?;
            emit(&commands::nmr(&rho0, &gates, levels, &opt)?, c)
        }
        Command::Fixtures { dir } => {
            let dir = dir.clone().unwrap_or_else(fixtures::fixture_dir);
            for name in fixtures::write_all(&dir)? {
                println!("{}", dir.join(name).display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Suite) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
