//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed (validation violations, oracle
//! disagreement, scaling claim not met, protocol error), 2 bad
//! configuration or usage.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use simgate_core::config::{resolve_config_path, ExperimentConfig};
use simgate_core::error::Error;
use simgate_core::experiments::{self, ScalingRegistry};
use simgate_core::results::{write_results, ResultRecord};

#[derive(Parser, Debug)]
#[command(name = "simgate", version, about = "Optical-lattice photonic phase gate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Config file, or a name looked up as configs/<name>.toml.
    #[arg(long, short)]
    config: Option<String>,
    /// Overrides [run] seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides [run] trajectories.
    #[arg(long)]
    trajectories: Option<usize>,
    /// Overrides [run] output (CSV; a .jsonl mirror is written alongside).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the effective config in canonical form before running.
    #[arg(long)]
    print_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract the effective gate and write a result record.
    Gate(Common),
    /// Run initialization and summarize the final occupancy.
    Init(Common),
    /// One trajectory run per value of the [sweep] parameter.
    NoiseSweep(Common),
    /// Size sweep with a fitted scaling law.
    Scaling {
        #[command(flatten)]
        common: Common,
        /// Overrides [scaling] experiment.
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Dry-run the schedules and report geometric violations.
    Validate(Common),
    /// Compare the engine with the enumeration oracle on random cases.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Overrides [tolerance] oracle_cases.
        #[arg(long)]
        cases: Option<usize>,
    },
}

/// Directories searched for `--config <name>`: `SIMGATE_CONFIG_DIR`,
/// `./configs`, then the repository's configs directory.
fn config_dirs() -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    if let Ok(d) = std::env::var("SIMGATE_CONFIG_DIR") {
        dirs.push(PathBuf::from(d));
    }
    dirs.push(PathBuf::from("configs"));
    dirs.push(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs"));
    dirs
}

enum Failure {
    Check,
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } | Error::Format { .. } | Error::Setup(_) | Error::InvalidConfiguration(_) => {
                Failure::Config(e.to_string())
            }
            e => Failure::Runtime(e.to_string()),
        }
    }
}

fn load(common: &Common, out: &mut dyn Write) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(name) => ExperimentConfig::load(&resolve_config_path(name, &config_dirs())?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = common.trajectories {
        if t == 0 {
            return Err(Failure::Config("--trajectories must be at least 1".into()));
        }
        cfg.run.trajectories = t;
    }
    if let Some(o) = &common.output {
        cfg.run.output = Some(o.display().to_string());
    }
    if common.print_config {
        let _ = write!(out, "{}", cfg.to_toml());
        let _ = writeln!(out, "# config hash {}", cfg.hash());
    }
    Ok(cfg)
}

fn persist(cfg: &ExperimentConfig, records: &[ResultRecord], out: &mut dyn Write) -> Result<(), Failure> {
    if let Some(path) = &cfg.run.output {
        write_results(records, path.as_ref())?;
        let _ = writeln!(out, "wrote {} record(s) to {path}", records.len());
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Gate(c) => {
            let cfg = load(&c, out)?;
            let o = experiments::gate(&cfg)?;
            let _ = write!(out, "{o}");
            persist(&cfg, &[o.record], out)
        }
        Command::Init(c) => {
            let cfg = load(&c, out)?;
            let o = experiments::init(&cfg)?;
            let _ = writeln!(out, "{o}");
            Ok(())
        }
        Command::NoiseSweep(c) => {
            let cfg = load(&c, out)?;
            let points = experiments::noise_sweep(&cfg)?;
            let name = cfg.sweep.as_ref().map(|s| s.parameter.clone()).unwrap_or_default();
            for p in &points {
                let s = &p.stats;
                let _ = writeln!(
                    out,
                    "{name} = {:e}: fidelity {:.9} ± {:.9}, leakage {:.3e}, {} failed",
                    p.value, s.fidelity_mean, s.fidelity_stderr, s.leakage_mean, s.failed
                );
            }
            let records: Vec<_> = points.into_iter().map(|p| p.record).collect();
            persist(&cfg, &records, out)
        }
        Command::Scaling { common, experiment } => {
            let mut cfg = load(&common, out)?;
            if let Some(e) = experiment {
                cfg.scaling.get_or_insert_with(Default::default).experiment = e;
            }
            let o = experiments::scaling(&cfg, &ScalingRegistry::builtin())?;
            let _ = writeln!(out, "{o}");
            persist(&cfg, &o.records, out)?;
            if o.check.passed {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Validate(c) => {
            let cfg = load(&c, out)?;
            let o = experiments::validate(&cfg)?;
            let _ = writeln!(out, "{o}");
            if o.passed() {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::OracleCheck { common, cases } => {
            let cfg = load(&common, out)?;
            let n = cases.unwrap_or(cfg.tolerance.oracle_cases);
            let s = experiments::oracle_check(n, cfg.run.seed, cfg.tolerance.oracle);
            let _ = writeln!(out, "{s}");
            if s.passed() {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

/// Runs one invocation; `argv[0]` is the program name. Normal output goes
/// to `out`, diagnostics to `err`. Returns the process exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Config(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}
