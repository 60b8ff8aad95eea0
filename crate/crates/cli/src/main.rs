//! `chargeq`: simulate, sweep and self-check the two-charge-qubit model.
//!
//! Every run command writes `<out>/data.csv` and `<out>/manifest.json`.
//! Exit status is 0 on success, 1 for oracle or validation failures and
//! 2 for runtime errors.

mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use commands::{CliError, RunKind};
use config::Config;
use manifest::{manifest_path, write_run, RunManifest};

#[derive(Parser)]
#[command(
    name = "chargeq",
    version,
    about = "Entanglement dynamics of two coupled charge qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the oracle suite and report pass/fail per oracle.
    Check(CheckArgs),
    /// Integrate one trajectory.
    Simulate(RunArgs),
    /// Sweep pulse amplitude and width on a grid.
    Sweep(SweepArgs),
    /// One trajectory per dephasing rate at a named point.
    DephasingStudy(RunArgs),
    /// Trajectories per noise amplitude and scope at a named point.
    NoiseStudy(NoiseStudyArgs),
    /// Repeat a recorded run from its manifest (file or run directory).
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the fully resolved configuration.
    PrintConfig(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON configuration file; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a leaf key, e.g. `--set model.J_ueV=300`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long = "j-ueV", value_name = "J")]
    j_uev: Option<f64>,
    #[arg(long = "jp-ueV", value_name = "JP")]
    jp_uev: Option<f64>,
    #[arg(long = "gamma-ueV", value_name = "GAMMA")]
    gamma_uev: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Named operating point: H, M or P.
    #[arg(long)]
    point: Option<String>,
    #[arg(long = "dephasing-ghz", value_name = "RATE")]
    dephasing_ghz: Option<f64>,
    /// Pulse shape (square, gaussian).
    #[arg(long, visible_alias = "shape")]
    pulse: Option<String>,
    /// Noise seed, or the base seed for sweeps.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `chargeq-out/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Worker threads; 1 runs serially.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct NoiseStudyArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Restrict to one scope: pulse_only or full_evolution.
    #[arg(long)]
    scope: Option<String>,
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn load_config(args: &ConfigArgs, mut flags: Vec<String>) -> Result<Config, CliError> {
    let base = match &args.config {
        Some(path) => config::load(path)?,
        None => Config::default(),
    };
    flags.extend(args.set.iter().cloned());
    Ok(base.with_overrides(&flags)?)
}

impl RunArgs {
    fn flag_overrides(&self, kind: RunKind) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(p) = &self.point {
            v.push(format!("point={}", json_string(p)));
        }
        if let Some(r) = self.dephasing_ghz {
            v.push(format!("dephasing_ghz={r}"));
        }
        if let Some(s) = &self.pulse {
            v.push(format!("pulse.shape={}", json_string(s)));
        }
        if let Some(seed) = self.seed {
            let key = if kind == RunKind::Sweep {
                "sweep.base_seed"
            } else {
                "noise.seed"
            };
            v.push(format!("{key}={seed}"));
        }
        v
    }
}

fn execute_and_write(kind: RunKind, cfg: Config, out: &Path) -> Result<(), CliError> {
    let start = Instant::now();
    let output = kind.execute(&cfg)?;
    let manifest = RunManifest::new(kind.name(), cfg, output.seeds, start.elapsed().as_secs_f64());
    write_run(out, &manifest, &output.csv).with_context(|| format!("writing {}", out.display()))?;
    for line in &output.summary {
        println!("{line}");
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn run_command(kind: RunKind, args: &RunArgs, extra: Vec<String>) -> Result<(), CliError> {
    let mut flags = args.flag_overrides(kind);
    flags.extend(extra);
    let mut cfg = load_config(&args.config, flags)?;
    kind.prepare(&mut cfg)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| Path::new("chargeq-out").join(kind.name()));
    execute_and_write(kind, cfg, &out)
}

fn rerun(path: &Path, out: &Path) -> Result<(), CliError> {
    let path = manifest_path(path);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let kind: RunKind = manifest.command.parse()?;
    let mut cfg = manifest.config;
    kind.prepare(&mut cfg)?;
    execute_and_write(kind, cfg, out)
}

fn check(args: &CheckArgs) -> Result<(), CliError> {
    let mut flags = Vec::new();
    for (key, value) in [
        ("model.J_ueV", args.j_uev),
        ("model.Jp_ueV", args.jp_uev),
        ("model.gamma_ueV", args.gamma_uev),
    ] {
        if let Some(v) = value {
            flags.push(format!("{key}={v}"));
        }
    }
    let cfg = load_config(&args.config, flags)?;
    let results = commands::check(&cfg);
    for r in &results {
        println!("[{}] {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    match results.iter().filter(|r| !r.pass).count() {
        0 => Ok(()),
        n => Err(CliError::OracleFailed(n)),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Check(args) => check(&args),
        Command::Simulate(args) => run_command(RunKind::Simulate, &args, Vec::new()),
        Command::DephasingStudy(args) => run_command(RunKind::DephasingStudy, &args, Vec::new()),
        Command::Sweep(args) => {
            let extra = args.workers.map(|w| format!("sweep.workers={w}")).into_iter().collect();
            run_command(RunKind::Sweep, &args.run, extra)
        }
        Command::NoiseStudy(args) => {
            let extra = args
                .scope
                .map(|s| format!("studies.noise_scopes=[{}]", json_string(&s.replace('-', "_"))))
                .into_iter()
                .collect();
            run_command(RunKind::NoiseStudy, &args.run, extra)
        }
        Command::Rerun { manifest, out } => rerun(&manifest, &out),
        Command::PrintConfig(args) => {
            let mut cfg = load_config(&args, Vec::new())?;
            cfg.resolve_point()?;
            println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
