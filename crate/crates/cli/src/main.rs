//! `copolab`: command-line harness for the copolymer experiments.

mod commands;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::config::{ConfigFile, RunConfig};
use crate::run::RunDir;

pub const EXIT_IO: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_FAILED: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    GenDisorder,
    Partition,
    Spectrum,
    FreeEnergy,
    CriticalPoint,
    SlopeOrigin,
    CheckDelocTail,
    CheckLastExit,
    CheckConcentration,
    CheckInterpolation,
    CheckStretch,
    CheckMeander,
    CheckAnnealed,
    SamplePaths,
    OracleVerify,
}

impl Command {
    pub const ALL: [Command; 15] = [
        Command::GenDisorder,
        Command::Partition,
        Command::Spectrum,
        Command::FreeEnergy,
        Command::CriticalPoint,
        Command::SlopeOrigin,
        Command::CheckDelocTail,
        Command::CheckLastExit,
        Command::CheckConcentration,
        Command::CheckInterpolation,
        Command::CheckStretch,
        Command::CheckMeander,
        Command::CheckAnnealed,
        Command::SamplePaths,
        Command::OracleVerify,
    ];

    pub fn name(self) -> &'static str {
        use Command::*;
        match self {
            GenDisorder => "gen-disorder",
            Partition => "partition",
            Spectrum => "spectrum",
            FreeEnergy => "free-energy",
            CriticalPoint => "critical-point",
            SlopeOrigin => "slope-origin",
            CheckDelocTail => "check-deloc-tail",
            CheckLastExit => "check-last-exit",
            CheckConcentration => "check-concentration",
            CheckInterpolation => "check-interpolation",
            CheckStretch => "check-stretch",
            CheckMeander => "check-meander",
            CheckAnnealed => "check-annealed",
            SamplePaths => "sample-paths",
            OracleVerify => "oracle-verify",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Parser, Debug)]
#[command(name = "copolab", version, about = "Random copolymer experiments", after_help = config::defaults_help())]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Config file (`key = value`, optional `[command]` sections).
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    h: Option<String>,
    /// Chain length N.
    #[arg(long, short)]
    n: Option<String>,
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output root; a fresh run directory is created inside it.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    m_grid: Option<String>,
    #[arg(long)]
    ell_grid: Option<String>,
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Any other key, repeatable: `--set tol=0.02`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Cli {
    fn overrides(&self) -> Result<Vec<(String, String)>, String> {
        let mut out: Vec<(String, String)> = [
            ("lambda", &self.lambda),
            ("h", &self.h),
            ("n", &self.n),
            ("law", &self.law),
            ("endpoint", &self.endpoint),
            ("variant", &self.variant),
            ("replicas", &self.replicas),
            ("seed", &self.seed),
            ("out", &self.out),
            ("workers", &self.workers),
            ("n_grid", &self.n_grid),
            ("m_grid", &self.m_grid),
            ("ell_grid", &self.ell_grid),
            ("lambda_grid", &self.lambda_grid),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect();
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }
}

fn exit_code(e: &copolymer::Error) -> u8 {
    use copolymer::Error::*;
    match e {
        InvalidArgument { .. } | Format(_) => EXIT_INVALID,
        BudgetExceeded { .. } | NeedsMoreDisorder { .. } => EXIT_BUDGET,
        EstimationFailed(_) => EXIT_FAILED,
        Io(_) | Csv(_) | Json(_) => EXIT_IO,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("copolab: config error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let overrides = match cli.overrides() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("copolab: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let env_out = std::env::var_os("COPOLAB_OUT").map(PathBuf::from);
    let cfg = match RunConfig::resolve(cli.command, file.as_ref(), &overrides, env_out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("copolab: config error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Err(e) = cfg.params() {
        eprintln!("copolab: config error: {e}");
        return ExitCode::from(EXIT_INVALID);
    }
    if cfg.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global() {
            eprintln!("copolab: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    let mut dir = match RunDir::create(&cfg) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("copolab: cannot create run directory under {}: {e}", cfg.out.display());
            return ExitCode::from(EXIT_IO);
        }
    };
    let path = dir.path.clone();
    let outcome = commands::execute(cli.command, &cfg, &mut dir);
    let status = run::overall_status(dir.records());
    let error = outcome.as_ref().err().map(ToString::to_string);
    if let Err(e) = dir.finish(&cfg, error.clone()) {
        eprintln!("copolab: cannot write outputs in {}: {e}", path.display());
        return ExitCode::from(EXIT_IO);
    }
    println!("{}", path.display());
    match outcome {
        Err(e) => {
            eprintln!("copolab: {}: {e}", cli.command.name());
            ExitCode::from(exit_code(&e))
        }
        Ok(()) => {
            eprintln!("copolab: {}: {status}", cli.command.name());
            if matches!(status, "failed" | "inconclusive") {
                ExitCode::from(EXIT_FAILED)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
