use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gencomp_core::experiments::{
    bound_report, diagnose, open_output, oversampled_m, run_certificate_audit, run_edg_demo,
    run_phase_transition, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "gencomp", version, about = "Low-rank completion experiments in general matrix bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Any config key, e.g. --set family=edg (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Recovery success over an (n, r, m) grid
    Phase,
    /// Gram recovery from sampled squared distances
    Edg {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        /// Absolute sample count; defaults to 6·n·r·⌈ln n⌉²
        #[arg(long)]
        m: Option<usize>,
    },
    /// Golfing certificate conditions against the analytic failure bound
    Audit,
    /// Correlation, Gram spectrum and coherence of a planted truth
    Diagnose,
    /// Sample bound and failure probabilities
    Bound,
}

fn load_config(common: &Common) -> Result<ExperimentConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim()).map_err(|e| e.to_string())?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(beta) = common.beta {
        cfg.beta = beta;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), String> {
    let cfg = load_config(&cli.common)?;
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(open_output(path).map_err(|e| format!("{}: {e}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let text = match cli.command {
        Command::Phase => run_phase_transition(&cfg),
        Command::Edg { n, r, m } => {
            let n = n.unwrap_or(cfg.n[0]);
            let r = r.unwrap_or(cfg.r[0]);
            let m = m
                .or_else(|| cfg.m.first().copied())
                .unwrap_or_else(|| oversampled_m(cfg.oversample.first().copied().unwrap_or(6.0), n, r));
            run_edg_demo(n, r, m, &cfg).map(|d| d.csv)
        }
        Command::Audit => run_certificate_audit(&cfg).map(|a| a.csv),
        Command::Diagnose => diagnose(&cfg),
        Command::Bound => bound_report(&cfg),
    }
    .map_err(|e| e.to_string())?;
    sink.write_all(text.as_bytes())
        .and_then(|()| sink.flush())
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gencomp: {e}");
            ExitCode::FAILURE
        }
    }
}
