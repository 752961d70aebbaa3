//! Command-line driver for hybrid precoding campaigns.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 when the campaign
//! or writing its results fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use alphahp::bb_stage::FairnessSpec;
use alphahp::harness::{emit_results, read_config, run_campaign, HarnessError, SystemConfig};
use alphahp::optimizers::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "simulate", version, about = "Run a seeded Monte-Carlo hybrid precoding campaign")]
struct Args {
    /// JSON configuration file; omitted fields take their defaults.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving records.csv, traces.csv and summary.json.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of realizations override.
    #[arg(long)]
    realizations: Option<usize>,
    /// Comma-separated algorithms (pso, gwo, aco, cs, fa).
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    /// Comma-separated fairness levels: alpha values or `maxmin`.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<FairnessSpec>>,
    /// Comma-separated transmit powers in dBm.
    #[arg(long = "pt-dbm", value_delimiter = ',', allow_hyphen_values = true)]
    pt_dbm: Option<Vec<f64>>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
}

fn configure(args: &Args) -> Result<SystemConfig, HarnessError> {
    let mut cfg = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = args.realizations {
        cfg.n_realizations = n;
    }
    if let Some(a) = &args.algorithms {
        cfg.algorithms = a.clone();
    }
    if let Some(f) = &args.alpha {
        cfg.fairness = f.clone();
    }
    if let Some(p) = &args.pt_dbm {
        cfg.p_t_dbm = p.clone();
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<(), HarnessError> {
    let cfg = configure(args)?;
    let result = run_campaign(&cfg)?;
    emit_results(&result, &args.out)?;
    for a in &result.aggregates {
        println!(
            "p_t={} dBm  {:<8}  fairness={:<6}  sum_rate={:.4} ± {:.4}  jain={:.4}  ee={:.4}",
            a.p_t_dbm, a.method, a.fairness, a.sum_rate.mean, a.sum_rate.se, a.jain.mean, a.energy_efficiency.mean
        );
    }
    if !result.failures.is_empty() {
        eprintln!("{} realization(s) failed and were skipped", result.failures.len());
    }
    println!("wrote {} records to {}", result.records.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
