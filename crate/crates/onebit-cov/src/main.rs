//! Thin command-line front end over the experiment harnesses: each
//! subcommand loads a TOML config, applies the flag overrides, runs the
//! corresponding pipeline, and writes CSV outputs under --out.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use onebit_cov::config::ExperimentConfig;
use onebit_cov::error::Result;
use onebit_cov::experiments;
use onebit_cov::io;
use onebit_cov::process::sample_ensemble;
use onebit_cov::sampling::quantize;

#[derive(Parser)]
#[command(name = "onebit-cov", about = "Covariance recovery experiments for one-bit sampled data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV results
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the experiment seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the backend kind (pade|gl|mc|oracle)
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Override the ensemble-size list with a single value
    #[arg(long, global = true)]
    nx: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, quantize, and run the variance-recovery sweep (or dump the
    /// dataset when the config stages stop before "recover")
    Simulate,
    /// Full covariance recovery and the backend NMSE comparison table
    Recover,
    /// Cross-correlation recovery over the probe window
    Bussgang,
    /// Threshold-parameter MLE sweep
    ThresholdMle,
    /// Run every experiment and report per-stage wall times
    Bench,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| onebit_cov::Error::Config("--config PATH is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(backend) = &cli.backend {
        cfg.backend.kind = backend.clone();
    }
    if let Some(nx) = cli.nx {
        cfg.experiment.nx_list = vec![nx];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    if cfg.has_stage("recover") {
        let rec = experiments::run_variance_experiment(&cfg)?;
        let path = cli.out.join("variance_mse.csv");
        rec.write(&path)?;
        println!("wrote {}", path.display());
    } else {
        let model = cfg.process_model()?;
        let spec = cfg.threshold_spec()?;
        let nx = *cfg.experiment.nx_list.last().unwrap();
        let ensemble = sample_ensemble(&model, nx, cfg.experiment.seed)?;
        io::write_ensemble(&cli.out, &ensemble)?;
        println!("wrote {}", cli.out.join("samples.csv").display());
        if cfg.has_stage("quantize") {
            let data = quantize(&ensemble, spec, cfg.experiment.seed ^ 0x51_6e5)?;
            io::write_dataset(&cli.out, &data)?;
            println!("wrote {}", cli.out.join("signs.csv").display());
        }
    }
    Ok(())
}

fn recover(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let rec = experiments::run_covariance_experiment(&cfg)?;
    let path = cli.out.join("covariance_nmse.csv");
    rec.write(&path)?;
    println!("wrote {}", path.display());
    let t0 = std::time::Instant::now();
    let reports = experiments::run_single_recovery(&cfg, &cfg.backend.kind)?;
    if let Some(first) = reports.first() {
        let path = cli.out.join(format!("recovery_{}_run0.csv", first.backend));
        io::write_report(&path, first, t0.elapsed().as_secs_f64() * 1e3)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn bussgang(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let rec = experiments::run_bussgang_experiment(&cfg)?;
    let path = cli.out.join("bussgang_window.csv");
    rec.write(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn threshold_mle(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let rec = experiments::run_threshold_experiment(&cfg)?;
    let path = cli.out.join("threshold_nmse.csv");
    rec.write(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn bench(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    for (name, rec) in [
        ("variance_mse.csv", experiments::run_variance_experiment(&cfg)?),
        ("covariance_nmse.csv", experiments::run_covariance_experiment(&cfg)?),
        ("bussgang_window.csv", experiments::run_bussgang_experiment(&cfg)?),
        ("threshold_nmse.csv", experiments::run_threshold_experiment(&cfg)?),
    ] {
        let path = cli.out.join(name);
        rec.write(&path)?;
        for (stage, ms) in &rec.stage_wall_ms {
            println!("{name} {stage}: {ms:.1} ms");
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate => simulate(&cli),
        Command::Recover => recover(&cli),
        Command::Bussgang => bussgang(&cli),
        Command::ThresholdMle => threshold_mle(&cli),
        Command::Bench => bench(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = serde_json::json!({
                "error": err.to_string(),
                "kind": match &err {
                    onebit_cov::Error::Config(_) => "config",
                    onebit_cov::Error::Validation(_) => "validation",
                    onebit_cov::Error::Io(_) => "io",
                    _ => "numeric",
                },
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
