use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use trajdim::config::ExperimentConfig;
use trajdim::experiments::{run_classical, run_id_time, run_id_traj, run_oracle_check, run_spectrum, ORACLE_Z_LIMIT};

#[derive(Debug, Parser)]
#[command(name = "trajdim", version, about = "Quantum-jump trajectory ensembles, their intrinsic dimension and Lindblad spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Intrinsic dimension of fixed-time ensembles, with late-time summary.
    IdTime(Common),
    /// Intrinsic dimension along single trajectories.
    IdTraj(Common),
    /// Complex spacing ratios and spacings of the Floquet map or generator.
    Spectrum(Common),
    /// Orbits of the large-spin classical limit.
    Classical(Common),
    /// Trajectory averages against the master equation.
    OracleCheck(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory for the CSV files.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Replaces trajectory.seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        if let Some(n) = self.threads {
            if n == 0 {
                bail!("--threads must be at least 1");
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
        }
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            match cfg.trajectory.as_mut() {
                Some(t) => t.seed = seed,
                None => bail!("--seed given but the configuration has no [trajectory] block"),
            }
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::IdTime(c) => {
            let cfg = c.load()?;
            for p in run_id_time(&cfg, Some(&c.out))? {
                println!("{}: Id = {:.4} ± {:.4}", label(p.point), p.id_mean, p.id_std);
            }
        }
        Command::IdTraj(c) => {
            let cfg = c.load()?;
            for p in run_id_traj(&cfg, Some(&c.out))? {
                println!(
                    "{} Δt = {}: Id' = {:.4} ± {:.4} ({} of {} Pareto)",
                    label(p.point),
                    p.delta_t,
                    p.id_mean,
                    p.id_sem,
                    p.n_pareto,
                    p.trajectories.len()
                );
            }
        }
        Command::Spectrum(c) => {
            let cfg = c.load()?;
            for p in run_spectrum(&cfg, Some(&c.out))? {
                println!("{}: <cos θ> = {:.4} over {} ratios", label(p.point), p.mean_cos_theta, p.ratios.ratios.len());
            }
        }
        Command::Classical(c) => {
            let cfg = c.load()?;
            let orbits = run_classical(&cfg, Some(&c.out))?;
            let worst = orbits.iter().fold(0.0f64, |m, o| m.max(o.max_norm_drift));
            println!("{} orbits, max |Δ|m|²| = {worst:.3e}", orbits.len());
        }
        Command::OracleCheck(c) => {
            let cfg = c.load()?;
            let report = run_oracle_check(&cfg, Some(&c.out))?;
            println!("max z = {:.3} (limit {ORACLE_Z_LIMIT})", report.max_z);
            if !report.passed() {
                eprintln!("oracle check failed");
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn label(point: trajdim::experiments::SweepPoint) -> String {
    match point {
        Some((param, v)) => format!("{} = {v}", param.name()),
        None => "run".to_string(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
