use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use netsync::cli::{
    cmd_bound, cmd_certify, cmd_graph_info, cmd_simulate, cmd_sweep, exit_code, BatchSpec, ExperimentConfig,
    SweepParameter,
};
use netsync::Error;

#[derive(Parser)]
#[command(
    name = "netsync",
    version,
    about = "Simulate and certify synchronization of heterogeneous oscillator networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for every sampling step.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps and batches.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the network and write trajectory CSV, summary JSON and an e_tot plot.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Compute the critical gains c* and c_d* and write certificate.json.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Ball radius r (defaults to certify.radius in the config).
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Run one simulation per value of c or c_d and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: SweepParameter,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Estimate the ultimate bound r from a batch of initial conditions; writes bound.json.
    Bound {
        #[command(flatten)]
        common: Common,
        /// Sphere radii for the initial-condition batch.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0])]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        per_radius: usize,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.5)]
        tail_fraction: f64,
    },
    /// Print λ₂, minimum density and connectivity of G and G_d.
    GraphInfo {
        #[command(flatten)]
        common: Common,
    },
}

fn run(command: Command) -> Result<(), Error> {
    let started = Instant::now();
    let load = |c: &Common| ExperimentConfig::load(&c.config);
    match command {
        Command::Simulate { common } => {
            let cfg = load(&common)?;
            let outcome = cmd_simulate(&cfg, &common.out)?;
            let sync = outcome.summary.sync;
            println!(
                "terminal e_tot = {:.6}, synchronized = {}, runtime = {:.2}s",
                sync.terminal_e_tot,
                sync.synchronized,
                started.elapsed().as_secs_f64()
            );
            println!("wrote {}, {}, {}", outcome.csv.display(), outcome.summary_path.display(), outcome.plot.display());
        }
        Command::Certify { common, radius } => {
            let cfg = load(&common)?;
            let radius = radius.or(cfg.certify.radius).ok_or_else(|| Error::Config {
                path: "certify.radius".into(),
                message: "no radius given (use --radius)".into(),
            })?;
            let cert = cmd_certify(&cfg, radius, common.seed, &common.out)?;
            println!("c* = {:.4}, c_d* = {:.4}", cert.c_star, cert.c_d_star);
        }
        Command::Sweep { common, param, values } => {
            let cfg = load(&common)?;
            for row in cmd_sweep(&cfg, param, &values, common.workers, &common.out)? {
                match (row.terminal_e_tot, row.synchronized, row.error) {
                    (Some(e), Some(s), _) => println!("{} -> e_tot = {e:.6}, synchronized = {s}", row.value),
                    (_, _, err) => println!("{} -> error: {}", row.value, err.unwrap_or_default()),
                }
            }
        }
        Command::Bound { common, radii, per_radius, t_end, tail_fraction } => {
            let cfg = load(&common)?;
            let batch = BatchSpec { radii, per_radius, t_end, tail_fraction };
            let est = cmd_bound(&cfg, &batch, common.seed, common.workers, &common.out)?;
            println!("r = {:.4} over {} initial conditions", est.radius, est.ic_batch);
        }
        Command::GraphInfo { common } => {
            let cfg = load(&common)?;
            let report = cmd_graph_info(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
