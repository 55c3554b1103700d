//! `scatterlab`: synthesis, forward scattering, resolvent probes, strength
//! reconstruction, ergodic statistics, and the stability experiment.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure
//! (non-convergence or divergent regime). `SCATTERLAB_THREADS` overrides
//! the worker-pool size; outputs are byte-identical for any pool size.

use clap::{Parser, Subcommand, ValueEnum};
use scatterlab_core::dataset::SweepMethod;
use scatterlab_core::pipeline;
use scatterlab_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "scatterlab", version, about = "random-potential scattering laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Krylov,
    Born,
    Born0,
}

impl From<MethodArg> for SweepMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Krylov => SweepMethod::Krylov,
            MethodArg::Born => SweepMethod::Born,
            MethodArg::Born0 => SweepMethod::Born0,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one potential realization from a config file.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Backscatter sweep of a stored potential over a frequency band.
    Forward {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        kmin: f64,
        #[arg(long)]
        kmax: f64,
        #[arg(long)]
        nk: usize,
        #[arg(long)]
        ndir: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Krylov)]
        method: MethodArg,
        #[arg(long, default_value_t = 2)]
        born_terms: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resolvent norm estimates over a complex frequency list.
    Resolvent {
        #[arg(long)]
        grid_n: usize,
        #[arg(long = "L")]
        l: f64,
        /// Cutoff ball radius; defaults to 0.45 * L.
        #[arg(long)]
        chi_radius: Option<f64>,
        #[arg(long)]
        lambda_list: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Strength reconstruction from a far-field dataset.
    Reconstruct {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        data2: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        ntau: usize,
        #[arg(long, default_value_t = 16)]
        ntheta: usize,
        #[arg(long)]
        out_prefix: String,
    },
    /// Ergodic band statistics and exceedance over a dataset ensemble.
    Ergodic {
        #[arg(long)]
        ensemble_dir: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.25)]
        tau: f64,
        #[arg(long, default_value_t = 0)]
        dir_index: usize,
        /// Comma-separated thresholds, e.g. 4,8,16.
        #[arg(long, value_delimiter = ',')]
        ktilde_list: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stability experiment from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output prefix; defaults to the config path without extension.
        #[arg(long)]
        out_prefix: Option<String>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonConvergence(..) | Error::BornDivergent(_) | Error::NotApplicable(_) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synth { config, seed, out } => pipeline::run_synth(&config, seed, &out),
        Command::Forward {
            potential,
            kmin,
            kmax,
            nk,
            ndir,
            tol,
            method,
            born_terms,
            out,
        } => pipeline::run_forward(
            &potential,
            kmin,
            kmax,
            nk,
            ndir,
            tol,
            method.into(),
            born_terms,
            &out,
        ),
        Command::Resolvent {
            grid_n,
            l,
            chi_radius,
            lambda_list,
            out,
        } => pipeline::run_resolvent(
            grid_n,
            l,
            chi_radius.unwrap_or(0.45 * l),
            &lambda_list,
            &out,
        ),
        Command::Reconstruct {
            data,
            data2,
            ntau,
            ntheta,
            out_prefix,
        } => pipeline::run_reconstruct(&data, data2.as_deref(), ntau, ntheta, &out_prefix),
        Command::Ergodic {
            ensemble_dir,
            eps,
            tau,
            dir_index,
            ktilde_list,
            out,
        } => pipeline::run_ergodic(&ensemble_dir, eps, tau, dir_index, &ktilde_list, &out),
        Command::Experiment { config, out_prefix } => {
            let prefix = out_prefix.unwrap_or_else(|| {
                config
                    .with_extension("")
                    .to_string_lossy()
                    .into_owned()
            });
            pipeline::run_experiment(&config, &prefix)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders usage/help; version and help requests exit 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = std::env::var("SCATTERLAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok());
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("scatterlab: thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scatterlab: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
