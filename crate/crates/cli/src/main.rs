use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use theta_maslov_cli::commands::{self, BackendChoice};
use theta_maslov_cli::{exit_code, InputError, Output};

#[derive(Parser)]
#[command(name = "theta-maslov", version, about = "Eigenvalue counts and Maslov indices for θ-periodic Schrödinger operators")]
struct Cli {
    /// JSON run configuration; defaults to the free scalar operator on [0, 2π].
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file for the command's data (stdout when absent). Plots go next
    /// to it with the extension `.svg`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configuration's integrator tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Both)]
    backend: BackendArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    CrossingForm,
    SpectralFlow,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of H_θ(t) below a cutoff.
    Spectrum {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        cutoff: f64,
    },
    /// Maslov index of the θ-edge at λ = r, or of the whole rectangle.
    Maslov {
        #[arg(long)]
        theta1: f64,
        #[arg(long)]
        theta2: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        closed: bool,
    },
    /// Runs a verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Band edges of the first k_max bands.
    Bands {
        #[arg(long, default_value_t = 5)]
        k_max: usize,
    },
    /// Eigenvalue branches λ_k(θ) with their slopes.
    Curves {
        /// Comma-separated branch indices, counted from 0.
        #[arg(long, default_value = "0,1")]
        k: String,
        #[arg(long, default_value_t = 40)]
        theta_steps: usize,
        #[arg(long, default_value_t = 0.1)]
        theta_min: f64,
        #[arg(long, default_value_t = std::f64::consts::PI - 0.1)]
        theta_max: f64,
    },
    /// Count and Morse-index identities along the rescaling t ∈ [τ, 1].
    Rescale {
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        r: f64,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("MASLOV_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| InputError(format!("MASLOV_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Output> {
    configure_threads()?;
    let backend = match cli.backend {
        BackendArg::CrossingForm => BackendChoice::CrossingForm,
        BackendArg::SpectralFlow => BackendChoice::SpectralFlow,
        BackendArg::Both => BackendChoice::Both,
    };
    let s = commands::settings(cli.config.as_deref(), cli.out, cli.seed, cli.tol, backend)?;
    match cli.command {
        Command::Spectrum { theta, t, cutoff } => commands::spectrum(&s, theta, t, cutoff),
        Command::Maslov { theta1, theta2, r, closed } => commands::maslov(&s, theta1, theta2, r, closed),
        Command::Verify { suite } => commands::verify(&s, &suite),
        Command::Bands { k_max } => commands::bands_cmd(&s, k_max),
        Command::Curves { k, theta_steps, theta_min, theta_max } => {
            commands::curves(&s, &commands::parse_branches(&k)?, theta_steps, (theta_min, theta_max))
        }
        Command::Rescale { tau, theta, r } => commands::rescale(&s, tau, theta, r),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(cli).and_then(|out| {
        out.write_files()?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
