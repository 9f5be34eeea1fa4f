use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lagfib_cli::commands;
use lagfib_cli::input::CliError;
use lagfib_cli::report::RunReport;

#[derive(Parser)]
#[command(name = "lagfib", about = "Torus fibrations from holomorphic potentials", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify positive definiteness of Im(theta) over the polydisk
    CheckDomain {
        spec: PathBuf,
        /// Samples per axis of the polar grid
        #[arg(long, default_value_t = 9)]
        grid: usize,
        /// Smallest acceptable Cholesky pivot
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Compute the cycle type of the fiber over a discriminant point
    Classify {
        spec: PathBuf,
        /// Point as comma-separated assignments, e.g. "z1=1/3"
        #[arg(long)]
        point: String,
        /// Use floating-point lattice search instead of the exact solver
        #[arg(long, default_value_t = false)]
        numeric: bool,
        /// Largest order the numeric search will consider
        #[arg(long, default_value_t = lagfib::cycle::DEFAULT_K_MAX)]
        k_max: u64,
        /// Residual tolerance for the numeric search
        #[arg(long, default_value_t = lagfib::cycle::DEFAULT_NUMERIC_TOL)]
        tol: f64,
    },
    /// Classify fibers over a family of discriminant points
    Scan {
        spec: PathBuf,
        /// "q<=N", "sqrt2:q<=N", or "list:v1;v2;..."
        #[arg(long)]
        grid_spec: String,
        /// Output table (.json for JSON, anything else for CSV)
        #[arg(long)]
        out: PathBuf,
    },
    /// Run structural checks on the glued fibration
    Verify {
        spec: PathBuf,
        /// Comma-separated subset of: charts, omega-glue, action-group-law,
        /// symplectic, polarization, closedness (default: all)
        #[arg(long)]
        checks: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random sample count for the numeric checks
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Sweep group elements with entries up to this bound
        #[arg(long, default_value_t = 3)]
        gamma_bound: i64,
    },
    /// Describe the singular fiber over a discriminant point
    Fiber {
        spec: PathBuf,
        #[arg(long)]
        point: String,
        /// Also write the description to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() {
    let Ok(raw) = std::env::var("LAGFIB_THREADS") else { return };
    match raw.trim().parse::<usize>() {
        Ok(k) if k > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                eprintln!("warning: could not apply LAGFIB_THREADS: {e}");
            }
        }
        _ => eprintln!("warning: ignoring unparseable LAGFIB_THREADS value {raw:?}"),
    }
}

fn run(cli: Cli) -> Result<RunReport, CliError> {
    match cli.command {
        Command::CheckDomain { spec, grid, tol } => commands::cmd_check_domain(&spec, grid, tol),
        Command::Classify { spec, point, numeric, k_max, tol } => {
            commands::cmd_classify(&spec, &point, numeric, k_max, tol)
        }
        Command::Scan { spec, grid_spec, out } => commands::cmd_scan(&spec, &grid_spec, &out),
        Command::Verify { spec, checks, seed, samples, gamma_bound } => {
            commands::cmd_verify(&spec, checks.as_deref(), seed, samples, gamma_bound)
        }
        Command::Fiber { spec, point, out } => commands::cmd_fiber(&spec, &point, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(report) => {
            println!("{}", report.to_json());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
