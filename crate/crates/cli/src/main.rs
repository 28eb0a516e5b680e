use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rdnet_cli::{
    cmd_analyze, cmd_equilibrium, cmd_ladder, cmd_report, cmd_simulate, configure_threads, AnalyzeArgs, CliError,
    EquilibriumArgs, EXIT_ERROR,
};
use rdnet_core::structural::AnalyzeOptions;

/// Structural analysis and simulation of mass-action reaction-diffusion systems.
///
/// Exit codes: 0 success (or hypotheses verified), 2 hypotheses not
/// verified, 1 error. RDNET_THREADS caps the worker count.
#[derive(Parser)]
#[command(name = "rdnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural hypotheses of a network file.
    Analyze {
        network: PathBuf,
        /// Spatial dimension the verdict refers to.
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 4)]
        r_max: u32,
        /// Dual exponent for the quasi-uniform criterion, in (1, 2].
        #[arg(long, default_value_t = 2.0)]
        p_prime: f64,
        /// Lower-bound estimate of the maximal-regularity constant.
        #[arg(long)]
        c_estimate: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        entropy_samples: usize,
        /// Also write the key = value report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulation config and write trace, snapshots and summary.
    Simulate {
        config: PathBuf,
        /// Override the output directory of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Positive equilibrium on the class fixed by the conserved totals.
    Equilibrium {
        /// A run config or a .crn file.
        input: PathBuf,
        /// Comma-separated conserved totals (spatial means).
        #[arg(long, value_delimiter = ',')]
        totals: Option<Vec<f64>>,
    },
    /// Bootstrap exponent sequence, printed as CSV.
    Ladder {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: f64,
        /// Starting exponent; defaults to the threshold plus 0.1.
        #[arg(long)]
        p0: Option<f64>,
    },
    /// Merge a run directory's outputs into report.txt.
    Report { dir: PathBuf },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Analyze {
            network,
            n,
            r_max,
            p_prime,
            c_estimate,
            entropy_samples,
            out: path,
        } => {
            let opts = AnalyzeOptions {
                n,
                r_max,
                p_prime,
                c_estimate,
                entropy_samples,
                ..AnalyzeOptions::default()
            };
            cmd_analyze(&AnalyzeArgs { file: network, opts, out: path }, &mut out)
        }
        Command::Simulate { config, out: dir } => cmd_simulate(&config, dir, &mut out),
        Command::Equilibrium { input, totals } => cmd_equilibrium(&EquilibriumArgs { input, totals }, &mut out),
        Command::Ladder { n, r, p0 } => cmd_ladder(n, r, p0, &mut out),
        Command::Report { dir } => cmd_report(&dir, &mut out),
    }
}

fn main() -> ExitCode {
    // clap's own usage errors would exit with 2, which is reserved
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
