use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use b2bplan::cli;

#[derive(Parser)]
#[command(name = "b2bplan", version, about = "MVB2B converter planning: sizing, pairing, siting")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select the optimal converter size for two feeders
    Size {
        #[arg(long)]
        feeder1: PathBuf,
        #[arg(long)]
        feeder2: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// JSON report path; curves land next to it as <stem>_curves.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank feeder pairs by the load-profile standard-deviation criterion
    Pair {
        /// Directory of profile CSVs
        #[arg(long)]
        dir: PathBuf,
        /// Number of top pairs to keep
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// Also run the bundled 24-scenario validation study
        #[arg(long)]
        study: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Choose the converter connection bus on a feeder
    Site {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Per-bus objective CSV; a JSON summary lands next to it
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV export of the real-power sensitivity matrix
        #[arg(long)]
        vlsm_out: Option<PathBuf>,
    },
    /// Simulate the raw power transfer at one converter size
    Simulate {
        #[arg(long)]
        feeder1: PathBuf,
        #[arg(long)]
        feeder2: PathBuf,
        /// Converter size in kVA
        #[arg(long)]
        size: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    // Usage errors are exit code 1 by contract (clap would use 2, which is
    // reserved for uneconomic results); --help and --version stay 0.
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &args.command {
        Command::Size { feeder1, feeder2, config, out } => {
            cli::cmd_size(feeder1, feeder2, config.as_deref(), out)
        }
        Command::Pair { dir, top, study, config, out } => {
            cli::cmd_pair(dir, *top, *study, out, config.as_deref())
        }
        Command::Site { network, config, out, vlsm_out } => {
            cli::cmd_site(network, config.as_deref(), out, vlsm_out.as_deref())
        }
        Command::Simulate { feeder1, feeder2, size, config, out } => {
            cli::cmd_simulate(feeder1, feeder2, *size, config.as_deref(), out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code_for(&err) as u8)
        }
    }
}
