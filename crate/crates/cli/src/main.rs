//! `vista`: validate, evaluate and compare ViSTA result traces, and generate
//! synthetic runs.

mod commands;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vista_core::model::VehicleClass;
use vista_core::parse::AxisOrder;

/// Exit status shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    /// Evaluation or validation failure.
    Fail = 1,
    /// Operational error: bad input, I/O, usage.
    Error = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutHint {
    Auto,
    Flat,
    Distributed,
}

#[derive(Debug, Parser)]
#[command(name = "vista", version, about = "Virtual test result validation and evaluation")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Result layout of the inputs or outputs.
    #[arg(long, value_enum, default_value = "auto", env = "VISTA_LAYOUT", global = true)]
    pub layout: LayoutHint,

    /// Component order of WGS84 position arrays.
    #[arg(long, default_value = "lat_lon", env = "VISTA_AXIS_ORDER", global = true)]
    pub axis_order: AxisOrder,

    /// Worker threads for per-run work; 0 picks one per core.
    #[arg(long, default_value_t = 0, env = "VISTA_JOBS", global = true)]
    pub jobs: usize,

    /// Directory for reports and generated files.
    #[arg(long, env = "VISTA_OUT", global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check format and integrity of result files and run sets.
    Validate {
        /// Flat files, run folders, or directories holding them.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Lowest acceptable logging rate, Hz.
        #[arg(long, default_value_t = 10.0, env = "VISTA_F_MIN")]
        f_min: f64,
        /// Distinct runs each test case needs.
        #[arg(long, default_value_t = 1, env = "VISTA_N_REQUIRED")]
        n_required: usize,
    },
    /// Apply the safety rules to run sets and report verdicts.
    Evaluate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// TOML file with threshold overrides.
        #[arg(long, env = "VISTA_RULES")]
        rules: Option<PathBuf>,
        #[arg(long, default_value_t = 10.0, env = "VISTA_F_MIN")]
        f_min: f64,
        #[arg(long, default_value_t = 1, env = "VISTA_N_REQUIRED")]
        n_required: usize,
        #[arg(long, default_value = "class3", env = "VISTA_VUT_CLASS")]
        vut_class: VehicleClass,
        /// Overrides the class length, meters.
        #[arg(long, env = "VISTA_VUT_LENGTH")]
        vut_length: Option<f64>,
        /// Overrides the class width, meters.
        #[arg(long, env = "VISTA_VUT_WIDTH")]
        vut_width: Option<f64>,
    },
    /// Compare a virtual run against a reference (physical) run.
    Fidelity {
        virtual_run: PathBuf,
        reference_run: PathBuf,
        /// TOML file with RMSE tolerances.
        #[arg(long, env = "VISTA_TOLERANCES")]
        tolerances: Option<PathBuf>,
    },
    /// Write synthetic overtaking runs.
    Generate {
        /// case1, case2, case3 or all.
        #[arg(long, default_value = "all")]
        case: String,
        /// TOML scenario file.
        #[arg(long, env = "VISTA_SPEC")]
        spec: Option<PathBuf>,
        /// Runs per case; overrides the scenario file.
        #[arg(long)]
        runs: Option<u32>,
        #[arg(long, env = "VISTA_SEED")]
        seed: Option<u64>,
    },
    /// Pick the test cases to recalibrate against physical runs.
    Subset {
        #[arg(required = true)]
        ids: Vec<String>,
        #[arg(long, default_value_t = 0.20)]
        fraction: f64,
        #[arg(long, default_value_t = 0, env = "VISTA_SEED")]
        seed: u64,
    },
    /// Print the column table.
    Schema,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("VISTA_LOG")
        .format_timestamp(None)
        .init();
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let common = &cli.common;
    if common.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.jobs)
            .build_global()?;
    }
    match cli.command {
        Command::Validate {
            paths,
            f_min,
            n_required,
        } => commands::validate(common, &paths, f_min, n_required),
        Command::Evaluate {
            paths,
            rules,
            f_min,
            n_required,
            vut_class,
            vut_length,
            vut_width,
        } => commands::evaluate(
            common,
            &paths,
            &commands::EvalOptions {
                rules,
                f_min,
                n_required,
                vut_class,
                vut_length,
                vut_width,
            },
        ),
        Command::Fidelity {
            virtual_run,
            reference_run,
            tolerances,
        } => commands::fidelity(common, &virtual_run, &reference_run, tolerances.as_deref()),
        Command::Generate {
            case,
            spec,
            runs,
            seed,
        } => commands::generate(common, &case, spec.as_deref(), runs, seed),
        Command::Subset {
            ids,
            fraction,
            seed,
        } => commands::subset(&ids, fraction, seed),
        Command::Schema => {
            print!("{}", vista_core::parse::schema::render_csv());
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Error as u8)
        }
    }
}
