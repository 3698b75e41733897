//! `pancake` command line: data generation, stirring, estimation, training,
//! planning, simulated pouring and experiment runs.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 runtime failure.

mod commands;
mod config;
mod error;

pub use config::{parse_length, LengthUnit, PathsConfig, RunConfig, ThresholdConfig};
pub use error::CliError;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pancake", version, about = "Simulated batter perception, pour control and shape planning")]
pub struct Cli {
    /// Master seed for every random draw
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML config file with [surrogate], [paths] and [thresholds] sections
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Increase log verbosity (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BowlArg {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Speed,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Enclosed,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    Lines,
    Round,
    Perception,
}

/// Batter in the bowl.
#[derive(Debug, Args)]
pub struct BatterArgs {
    /// Water-flour mass ratio
    #[arg(long)]
    pub ratio: f64,
    /// Liquid level, e.g. 30mm
    #[arg(long)]
    pub level: String,
    /// small: 8.3 cm radius, 1100 ml; large: 10.5 cm radius, 2200 ml
    #[arg(long, value_enum, default_value = "small")]
    pub bowl: BowlArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collect training torque curves plus the control datasets
    GenData {
        /// Ratios as `lo:hi:step` or a comma list
        #[arg(long, default_value = "1.0:1.5:0.05")]
        ratios: String,
        /// Push heights per ratio, 1 mm apart starting at 1 mm
        #[arg(long, default_value_t = 60)]
        pushes: usize,
        /// Output directory [default: config dataset_dir]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preliminary mixing then perceptive stirring until uniform
    Stir {
        #[command(flatten)]
        batter: BatterArgs,
        /// Also write the result as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Liquid level and water-flour ratio from a torque curve
    Estimate {
        /// Torque curve CSV (tip_height_m,torque_nm)
        #[arg(long, conflicts_with = "live", required_unless_present = "live")]
        curve: Option<PathBuf>,
        /// Simulate the whole perception pipeline instead
        #[arg(long, requires_all = ["ratio", "level"])]
        live: bool,
        /// True ratio of the simulated batter (--live)
        #[arg(long)]
        ratio: Option<f64>,
        /// True level of the simulated batter (--live)
        #[arg(long)]
        level: Option<String>,
        /// Bowl of the simulated batter (--live)
        #[arg(long, value_enum, default_value = "small")]
        bowl: BowlArg,
        /// Ratio model JSON; trained on the spot when omitted
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also write the estimates as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a speed or pour-time MLP
    Train {
        /// speed: (ratio, width) to arm speed; time: (ratio, diameter) to pour time
        #[arg(long, value_enum)]
        task: TaskArg,
        /// Dataset CSV from gen-data
        #[arg(long)]
        data: PathBuf,
        /// Weights JSON [default: <model_dir>/<task>.json]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Loss history CSV [default: next to --out]
        #[arg(long)]
        loss_out: Option<PathBuf>,
        /// Adam epochs [default: 1000]
        #[arg(long)]
        epochs: Option<usize>,
        /// Learning rate on normalized data [default: 0.06]
        #[arg(long)]
        lr: Option<f64>,
        /// Hidden layer widths, e.g. 32,64
        #[arg(long)]
        hidden: Option<String>,
    },
    /// Turn a PGM drawing into a pour trajectory
    Plan {
        /// Binary drawing, P2 or P5; bright pixels are batter
        #[arg(long)]
        image: PathBuf,
        /// Target stroke width, e.g. 10mm
        #[arg(long, default_value = "10mm")]
        stroke_width: String,
        /// Filled loops, skeleton strokes, or pick by shape
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        /// Pixel size on the griddle
        #[arg(long, default_value = "1mm")]
        pixel_size: String,
        /// Trajectory JSON
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG preview
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Simulated pour of a trajectory or drawing onto the griddle
    Pour {
        /// Trajectory JSON from plan
        #[arg(long, conflicts_with = "image", required_unless_present = "image")]
        traj: Option<PathBuf>,
        /// PGM drawing, planned first and scored by IoU
        #[arg(long)]
        image: Option<PathBuf>,
        #[command(flatten)]
        batter: BatterArgs,
        /// Stroke width when planning from --image
        #[arg(long, default_value = "10mm")]
        stroke_width: String,
        /// Planning mode when planning from --image
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        /// Pixel size of --image on the griddle
        #[arg(long, default_value = "1mm")]
        pixel_size: String,
        /// Speed model JSON; the analytic law is used when omitted
        #[arg(long)]
        model: Option<PathBuf>,
        /// Deposit thickness image
        #[arg(long)]
        out: PathBuf,
        /// Also write a JSON summary
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a simulated experiment and write its report
    Eval {
        /// Line widths, disk areas, or level/ratio/stopping estimates
        #[arg(long, value_enum)]
        experiment: ExperimentArg,
        /// Output directory [default: config output_dir]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Speed model for lines; trained on the spot when omitted
        #[arg(long)]
        speed_model: Option<PathBuf>,
        /// Pour-time model for round; trained on the spot when omitted
        #[arg(long)]
        time_model: Option<PathBuf>,
        /// Ratio model for perception; trained on the spot when omitted
        #[arg(long)]
        ratio_model: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}
