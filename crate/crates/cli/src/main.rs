//! `platekit` command line: train and evaluate the recognizer, generate
//! synthetic corpora, run recognition over images, and serve the parking
//! gate protocol.
//!
//! Exit codes: 0 success, 1 runtime errors occurred, 2 usage/config errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "platekit", version, about = "License plate recognition toolkit and parking gate service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a KNN model from a glyph corpus directory and report accuracy.
    Train {
        /// Directory of <label>_<serial>.pbm glyphs.
        #[arg(long)]
        corpus: PathBuf,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
        /// Training fraction per class (0 < ratio < 1).
        #[arg(long, default_value_t = 0.7)]
        ratio: f64,
        /// Split shuffle seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Neighbor count; overrides the config value.
        #[arg(long)]
        k: Option<usize>,
        /// INI config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Emit the evaluation report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Recognize plates in images; one output line per reading.
    Recognize {
        /// Trained model file.
        #[arg(long)]
        model: PathBuf,
        /// INI config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Emit JSON instead of text lines.
        #[arg(long)]
        json: bool,
        /// Images to process (24-bit BMP or binary PPM).
        #[arg(required = true)]
        images: Vec<PathBuf>,
    },
    /// Generate synthetic scenes (or a glyph corpus) with ground truth.
    Gen {
        /// Base seed; scene i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of scenes.
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Plates per scene.
        #[arg(long, default_value_t = 1)]
        plates: usize,
        /// Maximum |tilt| in degrees; tilt is sampled uniformly.
        #[arg(long, default_value_t = 0.0)]
        tilt_max: f64,
        /// Minimum plate scale.
        #[arg(long, default_value_t = 1.0)]
        scale_min: f64,
        /// Maximum plate scale.
        #[arg(long, default_value_t = 1.0)]
        scale_max: f64,
        /// Plate type: red, yellow, white, or random.
        #[arg(long, default_value = "random")]
        plate_type: String,
        /// Speckle noise pixels per scene.
        #[arg(long, default_value_t = 0)]
        speckle: usize,
        /// Generate a glyph corpus with this many samples per class instead
        /// of scenes.
        #[arg(long)]
        glyphs: Option<usize>,
    },
    /// Score a generated scene directory against its truth manifest.
    Eval {
        /// Directory produced by `gen` (scenes + truth.manifest).
        #[arg(long)]
        scenes: PathBuf,
        /// Trained model file.
        #[arg(long)]
        model: PathBuf,
        /// INI config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the gate service speaking the line protocol.
    Serve {
        /// INI config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Journal file to append parking records to.
        #[arg(long)]
        journal: PathBuf,
        /// Trained model file for the recognizer.
        #[arg(long)]
        model: PathBuf,
        /// TCP listen address, e.g. 127.0.0.1:7171.
        #[arg(long, conflicts_with = "pipe")]
        listen: Option<String>,
        /// Scenario mode: tick-prefixed events on stdin, transcript on stdout.
        #[arg(long)]
        pipe: bool,
    },
    /// Summarize a journal over a time range.
    Report {
        /// Journal file.
        #[arg(long)]
        journal: PathBuf,
        /// Inclusive RFC3339 lower bound.
        #[arg(long)]
        from: Option<String>,
        /// Inclusive RFC3339 upper bound.
        #[arg(long)]
        to: Option<String>,
        /// Emit the summary as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train { corpus, out, ratio, seed, k, config, json } => {
            commands::train::run(&corpus, &out, ratio, seed, k, config.as_deref(), json)
        }
        Command::Recognize { model, config, json, images } => {
            commands::recognize::run(&model, config.as_deref(), json, &images)
        }
        Command::Gen { seed, count, out, plates, tilt_max, scale_min, scale_max, plate_type, speckle, glyphs } => {
            commands::gen::run(commands::gen::GenArgs {
                seed,
                count,
                out,
                plates,
                tilt_max_deg: tilt_max,
                scale_min,
                scale_max,
                plate_type,
                speckle,
                glyphs,
            })
        }
        Command::Eval { scenes, model, config, json } => {
            commands::eval::run(&scenes, &model, config.as_deref(), json)
        }
        Command::Serve { config, journal, model, listen, pipe } => {
            commands::serve::run(config.as_deref(), &journal, &model, listen.as_deref(), pipe)
        }
        Command::Report { journal, from, to, json } => {
            commands::report::run(&journal, from.as_deref(), to.as_deref(), json)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
