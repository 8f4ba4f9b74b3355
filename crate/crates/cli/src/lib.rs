//! Command-line front end for `prosody-core`.
//!
//! Every subcommand produces a JSON document (printed with `--json`), a short
//! text summary otherwise, and optional JSON/CSV/SVG files written under the
//! output directory.

use std::ffi::OsString;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod svg;

pub const OUT_DIR_ENV: &str = "PROSODY_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "prosody", version, about = "Speech rhythm and intonation analysis")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Reserved for stochastic analyses; all current ones are deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the JSON result instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Directory for result files. Nothing is written without one.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
    /// File formats to write into the output directory.
    #[arg(long, global = true, value_delimiter = ',', default_values = ["json", "csv", "svg"])]
    pub format: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline on a synthetic 200 Hz tone modulated at 5 Hz.
    Calibrate(commands::CalibrateArgs),
    /// Amplitude envelope modulation spectrum, polynomial shape and zones.
    Aems(commands::AemsArgs),
    /// Duration dispersion metrics and quadrant statistics of a tier.
    Metrics(commands::MetricsArgs),
    /// Induce a time tree over a duration sequence.
    Timetree(commands::TimetreeArgs),
    /// Hierarchy induced over the z-scored envelope spectrum.
    Spectree(commands::SpectreeArgs),
    /// Tone terracing: phonetic tones, pitch targets and a synthetic contour.
    ToneGen(commands::ToneGenArgs),
    /// Intonation grammar tools.
    #[command(subcommand)]
    Intonation(commands::IntonationCommand),
    /// Autocorrelation F0 track and inter-pausal units.
    F0(commands::F0Args),
    /// Polynomial model of an F0 track.
    ContourFit(commands::ContourFitArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Invalid invocation: exit code 2.
    Usage(String),
    /// Failed analysis or unreadable input: exit code 1.
    Analysis(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Analysis(m) => f.write_str(m),
        }
    }
}

impl From<prosody_core::Error> for CliError {
    fn from(e: prosody_core::Error) -> Self {
        CliError::Analysis(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(_) => 1,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Analysis(format!("{}: {e}", path.display()))
    }
}

/// One result file: `<name>.<ext>` in the output directory.
#[derive(Debug, Clone)]
pub struct OutFile {
    pub name: String,
    pub format: Format,
    pub content: String,
}

/// Everything a subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub json: serde_json::Value,
    pub text: String,
    pub files: Vec<OutFile>,
    /// Per-input failures of batch commands; any entry makes the exit code 1.
    pub failures: Vec<String>,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(outcome) => match emit(&cli.global, &outcome) {
            Ok(()) => {
                for f in &outcome.failures {
                    eprintln!("error: {f}");
                }
                if outcome.failures.is_empty() {
                    0
                } else {
                    1
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Aems(a) => commands::aems(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Timetree(a) => commands::timetree(a),
        Command::Spectree(a) => commands::spectree(a),
        Command::ToneGen(a) => commands::tone_gen(a),
        Command::Intonation(c) => commands::intonation(c),
        Command::F0(a) => commands::f0(a),
        Command::ContourFit(a) => commands::contour_fit(a),
    }
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Svg => "svg",
    }
}

/// Keep only characters that cannot leave the output directory.
fn safe_name(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    let s = s.trim_start_matches('.');
    if s.is_empty() {
        "out".into()
    } else {
        s.into()
    }
}

fn emit(global: &GlobalArgs, outcome: &Outcome) -> Result<(), CliError> {
    if let Some(dir) = &global.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for f in outcome.files.iter().filter(|f| global.format.contains(&f.format)) {
            let path = dir.join(format!("{}.{}", safe_name(&f.name), extension(f.format)));
            std::fs::write(&path, &f.content).map_err(|e| CliError::io(&path, e))?;
        }
    }
    let mut stdout = std::io::stdout().lock();
    let text = if global.json {
        let mut s = serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize");
        s.push('\n');
        s
    } else {
        outcome.text.clone()
    };
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Analysis(format!("stdout: {e}")))
}
