//! `lumen simulate | map | evaluate | report`.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use lumen_core::{map_observations, synthesize_log, EmptyLogReason};

use crate::config::{EstimatorSettings, ScenarioFile, DEFAULT_SCENARIO};
use crate::error::{CliError, FormatError};
use crate::eval::{evaluate, read_report, write_cdf_csv, write_report};
use crate::formats::{
    parse_log, read_map, read_truth, write_atomic, write_log, write_map, write_truth, MapFile,
    ObservationRecord, ParseMode, TruthLed,
};

#[derive(Debug, Parser)]
#[command(name = "lumen", version, about = "Geometry-based LED mapping toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic observation log and its ground-truth sidecar.
    Simulate {
        /// Scenario file, or `default` for the bundled scenario.
        scenario: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Ground-truth sidecar path (defaults to `<output stem>.truth.json`).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Overrides the scenario's noise seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate LED positions from an observation log.
    Map {
        log: PathBuf,
        /// Estimator config or scenario file.
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Skip malformed log lines instead of aborting.
        #[arg(long)]
        lenient: bool,
    },
    /// Compare a map against ground truth.
    Evaluate {
        map: PathBuf,
        truth: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Export the CDF table of an evaluation report as CSV.
    Report {
        report: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Default sidecar path next to the log: `run.jsonl` -> `run.truth.json`.
pub fn truth_path_for(log: &Path) -> PathBuf {
    let stem = log.file_stem().map(|s| s.to_os_string()).unwrap_or_else(|| "log".into());
    let mut name = stem;
    name.push(".truth.json");
    log.with_file_name(name)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(io_err(path))
}

fn load_scenario(arg: &str) -> Result<ScenarioFile, CliError> {
    if arg == "default" && !Path::new(arg).exists() {
        return Ok(ScenarioFile::parse(DEFAULT_SCENARIO)?);
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(ScenarioFile::parse(&text)?)
}

/// Runs one command; the returned string is the summary printed on success.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Simulate {
            scenario,
            output,
            truth,
            seed,
        } => {
            let mut file = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                file.noise.seed = seed;
            }
            let cfg = file.to_core()?;
            let log = synthesize_log(&cfg)?;
            match log.warning {
                Some(EmptyLogReason::EmptyTrajectory) => log::warn!("trajectory is empty; log has no records"),
                Some(EmptyLogReason::NoVisibleLeds) => log::warn!("no LED is ever visible; log has no records"),
                None => {}
            }
            let records: Vec<ObservationRecord> = log.records.iter().map(ObservationRecord::from).collect();
            let mut buf = Vec::new();
            write_log(&mut buf, &records)?;
            write_out(&output, &buf)?;

            let truth_path = truth.unwrap_or_else(|| truth_path_for(&output));
            let leds: Vec<TruthLed> = log.truth.iter().map(TruthLed::from).collect();
            let mut buf = Vec::new();
            write_truth(&mut buf, &leds)?;
            write_out(&truth_path, &buf)?;
            Ok(format!(
                "wrote {} records to {} and {} LEDs to {}",
                records.len(),
                output.display(),
                leds.len(),
                truth_path.display()
            ))
        }
        Command::Map {
            log,
            config,
            output,
            lenient,
        } => {
            let text = std::fs::read_to_string(&config).map_err(io_err(&config))?;
            let settings = EstimatorSettings::parse(&text)?;
            let est = settings.to_core()?;
            let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
            let parsed = parse_log(open(&log)?, mode, &est.intrinsics, &est.cam1_to_cam2)?;
            if parsed.observations.is_empty() {
                return Err(CliError::NoObservations(format!("{} contains no observations", log.display())));
            }
            let n_obs = parsed.observations.len();
            let (_, built) = map_observations(parsed.observations, &est)?;
            for (key, reason) in &built.skipped {
                log::warn!("LED {key} omitted from map: {reason:?}");
            }
            let map = MapFile::new(&settings, &built.entries);
            let mut buf = Vec::new();
            write_map(&mut buf, &map)?;
            write_out(&output, &buf)?;
            Ok(format!(
                "mapped {} LEDs from {n_obs} observations ({} skipped) -> {}",
                built.entries.len(),
                built.skipped.len(),
                output.display()
            ))
        }
        Command::Evaluate { map, truth, output } => {
            let map_file = read_map(open(&map)?)?;
            let truth_leds = read_truth(open(&truth)?)?;
            let report = evaluate(&map_file, &truth_leds)?;
            let mut buf = Vec::new();
            write_report(&mut buf, &report)?;
            write_out(&output, &buf)?;
            let p90 = report.percentiles.iter().find(|p| p.p == 90.0).map_or(f64::NAN, |p| p.error_m);
            Ok(format!(
                "mean 3-D error: {:.4} m over {} LEDs (p90 {:.4} m) -> {}",
                report.mean_3d_m,
                report.leds.len(),
                p90,
                output.display()
            ))
        }
        Command::Report { report, output } => {
            let report_file = read_report(open(&report)?)?;
            let mut buf = Vec::new();
            write_cdf_csv(&mut buf, &report_file.cdf).map_err(|e| CliError::Parse(FormatError::Io(e)))?;
            write_out(&output, &buf)?;
            Ok(format!("wrote {} CDF rows to {}", report_file.cdf.len(), output.display()))
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}
