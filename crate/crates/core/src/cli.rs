//! Command-line front end: `run`, `diagnose` and `dump`.
//!
//! Exit codes: 0 ok, 2 usage or input error, 3 fault detected (`diagnose`).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    bin_series, confidence_interval, diagnose, sensor_series, split_intervals, Baseline,
    DiagnoseOptions, DiagnosisReport, IntervalStats, Metric,
};
use crate::error::AnalysisError;
use crate::recording::{Recording, RecordingHeader, RECORDING_VERSION};
use crate::simulation::{run_scenario, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FAULT: i32 = 3;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "plausifuse",
    version,
    about = "Plausibility-checked sensor fusion simulator and fault diagnosis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write recording, metrics, report and manifest.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-run the diagnosis on an existing recording.
    Diagnose {
        recording: PathBuf,
        /// `cross-sensor` or the path of a no-fault recording.
        #[arg(long, default_value = "cross-sensor")]
        baseline: String,
        /// Output directory; defaults to the recording's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a recording as JSON lines (header first, then one line per step).
    Dump { recording: PathBuf },
}

/// Report document written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub injected_fault: Option<String>,
    /// Fusion diagnostics (e.g. total conflict) collected during the run.
    pub runtime_diagnostics: Vec<String>,
    /// Set when the diagnosis could not be carried out.
    pub error: Option<String>,
    pub diagnosis: Option<DiagnosisReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Provenance record written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Interval statistics of a recording under its own analysis settings.
pub fn recording_stats(rec: &Recording) -> Vec<IntervalStats> {
    let ids: Vec<_> = rec.header.sensors.iter().map(|s| s.id).collect();
    let a = &rec.header.analysis;
    split_intervals(&rec.steps, a.interval_steps, &ids, &a.bins)
}

pub fn diagnose_options(header: &RecordingHeader) -> DiagnoseOptions {
    DiagnoseOptions {
        sensors: header.sensors.clone(),
        exclude: header.analysis.exclude_sensors.clone(),
        min_intervals: header.analysis.min_intervals,
        bins: header.analysis.bins,
    }
}

pub fn diagnose_recording(
    rec: &Recording,
    reference: Option<&Recording>,
) -> Result<DiagnosisReport, AnalysisError> {
    let stats = recording_stats(rec);
    let opts = diagnose_options(&rec.header);
    match reference {
        Some(r) => diagnose(&stats, Baseline::Reference(&recording_stats(r)), &opts),
        None => diagnose(&stats, Baseline::CrossSensor, &opts),
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.6}")
}

/// Plot-ready table: one row per interval and series, then one summary row
/// (`interval = all`) with the 95% CI.
pub fn metrics_csv(rec: &Recording, stats: &[IntervalStats]) -> String {
    let mut out = String::from("interval,id,metric,mean,ci_low,ci_high\n");
    let ids: Vec<_> = rec.header.sensors.iter().map(|s| s.id).collect();
    for st in stats {
        for (id, s) in &st.sensors {
            for (name, v) in [("mr", s.mr), ("uor", s.uor)] {
                if let Some(v) = v {
                    let _ = writeln!(out, "{},sensor:{},{},{},,", st.index, id, name, fmt_num(v));
                }
            }
        }
        for b in &st.bins {
            let _ = writeln!(
                out,
                "{},bin:{},p_exists,{},,",
                st.index,
                b.bin,
                fmt_num(b.mean_p_exists)
            );
        }
    }
    for id in &ids {
        for metric in [Metric::MissRatio, Metric::UnexpectedRatio] {
            if let Ok(ci) = confidence_interval(&sensor_series(stats, *id, metric)) {
                let _ = writeln!(
                    out,
                    "all,sensor:{},{},{},{},{}",
                    id,
                    metric.name(),
                    fmt_num(ci.mean),
                    fmt_num(ci.low()),
                    fmt_num(ci.high())
                );
            }
        }
    }
    let mut bins: Vec<_> = stats
        .iter()
        .flat_map(|s| s.bins.iter().map(|b| b.bin))
        .collect();
    bins.sort();
    bins.dedup();
    for bin in bins {
        if let Ok(ci) = confidence_interval(&bin_series(stats, bin)) {
            let _ = writeln!(
                out,
                "all,bin:{},p_exists,{},{},{}",
                bin,
                fmt_num(ci.mean),
                fmt_num(ci.low()),
                fmt_num(ci.high())
            );
        }
    }
    out
}

pub fn build_report(rec: &Recording, reference: Option<&Recording>) -> ReportFile {
    let runtime_diagnostics = rec
        .steps
        .iter()
        .flat_map(|s| {
            s.ledger
                .diagnostics
                .iter()
                .map(move |d| format!("step {}: {d}", s.index))
        })
        .collect();
    let (diagnosis, error) = match diagnose_recording(rec, reference) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ReportFile {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: rec.header.scenario.clone(),
        seed: rec.header.seed,
        injected_fault: rec.header.fault.clone(),
        runtime_diagnostics,
        error,
        diagnosis,
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("report types serialize");
    s.push(b'\n');
    s
}

fn write_outputs(dir: &Path, files: &[(&str, Vec<u8>)]) -> std::io::Result<Vec<OutputFile>> {
    std::fs::create_dir_all(dir)?;
    let mut inventory = Vec::new();
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
        inventory.push(OutputFile {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }
    Ok(inventory)
}

fn cmd_run(config: &Path, seed: Option<u64>, out: &Path, stderr: &mut dyn Write) -> i32 {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let cfg = match ScenarioConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", config.display());
            return EXIT_INPUT;
        }
    };
    let cfg = match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    };
    let steps = match run_scenario(&cfg) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", config.display());
            return EXIT_INPUT;
        }
    };
    let rec = Recording {
        header: RecordingHeader::for_config(&cfg),
        steps,
    };
    let stats = recording_stats(&rec);
    let report = build_report(&rec, None);
    let bytes = match rec.to_bytes() {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot encode recording: {e}");
            return EXIT_INPUT;
        }
    };
    let files = [
        ("recording.bin", bytes),
        ("metrics.csv", metrics_csv(&rec, &stats).into_bytes()),
        ("report.json", to_json(&report)),
    ];
    let outputs = match write_outputs(out, &files) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", out.display());
            return EXIT_INPUT;
        }
    };
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(cfg.source.as_bytes()),
        seed: cfg.seed,
        started_unix,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    if let Err(e) = std::fs::write(out.join("manifest.json"), to_json(&manifest)) {
        let _ = writeln!(stderr, "error: {}: {e}", out.display());
        return EXIT_INPUT;
    }
    if let Some(err) = &report.error {
        let _ = writeln!(stderr, "note: diagnosis skipped: {err}");
    }
    EXIT_OK
}

fn load_recording(path: &Path, stderr: &mut dyn Write) -> Option<Recording> {
    match Recording::read(path) {
        Ok(r) => Some(r),
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", path.display());
            None
        }
    }
}

fn cmd_diagnose(
    recording: &Path,
    baseline: &str,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let Some(rec) = load_recording(recording, stderr) else {
        return EXIT_INPUT;
    };
    let reference = if baseline == "cross-sensor" {
        None
    } else {
        let Some(r) = load_recording(Path::new(baseline), stderr) else {
            return EXIT_INPUT;
        };
        if r.header
            .sensors
            .iter()
            .map(|s| s.id)
            .ne(rec.header.sensors.iter().map(|s| s.id))
        {
            let _ = writeln!(
                stderr,
                "error: baseline recording has a different sensor set"
            );
            return EXIT_INPUT;
        }
        Some(r)
    };
    let report = build_report(&rec, reference.as_ref());
    let Some(diagnosis) = &report.diagnosis else {
        let _ = writeln!(
            stderr,
            "error: {}",
            report.error.as_deref().unwrap_or("diagnosis failed")
        );
        return EXIT_INPUT;
    };
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| {
        recording
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    });
    if let Err(e) = write_outputs(&dir, &[("report.json", to_json(&report))]) {
        let _ = writeln!(stderr, "error: {}: {e}", dir.display());
        return EXIT_INPUT;
    }
    let _ = writeln!(stdout, "verdict: {}", diagnosis.verdict_label);
    if let Some(sensor) = diagnosis.verdict.sensor() {
        let _ = writeln!(stdout, "sensor: {sensor}");
    }
    if diagnosis.verdict.is_fault() {
        EXIT_FAULT
    } else {
        EXIT_OK
    }
}

fn cmd_dump(recording: &Path, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let file = match std::fs::File::open(recording) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", recording.display());
            return EXIT_INPUT;
        }
    };
    let reader = match crate::recording::RecordingReader::new(std::io::BufReader::new(file)) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", recording.display());
            return EXIT_INPUT;
        }
    };
    let header =
        serde_json::json!({ "header": reader.header(), "recording_version": RECORDING_VERSION });
    if writeln!(stdout, "{header}").is_err() {
        return EXIT_OK;
    }
    for step in reader {
        match step {
            Ok(s) => {
                let line = serde_json::to_string(&s).expect("step records serialize");
                // a closed pipe ends the dump quietly
                if writeln!(stdout, "{line}").is_err() {
                    return EXIT_OK;
                }
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {}: {}", recording.display(), e);
                return EXIT_INPUT;
            }
        }
    }
    EXIT_OK
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Run { config, seed, out } => cmd_run(&config, seed, &out, stderr),
        Command::Diagnose {
            recording,
            baseline,
            out,
        } => cmd_diagnose(&recording, &baseline, out.as_deref(), stdout, stderr),
        Command::Dump { recording } => cmd_dump(&recording, stdout, stderr),
    }
}
