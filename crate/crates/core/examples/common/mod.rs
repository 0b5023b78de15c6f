#![allow(dead_code)]
//! Helpers shared by the scenario examples.

use std::path::PathBuf;

use plausifuse::analysis::{
    diagnose, split_intervals, Baseline, DiagnoseOptions, DiagnosisReport, IntervalStats,
};
use plausifuse::simulation::{run_scenario, ScenarioConfig};

pub fn preset(name: &str) -> ScenarioConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "configs", name]
        .iter()
        .collect();
    let cfg = ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{e}"));
    match std::env::args().nth(1).map(|s| s.parse::<u64>()) {
        Some(Ok(seed)) => cfg.with_seed(seed),
        _ => cfg,
    }
}

pub fn interval_stats(cfg: &ScenarioConfig) -> Vec<IntervalStats> {
    let steps = run_scenario(cfg).expect("preset runs");
    let ids: Vec<_> = cfg.sensors.iter().map(|s| s.meta.id).collect();
    split_intervals(
        &steps,
        cfg.analysis.interval_steps,
        &ids,
        &cfg.analysis.bins,
    )
}

/// Diagnoses `faulty` against the same scenario and seed without the fault.
pub fn diagnose_against_clean(faulty: &str, clean: &str) -> DiagnosisReport {
    let cfg = preset(faulty);
    let reference = preset(clean).with_seed(cfg.seed);
    let stats = interval_stats(&cfg);
    let ref_stats = interval_stats(&reference);
    let options = DiagnoseOptions {
        sensors: cfg.sensor_metas(),
        exclude: cfg.analysis.exclude_sensors.clone(),
        min_intervals: cfg.analysis.min_intervals,
        bins: cfg.analysis.bins,
    };
    diagnose(&stats, Baseline::Reference(&ref_stats), &options).expect("enough intervals")
}

pub fn print_report(report: &DiagnosisReport) {
    println!("{} intervals", report.intervals);
    for s in &report.sensors {
        let fmt = |m: &Option<plausifuse::analysis::MetricFlag>| match m {
            Some(f) => format!(
                "{:.4} [{:.4}, {:.4}] vs {:.4} {:?}",
                f.ci.mean,
                f.ci.low(),
                f.ci.high(),
                f.baseline.mean,
                f.flag
            ),
            None => "n/a".into(),
        };
        println!(
            "sensor {}  MR {}  UOR {}",
            s.sensor,
            fmt(&s.mr),
            fmt(&s.uor)
        );
    }
    for b in report.flagged_bins() {
        println!(
            "bin {} at ({:.0}, {:.0}): p_exists {:.3} vs {:.3} {:?}",
            b.bin, b.center.0, b.center.1, b.ci.mean, b.baseline.mean, b.flag
        );
    }
    match report.verdict.sensor() {
        Some(id) => println!("verdict: {} (sensor {id})", report.verdict_label),
        None => println!("verdict: {}", report.verdict_label),
    }
}
