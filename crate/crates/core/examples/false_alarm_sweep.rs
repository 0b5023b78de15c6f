//! Diagnoses fault-free highway runs over many seeds; nearly all should
//! come out as "no fault". The first argument sets the number of seeds.

mod common;

use std::collections::BTreeMap;

use plausifuse::analysis::{diagnose, Baseline, DiagnoseOptions};

fn main() {
    let seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let base = common::preset("highway.toml");
    let mut tally: BTreeMap<&str, u32> = BTreeMap::new();
    for seed in 1..=seeds {
        let cfg = base.clone().with_seed(seed);
        let stats = common::interval_stats(&cfg);
        let options = DiagnoseOptions {
            sensors: cfg.sensor_metas(),
            exclude: cfg.analysis.exclude_sensors.clone(),
            min_intervals: cfg.analysis.min_intervals,
            bins: cfg.analysis.bins,
        };
        let report = diagnose(&stats, Baseline::CrossSensor, &options).expect("enough intervals");
        println!("seed {seed:>3}: {}", report.verdict_label);
        *tally.entry(report.verdict.label()).or_default() += 1;
    }
    println!("{tally:?}");
}
