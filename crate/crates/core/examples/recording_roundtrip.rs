//! Streams a short intersection run into a recording file, reads it back
//! frame by frame and diagnoses it against its own sensors.

mod common;

use std::fs::File;
use std::io::{BufReader, BufWriter};

use plausifuse::cli::diagnose_recording;
use plausifuse::recording::{Recording, RecordingHeader, RecordingReader, RecordingWriter};
use plausifuse::simulation::Simulation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = common::preset("intersection.toml");
    cfg.duration = 60.0;
    let path = std::env::temp_dir().join("plausifuse-roundtrip.bin");

    let header = RecordingHeader::for_config(&cfg);
    let mut writer = RecordingWriter::new(BufWriter::new(File::create(&path)?), &header)?;
    for step in Simulation::new(cfg)? {
        writer.write_step(&step)?;
    }
    writer.finish()?;
    println!(
        "wrote {} ({} bytes)",
        path.display(),
        std::fs::metadata(&path)?.len()
    );

    let reader = RecordingReader::new(BufReader::new(File::open(&path)?))?;
    println!(
        "scenario {} seed {}",
        reader.header().scenario,
        reader.header().seed
    );
    let (mut steps, mut objects, mut misses) = (0usize, 0usize, 0u64);
    for step in reader {
        let step = step?;
        steps += 1;
        objects += step.system.len();
        misses += step.ledger.counts().values().map(|c| c.misses).sum::<u64>();
    }
    println!(
        "{steps} steps, {:.1} fused objects per step, {misses} misses",
        objects as f64 / steps as f64
    );

    let rec = Recording::read(&path)?;
    let mut opts_rec = rec.clone();
    opts_rec.header.analysis.min_intervals = 5;
    match diagnose_recording(&opts_rec, None) {
        Ok(d) => println!("cross-sensor verdict: {}", d.verdict_label),
        Err(e) => println!("not diagnosable: {e}"),
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
