//! Radar whose tracker confirms on the first hit: the neighbours miss the
//! resulting false tracks and existence dips locally.
//!
//! Pass a seed as the first argument to override the preset's.

mod common;

fn main() {
    let report = common::diagnose_against_clean("highway_tracker_threshold.toml", "highway.toml");
    common::print_report(&report);
}
