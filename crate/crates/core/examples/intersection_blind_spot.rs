//! Lidar with a blind wedge towards the junction: its miss ratio rises and
//! existence drops inside the wedge.
//!
//! Pass a seed as the first argument to override the preset's.

mod common;

fn main() {
    let report =
        common::diagnose_against_clean("intersection_blind_spot.toml", "intersection.toml");
    common::print_report(&report);
}
