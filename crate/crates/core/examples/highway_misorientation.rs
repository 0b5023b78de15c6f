//! Misoriented radar in the highway chain: its miss ratio rises, its
//! unexpected-observation rate falls and existence drops in front of it.
//!
//! Pass a seed as the first argument to override the preset's.

mod common;

fn main() {
    let report = common::diagnose_against_clean("highway_misorientation.toml", "highway.toml");
    common::print_report(&report);
}
