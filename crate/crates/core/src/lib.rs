// validation uses `!(x > 0.0)` on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assignment;
pub mod cli;
pub mod error;
pub mod fusion;
pub mod model;
pub mod plausibility;
pub mod recording;
pub mod simulation;
pub mod tracker;
