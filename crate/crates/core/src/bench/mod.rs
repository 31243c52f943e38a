//! Evaluation harness: metrics against the 16-bit fixed-length baseline,
//! perturbations (frame skipping, Gaussian noise), synthetic sequences and
//! the configuration matrix runner.

mod matrix;
mod metrics;
mod perturb;
mod synth;

use thiserror::Error;

use crate::codec::CodecError;

pub use matrix::{
    run_matrix, write_csv, write_json, BenchInput, MatrixSpec, MetricRow, ModeConfig,
};
pub use metrics::{
    bits_per_point, compression_ratio, fixed_baseline_bits, BASELINE_BITS_PER_COORD,
};
pub use perturb::{add_gaussian_noise, frame_skip};
pub use synth::{synth_generate, SynthKind, SynthParams};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("no visible key points to measure")]
    ZeroPoints,
    #[error("fixed-length baseline is zero bits")]
    ZeroBaseline,
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("{sequence} ({config}): decoded sequence differs from the input")]
    NotLossless { sequence: String, config: String },
    #[error("report output: {0}")]
    Report(String),
}
