//! Cross-product evaluation of sequences × skips × noise levels × coder
//! configurations.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::metrics::payload_bits;
use super::{add_gaussian_noise, compression_ratio, fixed_baseline_bits, frame_skip, BenchError};
use crate::codec::{decode_stream, encode_sequence_with, CodecConfig, DecodeOptions, ModePolicy};
use crate::model::Sequence;
use crate::modesel::ModeWeights;
use crate::predict::Mode;

/// Coder configuration of one matrix column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeConfig {
    Multimodal,
    Temporal,
    SpatialTemporal,
    Trajectory,
    Independent,
}

impl ModeConfig {
    pub const ALL: [ModeConfig; 5] = [
        Self::Multimodal,
        Self::Temporal,
        Self::SpatialTemporal,
        Self::Trajectory,
        Self::Independent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Multimodal => "multimodal",
            Self::Temporal => "temporal",
            Self::SpatialTemporal => "spatial_temporal",
            Self::Trajectory => "trajectory",
            Self::Independent => "independent",
        }
    }

    pub fn policy(self) -> ModePolicy {
        match self {
            Self::Multimodal => ModePolicy::Adaptive,
            Self::Temporal => ModePolicy::Forced(Mode::Temporal),
            Self::SpatialTemporal => ModePolicy::Forced(Mode::SpatialTemporal),
            Self::Trajectory => ModePolicy::Forced(Mode::Trajectory),
            Self::Independent => ModePolicy::Forced(Mode::Independent),
        }
    }
}

impl fmt::Display for ModeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeConfig {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| BenchError::Params(format!("unknown mode config '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct BenchInput {
    pub name: String,
    pub sequence: Sequence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpec {
    pub skips: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub seed: u64,
    pub configs: Vec<ModeConfig>,
    pub weights: ModeWeights,
}

impl Default for MatrixSpec {
    fn default() -> Self {
        Self {
            skips: vec![0],
            sigmas: vec![0.0],
            seed: 0,
            configs: vec![ModeConfig::Multimodal],
            weights: ModeWeights::default(),
        }
    }
}

/// One (sequence, skip, sigma, config) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub sequence: String,
    pub profile: String,
    pub skip: usize,
    pub sigma: f64,
    pub seed: u64,
    pub config: String,
    pub total_bits: u64,
    pub points: u64,
    pub bits_per_point: f64,
    pub baseline_bits: u64,
    pub ratio_percent: f64,
    pub mode_independent: u64,
    pub mode_temporal: u64,
    pub mode_spatial_temporal: u64,
    pub mode_trajectory: u64,
}

/// Evaluates every cell, checking each encoding decodes back to its input.
/// Rows come out sorted by sequence position, skip, sigma and config.
pub fn run_matrix(inputs: &[BenchInput], spec: &MatrixSpec) -> Result<Vec<MetricRow>, BenchError> {
    if let Some(s) = spec.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(BenchError::Params(format!(
            "sigma must be non-negative, got {s}"
        )));
    }
    let mut cells = Vec::new();
    for k in 0..inputs.len() {
        for &skip in &spec.skips {
            for (si, &sigma) in spec.sigmas.iter().enumerate() {
                for &config in &spec.configs {
                    cells.push((k, skip, si, sigma, config));
                }
            }
        }
    }
    let mut rows = cells
        .into_par_iter()
        .map(|(k, skip, si, sigma, config)| {
            let input = &inputs[k];
            let seq = add_gaussian_noise(&frame_skip(&input.sequence, skip), sigma, spec.seed);
            let row = evaluate(
                &input.name,
                &seq,
                skip,
                sigma,
                spec.seed,
                config,
                spec.weights,
            )?;
            Ok(((k, skip, si, config), row))
        })
        .collect::<Result<Vec<_>, BenchError>>()?;
    rows.sort_by_key(|r| r.0);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

fn evaluate(
    name: &str,
    seq: &Sequence,
    skip: usize,
    sigma: f64,
    seed: u64,
    config: ModeConfig,
    weights: ModeWeights,
) -> Result<MetricRow, BenchError> {
    let codec = CodecConfig {
        weights,
        policy: config.policy(),
        ..CodecConfig::default()
    };
    let stream = encode_sequence_with(seq, &codec)?;
    let options = DecodeOptions {
        policy: config.policy(),
        record_points: false,
    };
    let decoded = decode_stream(&stream.to_bytes()?, &options)?;
    if decoded.sequence != *seq {
        return Err(BenchError::NotLossless {
            sequence: name.to_string(),
            config: config.to_string(),
        });
    }
    let points = stream.stats.points();
    if points == 0 {
        return Err(BenchError::ZeroPoints);
    }
    let total_bits = payload_bits(&stream);
    let baseline_bits = fixed_baseline_bits(seq)?;
    let m = stream.stats.mode_counts;
    Ok(MetricRow {
        sequence: name.to_string(),
        profile: seq.profile.name.clone(),
        skip,
        sigma,
        seed,
        config: config.to_string(),
        total_bits,
        points,
        bits_per_point: total_bits as f64 / points as f64,
        baseline_bits,
        ratio_percent: compression_ratio(total_bits, baseline_bits)?,
        mode_independent: m[Mode::Independent.tag() as usize],
        mode_temporal: m[Mode::Temporal.tag() as usize],
        mode_spatial_temporal: m[Mode::SpatialTemporal.tag() as usize],
        mode_trajectory: m[Mode::Trajectory.tag() as usize],
    })
}

pub fn write_csv<W: Write>(rows: &[MetricRow], out: W) -> Result<(), BenchError> {
    let report = |e: csv::Error| BenchError::Report(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER).map_err(report)?;
    }
    for row in rows {
        w.serialize(row).map_err(report)?;
    }
    w.flush().map_err(|e| BenchError::Report(e.to_string()))
}

const CSV_HEADER: [&str; 15] = [
    "sequence",
    "profile",
    "skip",
    "sigma",
    "seed",
    "config",
    "total_bits",
    "points",
    "bits_per_point",
    "baseline_bits",
    "ratio_percent",
    "mode_independent",
    "mode_temporal",
    "mode_spatial_temporal",
    "mode_trajectory",
];

pub fn write_json<W: Write>(rows: &[MetricRow], mut out: W) -> Result<(), BenchError> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| BenchError::Report(e.to_string()))?;
    writeln!(out).map_err(|e| BenchError::Report(e.to_string()))
}
