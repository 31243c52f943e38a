use super::BenchError;
use crate::codec::{auxiliary_bits, EncodedStream};
use crate::model::Sequence;

/// Bits per coordinate of the fixed-length reference code.
pub const BASELINE_BITS_PER_COORD: u64 = 16;

/// Emitted payload bits (header excluded, padding included) per visible key
/// point.
pub fn bits_per_point(stream: &EncodedStream) -> Result<f64, BenchError> {
    let points = stream.stats.points();
    if points == 0 {
        return Err(BenchError::ZeroPoints);
    }
    Ok(payload_bits(stream) as f64 / points as f64)
}

pub(crate) fn payload_bits(stream: &EncodedStream) -> u64 {
    stream.payload.len() as u64 * 8
}

/// Size of `seq` with every coordinate in 16 bits plus the same auxiliary
/// information the codec sends.
pub fn fixed_baseline_bits(seq: &Sequence) -> Result<u64, BenchError> {
    let coords = BASELINE_BITS_PER_COORD * seq.profile.d as u64 * seq.visible_point_count() as u64;
    Ok(coords + auxiliary_bits(seq)?)
}

/// `100 * total_bits / baseline_bits`.
pub fn compression_ratio(total_bits: u64, baseline_bits: u64) -> Result<f64, BenchError> {
    if baseline_bits == 0 {
        return Err(BenchError::ZeroBaseline);
    }
    Ok(100.0 * total_bits as f64 / baseline_bits as f64)
}
