//! Track-id and visibility coding.

use crate::bitio::{BitError, BitReader, BitWriter, UE_MAX};

use super::CodecError;

/// Sorted ids as `ue(first)` followed by `ue(id_k - id_{k-1} - 1)`.
pub fn encode_track_ids(w: &mut BitWriter, ids: &[u32]) -> Result<(), CodecError> {
    let mut previous: Option<u32> = None;
    for &id in ids {
        let code = match previous {
            None => id,
            Some(p) if id > p => id - p - 1,
            Some(p) => return Err(CodecError::NonIncreasingIds { previous: p, id }),
        };
        w.write_ue(code)?;
        previous = Some(id);
    }
    Ok(())
}

pub fn decode_track_ids(r: &mut BitReader, count: usize) -> Result<Vec<u32>, DecodeFault> {
    let mut ids = Vec::with_capacity(count.min(1 << 16));
    let mut previous: Option<u32> = None;
    for _ in 0..count {
        let code = r.read_ue()? as u64;
        let id = match previous {
            None => code,
            Some(p) => p as u64 + 1 + code,
        };
        if id > UE_MAX as u64 {
            return Err(DecodeFault::Corrupt(format!("track id {id} out of range")));
        }
        ids.push(id as u32);
        previous = Some(id as u32);
    }
    Ok(ids)
}

/// New objects send `N` raw flags. Known objects send `0` when nothing
/// changed, else `1` and the `N`-bit XOR mask against the previous flags.
pub fn encode_visibility(
    w: &mut BitWriter,
    current: &[bool],
    previous: Option<&[bool]>,
) -> Result<(), CodecError> {
    match previous {
        None => current.iter().for_each(|&v| w.write_bit(v)),
        Some(prev) if prev.len() != current.len() => {
            return Err(CodecError::VisibilityLength {
                expected: prev.len(),
                found: current.len(),
            })
        }
        Some(prev) if prev == current => w.write_bit(false),
        Some(prev) => {
            w.write_bit(true);
            for (a, b) in current.iter().zip(prev) {
                w.write_bit(a ^ b);
            }
        }
    }
    Ok(())
}

pub fn decode_visibility(
    r: &mut BitReader,
    n: usize,
    previous: Option<&[bool]>,
) -> Result<Vec<bool>, DecodeFault> {
    match previous {
        None => (0..n).map(|_| r.read_bit().map_err(Into::into)).collect(),
        Some(prev) => {
            if !r.read_bit()? {
                return Ok(prev.to_vec());
            }
            prev.iter().map(|&p| Ok(p ^ r.read_bit()?)).collect()
        }
    }
}

/// Decoder failure before the frame context is attached.
#[derive(Debug)]
pub enum DecodeFault {
    Bits(BitError),
    Corrupt(String),
}

impl From<BitError> for DecodeFault {
    fn from(e: BitError) -> Self {
        DecodeFault::Bits(e)
    }
}
