//! MSB-first bit packing and order-0 exponential-Golomb codes.
//!
//! Unsigned values use the `ue(v)` code: for `n`, let `L` be the bit length of
//! `n + 1`; emit `L - 1` zero bits followed by `n + 1` in `L` bits. Signed
//! values are folded onto the unsigned code with the H.264 `se(v)` mapping,
//! positive values to odd indices: `v > 0 -> 2v - 1`, `v <= 0 -> -2v`.

use thiserror::Error;

/// Largest magnitude accepted by the signed coder.
pub const SE_MAX_MAGNITUDE: i64 = 1 << 30;

/// Largest value accepted by the unsigned coder (`n + 1` must fit in 32 bits).
pub const UE_MAX: u32 = u32::MAX - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("truncated stream: needed {needed} more bit(s) at bit offset {offset}")]
    Truncated { offset: u64, needed: u32 },
    #[error("value {value} out of range for {code}")]
    Overflow { value: i64, code: &'static str },
    #[error("invalid exp-Golomb prefix at bit offset {offset}")]
    InvalidCodeword { offset: u64 },
    #[error("bit field wider than 32 bits or value wider than field ({value} in {count} bits)")]
    FieldWidth { value: u32, count: u32 },
}

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    buf: Vec<u8>,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total bits written so far, excluding padding.
    pub fn bits_written(&self) -> u64 {
        self.bits
    }

    pub fn write_bit(&mut self, bit: bool) {
        let slot = (self.bits % 8) as u8;
        if slot == 0 {
            self.buf.push(0);
        }
        if bit {
            *self.buf.last_mut().unwrap() |= 0x80 >> slot;
        }
        self.bits += 1;
    }

    /// Writes the low `count` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u32, count: u32) -> Result<(), BitError> {
        if count > 32 || (count < 32 && value >> count != 0) {
            return Err(BitError::FieldWidth { value, count });
        }
        for shift in (0..count).rev() {
            self.write_bit((value >> shift) & 1 == 1);
        }
        Ok(())
    }

    pub fn write_ue(&mut self, n: u32) -> Result<(), BitError> {
        if n > UE_MAX {
            return Err(BitError::Overflow {
                value: n as i64,
                code: "ue(v)",
            });
        }
        let v = n + 1;
        let len = 32 - v.leading_zeros();
        for _ in 1..len {
            self.write_bit(false);
        }
        self.write_bits(v, len)
    }

    pub fn write_se(&mut self, v: i64) -> Result<(), BitError> {
        self.write_ue(se_to_ue(v)?)
    }

    /// Zero-pads the last byte and returns the buffer.
    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.data.len() as u64 * 8 - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool, BitError> {
        if self.remaining() == 0 {
            return Err(BitError::Truncated {
                offset: self.pos,
                needed: 1,
            });
        }
        let byte = self.data[(self.pos / 8) as usize];
        let bit = (byte >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, count: u32) -> Result<u32, BitError> {
        if count > 32 {
            return Err(BitError::FieldWidth { value: 0, count });
        }
        if (count as u64) > self.remaining() {
            return Err(BitError::Truncated {
                offset: self.pos,
                needed: count - self.remaining() as u32,
            });
        }
        let mut v = 0u64;
        for _ in 0..count {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v as u32)
    }

    pub fn read_ue(&mut self) -> Result<u32, BitError> {
        let start = self.pos;
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 31 {
                return Err(BitError::InvalidCodeword { offset: start });
            }
        }
        let tail = self.read_bits(zeros)? as u64;
        Ok(((1u64 << zeros) + tail - 1) as u32)
    }

    pub fn read_se(&mut self) -> Result<i64, BitError> {
        let start = self.pos;
        let v = ue_to_se(self.read_ue()?);
        if v.abs() > SE_MAX_MAGNITUDE {
            return Err(BitError::InvalidCodeword { offset: start });
        }
        Ok(v)
    }
}

/// Signed-to-unsigned fold used by `se(v)`.
pub fn se_to_ue(v: i64) -> Result<u32, BitError> {
    if v.unsigned_abs() > SE_MAX_MAGNITUDE as u64 {
        return Err(BitError::Overflow {
            value: v,
            code: "se(v)",
        });
    }
    Ok(if v > 0 { 2 * v - 1 } else { -2 * v } as u32)
}

pub fn ue_to_se(u: u32) -> i64 {
    let u = u as i64;
    if u % 2 == 1 {
        (u + 1) / 2
    } else {
        -(u / 2)
    }
}

pub fn bit_length_ue(n: u32) -> Result<u32, BitError> {
    if n > UE_MAX {
        return Err(BitError::Overflow {
            value: n as i64,
            code: "ue(v)",
        });
    }
    Ok(2 * (32 - (n + 1).leading_zeros()) - 1)
}

/// Length of `se(v)` without emitting it.
pub fn bit_length_se(v: i64) -> Result<u32, BitError> {
    bit_length_ue(se_to_ue(v)?)
}

/// `se(v)` length formula extended to any `i64`; used only for scoring
/// hypothetical residuals, which may fall outside the codable range.
pub(crate) fn se_len_unbounded(v: i64) -> u64 {
    let u: u128 = if v > 0 {
        2 * v as u128 - 1
    } else {
        2 * v.unsigned_abs() as u128
    };
    2 * (128 - (u + 1).leading_zeros() as u64) - 1
}
