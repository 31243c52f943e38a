use std::fmt;
use std::str::FromStr;

use super::IngestError;

/// Grid units per input unit, as a positive rational `num / den`.
///
/// Real values are mapped to the grid by rounding `value * num / den` to the
/// nearest integer, ties away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantSpec {
    pub num: u32,
    pub den: u32,
}

impl QuantSpec {
    /// One grid unit per input unit (pixel data).
    pub const UNIT: QuantSpec = QuantSpec { num: 1, den: 1 };
    /// Centimetre grid for metric data.
    pub const CENTI: QuantSpec = QuantSpec { num: 100, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self, IngestError> {
        if num == 0 || den == 0 {
            return Err(IngestError::InvalidScale(format!("{num}/{den}")));
        }
        Ok(Self { num, den })
    }

    pub fn factor(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for QuantSpec {
    fn default() -> Self {
        Self::UNIT
    }
}

impl fmt::Display for QuantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for QuantSpec {
    type Err = IngestError;

    /// Accepts `N/D` or a bare `N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || IngestError::InvalidScale(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        Self::new(
            num.parse().map_err(|_| bad())?,
            den.parse().map_err(|_| bad())?,
        )
    }
}

/// Nearest grid value of `value`, ties away from zero.
pub fn quantize(value: f64, spec: QuantSpec) -> Result<i32, IngestError> {
    let scaled = value * spec.num as f64 / spec.den as f64;
    let rounded = scaled.round();
    if !rounded.is_finite() || rounded < i32::MIN as f64 || rounded > i32::MAX as f64 {
        return Err(IngestError::QuantOverflow { value });
    }
    Ok(rounded as i32)
}
