//! Reading and writing key-point data: MOT box annotations, the kpjson
//! document format, plain-text profile descriptions, and quantization of
//! real-valued coordinates onto the integer grid.

mod kpjson;
mod mot;
mod quant;

use thiserror::Error;

use crate::model::{BuiltinProfile, IncidenceProfile, ModelError};

pub use kpjson::{parse_kpjson, read_kpjson, write_kpjson, KpDocument};
pub use mot::parse_mot;
pub use quant::{quantize, QuantSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("invalid scale '{0}': expected positive N/D")]
    InvalidScale(String),
    #[error("value {value} does not fit the integer grid")]
    QuantOverflow { value: f64 },
    #[error("line {line}: {reason}")]
    Mot { line: usize, reason: String },
    #[error("{path}: {reason}")]
    Schema { path: String, reason: String },
    #[error("unknown profile '{0}' (builtin: bbox2d, box3d, skeleton15, face68)")]
    UnknownProfile(String),
    #[error("profile file line {line}: {reason}")]
    ProfileText { line: usize, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Looks up a builtin profile by name.
pub fn resolve_profile(name: &str) -> Result<IncidenceProfile, IngestError> {
    BuiltinProfile::from_name(name)
        .map(BuiltinProfile::profile)
        .ok_or_else(|| IngestError::UnknownProfile(name.to_string()))
}

/// Parses a profile description:
///
/// ```text
/// # comment
/// name N D
/// from to
/// ...
/// ```
pub fn parse_profile_text(text: &str) -> Result<IncidenceProfile, IngestError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line, reason: &str| IngestError::ProfileText {
        line,
        reason: reason.to_string(),
    };
    let (line, head) = lines
        .next()
        .ok_or_else(|| err(1, "missing 'name N D' header"))?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    let [name, n, d] = fields[..] else {
        return Err(err(line, "expected 'name N D'"));
    };
    let n = n.parse().map_err(|_| err(line, "N is not a count"))?;
    let d = d.parse().map_err(|_| err(line, "D is not a count"))?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split_whitespace().collect();
        let [a, b] = fields[..] else {
            return Err(err(line, "expected 'from to'"));
        };
        let a = a.parse().map_err(|_| err(line, "bad point index"))?;
        let b = b.parse().map_err(|_| err(line, "bad point index"))?;
        edges.push((a, b));
    }
    let profile = IncidenceProfile::new(name, n, d, edges);
    profile.validate()?;
    Ok(profile)
}
