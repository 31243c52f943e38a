//! Byte-aligned stream header.
//!
//! ```text
//! "KPSC" | version u8 | profile kind u8 (0 builtin, 1 custom)
//!        | builtin id u8
//!        | or: name len u8, name, N u16, D u8, edge count u16, (from u16, to u16)*
//!        | weights 3 x u8 (t-1, t-2, spatial) | scale num u32, den u32
//!        | frame count u32
//! ```
//! Multi-byte fields are big-endian. The bit payload follows directly.

use crate::ingest::QuantSpec;
use crate::model::{BuiltinProfile, IncidenceProfile};
use crate::modesel::ModeWeights;

use super::CodecError;

pub const MAGIC: [u8; 4] = *b"KPSC";
pub const VERSION: u8 = 1;

const KIND_BUILTIN: u8 = 0;
const KIND_CUSTOM: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub profile: IncidenceProfile,
    pub weights: ModeWeights,
    pub scale: QuantSpec,
    pub frame_count: u32,
}

impl StreamHeader {
    pub fn builtin(&self) -> Option<BuiltinProfile> {
        BuiltinProfile::identify(&self.profile)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CodecError> {
        let mut out = Vec::with_capacity(32);
        out.extend_from_slice(&MAGIC);
        out.push(self.version);
        match self.builtin() {
            Some(b) => {
                out.push(KIND_BUILTIN);
                out.push(b.id());
            }
            None => {
                out.push(KIND_CUSTOM);
                write_custom_profile(&mut out, &self.profile)?;
            }
        }
        out.extend_from_slice(&[self.weights.prev1, self.weights.prev2, self.weights.spatial]);
        out.extend_from_slice(&self.scale.num.to_be_bytes());
        out.extend_from_slice(&self.scale.den.to_be_bytes());
        out.extend_from_slice(&self.frame_count.to_be_bytes());
        Ok(out)
    }

    /// Parses a header and returns it with its length in bytes.
    pub fn parse(bytes: &[u8]) -> Result<(Self, usize), CodecError> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = cur.u8()?;
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        let profile = match cur.u8()? {
            KIND_BUILTIN => {
                let id = cur.u8()?;
                BuiltinProfile::from_id(id)
                    .ok_or(CodecError::UnknownBuiltin(id))?
                    .profile()
            }
            KIND_CUSTOM => read_custom_profile(&mut cur)?,
            other => return Err(CodecError::UnknownProfileKind(other)),
        };
        let (w1, w2, w3) = (cur.u8()?, cur.u8()?, cur.u8()?);
        let weights =
            ModeWeights::new(w1, w2, w3).map_err(|e| CodecError::InvalidHeader(e.to_string()))?;
        let (num, den) = (cur.u32()?, cur.u32()?);
        let scale =
            QuantSpec::new(num, den).map_err(|e| CodecError::InvalidHeader(e.to_string()))?;
        let frame_count = cur.u32()?;
        Ok((
            Self {
                version,
                profile,
                weights,
                scale,
                frame_count,
            },
            cur.pos,
        ))
    }
}

fn write_custom_profile(out: &mut Vec<u8>, p: &IncidenceProfile) -> Result<(), CodecError> {
    let limit = |what: &str| CodecError::HeaderLimit(format!("{what} of profile '{}'", p.name));
    let name = p.name.as_bytes();
    out.push(u8::try_from(name.len()).map_err(|_| limit("name length"))?);
    out.extend_from_slice(name);
    out.extend_from_slice(
        &u16::try_from(p.n)
            .map_err(|_| limit("point count"))?
            .to_be_bytes(),
    );
    out.push(u8::try_from(p.d).map_err(|_| limit("dimension"))?);
    out.extend_from_slice(
        &u16::try_from(p.edges.len())
            .map_err(|_| limit("edge count"))?
            .to_be_bytes(),
    );
    for &(from, to) in &p.edges {
        // indices are < N <= u16::MAX once the profile is valid
        out.extend_from_slice(&(from as u16).to_be_bytes());
        out.extend_from_slice(&(to as u16).to_be_bytes());
    }
    Ok(())
}

fn read_custom_profile(cur: &mut Cursor) -> Result<IncidenceProfile, CodecError> {
    let len = cur.u8()? as usize;
    let name = std::str::from_utf8(cur.take(len)?)
        .map_err(|_| CodecError::InvalidHeader("profile name is not UTF-8".into()))?
        .to_string();
    let n = cur.u16()? as usize;
    let d = cur.u8()? as usize;
    let count = cur.u16()? as usize;
    let mut edges = Vec::with_capacity(count);
    for _ in 0..count {
        edges.push((cur.u16()? as usize, cur.u16()? as usize));
    }
    Ok(IncidenceProfile::new(name, n, d, edges))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos + len;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or(CodecError::HeaderTruncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(profile: IncidenceProfile) -> StreamHeader {
        StreamHeader {
            version: VERSION,
            profile,
            weights: ModeWeights::default(),
            scale: QuantSpec::CENTI,
            frame_count: 7,
        }
    }

    #[test]
    fn builtin_header_layout() {
        let h = header(BuiltinProfile::Skeleton15.profile());
        let bytes = h.to_bytes().unwrap();
        assert_eq!(
            bytes,
            [b'K', b'P', b'S', b'C', 1, 0, 2, 2, 1, 2, 0, 0, 0, 100, 0, 0, 0, 1, 0, 0, 0, 7]
        );
        assert_eq!(StreamHeader::parse(&bytes).unwrap(), (h, 22));
    }

    #[test]
    fn custom_header_layout() {
        let h = header(IncidenceProfile::new("tri", 3, 2, vec![(0, 1), (0, 2)]));
        let bytes = h.to_bytes().unwrap();
        let mut expected = vec![
            b'K', b'P', b'S', b'C', 1, 1, 3, b't', b'r', b'i', 0, 3, 2, 0, 2,
        ];
        expected.extend([0, 0, 0, 1, 0, 0, 0, 2]);
        expected.extend([2, 1, 2, 0, 0, 0, 100, 0, 0, 0, 1, 0, 0, 0, 7]);
        assert_eq!(bytes, expected);
        assert_eq!(StreamHeader::parse(&bytes).unwrap().0, h);
    }

    #[test]
    fn header_errors() {
        let bytes = header(BuiltinProfile::Bbox2d.profile()).to_bytes().unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            StreamHeader::parse(&bad),
            Err(CodecError::BadMagic)
        ));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(
            StreamHeader::parse(&bad),
            Err(CodecError::UnsupportedVersion(9))
        ));
        let mut bad = bytes.clone();
        bad[6] = 42;
        assert!(matches!(
            StreamHeader::parse(&bad),
            Err(CodecError::UnknownBuiltin(42))
        ));
        let mut bad = bytes.clone();
        bad[7] = 0;
        assert!(matches!(
            StreamHeader::parse(&bad),
            Err(CodecError::InvalidHeader(_))
        ));
        assert!(matches!(
            StreamHeader::parse(&bytes[..10]),
            Err(CodecError::HeaderTruncated)
        ));
        let long = header(IncidenceProfile::new("x".repeat(300), 2, 2, vec![]));
        assert!(matches!(long.to_bytes(), Err(CodecError::HeaderLimit(_))));
    }
}
