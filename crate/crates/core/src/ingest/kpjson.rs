//! kpjson: a JSON carrier for integer key-point sequences.
//!
//! ```json
//! {
//!   "profile": "skeleton15",
//!   "scale": [1, 1],
//!   "frames": [
//!     {"index": 0, "objects": [
//!       {"track_id": 4, "visibility": [1, 0, 1], "points": [[10, 20], [30, 40]]}
//!     ]}
//!   ]
//! }
//! ```
//!
//! `profile` is a builtin name or an inline `{"name", "n", "d", "edges"}`
//! graph. `points` lists only the visible points, in point-index order.

use serde::{Deserialize, Serialize};

use super::{IngestError, QuantSpec};
use crate::model::{BuiltinProfile, Frame, IncidenceProfile, ObjectInstance, Point, Sequence};

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ProfileDoc {
    Name(String),
    Inline {
        name: String,
        n: usize,
        d: usize,
        edges: Vec<[usize; 2]>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct SequenceDoc {
    profile: ProfileDoc,
    #[serde(default = "unit_scale")]
    scale: [u32; 2],
    frames: Vec<FrameDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameDoc {
    index: u32,
    objects: Vec<ObjectDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectDoc {
    track_id: u32,
    visibility: Vec<u8>,
    points: Vec<Vec<i32>>,
}

fn unit_scale() -> [u32; 2] {
    [1, 1]
}

/// A parsed kpjson document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KpDocument {
    pub sequence: Sequence,
    pub scale: QuantSpec,
}

pub fn parse_kpjson(text: &str) -> Result<Sequence, IngestError> {
    read_kpjson(text).map(|doc| doc.sequence)
}

pub fn read_kpjson(text: &str) -> Result<KpDocument, IngestError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: SequenceDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        IngestError::Schema {
            path: if path == "." || path == "?" {
                "$".to_string()
            } else {
                path
            },
            reason: e.into_inner().to_string(),
        }
    })?;
    let schema = |path: String, reason: String| IngestError::Schema { path, reason };

    let profile = match doc.profile {
        ProfileDoc::Name(name) => super::resolve_profile(&name)?,
        ProfileDoc::Inline { name, n, d, edges } => {
            IncidenceProfile::new(name, n, d, edges.into_iter().map(|[a, b]| (a, b)).collect())
        }
    };
    profile
        .validate()
        .map_err(|e| schema("profile".into(), e.to_string()))?;
    let scale = QuantSpec::new(doc.scale[0], doc.scale[1])
        .map_err(|e| schema("scale".into(), e.to_string()))?;

    let (n, d) = (profile.n, profile.d);
    let mut frames = Vec::with_capacity(doc.frames.len());
    for (fi, f) in doc.frames.into_iter().enumerate() {
        if let Some(prev) = frames.last().map(|p: &Frame| p.index) {
            if f.index <= prev {
                return Err(schema(
                    format!("frames[{fi}].index"),
                    format!("{} does not increase (previous {prev})", f.index),
                ));
            }
        }
        let mut objects = Vec::with_capacity(f.objects.len());
        for (oi, o) in f.objects.into_iter().enumerate() {
            let at = |field: &str| format!("frames[{fi}].objects[{oi}].{field}");
            if let Some(prev) = objects.last().map(|p: &ObjectInstance| p.track_id) {
                if o.track_id <= prev {
                    return Err(schema(
                        at("track_id"),
                        format!("{} does not increase (previous {prev})", o.track_id),
                    ));
                }
            }
            if o.track_id == u32::MAX {
                return Err(schema(
                    at("track_id"),
                    format!("{} is reserved", o.track_id),
                ));
            }
            if o.visibility.len() != n {
                return Err(schema(
                    at("visibility"),
                    format!("expected {n} entries, found {}", o.visibility.len()),
                ));
            }
            if let Some(k) = o.visibility.iter().position(|&v| v > 1) {
                return Err(schema(
                    format!("{}[{k}]", at("visibility")),
                    "expected 0 or 1".into(),
                ));
            }
            let visible = o.visibility.iter().filter(|&&v| v == 1).count();
            if o.points.len() != visible {
                return Err(schema(
                    at("points"),
                    format!(
                        "visibility marks {visible} visible points, found {} coordinate sets",
                        o.points.len()
                    ),
                ));
            }
            let mut coords = o.points.into_iter().enumerate();
            let mut points = Vec::with_capacity(n);
            for &v in &o.visibility {
                if v == 0 {
                    points.push(None);
                    continue;
                }
                let (k, c) = coords.next().expect("counted above");
                if c.len() != d {
                    return Err(schema(
                        format!("{}[{k}]", at("points")),
                        format!("expected {d} coordinates, found {}", c.len()),
                    ));
                }
                points.push(Some(Point::new(c)));
            }
            objects.push(ObjectInstance::new(o.track_id, points));
        }
        frames.push(Frame::new(f.index, objects));
    }
    let sequence = Sequence::new(profile, frames);
    sequence.validate()?;
    Ok(KpDocument { sequence, scale })
}

/// Serializes `seq`; builtin profiles are written by name.
pub fn write_kpjson(seq: &Sequence, scale: QuantSpec) -> String {
    let p = &seq.profile;
    let profile = match BuiltinProfile::identify(p) {
        Some(b) => ProfileDoc::Name(b.name().to_string()),
        None => ProfileDoc::Inline {
            name: p.name.clone(),
            n: p.n,
            d: p.d,
            edges: p.edges.iter().map(|&(a, b)| [a, b]).collect(),
        },
    };
    let frames = seq
        .frames
        .iter()
        .map(|f| FrameDoc {
            index: f.index,
            objects: f
                .objects
                .iter()
                .map(|o| ObjectDoc {
                    track_id: o.track_id,
                    visibility: o.points.iter().map(|p| p.is_some() as u8).collect(),
                    points: o
                        .points
                        .iter()
                        .flatten()
                        .map(|p| p.coords.clone())
                        .collect(),
                })
                .collect(),
        })
        .collect();
    let doc = SequenceDoc {
        profile,
        scale: [scale.num, scale.den],
        frames,
    };
    let mut out = serde_json::to_string(&doc).expect("kpjson documents always serialize");
    out.push('\n');
    out
}
