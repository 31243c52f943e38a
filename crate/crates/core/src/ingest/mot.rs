use std::collections::BTreeMap;

use super::{quantize, IngestError, QuantSpec};
use crate::model::{BuiltinProfile, Frame, ObjectInstance, Point, Sequence};

/// Parses MOT-challenge style `frame,id,x,y,w,h,...` lines into a `bbox2d`
/// sequence. Each box becomes its top-left `(x, y)` and bottom-right
/// `(x + w, y + h)` corners. Line order does not matter; fields past the
/// sixth are ignored.
pub fn parse_mot(text: &str, scale: QuantSpec) -> Result<Sequence, IngestError> {
    let mut frames: BTreeMap<u32, BTreeMap<u32, ObjectInstance>> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let err = |reason: String| IngestError::Mot { line, reason };
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() < 6 {
            return Err(err(format!(
                "expected at least 6 fields, found {}",
                fields.len()
            )));
        }
        let frame =
            parse_int(fields[0]).ok_or_else(|| err(format!("bad frame number '{}'", fields[0])))?;
        let id =
            parse_int(fields[1]).ok_or_else(|| err(format!("bad track id '{}'", fields[1])))?;
        let mut box_ = [0f64; 4];
        for (v, (name, s)) in box_
            .iter_mut()
            .zip(["x", "y", "w", "h"].iter().zip(&fields[2..6]))
        {
            *v = s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad {name} '{s}'")))?;
        }
        let [x, y, w, h] = box_;
        if w < 0.0 || h < 0.0 {
            return Err(err(format!("negative box size {w}x{h}")));
        }
        let q = |v: f64| quantize(v, scale).map_err(|e| err(e.to_string()));
        let corners = vec![
            Point::new(vec![q(x)?, q(y)?]),
            Point::new(vec![q(x + w)?, q(y + h)?]),
        ];
        let objects = frames.entry(frame).or_default();
        if objects
            .insert(id, ObjectInstance::all_visible(id, corners))
            .is_some()
        {
            return Err(err(format!("duplicate track {id} in frame {frame}")));
        }
    }
    let frames = frames
        .into_iter()
        .map(|(index, objects)| Frame::new(index, objects.into_values().collect()))
        .collect();
    let seq = Sequence::new(BuiltinProfile::Bbox2d.profile(), frames);
    seq.validate()?;
    Ok(seq)
}

/// Integer field, also accepting integral decimals such as `3.0`.
fn parse_int(s: &str) -> Option<u32> {
    s.parse().ok().or_else(|| {
        let v: f64 = s.parse().ok()?;
        (v.fract() == 0.0 && (0.0..u32::MAX as f64).contains(&v)).then_some(v as u32)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_line() {
        let seq = parse_mot("1,3,100,200,50,80,1,-1,-1,-1\n", QuantSpec::UNIT).unwrap();
        assert_eq!(seq.profile.name, "bbox2d");
        assert_eq!(seq.frames.len(), 1);
        assert_eq!(seq.frames[0].index, 1);
        assert_eq!(
            seq.frames[0].objects,
            vec![ObjectInstance::all_visible(
                3,
                vec![[100, 200].into(), [150, 280].into()]
            )]
        );
    }

    #[test]
    fn empty_file() {
        assert!(parse_mot("", QuantSpec::UNIT).unwrap().frames.is_empty());
        assert!(parse_mot("\n  \n", QuantSpec::UNIT)
            .unwrap()
            .frames
            .is_empty());
    }

    #[test]
    fn short_line() {
        let e = parse_mot("1,1,0,0,1,1\n1,2,3,4\n", QuantSpec::UNIT).unwrap_err();
        assert!(matches!(e, IngestError::Mot { line: 2, .. }), "{e}");
    }

    #[test]
    fn rejects_bad_boxes() {
        let e = parse_mot("1,1,0,0,-1,1\n", QuantSpec::UNIT).unwrap_err();
        assert!(e.to_string().contains("negative"), "{e}");
        let e = parse_mot("1,1,0,0,1,1\n1,1,5,5,1,1\n", QuantSpec::UNIT).unwrap_err();
        assert!(matches!(e, IngestError::Mot { line: 2, .. }), "{e}");
        assert!(parse_mot("1,-1,0,0,1,1\n", QuantSpec::UNIT).is_err());
        assert!(parse_mot("1,1,x,0,1,1\n", QuantSpec::UNIT).is_err());
    }

    #[test]
    fn order_insensitive() {
        let a = "2,5,1,1,2,2\n1,7,0,0,1,1\n1,2,3.5,4,1,1\n";
        let b = "1,2,3.5,4,1,1\n2,5,1,1,2,2\n1,7,0,0,1,1\n";
        let sa = parse_mot(a, QuantSpec::UNIT).unwrap();
        assert_eq!(sa, parse_mot(b, QuantSpec::UNIT).unwrap());
        assert_eq!(
            sa.frames.iter().map(|f| f.index).collect::<Vec<_>>(),
            [1, 2]
        );
        let ids: Vec<u32> = sa.frames[0].objects.iter().map(|o| o.track_id).collect();
        assert_eq!(ids, [2, 7]);
        // 3.5 rounds away from zero
        assert_eq!(sa.frames[0].objects[0].points[0], Some([4, 4].into()));
    }

    #[test]
    fn scaled() {
        let seq = parse_mot("1,1,1.25,0.5,1,1\n", QuantSpec::CENTI).unwrap();
        assert_eq!(
            seq.frames[0].objects[0].points,
            vec![Some([125, 50].into()), Some([225, 150].into())]
        );
    }
}
