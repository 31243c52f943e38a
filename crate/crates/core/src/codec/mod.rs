//! Stream encoder and decoder.
//!
//! A stream is a byte-aligned [`StreamHeader`] followed by one bit-continuous
//! payload, zero-padded to a byte boundary:
//!
//! ```text
//! frame index table: ue(index_0), ue(index_k - index_{k-1} - 1) ...
//! per frame:         ue(object count)
//!                    track ids (see `auxiliary`)
//!                    per object: visibility, then se() residuals of the
//!                    visible points in coding order
//! ```
//!
//! Coding order is the profile traversal order. When the object also existed
//! in the previous frame and some point is visible in both frames, that point
//! (the frame center) is coded first and its displacement is the motion
//! vector of the object; every other point then uses the mode chosen by
//! [`crate::modesel::select_mode`]. Otherwise the whole object is coded
//! without temporal reference.

pub mod auxiliary;
pub mod container;

use std::collections::VecDeque;

use thiserror::Error;

use crate::bitio::{BitError, BitReader, BitWriter};
use crate::ingest::QuantSpec;
use crate::model::{Frame, ModelError, ObjectInstance, Point, ProfileTopology, Sequence};
use crate::modesel::{candidate_modes, select_mode, ModeWeights, VoteContext};
use crate::predict::{
    frame_center, motion_vector, reconstruct, residual, Mode, PredictError, PredictionContext,
    Residual,
};

use auxiliary::DecodeFault;
pub use auxiliary::{decode_track_ids, decode_visibility, encode_track_ids, encode_visibility};
pub use container::{StreamHeader, MAGIC, VERSION};

/// Frames of history the coder keeps: mode votes for frame `t` look at the
/// contexts of frame `t-2`, which reach back to `t-4`.
const HISTORY_DEPTH: usize = 4;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("bad magic: not a KPSC stream")]
    BadMagic,
    #[error("unsupported stream version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown profile kind {0}")]
    UnknownProfileKind(u8),
    #[error("unknown builtin profile id {0}")]
    UnknownBuiltin(u8),
    #[error("truncated stream header")]
    HeaderTruncated,
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("header field out of range: {0}")]
    HeaderLimit(String),
    #[error("truncated stream in {}", where_(.frame))]
    Truncated {
        frame: Option<u32>,
        source: BitError,
    },
    #[error("corrupt stream in {}: {reason}", where_(.frame))]
    Corrupt { frame: Option<u32>, reason: String },
    #[error("frame {frame}, track {track_id}, point {point}: residual out of codable range")]
    Overflow {
        frame: u32,
        track_id: u32,
        point: usize,
    },
    #[error("track ids not strictly increasing ({previous} then {id})")]
    NonIncreasingIds { previous: u32, id: u32 },
    #[error("visibility length mismatch: expected {expected}, found {found}")]
    VisibilityLength { expected: usize, found: usize },
    #[error("sequence too long: {0} frames")]
    TooManyFrames(usize),
    #[error(transparent)]
    Bits(#[from] BitError),
}

fn where_(frame: &Option<u32>) -> String {
    match frame {
        Some(f) => format!("frame {f}"),
        None => "frame index table".to_string(),
    }
}

impl CodecError {
    fn at_frame(frame: Option<u32>, fault: DecodeFault) -> Self {
        match fault {
            DecodeFault::Bits(source @ BitError::Truncated { .. }) => {
                CodecError::Truncated { frame, source }
            }
            DecodeFault::Bits(e) => CodecError::Corrupt {
                frame,
                reason: e.to_string(),
            },
            DecodeFault::Corrupt(reason) => CodecError::Corrupt { frame, reason },
        }
    }
}

/// How each point's mode is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModePolicy {
    /// Weighted vote over reconstructed references.
    #[default]
    Adaptive,
    /// Always the given mode where available, Independent elsewhere.
    /// `Forced(Independent)` disables temporal reference entirely.
    Forced(Mode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecConfig {
    pub weights: ModeWeights,
    pub scale: QuantSpec,
    pub policy: ModePolicy,
    /// Keep a per-point [`PointRecord`] log.
    pub record_points: bool,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            weights: ModeWeights::default(),
            scale: QuantSpec::UNIT,
            policy: ModePolicy::Adaptive,
            record_points: false,
        }
    }
}

/// One coded point: its mode and the values written for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointRecord {
    /// Position of the frame in the sequence.
    pub frame: usize,
    pub track_id: u32,
    pub point: usize,
    pub mode: Mode,
    /// Whether this point carried the object's motion vector.
    pub center: bool,
    pub residual: Residual,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameStats {
    pub index: u32,
    pub objects: usize,
    pub points: u64,
    pub bits: u64,
    pub aux_bits: u64,
}

/// Bit accounting of one payload; derivable from the payload alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StreamStats {
    /// Payload bits before padding.
    pub total_bits: u64,
    /// Frame index table, object counts, track ids and visibility.
    pub aux_bits: u64,
    pub coord_bits: u64,
    /// Visible points per mode, indexed by [`Mode::tag`].
    pub mode_counts: [u64; 4],
    pub frames: Vec<FrameStats>,
}

impl StreamStats {
    pub fn points(&self) -> u64 {
        self.mode_counts.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct EncodedStream {
    pub header: StreamHeader,
    pub payload: Vec<u8>,
    pub stats: StreamStats,
    pub log: Option<Vec<PointRecord>>,
}

impl EncodedStream {
    pub fn to_bytes(&self) -> Result<Vec<u8>, CodecError> {
        let mut out = self.header.to_bytes()?;
        out.extend_from_slice(&self.payload);
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct DecodedStream {
    pub header: StreamHeader,
    pub sequence: Sequence,
    pub stats: StreamStats,
    pub log: Option<Vec<PointRecord>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeOptions {
    pub policy: ModePolicy,
    pub record_points: bool,
}

/// Statistics and optional point log filled in while coding.
struct Accounting {
    stats: StreamStats,
    log: Option<Vec<PointRecord>>,
}

/// Reconstructed previous frames, most recent first.
#[derive(Debug, Default, Clone)]
pub struct History {
    frames: VecDeque<Frame>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, frame: Frame) {
        self.frames.push_front(frame);
        self.frames.truncate(HISTORY_DEPTH);
    }

    /// The object `back` frames ago (`back >= 1`).
    pub fn object(&self, back: usize, track_id: u32) -> Option<&ObjectInstance> {
        self.frames.get(back.checked_sub(1)?)?.object(track_id)
    }

    fn points(&self, back: usize, track_id: u32) -> Option<&[Option<Point>]> {
        self.object(back, track_id).map(|o| o.points.as_slice())
    }
}

fn visibility_of(points: &[Option<Point>]) -> Vec<bool> {
    points.iter().map(Option::is_some).collect()
}

/// Motion vector an object had when frame `now` was coded adaptively.
fn motion_between(
    topo: &ProfileTopology,
    now: &[Option<Point>],
    before: Option<&[Option<Point>]>,
) -> Option<Vec<i64>> {
    let before = before?;
    let c = frame_center(topo, &visibility_of(now), &visibility_of(before))?;
    Some(motion_vector(now[c].as_ref()?, before[c].as_ref()?))
}

fn context<'a>(
    current: Option<&'a [Option<Point>]>,
    prev1: Option<&'a [Option<Point>]>,
    prev2: Option<&'a [Option<Point>]>,
    parents: &'a [Option<usize>],
    motion: Option<&'a [i64]>,
) -> Option<PredictionContext<'a>> {
    current.map(|current| PredictionContext {
        current,
        prev1,
        prev2,
        parents,
        motion,
    })
}

/// Moves residuals between the coder and the bitstream.
trait ResidualChannel {
    /// Encoders pass the residual and get it back once written; decoders pass
    /// `None` and get the residual read from the stream.
    fn residual(&mut self, value: Option<Residual>, d: usize) -> Result<Residual, BitError>;
}

struct Emit<'w>(&'w mut BitWriter);

impl ResidualChannel for Emit<'_> {
    fn residual(&mut self, value: Option<Residual>, _d: usize) -> Result<Residual, BitError> {
        let value = value.expect("encoder always supplies residuals");
        for &v in &value {
            self.0.write_se(v)?;
        }
        Ok(value)
    }
}

struct Parse<'r, 'a>(&'r mut BitReader<'a>);

impl ResidualChannel for Parse<'_, '_> {
    fn residual(&mut self, _value: Option<Residual>, d: usize) -> Result<Residual, BitError> {
        (0..d).map(|_| self.0.read_se()).collect()
    }
}

/// Per-frame state shared by the encoder and decoder paths.
struct FrameCoder<'a> {
    topo: &'a ProfileTopology,
    weights: ModeWeights,
    policy: ModePolicy,
    history: &'a History,
    frame_pos: usize,
    frame_index: u32,
}

enum ObjectFault {
    Bits(BitError),
    Predict(PredictError),
}

impl From<BitError> for ObjectFault {
    fn from(e: BitError) -> Self {
        ObjectFault::Bits(e)
    }
}

impl From<PredictError> for ObjectFault {
    fn from(e: PredictError) -> Self {
        ObjectFault::Predict(e)
    }
}

impl FrameCoder<'_> {
    fn choose(&self, now: PredictionContext, id: u32, i: usize) -> Mode {
        match self.policy {
            ModePolicy::Forced(m) => {
                if candidate_modes(&now, i).contains(&m) {
                    m
                } else {
                    Mode::Independent
                }
            }
            ModePolicy::Adaptive => {
                let h = self.history;
                let topo = self.topo;
                let (o1, o2, o3, o4) = (
                    h.points(1, id),
                    h.points(2, id),
                    h.points(3, id),
                    h.points(4, id),
                );
                let m1 = o1.and_then(|p| motion_between(topo, p, o2));
                let m2 = o2.and_then(|p| motion_between(topo, p, o3));
                let votes = VoteContext {
                    now,
                    back1: context(o1, o2, o3, &topo.parents, m1.as_deref()),
                    back2: context(o2, o3, o4, &topo.parents, m2.as_deref()),
                };
                select_mode(&votes, i, self.weights)
            }
        }
    }

    /// Codes the coordinates of one object. `original` is `Some` when
    /// encoding. Returns the reconstruction.
    fn code_object<C: ResidualChannel>(
        &self,
        chan: &mut C,
        track_id: u32,
        visibility: &[bool],
        original: Option<&ObjectInstance>,
        acc: &mut Accounting,
    ) -> Result<ObjectInstance, (usize, ObjectFault)> {
        let topo = self.topo;
        let d = topo.d;
        let prev1 = self.history.points(1, track_id);
        let prev2 = self.history.points(2, track_id);
        let center = match self.policy {
            ModePolicy::Forced(Mode::Independent) => None,
            _ => prev1.and_then(|p| frame_center(topo, visibility, &visibility_of(p))),
        };
        let order = match center {
            Some(c) => topo.order_from(c),
            None => topo.order.clone(),
        };
        let mut current: Vec<Option<Point>> = vec![None; topo.n];
        let mut motion: Option<Vec<i64>> = None;
        for i in order {
            if !visibility[i] {
                continue;
            }
            let wanted = original.map(|o| o.point(i).expect("visibility derived from original"));
            let (mode, coded, point) = if Some(i) == center {
                let before = prev1
                    .and_then(|p| p[i].as_ref())
                    .expect("center visible before");
                let r = chan
                    .residual(wanted.map(|p| motion_vector(p, before)), d)
                    .map_err(|e| (i, e.into()))?;
                let point = before
                    .coords
                    .iter()
                    .zip(&r)
                    .map(|(&b, &r)| i32::try_from(b as i64 + r))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| (i, PredictError::Overflow { point: i }.into()))?;
                motion = Some(r.clone());
                (Mode::Temporal, r, Point::new(point))
            } else {
                let ctx = PredictionContext {
                    current: &current,
                    prev1,
                    prev2,
                    parents: &topo.parents,
                    motion: motion.as_deref(),
                };
                let mode = self.choose(ctx, track_id, i);
                let value = match wanted {
                    Some(p) => Some(residual(mode, &ctx, i, p).map_err(|e| (i, e.into()))?),
                    None => None,
                };
                let r = chan.residual(value, d).map_err(|e| (i, e.into()))?;
                let point = reconstruct(mode, &r, &ctx, i).map_err(|e| (i, e.into()))?;
                (mode, r, point)
            };
            acc.stats.mode_counts[mode.tag() as usize] += 1;
            if let Some(log) = acc.log.as_mut() {
                log.push(PointRecord {
                    frame: self.frame_pos,
                    track_id,
                    point: i,
                    mode,
                    center: Some(i) == center,
                    residual: coded,
                });
            }
            current[i] = Some(point);
        }
        Ok(ObjectInstance::new(track_id, current))
    }
}

/// Writes one frame's payload.
fn encode_frame(
    w: &mut BitWriter,
    frame: &Frame,
    coder: &FrameCoder,
    acc: &mut Accounting,
) -> Result<Frame, CodecError> {
    let start = w.bits_written();
    let mut aux = 0;
    let mark = w.bits_written();
    w.write_ue(u32::try_from(frame.objects.len()).unwrap_or(u32::MAX))?;
    let ids: Vec<u32> = frame.objects.iter().map(|o| o.track_id).collect();
    encode_track_ids(w, &ids)?;
    aux += w.bits_written() - mark;
    let points_before = acc.stats.points();
    let mut objects = Vec::with_capacity(frame.objects.len());
    for obj in &frame.objects {
        let visibility = obj.visibility();
        let previous = coder
            .history
            .object(1, obj.track_id)
            .map(ObjectInstance::visibility);
        let mark = w.bits_written();
        encode_visibility(w, &visibility, previous.as_deref())?;
        aux += w.bits_written() - mark;
        let rec = coder
            .code_object(&mut Emit(w), obj.track_id, &visibility, Some(obj), acc)
            .map_err(|(point, fault)| match fault {
                ObjectFault::Bits(BitError::Overflow { .. })
                | ObjectFault::Predict(PredictError::Overflow { .. }) => CodecError::Overflow {
                    frame: coder.frame_index,
                    track_id: obj.track_id,
                    point,
                },
                ObjectFault::Bits(e) => CodecError::Bits(e),
                ObjectFault::Predict(e) => CodecError::Corrupt {
                    frame: Some(coder.frame_index),
                    reason: e.to_string(),
                },
            })?;
        debug_assert_eq!(&rec, obj);
        objects.push(rec);
    }
    let bits = w.bits_written() - start;
    acc.stats.aux_bits += aux;
    acc.stats.coord_bits += bits - aux;
    acc.stats.frames.push(FrameStats {
        index: frame.index,
        objects: frame.objects.len(),
        points: acc.stats.points() - points_before,
        bits,
        aux_bits: aux,
    });
    Ok(Frame::new(frame.index, objects))
}

/// Reads one frame's payload.
fn decode_frame(
    r: &mut BitReader,
    coder: &FrameCoder,
    acc: &mut Accounting,
) -> Result<Frame, CodecError> {
    let frame_index = coder.frame_index;
    let at = |fault: DecodeFault| CodecError::at_frame(Some(frame_index), fault);
    let start = r.position();
    let count = r.read_ue().map_err(|e| at(e.into()))? as usize;
    if count as u64 > r.remaining() {
        // every object needs at least one bit of track id
        return Err(at(DecodeFault::Bits(BitError::Truncated {
            offset: r.position(),
            needed: 1,
        })));
    }
    let ids = decode_track_ids(r, count).map_err(at)?;
    let mut aux = r.position() - start;
    let points_before = acc.stats.points();
    let mut objects = Vec::with_capacity(count);
    for id in ids {
        let previous = coder.history.object(1, id).map(ObjectInstance::visibility);
        let mark = r.position();
        let visibility = decode_visibility(r, coder.topo.n, previous.as_deref()).map_err(at)?;
        aux += r.position() - mark;
        let obj = coder
            .code_object(&mut Parse(r), id, &visibility, None, acc)
            .map_err(|(_, fault)| match fault {
                ObjectFault::Bits(e) => at(e.into()),
                ObjectFault::Predict(e) => at(DecodeFault::Corrupt(e.to_string())),
            })?;
        objects.push(obj);
    }
    let bits = r.position() - start;
    acc.stats.aux_bits += aux;
    acc.stats.coord_bits += bits - aux;
    acc.stats.frames.push(FrameStats {
        index: frame_index,
        objects: count,
        points: acc.stats.points() - points_before,
        bits,
        aux_bits: aux,
    });
    Ok(Frame::new(frame_index, objects))
}

/// Encodes with adaptive mode selection and the given weights.
pub fn encode_sequence(seq: &Sequence, weights: ModeWeights) -> Result<EncodedStream, CodecError> {
    encode_sequence_with(
        seq,
        &CodecConfig {
            weights,
            ..CodecConfig::default()
        },
    )
}

pub fn encode_sequence_with(
    seq: &Sequence,
    config: &CodecConfig,
) -> Result<EncodedStream, CodecError> {
    seq.validate()?;
    let topo = ProfileTopology::new(&seq.profile)?;
    let frame_count =
        u32::try_from(seq.frames.len()).map_err(|_| CodecError::TooManyFrames(seq.frames.len()))?;
    let header = StreamHeader {
        version: VERSION,
        profile: seq.profile.clone(),
        weights: config.weights,
        scale: config.scale,
        frame_count,
    };
    // fail on unrepresentable profiles before doing any work
    header.to_bytes()?;

    let mut w = BitWriter::new();
    let mut acc = Accounting {
        stats: StreamStats::default(),
        log: config.record_points.then(Vec::new),
    };
    write_frame_table(&mut w, &seq.frames)?;
    acc.stats.aux_bits = w.bits_written();

    let mut history = History::new();
    for (frame_pos, frame) in seq.frames.iter().enumerate() {
        let coder = FrameCoder {
            topo: &topo,
            weights: config.weights,
            policy: config.policy,
            history: &history,
            frame_pos,
            frame_index: frame.index,
        };
        let rec = encode_frame(&mut w, frame, &coder, &mut acc)?;
        history.push(rec);
    }
    acc.stats.total_bits = w.bits_written();
    Ok(EncodedStream {
        header,
        payload: w.finish(),
        stats: acc.stats,
        log: acc.log,
    })
}

fn write_frame_table(w: &mut BitWriter, frames: &[Frame]) -> Result<(), BitError> {
    let mut previous: Option<u32> = None;
    for frame in frames {
        match previous {
            None => w.write_ue(frame.index)?,
            Some(p) => w.write_ue(frame.index - p - 1)?,
        }
        previous = Some(frame.index);
    }
    Ok(())
}

/// Bits the frame index table, object counts, track ids and visibility of
/// `seq` take, without any coordinates.
pub fn auxiliary_bits(seq: &Sequence) -> Result<u64, CodecError> {
    let mut w = BitWriter::new();
    write_frame_table(&mut w, &seq.frames)?;
    let mut previous: Option<&Frame> = None;
    for frame in &seq.frames {
        w.write_ue(u32::try_from(frame.objects.len()).unwrap_or(u32::MAX))?;
        let ids: Vec<u32> = frame.objects.iter().map(|o| o.track_id).collect();
        encode_track_ids(&mut w, &ids)?;
        for obj in &frame.objects {
            let before = previous
                .and_then(|p| p.object(obj.track_id))
                .map(ObjectInstance::visibility);
            encode_visibility(&mut w, &obj.visibility(), before.as_deref())?;
        }
        previous = Some(frame);
    }
    Ok(w.bits_written())
}

pub fn decode_sequence(bytes: &[u8]) -> Result<Sequence, CodecError> {
    decode_stream(bytes, &DecodeOptions::default()).map(|d| d.sequence)
}

pub fn decode_stream(bytes: &[u8], options: &DecodeOptions) -> Result<DecodedStream, CodecError> {
    let (header, len) = StreamHeader::parse(bytes)?;
    let topo = ProfileTopology::new(&header.profile)?;
    let payload = &bytes[len..];
    let mut r = BitReader::new(payload);
    let mut acc = Accounting {
        stats: StreamStats::default(),
        log: options.record_points.then(Vec::new),
    };

    let table = |fault: DecodeFault| CodecError::at_frame(None, fault);
    if header.frame_count as u64 > r.remaining() {
        return Err(table(DecodeFault::Bits(BitError::Truncated {
            offset: 0,
            needed: (header.frame_count as u64 - r.remaining()) as u32,
        })));
    }
    let mut indices = Vec::with_capacity(header.frame_count as usize);
    let mut previous: Option<u32> = None;
    for _ in 0..header.frame_count {
        let code = r.read_ue().map_err(|e| table(e.into()))? as u64;
        let index = match previous {
            None => code,
            Some(p) => p as u64 + 1 + code,
        };
        let index = u32::try_from(index).map_err(|_| {
            table(DecodeFault::Corrupt(format!(
                "frame index {index} out of range"
            )))
        })?;
        indices.push(index);
        previous = Some(index);
    }
    acc.stats.aux_bits = r.position();

    let mut history = History::new();
    let mut frames = Vec::with_capacity(indices.len());
    for (frame_pos, &frame_index) in indices.iter().enumerate() {
        let coder = FrameCoder {
            topo: &topo,
            weights: header.weights,
            policy: options.policy,
            history: &history,
            frame_pos,
            frame_index,
        };
        let frame = decode_frame(&mut r, &coder, &mut acc)?;
        history.push(frame.clone());
        frames.push(frame);
    }
    acc.stats.total_bits = r.position();
    let rest = r.remaining();
    if rest >= 8 || (rest > 0 && r.read_bits(rest as u32)? != 0) {
        return Err(CodecError::Corrupt {
            frame: indices.last().copied(),
            reason: format!("{rest} trailing bit(s) after the last frame"),
        });
    }
    Ok(DecodedStream {
        sequence: Sequence::new(header.profile.clone(), frames),
        header,
        stats: acc.stats,
        log: acc.log,
    })
}
