//! Lossless compression of key-point sequences: bounding boxes, skeletons,
//! facial landmarks and 3D boxes tracked across video frames.
//!
//! Coordinates are predicted from already-decoded data (the same object in
//! earlier frames, and neighbouring key points in the current frame), and the
//! integer residuals are written with exponential-Golomb codes. The mode used
//! for each point is re-derived by the decoder, so no per-point side
//! information is sent.

pub mod bench;
pub mod bitio;
pub mod cli;
pub mod codec;
pub mod ingest;
pub mod model;
pub mod modesel;
pub mod predict;

pub use codec::{decode_sequence, encode_sequence, EncodedStream};
pub use model::{Frame, IncidenceProfile, ObjectInstance, Point, Sequence};
pub use modesel::ModeWeights;
pub use predict::Mode;
