//! Key-point sequence domain types.
//!
//! A [`Sequence`] is an ordered list of [`Frame`]s, each holding the tracked
//! objects visible in that frame. Every object conforms to one
//! [`IncidenceProfile`]: a directed graph over its `N` key points whose edges
//! say which point may serve as the prediction reference of which.

mod profiles;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

pub use profiles::{BuiltinProfile, SKELETON15_JOINTS};

/// One `D`-dimensional key point in integer grid units.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub coords: Vec<i32>,
}

impl Point {
    pub fn new(coords: Vec<i32>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl<const D: usize> From<[i32; D]> for Point {
    fn from(coords: [i32; D]) -> Self {
        Self {
            coords: coords.to_vec(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.coords.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Directed reference graph over the key points of one object type.
///
/// An edge `(a, b)` means point `a` may be used as the reference of point `b`.
/// Fields are public so that arbitrary (possibly invalid) profiles can be
/// described and then checked with [`validate_profile`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IncidenceProfile {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub edges: Vec<(usize, usize)>,
}

/// A single broken [`IncidenceProfile`] invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileViolation {
    NoPoints,
    NoDimensions,
    SelfLoop {
        edge: usize,
        index: usize,
    },
    IndexOutOfRange {
        edge: usize,
        from: usize,
        to: usize,
        n: usize,
    },
    DuplicateEdge {
        edge: usize,
        from: usize,
        to: usize,
    },
}

impl fmt::Display for ProfileViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoPoints => write!(f, "profile has no points (N = 0)"),
            Self::NoDimensions => write!(f, "profile has no dimensions (D = 0)"),
            Self::SelfLoop { edge, index } => {
                write!(f, "self-loop: edge #{edge} ({index} -> {index})")
            }
            Self::IndexOutOfRange { edge, from, to, n } => {
                write!(
                    f,
                    "index out of range: edge #{edge} ({from} -> {to}) with N = {n}"
                )
            }
            Self::DuplicateEdge { edge, from, to } => {
                write!(f, "duplicate edge: edge #{edge} ({from} -> {to})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid profile '{name}': {}", join_violations(.violations))]
    InvalidProfile {
        name: String,
        violations: Vec<ProfileViolation>,
    },
    #[error("frame #{position}: index {index} does not increase (previous {previous})")]
    FrameOrder {
        position: usize,
        index: u32,
        previous: u32,
    },
    #[error("frame {frame}: track ids not strictly increasing ({previous} then {track_id})")]
    TrackOrder {
        frame: u32,
        previous: u32,
        track_id: u32,
    },
    #[error("frame {frame}, track {track_id}: track id {track_id} is reserved")]
    TrackIdRange { frame: u32, track_id: u32 },
    #[error("frame {frame}, track {track_id}: expected {expected} key points, found {found}")]
    PointCount {
        frame: u32,
        track_id: u32,
        expected: usize,
        found: usize,
    },
    #[error("frame {frame}, track {track_id}, point {point}: expected {expected} coordinates, found {found}")]
    Dimension {
        frame: u32,
        track_id: u32,
        point: usize,
        expected: usize,
        found: usize,
    },
}

fn join_violations(v: &[ProfileViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl IncidenceProfile {
    pub fn new(name: impl Into<String>, n: usize, d: usize, edges: Vec<(usize, usize)>) -> Self {
        Self {
            name: name.into(),
            n,
            d,
            edges,
        }
    }

    /// Look up one of the shipped profiles by name.
    pub fn builtin(name: &str) -> Option<Self> {
        BuiltinProfile::from_name(name).map(BuiltinProfile::profile)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        validate_profile(self).map_err(|violations| ModelError::InvalidProfile {
            name: self.name.clone(),
            violations,
        })
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(from, _) in &self.edges {
            if from < self.n {
                deg[from] += 1;
            }
        }
        deg
    }

    /// Out-neighbours of every vertex, ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(from, to) in &self.edges {
            if from < self.n && to < self.n {
                adj[from].push(to);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}

/// Collects every broken invariant of `profile`, not only the first.
pub fn validate_profile(profile: &IncidenceProfile) -> Result<(), Vec<ProfileViolation>> {
    let mut violations = Vec::new();
    if profile.n == 0 {
        violations.push(ProfileViolation::NoPoints);
    }
    if profile.d == 0 {
        violations.push(ProfileViolation::NoDimensions);
    }
    let mut seen = BTreeSet::new();
    for (edge, &(from, to)) in profile.edges.iter().enumerate() {
        if from == to {
            violations.push(ProfileViolation::SelfLoop { edge, index: from });
        }
        if from >= profile.n || to >= profile.n {
            violations.push(ProfileViolation::IndexOutOfRange {
                edge,
                from,
                to,
                n: profile.n,
            });
        }
        if !seen.insert((from, to)) {
            violations.push(ProfileViolation::DuplicateEdge { edge, from, to });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Index of the point with maximum out-degree, lowest index on ties.
pub fn central_point(profile: &IncidenceProfile) -> usize {
    argmax_lowest(profile.out_degrees().into_iter())
}

pub(crate) fn argmax_lowest(values: impl Iterator<Item = usize>) -> usize {
    let mut best = (0usize, None::<usize>);
    for (i, v) in values.enumerate() {
        if best.1.is_none_or(|b| v > b) {
            best = (i, Some(v));
        }
    }
    best.0
}

/// Breadth-first visit order from the central point.
///
/// Each entry is `(point, reference)`, where the reference is the BFS parent.
/// Out-neighbours are visited in ascending index order. Points unreachable
/// from the central point follow in ascending order with no reference.
pub fn traversal_order(profile: &IncidenceProfile) -> Vec<(usize, Option<usize>)> {
    let n = profile.n;
    if n == 0 {
        return Vec::new();
    }
    let adj = profile.adjacency();
    let root = central_point(profile);
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    visited[root] = true;
    order.push((root, None));
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !visited[w] {
                visited[w] = true;
                order.push((w, Some(v)));
                queue.push_back(w);
            }
        }
    }
    for (i, seen) in visited.iter().enumerate() {
        if !seen {
            order.push((i, None));
        }
    }
    order
}

/// Derived, decoder-replicable facts about a valid profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileTopology {
    pub n: usize,
    pub d: usize,
    pub central: usize,
    /// Points in traversal order.
    pub order: Vec<usize>,
    /// BFS parent of each point, indexed by point.
    pub parents: Vec<Option<usize>>,
    pub out_degree: Vec<usize>,
}

impl ProfileTopology {
    pub fn new(profile: &IncidenceProfile) -> Result<Self, ModelError> {
        profile.validate()?;
        let traversal = traversal_order(profile);
        let mut parents = vec![None; profile.n];
        for &(i, parent) in &traversal {
            parents[i] = parent;
        }
        Ok(Self {
            n: profile.n,
            d: profile.d,
            central: central_point(profile),
            order: traversal.into_iter().map(|(i, _)| i).collect(),
            parents,
            out_degree: profile.out_degrees(),
        })
    }

    /// Traversal order with `first` moved to the front.
    pub fn order_from(&self, first: usize) -> Vec<usize> {
        std::iter::once(first)
            .chain(self.order.iter().copied().filter(|&i| i != first))
            .collect()
    }
}

/// One tracked object in one frame.
///
/// `points[i]` is `Some` exactly when key point `i` is visible, so the
/// visibility indicator and the coordinate set can never disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectInstance {
    pub track_id: u32,
    pub points: Vec<Option<Point>>,
}

impl ObjectInstance {
    pub fn new(track_id: u32, points: Vec<Option<Point>>) -> Self {
        Self { track_id, points }
    }

    /// Object with every key point visible.
    pub fn all_visible(track_id: u32, points: Vec<Point>) -> Self {
        Self {
            track_id,
            points: points.into_iter().map(Some).collect(),
        }
    }

    pub fn visibility(&self) -> Vec<bool> {
        self.points.iter().map(Option::is_some).collect()
    }

    pub fn is_visible(&self, i: usize) -> bool {
        matches!(self.points.get(i), Some(Some(_)))
    }

    pub fn point(&self, i: usize) -> Option<&Point> {
        self.points.get(i).and_then(Option::as_ref)
    }

    pub fn visible_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub index: u32,
    pub objects: Vec<ObjectInstance>,
}

impl Frame {
    pub fn new(index: u32, objects: Vec<ObjectInstance>) -> Self {
        Self { index, objects }
    }

    pub fn object(&self, track_id: u32) -> Option<&ObjectInstance> {
        self.objects
            .binary_search_by_key(&track_id, |o| o.track_id)
            .ok()
            .map(|k| &self.objects[k])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub profile: IncidenceProfile,
    pub frames: Vec<Frame>,
}

impl Sequence {
    pub fn new(profile: IncidenceProfile, frames: Vec<Frame>) -> Self {
        Self { profile, frames }
    }

    pub fn empty(profile: IncidenceProfile) -> Self {
        Self {
            profile,
            frames: Vec::new(),
        }
    }

    pub fn visible_point_count(&self) -> usize {
        self.frames
            .iter()
            .flat_map(|f| &f.objects)
            .map(ObjectInstance::visible_count)
            .sum()
    }

    /// Checks the profile and every frame/object invariant; stops at the
    /// first broken sequence invariant.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.profile.validate()?;
        let (n, d) = (self.profile.n, self.profile.d);
        let mut previous_index = None;
        for (position, frame) in self.frames.iter().enumerate() {
            if let Some(previous) = previous_index {
                if frame.index <= previous {
                    return Err(ModelError::FrameOrder {
                        position,
                        index: frame.index,
                        previous,
                    });
                }
            }
            previous_index = Some(frame.index);
            let mut previous_id = None;
            for obj in &frame.objects {
                if obj.track_id == u32::MAX {
                    return Err(ModelError::TrackIdRange {
                        frame: frame.index,
                        track_id: obj.track_id,
                    });
                }
                if let Some(previous) = previous_id {
                    if obj.track_id <= previous {
                        return Err(ModelError::TrackOrder {
                            frame: frame.index,
                            previous,
                            track_id: obj.track_id,
                        });
                    }
                }
                previous_id = Some(obj.track_id);
                if obj.points.len() != n {
                    return Err(ModelError::PointCount {
                        frame: frame.index,
                        track_id: obj.track_id,
                        expected: n,
                        found: obj.points.len(),
                    });
                }
                for (point, p) in obj.points.iter().enumerate() {
                    if let Some(p) = p {
                        if p.dim() != d {
                            return Err(ModelError::Dimension {
                                frame: frame.index,
                                track_id: obj.track_id,
                                point,
                                expected: d,
                                found: p.dim(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_point_of_shipped_profiles() {
        // neck is the only joint with four children
        let skel = BuiltinProfile::Skeleton15.profile();
        let deg = skel.out_degrees();
        let neck = SKELETON15_JOINTS.iter().position(|&j| j == "neck").unwrap();
        assert_eq!(deg[neck], 4);
        assert!(deg.iter().enumerate().all(|(i, &d)| i == neck || d <= 2));
        assert_eq!(central_point(&skel), neck);

        assert_eq!(central_point(&BuiltinProfile::Bbox2d.profile()), 0);
        assert_eq!(central_point(&IncidenceProfile::new("e", 2, 2, vec![])), 0);
    }

    #[test]
    fn traversal_small_graphs() {
        let bbox = BuiltinProfile::Bbox2d.profile();
        assert_eq!(traversal_order(&bbox), vec![(0, None), (1, Some(0))]);

        let edgeless = IncidenceProfile::new("e", 3, 2, vec![]);
        assert_eq!(
            traversal_order(&edgeless),
            vec![(0, None), (1, None), (2, None)]
        );

        // listed out of order on purpose
        let star = IncidenceProfile::new("star", 4, 2, vec![(0, 3), (0, 1), (0, 2)]);
        assert_eq!(
            traversal_order(&star),
            vec![(0, None), (1, Some(0)), (2, Some(0)), (3, Some(0))]
        );
    }

    #[test]
    fn traversal_appends_unreachable_points() {
        // 0 and 2 tie on out-degree; 0 wins and 2 -> 3 is unreachable from it
        let p = IncidenceProfile::new("p", 4, 2, vec![(0, 1), (2, 3)]);
        assert_eq!(central_point(&p), 0);
        assert_eq!(
            traversal_order(&p),
            vec![(0, None), (1, Some(0)), (2, None), (3, None)]
        );
    }

    #[test]
    fn validate_reports_every_violation() {
        let p = IncidenceProfile::new("bad", 2, 2, vec![(0, 0), (0, 2), (0, 1), (0, 1)]);
        let v = validate_profile(&p).unwrap_err();
        assert_eq!(v.len(), 3);
        assert!(v[0].to_string().starts_with("self-loop"));
        assert!(v[1].to_string().starts_with("index out of range"));
        assert!(v[2].to_string().starts_with("duplicate edge"));
    }

    #[test]
    fn shipped_profiles_validate() {
        for b in BuiltinProfile::ALL {
            let p = b.profile();
            assert_eq!(validate_profile(&p), Ok(()), "{}", p.name);
        }
        let face = BuiltinProfile::Face68.profile();
        assert_eq!((face.n, face.d), (68, 2));
    }

    #[test]
    fn sequence_validation() {
        let profile = BuiltinProfile::Bbox2d.profile();
        let obj = |id| ObjectInstance::all_visible(id, vec![[0, 0].into(), [1, 1].into()]);
        let mut seq = Sequence::new(
            profile,
            vec![Frame::new(0, vec![obj(1), obj(4)]), Frame::new(2, vec![])],
        );
        assert_eq!(seq.validate(), Ok(()));
        assert_eq!(seq.visible_point_count(), 4);

        seq.frames[0].objects.swap(0, 1);
        assert!(matches!(seq.validate(), Err(ModelError::TrackOrder { .. })));
        seq.frames[0].objects.swap(0, 1);

        seq.frames[1].index = 0;
        assert!(matches!(seq.validate(), Err(ModelError::FrameOrder { .. })));
        seq.frames[1].index = 2;

        seq.frames[0].objects[0].points[1] = Some([1, 1, 1].into());
        assert!(matches!(seq.validate(), Err(ModelError::Dimension { .. })));
    }
}
