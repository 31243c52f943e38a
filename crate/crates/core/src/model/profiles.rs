use super::IncidenceProfile;

/// Joint names of the `skeleton15` profile, by index.
pub const SKELETON15_JOINTS: [&str; 15] = [
    "head",
    "neck",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_hip",
    "left_knee",
    "left_ankle",
    "chest",
];

/// Profiles shared by every encoder and decoder. The `u8` id is the value
/// stored in the container header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinProfile {
    Bbox2d = 0,
    Box3d = 1,
    Skeleton15 = 2,
    Face68 = 3,
}

impl BuiltinProfile {
    pub const ALL: [BuiltinProfile; 4] = [
        BuiltinProfile::Bbox2d,
        BuiltinProfile::Box3d,
        BuiltinProfile::Skeleton15,
        BuiltinProfile::Face68,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bbox2d => "bbox2d",
            Self::Box3d => "box3d",
            Self::Skeleton15 => "skeleton15",
            Self::Face68 => "face68",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Matches a profile value against the shipped ones.
    pub fn identify(profile: &IncidenceProfile) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.profile() == *profile)
    }

    pub fn profile(self) -> IncidenceProfile {
        match self {
            // top-left -> bottom-right corner
            Self::Bbox2d => IncidenceProfile::new(self.name(), 2, 2, vec![(0, 1)]),
            // min corner -> max corner
            Self::Box3d => IncidenceProfile::new(self.name(), 2, 3, vec![(0, 1)]),
            Self::Skeleton15 => IncidenceProfile::new(self.name(), 15, 2, skeleton15_edges()),
            Self::Face68 => IncidenceProfile::new(self.name(), 68, 2, face68_edges()),
        }
    }
}

fn skeleton15_edges() -> Vec<(usize, usize)> {
    vec![
        (1, 0),
        (1, 2),
        (1, 5),
        (1, 14),
        (2, 3),
        (3, 4),
        (5, 6),
        (6, 7),
        (14, 8),
        (14, 11),
        (8, 9),
        (9, 10),
        (11, 12),
        (12, 13),
    ]
}

fn chain(edges: &mut Vec<(usize, usize)>, path: &[usize]) {
    edges.extend(path.windows(2).map(|w| (w[0], w[1])));
}

/// 68-point landmark layout: jaw 0-16, brows 17-26, nose 27-35, eyes 36-47,
/// lips 48-67. Each part is a chain; the top of the nose bridge (27) links
/// the brows, eyes and nose, the nose base feeds the lips, and the lower lip
/// feeds the chin.
fn face68_edges() -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    chain(&mut e, &[27, 28, 29, 30]);
    e.extend([(27, 21), (27, 22), (27, 39), (27, 42)]);
    chain(&mut e, &[21, 20, 19, 18, 17]);
    chain(&mut e, &[22, 23, 24, 25, 26]);
    chain(&mut e, &[39, 40, 41, 36, 37, 38]);
    chain(&mut e, &[42, 43, 44, 45, 46, 47]);
    e.push((30, 33));
    chain(&mut e, &[33, 32, 31]);
    chain(&mut e, &[33, 34, 35]);
    e.push((33, 51));
    chain(&mut e, &[51, 50, 49, 48, 59, 58, 57]);
    chain(&mut e, &[51, 52, 53, 54, 55, 56]);
    e.push((51, 62));
    chain(&mut e, &[62, 61, 60, 67, 66]);
    chain(&mut e, &[62, 63, 64, 65]);
    e.push((57, 8));
    chain(&mut e, &[8, 7, 6, 5, 4, 3, 2, 1, 0]);
    chain(&mut e, &[8, 9, 10, 11, 12, 13, 14, 15, 16]);
    e
}
