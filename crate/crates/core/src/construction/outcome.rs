//! Strategy outcomes and node paths in the tree `T ⊆ Λ^{<ω}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `Λ = {∞ < ⋯ < w_1 < w_0 < stop < wait}`. The first two kinds belong to
/// `D_i` nodes, the last two to `G_e` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Infinite,
    /// `w_x`: the argument `x` did not converge during the stage.
    Finite(u64),
    Stop,
    Wait,
}

impl Outcome {
    fn rank(self) -> (u8, std::cmp::Reverse<u64>) {
        match self {
            Outcome::Infinite => (0, std::cmp::Reverse(0)),
            Outcome::Finite(x) => (1, std::cmp::Reverse(x)),
            Outcome::Stop => (2, std::cmp::Reverse(0)),
            Outcome::Wait => (3, std::cmp::Reverse(0)),
        }
    }

    pub fn is_finitary_d(self) -> bool {
        matches!(self, Outcome::Finite(_))
    }
}

impl Ord for Outcome {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Outcome {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Infinite => f.write_str("inf"),
            Outcome::Finite(x) => write!(f, "w{x}"),
            Outcome::Stop => f.write_str("s"),
            Outcome::Wait => f.write_str("w"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown outcome token {0:?}")]
pub struct ParseOutcomeError(pub String);

impl FromStr for Outcome {
    type Err = ParseOutcomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" => Ok(Outcome::Infinite),
            "s" => Ok(Outcome::Stop),
            "w" => Ok(Outcome::Wait),
            _ => s
                .strip_prefix('w')
                .and_then(|x| x.parse().ok())
                .map(Outcome::Finite)
                .ok_or_else(|| ParseOutcomeError(s.to_string())),
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A node of the tree, named by the outcomes leading to it. Length `2k`
/// carries `D_k`, length `2k+1` carries `G_k`.
pub type NodePath = Vec<Outcome>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    D(u32),
    G(u32),
}

impl Requirement {
    pub fn of_len(len: usize) -> Self {
        let k = (len / 2) as u32;
        if len.is_multiple_of(2) {
            Requirement::D(k)
        } else {
            Requirement::G(k)
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::D(i) => write!(f, "D{i}"),
            Requirement::G(e) => write!(f, "G{e}"),
        }
    }
}

pub fn path_to_string(path: &[Outcome]) -> String {
    path.iter()
        .map(|o| o.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

pub fn path_from_str(s: &str) -> Result<NodePath, ParseOutcomeError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split('.').map(str::parse).collect()
}

/// `a` is to the left of `b`: at their first difference `a`'s outcome is
/// smaller.
pub fn is_left_of(a: &[Outcome], b: &[Outcome]) -> bool {
    a.iter()
        .zip(b)
        .find(|(x, y)| x != y)
        .is_some_and(|(x, y)| x < y)
}

pub fn is_prefix_path(a: &[Outcome], b: &[Outcome]) -> bool {
    a.len() <= b.len() && a == &b[..a.len()]
}
