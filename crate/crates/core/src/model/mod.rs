//! Arenas, mechanisms, objectives and the one-step game semantics.

mod arena;
mod game;
mod mechanism;
mod objective;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use arena::{Arena, RawArena, RawVertex};
pub use game::{
    charge_and_normalize, prefix_winner, resolve_bids, Action, Configuration, Phase, PrefixOutcome,
    TieBreak,
};
pub use mechanism::Mechanism;
pub use objective::Objective;

/// Dense vertex index; ordering follows declaration order in the arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Player> {
        match n {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Player{}", self.number())
    }
}

/// A set of vertices, iterated in index order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(BTreeSet<VertexId>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: VertexId) -> bool {
        self.0.remove(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.0.iter().copied()
    }

    /// Complement relative to `0..n`.
    pub fn complement(&self, n: usize) -> VertexSet {
        (0..n).map(VertexId).filter(|v| !self.contains(*v)).collect()
    }

    pub fn all(n: usize) -> VertexSet {
        (0..n).map(VertexId).collect()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.iter().chain(other.iter()).collect()
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}
