use std::collections::{HashMap, HashSet};

use num_traits::{One, Signed, Zero};

use super::{Player, VertexId, VertexSet};
use crate::error::{ArenaError, ArenaErrors};
use crate::scalar::Rational;

/// Unvalidated vertex description as read from input.
#[derive(Clone, Debug, PartialEq)]
pub struct RawVertex {
    pub id: String,
    pub succ: Vec<String>,
    pub r1: Rational,
    pub r2: Rational,
}

impl RawVertex {
    pub fn new(id: &str, succ: &[&str], r1: Rational, r2: Rational) -> Self {
        RawVertex {
            id: id.to_string(),
            succ: succ.iter().map(|s| s.to_string()).collect(),
            r1,
            r2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawArena {
    pub vertices: Vec<RawVertex>,
}

impl RawArena {
    pub fn validate(&self) -> Result<Arena, ArenaErrors> {
        Arena::validate(self)
    }
}

/// A validated game board: every vertex has at least one successor and all
/// charges are nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct Arena {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    succ: Vec<Vec<VertexId>>,
    r1: Vec<Rational>,
    r2: Vec<Rational>,
}

impl Arena {
    /// Checks `raw` and returns either the arena or every violation found.
    pub fn validate(raw: &RawArena) -> Result<Arena, ArenaErrors> {
        let mut errors = Vec::new();
        if raw.vertices.is_empty() {
            errors.push(ArenaError::EmptyArena);
        }
        let mut index = HashMap::new();
        for (i, v) in raw.vertices.iter().enumerate() {
            if index.insert(v.id.clone(), VertexId(i)).is_some() {
                errors.push(ArenaError::DuplicateVertex(v.id.clone()));
            }
        }
        let mut succ = Vec::with_capacity(raw.vertices.len());
        for v in &raw.vertices {
            if v.succ.is_empty() {
                errors.push(ArenaError::NoSuccessor(v.id.clone()));
            }
            if v.r1.is_negative() {
                errors.push(ArenaError::NegativeCharge {
                    vertex: v.id.clone(),
                    player: Player::One,
                });
            }
            if v.r2.is_negative() {
                errors.push(ArenaError::NegativeCharge {
                    vertex: v.id.clone(),
                    player: Player::Two,
                });
            }
            let mut seen = HashSet::new();
            let mut list = Vec::with_capacity(v.succ.len());
            for u in &v.succ {
                match index.get(u) {
                    None => errors.push(ArenaError::DanglingEdge(v.id.clone(), u.clone())),
                    Some(&id) => {
                        if seen.insert(id) {
                            list.push(id);
                        } else {
                            errors.push(ArenaError::DuplicateSuccessor(v.id.clone(), u.clone()));
                        }
                    }
                }
            }
            succ.push(list);
        }
        if !errors.is_empty() {
            return Err(ArenaErrors(errors));
        }
        Ok(Arena {
            names: raw.vertices.iter().map(|v| v.id.clone()).collect(),
            index,
            succ,
            r1: raw.vertices.iter().map(|v| v.r1.clone()).collect(),
            r2: raw.vertices.iter().map(|v| v.r2.clone()).collect(),
        })
    }

    pub fn to_raw(&self) -> RawArena {
        RawArena {
            vertices: self
                .vertices()
                .map(|v| RawVertex {
                    id: self.name(v).to_string(),
                    succ: self.successors(v).iter().map(|&u| self.name(u).to_string()).collect(),
                    r1: self.r1[v.0].clone(),
                    r2: self.r2[v.0].clone(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.names.len()).map(VertexId)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succ[v.0]
    }

    pub fn charge(&self, v: VertexId, player: Player) -> &Rational {
        match player {
            Player::One => &self.r1[v.0],
            Player::Two => &self.r2[v.0],
        }
    }

    /// `1 + R1(v) + R2(v)`, the normalization factor at `v`.
    pub fn charge_total(&self, v: VertexId) -> Rational {
        Rational::one() + &self.r1[v.0] + &self.r2[v.0]
    }

    pub fn has_charges(&self) -> bool {
        self.r1.iter().chain(&self.r2).any(|r| !r.is_zero())
    }

    /// Resolves names into a vertex set.
    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<VertexSet, String> {
        names
            .iter()
            .map(|n| self.id(n.as_ref()).ok_or_else(|| n.as_ref().to_string()))
            .collect()
    }

    /// Same arena with `delta` added to Player 1's charges.
    pub fn with_added_charges(&self, delta: &[(VertexId, Rational)]) -> Arena {
        let mut out = self.clone();
        for (v, d) in delta {
            out.r1[v.0] += d;
        }
        out
    }

    /// Same arena with an extra edge; used to build figure variants.
    pub fn with_successors(&self, v: VertexId, succ: Vec<VertexId>) -> Arena {
        let mut out = self.clone();
        assert!(!succ.is_empty());
        out.succ[v.0] = succ;
        out
    }
}
