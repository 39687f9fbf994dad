//! Turn-based games embedded as bidding games with charging, plus a classic
//! attractor-based solver used to cross-check the embedding.

use num_traits::Zero;
use serde_json::{json, Value as Json};

use crate::error::{ModelError, ParseError, ReductionError};
use crate::format::{arena_to_json, objective_from_json, objective_to_json, raw_arena_from_json, Game};
use crate::model::{Arena, Mechanism, Objective, Player, RawVertex, VertexId, VertexSet};
use crate::scalar::{int, Rational};

/// A graph whose vertices are each owned by one player.
#[derive(Clone, Debug, PartialEq)]
pub struct TurnBasedArena {
    /// The underlying graph; charges are ignored.
    pub graph: Arena,
    pub owner: Vec<Player>,
}

impl TurnBasedArena {
    pub fn new(graph: Arena, owner: Vec<Player>) -> Result<Self, ReductionError> {
        if owner.len() != graph.len() {
            return Err(ReductionError::InvalidArena(format!(
                "{} owners for {} vertices",
                owner.len(),
                graph.len()
            )));
        }
        Ok(TurnBasedArena { graph, owner })
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn owner(&self, v: VertexId) -> Player {
        self.owner[v.0]
    }
}

/// A turn-based game file: `{"vertices": [{"id", "owner": 1|2, "succ"}], "objective"}`.
pub fn parse_turn_based(text: &str) -> Result<(TurnBasedArena, Objective), ModelError> {
    let doc: Json = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let vertices = doc.get("vertices").ok_or(ParseError::MissingField("vertices"))?;
    let mut raw = raw_arena_from_json(vertices)?;
    for v in &mut raw.vertices {
        v.r1 = Rational::zero();
        v.r2 = Rational::zero();
    }
    let graph = raw.validate()?;
    let owner = vertices
        .as_array()
        .ok_or(ParseError::Json("vertices must be a list".into()))?
        .iter()
        .map(|v| {
            v.get("owner")
                .and_then(Json::as_u64)
                .and_then(|n| u8::try_from(n).ok())
                .and_then(Player::from_number)
                .ok_or_else(|| ParseError::Json("every vertex needs \"owner\": 1 or 2".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let objective = objective_from_json(doc.get("objective").ok_or(ParseError::MissingField("objective"))?, &graph)?;
    let tb = TurnBasedArena::new(graph, owner).map_err(|e| ParseError::Json(e.to_string()))?;
    Ok((tb, objective))
}

pub fn turn_based_to_json(tb: &TurnBasedArena, objective: &Objective) -> Json {
    let mut doc = arena_to_json(&tb.graph);
    if let Some(list) = doc.as_array_mut() {
        for (v, entry) in list.iter_mut().enumerate() {
            if let Some(obj) = entry.as_object_mut() {
                obj.remove("r1");
                obj.remove("r2");
                obj.insert("owner".into(), json!(tb.owner[v].number()));
            }
        }
    }
    json!({ "vertices": doc, "objective": objective_to_json(objective, &tb.graph) })
}

/// The reduced game together with the indices of its two sinks.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub game: Game,
    /// Sink losing for Player 1.
    pub s1: VertexId,
    /// Sink losing for Player 2.
    pub s2: VertexId,
}

fn fresh_name(taken: &Arena, base: &str) -> String {
    let mut name = base.to_string();
    while taken.id(&name).is_some() {
        name.insert(0, '_');
    }
    name
}

/// Reduction with the owner charge 2.
pub fn reduce_turn_based(tb: &TurnBasedArena, objective: &Objective) -> Result<Reduction, ReductionError> {
    reduce_turn_based_with(tb, objective, int(2))
}

/// Adds sinks `s1`, `s2`, edges from each owned vertex to the sink losing
/// for its owner, and charge `charge` for the owner. The objective keeps its
/// class: `s2` joins the set, `s1` stays out of it.
pub fn reduce_turn_based_with(
    tb: &TurnBasedArena,
    objective: &Objective,
    charge: Rational,
) -> Result<Reduction, ReductionError> {
    let n = tb.len();
    let s1_name = fresh_name(&tb.graph, "s1");
    let s2_name = fresh_name(&tb.graph, "s2");
    let mut vertices: Vec<RawVertex> = tb
        .graph
        .vertices()
        .map(|v| {
            let mut succ: Vec<String> = tb.graph.successors(v).iter().map(|&w| tb.graph.name(w).to_string()).collect();
            let (sink, r1, r2) = match tb.owner(v) {
                Player::One => (&s1_name, charge.clone(), Rational::zero()),
                Player::Two => (&s2_name, Rational::zero(), charge.clone()),
            };
            succ.push(sink.clone());
            RawVertex {
                id: tb.graph.name(v).to_string(),
                succ,
                r1,
                r2,
            }
        })
        .collect();
    for sink in [&s1_name, &s2_name] {
        vertices.push(RawVertex::new(sink, &[sink.as_str()], Rational::zero(), Rational::zero()));
    }
    let arena = crate::model::RawArena { vertices }
        .validate()
        .map_err(|e| ReductionError::InvalidArena(e.to_string()))?;
    let (s1, s2) = (VertexId(n), VertexId(n + 1));
    let mut s2_only = VertexSet::new();
    s2_only.insert(s2);
    let reduced = match objective {
        Objective::Reach(t) => Objective::Reach(t.union(&s2_only)),
        Objective::Safe(s) => Objective::Safe(s.union(&s2_only)),
        Objective::Buchi(b) => Objective::Buchi(b.union(&s2_only)),
        Objective::CoBuchi(c) => Objective::CoBuchi(c.union(&s2_only)),
        other => return Err(ReductionError::UnsupportedObjectiveClass(other.kind().into())),
    };
    let game = Game::new(arena, reduced, Mechanism::Richman).map_err(|e| ReductionError::InvalidArena(e.to_string()))?;
    Ok(Reduction { game, s1, s2 })
}

/// Vertices of `within` from which `player` forces the token into `target`,
/// moving only inside `within`.
fn attractor(tb: &TurnBasedArena, within: &[bool], target: &[bool], player: Player) -> Vec<bool> {
    let mut attr: Vec<bool> = (0..tb.len()).map(|v| within[v] && target[v]).collect();
    loop {
        let mut grew = false;
        for v in tb.graph.vertices() {
            if !within[v.0] || attr[v.0] {
                continue;
            }
            let mut inside = tb.graph.successors(v).iter().filter(|w| within[w.0]);
            let pulled = if tb.owner(v) == player {
                inside.any(|w| attr[w.0])
            } else {
                inside.all(|w| attr[w.0])
            };
            if pulled {
                attr[v.0] = true;
                grew = true;
            }
        }
        if !grew {
            return attr;
        }
    }
}

/// Region where `player` visits `set` infinitely often.
fn buchi_region(tb: &TurnBasedArena, set: &VertexSet, player: Player) -> Vec<bool> {
    let n = tb.len();
    let in_set: Vec<bool> = (0..n).map(|v| set.contains(VertexId(v))).collect();
    let mut game = vec![true; n];
    loop {
        let reach = attractor(tb, &game, &in_set, player);
        let lost: Vec<bool> = (0..n).map(|v| game[v] && !reach[v]).collect();
        if !lost.contains(&true) {
            return game;
        }
        let removed = attractor(tb, &game, &lost, player.opponent());
        for v in 0..n {
            game[v] &= !removed[v];
        }
    }
}

/// Winner of the turn-based game from every vertex.
pub fn solve_turn_based(tb: &TurnBasedArena, objective: &Objective) -> Result<Vec<Player>, ReductionError> {
    let n = tb.len();
    let all = vec![true; n];
    let mask = |s: &VertexSet| (0..n).map(|v| s.contains(VertexId(v))).collect::<Vec<_>>();
    let p1_wins = match objective {
        Objective::Reach(t) => attractor(tb, &all, &mask(t), Player::One),
        Objective::Safe(s) => {
            let bad = mask(&s.complement(n));
            attractor(tb, &all, &bad, Player::Two).into_iter().map(|x| !x).collect()
        }
        Objective::Buchi(b) => buchi_region(tb, b, Player::One),
        Objective::CoBuchi(c) => buchi_region(tb, &c.complement(n), Player::Two)
            .into_iter()
            .map(|x| !x)
            .collect(),
        other => return Err(ReductionError::UnsupportedObjectiveClass(other.kind().into())),
    };
    Ok(p1_wins
        .into_iter()
        .map(|w| if w { Player::One } else { Player::Two })
        .collect())
}
