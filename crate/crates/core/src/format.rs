//! JSON reading and writing of game descriptions.
//!
//! ```json
//! {
//!   "vertices": [{"id": "a", "succ": ["a", "b"], "r1": 2, "r2": 0}, ...],
//!   "objective": {"kind": "reach", "set": ["d"]},
//!   "mechanism": {"kind": "taxman", "tau": "1/2"}
//! }
//! ```
//!
//! Numbers may be JSON numbers or strings such as `"3/8"`; both are read
//! exactly. Frugal objectives carry `"fr": {"t": "1/2"}`, bounded ones
//! carry `"bound": k`.

use serde_json::{json, Map, Value as Json};

use crate::error::{ModelError, ParseError};
use crate::model::{Arena, Mechanism, Objective, RawArena, RawVertex, VertexSet};
use crate::scalar::{format_rational, parse_rational, Rational};

/// A complete game: arena, Player 1's objective and the bidding mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    pub arena: Arena,
    pub objective: Objective,
    pub mechanism: Mechanism,
}

impl Game {
    pub fn new(arena: Arena, objective: Objective, mechanism: Mechanism) -> Result<Game, ModelError> {
        objective.validate(&arena)?;
        Ok(Game {
            arena,
            objective,
            mechanism,
        })
    }
}

pub fn parse_game(text: &str) -> Result<Game, ModelError> {
    let doc: Json = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    game_from_json(&doc)
}

pub fn game_from_json(doc: &Json) -> Result<Game, ModelError> {
    let raw = raw_arena_from_json(field(doc, "vertices")?)?;
    let arena = raw.validate()?;
    let objective = match doc.get("objective") {
        Some(o) => objective_from_json(o, &arena)?,
        None => return Err(ParseError::MissingField("objective").into()),
    };
    let mechanism = match doc.get("mechanism") {
        Some(m) => mechanism_from_json(m)?,
        None => Mechanism::Richman,
    };
    Game::new(arena, objective, mechanism)
}

pub fn parse_number(value: &Json) -> Result<Rational, ParseError> {
    match value {
        Json::Number(n) => parse_rational(&n.to_string()),
        Json::String(s) => parse_rational(s),
        other => Err(ParseError::Number(other.to_string())),
    }
}

fn field<'a>(doc: &'a Json, name: &'static str) -> Result<&'a Json, ParseError> {
    doc.get(name).ok_or(ParseError::MissingField(name))
}

fn string_list(value: &Json) -> Result<Vec<String>, ParseError> {
    value
        .as_array()
        .ok_or_else(|| ParseError::Json(format!("expected a list of vertex ids, got {value}")))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| ParseError::Json(format!("vertex id must be a string, got {v}")))
        })
        .collect()
}

pub fn raw_arena_from_json(vertices: &Json) -> Result<RawArena, ParseError> {
    let list = vertices
        .as_array()
        .ok_or_else(|| ParseError::Json("\"vertices\" must be a list".into()))?;
    let mut out = Vec::with_capacity(list.len());
    for v in list {
        let id = field(v, "id")?
            .as_str()
            .ok_or_else(|| ParseError::Json("vertex id must be a string".into()))?
            .to_string();
        let succ = string_list(field(v, "succ")?)?;
        let charge = |name| match v.get(name) {
            Some(x) => parse_number(x),
            None => Ok(Rational::from_integer(0.into())),
        };
        out.push(RawVertex {
            id,
            succ,
            r1: charge("r1")?,
            r2: charge("r2")?,
        });
    }
    Ok(RawArena { vertices: out })
}

fn vertex_set(arena: &Arena, value: &Json) -> Result<VertexSet, ModelError> {
    let names = string_list(value)?;
    arena.set_of(&names).map_err(ModelError::UnknownVertex)
}

pub fn objective_from_json(doc: &Json, arena: &Arena) -> Result<Objective, ModelError> {
    let kind = field(doc, "kind")?
        .as_str()
        .ok_or_else(|| ParseError::Json("objective kind must be a string".into()))?;
    let set = vertex_set(arena, field(doc, "set")?)?;
    let bound = || -> Result<usize, ModelError> {
        field(doc, "bound")?
            .as_u64()
            .map(|b| b as usize)
            .ok_or_else(|| ParseError::Json("bound must be a nonnegative integer".into()).into())
    };
    let objective = match kind {
        "reach" => Objective::Reach(set),
        "safe" | "safety" => Objective::Safe(set),
        "buchi" => Objective::Buchi(set),
        "cobuchi" => Objective::CoBuchi(set),
        "frugal" | "frugal-reach" => {
            let mut frugal = Vec::new();
            if let Some(fr) = doc.get("fr") {
                let map = fr
                    .as_object()
                    .ok_or_else(|| ParseError::Json("\"fr\" must map vertex ids to budgets".into()))?;
                for (name, value) in map {
                    let v = arena.id(name).ok_or_else(|| ModelError::UnknownVertex(name.clone()))?;
                    frugal.push((v, parse_number(value)?));
                }
            }
            frugal.sort_by_key(|(v, _)| *v);
            Objective::FrugalReach { target: set, frugal }
        }
        "bounded-reach" => Objective::BoundedReach {
            target: set,
            horizon: bound()?,
        },
        "bounded-buchi" => Objective::BoundedBuchi {
            set,
            visits: bound()?,
        },
        other => {
            return Err(ParseError::UnknownKind {
                what: "objective",
                value: other.to_string(),
            }
            .into())
        }
    };
    objective.validate(arena)?;
    Ok(objective)
}

pub fn mechanism_from_json(doc: &Json) -> Result<Mechanism, ModelError> {
    let kind = match doc {
        Json::String(s) => s.as_str(),
        _ => field(doc, "kind")?
            .as_str()
            .ok_or_else(|| ParseError::Json("mechanism kind must be a string".into()))?,
    };
    match kind {
        "richman" => Ok(Mechanism::Richman),
        "poorman" => Ok(Mechanism::Poorman),
        "taxman" => Mechanism::taxman(parse_number(field(doc, "tau")?)?),
        other => Err(ParseError::UnknownKind {
            what: "mechanism",
            value: other.to_string(),
        }
        .into()),
    }
}

fn names(arena: &Arena, set: &VertexSet) -> Vec<String> {
    set.iter().map(|v| arena.name(v).to_string()).collect()
}

pub fn objective_to_json(objective: &Objective, arena: &Arena) -> Json {
    let mut doc = Map::new();
    doc.insert("kind".into(), json!(objective.kind()));
    doc.insert("set".into(), json!(names(arena, objective.set())));
    match objective {
        Objective::FrugalReach { frugal, .. } => {
            let fr: Map<String, Json> = frugal
                .iter()
                .map(|(v, r)| (arena.name(*v).to_string(), json!(format_rational(r))))
                .collect();
            doc.insert("fr".into(), Json::Object(fr));
        }
        Objective::BoundedReach { horizon, .. } => {
            doc.insert("bound".into(), json!(horizon));
        }
        Objective::BoundedBuchi { visits, .. } => {
            doc.insert("bound".into(), json!(visits));
        }
        _ => {}
    }
    Json::Object(doc)
}

pub fn mechanism_to_json(mechanism: &Mechanism) -> Json {
    match mechanism {
        Mechanism::Richman => json!({"kind": "richman"}),
        Mechanism::Poorman => json!({"kind": "poorman"}),
        Mechanism::Taxman(t) => json!({"kind": "taxman", "tau": format_rational(t)}),
    }
}

pub fn arena_to_json(arena: &Arena) -> Json {
    let vertices: Vec<Json> = arena
        .to_raw()
        .vertices
        .into_iter()
        .map(|v| {
            json!({
                "id": v.id,
                "succ": v.succ,
                "r1": format_rational(&v.r1),
                "r2": format_rational(&v.r2),
            })
        })
        .collect();
    Json::Array(vertices)
}

pub fn game_to_json(game: &Game) -> Json {
    json!({
        "vertices": arena_to_json(&game.arena),
        "objective": objective_to_json(&game.objective, &game.arena),
        "mechanism": mechanism_to_json(&game.mechanism),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    const SAMPLE: &str = r#"{
        "vertices": [
            {"id": "a", "succ": ["b", "t"], "r1": 0, "r2": 6},
            {"id": "b", "succ": ["a", "t"], "r1": 0.25},
            {"id": "t", "succ": ["t"]}
        ],
        "objective": {"kind": "frugal", "set": ["t"], "fr": {"t": "1/3"}},
        "mechanism": {"kind": "taxman", "tau": 0.1}
    }"#;

    #[test]
    fn reads_numbers_exactly() {
        let g = parse_game(SAMPLE).unwrap();
        let b = g.arena.id("b").unwrap();
        assert_eq!(g.arena.charge(b, crate::model::Player::One), &ratio(1, 4));
        assert_eq!(g.mechanism.tau(), ratio(1, 10));
        assert_eq!(g.objective.frugal_at(g.arena.id("t").unwrap()), ratio(1, 3));
    }

    #[test]
    fn round_trips() {
        let g = parse_game(SAMPLE).unwrap();
        let again = game_from_json(&game_to_json(&g)).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_game(r#"{"vertices": [{"id": "a", "succ": []}], "objective": {"kind": "reach", "set": []}}"#),
            Err(ModelError::Arena(_))
        ));
        assert!(matches!(
            parse_game(r#"{"vertices": [{"id": "a", "succ": ["a"]}], "objective": {"kind": "reach", "set": ["q"]}}"#),
            Err(ModelError::UnknownVertex(_))
        ));
        assert!(matches!(
            parse_game(r#"{"vertices": [{"id": "a", "succ": ["a"]}], "objective": {"kind": "parity", "set": []}}"#),
            Err(ModelError::Parse(ParseError::UnknownKind { .. }))
        ));
        assert!(matches!(
            parse_game(
                r#"{"vertices": [{"id": "a", "succ": ["a"]}], "objective": {"kind": "reach", "set": []},
                    "mechanism": {"kind": "taxman", "tau": 2}}"#
            ),
            Err(ModelError::InvalidTau(_))
        ));
    }
}
