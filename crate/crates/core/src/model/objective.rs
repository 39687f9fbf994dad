use num_traits::{One, Zero};

use super::{Arena, VertexId, VertexSet};
use crate::error::ModelError;
use crate::scalar::{format_rational, Rational};

/// Player 1's winning condition; Player 2 wins the complement.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    Reach(VertexSet),
    Safe(VertexSet),
    Buchi(VertexSet),
    CoBuchi(VertexSet),
    /// Reach `target`, holding strictly more than `frugal[v]` on first
    /// arrival at `v`. Vertices absent from the list need budget above 0.
    FrugalReach {
        target: VertexSet,
        frugal: Vec<(VertexId, Rational)>,
    },
    BoundedReach {
        target: VertexSet,
        horizon: usize,
    },
    BoundedBuchi {
        set: VertexSet,
        visits: usize,
    },
}

impl Objective {
    pub fn kind(&self) -> &'static str {
        match self {
            Objective::Reach(_) => "reach",
            Objective::Safe(_) => "safe",
            Objective::Buchi(_) => "buchi",
            Objective::CoBuchi(_) => "cobuchi",
            Objective::FrugalReach { .. } => "frugal",
            Objective::BoundedReach { .. } => "bounded-reach",
            Objective::BoundedBuchi { .. } => "bounded-buchi",
        }
    }

    pub fn set(&self) -> &VertexSet {
        match self {
            Objective::Reach(s) | Objective::Safe(s) | Objective::Buchi(s) | Objective::CoBuchi(s) => s,
            Objective::FrugalReach { target, .. } | Objective::BoundedReach { target, .. } => target,
            Objective::BoundedBuchi { set, .. } => set,
        }
    }

    /// Checks that named vertices exist and frugal budgets lie in `[0,1]`.
    pub fn validate(&self, arena: &Arena) -> Result<(), ModelError> {
        for v in self.set().iter() {
            if v.index() >= arena.len() {
                return Err(ModelError::UnknownVertex(format!("#{}", v.index())));
            }
        }
        if let Objective::FrugalReach { target, frugal } = self {
            for (v, value) in frugal {
                if v.index() >= arena.len() {
                    return Err(ModelError::UnknownVertex(format!("#{}", v.index())));
                }
                if !target.contains(*v) {
                    return Err(ModelError::FrugalOffTarget(arena.name(*v).to_string()));
                }
                if *value < Rational::zero() || *value > Rational::one() {
                    return Err(ModelError::FrugalOutOfRange {
                        vertex: arena.name(*v).to_string(),
                        value: format_rational(value),
                    });
                }
            }
        }
        Ok(())
    }

    /// Frugal budget at `v` (zero when unspecified).
    pub fn frugal_at(&self, v: VertexId) -> Rational {
        match self {
            Objective::FrugalReach { frugal, .. } => frugal
                .iter()
                .find(|(u, _)| *u == v)
                .map(|(_, r)| r.clone())
                .unwrap_or_else(Rational::zero),
            _ => Rational::zero(),
        }
    }
}
