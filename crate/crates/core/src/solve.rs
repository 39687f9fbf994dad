//! Objective dispatch with exact arithmetic and a floating-point fallback.

use serde::Serialize;

use crate::buchi::{bounded_buchi_threshold, buchi_threshold, cobuchi_threshold, BuchiSettings};
use crate::error::SolveError;
use crate::fixpoint::{bounded_threshold, limit_threshold, Horizon, LimitSettings, ReachProblem, ThresholdVector};
use crate::format::Game;
use crate::model::{Objective, Player};
use crate::scalar::{Rational, Scalar, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approx,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveSettings {
    pub mode: Mode,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub bit_cap: u64,
    pub max_k: usize,
    pub record_trace: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            mode: Mode::Exact,
            tolerance: 1e-9,
            max_iterations: 1_000_000,
            bit_cap: 2048,
            max_k: 10_000,
            record_trace: false,
        }
    }
}

impl SolveSettings {
    pub fn limit(&self) -> LimitSettings {
        LimitSettings {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            bit_cap: self.bit_cap,
            record_trace: self.record_trace,
        }
    }

    pub fn buchi(&self) -> BuchiSettings {
        BuchiSettings {
            inner: self.limit(),
            tolerance: self.tolerance,
            max_k: self.max_k,
            with_dual: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Thresholds {
    Exact(ThresholdVector<Rational>),
    Approx(ThresholdVector<f64>),
}

impl Thresholds {
    pub fn mode(&self) -> Mode {
        match self {
            Thresholds::Exact(_) => Mode::Exact,
            Thresholds::Approx(_) => Mode::Approx,
        }
    }

    pub fn player(&self) -> Player {
        match self {
            Thresholds::Exact(t) => t.player,
            Thresholds::Approx(t) => t.player,
        }
    }

    pub fn horizon(&self) -> Horizon {
        match self {
            Thresholds::Exact(t) => t.horizon,
            Thresholds::Approx(t) => t.horizon,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            Thresholds::Exact(t) => t.iterations,
            Thresholds::Approx(t) => t.iterations,
        }
    }

    pub fn residual(&self) -> Value {
        match self {
            Thresholds::Exact(t) => t.residual.to_value(),
            Thresholds::Approx(t) => t.residual.to_value(),
        }
    }

    /// Values with the run's tolerance attached in approximate mode.
    pub fn values(&self, tolerance: f64) -> Vec<Value> {
        match self {
            Thresholds::Exact(t) => t.values(),
            Thresholds::Approx(t) => t.values().into_iter().map(|v| v.with_tolerance(tolerance)).collect(),
        }
    }

    pub fn to_f64(&self) -> ThresholdVector<f64> {
        match self {
            Thresholds::Exact(t) => t.to_f64(),
            Thresholds::Approx(t) => t.clone(),
        }
    }

    pub fn trace(&self) -> &[f64] {
        match self {
            Thresholds::Exact(t) => &t.trace,
            Thresholds::Approx(t) => &t.trace,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub thresholds: Thresholds,
    pub warnings: Vec<String>,
}

/// `player`'s thresholds for the game's objective in a fixed scalar type.
pub fn solve_as<S: Scalar>(game: &Game, player: Player, settings: &SolveSettings) -> Result<ThresholdVector<S>, SolveError> {
    let (arena, mech) = (&game.arena, &game.mechanism);
    match &game.objective {
        Objective::Buchi(b) => buchi_threshold(arena, mech, b, player, &settings.buchi()),
        Objective::CoBuchi(c) => cobuchi_threshold(arena, mech, c, player, &settings.buchi()),
        Objective::BoundedBuchi { set, visits } => {
            bounded_buchi_threshold(arena, mech, set, *visits, player, &settings.buchi())
        }
        other => {
            let (problem, horizon) = ReachProblem::<S>::from_objective(arena, other)?;
            match horizon {
                Some(t) => Ok(bounded_threshold(arena, mech, &problem, player, t)),
                None => limit_threshold(arena, mech, &problem, player, &settings.limit()),
            }
        }
    }
}

/// Solves in the requested mode. Exact runs that hit the bit cap are
/// repeated in floating point and reported with a warning.
pub fn solve(game: &Game, player: Player, settings: &SolveSettings) -> Result<Solution, SolveError> {
    match settings.mode {
        Mode::Approx => Ok(Solution {
            thresholds: Thresholds::Approx(solve_as(game, player, settings)?),
            warnings: Vec::new(),
        }),
        Mode::Exact => match solve_as::<Rational>(game, player, settings) {
            Ok(t) => Ok(Solution {
                thresholds: Thresholds::Exact(t),
                warnings: Vec::new(),
            }),
            Err(SolveError::PrecisionCap { iterations, bits }) => {
                let t = solve_as::<f64>(game, player, settings)?;
                Ok(Solution {
                    thresholds: Thresholds::Approx(t),
                    warnings: vec![format!(
                        "exact values exceeded {bits} bits after {iterations} iterations; \
                         result computed in floating point with tolerance {}",
                        settings.tolerance
                    )],
                })
            }
            Err(e) => Err(e),
        },
    }
}
