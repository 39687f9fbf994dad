//! Bid-and-move strategies read off threshold vectors, and a simulator that
//! checks their budget invariant against adversaries.
//!
//! From budget above `f(v)` a player bids
//! `(f(v+) - f(v-)) / ((f(v+) - f(v-) - 1) tau + 2)` and moves to `v-`;
//! whatever happens, the next budget is above `f` at the next vertex.

mod simulate;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use simulate::{certify_invariant, simulate, AdversaryReport, InvariantReport, Monitor, Participant, PlayRecord, Step, Verdict};

use crate::buchi::buchi_player_threshold;
use crate::error::SolveError;
use crate::fixpoint::{level_table, threshold_bid, ReachProblem, ThresholdVector};
use crate::format::Game;
use crate::model::{Action, Arena, Configuration, Mechanism, Objective, Player, VertexSet};
use crate::scalar::Scalar;
use crate::solve::{solve_as, SolveSettings};

/// The threshold bid and move at a post-charge configuration, with the bid
/// capped at the acting player's budget.
pub fn derive_action<S: Scalar>(
    f: &[S],
    config: &Configuration<S>,
    arena: &Arena,
    mechanism: &Mechanism,
    player: Player,
) -> Action<S> {
    let (bid, inputs) = threshold_bid(f, arena, mechanism, config.vertex);
    let budget = config.budget(player);
    Action {
        bid: if bid > budget { budget } else { bid.clamp_unit() },
        target: inputs.v_minus,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyMode {
    /// Reacher: bid with the smallest level the budget beats.
    ReachLevelIndexed,
    /// Derive every action from the limit vector.
    Limit,
    /// Frugal reach towards `B` off `B`, limit vector on `B`.
    BuchiTwoPhase,
}

/// A threshold strategy over floating-point vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdStrategy {
    pub player: Player,
    pub mode: StrategyMode,
    /// Limit thresholds of `player`; the budget invariant is checked against these.
    pub limit: Vec<f64>,
    /// Finite-horizon (frugal) reach levels `0..=L` for the level-indexed phases.
    pub levels: Vec<Vec<f64>>,
    /// The Büchi set in two-phase mode.
    pub set: VertexSet,
}

/// Level tables stop once consecutive levels agree to this precision.
const LEVEL_PRECISION: f64 = 1e-13;
const MAX_LEVELS: usize = 200_000;

fn reach_levels(arena: &Arena, mechanism: &Mechanism, problem: &ReachProblem<f64>, player: Player, horizon: Option<usize>) -> Vec<Vec<f64>> {
    if let Some(t) = horizon {
        return level_table(arena, mechanism, problem, player, t);
    }
    let mut levels = level_table(arena, mechanism, problem, player, 0);
    let boundary = problem.boundary(player);
    while levels.len() < MAX_LEVELS {
        let last = levels.last().expect("nonempty");
        let next = crate::fixpoint::apply_operator(last, arena, mechanism, player, &boundary);
        let step = next.iter().zip(last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        levels.push(next);
        if step < LEVEL_PRECISION {
            break;
        }
    }
    levels
}

impl ThresholdStrategy {
    pub fn limit(player: Player, f: &ThresholdVector<f64>) -> Self {
        ThresholdStrategy {
            player,
            mode: StrategyMode::Limit,
            limit: f.values.clone(),
            levels: Vec::new(),
            set: VertexSet::new(),
        }
    }

    /// The strategy of `player` suggested by the game's objective: level
    /// indexed for a reacher, two-phase for a Büchi player, limit-vector
    /// play otherwise.
    pub fn for_game(game: &Game, player: Player, settings: &SolveSettings) -> Result<Self, SolveError> {
        let (arena, mech) = (&game.arena, &game.mechanism);
        let buchi = match &game.objective {
            Objective::Buchi(b) => Some((b.clone(), Player::One)),
            Objective::CoBuchi(c) => Some((c.complement(arena.len()), Player::Two)),
            _ => None,
        };
        if let Some((set, buchi_player)) = buchi {
            let g: ThresholdVector<f64> = buchi_player_threshold(arena, mech, &set, buchi_player, &settings.buchi())?;
            if player != buchi_player {
                return Ok(Self::limit(player, &g.complement()));
            }
            let mut problem = ReachProblem::new(arena, buchi_player, set.clone());
            for v in set.iter() {
                problem.frugal[v.0] = g.values[v.0];
            }
            return Ok(ThresholdStrategy {
                player,
                mode: StrategyMode::BuchiTwoPhase,
                limit: g.values,
                levels: reach_levels(arena, mech, &problem, player, None),
                set,
            });
        }
        if let Objective::BoundedBuchi { .. } = game.objective {
            return Err(SolveError::UnsupportedObjective(game.objective.kind().into()));
        }
        let (problem, horizon) = ReachProblem::<f64>::from_objective(arena, &game.objective)?;
        if player != problem.reacher {
            if horizon.is_some() {
                return Err(SolveError::UnsupportedObjective(game.objective.kind().into()));
            }
            let f = solve_as::<f64>(game, player, settings)?;
            return Ok(Self::limit(player, &f));
        }
        let levels = reach_levels(arena, mech, &problem, player, horizon);
        let limit = match horizon {
            Some(_) => levels.last().expect("nonempty").clone(),
            None => solve_as::<f64>(game, player, settings)?.values,
        };
        Ok(ThresholdStrategy {
            player,
            mode: StrategyMode::ReachLevelIndexed,
            limit,
            levels,
            set: VertexSet::new(),
        })
    }

    /// Smallest level whose threshold at `v` is below `budget`.
    pub fn level_for(&self, v: crate::model::VertexId, budget: f64) -> Option<usize> {
        self.levels.iter().position(|level| budget > level[v.0])
    }

    /// Action at the post-charge configuration `post`, given the budget
    /// held before charging.
    pub fn action(&self, arena: &Arena, mechanism: &Mechanism, pre_budget: f64, post: &Configuration<f64>) -> Action<f64> {
        let v = post.vertex;
        let indexed = match self.mode {
            StrategyMode::Limit => false,
            StrategyMode::ReachLevelIndexed => true,
            StrategyMode::BuchiTwoPhase => !self.set.contains(v),
        };
        if indexed {
            if let Some(t) = self.level_for(v, pre_budget).filter(|&t| t > 0) {
                return derive_action(&self.levels[t - 1], post, arena, mechanism, self.player);
            }
        }
        derive_action(&self.limit, post, arena, mechanism, self.player)
    }
}

/// Opponents used to test a strategy's invariant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    /// Uniform bid in `[0, budget]` and a uniform successor.
    UniformRandom,
    /// Bids its whole budget.
    AllIn,
    /// Bids exactly what the strategy bids.
    Copycat,
    /// Bids `epsilon / 2` below the strategy's bid.
    Undercut(f64),
}

impl Adversary {
    pub fn suite(epsilon: f64) -> [Adversary; 4] {
        [
            Adversary::UniformRandom,
            Adversary::AllIn,
            Adversary::Copycat,
            Adversary::Undercut(epsilon),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Adversary::UniformRandom => "uniform-random",
            Adversary::AllIn => "all-in",
            Adversary::Copycat => "copycat",
            Adversary::Undercut(_) => "undercut",
        }
    }

    /// Reply to the strategy's action `seen`; deterministic adversaries
    /// move to the strategy player's worst successor `v+` under `f`.
    #[allow(clippy::too_many_arguments)]
    pub fn action(
        &self,
        f: &[f64],
        post: &Configuration<f64>,
        arena: &Arena,
        mechanism: &Mechanism,
        me: Player,
        seen: &Action<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Action<f64> {
        let budget = post.budget(me);
        let succ = arena.successors(post.vertex);
        let (_, inputs) = threshold_bid(f, arena, mechanism, post.vertex);
        let (bid, target) = match self {
            Adversary::UniformRandom => (rng.gen::<f64>() * budget, succ[rng.gen_range(0..succ.len())]),
            Adversary::AllIn => (budget, inputs.v_plus),
            Adversary::Copycat => (seen.bid, inputs.v_plus),
            Adversary::Undercut(eps) => ((seen.bid - eps / 2.0).max(0.0), inputs.v_plus),
        };
        Action {
            bid: bid.min(budget).max(0.0),
            target,
        }
    }
}
