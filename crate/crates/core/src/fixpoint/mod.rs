//! Threshold operators and reachability, safety and frugal-reachability
//! thresholds, both for a bounded horizon and in the limit.
//!
//! A [`ReachProblem`] names the player trying to reach a target set. The
//! reacher's thresholds are the greatest fixed point of its operator,
//! computed from the all-one start; the other player's thresholds are their
//! complement.

mod operator;

use serde::Serialize;

pub use operator::{operator_inputs, operator_value, threshold_bid, OperatorInputs};
use operator::Context;

use crate::error::SolveError;
use crate::model::{Arena, Mechanism, Objective, Player, VertexId, VertexSet};
use crate::scalar::{Scalar, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Horizon {
    Level(usize),
    Limit,
}

/// Per-vertex thresholds of one player.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdVector<S> {
    pub player: Player,
    pub values: Vec<S>,
    pub horizon: Horizon,
    /// Largest `|Av(f)(v) - f(v)|` off the boundary; zero for finite levels.
    pub residual: S,
    pub iterations: usize,
    /// Step size of each sweep, recorded on request.
    pub trace: Vec<f64>,
}

impl<S: Scalar> ThresholdVector<S> {
    pub fn level(player: Player, values: Vec<S>, t: usize) -> Self {
        ThresholdVector {
            player,
            values,
            horizon: Horizon::Level(t),
            residual: S::zero(),
            iterations: t,
            trace: Vec::new(),
        }
    }

    pub fn get(&self, v: VertexId) -> &S {
        &self.values[v.0]
    }

    /// The other player's thresholds, `1 - f`.
    pub fn complement(&self) -> ThresholdVector<S> {
        ThresholdVector {
            player: self.player.opponent(),
            values: self.values.iter().map(|x| S::one() - x.clone()).collect(),
            horizon: self.horizon,
            residual: self.residual.clone(),
            iterations: self.iterations,
            trace: self.trace.clone(),
        }
    }

    pub fn to_f64(&self) -> ThresholdVector<f64> {
        ThresholdVector {
            player: self.player,
            values: self.values.iter().map(Scalar::approx).collect(),
            horizon: self.horizon,
            residual: self.residual.approx(),
            iterations: self.iterations,
            trace: self.trace.clone(),
        }
    }

    pub fn values(&self) -> Vec<Value> {
        self.values.iter().map(Scalar::to_value).collect()
    }
}

/// Prescribed values at target vertices; `None` marks vertices the
/// operator updates.
#[derive(Clone, Debug, PartialEq)]
pub struct Boundary<S>(pub Vec<Option<S>>);

impl<S: Scalar> Boundary<S> {
    pub fn pinned(&self, v: VertexId) -> Option<&S> {
        self.0[v.0].as_ref()
    }

    /// Start vector: boundary values, `fill` elsewhere.
    pub fn fill(&self, fill: &S) -> Vec<S> {
        self.0.iter().map(|b| b.clone().unwrap_or_else(|| fill.clone())).collect()
    }
}

/// Reach `target`, arriving at `v` with more than `frugal[v]` of the budget.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachProblem<S> {
    pub reacher: Player,
    pub target: VertexSet,
    /// Indexed by vertex; only target entries are read.
    pub frugal: Vec<S>,
}

impl<S: Scalar> ReachProblem<S> {
    pub fn new(arena: &Arena, reacher: Player, target: VertexSet) -> Self {
        ReachProblem {
            reacher,
            target,
            frugal: vec![S::zero(); arena.len()],
        }
    }

    pub fn with_frugal(mut self, v: VertexId, budget: S) -> Self {
        self.frugal[v.0] = budget;
        self
    }

    /// Reachability view of Player 1's objective: reach, safety (Player 2
    /// reaches the complement) and frugal reach, with an optional horizon.
    pub fn from_objective(arena: &Arena, objective: &Objective) -> Result<(Self, Option<usize>), SolveError> {
        let n = arena.len();
        Ok(match objective {
            Objective::Reach(t) => (Self::new(arena, Player::One, t.clone()), None),
            Objective::Safe(s) => (Self::new(arena, Player::Two, s.complement(n)), None),
            Objective::BoundedReach { target, horizon } => {
                (Self::new(arena, Player::One, target.clone()), Some(*horizon))
            }
            Objective::FrugalReach { target, frugal } => {
                let mut p = Self::new(arena, Player::One, target.clone());
                for (v, r) in frugal {
                    p.frugal[v.0] = S::from_rational(r);
                }
                (p, None)
            }
            other => return Err(SolveError::UnsupportedObjective(other.kind().to_string())),
        })
    }

    /// Boundary of `player`: `fr` on the target for the reacher, `1 - fr`
    /// for the opponent.
    pub fn boundary(&self, player: Player) -> Boundary<S> {
        Boundary(
            self.frugal
                .iter()
                .enumerate()
                .map(|(i, fr)| {
                    self.target.contains(VertexId(i)).then(|| {
                        if player == self.reacher {
                            fr.clone()
                        } else {
                            S::one() - fr.clone()
                        }
                    })
                })
                .collect(),
        )
    }

    /// Level-zero values of `player`.
    pub fn base(&self, player: Player) -> Vec<S> {
        let fill = if player == self.reacher { S::one() } else { S::zero() };
        self.boundary(player).fill(&fill)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Exact runs give up once a value needs more bits than this.
    pub bit_cap: u64,
    pub record_trace: bool,
}

impl Default for LimitSettings {
    fn default() -> Self {
        LimitSettings {
            tolerance: 1e-9,
            max_iterations: 1_000_000,
            bit_cap: 2048,
            record_trace: false,
        }
    }
}

/// One synchronous sweep of `Av_player`; boundary entries are copied.
pub fn apply_operator<S: Scalar>(
    f: &[S],
    arena: &Arena,
    mechanism: &Mechanism,
    player: Player,
    boundary: &Boundary<S>,
) -> Vec<S> {
    sweep(&Context::new(arena, mechanism), f, arena, player, boundary)
}

fn sweep<S: Scalar>(ctx: &Context<S>, f: &[S], arena: &Arena, player: Player, boundary: &Boundary<S>) -> Vec<S> {
    arena
        .vertices()
        .map(|v| match boundary.pinned(v) {
            Some(b) => b.clone(),
            None => ctx.value_at(f, arena, player, v),
        })
        .collect()
}

fn sup_distance<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs())
        .fold(S::zero(), S::max_of)
}

/// Largest deviation `|Av(f) - f|` away from the boundary.
pub fn residual<S: Scalar>(f: &[S], arena: &Arena, mechanism: &Mechanism, player: Player, boundary: &Boundary<S>) -> S {
    sup_distance(&apply_operator(f, arena, mechanism, player, boundary), f)
}

/// Levels `0..=t` of `player`'s finite-horizon thresholds.
pub fn level_table<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    problem: &ReachProblem<S>,
    player: Player,
    t: usize,
) -> Vec<Vec<S>> {
    let ctx = Context::new(arena, mechanism);
    let boundary = problem.boundary(player);
    let mut levels = Vec::with_capacity(t + 1);
    levels.push(problem.base(player));
    for _ in 0..t {
        let next = sweep(&ctx, levels.last().expect("nonempty"), arena, player, &boundary);
        levels.push(next);
    }
    levels
}

/// `player`'s thresholds for reaching (or avoiding) the target within `t` steps.
pub fn bounded_threshold<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    problem: &ReachProblem<S>,
    player: Player,
    t: usize,
) -> ThresholdVector<S> {
    let values = level_table(arena, mechanism, problem, player, t).pop().expect("nonempty");
    ThresholdVector::level(player, values, t)
}

fn iterate<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    player: Player,
    boundary: &Boundary<S>,
    start: Vec<S>,
    settings: &LimitSettings,
) -> Result<ThresholdVector<S>, SolveError> {
    let ctx = Context::new(arena, mechanism);
    let mut f = start;
    let mut trace = Vec::new();
    let mut previous_step_small = false;
    for k in 0..settings.max_iterations {
        let next = sweep(&ctx, &f, arena, player, boundary);
        let step = sup_distance(&next, &f);
        if settings.record_trace {
            trace.push(step.approx());
        }
        if S::EXACT {
            if step.is_zero() {
                return Ok(limit_vector(player, f, S::zero(), k, trace));
            }
            let bits = next.iter().map(Scalar::bit_size).max().unwrap_or(0);
            if bits > settings.bit_cap {
                return Err(SolveError::PrecisionCap { iterations: k + 1, bits });
            }
        } else {
            let small = step.negligible(settings.tolerance);
            // `step` is the residual of `f`; the step into `f` was small too.
            if small && previous_step_small {
                return Ok(limit_vector(player, f, step, k, trace));
            }
            previous_step_small = small;
        }
        f = next;
    }
    let res = sup_distance(&sweep(&ctx, &f, arena, player, boundary), &f);
    Err(SolveError::NotConverged {
        iterations: settings.max_iterations,
        residual: res.approx(),
    })
}

fn limit_vector<S: Scalar>(player: Player, values: Vec<S>, residual: S, iterations: usize, trace: Vec<f64>) -> ThresholdVector<S> {
    ThresholdVector {
        player,
        values,
        horizon: Horizon::Limit,
        residual,
        iterations,
        trace,
    }
}

/// Iterates `Av_player` downward from the all-one start.
pub fn greatest_fixed_point<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    player: Player,
    boundary: &Boundary<S>,
    settings: &LimitSettings,
) -> Result<ThresholdVector<S>, SolveError> {
    iterate(arena, mechanism, player, boundary, boundary.fill(&S::one()), settings)
}

/// Iterates `Av_player` upward from the all-zero start.
pub fn least_fixed_point<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    player: Player,
    boundary: &Boundary<S>,
    settings: &LimitSettings,
) -> Result<ThresholdVector<S>, SolveError> {
    iterate(arena, mechanism, player, boundary, boundary.fill(&S::zero()), settings)
}

/// `player`'s limit thresholds. The reacher's vector is the greatest fixed
/// point; the opponent's is its complement.
pub fn limit_threshold<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    problem: &ReachProblem<S>,
    player: Player,
    settings: &LimitSettings,
) -> Result<ThresholdVector<S>, SolveError> {
    let reacher = greatest_fixed_point(arena, mechanism, problem.reacher, &problem.boundary(problem.reacher), settings)?;
    if player == problem.reacher {
        return Ok(reacher);
    }
    let mut out = reacher.complement();
    out.residual = residual(&out.values, arena, mechanism, player, &problem.boundary(player));
    Ok(out)
}

/// Evidence that a vector is the limit threshold of its player.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<S> {
    /// `max |Av(f) - f|` off the boundary.
    pub residual: S,
    /// `max |f(v) + g(v) - 1|` against the independently computed dual `g`.
    pub complementarity_gap: S,
    /// `max |f(v) - b(v)|` over boundary vertices.
    pub boundary_gap: S,
    pub dual: ThresholdVector<S>,
}

impl<S: Scalar> Certificate<S> {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.residual.negligible(tolerance)
            && self.complementarity_gap.negligible(tolerance)
            && self.boundary_gap.negligible(tolerance)
    }
}

/// Re-applies the operator to `f` and computes the dual vector by the
/// opposite iteration (least fixed point for the non-reacher, greatest for
/// the reacher).
pub fn certify_fixed_point<S: Scalar>(
    f: &ThresholdVector<S>,
    arena: &Arena,
    mechanism: &Mechanism,
    problem: &ReachProblem<S>,
    settings: &LimitSettings,
) -> Result<Certificate<S>, SolveError> {
    let player = f.player;
    let boundary = problem.boundary(player);
    let res = residual(&f.values, arena, mechanism, player, &boundary);
    let boundary_gap = arena
        .vertices()
        .filter_map(|v| boundary.pinned(v).map(|b| (f.get(v).clone() - b.clone()).abs()))
        .fold(S::zero(), S::max_of);
    let other = player.opponent();
    let other_boundary = problem.boundary(other);
    let dual = if other == problem.reacher {
        greatest_fixed_point(arena, mechanism, other, &other_boundary, settings)?
    } else {
        least_fixed_point(arena, mechanism, other, &other_boundary, settings)?
    };
    let gap = f
        .values
        .iter()
        .zip(&dual.values)
        .map(|(x, y)| (x.clone() + y.clone() - S::one()).abs())
        .fold(S::zero(), S::max_of);
    Ok(Certificate {
        residual: res,
        complementarity_gap: gap,
        boundary_gap,
        dual,
    })
}
