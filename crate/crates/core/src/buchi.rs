//! Büchi and co-Büchi thresholds as a nested fixed point.
//!
//! Level `k` of the Büchi player's vector `g1` is zero everywhere at `k = 0`.
//! On `B` it is zero at `k = 1` and one operator step from level `k - 1`
//! afterwards. Off `B` it is the frugal-reachability threshold for reaching
//! `B` with the level-`k` values on `B` as frugal budgets. The opponent's
//! vector `g2` follows the dual recursion. The limit is reached once the
//! values on `B` stop changing.

use crate::error::SolveError;
use crate::fixpoint::{
    greatest_fixed_point, least_fixed_point, residual, Boundary, Horizon, LimitSettings, ThresholdVector,
};
use crate::model::{Arena, Mechanism, Player, VertexId, VertexSet};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct BuchiSettings {
    pub inner: LimitSettings,
    /// Outer-loop tolerance on `B` in approximate mode.
    pub tolerance: f64,
    pub max_k: usize,
    /// Also compute the opponent's vector by its own recursion.
    pub with_dual: bool,
}

impl Default for BuchiSettings {
    fn default() -> Self {
        BuchiSettings {
            inner: LimitSettings::default(),
            tolerance: 1e-9,
            max_k: 10_000,
            with_dual: false,
        }
    }
}

/// Vectors of one level of the recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct BuchiLevel<S> {
    pub k: usize,
    /// The Büchi player's thresholds for visiting `B` at least `k` times.
    pub g1: ThresholdVector<S>,
    /// The opponent's thresholds, when requested.
    pub g2: Option<ThresholdVector<S>>,
    /// Frugal-reachability limit computations performed so far.
    pub inner_solves: usize,
}

/// Iterates the level recursion of `buchi_player` on `set`.
pub struct BuchiLevels<'a, S> {
    arena: &'a Arena,
    mechanism: &'a Mechanism,
    set: &'a VertexSet,
    buchi_player: Player,
    settings: &'a BuchiSettings,
    current: Option<BuchiLevel<S>>,
}

impl<'a, S: Scalar> BuchiLevels<'a, S> {
    pub fn new(
        arena: &'a Arena,
        mechanism: &'a Mechanism,
        set: &'a VertexSet,
        buchi_player: Player,
        settings: &'a BuchiSettings,
    ) -> Self {
        BuchiLevels {
            arena,
            mechanism,
            set,
            buchi_player,
            settings,
            current: None,
        }
    }

    fn on_set(&self, f: impl Fn(VertexId) -> Option<S>) -> Boundary<S> {
        Boundary(
            self.arena
                .vertices()
                .map(|v| if self.set.contains(v) { f(v) } else { None })
                .collect(),
        )
    }

    /// Level `k` on `B` from level `k - 1` (or the base values).
    fn set_values(&self, prev: Option<&ThresholdVector<S>>, player: Player, base: S) -> Boundary<S> {
        match prev {
            Some(p) => {
                let free = Boundary(vec![None; self.arena.len()]);
                let next = crate::fixpoint::apply_operator(&p.values, self.arena, self.mechanism, player, &free);
                self.on_set(|v| Some(next[v.0].clone()))
            }
            None => self.on_set(|_| Some(base.clone())),
        }
    }

    /// Advances to the next level.
    pub fn step(&mut self) -> Result<&BuchiLevel<S>, SolveError> {
        let n = self.arena.len();
        let bp = self.buchi_player;
        let next = match &self.current {
            None => BuchiLevel {
                k: 0,
                g1: level_vector(bp, vec![S::zero(); n], 0),
                g2: self
                    .settings
                    .with_dual
                    .then(|| level_vector(bp.opponent(), vec![S::one(); n], 0)),
                inner_solves: 0,
            },
            Some(cur) => {
                let k = cur.k + 1;
                let b1 = self.set_values((k > 1).then_some(&cur.g1), bp, S::zero());
                let g1 = greatest_fixed_point(self.arena, self.mechanism, bp, &b1, &self.settings.inner)?;
                let mut solves = cur.inner_solves + 1;
                let g2 = match &cur.g2 {
                    Some(prev) => {
                        let b2 = self.set_values((k > 1).then_some(prev), bp.opponent(), S::one());
                        let g2 = least_fixed_point(self.arena, self.mechanism, bp.opponent(), &b2, &self.settings.inner)?;
                        solves += 1;
                        Some(level_vector(bp.opponent(), g2.values, k))
                    }
                    None => None,
                };
                BuchiLevel {
                    k,
                    g1: level_vector(bp, g1.values, k),
                    g2,
                    inner_solves: solves,
                }
            }
        };
        self.current = Some(next);
        Ok(self.current.as_ref().expect("just set"))
    }
}

fn level_vector<S: Scalar>(player: Player, values: Vec<S>, k: usize) -> ThresholdVector<S> {
    ThresholdVector::level(player, values, k)
}

/// Levels `0..=k` of the Büchi player's recursion.
pub fn buchi_levels<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    set: &VertexSet,
    buchi_player: Player,
    k: usize,
    settings: &BuchiSettings,
) -> Result<Vec<BuchiLevel<S>>, SolveError> {
    let mut levels = BuchiLevels::new(arena, mechanism, set, buchi_player, settings);
    let mut out = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        out.push(levels.step()?.clone());
    }
    Ok(out)
}

/// `player`'s threshold for Player 1 visiting `set` at least `k` times.
pub fn bounded_buchi_threshold<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    set: &VertexSet,
    k: usize,
    player: Player,
    settings: &BuchiSettings,
) -> Result<ThresholdVector<S>, SolveError> {
    let settings = BuchiSettings {
        with_dual: player == Player::Two,
        ..settings.clone()
    };
    let level = buchi_levels(arena, mechanism, set, Player::One, k, &settings)?
        .pop()
        .expect("nonempty");
    Ok(match player {
        Player::One => level.g1,
        Player::Two => level.g2.expect("dual requested"),
    })
}

fn sup_on<S: Scalar>(set: &VertexSet, a: &[S], b: &[S]) -> S {
    set.iter()
        .map(|v| (a[v.0].clone() - b[v.0].clone()).abs())
        .fold(S::zero(), S::max_of)
}

/// Limit thresholds of `buchi_player` for visiting `set` infinitely often.
pub fn buchi_player_threshold<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    set: &VertexSet,
    buchi_player: Player,
    settings: &BuchiSettings,
) -> Result<ThresholdVector<S>, SolveError> {
    let free = Boundary(vec![None; arena.len()]);
    if set.is_empty() {
        let values = vec![S::one(); arena.len()];
        let res = residual(&values, arena, mechanism, buchi_player, &free);
        return Ok(ThresholdVector {
            player: buchi_player,
            values,
            horizon: Horizon::Limit,
            residual: res,
            iterations: 0,
            trace: Vec::new(),
        });
    }
    let settings = BuchiSettings {
        with_dual: false,
        ..settings.clone()
    };
    let mut levels = BuchiLevels::<S>::new(arena, mechanism, set, buchi_player, &settings);
    levels.step()?;
    let mut prev = levels.step()?.g1.values.clone();
    let mut trace = Vec::new();
    for _ in 2..=settings.max_k {
        let level = levels.step()?;
        let change = sup_on(set, &level.g1.values, &prev);
        if settings.inner.record_trace {
            trace.push(change.approx());
        }
        if change.negligible(settings.tolerance) {
            let values = level.g1.values.clone();
            let res = residual(&values, arena, mechanism, buchi_player, &free);
            return Ok(ThresholdVector {
                player: buchi_player,
                values,
                horizon: Horizon::Limit,
                residual: res,
                iterations: level.k,
                trace,
            });
        }
        if S::EXACT {
            let bits = set.iter().map(|v| level.g1.values[v.0].bit_size()).max().unwrap_or(0);
            if bits > settings.inner.bit_cap {
                return Err(SolveError::PrecisionCap {
                    iterations: level.k,
                    bits,
                });
            }
        }
        prev = level.g1.values.clone();
    }
    Err(SolveError::NotConverged {
        iterations: settings.max_k,
        residual: residual(&prev, arena, mechanism, buchi_player, &free).approx(),
    })
}

fn from_perspective<S: Scalar>(
    buchi: ThresholdVector<S>,
    player: Player,
    arena: &Arena,
    mechanism: &Mechanism,
) -> ThresholdVector<S> {
    if buchi.player == player {
        return buchi;
    }
    let mut out = buchi.complement();
    let free = Boundary(vec![None; arena.len()]);
    out.residual = residual(&out.values, arena, mechanism, player, &free);
    out
}

/// `player`'s threshold for Player 1's objective Büchi(`set`).
pub fn buchi_threshold<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    set: &VertexSet,
    player: Player,
    settings: &BuchiSettings,
) -> Result<ThresholdVector<S>, SolveError> {
    let g = buchi_player_threshold(arena, mechanism, set, Player::One, settings)?;
    Ok(from_perspective(g, player, arena, mechanism))
}

/// `player`'s threshold for Player 1's objective co-Büchi(`set`), i.e.
/// Player 2 visiting the complement of `set` only finitely often.
pub fn cobuchi_threshold<S: Scalar>(
    arena: &Arena,
    mechanism: &Mechanism,
    set: &VertexSet,
    player: Player,
    settings: &BuchiSettings,
) -> Result<ThresholdVector<S>, SolveError> {
    let outside = set.complement(arena.len());
    let g = buchi_player_threshold(arena, mechanism, &outside, Player::Two, settings)?;
    Ok(from_perspective(g, player, arena, mechanism))
}
