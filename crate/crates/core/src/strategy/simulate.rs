use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value as Json};

use super::{Adversary, ThresholdStrategy};
use crate::error::GameError;
use crate::format::Game;
use crate::model::{
    charge_and_normalize, prefix_winner, resolve_bids, Action, Arena, Configuration, Mechanism, Objective, Player,
    PrefixOutcome, TieBreak, VertexId,
};

/// One bidding round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    pub vertex: VertexId,
    /// Player 1's budget before and after charging.
    pub budget1: f64,
    pub charged1: f64,
    pub bid1: f64,
    pub target1: VertexId,
    pub bid2: f64,
    pub target2: VertexId,
    pub winner: Player,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Player1Won,
    Player2Won,
    /// The monitored player's budget did not exceed its threshold after `step`.
    InvariantViolation { step: usize },
    Truncated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlayRecord {
    pub steps: Vec<Step>,
    pub final_vertex: VertexId,
    pub final_budget1: f64,
    pub verdict: Verdict,
}

impl PlayRecord {
    pub fn path(&self) -> Vec<VertexId> {
        let mut p: Vec<VertexId> = self.steps.iter().map(|s| s.vertex).collect();
        p.push(self.final_vertex);
        p
    }

    pub fn visits(&self, v: VertexId) -> bool {
        self.path().contains(&v)
    }

    /// Structured form with vertex names.
    pub fn to_json(&self, arena: &Arena) -> Json {
        let name = |v: VertexId| arena.name(v).to_string();
        let steps: Vec<Json> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "vertex": name(s.vertex),
                    "budget1": s.budget1,
                    "charged1": s.charged1,
                    "bid1": s.bid1,
                    "target1": name(s.target1),
                    "bid2": s.bid2,
                    "target2": name(s.target2),
                    "winner": s.winner.number(),
                })
            })
            .collect();
        let mut verdict = serde_json::to_value(self.verdict).expect("serializable");
        verdict["final_vertex"] = json!(name(self.final_vertex));
        verdict["final_budget1"] = json!(self.final_budget1);
        verdict["steps"] = Json::Array(steps);
        verdict
    }
}

/// Checks after every round that `player`'s budget exceeds `f` at the new vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Monitor {
    pub player: Player,
    pub f: Vec<f64>,
}

/// A participant in a simulated play.
#[derive(Clone, Copy, Debug)]
pub enum Participant<'a> {
    Strategy(&'a ThresholdStrategy),
    /// Reacts to the other side's action, using `reference` (the other
    /// player's thresholds) to pick its target.
    Adversary(Adversary, &'a [f64]),
}

fn decide(objective: &Objective, path: &[VertexId], budget1: f64) -> PrefixOutcome {
    let last = *path.last().expect("nonempty");
    match objective {
        Objective::Reach(_) | Objective::Safe(_) => prefix_winner(&[last], objective).unwrap_or(PrefixOutcome::Undecided),
        Objective::BoundedReach { .. } | Objective::BoundedBuchi { .. } => {
            prefix_winner(path, objective).unwrap_or(PrefixOutcome::Undecided)
        }
        Objective::FrugalReach { target, .. } => {
            if !target.contains(last) {
                PrefixOutcome::Undecided
            } else if budget1 > crate::scalar::Scalar::approx(&objective.frugal_at(last)) {
                PrefixOutcome::Player1Won
            } else {
                PrefixOutcome::Player2Won
            }
        }
        Objective::Buchi(_) | Objective::CoBuchi(_) => PrefixOutcome::Undecided,
    }
}

/// Plays at most `step_limit` rounds from `start` (pre-charge).
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    game: &Game,
    p1: Participant<'_>,
    p2: Participant<'_>,
    start: Configuration<f64>,
    step_limit: usize,
    seed: u64,
    ties: TieBreak,
    monitor: Option<&Monitor>,
) -> Result<PlayRecord, GameError> {
    let (arena, mech) = (&game.arena, &game.mechanism);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = start;
    let mut path = vec![config.vertex];
    let mut steps = Vec::new();
    let finish = |steps, config: &Configuration<f64>, verdict| PlayRecord {
        steps,
        final_vertex: config.vertex,
        final_budget1: config.budget1,
        verdict,
    };
    match decide(&game.objective, &path, config.budget1) {
        PrefixOutcome::Player1Won => return Ok(finish(steps, &config, Verdict::Player1Won)),
        PrefixOutcome::Player2Won => return Ok(finish(steps, &config, Verdict::Player2Won)),
        PrefixOutcome::Undecided => {}
    }
    for i in 0..step_limit {
        let pre_budget1 = config.budget1;
        let post = charge_and_normalize(&config, arena)?;
        let (a1, a2) = actions(p1, p2, arena, mech, pre_budget1, &post, &mut rng);
        let (next, winner) = resolve_bids(&post, arena, &a1, &a2, mech, ties)?;
        steps.push(Step {
            vertex: post.vertex,
            budget1: pre_budget1,
            charged1: post.budget1,
            bid1: a1.bid,
            target1: a1.target,
            bid2: a2.bid,
            target2: a2.target,
            winner,
        });
        config = next;
        path.push(config.vertex);
        if let Some(m) = monitor {
            let above = config.budget(m.player) > m.f[config.vertex.0];
            if !above {
                return Ok(finish(steps, &config, Verdict::InvariantViolation { step: i }));
            }
        }
        match decide(&game.objective, &path, config.budget1) {
            PrefixOutcome::Player1Won => return Ok(finish(steps, &config, Verdict::Player1Won)),
            PrefixOutcome::Player2Won => return Ok(finish(steps, &config, Verdict::Player2Won)),
            PrefixOutcome::Undecided => {}
        }
    }
    Ok(finish(steps, &config, Verdict::Truncated))
}

fn actions(
    p1: Participant<'_>,
    p2: Participant<'_>,
    arena: &Arena,
    mech: &Mechanism,
    pre_budget1: f64,
    post: &Configuration<f64>,
    rng: &mut ChaCha8Rng,
) -> (Action<f64>, Action<f64>) {
    let own = |p: Participant<'_>, player: Player| match p {
        Participant::Strategy(s) => {
            let pre = if player == Player::One { pre_budget1 } else { 1.0 - pre_budget1 };
            Some(s.action(arena, mech, pre, post))
        }
        Participant::Adversary(..) => None,
    };
    let idle = Action {
        bid: 0.0,
        target: arena.successors(post.vertex)[0],
    };
    let s1 = own(p1, Player::One);
    let s2 = own(p2, Player::Two);
    let mut reply = |p: Participant<'_>, player: Player, seen: Option<&Action<f64>>| match p {
        Participant::Adversary(adv, reference) => {
            adv.action(reference, post, arena, mech, player, seen.unwrap_or(&idle), rng)
        }
        Participant::Strategy(_) => unreachable!(),
    };
    match (s1, s2) {
        (Some(a1), Some(a2)) => (a1, a2),
        (Some(a1), None) => {
            let a2 = reply(p2, Player::Two, Some(&a1));
            (a1, a2)
        }
        (None, Some(a2)) => {
            let a1 = reply(p1, Player::One, Some(&a2));
            (a1, a2)
        }
        (None, None) => {
            let a1 = reply(p1, Player::One, None);
            let a2 = reply(p2, Player::Two, None);
            (a1, a2)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryReport {
    pub adversary: Adversary,
    pub trials: usize,
    pub violations: usize,
    /// Plays decided in favour of the strategy's player.
    pub wins: usize,
    pub losses: usize,
    pub truncated: usize,
    /// The first few violating plays.
    pub examples: Vec<PlayRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub player: Player,
    pub epsilon: f64,
    pub adversaries: Vec<AdversaryReport>,
}

impl InvariantReport {
    pub fn violations(&self) -> usize {
        self.adversaries.iter().map(|a| a.violations).sum()
    }
}

const KEPT_EXAMPLES: usize = 3;

/// Runs `trials` plays per adversary, starting each at one of `starts`
/// with the strategy's player holding `limit(v) + epsilon`, and checks the
/// budget invariant against `invariant` after every round.
#[allow(clippy::too_many_arguments)]
pub fn certify_invariant(
    game: &Game,
    strategy: &ThresholdStrategy,
    invariant: &[f64],
    epsilon: f64,
    adversaries: &[Adversary],
    starts: &[VertexId],
    trials: usize,
    step_limit: usize,
    seed: u64,
) -> Result<InvariantReport, GameError> {
    let player = strategy.player;
    let monitor = Monitor {
        player,
        f: invariant.to_vec(),
    };
    let mut reports = Vec::with_capacity(adversaries.len());
    for (a, adv) in adversaries.iter().enumerate() {
        let mut report = AdversaryReport {
            adversary: *adv,
            trials,
            violations: 0,
            wins: 0,
            losses: 0,
            truncated: 0,
            examples: Vec::new(),
        };
        for i in 0..trials {
            let v = starts[i % starts.len()];
            let own = (invariant[v.0] + epsilon).min(1.0);
            let budget1 = if player == Player::One { own } else { 1.0 - own };
            let me = Participant::Strategy(strategy);
            let them = Participant::Adversary(*adv, &strategy.limit);
            let (p1, p2) = if player == Player::One { (me, them) } else { (them, me) };
            let trial_seed = seed.wrapping_add((a * trials + i) as u64);
            let record = simulate(
                game,
                p1,
                p2,
                Configuration::new(v, budget1),
                step_limit,
                trial_seed,
                TieBreak::Player1,
                Some(&monitor),
            )?;
            match record.verdict {
                Verdict::InvariantViolation { .. } => {
                    report.violations += 1;
                    if report.examples.len() < KEPT_EXAMPLES {
                        report.examples.push(record);
                    }
                }
                Verdict::Truncated => report.truncated += 1,
                Verdict::Player1Won | Verdict::Player2Won => {
                    let won = (record.verdict == Verdict::Player1Won) == (player == Player::One);
                    if won {
                        report.wins += 1;
                    } else {
                        report.losses += 1;
                    }
                }
            }
        }
        reports.push(report);
    }
    Ok(InvariantReport {
        player,
        epsilon,
        adversaries: reports,
    })
}
