use serde::Serialize;

use super::{Arena, Mechanism, Objective, Player, VertexId};
use crate::error::GameError;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Phase {
    PreCharge,
    PostCharge,
}

/// Token position plus Player 1's share of the (normalized) total budget.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<S> {
    pub vertex: VertexId,
    pub budget1: S,
    pub phase: Phase,
}

impl<S: Scalar> Configuration<S> {
    pub fn new(vertex: VertexId, budget1: S) -> Self {
        Configuration {
            vertex,
            budget1,
            phase: Phase::PreCharge,
        }
    }

    pub fn budget(&self, player: Player) -> S {
        match player {
            Player::One => self.budget1.clone(),
            Player::Two => S::one() - self.budget1.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Action<S> {
    pub bid: S,
    pub target: VertexId,
}

/// Who moves when both bids are equal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum TieBreak {
    #[default]
    Player1,
    Player2,
}

/// Charges both players at the current vertex and renormalizes:
/// `B1' = (B1 + R1(v)) / (1 + R1(v) + R2(v))`.
pub fn charge_and_normalize<S: Scalar>(
    config: &Configuration<S>,
    arena: &Arena,
) -> Result<Configuration<S>, GameError> {
    if config.phase != Phase::PreCharge {
        return Err(GameError::WrongPhase);
    }
    let v = config.vertex;
    let r1 = S::from_rational(arena.charge(v, Player::One));
    let total = S::from_rational(&arena.charge_total(v));
    Ok(Configuration {
        vertex: v,
        budget1: ((config.budget1.clone() + r1) / total).clamp_unit(),
        phase: Phase::PostCharge,
    })
}

/// Resolves one bidding round from a post-charge configuration.
///
/// Returns the next pre-charge configuration and the player who moved.
pub fn resolve_bids<S: Scalar>(
    config: &Configuration<S>,
    arena: &Arena,
    a1: &Action<S>,
    a2: &Action<S>,
    mechanism: &Mechanism,
    ties: TieBreak,
) -> Result<(Configuration<S>, Player), GameError> {
    if config.phase != Phase::PostCharge {
        return Err(GameError::WrongPhase);
    }
    let succ = arena.successors(config.vertex);
    for (player, action) in [(Player::One, a1), (Player::Two, a2)] {
        if action.bid < S::zero() {
            return Err(GameError::NegativeBid(player));
        }
        if action.bid > config.budget(player) {
            return Err(GameError::BidExceedsBudget(player));
        }
        if !succ.contains(&action.target) {
            return Err(GameError::IllegalMove(player));
        }
    }
    let winner = if a1.bid > a2.bid {
        Player::One
    } else if a2.bid > a1.bid {
        Player::Two
    } else {
        match ties {
            TieBreak::Player1 => Player::One,
            TieBreak::Player2 => Player::Two,
        }
    };
    let tau = S::from_rational(&mechanism.tau());
    let one = S::one();
    let b1 = config.budget1.clone();
    let (target, budget1) = match winner {
        Player::One => {
            let bid = a1.bid.clone();
            let denom = one.clone() - tau * bid.clone();
            // The only zero denominator is a poorman winner bidding the
            // entire unit budget; the opponent is already broke then.
            let next = if denom.is_zero() { one } else { (b1 - bid) / denom };
            (a1.target, next)
        }
        Player::Two => {
            let bid = a2.bid.clone();
            let denom = one.clone() - tau.clone() * bid.clone();
            let next = if denom.is_zero() {
                S::zero()
            } else {
                (b1 + (one - tau) * bid) / denom
            };
            (a2.target, next)
        }
    };
    Ok((
        Configuration {
            vertex: target,
            budget1: budget1.clamp_unit(),
            phase: Phase::PreCharge,
        },
        winner,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrefixOutcome {
    Player1Won,
    Player2Won,
    Undecided,
}

/// Decides a finite path prefix where that is possible without budgets.
pub fn prefix_winner(prefix: &[VertexId], objective: &Objective) -> Result<PrefixOutcome, GameError> {
    if prefix.is_empty() {
        return Err(GameError::EmptyPrefix);
    }
    Ok(match objective {
        Objective::Reach(t) => {
            if prefix.iter().any(|v| t.contains(*v)) {
                PrefixOutcome::Player1Won
            } else {
                PrefixOutcome::Undecided
            }
        }
        Objective::BoundedReach { target, horizon } => {
            if prefix.iter().take(horizon + 1).any(|v| target.contains(*v)) {
                PrefixOutcome::Player1Won
            } else if prefix.len() > *horizon {
                PrefixOutcome::Player2Won
            } else {
                PrefixOutcome::Undecided
            }
        }
        Objective::Safe(s) => {
            if prefix.iter().all(|v| s.contains(*v)) {
                PrefixOutcome::Undecided
            } else {
                PrefixOutcome::Player2Won
            }
        }
        Objective::BoundedBuchi { set, visits } => {
            if prefix.iter().filter(|v| set.contains(**v)).count() >= *visits {
                PrefixOutcome::Player1Won
            } else {
                PrefixOutcome::Undecided
            }
        }
        Objective::Buchi(_) | Objective::CoBuchi(_) => {
            return Err(GameError::UnboundedObjectiveNeedsInvariantCheck)
        }
        Objective::FrugalReach { .. } => return Err(GameError::BudgetDependentObjective),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::VertexSet;
    use crate::scalar::{int, ratio, Rational};

    fn post(v: usize, b: Rational) -> Configuration<Rational> {
        Configuration {
            vertex: VertexId(v),
            budget1: b,
            phase: Phase::PostCharge,
        }
    }

    fn act(bid: Rational, v: usize) -> Action<Rational> {
        Action {
            bid,
            target: VertexId(v),
        }
    }

    #[test]
    fn charging_at_fig1a_a() {
        let (arena, _, _) = fixtures::fig1a();
        let c = Configuration::new(VertexId(0), ratio(1, 10));
        let post = charge_and_normalize(&c, &arena).unwrap();
        assert_eq!(post.budget1, ratio(7, 10));
        assert_eq!(post.phase, Phase::PostCharge);
        assert_eq!(charge_and_normalize(&post, &arena), Err(GameError::WrongPhase));
    }

    #[test]
    fn zero_charges_are_identity() {
        let (arena, _, _) = fixtures::fig1a();
        let c = Configuration::new(VertexId(1), ratio(3, 7));
        assert_eq!(charge_and_normalize(&c, &arena).unwrap().budget1, ratio(3, 7));
    }

    #[test]
    fn fig1c_charge_at_a_from_full_budget() {
        let (arena, _, _) = fixtures::fig1c();
        let c = Configuration::new(VertexId(0), int(1));
        assert_eq!(charge_and_normalize(&c, &arena).unwrap().budget1, ratio(1, 7));
    }

    #[test]
    fn richman_step_from_the_walkthrough() {
        let (arena, mech, _) = fixtures::fig1a();
        let (next, winner) = resolve_bids(
            &post(0, ratio(7, 10)),
            &arena,
            &act(ratio(1, 16), 0),
            &act(ratio(1, 16), 1),
            &mech,
            TieBreak::Player1,
        )
        .unwrap();
        assert_eq!(winner, Player::One);
        assert_eq!(next.vertex, VertexId(0));
        assert_eq!(next.budget1, ratio(51, 80));
        assert_eq!(next.budget1, ratio(6375, 10000));
    }

    #[test]
    fn poorman_and_taxman_substitution() {
        let (arena, _, _) = fixtures::fig1a();
        let (next, _) = resolve_bids(
            &post(1, ratio(3, 5)),
            &arena,
            &act(ratio(1, 5), 2),
            &act(int(0), 0),
            &Mechanism::Poorman,
            TieBreak::Player1,
        )
        .unwrap();
        assert_eq!(next.budget1, ratio(1, 2));
        let (next, _) = resolve_bids(
            &post(1, ratio(1, 2)),
            &arena,
            &act(ratio(1, 5), 2),
            &act(ratio(1, 10), 0),
            &Mechanism::Taxman(ratio(1, 2)),
            TieBreak::Player1,
        )
        .unwrap();
        assert_eq!(next.budget1, ratio(1, 3));
    }

    #[test]
    fn player_two_wins_and_pays() {
        let (arena, _, _) = fixtures::fig1a();
        let (next, winner) = resolve_bids(
            &post(1, ratio(1, 5)),
            &arena,
            &act(int(0), 0),
            &act(ratio(1, 4), 2),
            &Mechanism::Richman,
            TieBreak::Player1,
        )
        .unwrap();
        assert_eq!(winner, Player::Two);
        assert_eq!(next.vertex, VertexId(2));
        assert_eq!(next.budget1, ratio(9, 20));
    }

    #[test]
    fn ties_follow_the_flag() {
        let (arena, mech, _) = fixtures::fig1a();
        let c = post(1, ratio(1, 2));
        let a1 = act(ratio(1, 4), 0);
        let a2 = act(ratio(1, 4), 2);
        let (n1, w1) = resolve_bids(&c, &arena, &a1, &a2, &mech, TieBreak::Player1).unwrap();
        let (n2, w2) = resolve_bids(&c, &arena, &a1, &a2, &mech, TieBreak::Player2).unwrap();
        assert_eq!((w1, n1.vertex), (Player::One, VertexId(0)));
        assert_eq!((w2, n2.vertex), (Player::Two, VertexId(2)));
    }

    #[test]
    fn illegal_actions() {
        let (arena, mech, _) = fixtures::fig1a();
        let c = post(1, ratio(1, 5));
        let err = resolve_bids(&c, &arena, &act(ratio(1, 2), 0), &act(int(0), 0), &mech, TieBreak::Player1);
        assert_eq!(err.unwrap_err(), GameError::BidExceedsBudget(Player::One));
        let err = resolve_bids(&c, &arena, &act(int(0), 0), &act(int(0), 4), &mech, TieBreak::Player1);
        assert_eq!(err.unwrap_err(), GameError::IllegalMove(Player::Two));
        let pre = Configuration::new(VertexId(1), ratio(1, 5));
        let err = resolve_bids(&pre, &arena, &act(int(0), 0), &act(int(0), 0), &mech, TieBreak::Player1);
        assert_eq!(err.unwrap_err(), GameError::WrongPhase);
    }

    #[test]
    fn prefix_outcomes() {
        let set = |ids: &[usize]| ids.iter().map(|&i| VertexId(i)).collect::<VertexSet>();
        let path = |ids: &[usize]| ids.iter().map(|&i| VertexId(i)).collect::<Vec<_>>();
        // fig1a ids: a=0 b=1 c=2 d=3 e=4
        assert_eq!(
            prefix_winner(&path(&[1, 2, 3]), &Objective::Reach(set(&[3]))),
            Ok(PrefixOutcome::Player1Won)
        );
        assert_eq!(
            prefix_winner(&path(&[0, 1]), &Objective::Safe(set(&[0, 1, 2]))),
            Ok(PrefixOutcome::Undecided)
        );
        assert_eq!(
            prefix_winner(&path(&[0, 1, 4]), &Objective::Safe(set(&[0, 1]))),
            Ok(PrefixOutcome::Player2Won)
        );
        assert_eq!(
            prefix_winner(
                &path(&[0, 3, 0, 3]),
                &Objective::BoundedBuchi {
                    set: set(&[3]),
                    visits: 2
                }
            ),
            Ok(PrefixOutcome::Player1Won)
        );
        assert_eq!(
            prefix_winner(
                &path(&[0, 1, 0]),
                &Objective::BoundedReach {
                    target: set(&[3]),
                    horizon: 2
                }
            ),
            Ok(PrefixOutcome::Player2Won)
        );
        assert_eq!(
            prefix_winner(&path(&[0]), &Objective::Buchi(set(&[3]))),
            Err(GameError::UnboundedObjectiveNeedsInvariantCheck)
        );
        assert_eq!(prefix_winner(&[], &Objective::Reach(set(&[3]))), Err(GameError::EmptyPrefix));
    }
}
