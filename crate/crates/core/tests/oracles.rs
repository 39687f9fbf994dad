mod common;

use chargebid::fixpoint::{apply_operator, limit_threshold, LimitSettings, ReachProblem};
use chargebid::model::{Arena, Mechanism, Player, VertexId};
use chargebid::reduction::{reduce_turn_based, solve_turn_based};
use chargebid::solve::{solve, SolveSettings};
use chargebid::Rational;
use num_traits::{One, Zero};

use common::{brute_force_winners, gaussian_solve, rng};

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// Richman update at `v` before clamping, for the successors `hi`, `lo`.
fn raw(arena: &Arena, f: &[Rational], v: VertexId, hi: VertexId, lo: VertexId) -> Rational {
    (&f[hi.0] + &f[lo.0]) * half() * arena.charge_total(v) - arena.charge(v, Player::One)
}

fn extreme(arena: &Arena, f: &[Rational], v: VertexId, max: bool) -> VertexId {
    let succ = arena.successors(v);
    let mut best = succ[0];
    for &w in succ {
        if (max && f[w.0] > f[best.0]) || (!max && f[w.0] < f[best.0]) {
            best = w;
        }
    }
    best
}

/// Re-derives the interior values of a Richman limit vector from the
/// linear system its clamp pattern and successor choices determine.
#[test]
fn richman_limits_solve_their_linear_systems() {
    let mut r = rng(11);
    let mut nonsingular = 0;
    for _ in 0..300 {
        let arena = common::arena(&mut r, 8, 4);
        let target = common::subset(&mut r, arena.len(), true);
        let problem = ReachProblem::<Rational>::new(&arena, Player::One, target.clone());
        let Ok(f) = limit_threshold(&arena, &Mechanism::Richman, &problem, Player::One, &LimitSettings::default()) else {
            continue;
        };
        let f = f.values;
        let interior: Vec<VertexId> = arena
            .vertices()
            .filter(|&v| !target.contains(v))
            .filter(|&v| {
                let x = raw(&arena, &f, v, extreme(&arena, &f, v, true), extreme(&arena, &f, v, false));
                x > Rational::zero() && x < Rational::one()
            })
            .collect();
        let index = |v: VertexId| interior.iter().position(|&u| u == v);
        let m = interior.len();
        let mut a = vec![vec![Rational::zero(); m]; m];
        let mut b = vec![Rational::zero(); m];
        for (i, &v) in interior.iter().enumerate() {
            let k = arena.charge_total(v) * half();
            a[i][i] += Rational::one();
            b[i] = -arena.charge(v, Player::One).clone();
            for w in [extreme(&arena, &f, v, true), extreme(&arena, &f, v, false)] {
                match index(w) {
                    Some(j) => a[i][j] -= &k,
                    None => b[i] += &k * &f[w.0],
                }
            }
        }
        if let Some(x) = gaussian_solve(a, b) {
            nonsingular += 1;
            for (i, &v) in interior.iter().enumerate() {
                assert_eq!(x[i], f[v.0], "vertex {} of {:?}", v.0, arena.to_raw());
            }
        }
    }
    assert!(nonsingular > 100, "only {nonsingular} nonsingular systems");
}

/// All fixed points found by enumerating clamp patterns and successor
/// choices lie below the computed (greatest) one.
#[test]
fn limit_dominates_every_enumerated_fixed_point() {
    let mut r = rng(12);
    let mut found_self = 0;
    for _ in 0..150 {
        let arena = common::arena(&mut r, 3, 3);
        let n = arena.len();
        let target = common::subset(&mut r, n, true);
        let problem = ReachProblem::<Rational>::new(&arena, Player::One, target.clone());
        let boundary = problem.boundary(Player::One);
        let Ok(f) = limit_threshold(&arena, &Mechanism::Richman, &problem, Player::One, &LimitSettings::default()) else {
            continue;
        };
        let f = f.values;
        let free: Vec<VertexId> = arena.vertices().filter(|&v| !target.contains(v)).collect();
        // Per free vertex: (clamp 0 | clamp 1 | interior) x v+ x v-.
        let options: Vec<Vec<(u8, VertexId, VertexId)>> = free
            .iter()
            .map(|&v| {
                let s = arena.successors(v);
                let mut o = vec![(0, s[0], s[0]), (1, s[0], s[0])];
                for &hi in s {
                    for &lo in s {
                        o.push((2, hi, lo));
                    }
                }
                o
            })
            .collect();
        let total: usize = options.iter().map(Vec::len).product();
        let mut hit_f = false;
        for code in 0..total {
            let mut c = code;
            let pick: Vec<(u8, VertexId, VertexId)> = options
                .iter()
                .map(|o| {
                    let p = o[c % o.len()];
                    c /= o.len();
                    p
                })
                .collect();
            let m = free.len();
            let mut a = vec![vec![Rational::zero(); m]; m];
            let mut b = vec![Rational::zero(); m];
            for (i, &(kind, hi, lo)) in pick.iter().enumerate() {
                a[i][i] = Rational::one();
                match kind {
                    0 => {}
                    1 => b[i] = Rational::one(),
                    _ => {
                        let v = free[i];
                        let k = arena.charge_total(v) * half();
                        b[i] = -arena.charge(v, Player::One).clone();
                        // Target successors contribute their boundary value 0.
                        for w in [hi, lo] {
                            if let Some(j) = free.iter().position(|&u| u == w) {
                                a[i][j] -= &k;
                            }
                        }
                    }
                }
            }
            let Some(x) = gaussian_solve(a, b) else { continue };
            let mut g = boundary.fill(&Rational::zero());
            for (i, &v) in free.iter().enumerate() {
                g[v.0] = x[i].clone();
            }
            if apply_operator(&g, &arena, &Mechanism::Richman, Player::One, &boundary) != g {
                continue;
            }
            for v in arena.vertices() {
                assert!(g[v.0] <= f[v.0], "fixed point {g:?} above limit {f:?}");
            }
            hit_f |= g == f;
        }
        found_self += hit_f as usize;
    }
    assert!(found_self > 50);
}

#[test]
fn turn_based_solver_matches_positional_enumeration() {
    let mut r = rng(13);
    for _ in 0..300 {
        let tb = common::turn_based(&mut r, 6);
        let objective = common::turn_based_objective(&mut r, tb.len());
        assert_eq!(
            solve_turn_based(&tb, &objective).unwrap(),
            brute_force_winners(&tb, &objective),
            "{:?} {objective:?}",
            tb.graph.to_raw()
        );
    }
}

#[test]
fn reduced_thresholds_match_positional_enumeration() {
    let mut r = rng(14);
    for _ in 0..100 {
        let tb = common::turn_based(&mut r, 5);
        let objective = common::turn_based_objective(&mut r, tb.len());
        let reduction = reduce_turn_based(&tb, &objective).unwrap();
        let t = solve(&reduction.game, Player::One, &SolveSettings::default()).unwrap().thresholds.to_f64();
        for (v, w) in brute_force_winners(&tb, &objective).into_iter().enumerate() {
            let expected = if w == Player::One { 0.0 } else { 1.0 };
            assert!((t.values[v] - expected).abs() < 1e-8, "{objective:?} at {v}: {}", t.values[v]);
        }
    }
}

/// Frugal budgets shift the boundary: with all of the target pinned at
/// `x`, a vertex whose only successor is the target sits at `clamp(x K - R1)`.
#[test]
fn frugal_boundary_by_hand() {
    let arena = chargebid::model::RawArena {
        vertices: vec![
            chargebid::model::RawVertex::new("u", &["t"], Rational::one(), Rational::one()),
            chargebid::model::RawVertex::new("t", &["t"], Rational::zero(), Rational::zero()),
        ],
    }
    .validate()
    .unwrap();
    let target = arena.set_of(&["t"]).unwrap();
    for (x, expected) in [(Rational::new(1.into(), 2.into()), Rational::new(1.into(), 2.into())), (Rational::one(), Rational::one())] {
        let problem = ReachProblem::new(&arena, Player::One, target.clone()).with_frugal(VertexId(1), x.clone());
        let f = limit_threshold(&arena, &Mechanism::Richman, &problem, Player::One, &LimitSettings::default()).unwrap();
        // K = 3, R1 = 1: clamp(3x - 1).
        assert_eq!(f.values[0], expected);
        assert_eq!(f.values[1], x);
    }
}
