#![allow(dead_code)]

use chargebid::model::{Arena, Mechanism, Objective, Player, RawArena, RawVertex, VertexId, VertexSet};
use chargebid::reduction::TurnBasedArena;
use chargebid::scalar::ratio;
use chargebid::Rational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn name(i: usize) -> String {
    format!("v{i}")
}

/// Nonempty random successor lists.
fn successors(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=n.min(3));
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            let mut s = all[..k].to_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Charge in `{0, 1/4, ..., max}`, zero half of the time.
fn charge(rng: &mut ChaCha8Rng, max: i64) -> Rational {
    if max == 0 || rng.gen_bool(0.5) {
        Rational::zero()
    } else {
        ratio(rng.gen_range(1..=4 * max), 4)
    }
}

pub fn arena(rng: &mut ChaCha8Rng, max_vertices: usize, max_charge: i64) -> Arena {
    let n = rng.gen_range(1..=max_vertices);
    let succ = successors(rng, n);
    let vertices = succ
        .iter()
        .enumerate()
        .map(|(i, s)| RawVertex {
            id: name(i),
            succ: s.iter().map(|&j| name(j)).collect(),
            r1: charge(rng, max_charge),
            r2: charge(rng, max_charge),
        })
        .collect();
    RawArena { vertices }.validate().expect("generated arena is valid")
}

pub fn mechanism(rng: &mut ChaCha8Rng) -> Mechanism {
    match rng.gen_range(0..3) {
        0 => Mechanism::Richman,
        1 => Mechanism::Poorman,
        _ => Mechanism::taxman(ratio(rng.gen_range(1..=3), 4)).expect("tau in range"),
    }
}

/// Every mechanism in turn, cycling with `i`.
pub fn mechanism_by_index(i: usize) -> Mechanism {
    match i % 3 {
        0 => Mechanism::Richman,
        1 => Mechanism::Poorman,
        _ => Mechanism::taxman(ratio(1, 2)).expect("tau in range"),
    }
}

/// Random subset, nonempty when `nonempty` holds.
pub fn subset(rng: &mut ChaCha8Rng, n: usize, nonempty: bool) -> VertexSet {
    let mut s: VertexSet = (0..n).filter(|_| rng.gen_bool(0.3)).map(VertexId).collect();
    if nonempty && s.is_empty() {
        s.insert(VertexId(rng.gen_range(0..n)));
    }
    s
}

pub fn turn_based(rng: &mut ChaCha8Rng, max_vertices: usize) -> TurnBasedArena {
    let graph = arena(rng, max_vertices, 0);
    let owner = graph
        .vertices()
        .map(|_| if rng.gen_bool(0.5) { Player::One } else { Player::Two })
        .collect();
    TurnBasedArena::new(graph, owner).expect("owners match vertices")
}

pub fn turn_based_objective(rng: &mut ChaCha8Rng, n: usize) -> Objective {
    let s = subset(rng, n, true);
    match rng.gen_range(0..4) {
        0 => Objective::Reach(s),
        1 => Objective::Safe(s),
        2 => Objective::Buchi(s),
        _ => Objective::CoBuchi(s),
    }
}

/// Winner of the play where each player follows a positional choice.
fn lasso_winner(tb: &TurnBasedArena, choice: &[usize], start: VertexId, objective: &Objective) -> Player {
    let n = tb.len();
    let mut seen = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut v = start;
    while seen[v.0] == usize::MAX {
        seen[v.0] = path.len();
        path.push(v);
        v = tb.graph.successors(v)[choice[v.0]];
    }
    let cycle = &path[seen[v.0]..];
    let p1 = match objective {
        Objective::Reach(t) => path.iter().any(|&u| t.contains(u)),
        Objective::Safe(s) => path.iter().all(|&u| s.contains(u)),
        Objective::Buchi(b) => cycle.iter().any(|&u| b.contains(u)),
        Objective::CoBuchi(c) => cycle.iter().all(|&u| c.contains(u)),
        other => panic!("no lasso semantics for {}", other.kind()),
    };
    if p1 {
        Player::One
    } else {
        Player::Two
    }
}

/// Winners by enumerating positional strategies of both players; these
/// objectives are positionally determined.
pub fn brute_force_winners(tb: &TurnBasedArena, objective: &Objective) -> Vec<Player> {
    let n = tb.len();
    let choices = |p: Player| -> Vec<Vec<usize>> {
        let mut out = vec![vec![0; n]];
        for v in tb.graph.vertices() {
            if tb.owner(v) != p {
                continue;
            }
            let k = tb.graph.successors(v).len();
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..k).map(move |i| {
                        let mut c = c.clone();
                        c[v.0] = i;
                        c
                    })
                })
                .collect();
        }
        out
    };
    let (mine, theirs) = (choices(Player::One), choices(Player::Two));
    tb.graph
        .vertices()
        .map(|v| {
            let wins = mine.iter().any(|c1| {
                theirs.iter().all(|c2| {
                    let merged: Vec<usize> = tb
                        .graph
                        .vertices()
                        .map(|u| if tb.owner(u) == Player::One { c1[u.0] } else { c2[u.0] })
                        .collect();
                    lasso_winner(tb, &merged, v, objective) == Player::One
                })
            });
            if wins {
                Player::One
            } else {
                Player::Two
            }
        })
        .collect()
}

/// Solves `A x = b` over the rationals; `None` when `A` is singular.
pub fn gaussian_solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = &a[r][col] / &a[col][col];
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &factor * y;
                }
                let delta = &factor * &b[col];
                b[r] -= delta;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}
