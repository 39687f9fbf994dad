//! Lowering Player 1's threshold at a vertex by adding Player 1 charges.

use std::cmp::Ordering;

use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value as Json};

use crate::error::RepairError;
use crate::format::Game;
use crate::model::{Player, VertexId};
use crate::scalar::{format_rational, ratio, Rational, Value};
use crate::solve::{solve, SolveSettings};

/// Added Player 1 charge per vertex.
pub type Delta = Vec<(VertexId, Rational)>;

#[derive(Clone, Debug, PartialEq)]
pub struct RepairInstance {
    pub game: Game,
    pub vertex: VertexId,
    /// Upper bound on the total added charge.
    pub budget: Rational,
    /// The repair succeeds once the threshold at `vertex` is at most this.
    pub target: Rational,
}

impl RepairInstance {
    pub fn new(game: Game, vertex: VertexId, budget: Rational) -> Result<Self, RepairError> {
        Self::with_target(game, vertex, budget, ratio(1, 2))
    }

    pub fn with_target(game: Game, vertex: VertexId, budget: Rational, target: Rational) -> Result<Self, RepairError> {
        if budget.is_negative() {
            return Err(RepairError::InadmissibleRepair(format!("budget {} is negative", format_rational(&budget))));
        }
        if target.is_negative() || target > ratio(1, 1) {
            return Err(RepairError::InadmissibleRepair(format!(
                "target {} outside [0,1]",
                format_rational(&target)
            )));
        }
        if vertex.0 >= game.arena.len() {
            return Err(RepairError::InadmissibleRepair(format!("no vertex {}", vertex.0)));
        }
        Ok(RepairInstance {
            game,
            vertex,
            budget,
            target,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepairSettings {
    /// Charges are multiples of this step.
    pub grid: Rational,
    /// Most vertices that receive charge.
    pub support: usize,
    /// Largest number of candidates the search may enumerate.
    pub cap: u128,
    pub solve: SolveSettings,
}

impl Default for RepairSettings {
    fn default() -> Self {
        RepairSettings {
            grid: ratio(1, 4),
            support: 3,
            cap: 1_000_000,
            solve: SolveSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchStats {
    pub candidates: usize,
    pub grid: Rational,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepairResult {
    pub delta: Delta,
    /// Player 1's threshold at the instance vertex after the repair.
    pub achieved: Value,
    /// A separate recomputation agreed with `achieved`.
    pub verified: bool,
    pub stats: SearchStats,
}

impl RepairResult {
    pub fn to_json(&self, game: &Game) -> Json {
        let delta: serde_json::Map<String, Json> = self
            .delta
            .iter()
            .map(|(v, d)| (game.arena.name(*v).to_string(), json!(format_rational(d))))
            .collect();
        json!({
            "delta": delta,
            "achieved": self.achieved,
            "verified": self.verified,
            "candidates": self.stats.candidates,
            "grid": format_rational(&self.stats.grid),
            "support": self.stats.support,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RepairOutcome {
    Repaired(RepairResult),
    /// No grid allocation reached the target; carries the best one seen.
    NoRepairFound(RepairResult),
}

impl RepairOutcome {
    pub fn result(&self) -> &RepairResult {
        match self {
            RepairOutcome::Repaired(r) | RepairOutcome::NoRepairFound(r) => r,
        }
    }

    pub fn is_repaired(&self) -> bool {
        matches!(self, RepairOutcome::Repaired(_))
    }
}

fn check_admissible(instance: &RepairInstance, delta: &[(VertexId, Rational)]) -> Result<(), RepairError> {
    let mut total = Rational::zero();
    for (v, d) in delta {
        if v.0 >= instance.game.arena.len() {
            return Err(RepairError::InadmissibleRepair(format!("no vertex {}", v.0)));
        }
        if d.is_negative() {
            return Err(RepairError::InadmissibleRepair(format!(
                "negative charge {} at {}",
                format_rational(d),
                instance.game.arena.name(*v)
            )));
        }
        total += d;
    }
    if total > instance.budget {
        return Err(RepairError::InadmissibleRepair(format!(
            "total {} exceeds the budget {}",
            format_rational(&total),
            format_rational(&instance.budget)
        )));
    }
    Ok(())
}

fn thresholds(instance: &RepairInstance, delta: &[(VertexId, Rational)], settings: &SolveSettings) -> Result<Vec<Value>, RepairError> {
    let game = Game {
        arena: instance.game.arena.with_added_charges(delta),
        ..instance.game.clone()
    };
    let solution = solve(&game, Player::One, settings)?;
    Ok(solution.thresholds.values(settings.tolerance))
}

/// Player 1's threshold at the instance vertex in the repaired game.
pub fn verify_repair(instance: &RepairInstance, delta: &[(VertexId, Rational)], settings: &SolveSettings) -> Result<Value, RepairError> {
    check_admissible(instance, delta)?;
    Ok(thresholds(instance, delta, settings)?.swap_remove(instance.vertex.0))
}

fn compare(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => x.cmp(y),
        _ => a.to_f64().total_cmp(&b.to_f64()),
    }
}

fn at_most(value: &Value, bound: &Rational, tolerance: f64) -> bool {
    match value {
        Value::Exact(x) => x <= bound,
        Value::Approx { value, .. } => *value <= crate::scalar::Scalar::approx(bound) + tolerance,
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of ways to spread `units` grid steps over at most `support` of `n` vertices, all steps used.
fn count_allocations(n: usize, units: usize, support: usize) -> u128 {
    if units == 0 {
        return 1;
    }
    (1..=support.min(n).min(units))
        .map(|k| binomial(n as u128, k as u128).saturating_mul(binomial(units as u128 - 1, k as u128 - 1)))
        .fold(0u128, u128::saturating_add)
}

/// Every allocation of exactly `units` steps over at most `support` vertices,
/// as per-vertex step counts in lexicographic order.
fn allocations(n: usize, units: usize, support: usize) -> Vec<Vec<usize>> {
    fn go(v: usize, left: usize, used: usize, n: usize, support: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if v == n {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let most = if used < support { left } else { 0 };
        for units in 0..=most {
            cur.push(units);
            go(v + 1, left - units, used + usize::from(units > 0), n, support, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, units, 0, n, support, &mut Vec::with_capacity(n), &mut out);
    out.sort();
    out
}

/// Grid search over allocations that spend the largest grid multiple not
/// exceeding the budget. Spending less never helps, since extra Player 1
/// charge never raises Player 1's threshold. Among allocations the lowest
/// threshold at the vertex wins, then the lowest sum of thresholds, then
/// lexicographic order.
pub fn repair_search(instance: &RepairInstance, settings: &RepairSettings) -> Result<RepairOutcome, RepairError> {
    if !settings.grid.is_positive() || settings.support == 0 {
        return Err(RepairError::InvalidGrid);
    }
    let n = instance.game.arena.len();
    let units = (&instance.budget / &settings.grid)
        .floor()
        .to_integer()
        .to_usize()
        .ok_or(RepairError::SearchSpaceTooLarge {
            candidates: u128::MAX,
            cap: settings.cap,
        })?;
    let candidates = count_allocations(n, units, settings.support);
    if candidates > settings.cap {
        return Err(RepairError::SearchSpaceTooLarge {
            candidates,
            cap: settings.cap,
        });
    }
    let mut best: Option<(Value, Value, Delta)> = None;
    let mut evaluated = 0;
    for alloc in allocations(n, units, settings.support) {
        let delta: Delta = alloc
            .iter()
            .enumerate()
            .filter(|(_, &u)| u > 0)
            .map(|(v, &u)| (VertexId(v), &settings.grid * Rational::from_integer(u.into())))
            .collect();
        let values = thresholds(instance, &delta, &settings.solve)?;
        evaluated += 1;
        let at_v = values[instance.vertex.0].clone();
        let total = values
            .iter()
            .skip(1)
            .fold(values[0].clone(), |acc, v| match (acc, v) {
                (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
                (a, b) => Value::Approx {
                    value: a.to_f64() + b.to_f64(),
                    tolerance: None,
                },
            });
        let better = match &best {
            None => true,
            Some((bv, bt, _)) => compare(&at_v, bv).then_with(|| compare(&total, bt)) == Ordering::Less,
        };
        if better {
            best = Some((at_v, total, delta));
        }
    }
    let (achieved, _, delta) = best.expect("at least one allocation");
    let again = verify_repair(instance, &delta, &settings.solve)?;
    let verified = match (&again, &achieved) {
        (Value::Exact(a), Value::Exact(b)) => a == b,
        (a, b) => (a.to_f64() - b.to_f64()).abs() <= settings.solve.tolerance,
    };
    let result = RepairResult {
        delta,
        achieved,
        verified,
        stats: SearchStats {
            candidates: evaluated,
            grid: settings.grid.clone(),
            support: settings.support,
        },
    };
    Ok(if at_most(&result.achieved, &instance.target, settings.solve.tolerance) {
        RepairOutcome::Repaired(result)
    } else {
        RepairOutcome::NoRepairFound(result)
    })
}
