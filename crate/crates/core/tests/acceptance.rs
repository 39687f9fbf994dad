//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use chargebid::buchi::{buchi_threshold, BuchiSettings};
use chargebid::export::{check_model_residual, export_reach_etr, export_reach_milp, parse_rendered, render, threshold_assignment, ModelDocument};
use chargebid::fixpoint::{certify_fixed_point, level_table, limit_threshold, residual, LimitSettings, ReachProblem, ThresholdVector};
use chargebid::fixtures;
use chargebid::format::Game;
use chargebid::model::{Configuration, Mechanism, Objective, Player, TieBreak, VertexId, VertexSet};
use chargebid::reduction::{reduce_turn_based, solve_turn_based};
use chargebid::repair::{repair_search, verify_repair, RepairInstance, RepairSettings};
use chargebid::scalar::{int, parse_rational, ratio};
use chargebid::solve::{solve, solve_as, Mode, SolveSettings};
use chargebid::strategy::{certify_invariant, simulate, Adversary, Participant, ThresholdStrategy};
use chargebid::{Rational, Value};
use num_traits::{One, Zero};

use common::rng;

/// Tolerance of approximate comparisons.
const APPROX: f64 = 1e-8;
/// Tolerance of the poorman values in approximate mode.
const FIG3_TOL: f64 = 1e-9;
/// Budget margin above the threshold in strategy certification.
const MARGIN: f64 = 0.01;
const PROPERTY_ARENAS: usize = 1000;
const PROPERTY_LEVELS: usize = 10;
/// Exact limits that have not stabilized within these sweeps and bits are counted, not failed.
const EXACT_SWEEPS: usize = 500;
const EXACT_BITS: u64 = 512;
const CERTIFY_TRIALS: usize = 1000;
const CERTIFY_STEPS: usize = 100;
const SAFETY_STEPS: usize = 10_000;
const TURN_BASED_GAMES: usize = 200;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn game(name: &str) -> Game {
    fixtures::game(name).expect("bundled fixture")
}

fn exact(game: &Game, player: Player) -> Result<Vec<Rational>, String> {
    solve_as::<Rational>(game, player, &SolveSettings::default())
        .map(|t| t.values)
        .map_err(|e| e.to_string())
}

fn named(game: &Game, values: &[(&str, Rational)]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); game.arena.len()];
    for (n, v) in values {
        out[game.arena.id(n).expect("vertex").0] = v.clone();
    }
    out
}

fn show(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(chargebid::scalar::format_rational).collect();
    parts.join(", ")
}

fn fig1a_exact() -> Outcome {
    let start = Instant::now();
    let g = game("fig1a");
    let got = exact(&g, Player::One)?;
    within(start, Duration::from_secs(1))?;
    let want = named(&g, &[("b", ratio(1, 4)), ("c", ratio(1, 2)), ("e", int(1))]);
    ensure(got == want, || format!("got [{}]", show(&got)))?;
    Ok(format!("[{}] in {:?}", show(&got), start.elapsed()))
}

fn fig5_table() -> Outcome {
    let start = Instant::now();
    let (arena, mech, obj) = fixtures::fig1a();
    let (problem, _) = ReachProblem::<Rational>::from_objective(&arena, &obj).map_err(|e| e.to_string())?;
    let levels = level_table(&arena, &mech, &problem, Player::One, 6);
    within(start, Duration::from_secs(1))?;
    let mut rows = fixtures::FIG5_TABLE.lines();
    rows.next();
    let mut cells = 0;
    for (t, line) in rows.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        ensure(fields[0] == t.to_string(), || format!("row {t} labelled {}", fields[0]))?;
        for (v, text) in fields[1..].iter().enumerate() {
            let want = parse_rational(text).map_err(|e| e.to_string())?;
            ensure(levels[t][v] == want, || format!("t={t} v={v}: {} != {text}", levels[t][v]))?;
            cells += 1;
        }
    }
    ensure(cells == 35, || format!("{cells} cells"))?;
    Ok(format!("{cells} cells bit-exact in {:?}", start.elapsed()))
}

fn fig1c_safety() -> Outcome {
    let g = game("fig1c");
    let got = exact(&g, Player::One)?;
    let want = named(&g, &[("a", int(1)), ("b", ratio(3, 8))]);
    ensure(got == want, || format!("got [{}]", show(&got)))?;
    let b = g.arena.id("b").expect("b");
    let t = g.arena.id("t").expect("t");
    let strategy = ThresholdStrategy::for_game(&g, Player::Two, &SolveSettings::default()).map_err(|e| e.to_string())?;
    let mut total = 0;
    for (i, adv) in Adversary::suite(MARGIN).into_iter().enumerate() {
        let record = simulate(
            &g,
            Participant::Adversary(adv, &strategy.limit),
            Participant::Strategy(&strategy),
            Configuration::new(b, 0.2),
            SAFETY_STEPS,
            i as u64,
            TieBreak::Player1,
            None,
        )
        .map_err(|e| e.to_string())?;
        ensure(!record.visits(t), || format!("{} reached t", adv.name()))?;
        ensure(record.steps.len() >= SAFETY_STEPS, || format!("{} stopped after {} steps", adv.name(), record.steps.len()))?;
        total += record.steps.len();
    }
    Ok(format!("[{}]; t avoided over {total} steps against 4 adversaries", show(&got)))
}

fn fig3_poorman() -> Outcome {
    let g = game("fig3");
    let s = SolveSettings { mode: Mode::Approx, ..SolveSettings::default() };
    let f: ThresholdVector<f64> = solve_as(&g, Player::One, &s).map_err(|e| e.to_string())?;
    let v1 = f.values[g.arena.id("v1").expect("v1").0];
    let v2 = f.values[g.arena.id("v2").expect("v2").0];
    ensure((v1 - 4.0 / 7.0).abs() < FIG3_TOL, || format!("v1 = {v1}"))?;
    ensure((v2 - 0.25).abs() < FIG3_TOL, || format!("v2 = {v2}"))?;
    let exact_note = match solve_as::<Rational>(&g, Player::One, &SolveSettings::default()) {
        Ok(e) => {
            ensure(e.values[0] == ratio(4, 7) && e.values[1] == ratio(1, 4), || format!("exact [{}]", show(&e.values)))?;
            "exact agrees"
        }
        Err(_) => "exact mode hits the precision cap",
    };
    Ok(format!("v1 = {v1:.12}, v2 = {v2:.12}; {exact_note}"))
}

fn fig4_greatest() -> Outcome {
    let (arena, mech, obj) = fixtures::fig4();
    let g = game("fig4");
    let got = exact(&g, Player::One)?;
    let want = named(&g, &[("a", ratio(1, 4)), ("b", ratio(1, 2)), ("d", int(1))]);
    ensure(got == want, || format!("got [{}]", show(&got)))?;
    let (problem, _) = ReachProblem::<Rational>::from_objective(&arena, &obj).map_err(|e| e.to_string())?;
    let zero = ThresholdVector::level(Player::One, vec![Rational::zero(); arena.len()], 0);
    let cert = certify_fixed_point(&zero, &arena, &mech, &problem, &LimitSettings::default()).map_err(|e| e.to_string())?;
    ensure(cert.residual.is_zero(), || format!("zero vector residual {}", cert.residual))?;
    ensure(cert.boundary_gap.is_zero(), || "zero vector violates the boundary".into())?;
    ensure(zero.values != got, || "zero vector returned".into())?;
    Ok(format!("returned [{}]; all-zero is a fixed point with residual 0", show(&got)))
}

fn fig6_repair() -> Outcome {
    let start = Instant::now();
    let inst = RepairInstance::new(game("fig6"), VertexId(0), int(2)).map_err(|e| e.to_string())?;
    let delta = |entries: &[(&str, Rational)]| -> Vec<(VertexId, Rational)> {
        entries.iter().map(|(n, d)| (inst.game.arena.id(n).expect("vertex"), d.clone())).collect()
    };
    let two_fifths = ratio(2, 5);
    let rows: [(Vec<(VertexId, Rational)>, Rational); 7] = [
        (delta(&[]), int(1)),
        (delta(&[("c", int(1)), ("e", int(1))]), int(1)),
        (delta(&[("b", int(2))]), ratio(3, 4)),
        (delta(&[("d", int(2))]), ratio(3, 4)),
        (
            delta(&[("a", two_fifths.clone()), ("b", two_fifths.clone()), ("c", two_fifths.clone()), ("d", two_fifths.clone()), ("e", two_fifths)]),
            ratio(31, 50),
        ),
        (delta(&[("a", int(2))]), ratio(1, 2)),
        (delta(&[("b", int(1)), ("d", int(1))]), int(0)),
    ];
    for (i, (d, want)) in rows.iter().enumerate() {
        let got = verify_repair(&inst, d, &SolveSettings::default()).map_err(|e| e.to_string())?;
        ensure(got == Value::Exact(want.clone()), || format!("row {i}: {got}"))?;
    }
    let settings = RepairSettings { grid: int(1), support: 2, ..RepairSettings::default() };
    let out = repair_search(&inst, &settings).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(10))?;
    ensure(out.is_repaired(), || "no repair found".into())?;
    let r = out.result();
    ensure(r.delta == delta(&[("b", int(1)), ("d", int(1))]), || format!("found {:?}", r.delta))?;
    ensure(r.verified, || "repair not verified".into())?;
    Ok(format!("7 rows exact; search found b+1, d+1 after {} candidates in {:?}", r.stats.candidates, start.elapsed()))
}

fn property_suite() -> Outcome {
    let mut r = rng(2024);
    let mut exact_levels = 0usize;
    let mut capped = 0usize;
    let mut unstable = 0usize;
    let mut worst_gap = 0.0f64;
    let mut worst_residual = 0.0f64;
    for i in 0..PROPERTY_ARENAS {
        let arena = common::arena(&mut r, 8, 4);
        let mech = common::mechanism_by_index(i);
        let target = common::subset(&mut r, arena.len(), true);
        let n = arena.len();

        let problem = ReachProblem::<Rational>::new(&arena, Player::One, target.clone());
        let f1 = level_table(&arena, &mech, &problem, Player::One, PROPERTY_LEVELS);
        let f2 = level_table(&arena, &mech, &problem, Player::Two, PROPERTY_LEVELS);
        for t in 0..=PROPERTY_LEVELS {
            for v in 0..n {
                ensure(&f1[t][v] + &f2[t][v] == Rational::one(), || format!("arena {i}: exact gap at t={t}, v={v}"))?;
                ensure(t == 0 || f1[t][v] <= f1[t - 1][v], || format!("arena {i}: f1 rose at t={t}, v={v}"))?;
                ensure(t == 0 || f2[t][v] >= f2[t - 1][v], || format!("arena {i}: f2 fell at t={t}, v={v}"))?;
                exact_levels += 1;
            }
        }

        let settings = LimitSettings::default();
        let problem = ReachProblem::<f64>::new(&arena, Player::One, target);
        let a1 = limit_threshold(&arena, &mech, &problem, Player::One, &settings).map_err(|e| format!("arena {i}: {e}"))?;
        let a2 = limit_threshold(&arena, &mech, &problem, Player::Two, &settings).map_err(|e| format!("arena {i}: {e}"))?;
        let horizon = a1.iterations.max(a2.iterations);
        let l1 = level_table(&arena, &mech, &problem, Player::One, horizon);
        let l2 = level_table(&arena, &mech, &problem, Player::Two, horizon);
        for t in 0..=horizon {
            for v in 0..n {
                worst_gap = worst_gap.max((l1[t][v] + l2[t][v] - 1.0).abs());
                ensure(t == 0 || l1[t][v] <= l1[t - 1][v] + 1e-15, || format!("arena {i}: approx f1 rose at t={t}"))?;
            }
        }
        for (f, p) in [(&a1, Player::One), (&a2, Player::Two)] {
            let res = residual(&f.values, &arena, &mech, p, &problem.boundary(p));
            worst_residual = worst_residual.max(res);
        }
        for v in 0..n {
            worst_gap = worst_gap.max((a1.values[v] + a2.values[v] - 1.0).abs());
        }

        let problem = ReachProblem::<Rational>::new(&arena, Player::One, problem.target.clone());
        let bounded = LimitSettings { max_iterations: EXACT_SWEEPS, bit_cap: EXACT_BITS, ..LimitSettings::default() };
        match limit_threshold(&arena, &mech, &problem, Player::One, &bounded) {
            Ok(e) => {
                let res = residual(&e.values, &arena, &mech, Player::One, &problem.boundary(Player::One));
                ensure(res.is_zero(), || format!("arena {i}: exact limit residual {res}"))?;
            }
            Err(chargebid::error::SolveError::PrecisionCap { .. }) => capped += 1,
            Err(chargebid::error::SolveError::NotConverged { .. }) => unstable += 1,
            Err(e) => return Err(format!("arena {i}: {e}")),
        }
    }
    ensure(worst_gap < APPROX, || format!("approx complementarity gap {worst_gap:e}"))?;
    ensure(worst_residual < APPROX, || format!("approx limit residual {worst_residual:e}"))?;
    Ok(format!(
        "{PROPERTY_ARENAS} arenas, {exact_levels} exact level entries, approx gap {worst_gap:.1e}, residual {worst_residual:.1e}, exact limits: {capped} capped, {unstable} unstabilized"
    ))
}

/// Vertices where the strategy's player can start with `limit + MARGIN`.
fn starts(strategy: &ThresholdStrategy) -> Vec<VertexId> {
    (0..strategy.limit.len()).filter(|&v| strategy.limit[v] + MARGIN < 1.0).map(VertexId).collect()
}

fn strategy_certification() -> Outcome {
    let suite = Adversary::suite(MARGIN);
    let mut plays = 0;
    for (name, _) in fixtures::ALL {
        let g = game(name);
        for p in [Player::One, Player::Two] {
            let strategy = ThresholdStrategy::for_game(&g, p, &SolveSettings::default()).map_err(|e| format!("{name}: {e}"))?;
            let from = starts(&strategy);
            if from.is_empty() {
                continue;
            }
            let report = certify_invariant(&g, &strategy, &strategy.limit, MARGIN, &suite, &from, CERTIFY_TRIALS, CERTIFY_STEPS, 7)
                .map_err(|e| format!("{name}: {e}"))?;
            ensure(report.violations() == 0, || format!("{name}, player {}: {} violations", p.number(), report.violations()))?;
            plays += CERTIFY_TRIALS * suite.len();
        }
    }

    let g = game("fig1c");
    let mut corrupted: Vec<f64> = exact(&g, Player::Two)?.iter().map(chargebid::Scalar::approx).collect();
    corrupted[g.arena.id("b").expect("b").0] -= 0.2;
    let strategy = ThresholdStrategy::limit(Player::Two, &ThresholdVector::level(Player::Two, corrupted.clone(), 0));
    let from = starts(&strategy);
    let report = certify_invariant(&g, &strategy, &corrupted, MARGIN, &suite, &from, CERTIFY_TRIALS, CERTIFY_STEPS, 7)
        .map_err(|e| e.to_string())?;
    ensure(report.violations() >= 1, || "corrupted vector passed".into())?;
    Ok(format!("0 violations over {plays} plays; corrupted vector: {} violations", report.violations()))
}

fn reduction_cross_check() -> Outcome {
    let mut r = rng(9);
    let mut games = 0;
    let mut vertices = 0;
    while games < TURN_BASED_GAMES {
        let tb = common::turn_based(&mut r, 8);
        let objective = common::turn_based_objective(&mut r, tb.len());
        if matches!(objective, Objective::CoBuchi(_)) {
            continue;
        }
        let winners = solve_turn_based(&tb, &objective).map_err(|e| e.to_string())?;
        let reduction = reduce_turn_based(&tb, &objective).map_err(|e| e.to_string())?;
        let t = solve(&reduction.game, Player::One, &SolveSettings::default())
            .map_err(|e| e.to_string())?
            .thresholds
            .to_f64();
        for (v, w) in winners.iter().enumerate() {
            let want = if *w == Player::One { 0.0 } else { 1.0 };
            ensure((t.values[v] - want).abs() < APPROX, || {
                format!("game {games} ({}), vertex {v}: threshold {} for winner {w:?}", objective.kind(), t.values[v])
            })?;
            vertices += 1;
        }
        games += 1;
    }
    Ok(format!("{games} games, {vertices} vertices agree"))
}

fn documents(arena: &chargebid::model::Arena, mech: &Mechanism, problem: &ReachProblem<Rational>) -> Result<Vec<ModelDocument>, String> {
    let mut docs = vec![export_reach_etr(arena, mech, problem, None).map_err(|e| e.to_string())?];
    if mech.is_richman() {
        docs.push(export_reach_milp(arena, mech, problem).map_err(|e| e.to_string())?);
    }
    Ok(docs)
}

fn encoding_consistency() -> Outcome {
    let mut checked = 0;
    for name in ["fig1a", "fig1c", "fig3", "fig4"] {
        let g = game(name);
        let (problem, _) = ReachProblem::<Rational>::from_objective(&g.arena, &g.objective).map_err(|e| e.to_string())?;
        let values = match exact(&g, Player::One) {
            Ok(v) => v,
            Err(_) if name == "fig3" => named(&g, &[("v1", ratio(4, 7)), ("v2", ratio(1, 4)), ("t2", int(1))]),
            Err(e) => return Err(format!("{name}: {e}")),
        };
        let assignment = threshold_assignment(&g.arena, &values);
        for doc in documents(&g.arena, &g.mechanism, &problem)? {
            let report = check_model_residual(&doc, &assignment).map_err(|e| e.to_string())?;
            ensure(report.holds(), || format!("{name}: violated {:?}", report.violated))?;
            let rendered = render(&doc).map_err(|e| e.to_string())?;
            let back = parse_rendered(&rendered.text, rendered.aux.as_deref()).map_err(|e| format!("{name}: {e}"))?;
            ensure(back == doc, || format!("{name}: {} document changed on re-parse", rendered.extension))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} documents: zero residual, structural round trip"))
}

fn buchi_claims() -> Outcome {
    let settings = BuchiSettings::default();
    let (arena, mech, obj) = fixtures::fig1a();
    let all: ThresholdVector<f64> = buchi_threshold(&arena, &mech, &VertexSet::all(arena.len()), Player::One, &settings).map_err(|e| e.to_string())?;
    ensure(all.values.iter().all(|x| *x == 0.0), || format!("B=V gives {:?}", all.values))?;

    let target = match &obj {
        Objective::Reach(t) => t.clone(),
        other => return Err(format!("fig1a objective {}", other.kind())),
    };
    let b: ThresholdVector<f64> = buchi_threshold(&arena, &mech, &target, Player::One, &settings).map_err(|e| e.to_string())?;
    let reach = exact(&game("fig1a"), Player::One)?;
    for (v, (got, exact)) in b.values.iter().zip(&reach).enumerate() {
        let want = chargebid::Scalar::approx(exact);
        ensure((got - want).abs() < APPROX, || format!("absorbing B at {v}: {got} vs {want}"))?;
    }

    let (arena, mech, obj) = fixtures::fig1c_buchi();
    let g: ThresholdVector<f64> = buchi_threshold(&arena, &mech, obj.set(), Player::One, &settings).map_err(|e| e.to_string())?;
    let at_b = g.values[arena.id("b").expect("b").0];
    ensure(at_b > APPROX, || format!("Th(b) = {at_b}"))?;
    Ok(format!("B=V all zero; absorbing B matches reachability; strongly connected variant Th(b) = {at_b:.6}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("fig1a exact reachability thresholds", fig1a_exact),
        ("fig5 finite-horizon table", fig5_table),
        ("fig1c safety thresholds and strategy", fig1c_safety),
        ("fig3 poorman thresholds", fig3_poorman),
        ("fig4 greatest fixed point", fig4_greatest),
        ("fig6 repair table and search", fig6_repair),
        ("property suite", property_suite),
        ("strategy certification", strategy_certification),
        ("turn-based reduction", reduction_cross_check),
        ("encoding consistency", encoding_consistency),
        ("Büchi qualitative claims", buchi_claims),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{:.2?}]", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{:.2?}]", i + 1, start.elapsed());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
