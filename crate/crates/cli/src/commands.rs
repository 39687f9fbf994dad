use std::path::Path;

use anyhow::{anyhow, bail, Context as _, Result};
use chargebid::export::{
    check_model_residual, export_buchi_bilevel, export_reach_etr, export_reach_milp, render, threshold_assignment,
    ModelDocument,
};
use chargebid::fixpoint::{certify_fixed_point, level_table, residual, Boundary, Horizon, ReachProblem, ThresholdVector};
use chargebid::format::{game_to_json, mechanism_to_json, objective_from_json, objective_to_json, parse_game, Game};
use chargebid::model::{Configuration, Objective, Player, TieBreak, VertexId};
use chargebid::reduction::{parse_turn_based, reduce_turn_based_with};
use chargebid::repair::{repair_search, RepairInstance, RepairOutcome, RepairSettings};
use chargebid::scalar::{format_rational, parse_rational};
use chargebid::solve::{solve, Mode, SolveSettings, Thresholds};
use chargebid::strategy::{certify_invariant, simulate, Adversary, Participant, ThresholdStrategy};
use chargebid::{fixtures, Rational, Scalar, Value};
use num_traits::{One, Zero};
use serde_json::{json, Map, Value as Json};
use sha2::{Digest, Sha256};

use crate::args::{
    AdversaryArg, CheckArgs, ExportArgs, ExportFormat, GameArgs, Global, ModeArg, RepairArgs, ReduceArgs, SimulateArgs,
    SolveArgs, TableArgs, TableFormat,
};

/// What a command produced.
pub enum Output {
    /// Structured result, wrapped in the run report.
    Report { result: Json, warnings: Vec<String> },
    /// Text written verbatim, e.g. CSV or a model file.
    Text(String),
}

pub struct Outcome {
    pub output: Output,
    /// Extra line for standard output, written even when `--out` is set.
    pub stdout_line: Option<String>,
    /// Auxiliary files written next to `--out`, by extension.
    pub side_files: Vec<(&'static str, String)>,
    pub digest: Option<String>,
    /// Nonzero when `check` found a violation.
    pub exit_code: i32,
}

impl Outcome {
    fn new(output: Output, digest: String) -> Self {
        Outcome {
            output,
            stdout_line: None,
            side_files: Vec::new(),
            digest: Some(digest),
            exit_code: 0,
        }
    }
}

fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Reads a file, falling back to the bundled examples by name.
fn read_input(name: &str) -> Result<(String, String)> {
    let path = Path::new(name);
    let text = if path.exists() {
        std::fs::read_to_string(path).with_context(|| format!("reading {name}"))?
    } else if let Some((_, text)) = fixtures::ALL.iter().find(|(n, _)| *n == name) {
        text.to_string()
    } else {
        bail!("no such file or bundled example: {name}");
    };
    let d = digest(text.as_bytes());
    Ok((text, d))
}

fn load_game(args: &GameArgs) -> Result<(Game, String)> {
    let (text, d) = read_input(&args.arena)?;
    let mut game = parse_game(&text).with_context(|| format!("parsing {}", args.arena))?;
    if let Some(spec) = &args.objective {
        let (kind, listed) = match spec.split_once(':') {
            Some((k, s)) => (k, Some(s.split(',').map(str::to_string).collect::<Vec<_>>())),
            None => (spec.as_str(), None),
        };
        let set = match (listed, &args.set) {
            (Some(s), _) => s,
            (None, Some(s)) => s.clone(),
            (None, None) => game.objective.set().iter().map(|v| game.arena.name(v).to_string()).collect(),
        };
        let mut doc = json!({"kind": kind, "set": set});
        if let Some(b) = args.bound {
            doc["bound"] = json!(b);
        }
        game.objective = objective_from_json(&doc, &game.arena).context("objective")?;
    } else if args.set.is_some() || args.bound.is_some() {
        bail!("--set and --bound need --objective");
    }
    Ok((game, d))
}

fn vertex(game: &Game, name: &str) -> Result<VertexId> {
    game.arena.id(name).ok_or_else(|| anyhow!("unknown vertex {name:?}"))
}

fn player(n: u8) -> Player {
    Player::from_number(n).expect("validated by the argument parser")
}

fn settings(global: &Global) -> SolveSettings {
    SolveSettings {
        mode: match global.mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Approx => Mode::Approx,
        },
        tolerance: global.eps,
        max_iterations: global.max_iter,
        ..SolveSettings::default()
    }
}

fn by_vertex<T>(game: &Game, values: impl IntoIterator<Item = T>, f: impl Fn(T) -> Json) -> Json {
    let map: Map<String, Json> = game
        .arena
        .names()
        .iter()
        .cloned()
        .zip(values.into_iter().map(f))
        .collect();
    Json::Object(map)
}

fn horizon_json(h: Horizon) -> Json {
    match h {
        Horizon::Limit => json!("limit"),
        Horizon::Level(t) => json!(t),
    }
}

fn thresholds_json(game: &Game, t: &Thresholds, tolerance: f64) -> Json {
    json!({
        "player": t.player().number(),
        "objective": objective_to_json(&game.objective, &game.arena),
        "mechanism": mechanism_to_json(&game.mechanism),
        "arithmetic": match t.mode() { Mode::Exact => "exact", Mode::Approx => "approx" },
        "horizon": horizon_json(t.horizon()),
        "iterations": t.iterations(),
        "residual": t.residual(),
        "thresholds": by_vertex(game, t.values(tolerance), |v| serde_json::to_value(v).expect("serializable")),
    })
}

/// Player 1's value at `v` is at most one half.
fn accepts(t: &Thresholds, v: VertexId) -> bool {
    let p1 = |own: bool, x: f64| if own { x } else { 1.0 - x };
    match t {
        Thresholds::Exact(t) => {
            let x = &t.values[v.0];
            let x = if t.player == Player::One { x.clone() } else { Rational::one() - x };
            x * Rational::from_integer(2.into()) <= Rational::one()
        }
        Thresholds::Approx(t) => p1(t.player == Player::One, t.values[v.0]) <= 0.5,
    }
}

pub fn solve_cmd(global: &Global, args: &SolveArgs) -> Result<Outcome> {
    let (game, d) = load_game(&args.game)?;
    let mut s = settings(global);
    s.max_k = args.max_k;
    let solution = solve(&game, player(args.player), &s)?;
    let mut result = thresholds_json(&game, &solution.thresholds, global.eps);
    let mut line = None;
    if let Some(name) = &args.vertex {
        let v = vertex(&game, name)?;
        if args.decide {
            let verdict = if accepts(&solution.thresholds, v) { "ACCEPT" } else { "REJECT" };
            result["decision"] = json!({"vertex": name, "verdict": verdict});
            line = Some(verdict.to_string());
        }
    }
    let mut out = Outcome::new(
        Output::Report {
            result,
            warnings: solution.warnings,
        },
        d,
    );
    out.stdout_line = line;
    Ok(out)
}

fn csv_table<S: Scalar>(game: &Game, levels: &[Vec<S>], show: impl Fn(&S) -> String) -> String {
    let mut out = String::from("t");
    for n in game.arena.names() {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (t, row) in levels.iter().enumerate() {
        out.push_str(&t.to_string());
        for x in row {
            out.push(',');
            out.push_str(&show(x));
        }
        out.push('\n');
    }
    out
}

pub fn table_cmd(global: &Global, args: &TableArgs) -> Result<Outcome> {
    let (game, d) = load_game(&args.game)?;
    let p = player(args.player);
    let text = match args.format {
        TableFormat::Csv => match global.mode {
            ModeArg::Exact => {
                let (problem, _) = ReachProblem::<Rational>::from_objective(&game.arena, &game.objective)?;
                let levels = level_table(&game.arena, &game.mechanism, &problem, p, args.horizon);
                csv_table(&game, &levels, format_rational)
            }
            ModeArg::Approx => {
                let (problem, _) = ReachProblem::<f64>::from_objective(&game.arena, &game.objective)?;
                let levels = level_table(&game.arena, &game.mechanism, &problem, p, args.horizon);
                csv_table(&game, &levels, |x| x.to_string())
            }
        },
        TableFormat::Plotdata => {
            let s = SolveSettings {
                record_trace: true,
                ..settings(global)
            };
            let solution = solve(&game, p, &s)?;
            let mut out = String::from("# iteration sup_step\n");
            for (k, step) in solution.thresholds.trace().iter().enumerate() {
                out.push_str(&format!("{k} {step:e}\n"));
            }
            out
        }
    };
    Ok(Outcome::new(Output::Text(text), d))
}

fn adversary(arg: AdversaryArg, margin: f64) -> Option<Adversary> {
    match arg {
        AdversaryArg::UniformRandom => Some(Adversary::UniformRandom),
        AdversaryArg::AllIn => Some(Adversary::AllIn),
        AdversaryArg::Copycat => Some(Adversary::Copycat),
        AdversaryArg::Undercut => Some(Adversary::Undercut(margin)),
        AdversaryArg::None => None,
    }
}

pub fn simulate_cmd(global: &Global, args: &SimulateArgs) -> Result<Outcome> {
    let (game, d) = load_game(&args.game)?;
    let b1 = parse_rational(&args.b1).context("--b1")?;
    if b1 < Rational::zero() || b1 > Rational::one() {
        bail!("--b1 must lie in [0,1]");
    }
    let start = match &args.start {
        Some(name) => vertex(&game, name)?,
        None => VertexId(0),
    };
    let s = settings(global);
    let me = player(args.player);
    let mine = ThresholdStrategy::for_game(&game, me, &s)?;
    let theirs = match adversary(args.adversary, args.undercut) {
        Some(_) => None,
        None => Some(ThresholdStrategy::for_game(&game, me.opponent(), &s)?),
    };
    let mut lines = Vec::new();
    for i in 0..args.trials {
        let trial_seed = global.seed.wrapping_add(i as u64);
        let ours = Participant::Strategy(&mine);
        let other = match (&theirs, adversary(args.adversary, args.undercut)) {
            (Some(t), _) => Participant::Strategy(t),
            (None, Some(a)) => Participant::Adversary(a, &mine.limit),
            (None, None) => unreachable!("one of the two is set"),
        };
        let (p1, p2) = if me == Player::One { (ours, other) } else { (other, ours) };
        let record = simulate(
            &game,
            p1,
            p2,
            Configuration::new(start, b1.approx()),
            args.steps,
            trial_seed,
            TieBreak::Player1,
            None,
        )?;
        lines.push(json!({"trial": i, "seed": trial_seed, "play": record.to_json(&game.arena)}));
    }
    let mut text = String::new();
    for l in lines {
        text.push_str(&serde_json::to_string(&l)?);
        text.push('\n');
    }
    Ok(Outcome::new(Output::Text(text), d))
}

pub fn repair_cmd(global: &Global, args: &RepairArgs) -> Result<Outcome> {
    let (game, d) = load_game(&args.game)?;
    let v = vertex(&game, &args.vertex)?;
    let instance = RepairInstance::with_target(
        game.clone(),
        v,
        parse_rational(&args.budget).context("--budget")?,
        parse_rational(&args.target).context("--target")?,
    )?;
    let rs = RepairSettings {
        grid: parse_rational(&args.grid).context("--grid")?,
        support: args.support,
        cap: args.cap,
        solve: settings(global),
    };
    let outcome = repair_search(&instance, &rs)?;
    let mut result = outcome.result().to_json(&game);
    result["outcome"] = json!(match outcome {
        RepairOutcome::Repaired(_) => "repaired",
        RepairOutcome::NoRepairFound(_) => "no-repair-found",
    });
    result["vertex"] = json!(args.vertex);
    result["target"] = json!(format_rational(&instance.target));
    result["budget"] = json!(format_rational(&instance.budget));
    Ok(Outcome::new(
        Output::Report {
            result,
            warnings: Vec::new(),
        },
        d,
    ))
}

pub fn reduce_cmd(_global: &Global, args: &ReduceArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (tb, objective) = parse_turn_based(&text).context("parsing turn-based game")?;
    let charge = parse_rational(&args.charge).context("--charge")?;
    let reduction = reduce_turn_based_with(&tb, &objective, charge)?;
    let out = serde_json::to_string_pretty(&game_to_json(&reduction.game))? + "\n";
    Ok(Outcome::new(Output::Text(out), digest(text.as_bytes())))
}

fn buchi_view(game: &Game) -> Option<(chargebid::model::VertexSet, Player)> {
    match &game.objective {
        Objective::Buchi(b) => Some((b.clone(), Player::One)),
        Objective::CoBuchi(c) => Some((c.complement(game.arena.len()), Player::Two)),
        _ => None,
    }
}

/// The model for the game's objective; also returns the player whose
/// vector the model's `h` variables describe.
fn export_model(game: &Game, format: Option<ExportFormat>, query: Option<VertexId>) -> Result<(ModelDocument, Player)> {
    let (arena, mech) = (&game.arena, &game.mechanism);
    let buchi = buchi_view(game);
    let format = format.unwrap_or(match (&buchi, mech.is_richman()) {
        (Some(_), _) => ExportFormat::Buchi,
        (None, true) => ExportFormat::Milp,
        (None, false) => ExportFormat::Etr,
    });
    if format == ExportFormat::Buchi {
        let (set, p) = buchi.ok_or_else(|| anyhow!("the buchi format needs a Büchi or co-Büchi objective"))?;
        return Ok((export_buchi_bilevel(arena, mech, &set, p, query)?, p));
    }
    let (problem, horizon) = ReachProblem::<Rational>::from_objective(arena, &game.objective)?;
    if horizon.is_some() {
        bail!("bounded objectives have no fixed-point encoding");
    }
    let doc = match format {
        ExportFormat::Milp => {
            if query.is_some() {
                bail!("--query applies to the etr and buchi formats");
            }
            export_reach_milp(arena, mech, &problem)?
        }
        _ => export_reach_etr(arena, mech, &problem, query)?,
    };
    Ok((doc, problem.reacher))
}

pub fn export_cmd(global: &Global, args: &ExportArgs) -> Result<Outcome> {
    let (game, d) = load_game(&args.game)?;
    let query = args.query.as_deref().map(|q| vertex(&game, q)).transpose()?;
    let (doc, _) = export_model(&game, args.format, query)?;
    let rendered = render(&doc)?;
    let mut out = Outcome::new(Output::Text(rendered.text), d);
    if let Some(aux) = rendered.aux {
        if global.out.is_none() {
            bail!("bilevel models come with an auxiliary file; use --out");
        }
        out.side_files.push(("aux", aux));
    }
    Ok(out)
}

/// Player 1's vector from a JSON object mapping vertex ids to numbers.
fn read_vector(game: &Game, path: &Path) -> Result<(Vec<Rational>, String)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Json = serde_json::from_str(&text).context("threshold file")?;
    let map = doc.as_object().ok_or_else(|| anyhow!("threshold file must be a JSON object"))?;
    let mut out = Vec::with_capacity(game.arena.len());
    for name in game.arena.names() {
        let value = map.get(name).ok_or_else(|| anyhow!("threshold file lacks vertex {name:?}"))?;
        out.push(chargebid::format::parse_number(value).with_context(|| format!("threshold of {name}"))?);
    }
    Ok((out, digest(text.as_bytes())))
}

struct Checks {
    items: Vec<Json>,
    failed: bool,
}

impl Checks {
    fn record(&mut self, name: &str, passed: Option<bool>, detail: Json) {
        let status = match passed {
            Some(true) => "pass",
            Some(false) => {
                self.failed = true;
                "fail"
            }
            None => "skipped",
        };
        self.items.push(json!({"check": name, "status": status, "detail": detail}));
    }
}

fn within<S: Scalar>(x: &S, tolerance: f64) -> bool {
    if S::EXACT {
        x.is_zero()
    } else {
        x.approx().abs() <= tolerance
    }
}

/// Fixed-point, complementarity and model checks of Player 1's vector `f`.
fn vector_checks<S: Scalar>(game: &Game, f: &[S], global: &Global, checks: &mut Checks) -> Result<()> {
    let (arena, mech) = (&game.arena, &game.mechanism);
    let tolerance = 100.0 * global.eps;
    let in_range = f.iter().all(|x| *x >= S::zero() && *x <= S::one());
    checks.record("range", Some(in_range), json!(null));
    let complement = |x: &[S]| x.iter().map(|y| S::one() - y.clone()).collect::<Vec<S>>();
    if let Some((_, p)) = buchi_view(game) {
        let own = if p == Player::One { f.to_vec() } else { complement(f) };
        let free = Boundary(vec![None; arena.len()]);
        let r = residual(&own, arena, mech, p, &free);
        checks.record("fixed-point", Some(within(&r, tolerance)), json!({"residual": r.to_value()}));
        checks.record("complementarity", None, json!("holds by construction for Büchi vectors"));
    } else {
        let (problem, horizon) = ReachProblem::<S>::from_objective(arena, &game.objective)?;
        if horizon.is_some() {
            checks.record("fixed-point", None, json!("finite-horizon vectors are not fixed points"));
            checks.record("complementarity", None, json!(null));
        } else {
            let vector = ThresholdVector {
                player: Player::One,
                values: f.to_vec(),
                horizon: Horizon::Limit,
                residual: S::zero(),
                iterations: 0,
                trace: Vec::new(),
            };
            let s = settings(global).limit();
            let cert = certify_fixed_point(&vector, arena, mech, &problem, &s)?;
            let fixed = within(&cert.residual, tolerance) && within(&cert.boundary_gap, tolerance);
            checks.record(
                "fixed-point",
                Some(fixed),
                json!({"residual": cert.residual.to_value(), "boundary_gap": cert.boundary_gap.to_value()}),
            );
            checks.record(
                "complementarity",
                Some(within(&cert.complementarity_gap, tolerance)),
                json!({"gap": cert.complementarity_gap.to_value()}),
            );
        }
    }
    Ok(())
}

fn model_check(game: &Game, f: &[Rational], checks: &mut Checks) {
    let model = export_model(game, None, None);
    let (doc, p) = match model {
        Ok(m) => m,
        Err(e) => {
            checks.record("model", None, json!(e.to_string()));
            return;
        }
    };
    let values: Vec<Rational> = if p == Player::One {
        f.to_vec()
    } else {
        f.iter().map(|x| Rational::one() - x).collect()
    };
    match check_model_residual(&doc, &threshold_assignment(&game.arena, &values)) {
        Ok(report) => {
            let violated: Vec<&str> = report.violated.iter().map(|v| v.constraint.as_str()).collect();
            checks.record(
                "model",
                Some(report.holds()),
                json!({
                    "kind": doc.kind.name(),
                    "satisfied": report.satisfied.len(),
                    "violated": violated,
                    "unchecked": report.unchecked,
                }),
            );
        }
        Err(e) => checks.record("model", Some(false), json!(e.to_string())),
    }
}

fn strategy_check(
    game: &Game,
    strategy: &ThresholdStrategy,
    args: &CheckArgs,
    global: &Global,
    checks: &mut Checks,
) -> Result<()> {
    let name = format!("strategy-player-{}", strategy.player.number());
    let starts: Vec<VertexId> = game
        .arena
        .vertices()
        .filter(|v| strategy.limit[v.0] + args.margin < 1.0)
        .collect();
    if starts.is_empty() {
        checks.record(&name, None, json!("no vertex with a winnable budget"));
        return Ok(());
    }
    let report = certify_invariant(
        game,
        strategy,
        &strategy.limit,
        args.margin,
        &Adversary::suite(args.margin),
        &starts,
        args.trials,
        args.steps,
        global.seed,
    )?;
    let per: Vec<Json> = report
        .adversaries
        .iter()
        .map(|a| {
            json!({
                "adversary": a.adversary.name(),
                "trials": a.trials,
                "violations": a.violations,
                "wins": a.wins,
                "losses": a.losses,
                "truncated": a.truncated,
            })
        })
        .collect();
    checks.record(&name, Some(report.violations() == 0), json!(per));
    Ok(())
}

pub fn check_cmd(global: &Global, args: &CheckArgs) -> Result<Outcome> {
    let (game, d) = load_game(&args.game)?;
    let mut checks = Checks {
        items: Vec::new(),
        failed: false,
    };
    let mut warnings = Vec::new();
    let s = settings(global);
    let (exact, approx, source) = match &args.thresholds {
        Some(path) => {
            let (f, _) = read_vector(&game, path)?;
            let approx: Vec<f64> = f.iter().map(Scalar::approx).collect();
            (Some(f), approx, "file")
        }
        None => {
            let solution = solve(&game, Player::One, &s)?;
            warnings = solution.warnings;
            match solution.thresholds {
                Thresholds::Exact(t) => {
                    let approx = t.values.iter().map(Scalar::approx).collect();
                    (Some(t.values), approx, "computed")
                }
                Thresholds::Approx(t) => (None, t.values, "computed"),
            }
        }
    };
    match (&exact, global.mode) {
        (Some(f), ModeArg::Exact) => vector_checks(&game, f, global, &mut checks)?,
        _ => vector_checks(&game, &approx, global, &mut checks)?,
    }
    match &exact {
        Some(f) => model_check(&game, f, &mut checks),
        None => checks.record("model", None, json!("needs exact thresholds")),
    }
    let complement: Vec<f64> = approx.iter().map(|x| 1.0 - x).collect();
    for p in [Player::One, Player::Two] {
        let strategy = if args.thresholds.is_some() {
            let own = if p == Player::One { &approx } else { &complement };
            ThresholdStrategy::limit(p, &ThresholdVector::level(p, own.clone(), 0))
        } else {
            match ThresholdStrategy::for_game(&game, p, &s) {
                Ok(st) => st,
                Err(e) => {
                    checks.record(&format!("strategy-player-{}", p.number()), None, json!(e.to_string()));
                    continue;
                }
            }
        };
        strategy_check(&game, &strategy, args, global, &mut checks)?;
    }
    let thresholds = match &exact {
        Some(f) => by_vertex(&game, f.iter(), |x| json!(Value::Exact(x.clone()))),
        None => by_vertex(&game, approx.iter(), |x| json!(x)),
    };
    let result = json!({
        "source": source,
        "thresholds": thresholds,
        "passed": !checks.failed,
        "checks": checks.items,
    });
    let mut out = Outcome::new(Output::Report { result, warnings }, d);
    if checks.failed {
        out.exit_code = 3;
    }
    Ok(out)
}
