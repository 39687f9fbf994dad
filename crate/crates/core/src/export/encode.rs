use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, Zero};

use super::model::{
    Cmp, Constraint, Definition, DocumentKind, Domain, Expr, Formula, LowerLevel, ModelDocument, ObjectiveFn, Sense,
    Variable,
};
use crate::error::ExportError;
use crate::fixpoint::ReachProblem;
use crate::model::{Arena, Mechanism, Player, VertexId, VertexSet};
use crate::scalar::{ratio, Rational};

type Terms = Vec<(Rational, String)>;

fn vertex_tags(arena: &Arena) -> Result<Vec<String>, ExportError> {
    arena
        .names()
        .iter()
        .map(|n| {
            if !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
                Ok(n.clone())
            } else {
                Err(ExportError::UnsupportedName(n.clone()))
            }
        })
        .collect()
}

fn h(tag: &str) -> String {
    format!("h_{tag}")
}

fn hp(tag: &str) -> String {
    format!("hp_{tag}")
}

fn hm(tag: &str) -> String {
    format!("hm_{tag}")
}

/// Smallest integer strictly above `2 max_v (1 + R1(v) + R2(v))`.
pub fn big_m(arena: &Arena) -> Rational {
    let k = arena
        .vertices()
        .map(|v| arena.charge_total(v))
        .max()
        .unwrap_or_else(Rational::one);
    (k * Rational::from_integer(2.into())).floor() + Rational::one()
}

fn check_unique(doc: &ModelDocument) -> Result<(), ExportError> {
    let mut seen = BTreeSet::new();
    for v in &doc.variables {
        if !seen.insert(&v.name) {
            return Err(ExportError::NameCollision(v.name.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for c in &doc.constraints {
        if !seen.insert(&c.name) {
            return Err(ExportError::NameCollision(c.name.clone()));
        }
    }
    Ok(())
}

/// Linear constraint `terms op rhs`, scaled to integer coefficients.
fn linear(name: String, terms: Terms, op: Cmp, rhs: Rational) -> Constraint {
    let mut merged: Terms = Vec::new();
    for (c, x) in terms {
        match merged.iter_mut().find(|(_, y)| *y == x) {
            Some((d, _)) => *d += c,
            None => merged.push((c, x)),
        }
    }
    merged.retain(|(c, _)| !c.is_zero());
    let scale = merged
        .iter()
        .map(|(c, _)| c.denom().clone())
        .fold(rhs.denom().clone(), |acc, d| acc.lcm(&d));
    let scale = Rational::from_integer(scale);
    let scaled: Terms = merged.into_iter().map(|(c, x)| (c * &scale, x)).collect();
    Constraint {
        name,
        formula: Formula::Cmp(op, Expr::linear(&scaled, &Rational::zero()), Expr::Num(rhs * scale)),
    }
}

fn scaled(terms: &Terms, by: &Rational) -> Terms {
    terms.iter().map(|(c, x)| (c * by, x.clone())).collect()
}

fn negated(terms: &Terms) -> Terms {
    scaled(terms, &-Rational::one())
}

fn sum_of(names: impl IntoIterator<Item = String>) -> Expr {
    let terms: Terms = names.into_iter().map(|x| (Rational::one(), x)).collect();
    Expr::linear(&terms, &Rational::zero())
}

/// Mixed-integer linear encoding of Richman fixed points.
struct Milp<'a> {
    arena: &'a Arena,
    tags: Vec<String>,
    m: Rational,
    continuous: Vec<Variable>,
    binaries: Vec<Variable>,
    constraints: Vec<Constraint>,
    definitions: Vec<Definition>,
    next_abs: usize,
}

impl<'a> Milp<'a> {
    fn new(arena: &'a Arena) -> Result<Self, ExportError> {
        let tags = vertex_tags(arena)?;
        let unit = || Variable::bounded("", Some(Rational::zero()), Some(Rational::one()));
        let mut continuous = Vec::new();
        for t in &tags {
            continuous.push(Variable { name: h(t), ..unit() });
        }
        for t in &tags {
            continuous.push(Variable { name: hp(t), ..unit() });
            continuous.push(Variable { name: hm(t), ..unit() });
        }
        Ok(Milp {
            arena,
            tags,
            m: big_m(arena),
            continuous,
            binaries: Vec::new(),
            constraints: Vec::new(),
            definitions: Vec::new(),
            next_abs: 0,
        })
    }

    /// Selector constraints making `hp_u`, `hm_u` the max and min over successors.
    fn selection(&mut self, u: VertexId) {
        let tu = self.tags[u.0].clone();
        let succ: Vec<String> = self.arena.successors(u).iter().map(|w| self.tags[w.0].clone()).collect();
        let one = Rational::one;
        let m = self.m.clone();
        for (prefix, var, sel, upper) in [("hp", hp(&tu), "b", true), ("hm", hm(&tu), "c", false)] {
            let mut selectors = Vec::new();
            for tw in &succ {
                let s = format!("{sel}_{tu}_{tw}");
                let base = vec![(one(), var.clone()), (-one(), h(tw))];
                if upper {
                    self.constraints.push(linear(format!("{prefix}_ge_{tu}_{tw}"), base.clone(), Cmp::Ge, Rational::zero()));
                    let mut t = base;
                    t.push((m.clone(), s.clone()));
                    self.constraints.push(linear(format!("{prefix}_sel_{tu}_{tw}"), t, Cmp::Le, m.clone()));
                } else {
                    self.constraints.push(linear(format!("{prefix}_le_{tu}_{tw}"), base.clone(), Cmp::Le, Rational::zero()));
                    let mut t = base;
                    t.push((-m.clone(), s.clone()));
                    self.constraints.push(linear(format!("{prefix}_sel_{tu}_{tw}"), t, Cmp::Ge, -m.clone()));
                }
                self.binaries.push(Variable::binary(&s));
                selectors.push(s);
            }
            let pick: Terms = selectors.iter().map(|s| (one(), s.clone())).collect();
            self.constraints.push(linear(format!("{prefix}_one_{tu}"), pick, Cmp::Eq, one()));
            let of = succ.iter().map(|t| h(t)).collect();
            self.definitions.push(if upper {
                Definition::Max { var, of, selectors }
            } else {
                Definition::Min { var, of, selectors }
            });
        }
    }

    /// Fresh `a_n = |y|` with `y = terms + constant`.
    fn abs(&mut self, terms: &Terms, constant: &Rational) -> String {
        let n = self.next_abs;
        self.next_abs += 1;
        let (a, z) = (format!("a_{n}"), format!("z_{n}"));
        let one = Rational::one;
        let m = self.m.clone();
        let with = |extra: Vec<(Rational, String)>, base: Terms| base.into_iter().chain(extra).collect::<Terms>();
        self.constraints.push(linear(format!("abs_lo_{n}"), with(vec![(one(), a.clone())], terms.clone()), Cmp::Ge, -constant.clone()));
        self.constraints.push(linear(format!("abs_hi_{n}"), with(vec![(one(), a.clone())], negated(terms)), Cmp::Ge, constant.clone()));
        self.constraints.push(linear(
            format!("abs_pos_{n}"),
            with(vec![(m.clone(), z.clone()), (-one(), a.clone())], terms.clone()),
            Cmp::Ge,
            -constant.clone(),
        ));
        self.constraints.push(linear(
            format!("abs_neg_{n}"),
            with(vec![(-m.clone(), z.clone()), (-one(), a.clone())], negated(terms)),
            Cmp::Ge,
            constant.clone() - m,
        ));
        self.continuous.push(Variable::bounded(&a, Some(Rational::zero()), None));
        self.binaries.push(Variable::binary(&z));
        self.definitions.push(Definition::Abs {
            var: a.clone(),
            arg: Expr::linear(terms, constant),
            sign: z,
        });
        a
    }

    /// `h_u = clamp((h(u-) + h(u+)) / 2 * K - R_player)` through
    /// `min(1, x) = ((x - 1) - |x - 1|) / 2 + 1` and `max(0, x) = (x + |x|) / 2`.
    fn clamp(&mut self, u: VertexId, player: Player) {
        let tu = self.tags[u.0].clone();
        let half = ratio(1, 2);
        let k = self.arena.charge_total(u);
        let x: Terms = vec![(&k * &half, hm(&tu)), (&k * &half, hp(&tu))];
        let cx = -self.arena.charge(u, player).clone();
        let a1 = self.abs(&x, &cx);
        let mut y: Terms = scaled(&x, &half);
        y.push((half.clone(), a1));
        let cy = &cx * &half - Rational::one();
        let a2 = self.abs(&y, &cy);
        let mut t: Terms = vec![(Rational::one(), h(&tu))];
        t.extend(scaled(&y, &-&half));
        t.push((half.clone(), a2));
        self.constraints.push(linear(format!("clamp_{tu}"), t, Cmp::Eq, &cy * &half + Rational::one()));
    }

    fn pin(&mut self, u: VertexId, value: Rational) {
        let tu = self.tags[u.0].clone();
        self.constraints.push(linear(format!("pin_{tu}"), vec![(Rational::one(), h(&tu))], Cmp::Eq, value));
    }

    fn finish(self, kind: DocumentKind, objective: ObjectiveFn) -> Result<ModelDocument, ExportError> {
        let mut doc = ModelDocument::new(kind);
        doc.variables = self.continuous.into_iter().chain(self.binaries).collect();
        doc.constraints = self.constraints;
        doc.definitions = self.definitions;
        doc.objective = Some(objective);
        doc.big_m = Some(self.m);
        check_unique(&doc)?;
        Ok(doc)
    }
}

/// MILP whose optimum is the reacher's limit threshold vector: maximize
/// `sum h` over fixed points with `h` pinned on the target.
pub fn export_reach_milp(
    arena: &Arena,
    mechanism: &Mechanism,
    problem: &ReachProblem<Rational>,
) -> Result<ModelDocument, ExportError> {
    if !mechanism.is_richman() {
        return Err(ExportError::NonRichmanMilpUnsupported);
    }
    let mut milp = Milp::new(arena)?;
    let boundary = problem.boundary(problem.reacher);
    for u in arena.vertices() {
        milp.selection(u);
    }
    for u in arena.vertices() {
        match boundary.pinned(u) {
            Some(value) => milp.pin(u, value.clone()),
            None => milp.clamp(u, problem.reacher),
        }
    }
    let objective = ObjectiveFn {
        sense: Sense::Maximize,
        expr: sum_of(milp.tags.iter().map(|t| h(t))),
    };
    milp.finish(DocumentKind::Milp, objective)
}

fn num(r: Rational) -> Expr {
    Expr::Num(r)
}

fn var(x: String) -> Expr {
    Expr::Var(x)
}

/// Real-arithmetic fixed-point conditions over variables named with the
/// given prefixes; `pinned` vertices are fixed to their boundary value.
struct Etr<'a> {
    arena: &'a Arena,
    tags: &'a [String],
    tau: Rational,
    player: Player,
    h: &'a str,
    hp: &'a str,
    hm: &'a str,
}

impl Etr<'_> {
    fn name(&self, prefix: &str, v: VertexId) -> String {
        format!("{prefix}_{}", self.tags[v.0])
    }

    /// `((1 - tau) h(u-) + h(u+)) / ((h(u+) - h(u-) - 1) tau + 2) * K - R`.
    fn update(&self, u: VertexId) -> Expr {
        let (up, dn) = (var(self.name(self.hp, u)), var(self.name(self.hm, u)));
        let numer = Expr::Add(vec![Expr::Mul(vec![num(Rational::one() - &self.tau), dn.clone()]), up.clone()]);
        let denom = Expr::Add(vec![
            Expr::Mul(vec![num(self.tau.clone()), Expr::Add(vec![up, Expr::Neg(Box::new(dn)), num(-Rational::one())])]),
            num(Rational::from_integer(2.into())),
        ]);
        Expr::Sub(
            Box::new(Expr::Mul(vec![
                Expr::Div(Box::new(numer), Box::new(denom)),
                num(self.arena.charge_total(u)),
            ])),
            Box::new(num(self.arena.charge(u, self.player).clone())),
        )
    }

    fn fixed(&self, u: VertexId) -> Formula {
        let x = || var(self.name(self.h, u));
        let f = || self.update(u);
        let (zero, one) = (|| num(Rational::zero()), || num(Rational::one()));
        Formula::Or(vec![
            Formula::And(vec![Formula::cmp(Cmp::Eq, x(), zero()), Formula::cmp(Cmp::Le, f(), zero())]),
            Formula::And(vec![Formula::cmp(Cmp::Eq, x(), one()), Formula::cmp(Cmp::Ge, f(), one())]),
            Formula::And(vec![
                Formula::cmp(Cmp::Le, zero(), x()),
                Formula::cmp(Cmp::Le, x(), one()),
                Formula::cmp(Cmp::Eq, x(), f()),
            ]),
        ])
    }

    fn select(&self, u: VertexId) -> Formula {
        let succ = self.arena.successors(u);
        let up = || var(self.name(self.hp, u));
        let dn = || var(self.name(self.hm, u));
        let hw = |w: &VertexId| var(self.name(self.h, *w));
        let mut parts = vec![
            Formula::Or(succ.iter().map(|w| Formula::cmp(Cmp::Eq, up(), hw(w))).collect()),
            Formula::Or(succ.iter().map(|w| Formula::cmp(Cmp::Eq, dn(), hw(w))).collect()),
        ];
        parts.extend(succ.iter().map(|w| Formula::cmp(Cmp::Ge, up(), hw(w))));
        parts.extend(succ.iter().map(|w| Formula::cmp(Cmp::Le, dn(), hw(w))));
        Formula::And(parts)
    }

    /// Named conjuncts of the fixed-point formula.
    fn conjuncts(&self, pinned: &dyn Fn(VertexId) -> Option<Rational>) -> Vec<Constraint> {
        let mut out = Vec::new();
        for u in self.arena.vertices() {
            let tag = &self.tags[u.0];
            out.push(match pinned(u) {
                Some(value) => Constraint {
                    name: format!("pin_{tag}"),
                    formula: Formula::cmp(Cmp::Eq, var(self.name(self.h, u)), num(value)),
                },
                None => Constraint {
                    name: format!("fix_{tag}"),
                    formula: self.fixed(u),
                },
            });
        }
        for u in self.arena.vertices() {
            out.push(Constraint {
                name: format!("sel_{}", self.tags[u.0]),
                formula: self.select(u),
            });
        }
        out
    }

    fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = self.arena.vertices().map(|v| self.name(self.h, v)).collect();
        for v in self.arena.vertices() {
            out.push(self.name(self.hp, v));
            out.push(self.name(self.hm, v));
        }
        out
    }

    fn definitions(&self) -> Vec<Definition> {
        let mut out = Vec::new();
        for u in self.arena.vertices() {
            let of: Vec<String> = self.arena.successors(u).iter().map(|w| self.name(self.h, *w)).collect();
            out.push(Definition::Max {
                var: self.name(self.hp, u),
                of: of.clone(),
                selectors: Vec::new(),
            });
            out.push(Definition::Min {
                var: self.name(self.hm, u),
                of,
                selectors: Vec::new(),
            });
        }
        out
    }
}

/// Existential real-arithmetic formula satisfied exactly by fixed points of
/// the reacher's operator that vanish (or take the frugal value) on the
/// target. With `query`, also asks for `h(query) > 1/2`.
pub fn export_reach_etr(
    arena: &Arena,
    mechanism: &Mechanism,
    problem: &ReachProblem<Rational>,
    query: Option<VertexId>,
) -> Result<ModelDocument, ExportError> {
    let tags = vertex_tags(arena)?;
    let etr = Etr {
        arena,
        tags: &tags,
        tau: mechanism.tau(),
        player: problem.reacher,
        h: "h",
        hp: "hp",
        hm: "hm",
    };
    let boundary = problem.boundary(problem.reacher);
    let mut doc = ModelDocument::new(DocumentKind::Etr);
    doc.variables = etr.variables().iter().map(|x| Variable::free(x)).collect();
    doc.constraints = etr.conjuncts(&|u| boundary.pinned(u).cloned());
    doc.definitions = etr.definitions();
    if let Some(v) = query {
        doc.constraints.push(Constraint {
            name: "query".into(),
            formula: Formula::cmp(Cmp::Gt, var(h(&tags[v.0])), num(ratio(1, 2))),
        });
    }
    check_unique(&doc)?;
    Ok(doc)
}

/// The nested Büchi fixed point of `buchi_player` on `set`: least on the
/// set, greatest off it. Richman games give a bilevel MILP (leader
/// minimizes the set values, follower maximizes the rest); other mechanisms
/// give a quantified real-arithmetic formula.
pub fn export_buchi_bilevel(
    arena: &Arena,
    mechanism: &Mechanism,
    set: &VertexSet,
    buchi_player: Player,
    query: Option<VertexId>,
) -> Result<ModelDocument, ExportError> {
    if set.is_empty() {
        return Err(ExportError::EmptyBuchiSet);
    }
    let tags = vertex_tags(arena)?;
    let on_set = |v: &VertexId| set.contains(*v);
    if mechanism.is_richman() {
        let mut milp = Milp::new(arena)?;
        for u in arena.vertices() {
            milp.selection(u);
        }
        for u in arena.vertices() {
            milp.clamp(u, buchi_player);
        }
        let leader = ObjectiveFn {
            sense: Sense::Minimize,
            expr: sum_of(arena.vertices().filter(on_set).map(|v| h(&tags[v.0]))),
        };
        let follower = ObjectiveFn {
            sense: Sense::Maximize,
            expr: sum_of(arena.vertices().filter(|v| !on_set(v)).map(|v| h(&tags[v.0]))),
        };
        let mut doc = milp.finish(DocumentKind::BilevelQuantified, leader)?;
        let leader_vars: BTreeSet<String> = arena.vertices().filter(on_set).map(|v| h(&tags[v.0])).collect();
        doc.lower = Some(LowerLevel {
            variables: doc
                .variables
                .iter()
                .map(|v| v.name.clone())
                .filter(|x| !leader_vars.contains(x))
                .collect(),
            constraints: doc.constraints.iter().map(|c| c.name.clone()).collect(),
            objective: follower,
        });
        return Ok(doc);
    }
    let top = Etr {
        arena,
        tags: &tags,
        tau: mechanism.tau(),
        player: buchi_player,
        h: "h",
        hp: "hp",
        hm: "hm",
    };
    let inner = Etr {
        h: "hl",
        hp: "hpl",
        hm: "hml",
        tau: top.tau.clone(),
        ..top
    };
    let mut doc = ModelDocument::new(DocumentKind::BilevelQuantified);
    doc.variables = top.variables().iter().map(|x| Variable::free(x)).collect();
    doc.constraints = top.conjuncts(&|_| None);
    doc.definitions = top.definitions();
    let other = || Formula::Not(Box::new(Formula::And(inner.conjuncts(&|_| None).into_iter().map(|c| c.formula).collect())));
    let pair = |op: Cmp, v: VertexId| Formula::cmp(op, var(inner.name("hl", v)), var(top.name("h", v)));
    let lower_on_set = Formula::Or(arena.vertices().filter(on_set).map(|v| pair(Cmp::Lt, v)).collect());
    let same_on_set = Formula::And(arena.vertices().filter(on_set).map(|v| pair(Cmp::Eq, v)).collect());
    let higher_off_set = Formula::Or(arena.vertices().filter(|v| !on_set(v)).map(|v| pair(Cmp::Gt, v)).collect());
    doc.constraints.push(Constraint {
        name: "optimality".into(),
        formula: Formula::Forall(
            inner.variables(),
            Box::new(Formula::And(vec![
                Formula::Implies(Box::new(lower_on_set), Box::new(other())),
                Formula::Implies(Box::new(Formula::And(vec![same_on_set, higher_off_set])), Box::new(other())),
            ])),
        ),
    });
    if let Some(v) = query {
        doc.constraints.push(Constraint {
            name: "query".into(),
            formula: Formula::cmp(Cmp::Ge, var(h(&tags[v.0])), num(ratio(1, 2))),
        });
    }
    check_unique(&doc)?;
    if doc.variables.iter().any(|v| v.domain == Domain::Binary) {
        unreachable!("real-arithmetic documents have no binaries");
    }
    Ok(doc)
}

/// Assignment of a threshold vector to the `h_<v>` variables.
pub fn threshold_assignment(arena: &Arena, values: &[Rational]) -> BTreeMap<String, Rational> {
    arena
        .vertices()
        .map(|v| (h(arena.name(v)), values[v.0].clone()))
        .collect()
}
