use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::ExportError;
use crate::scalar::{format_rational, Rational};

/// Real-valued term over named variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn num(r: Rational) -> Expr {
        Expr::Num(r)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(Rational::from_integer(n.into()))
    }

    /// Canonical linear form: `sum c_i x_i + constant`, zero terms dropped.
    pub fn linear(terms: &[(Rational, String)], constant: &Rational) -> Expr {
        let mut parts: Vec<Expr> = terms
            .iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, x)| Expr::Mul(vec![Expr::Num(c.clone()), Expr::Var(x.clone())]))
            .collect();
        if !constant.is_zero() || parts.is_empty() {
            parts.push(Expr::Num(constant.clone()));
        }
        Expr::Add(parts)
    }

    pub fn eval(&self, env: &BTreeMap<String, Rational>) -> Result<Rational, EvalError> {
        Ok(match self {
            Expr::Num(r) => r.clone(),
            Expr::Var(x) => env.get(x).cloned().ok_or_else(|| EvalError::Missing(x.clone()))?,
            Expr::Add(xs) => xs.iter().try_fold(Rational::zero(), |acc, x| Ok(acc + x.eval(env)?))?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Mul(xs) => xs.iter().try_fold(Rational::one(), |acc, x| Ok(acc * x.eval(env)?))?,
            Expr::Div(a, b) => {
                let d = b.eval(env)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(env)? / d
            }
        })
    }

    /// Coefficients and constant if the expression is linear.
    pub fn as_linear(&self) -> Option<(Vec<(Rational, String)>, Rational)> {
        let mut terms: Vec<(Rational, String)> = Vec::new();
        let mut constant = Rational::zero();
        self.collect_linear(&Rational::one(), &mut terms, &mut constant)?;
        terms.retain(|(c, _)| !c.is_zero());
        Some((terms, constant))
    }

    fn collect_linear(&self, scale: &Rational, terms: &mut Vec<(Rational, String)>, constant: &mut Rational) -> Option<()> {
        match self {
            Expr::Num(r) => *constant += scale * r,
            Expr::Var(x) => match terms.iter_mut().find(|(_, y)| y == x) {
                Some((c, _)) => *c += scale,
                None => terms.push((scale.clone(), x.clone())),
            },
            Expr::Add(xs) => {
                for x in xs {
                    x.collect_linear(scale, terms, constant)?;
                }
            }
            Expr::Sub(a, b) => {
                a.collect_linear(scale, terms, constant)?;
                b.collect_linear(&-scale, terms, constant)?;
            }
            Expr::Neg(a) => a.collect_linear(&-scale, terms, constant)?,
            Expr::Mul(xs) => {
                let mut factor = scale.clone();
                let mut rest = None;
                for x in xs {
                    match x.constant_value() {
                        Some(c) => factor *= c,
                        None if rest.is_none() => rest = Some(x),
                        None => return None,
                    }
                }
                match rest {
                    Some(x) => x.collect_linear(&factor, terms, constant)?,
                    None => *constant += factor,
                }
            }
            Expr::Div(a, b) => {
                let d = b.constant_value().filter(|d| !d.is_zero())?;
                a.collect_linear(&(scale / d), terms, constant)?;
            }
        }
        Some(())
    }

    fn constant_value(&self) -> Option<Rational> {
        self.eval(&BTreeMap::new()).ok()
    }

    fn variables(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(x) => out.push(x.clone()),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.variables(out)),
            Expr::Sub(a, b) | Expr::Div(a, b) => {
                a.variables(out);
                b.variables(out);
            }
            Expr::Neg(a) => a.variables(out),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
            Cmp::Lt => "<",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Cmp(Cmp, Expr, Expr),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
}

impl Formula {
    pub fn cmp(op: Cmp, lhs: Expr, rhs: Expr) -> Formula {
        Formula::Cmp(op, lhs, rhs)
    }

    pub fn is_quantified(&self) -> bool {
        match self {
            Formula::Cmp(..) => false,
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::is_quantified),
            Formula::Not(f) => f.is_quantified(),
            Formula::Implies(a, b) => a.is_quantified() || b.is_quantified(),
            Formula::Forall(..) => true,
        }
    }

    /// How far the assignment is from satisfying the formula; zero exactly
    /// when it holds. Violations without a distance (negations, strict
    /// comparisons of equal sides) report one.
    pub fn slack(&self, env: &BTreeMap<String, Rational>) -> Result<Rational, EvalError> {
        Ok(match self {
            Formula::Cmp(op, lhs, rhs) => {
                let d = lhs.eval(env)? - rhs.eval(env)?;
                let zero = Rational::zero();
                match op {
                    Cmp::Le => d.max(zero),
                    Cmp::Ge => (-d).max(zero),
                    Cmp::Eq => d.abs(),
                    Cmp::Lt if d.is_negative() => zero,
                    Cmp::Gt if d.is_positive() => zero,
                    Cmp::Lt | Cmp::Gt if d.is_zero() => Rational::one(),
                    Cmp::Lt | Cmp::Gt => d.abs(),
                }
            }
            Formula::And(fs) => {
                let mut worst = Rational::zero();
                for f in fs {
                    worst = worst.max(f.slack(env)?);
                }
                worst
            }
            Formula::Or(fs) => {
                let mut best: Option<Rational> = None;
                for f in fs {
                    let s = f.slack(env)?;
                    best = Some(best.map_or(s.clone(), |b| b.min(s)));
                }
                best.unwrap_or_else(Rational::one)
            }
            Formula::Not(f) => bool_slack(f.slack(env)?.is_zero()),
            Formula::Implies(a, b) => {
                if a.slack(env)?.is_zero() {
                    b.slack(env)?
                } else {
                    Rational::zero()
                }
            }
            Formula::Forall(..) => return Err(EvalError::Quantified),
        })
    }

    fn variables(&self, out: &mut Vec<String>) {
        match self {
            Formula::Cmp(_, a, b) => {
                a.variables(out);
                b.variables(out);
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.variables(out)),
            Formula::Not(f) => f.variables(out),
            Formula::Implies(a, b) => {
                a.variables(out);
                b.variables(out);
            }
            Formula::Forall(bound, body) => {
                let mut inner = Vec::new();
                body.variables(&mut inner);
                out.extend(inner.into_iter().filter(|x| !bound.contains(x)));
            }
        }
    }
}

fn bool_slack(violated: bool) -> Rational {
    if violated {
        Rational::one()
    } else {
        Rational::zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    Missing(String),
    DivisionByZero,
    Quantified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocumentKind {
    Milp,
    Etr,
    BilevelQuantified,
}

impl DocumentKind {
    pub fn name(self) -> &'static str {
        match self {
            DocumentKind::Milp => "milp",
            DocumentKind::Etr => "etr",
            DocumentKind::BilevelQuantified => "bilevel-quantified",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "milp" => Some(DocumentKind::Milp),
            "etr" => Some(DocumentKind::Etr),
            "bilevel-quantified" => Some(DocumentKind::BilevelQuantified),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Continuous,
    Binary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Variable {
    pub fn free(name: &str) -> Self {
        Variable {
            name: name.to_string(),
            domain: Domain::Continuous,
            lower: None,
            upper: None,
        }
    }

    pub fn bounded(name: &str, lower: Option<Rational>, upper: Option<Rational>) -> Self {
        Variable {
            name: name.to_string(),
            domain: Domain::Continuous,
            lower,
            upper,
        }
    }

    pub fn binary(name: &str) -> Self {
        Variable {
            name: name.to_string(),
            domain: Domain::Binary,
            lower: None,
            upper: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub formula: Formula,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveFn {
    pub sense: Sense,
    pub expr: Expr,
}

/// The follower's problem of a bilevel program.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerLevel {
    pub variables: Vec<String>,
    pub constraints: Vec<String>,
    pub objective: ObjectiveFn,
}

/// How an auxiliary variable follows from others; used to complete
/// assignments that only fix the threshold variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Definition {
    /// `var` is the largest of `of`; `selectors[i]` marks the first maximizer.
    Max { var: String, of: Vec<String>, selectors: Vec<String> },
    /// `var` is the smallest of `of`; `selectors[i]` marks the first minimizer.
    Min { var: String, of: Vec<String>, selectors: Vec<String> },
    /// `var = |arg|`, with `sign` one when `arg` is negative.
    Abs { var: String, arg: Expr, sign: String },
}

impl Definition {
    fn defined(&self) -> Vec<&String> {
        match self {
            Definition::Max { var, selectors, .. } | Definition::Min { var, selectors, .. } => {
                std::iter::once(var).chain(selectors).collect()
            }
            Definition::Abs { var, sign, .. } => vec![var, sign],
        }
    }
}

/// An optimization or satisfiability model over rational-valued variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDocument {
    pub kind: DocumentKind,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Option<ObjectiveFn>,
    pub lower: Option<LowerLevel>,
    pub definitions: Vec<Definition>,
    pub big_m: Option<Rational>,
}

impl ModelDocument {
    pub fn new(kind: DocumentKind) -> Self {
        ModelDocument {
            kind,
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: None,
            lower: None,
            definitions: Vec::new(),
            big_m: None,
        }
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.domain == Domain::Binary).count()
    }

    /// Variables mentioned by constraints or the objective but never declared.
    pub fn undeclared(&self) -> Vec<String> {
        let mut used = Vec::new();
        for c in &self.constraints {
            c.formula.variables(&mut used);
        }
        if let Some(o) = &self.objective {
            o.expr.variables(&mut used);
        }
        used.sort();
        used.dedup();
        used.retain(|x| self.variable(x).is_none());
        used
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: String,
    /// `None` when the constraint could not be evaluated, e.g. a zero divisor.
    #[serde(serialize_with = "crate::export::model::serialize_opt_rational")]
    pub slack: Option<Rational>,
}

pub(crate) fn serialize_opt_rational<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub satisfied: Vec<String>,
    pub violated: Vec<Violation>,
    /// Quantified constraints, which substitution cannot decide.
    pub unchecked: Vec<String>,
    /// Objective value under the completed assignment.
    #[serde(serialize_with = "crate::export::model::serialize_opt_rational")]
    pub objective: Option<Rational>,
}

impl ResidualReport {
    pub fn holds(&self) -> bool {
        self.violated.is_empty()
    }
}

/// Completes `assignment` through the document's definitions.
pub fn complete_assignment(
    model: &ModelDocument,
    assignment: &BTreeMap<String, Rational>,
) -> Result<BTreeMap<String, Rational>, ExportError> {
    let mut env = assignment.clone();
    let lookup = |env: &BTreeMap<String, Rational>, x: &String| {
        env.get(x).cloned().ok_or_else(|| ExportError::MissingVariable(x.clone()))
    };
    for def in &model.definitions {
        if def.defined().iter().all(|x| env.contains_key(*x)) {
            continue;
        }
        match def {
            Definition::Max { var, of, selectors } | Definition::Min { var, of, selectors } => {
                let values = of.iter().map(|x| lookup(&env, x)).collect::<Result<Vec<_>, _>>()?;
                let is_max = matches!(def, Definition::Max { .. });
                let mut pick = 0;
                for (i, v) in values.iter().enumerate() {
                    if (is_max && *v > values[pick]) || (!is_max && *v < values[pick]) {
                        pick = i;
                    }
                }
                let value = values.get(pick).cloned().ok_or_else(|| ExportError::MissingVariable(var.clone()))?;
                env.entry(var.clone()).or_insert(value);
                for (i, s) in selectors.iter().enumerate() {
                    env.entry(s.clone()).or_insert(bool_slack(i == pick));
                }
            }
            Definition::Abs { var, arg, sign } => {
                let y = arg.eval(&env).map_err(|e| match e {
                    EvalError::Missing(x) => ExportError::MissingVariable(x),
                    _ => ExportError::MissingVariable(var.clone()),
                })?;
                env.entry(sign.clone()).or_insert(bool_slack(y.is_negative()));
                env.entry(var.clone()).or_insert(y.abs());
            }
        }
    }
    Ok(env)
}

/// Evaluates every constraint, bound and integrality requirement under the
/// assignment, after inferring auxiliary variables from the definitions.
pub fn check_model_residual(
    model: &ModelDocument,
    assignment: &BTreeMap<String, Rational>,
) -> Result<ResidualReport, ExportError> {
    let env = complete_assignment(model, assignment)?;
    let mut report = ResidualReport {
        satisfied: Vec::new(),
        violated: Vec::new(),
        unchecked: Vec::new(),
        objective: None,
    };
    for v in &model.variables {
        let x = env.get(&v.name).ok_or_else(|| ExportError::MissingVariable(v.name.clone()))?;
        let mut slack = Rational::zero();
        if let Some(lo) = &v.lower {
            slack = slack.max(lo - x);
        }
        if let Some(hi) = &v.upper {
            slack = slack.max(x - hi);
        }
        if v.domain == Domain::Binary && !(x.is_zero() || x.is_one()) {
            slack = slack.max(x.abs().min((x - Rational::one()).abs()));
        }
        if slack.is_positive() {
            report.violated.push(Violation {
                constraint: format!("bound:{}", v.name),
                slack: Some(slack),
            });
        }
    }
    for c in &model.constraints {
        if c.formula.is_quantified() {
            report.unchecked.push(c.name.clone());
            continue;
        }
        match c.formula.slack(&env) {
            Ok(s) if s.is_zero() => report.satisfied.push(c.name.clone()),
            Ok(s) => report.violated.push(Violation {
                constraint: c.name.clone(),
                slack: Some(s),
            }),
            Err(EvalError::Missing(x)) => return Err(ExportError::MissingVariable(x)),
            Err(_) => report.violated.push(Violation {
                constraint: c.name.clone(),
                slack: None,
            }),
        }
    }
    if let Some(o) = &model.objective {
        report.objective = o.expr.eval(&env).ok();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn env(pairs: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn empty_model_is_vacuously_satisfied() {
        let r = check_model_residual(&ModelDocument::new(DocumentKind::Milp), &BTreeMap::new()).unwrap();
        assert!(r.holds() && r.satisfied.is_empty());
    }

    #[test]
    fn linear_forms_are_recovered() {
        let e = Expr::Sub(
            Box::new(Expr::Mul(vec![Expr::int(3), Expr::var("x")])),
            Box::new(Expr::Div(Box::new(Expr::Add(vec![Expr::var("x"), Expr::int(1)])), Box::new(Expr::int(2)))),
        );
        let (terms, c) = e.as_linear().unwrap();
        assert_eq!(terms, [(ratio(5, 2), "x".to_string())]);
        assert_eq!(c, ratio(-1, 2));
        assert!(Expr::Mul(vec![Expr::var("x"), Expr::var("y")]).as_linear().is_none());
    }

    #[test]
    fn slack_of_connectives() {
        let x = || Expr::var("x");
        let f = Formula::Or(vec![
            Formula::cmp(Cmp::Eq, x(), Expr::int(0)),
            Formula::cmp(Cmp::Ge, x(), Expr::int(1)),
        ]);
        assert_eq!(f.slack(&env(&[("x", ratio(1, 4))])).unwrap(), ratio(1, 4));
        assert_eq!(f.slack(&env(&[("x", int(1))])).unwrap(), int(0));
        assert_eq!(f.slack(&BTreeMap::new()), Err(EvalError::Missing("x".into())));
    }

    #[test]
    fn definitions_fill_in_selectors() {
        let mut m = ModelDocument::new(DocumentKind::Milp);
        m.definitions.push(Definition::Max {
            var: "hp".into(),
            of: vec!["p".into(), "q".into()],
            selectors: vec!["s_p".into(), "s_q".into()],
        });
        m.definitions.push(Definition::Abs {
            var: "a".into(),
            arg: Expr::Sub(Box::new(Expr::var("hp")), Box::new(Expr::int(1))),
            sign: "z".into(),
        });
        let full = complete_assignment(&m, &env(&[("p", ratio(1, 2)), ("q", ratio(1, 2))])).unwrap();
        assert_eq!(full["hp"], ratio(1, 2));
        assert_eq!((full["s_p"].clone(), full["s_q"].clone()), (int(1), int(0)));
        assert_eq!((full["a"].clone(), full["z"].clone()), (ratio(1, 2), int(1)));
        assert_eq!(
            complete_assignment(&m, &env(&[("p", int(0))])),
            Err(ExportError::MissingVariable("q".into()))
        );
    }
}
