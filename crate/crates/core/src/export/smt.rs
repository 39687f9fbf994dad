//! SMT-LIB 2.6 text for satisfiability documents.
//!
//! Metadata that SMT-LIB has no syntax for (document kind, big-M,
//! auxiliary definitions, objectives) travels in `;` comment lines.

use std::collections::BTreeMap;
use std::fmt::Write;

use num_traits::{Signed, Zero};

use super::model::{
    Cmp, Constraint, Definition, DocumentKind, Domain, Expr, Formula, LowerLevel, ModelDocument, ObjectiveFn, Sense,
    Variable,
};
use crate::error::ExportError;
use crate::scalar::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn line(&self) -> usize {
        match self {
            Sexp::Atom(_, l) | Sexp::List(_, l) => *l,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            Sexp::List(..) => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs, _) => Some(xs),
            Sexp::Atom(..) => None,
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ExportError {
    ExportError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads every s-expression in `text`, skipping `;` comments.
pub(crate) fn read_sexps(text: &str, first_line: usize) -> Result<Vec<Sexp>, ExportError> {
    let mut stack: Vec<(Vec<Sexp>, usize)> = vec![(Vec::new(), first_line)];
    for (i, raw) in text.lines().enumerate() {
        let line = first_line + i;
        let code = raw.split(';').next().unwrap_or("");
        let spaced = code.replace('(', " ( ").replace(')', " ) ");
        for tok in spaced.split_whitespace() {
            match tok {
                "(" => stack.push((Vec::new(), line)),
                ")" => {
                    let (items, start) = stack.pop().filter(|_| !stack.is_empty()).ok_or_else(|| err(line, "unbalanced ')'"))?;
                    stack.last_mut().expect("nonempty").0.push(Sexp::List(items, start));
                }
                atom => stack.last_mut().expect("nonempty").0.push(Sexp::Atom(atom.to_string(), line)),
            }
        }
    }
    if stack.len() != 1 {
        return Err(err(stack.last().map_or(first_line, |s| s.1), "unclosed '('"));
    }
    Ok(stack.pop().expect("root").0)
}

fn write_num(r: &Rational, out: &mut String) {
    if r.is_negative() {
        out.push_str("(- ");
        write_num(&-r, out);
        out.push(')');
    } else if r.is_integer() {
        write!(out, "{}", r.numer()).expect("string write");
    } else {
        write!(out, "(/ {} {})", r.numer(), r.denom()).expect("string write");
    }
}

pub(crate) fn write_expr(e: &Expr, out: &mut String) {
    let list = |op: &str, xs: &[&Expr], out: &mut String| {
        write!(out, "({op}").expect("string write");
        for x in xs {
            out.push(' ');
            write_expr(x, out);
        }
        out.push(')');
    };
    match e {
        Expr::Num(r) => write_num(r, out),
        Expr::Var(x) => out.push_str(x),
        Expr::Add(xs) => list("+", &xs.iter().collect::<Vec<_>>(), out),
        Expr::Mul(xs) => list("*", &xs.iter().collect::<Vec<_>>(), out),
        Expr::Sub(a, b) => list("-", &[a, b], out),
        Expr::Neg(a) => list("-", &[a], out),
        Expr::Div(a, b) => list("/", &[a, b], out),
    }
}

pub(crate) fn write_formula(f: &Formula, out: &mut String) {
    let list = |op: &str, fs: &[&Formula], out: &mut String| {
        write!(out, "({op}").expect("string write");
        for f in fs {
            out.push(' ');
            write_formula(f, out);
        }
        out.push(')');
    };
    match f {
        Formula::Cmp(op, a, b) => {
            write!(out, "({} ", op.symbol()).expect("string write");
            write_expr(a, out);
            out.push(' ');
            write_expr(b, out);
            out.push(')');
        }
        Formula::And(fs) if fs.is_empty() => out.push_str("true"),
        Formula::Or(fs) if fs.is_empty() => out.push_str("false"),
        Formula::And(fs) => list("and", &fs.iter().collect::<Vec<_>>(), out),
        Formula::Or(fs) => list("or", &fs.iter().collect::<Vec<_>>(), out),
        Formula::Not(a) => list("not", &[a], out),
        Formula::Implies(a, b) => list("=>", &[a, b], out),
        Formula::Forall(vars, body) => {
            out.push_str("(forall (");
            let decls: Vec<String> = vars.iter().map(|v| format!("({v} Real)")).collect();
            out.push_str(&decls.join(" "));
            out.push_str(") ");
            write_formula(body, out);
            out.push(')');
        }
    }
}

fn is_numeral(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_digit())
}

pub(crate) fn parse_expr(s: &Sexp) -> Result<Expr, ExportError> {
    match s {
        Sexp::Atom(a, line) if is_numeral(a) => Ok(Expr::Num(parse_rational(a).map_err(|e| err(*line, e.to_string()))?)),
        Sexp::Atom(a, _) => Ok(Expr::Var(a.clone())),
        Sexp::List(xs, line) => {
            let (head, args) = xs.split_first().ok_or_else(|| err(*line, "empty term"))?;
            let op = head.atom().ok_or_else(|| err(*line, "operator expected"))?;
            let args = args.iter().map(parse_expr).collect::<Result<Vec<_>, _>>()?;
            let mut args = args.into_iter();
            match (op, args.len()) {
                ("+", n) if n >= 1 => Ok(Expr::Add(args.collect())),
                ("*", n) if n >= 1 => Ok(Expr::Mul(args.collect())),
                ("-", 1) => Ok(match args.next().expect("one") {
                    Expr::Num(r) if r.is_positive() => Expr::Num(-r),
                    a => Expr::Neg(Box::new(a)),
                }),
                ("-", 2) => Ok(Expr::Sub(Box::new(args.next().expect("two")), Box::new(args.next().expect("two")))),
                ("/", 2) => {
                    let (a, b) = (args.next().expect("two"), args.next().expect("two"));
                    Ok(match (&a, &b) {
                        (Expr::Num(p), Expr::Num(q)) if p.is_integer() && q.is_integer() && !p.is_negative() && q > &Rational::zero() => {
                            Expr::Num(p / q)
                        }
                        _ => Expr::Div(Box::new(a), Box::new(b)),
                    })
                }
                _ => Err(err(*line, format!("unsupported term operator {op}"))),
            }
        }
    }
}

pub(crate) fn parse_formula(s: &Sexp) -> Result<Formula, ExportError> {
    match s {
        Sexp::Atom(a, _) if a == "true" => Ok(Formula::And(Vec::new())),
        Sexp::Atom(a, _) if a == "false" => Ok(Formula::Or(Vec::new())),
        Sexp::Atom(a, line) => Err(err(*line, format!("unexpected atom {a}"))),
        Sexp::List(xs, line) => {
            let line = *line;
            let (head, args) = xs.split_first().ok_or_else(|| err(line, "empty formula"))?;
            let op = head.atom().ok_or_else(|| err(line, "operator expected"))?;
            let cmp = match op {
                "<=" => Some(Cmp::Le),
                ">=" => Some(Cmp::Ge),
                "=" => Some(Cmp::Eq),
                "<" => Some(Cmp::Lt),
                ">" => Some(Cmp::Gt),
                _ => None,
            };
            if let Some(c) = cmp {
                return match args {
                    [a, b] => Ok(Formula::Cmp(c, parse_expr(a)?, parse_expr(b)?)),
                    _ => Err(err(line, "comparisons take two terms")),
                };
            }
            let subs = || args.iter().map(parse_formula).collect::<Result<Vec<_>, _>>();
            match (op, args) {
                ("and", _) => Ok(Formula::And(subs()?)),
                ("or", _) => Ok(Formula::Or(subs()?)),
                ("not", [a]) => Ok(Formula::Not(Box::new(parse_formula(a)?))),
                ("=>", [a, b]) => Ok(Formula::Implies(Box::new(parse_formula(a)?), Box::new(parse_formula(b)?))),
                ("forall", [decls, body]) => {
                    let vars = decls
                        .list()
                        .ok_or_else(|| err(line, "forall needs a declaration list"))?
                        .iter()
                        .map(|d| match d.list() {
                            Some([Sexp::Atom(x, _), Sexp::Atom(sort, _)]) if sort == "Real" => Ok(x.clone()),
                            _ => Err(err(d.line(), "only Real quantifiers are supported")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Formula::Forall(vars, Box::new(parse_formula(body)?)))
                }
                _ => Err(err(line, format!("unsupported formula operator {op}"))),
            }
        }
    }
}

fn write_names(names: &[String]) -> String {
    format!("({})", names.join(" "))
}

pub(crate) fn write_definition(d: &Definition) -> String {
    match d {
        Definition::Max { var, of, selectors } | Definition::Min { var, of, selectors } => {
            let op = if matches!(d, Definition::Max { .. }) { "max" } else { "min" };
            format!("({op} {var} {} {})", write_names(of), write_names(selectors))
        }
        Definition::Abs { var, arg, sign } => {
            let mut out = format!("(abs {var} {sign} ");
            write_expr(arg, &mut out);
            out.push(')');
            out
        }
    }
}

fn names(s: &Sexp) -> Result<Vec<String>, ExportError> {
    s.list()
        .ok_or_else(|| err(s.line(), "name list expected"))?
        .iter()
        .map(|x| x.atom().map(str::to_string).ok_or_else(|| err(x.line(), "name expected")))
        .collect()
}

pub(crate) fn parse_definition(text: &str, line: usize) -> Result<Definition, ExportError> {
    let sexps = read_sexps(text, line)?;
    let items = match sexps.as_slice() {
        [Sexp::List(items, _)] => items,
        _ => return Err(err(line, "one definition per line")),
    };
    match items.as_slice() {
        [Sexp::Atom(op, _), Sexp::Atom(var, _), of, sel] if op == "max" || op == "min" => {
            let (var, of, selectors) = (var.clone(), names(of)?, names(sel)?);
            Ok(if op == "max" {
                Definition::Max { var, of, selectors }
            } else {
                Definition::Min { var, of, selectors }
            })
        }
        [Sexp::Atom(op, _), Sexp::Atom(var, _), Sexp::Atom(sign, _), arg] if op == "abs" => Ok(Definition::Abs {
            var: var.clone(),
            sign: sign.clone(),
            arg: parse_expr(arg)?,
        }),
        _ => Err(err(line, "unknown definition")),
    }
}

fn sense_name(s: Sense) -> &'static str {
    match s {
        Sense::Maximize => "maximize",
        Sense::Minimize => "minimize",
    }
}

fn parse_sense(s: &str, line: usize) -> Result<Sense, ExportError> {
    match s {
        "maximize" => Ok(Sense::Maximize),
        "minimize" => Ok(Sense::Minimize),
        _ => Err(err(line, format!("unknown sense {s}"))),
    }
}

fn bound_formula(v: &Variable) -> Vec<(String, Formula)> {
    let x = || Expr::Var(v.name.clone());
    let mut out = Vec::new();
    if let Some(lo) = &v.lower {
        out.push((format!("lb_{}", v.name), Formula::Cmp(Cmp::Le, Expr::Num(lo.clone()), x())));
    }
    if let Some(hi) = &v.upper {
        out.push((format!("ub_{}", v.name), Formula::Cmp(Cmp::Le, x(), Expr::Num(hi.clone()))));
    }
    out
}

/// SMT-LIB text; QF_NRA unless a constraint is quantified.
pub fn write_smtlib(doc: &ModelDocument) -> Result<String, ExportError> {
    let mut out = String::new();
    let w = |out: &mut String, s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    w(&mut out, format!("; kind {}", doc.kind.name()));
    if let Some(m) = &doc.big_m {
        let mut s = String::new();
        write_num(m, &mut s);
        w(&mut out, format!("; big-M {s}"));
    }
    for d in &doc.definitions {
        w(&mut out, format!("; def {}", write_definition(d)));
    }
    if let Some(o) = &doc.objective {
        let mut s = String::new();
        write_expr(&o.expr, &mut s);
        w(&mut out, format!("; objective {} {s}", sense_name(o.sense)));
    }
    if let Some(l) = &doc.lower {
        let mut s = String::new();
        write_expr(&l.objective.expr, &mut s);
        w(&mut out, format!("; lower-objective {} {s}", sense_name(l.objective.sense)));
        w(&mut out, format!("; lower-variables {}", write_names(&l.variables)));
        w(&mut out, format!("; lower-constraints {}", write_names(&l.constraints)));
    }
    let quantified = doc.constraints.iter().any(|c| c.formula.is_quantified());
    w(&mut out, format!("(set-logic {})", if quantified { "NRA" } else { "QF_NRA" }));
    for v in &doc.variables {
        if v.domain == Domain::Binary {
            return Err(ExportError::Unrepresentable {
                format: "SMT-LIB real arithmetic",
                what: format!("binary variable {}", v.name),
            });
        }
        w(&mut out, format!("(declare-fun {} () Real)", v.name));
    }
    let bounds = doc.variables.iter().flat_map(bound_formula);
    let named = bounds.chain(doc.constraints.iter().map(|c| (c.name.clone(), c.formula.clone())));
    for (name, f) in named {
        let mut s = String::new();
        write_formula(&f, &mut s);
        w(&mut out, format!("(assert (! {s} :named {name}))"));
    }
    w(&mut out, "(check-sat)".into());
    w(&mut out, "(exit)".into());
    Ok(out)
}

fn metadata_line(line: &str) -> Option<(&str, &str)> {
    let rest = line.trim_start().strip_prefix(';')?.trim_start();
    let (key, value) = rest.split_once(' ')?;
    Some((key, value.trim()))
}

/// Reads a document written by [`write_smtlib`].
pub fn parse_smtlib(text: &str) -> Result<ModelDocument, ExportError> {
    let mut doc = ModelDocument::new(DocumentKind::Etr);
    let mut lower_objective = None;
    let mut lower_variables = Vec::new();
    let mut lower_constraints = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let Some((key, value)) = metadata_line(line) else { continue };
        match key {
            "kind" => doc.kind = DocumentKind::from_name(value).ok_or_else(|| err(n, "unknown kind"))?,
            "big-M" => doc.big_m = Some(num_of(value, n)?),
            "def" => doc.definitions.push(parse_definition(value, n)?),
            "objective" | "lower-objective" => {
                let (sense, e) = value.split_once(' ').ok_or_else(|| err(n, "sense and term expected"))?;
                let expr = single(e, n).and_then(|s| parse_expr(&s))?;
                let o = ObjectiveFn {
                    sense: parse_sense(sense, n)?,
                    expr,
                };
                if key == "objective" {
                    doc.objective = Some(o);
                } else {
                    lower_objective = Some(o);
                }
            }
            "lower-variables" => lower_variables = names(&single(value, n)?)?,
            "lower-constraints" => lower_constraints = names(&single(value, n)?)?,
            _ => {}
        }
    }
    if let Some(objective) = lower_objective {
        doc.lower = Some(LowerLevel {
            variables: lower_variables,
            constraints: lower_constraints,
            objective,
        });
    }
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for s in read_sexps(text, 1)? {
        let items = s.list().ok_or_else(|| err(s.line(), "command expected"))?;
        match items {
            [Sexp::Atom(c, _), ..] if c == "set-logic" || c == "check-sat" || c == "exit" => {}
            [Sexp::Atom(c, _), Sexp::Atom(name, _), Sexp::List(args, _), Sexp::Atom(sort, line)] if c == "declare-fun" => {
                if !args.is_empty() || sort != "Real" {
                    return Err(err(*line, "only Real constants are supported"));
                }
                index.insert(name.clone(), doc.variables.len());
                doc.variables.push(Variable::free(name));
            }
            [Sexp::Atom(c, _), body] if c == "assert" => {
                let (formula, name) = match body.list() {
                    Some([Sexp::Atom(bang, _), f, Sexp::Atom(key, _), Sexp::Atom(name, _)]) if bang == "!" && key == ":named" => {
                        (parse_formula(f)?, name.clone())
                    }
                    _ => (parse_formula(body)?, format!("c{}", doc.constraints.len())),
                };
                if lift_bound(&mut doc, &index, &name, &formula).is_some() {
                    continue;
                }
                doc.constraints.push(Constraint { name, formula });
            }
            _ => return Err(err(s.line(), "unsupported command")),
        }
    }
    Ok(doc)
}

/// Moves `lb_x` / `ub_x` assertions back into variable bounds.
fn lift_bound(doc: &mut ModelDocument, index: &BTreeMap<String, usize>, name: &str, f: &Formula) -> Option<()> {
    let (lower, var) = match (name.strip_prefix("lb_"), name.strip_prefix("ub_")) {
        (Some(v), _) => (true, v),
        (_, Some(v)) => (false, v),
        _ => return None,
    };
    let slot = *index.get(var)?;
    match (lower, f) {
        (true, Formula::Cmp(Cmp::Le, Expr::Num(lo), Expr::Var(x))) if x == var => {
            doc.variables[slot].lower = Some(lo.clone())
        }
        (false, Formula::Cmp(Cmp::Le, Expr::Var(x), Expr::Num(hi))) if x == var => {
            doc.variables[slot].upper = Some(hi.clone())
        }
        _ => return None,
    }
    Some(())
}

fn single(text: &str, line: usize) -> Result<Sexp, ExportError> {
    let mut all = read_sexps(text, line)?;
    if all.len() != 1 {
        return Err(err(line, "one term expected"));
    }
    Ok(all.pop().expect("one"))
}

fn num_of(text: &str, line: usize) -> Result<Rational, ExportError> {
    match parse_expr(&single(text, line)?)? {
        Expr::Num(r) => Ok(r),
        _ => Err(err(line, "number expected")),
    }
}
