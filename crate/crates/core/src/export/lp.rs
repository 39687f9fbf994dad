//! CPLEX LP text for linear documents, and a MibS-style auxiliary file
//! naming the lower level of a bilevel program.
//!
//! Metadata (document kind, big-M, auxiliary definitions) travels in `\`
//! comment lines; definitions use the SMT-LIB term syntax.

use std::fmt::Write;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::model::{
    Cmp, Constraint, DocumentKind, Domain, Expr, Formula, LowerLevel, ModelDocument, ObjectiveFn, Sense, Variable,
};
use super::smt::{parse_definition, write_definition};
use crate::error::ExportError;
use crate::scalar::{parse_rational, Rational};

fn unrepresentable(what: impl Into<String>) -> ExportError {
    ExportError::Unrepresentable {
        format: "CPLEX LP",
        what: what.into(),
    }
}

fn err(line: usize, message: impl Into<String>) -> ExportError {
    ExportError::Parse {
        line,
        message: message.into(),
    }
}

/// Decimal text of `r`, which must have a terminating expansion.
fn decimal(r: &Rational) -> Result<String, ExportError> {
    if r.is_integer() {
        return Ok(r.numer().to_string());
    }
    let mut d = r.denom().clone();
    let (two, five) = (2.into(), 5.into());
    let (mut twos, mut fives) = (0u32, 0u32);
    while d.is_multiple_of(&two) {
        d /= &two;
        twos += 1;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
        fives += 1;
    }
    let digits = twos.max(fives);
    if !d.is_one() {
        return Err(unrepresentable(format!("coefficient {r} as a decimal")));
    }
    let scaled = (r.abs() * Rational::from_integer(num_bigint::BigInt::from(10).pow(digits))).to_integer();
    let text = format!("{:0>width$}", scaled, width = digits as usize + 1);
    let (int, frac) = text.split_at(text.len() - digits as usize);
    Ok(format!("{}{int}.{frac}", if r.is_negative() { "-" } else { "" }))
}

fn write_terms(terms: &[(Rational, String)], out: &mut String) -> Result<(), ExportError> {
    for (c, x) in terms {
        let sign = if c.is_negative() { '-' } else { '+' };
        write!(out, " {sign} {} {x}", decimal(&c.abs())?).expect("string write");
    }
    Ok(())
}

fn linear_parts(e: &Expr, what: &str) -> Result<(Vec<(Rational, String)>, Rational), ExportError> {
    e.as_linear().ok_or_else(|| unrepresentable(format!("nonlinear {what}")))
}

fn write_bound(v: &Variable) -> Result<String, ExportError> {
    Ok(match (&v.lower, &v.upper) {
        (None, None) => format!("{} free", v.name),
        (Some(lo), None) => format!("{} >= {}", v.name, decimal(lo)?),
        (None, Some(hi)) => format!("-inf <= {} <= {}", v.name, decimal(hi)?),
        (Some(lo), Some(hi)) => format!("{} <= {} <= {}", decimal(lo)?, v.name, decimal(hi)?),
    })
}

/// LP text of a linear document. Constraints must be non-strict linear
/// comparisons and the objective linear without constant.
pub fn write_lp(doc: &ModelDocument) -> Result<String, ExportError> {
    let mut out = String::new();
    writeln!(out, "\\ kind {}", doc.kind.name()).expect("string write");
    if let Some(m) = &doc.big_m {
        writeln!(out, "\\ big-M {}", decimal(m)?).expect("string write");
    }
    for d in &doc.definitions {
        writeln!(out, "\\ def {}", write_definition(d)).expect("string write");
    }
    let (sense, expr) = match &doc.objective {
        Some(o) => (o.sense, o.expr.clone()),
        None => (Sense::Minimize, Expr::linear(&[], &Rational::zero())),
    };
    let (terms, constant) = linear_parts(&expr, "objective")?;
    if !constant.is_zero() {
        return Err(unrepresentable("objective constant"));
    }
    out.push_str(match sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    write_terms(&terms, &mut out)?;
    out.push_str("\nSubject To\n");
    for c in &doc.constraints {
        let Formula::Cmp(op, lhs, rhs) = &c.formula else {
            return Err(unrepresentable(format!("constraint {} with connectives", c.name)));
        };
        let symbol = match op {
            Cmp::Le | Cmp::Ge | Cmp::Eq => op.symbol(),
            Cmp::Lt | Cmp::Gt => return Err(unrepresentable(format!("strict constraint {}", c.name))),
        };
        let (mut terms, lc) = linear_parts(lhs, "constraint")?;
        let (rterms, rc) = linear_parts(rhs, "constraint")?;
        for (c, x) in rterms {
            match terms.iter_mut().find(|(_, y)| *y == x) {
                Some((d, _)) => *d -= c,
                None => terms.push((-c, x)),
            }
        }
        terms.retain(|(c, _)| !c.is_zero());
        write!(out, " {}:", c.name).expect("string write");
        write_terms(&terms, &mut out)?;
        writeln!(out, " {symbol} {}", decimal(&(rc - lc))?).expect("string write");
    }
    out.push_str("Bounds\n");
    for v in doc.variables.iter().filter(|v| v.domain == Domain::Continuous) {
        writeln!(out, " {}", write_bound(v)?).expect("string write");
    }
    let binaries: Vec<&Variable> = doc.variables.iter().filter(|v| v.domain == Domain::Binary).collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for v in binaries {
            writeln!(out, " {}", v.name).expect("string write");
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "maximize" | "maximise" | "max" | "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn number(tok: &str, line: usize) -> Result<Rational, ExportError> {
    match tok {
        "-inf" | "-infinity" => Err(err(line, "infinite value where a number is required")),
        _ => parse_rational(tok).map_err(|e| err(line, e.to_string())),
    }
}

/// Parses `[+|-] [coef] name ...` into terms.
fn parse_terms(text: &str, line: usize) -> Result<Vec<(Rational, String)>, ExportError> {
    let mut terms = Vec::new();
    let mut sign = Rational::one();
    let mut coef: Option<Rational> = None;
    for tok in text.split_whitespace() {
        match tok {
            "+" => sign = Rational::one(),
            "-" => sign = -Rational::one(),
            t if t.starts_with(|c: char| c.is_ascii_digit() || c == '.') => coef = Some(number(t, line)?),
            name => {
                let c = coef.take().unwrap_or_else(Rational::one);
                terms.push((&sign * c, name.to_string()));
                sign = Rational::one();
            }
        }
    }
    if coef.is_some() {
        return Err(err(line, "constant terms are not supported on the left-hand side"));
    }
    Ok(terms)
}

fn split_cmp(text: &str) -> Option<(&str, Cmp, &str)> {
    for (sym, op) in [("<=", Cmp::Le), (">=", Cmp::Ge), ("=<", Cmp::Le), ("=>", Cmp::Ge), ("=", Cmp::Eq)] {
        if let Some((a, b)) = text.split_once(sym) {
            return Some((a, op, b));
        }
    }
    None
}

fn upsert<'a>(doc: &'a mut ModelDocument, name: &str) -> &'a mut Variable {
    if let Some(i) = doc.variables.iter().position(|v| v.name == name) {
        return &mut doc.variables[i];
    }
    doc.variables.push(Variable::bounded(name, Some(Rational::zero()), None));
    doc.variables.last_mut().expect("just pushed")
}

fn parse_bound(doc: &mut ModelDocument, text: &str, line: usize) -> Result<String, ExportError> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let value = |t: &str| -> Result<Option<Rational>, ExportError> {
        match t.to_ascii_lowercase().as_str() {
            "-inf" | "-infinity" | "+inf" | "inf" | "infinity" => Ok(None),
            _ => number(t, line).map(Some),
        }
    };
    let name = match toks.as_slice() {
        [x, _] | [x, _, _] => x,
        [_, _, x, _, _] => x,
        _ => return Err(err(line, format!("unrecognised bound {text:?}"))),
    }
    .to_string();
    match toks.as_slice() {
        [x, free] if free.eq_ignore_ascii_case("free") => {
            let v = upsert(doc, x);
            v.lower = None;
            v.upper = None;
        }
        [lo, "<=", x, "<=", hi] => {
            let (lo, hi) = (value(lo)?, value(hi)?);
            let v = upsert(doc, x);
            v.lower = lo;
            v.upper = hi;
        }
        [x, ">=", lo] => {
            let lo = value(lo)?;
            upsert(doc, x).lower = lo;
        }
        [x, "<=", hi] => {
            let hi = value(hi)?;
            upsert(doc, x).upper = hi;
        }
        [x, "=", fixed] => {
            let fixed = value(fixed)?;
            let v = upsert(doc, x);
            v.lower = fixed.clone();
            v.upper = fixed;
        }
        _ => return Err(err(line, format!("unrecognised bound {text:?}"))),
    }
    Ok(name)
}

/// Reads a document written by [`write_lp`].
pub fn parse_lp(text: &str) -> Result<ModelDocument, ExportError> {
    let mut doc = ModelDocument::new(DocumentKind::Milp);
    let mut section = Section::Preamble;
    let mut sense = Sense::Minimize;
    let mut objective_terms = Vec::new();
    let mut binaries = Vec::new();
    let mut bounded = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        if let Some(comment) = raw.trim_start().strip_prefix('\\') {
            match comment.trim().split_once(' ') {
                Some(("kind", k)) => doc.kind = DocumentKind::from_name(k.trim()).ok_or_else(|| err(n, "unknown kind"))?,
                Some(("big-M", m)) => doc.big_m = Some(number(m.trim(), n)?),
                Some(("def", d)) => doc.definitions.push(parse_definition(d.trim(), n)?),
                _ => {}
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_of(raw) {
            if s == Section::Objective {
                sense = if raw.trim().to_ascii_lowercase().starts_with("max") {
                    Sense::Maximize
                } else {
                    Sense::Minimize
                };
            }
            section = s;
            continue;
        }
        match section {
            Section::Objective => {
                let body = raw.split_once(':').map_or(raw, |(_, b)| b);
                objective_terms.extend(parse_terms(body, n)?);
            }
            Section::Constraints => {
                let (name, body) = raw.split_once(':').ok_or_else(|| err(n, "constraints need a name"))?;
                let (lhs, op, rhs) = split_cmp(body).ok_or_else(|| err(n, "comparison expected"))?;
                let terms = parse_terms(lhs, n)?;
                for (_, x) in &terms {
                    if !binaries.contains(x) && doc.variable(x).is_none() {
                        upsert(&mut doc, x);
                    }
                }
                doc.constraints.push(Constraint {
                    name: name.trim().to_string(),
                    formula: Formula::Cmp(op, Expr::linear(&terms, &Rational::zero()), Expr::Num(number(rhs.trim(), n)?)),
                });
            }
            Section::Bounds => bounded.push(parse_bound(&mut doc, raw, n)?),
            Section::Binaries => binaries.extend(raw.split_whitespace().map(str::to_string)),
            Section::Preamble | Section::End => return Err(err(n, "text outside any section")),
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing End"));
    }
    doc.variables.retain(|v| !binaries.contains(&v.name));
    doc.variables.sort_by_key(|v| bounded.iter().position(|x| *x == v.name).unwrap_or(usize::MAX));
    doc.variables.extend(binaries.iter().map(|b| Variable::binary(b)));
    doc.objective = Some(ObjectiveFn {
        sense,
        expr: Expr::linear(&objective_terms, &Rational::zero()),
    });
    Ok(doc)
}

/// MibS-style auxiliary text: lower-level variables with their objective
/// coefficients, lower-level constraints, and the lower objective sense.
pub fn write_aux(doc: &ModelDocument) -> Result<Option<String>, ExportError> {
    let Some(lower) = &doc.lower else { return Ok(None) };
    let (terms, constant) = linear_parts(&lower.objective.expr, "lower objective")?;
    if !constant.is_zero() {
        return Err(unrepresentable("lower objective constant"));
    }
    let mut out = String::new();
    writeln!(out, "@NUMVARS\n{}", lower.variables.len()).expect("string write");
    writeln!(out, "@NUMCONSTRS\n{}", lower.constraints.len()).expect("string write");
    out.push_str("@VARSBEGIN\n");
    for x in &lower.variables {
        let c = terms.iter().find(|(_, y)| y == x).map_or_else(Rational::zero, |(c, _)| c.clone());
        writeln!(out, "{x} {}", decimal(&c)?).expect("string write");
    }
    out.push_str("@VARSEND\n@CONSTSBEGIN\n");
    for c in &lower.constraints {
        writeln!(out, "{c}").expect("string write");
    }
    out.push_str("@CONSTSEND\n@OBJSENSE\n");
    out.push_str(match lower.objective.sense {
        Sense::Maximize => "MAX\n",
        Sense::Minimize => "MIN\n",
    });
    out.push_str("@END\n");
    Ok(Some(out))
}

/// Reads the lower level written by [`write_aux`] into `doc`.
pub fn parse_aux(doc: &mut ModelDocument, text: &str) -> Result<(), ExportError> {
    let mut block = "";
    let mut variables = Vec::new();
    let mut terms = Vec::new();
    let mut constraints = Vec::new();
    let mut sense = Sense::Minimize;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('@') {
            block = match line {
                "@VARSEND" | "@CONSTSEND" | "@END" => "",
                other => other,
            };
            continue;
        }
        match block {
            "@NUMVARS" | "@NUMCONSTRS" => {}
            "@VARSBEGIN" => {
                let (x, c) = line.split_once(' ').ok_or_else(|| err(n, "name and coefficient expected"))?;
                variables.push(x.to_string());
                let c = number(c.trim(), n)?;
                if !c.is_zero() {
                    terms.push((c, x.to_string()));
                }
            }
            "@CONSTSBEGIN" => constraints.push(line.to_string()),
            "@OBJSENSE" => {
                sense = match line {
                    "MAX" => Sense::Maximize,
                    "MIN" => Sense::Minimize,
                    _ => return Err(err(n, "MAX or MIN expected")),
                }
            }
            _ => return Err(err(n, "text outside any block")),
        }
    }
    doc.lower = Some(LowerLevel {
        variables,
        constraints,
        objective: ObjectiveFn {
            sense,
            expr: Expr::linear(&terms, &Rational::zero()),
        },
    });
    Ok(())
}
