//! Optimization encodings of threshold problems, their text formats, and an
//! exact residual checker.

mod encode;
mod lp;
mod model;
mod smt;

pub use encode::{big_m, export_buchi_bilevel, export_reach_etr, export_reach_milp, threshold_assignment};
pub use lp::{parse_aux, parse_lp, write_aux, write_lp};
pub use model::{
    check_model_residual, complete_assignment, Cmp, Constraint, Definition, DocumentKind, Domain, EvalError, Expr,
    Formula, LowerLevel, ModelDocument, ObjectiveFn, ResidualReport, Sense, Variable, Violation,
};
pub use smt::{parse_smtlib, write_smtlib};

use crate::error::ExportError;

/// Emitted text of a document: the main file plus, for bilevel programs,
/// the auxiliary file naming the lower level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub aux: Option<String>,
    pub extension: &'static str,
}

/// CPLEX LP for linear documents, SMT-LIB otherwise.
pub fn render(doc: &ModelDocument) -> Result<Rendered, ExportError> {
    let linear = match doc.kind {
        DocumentKind::Milp => true,
        DocumentKind::Etr => false,
        DocumentKind::BilevelQuantified => doc.lower.is_some(),
    };
    if linear {
        Ok(Rendered {
            text: write_lp(doc)?,
            aux: write_aux(doc)?,
            extension: "lp",
        })
    } else {
        Ok(Rendered {
            text: write_smtlib(doc)?,
            aux: None,
            extension: "smt2",
        })
    }
}

/// Inverse of [`render`]; the format is recognized by its comment syntax.
pub fn parse_rendered(text: &str, aux: Option<&str>) -> Result<ModelDocument, ExportError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let mut doc = if first.starts_with(';') || first.starts_with('(') {
        parse_smtlib(text)?
    } else {
        parse_lp(text)?
    };
    if let Some(aux) = aux {
        parse_aux(&mut doc, aux)?;
    }
    Ok(doc)
}
