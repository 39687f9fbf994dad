use thiserror::Error;

use crate::model::Player;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("invalid number {0:?}")]
    Number(String),
    #[error("malformed document: {0}")]
    Json(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown {what} {value:?}")]
    UnknownKind { what: &'static str, value: String },
    #[error("missing field {0}")]
    MissingField(&'static str),
}

/// Structural problems found while validating an arena description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArenaError {
    #[error("NoSuccessor({0})")]
    NoSuccessor(String),
    #[error("NegativeCharge({vertex}, {player})")]
    NegativeCharge { vertex: String, player: Player },
    #[error("DanglingEdge({0},{1})")]
    DanglingEdge(String, String),
    #[error("DuplicateVertex({0})")]
    DuplicateVertex(String),
    #[error("DuplicateSuccessor({0},{1})")]
    DuplicateSuccessor(String, String),
    #[error("EmptyArena")]
    EmptyArena,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("tax rate {0} outside [0,1]")]
    InvalidTau(String),
    #[error("unknown vertex {0:?} in objective")]
    UnknownVertex(String),
    #[error("frugal budget {value} at {vertex} outside [0,1]")]
    FrugalOutOfRange { vertex: String, value: String },
    #[error("frugal budget given for non-target vertex {0}")]
    FrugalOffTarget(String),
    #[error("budget {0} outside [0,1]")]
    BudgetOutOfRange(String),
    #[error(transparent)]
    Arena(#[from] ArenaErrors),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// The complete list of violations reported by arena validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid arena: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))]
pub struct ArenaErrors(pub Vec<ArenaError>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("configuration is in the wrong phase for this step")]
    WrongPhase,
    #[error("BidExceedsBudget({0})")]
    BidExceedsBudget(Player),
    #[error("NegativeBid({0})")]
    NegativeBid(Player),
    #[error("IllegalMove({0})")]
    IllegalMove(Player),
    #[error("UnboundedObjectiveNeedsInvariantCheck")]
    UnboundedObjectiveNeedsInvariantCheck,
    #[error("objective depends on budgets, not only on the path")]
    BudgetDependentObjective,
    #[error("empty prefix")]
    EmptyPrefix,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("NotConverged({iterations}, {residual})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("exact values exceeded {bits} bits after {iterations} iterations")]
    PrecisionCap { iterations: usize, bits: u64 },
    #[error("objective {0} is not supported by this solver")]
    UnsupportedObjective(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepairError {
    #[error("InadmissibleRepair: {0}")]
    InadmissibleRepair(String),
    #[error("SearchSpaceTooLarge: {candidates} candidates exceed the cap of {cap}")]
    SearchSpaceTooLarge { candidates: u128, cap: u128 },
    #[error("grid step and support bound must be positive")]
    InvalidGrid,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("UnsupportedObjectiveClass: {0}")]
    UnsupportedObjectiveClass(String),
    #[error("invalid turn-based arena: {0}")]
    InvalidArena(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExportError {
    #[error("NonRichmanMILPUnsupported")]
    NonRichmanMilpUnsupported,
    #[error("MissingVariable({0})")]
    MissingVariable(String),
    #[error("vertex id {0:?} cannot be used in a model variable name")]
    UnsupportedName(String),
    #[error("generated variable name {0} is not unique")]
    NameCollision(String),
    #[error("Büchi set must be nonempty")]
    EmptyBuchiSet,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{format} cannot express {what}")]
    Unrepresentable { format: &'static str, what: String },
}
