//! Threshold budgets for two-player bidding games with charging.

pub mod buchi;
pub mod error;
pub mod export;
pub mod fixpoint;
pub mod fixtures;
pub mod format;
pub mod model;
pub mod reduction;
pub mod repair;
pub mod scalar;
pub mod solve;
pub mod strategy;

pub use scalar::{Rational, Scalar, Value};

pub type ExactThresholds = fixpoint::ThresholdVector<Rational>;
pub type ApproxThresholds = fixpoint::ThresholdVector<f64>;
