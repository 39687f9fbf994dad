use num_traits::{One, Zero};

use crate::error::ModelError;
use crate::scalar::{format_rational, Rational};

/// How the winning bid is paid.
///
/// Richman pays the loser, poorman pays the bank, taxman pays a fraction
/// `tau` to the bank and the rest to the loser. Richman and poorman are the
/// taxman rates 0 and 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mechanism {
    Richman,
    Poorman,
    Taxman(Rational),
}

impl Mechanism {
    pub fn taxman(tau: Rational) -> Result<Mechanism, ModelError> {
        if tau < Rational::zero() || tau > Rational::one() {
            return Err(ModelError::InvalidTau(format_rational(&tau)));
        }
        Ok(Mechanism::Taxman(tau))
    }

    pub fn tau(&self) -> Rational {
        match self {
            Mechanism::Richman => Rational::zero(),
            Mechanism::Poorman => Rational::one(),
            Mechanism::Taxman(t) => t.clone(),
        }
    }

    pub fn is_richman(&self) -> bool {
        self.tau().is_zero()
    }

    pub fn name(&self) -> String {
        match self {
            Mechanism::Richman => "richman".into(),
            Mechanism::Poorman => "poorman".into(),
            Mechanism::Taxman(t) => format!("taxman({})", format_rational(t)),
        }
    }
}
