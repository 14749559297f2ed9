use thiserror::Error;

use crate::network::ValidationReport;

/// Terms that produced a non-positive posterior precision.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionTerms {
    /// Precision before the offending contribution was added.
    pub prior: f64,
    /// Child whose message was being applied.
    pub child: String,
    /// Named summands of the contribution.
    pub terms: Vec<(&'static str, f64)>,
    pub result: f64,
}

impl std::fmt::Display for PrecisionTerms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "prior={} child=`{}`", self.prior, self.child)?;
        for (name, v) in &self.terms {
            write!(f, " {name}={v}")?;
        }
        write!(f, " => {}", self.result)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HgfError {
    #[error("invalid network configuration:\n{0}")]
    Invalid(ValidationReport),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("unknown transform `{0}`")]
    UnknownTransform(String),

    #[error("transform `{0}` is already registered")]
    DuplicateTransform(String),

    #[error("time increment must be finite and > 0, got {0}")]
    InvalidTime(f64),

    #[error("no input supplied for input node `{0}`")]
    MissingInput(String),

    #[error("`{0}` is not an input node of this network")]
    UnknownInput(String),

    #[error("input node `{node}` at trial {trial}: {value} is not a valid observation ({reason})")]
    InvalidObservation {
        node: String,
        trial: u64,
        value: f64,
        reason: &'static str,
    },

    #[error("non-positive posterior precision in node `{node}` at trial {trial}: {terms}")]
    NegativePrecision {
        node: String,
        trial: u64,
        terms: PrecisionTerms,
    },

    #[error("non-finite {quantity} in node `{node}` at trial {trial} (value {value}, argument {argument})")]
    NonFinite {
        node: String,
        trial: u64,
        quantity: &'static str,
        value: f64,
        argument: f64,
    },

    #[error("mixture weights underflow in node `{node}` at trial {trial}: mu_hat={mu_hat}, pi_hat={pi_hat}, delta1={delta1}, delta0={delta0}")]
    MixtureUnderflow {
        node: String,
        trial: u64,
        mu_hat: f64,
        pi_hat: f64,
        delta1: f64,
        delta0: f64,
    },

    #[error("update sequencing violated in node `{node}` at trial {trial}: {detail}")]
    Sequencing {
        node: String,
        trial: u64,
        detail: String,
    },

    #[error("finite difference step must be finite and > 0, got {0}")]
    InvalidStep(f64),

    #[error("point {point} lies within one step of a non-smooth locus {locus} of `{transform}`")]
    NonSmoothPoint {
        transform: String,
        point: f64,
        locus: f64,
    },

    #[error("transform `{transform}` is not finite at {point}")]
    NonFiniteTransform { transform: String, point: f64 },

    #[error("simulation needs at least one trial")]
    NoTrials,

    #[error("simulation: node `{node}` at trial {trial} has non-positive variance {variance}")]
    NegativeVariance {
        node: String,
        trial: u64,
        variance: f64,
    },

    #[error("simulation: node `{node}` at trial {trial} produced non-finite value")]
    SimulationNonFinite { node: String, trial: u64 },
}

pub type Result<T, E = HgfError> = std::result::Result<T, E>;
