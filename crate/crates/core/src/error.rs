use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("big-float evaluation did not stabilise below the {cap}-bit precision cap")]
    NonConvergence { cap: u32 },

    #[error("root finder failed to converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("adaptive quadrature stopped with error estimate {estimate:e}")]
    QuadratureFailure { estimate: f64 },

    #[error("branch continuation is ambiguous: {0}")]
    BranchAmbiguity(String),

    #[error("polynomial is not square-free (gcd with derivative has degree {gcd_degree})")]
    NotSquareFree { gcd_degree: usize },

    #[error("root isolation found {found} real roots for a polynomial of degree {degree}")]
    IsolationFailure { found: usize, degree: usize },

    #[error("grid of {nodes} nodes exceeds the budget of {budget}")]
    GuardExceeded { nodes: u128, budget: u128 },

    #[error("quadrature imaginary part {imag:e} is not negligible against {value:e}")]
    Asymmetry { imag: f64, value: f64 },

    #[error("singular value decomposition failed (seed {seed})")]
    DecompositionFailure { seed: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::BranchAmbiguity(_) => "BranchAmbiguity",
            Error::NotSquareFree { .. } => "NotSquareFree",
            Error::IsolationFailure { .. } => "IsolationFailure",
            Error::GuardExceeded { .. } => "GuardExceeded",
            Error::Asymmetry { .. } => "AsymmetryWarning",
            Error::DecompositionFailure { .. } => "DecompositionFailure",
            Error::Parse(_) => "ParseError",
        }
    }

    /// True for errors caused by bad caller input rather than numerical trouble.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidParams(_)
                | Error::GuardExceeded { .. }
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
