use thiserror::Error;

/// Errors produced by the solvers and builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mass matrix is not symmetric positive definite")]
    MassNotPositive,

    #[error("network is unstable: nonpositive squared normal frequency {0}")]
    UnstableNetwork(f64),

    #[error("reservoir contact sets overlap")]
    ContactOverlap,

    #[error("pencil is defective or near-degenerate: {0}")]
    DegeneratePencil(String),

    #[error("undamped mode found: Re(s) = {0} is not negative")]
    UndampedMode(f64),

    #[error("closed-system spectrum is near-degenerate (gap {0}), perturbation formula invalid")]
    DegenerateSpectrum(f64),

    #[error("evaluation point is within tolerance of a pole at s = {0}")]
    PoleEvaluation(num_complex::Complex<f64>),

    #[error("digamma pole: argument {0} is a nonpositive integer")]
    DigammaPole(num_complex::Complex<f64>),

    #[error("divergent argument: {0}")]
    DivergentArgument(String),

    #[error("modes {0} and {1} have nearly opposite poles; spectral sum is ill-conditioned")]
    NumericalDegeneracy(usize, usize),

    #[error("network does not have the required mirror symmetry (residual {0:.3e})")]
    NotSymmetric(f64),

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("wrong cutoff regime: {0}")]
    WrongRegime(String),

    #[error("eigendecomposition failed to converge")]
    EigFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
