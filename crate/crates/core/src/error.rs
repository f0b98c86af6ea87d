use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series did not converge: {0}")]
    NonConvergent(String),
    #[error("(x;q)_n with n < 0 hits a pole")]
    PoleAtNegativeIndex,
    #[error("denominator parameter produces a pole at term {0}")]
    TermPole(usize),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("non-finite value: {0}")]
    Overflow(String),
    #[error("parameters outside the admissible set: {0}")]
    ParameterDomain(String),
    #[error("parameters are not generic: {0}")]
    NonGenericParameters(String),
    #[error("incompatible grids")]
    GridMismatch,
    #[error("Jackson sum tail did not decay: {0}")]
    TailNotConverged(String),
    #[error("Casorati determinant is not constant: {0}")]
    NonConstantCasorati(String),
    #[error("recurrence lost accuracy: {0}")]
    UnstableRecurrence(String),
    #[error("spectral parameter outside S_reg: {0}")]
    GammaNotRegular(String),
    #[error("spectral value lies on the continuous spectrum: {0}")]
    SpectralValueOnCut(String),
    #[error("quadrature did not reach the requested accuracy: {0}")]
    QuadratureNotConverged(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
