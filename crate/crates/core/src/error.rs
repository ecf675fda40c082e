use thiserror::Error;

/// Errors raised by constructors and operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("state trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("negative eigenvalue {0:.3e}: not a valid state")]
    NegativeEigenvalue(f64),

    #[error("rank {rank} out of range 1..={dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("index {name}={value} out of range 0..{bound}")]
    IndexOutOfRange {
        name: &'static str,
        value: usize,
        bound: usize,
    },

    #[error("parameter {name}={value} outside allowed range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("Kraus weight constraint violated: (d-1)(r + d p) = {0} > 1")]
    WeightConstraint(f64),

    #[error(
        "parameters outside the depolarizing/q-c mixture regime: need p <= r <= (1 - d(d-1)p)/d \
         (d={d}, r={r}, p={p})"
    )]
    OutsideMixtureRegime { d: usize, r: f64, p: f64 },

    #[error("prime dimension required, got {0}")]
    PrimeDimensionRequired(usize),

    #[error("columns are not orthonormal (max deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("channel is not trace preserving (defect {0:.3e})")]
    NotTracePreserving(f64),

    #[error("channel is not completely positive (Choi min eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(expected: impl ToString, actual: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}
