use thiserror::Error;

/// Failures raised by the numerical routines.
///
/// Most variants mark a precondition of the underlying geometric statement
/// that does not hold for the given input (e.g. the principal logarithm is not
/// defined, or a probe leaves the ball where convexity is guaranteed).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("symmetry violation: residual {residual:e} exceeds {tolerance:e}")]
    SymmetryViolation { residual: f64, tolerance: f64 },
    #[error("matrix is not unitary: residual {0:e}")]
    NotUnitary(f64),
    #[error("eigenvalue at -1 (distance {0:e}); principal logarithm undefined")]
    EigenvalueAtMinusOne(f64),
    #[error("transport is singular: |phi| = {0:e}")]
    SingularTransport(f64),
    #[error("matrix is numerically singular (smallest singular value {0:e})")]
    Singular(f64),
    #[error("function is undefined at eigenvalue {0}")]
    FunctionUndefined(f64),
    #[error("invalid Schatten exponent {0}: must be an even integer >= {1}")]
    InvalidExponent(u32, u32),
    #[error("imaginary residue {residue:e} exceeds {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },
    #[error("argument {0} outside the domain of the inverse sinc")]
    DomainError(f64),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("single eigenvalue: the inner derivation vanishes")]
    SingleEigenvalue,
    #[error("invalid spectral decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("vector is not tangent to the orbit (diagonal-block residual {0:e})")]
    NotTangent(f64),
    #[error("cross-section undefined: {0}")]
    OutsideSection(String),
    #[error("lifting norm {0} is not below pi/2")]
    NormTooLarge(f64),
    #[error("not an orthogonal projection: residual {0:e}")]
    NotProjection(f64),
    #[error("projections are at distance one; use the full assembly")]
    NormOne,
    #[error("corner dimensions differ: dim H01 = {h01}, dim H10 = {h10}")]
    ComponentMismatch { h01: usize, h10: usize },
    #[error("matrix is not in the nilpotent orbit shape: {0}")]
    NotOrbitShape(String),
    #[error("cross-section s(b) is numerically singular (smallest singular value {0:e})")]
    NotInSection(f64),
    #[error("index {index} out of range 1..={len}")]
    OutOfRange { index: usize, len: usize },
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
