//! Error type shared by all modules of the crate.

use thiserror::Error;

use crate::weyl::Root;

/// Errors raised by the algebra, module, operator, and group layers.
///
/// Truncation-related conditions are always explicit errors, never silent:
/// an identity is only ever asserted when it is fully inside the stored
/// window.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KmError {
    #[error("not a generalized Cartan matrix: axiom {axiom} fails at entry ({row},{col})")]
    NotAGcm { axiom: &'static str, row: usize, col: usize },

    #[error("matrix is not symmetrizable")]
    NotSymmetrizable,

    #[error("not a real root: {0}")]
    NotRealRoot(Root),

    #[error("index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),

    #[error("bracket leaves the cutoff window at root {0} (cutoff {1})")]
    CutoffExceeded(Root, i64),

    #[error("result has a nonzero component at degree {0} outside the window")]
    WindowExceeded(i64),

    #[error("support touched the window floor at degree {0}; result would be lossy")]
    WindowFloorLoss(i64),

    #[error("lowering operator is not locally nilpotent on this module")]
    NonIntegrableLowering,

    #[error("operator is not a smear operator: moves a degree-{0} vector downward")]
    NotSmear(i64),

    #[error("series is not a group element: constant term is {0}, expected 1")]
    NotGroupElement(String),

    #[error("series has the wrong constant term for this operation")]
    WrongConstantTerm,

    #[error("series is not a Lie element (leading word {0:?} is not Lyndon)")]
    NotLieElement(Vec<u8>),

    #[error("factor of degree {0} is not homogeneous of that degree")]
    WrongDegree(i64),

    #[error("supplied lattice is not a restricted weight lattice: {0}")]
    NotRestrictedLattice(String),

    #[error("grading axiom {axiom} fails with witness {witness}")]
    GradingAxiomFailed { axiom: &'static str, witness: String },

    #[error("requested depth {0} exceeds the algebra cutoff {1}")]
    DepthExceedsCutoff(i64, i64),

    #[error("exponential of a negative imaginary root vector is not defined in the positive completion (root {0})")]
    NegativeImaginaryExponential(Root),

    #[error("root {0} does not have negative norm; the Magnus embedding degenerates to the abelian case")]
    NotNegativeNorm(Root),

    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(i64, i64),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, KmError>;
