use crate::complex::ComplexScalar;
use serde::Serialize;

/// One candidate reading of an ambiguous Jordan structure: `(eigenvalue, cell size)` pairs.
pub type CellList = Vec<(ComplexScalar, usize)>;

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
pub enum Error {
    #[error("denominator {magnitude:.3e} too close to zero at x = {x}")]
    PoleProximity { x: f64, magnitude: f64 },

    #[error("parameter `{0}` does not occur in the expression")]
    UnknownParameter(String),

    #[error("Wronskian of the full basis vanishes near x = {x} (|w_N| = {magnitude:.3e})")]
    SingularPartner { x: f64, magnitude: f64 },

    #[error("intermediate Wronskian w_{index} vanishes near x = {x}")]
    SingularIntermediate { index: usize, x: f64 },

    #[error("basis is not invariant under h: fit residual {residual:.3e}")]
    NotInvariantSubspace { residual: f64 },

    #[error("rank decision is ambiguous; candidate structures: {candidates:?}")]
    IllConditioned { candidates: Vec<CellList> },

    #[error("eigenvalue {eigenvalue:?} owns {cells} Jordan cells (at most two allowed)")]
    TooManyCells { eigenvalue: ComplexScalar, cells: usize },

    #[error("triangle transform needs a nonzero leading coefficient")]
    DegenerateTransform,

    #[error("integrand grows at {side} (decay exponent {exponent:.3})")]
    NonIntegrable { side: String, exponent: f64 },

    #[error("integrand decays too slowly at {side} (decay exponent {exponent:.3})")]
    TailUnbounded { side: String, exponent: f64 },

    #[error("normalizability at {side} is inconclusive: {detail}")]
    Inconclusive { side: String, detail: String },

    #[error("oscillatory integral did not stabilize (achieved {achieved:.3e})")]
    SlowConvergence { achieved: f64 },

    #[error("level {lambda:?} is real and positive, outside the class covered by the theorems")]
    IneligibleLevel { lambda: ComplexScalar },

    #[error("Corollary hypothesis unmet: h+ has a normalizable chain of length {nu_plus}")]
    HypothesisUnmet { nu_plus: usize },

    #[error("parameter domain violation: {0}")]
    ParameterDomain(String),

    #[error("extrapolation unstable (spread {spread:.3e})")]
    ExtrapolationUnstable { spread: f64 },

    #[error("no coalescence constant matches the first-order functions (mismatch {mismatch:.3e})")]
    KappaMismatch { mismatch: f64 },

    #[error("test function outside the admissible class: {detail}")]
    ClassMismatch { detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
