//! # quinfo
//!
//! Entropy and information calculus over finite-dimensional C*-algebras.
//!
//! A finite-dimensional C*-algebra is a direct sum of full matrix algebras
//! ([`BlockAlgebra`]). On top of that the crate provides:
//!
//! - states and their restriction to subalgebras ([`state`]),
//! - finite POVMs, joint observables and the measurement instrument ([`observable`]),
//! - completely positive unital maps in Kraus form and their trace duals ([`operation`]),
//! - entropies, conditional entropies and (conditional) mutual informations in the
//!   observable, subalgebra and operation languages ([`infotheory`]),
//! - executable checkers for the classical entropy and information inequalities
//!   ([`inequalities`]),
//! - classical-quantum channels, multiway channel outer bounds, Fano converse checks and
//!   degraded broadcast evaluation ([`channels`]),
//! - a JSON document layer shared with the command-line front end ([`document`]).
//!
//! All logarithms are base 2 and every information quantity is reported in bits.

#![forbid(unsafe_code)]

pub mod algebra;
pub mod channels;
pub mod document;
pub mod fuzz;
pub mod inequalities;
pub mod infotheory;
pub mod linalg;
pub mod observable;
pub mod operation;
pub mod random;
pub mod state;

mod digest;

pub use algebra::{
    check_compatible, generated_product_algebra, make_commutative, multiplication_map, tensor,
    AlgebraElement, BlockAlgebra, Compatibility, CompatiblePair, GeneratedProduct, Label,
    MatrixUnit, MultiplicationMap, SubalgebraEmbedding, TensorProduct,
};
pub use digest::InputDigest;
pub use inequalities::{InequalityVerdict, Relation, VerdictStatus};
pub use infotheory::DivergenceValue;
pub use observable::{OutcomeDistribution, Povm};
pub use operation::{KrausMap, Operation};
pub use state::{DensityState, Spectrum};

use thiserror::Error;

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Operator-norm bound on commutators for compatibility certificates.
    pub const COMMUTATOR: f64 = 1e-9;
    /// Hermiticity defect (max entry of `A - A*`).
    pub const HERMITIAN: f64 = 1e-10;
    /// Residual of idempotency and matrix-unit relations.
    pub const IDEMPOTENT: f64 = 1e-10;
    /// Allowed deviation of a state's trace from one.
    pub const TRACE: f64 = 1e-10;
    /// Eigenvalues in `[-NEGATIVE_EIGENVALUE, 0)` are clamped to zero.
    pub const NEGATIVE_EIGENVALUE: f64 = 1e-8;
    /// Eigenvalues above this count towards a support or rank.
    pub const SUPPORT: f64 = 1e-10;
    /// Slack (bits) an inequality may be violated by before it fails.
    pub const PASS: f64 = 1e-8;
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty label set")]
    EmptyLabelSet,

    #[error("duplicate label {0}")]
    DuplicateLabel(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("algebra mismatch: expected {expected:?}, found {found:?}")]
    AlgebraMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("element leaves the block structure (off-block mass {0:e})")]
    OffBlock(f64),

    #[error("not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is not one (got {0})")]
    TraceNotOne(f64),

    #[error("map is not unital (defect {0:e})")]
    NotUnital(f64),

    #[error("map is not trace non-increasing (excess {0:e})")]
    NotTraceNonincreasing(f64),

    #[error("broken subalgebra embedding: {0}")]
    BrokenEmbedding(String),

    #[error("incompatible: commutator norm {norm:e} exceeds {tol:e} ({context})")]
    Incompatible {
        context: String,
        norm: f64,
        tol: f64,
    },

    #[error("product span is not closed under multiplication: {0}")]
    NotClosed(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("decomposition does not reconstruct the channel: {0}")]
    Decomposition(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("document error: {0}")]
    Document(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
