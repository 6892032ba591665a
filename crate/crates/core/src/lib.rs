//! Exact and numeric constructions of matrix-valued quantum correlations
//! that lie in the spatial (infinite-dimensional) tensor-product set but
//! cannot be produced by finite-dimensional tensor-product models.
//!
//! Layers, bottom-up:
//!
//! * [`field`]: exact scalars in ℚ(√2, ω).
//! * [`words`]: free products of cyclic groups, the embedding `ℤ₂*ℤ ↪ ℤ₂*ℤ₃`
//!   and its index-3 Schreier data.
//! * [`engine`]: exact operators and geometric-series vectors on `ℓ²(ℤ)` and
//!   `ℂ³⊗ℓ²(ℤ)`, plus cyclic dense truncations.
//! * [`correlations`]: PVMs, correlation tables, and the two witnesses.
//! * [`optimizer`]: finite-dimensional defect minimization.
//! * [`verify`]: exact and truncated checks of every displayed identity.

pub mod correlations;
pub mod engine;
pub mod error;
pub mod field;
pub mod linalg;
pub mod optimizer;
pub mod verify;
pub mod words;

pub use error::{CorrelationError, EngineError, FieldError, OptimizerError, WordError};
pub use field::{FieldElement, Rational};
pub use words::{GroupWord, Presentation};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
