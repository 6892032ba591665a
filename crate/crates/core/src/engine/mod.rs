//! Exact operator engine on `ℓ²(ℤ)` and its induced version on `ℂ³⊗ℓ²(ℤ)`,
//! plus cyclic truncation to finite dimensions.

pub mod ops;
pub mod truncate;
pub mod vector;

pub use ops::{
    builtin_operator, induced_sigma, induced_sigma_by_cosets, plain_pi, sigma_generator,
    AffineIndexMap, BlockOp, PiecewiseScalar, PrimitiveOp, BUILTIN_NAMES,
};
pub use truncate::{dense_operator, dense_vector, truncate_cyclic, DenseMatrix, DenseModel, DenseModelJson, ModelKind};
pub use vector::{
    apply, gram_schmidt, inner, zeta1, zeta2, zeta3, GeometricString, GramSchmidt, SiteTag,
    StructuredVector,
};
