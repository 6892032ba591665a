//! PVMs, matrix-valued correlation tables `P(a,b|x,y) = W*(E_{a,x}⊗F_{b,y})W`,
//! and the two witnesses with their residuals.
//!
//! Conventions used throughout:
//! * outcome 2 of a two-outcome observable carries the `+1` eigenspace, so `S = E₂ − E₁`;
//! * entry `(i, j)` of `W*XW` is `⟨Xζ_j, ζ_i⟩`;
//! * the first combination of the three-outcome witness is read with both inputs at 1.

pub mod model;
pub mod pvm;
pub mod table;
pub mod witness;

pub use model::{
    assemble_exact, assemble_numeric, cyclic_w23_model, cyclic_w32_model, w23_exact_model,
    w32_exact_model, ExactModel, NumericModel,
};
pub use pvm::{
    dense_pvm_from_involution, dense_pvm_from_order3, pvm_from_involution, pvm_from_order3,
    ExactPvm, NumericPvm,
};
pub use table::{AnyTable, CorrelationTable, Key, Marginals};
pub use witness::{
    build_witness_w23, build_witness_w32, certificate_check, residual, residual_w23,
    residual_w32, CertificateReport, LinearTerm, Residual, WitnessId, WitnessSpec, WitnessW23,
    WitnessW32,
};
