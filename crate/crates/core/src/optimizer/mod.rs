//! Finite-dimensional defect minimization over PVM frames and the state
//! isometry.
//!
//! Each observable is a unitary frame `Q` with fixed outcome labels, so
//! `E_a = Q·D_a·Q*` stays an exact PVM; the vector map `W : ℂⁿ → ℂ^{d_A d_B}`
//! is kept on the Stiefel manifold by polar retraction.

pub mod objective;
pub mod params;
pub mod search;

pub use objective::{gradient_check, perturb, Gradient, GradientCheck, Objective};
pub use params::{exp_skew, polar, ModelCheckpoint, ModelParams, Observable, ObservableJson};
pub use search::{
    cyclic_warm_start, minimize, restart_seed, retract, sweep, to_csv, DefectReport, RunRecord,
    Schedule, StartKind, SweepConfig, SweepOutcome, Trace,
};
