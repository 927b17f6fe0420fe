//! Tolerances shared across modules. All are relative to the natural
//! Frobenius scale of the quantities involved unless stated otherwise.

/// Default relative tolerance for hermiticity, kernels, and projector identities.
pub const DEFAULT: f64 = 1e-10;

/// Relative band used to call a vector neutral.
pub const NEUTRAL: f64 = 1e-9;

/// Jacobi stops once the off-diagonal Frobenius norm drops below this fraction of the input norm.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-13;

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Condition numbers above this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Commutator hypotheses of the conditional relations are gated at this relative residual.
pub const HYPOTHESIS_GATE: f64 = 1e-8;

/// An inequality passes when `margin >= -VERDICT * (1 + |rhs|)`.
pub const VERDICT: f64 = 1e-8;

/// Rounding clamp for provably nonnegative radicands.
pub const RADICAND_CLAMP: f64 = 1e-12;

/// Pencil residual bound `|Ax - lambda Bx| <= PENCIL_RESIDUAL (|A| + |lambda||B|)`.
pub const PENCIL_RESIDUAL: f64 = 1e-8;

/// Roots closer than this (relative) are merged into one cluster.
pub const ROOT_MERGE: f64 = 1e-7;

pub const MAX_PENCIL_DIM: usize = 8;
