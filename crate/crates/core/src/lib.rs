//! A computational Jacob's ladder on the critical line.
//!
//! The ladder `φ₁` is defined implicitly by `V(φ₁(T)) = ∫₀ᵀ Z²(u) du` with the
//! normalizer `V(y) = y ln y + (c − ln 2π) y`. Its derivative is the normalized
//! square `Z̃²(t) = Z²(t)/ω(t)` with `ω(t) = V′(φ₁(t))`, so every change of
//! variables along a reverse-iteration tower is exact in the model.
//!
//! On top of the ladder the crate solves mean-value point chains for the
//! generating functions `sin²t`, `cos²t` and `(t − πL)^Δ`, and checks the
//! exact ζ-factorization and hybrid identities built from them.
//!
//! Module map:
//!
//! * [`numerics`]: adaptive Gauss–Kronrod quadrature, bracketed inversion and
//!   level-crossing search.
//! * [`zeta`]: Riemann–Siegel theta, Hardy's `Z(t)` and `|ζ(½+it)|²`.
//! * [`ladder`]: the cumulative Hardy–Littlewood table, `φ₁`, `ω`, `Z̃²` and
//!   reverse iteration.
//! * [`tower`]: iteration towers, chain weights and α/β point chains.
//! * [`hybrid`]: the crossbreeding identities and invariance scans.
//! * [`gaps`]: prime counting and the gap diagnostics between tower components.

// NaN must fail range checks, and tabulated nodes keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod gaps;
pub mod hybrid;
pub mod ladder;
pub mod numerics;
pub mod tower;
pub mod zeta;

pub use error::{Error, Result};

pub use numerics::{Bracket, QuadratureResult};

pub use hybrid::{DeltaPair, FormulaId, HybridParams, HybridReport, InvarianceScan, Verifier};
pub use ladder::{Constants, CumulativeTable, LadderConfig, LadderModel};
pub use tower::{ChainConfig, ChainPoints, ChainSet, FunctionFamily, IterationTower, Segment, TowerLimits};
pub use zeta::{ZSample, ZetaEvaluator};
