//! Real-analysis primitives shared by the ladder and the chain solvers.
//!
//! Every routine takes a fallible integrand or target function so that errors
//! raised deep inside a ladder evaluation surface unchanged to the caller.

mod quadrature;
mod roots;

pub use quadrature::{integrate, integrate_pieces, integrate_with_limit, QuadratureResult, MAX_PANELS};
pub use roots::{find_level_crossing, invert_increasing, Bracket, MAX_SCAN_REFINEMENTS};

/// Local wavelength of the fastest oscillation of `Z(t)²` near height `t`.
///
/// `Z` has local frequency `θ′(t) ≈ ½ ln(t/2π)`, so its square oscillates with
/// angular frequency up to `ln(t/2π)`. Below `t = 2πe` the logarithm is
/// clamped to one.
pub fn z_squared_wavelength(t: f64) -> f64 {
    let freq = (t / std::f64::consts::TAU).ln().max(1.0);
    std::f64::consts::TAU / freq
}
