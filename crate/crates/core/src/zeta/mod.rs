//! Riemann–Siegel theta, Hardy's Z function and `|ζ(½+it)|²`.
//!
//! Heights `t ≥ 200` use the Riemann–Siegel main sum with up to five
//! correction terms `C₀..C₄`, stored as Taylor tables in `p − ½`. Heights
//! below that use Euler–Maclaurin summation of ζ itself, rotated by `e^{iθ}`.
//! For the cumulative integral the evaluator also supplies `|ζ|²` on `[0, 10)`
//! where the asymptotic theta series is not valid.

mod euler_maclaurin;
mod rs_coeffs;

use std::f64::consts::{FRAC_PI_8, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lowest height accepted by [`rs_theta`] and [`ZetaEvaluator::hardy_z`].
pub const RS_FLOOR: f64 = 10.0;

/// Heights at or above this use the Riemann–Siegel formula.
pub const RS_CROSSOVER: f64 = 200.0;

/// Default number of Riemann–Siegel correction terms beyond `C₀`.
pub const DEFAULT_RS_TERMS: usize = 4;

const MAX_RS_TERMS: usize = 4;

// Gabcke's bounds |R_K(t)| ≤ d_K t^{-(2K+3)/4}, valid for t ≥ 200.
const GABCKE: [f64; 5] = [0.127, 0.053, 0.011, 0.031, 0.017];

// (1 − 2^{1−2k}) |B_2k| / (4k(2k−1)) for k = 1..=5
const THETA_SERIES: [f64; 5] = [
    1.0 / 48.0,
    7.0 / 5760.0,
    31.0 / 80_640.0,
    127.0 / 430_080.0,
    511.0 / 1_216_512.0,
];

/// One evaluation of Hardy's function on the critical line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZSample {
    pub t: f64,
    pub z: f64,
    pub theta: f64,
    pub err_bound: f64,
}

/// Riemann–Siegel theta from its asymptotic expansion, accurate to about
/// `1e−12` for `t ≥ 10`.
pub fn rs_theta(t: f64) -> Result<f64> {
    if !(t >= RS_FLOOR) {
        return Err(Error::DomainTooSmall {
            what: "rs_theta",
            value: t,
            floor: RS_FLOOR,
        });
    }
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    let mut tail = 0.0;
    for c in THETA_SERIES.iter().rev() {
        tail = tail * inv2 + c;
    }
    Ok(0.5 * t * (t / TAU).ln() - 0.5 * t - FRAC_PI_8 + tail * inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZetaEvaluator {
    rs_terms: usize,
}

impl Default for ZetaEvaluator {
    fn default() -> Self {
        ZetaEvaluator {
            rs_terms: DEFAULT_RS_TERMS,
        }
    }
}

impl ZetaEvaluator {
    /// `rs_terms` counts the correction terms after `C₀`, from 0 to 4.
    pub fn new(rs_terms: usize) -> Result<Self> {
        if rs_terms > MAX_RS_TERMS {
            return Err(Error::InvalidParameter(format!(
                "Riemann–Siegel correction depth {rs_terms} exceeds {MAX_RS_TERMS}"
            )));
        }
        Ok(ZetaEvaluator { rs_terms })
    }

    pub fn rs_terms(&self) -> usize {
        self.rs_terms
    }

    pub fn hardy_z(&self, t: f64) -> Result<ZSample> {
        let theta = rs_theta(t)?;
        if t < RS_CROSSOVER {
            let (zeta, err) = euler_maclaurin::zeta_half_line(t);
            let rotated = zeta * num_complex::Complex64::from_polar(1.0, theta);
            // theta is good to ~1e-12, which leaks into Z through the rotation
            let err_bound = err + 1e-12 * zeta.norm();
            return Ok(ZSample {
                t,
                z: rotated.re,
                theta,
                err_bound,
            });
        }
        let a = (t / TAU).sqrt();
        let n = a.floor() as u64;
        let mut main = 0.0;
        for k in 1..=n {
            let kf = k as f64;
            main += (theta - t * kf.ln()).cos() / kf.sqrt();
        }
        main *= 2.0;

        let u = a - n as f64 - 0.5;
        let mut corr = 0.0;
        let mut scale = 1.0;
        let tables: [&[f64]; 5] = [&rs_coeffs::C0, &rs_coeffs::C1, &rs_coeffs::C2, &rs_coeffs::C3, &rs_coeffs::C4];
        for table in tables.iter().take(self.rs_terms + 1) {
            corr += horner(table, u) * scale;
            scale /= a;
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let z = main + sign * corr / a.sqrt();

        let k = self.rs_terms;
        let truncation = GABCKE[k] * t.powf(-(2.0 * k as f64 + 3.0) / 4.0);
        // cos(θ − t ln n) with |θ| ~ t ln t loses about ulp(θ) per term
        let roundoff = 2.0 * n as f64 * f64::EPSILON * theta.abs().max(1.0);
        Ok(ZSample {
            t,
            z,
            theta,
            err_bound: truncation + roundoff,
        })
    }

    /// `|ζ(½+it)|² = Z(t)²` for `t ≥ 10`.
    pub fn zeta_mod_sq(&self, t: f64) -> Result<f64> {
        let s = self.hardy_z(t)?;
        Ok(s.z * s.z)
    }

    /// `|ζ(½+it)|²` for any `t ≥ 0`: below [`RS_FLOOR`] it is evaluated
    /// directly by Euler–Maclaurin summation, elsewhere it is `Z(t)²`.
    pub fn mod_sq_extended(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::DomainTooSmall {
                what: "mod_sq_extended",
                value: t,
                floor: 0.0,
            });
        }
        if t < RS_FLOOR {
            return Ok(euler_maclaurin::zeta_half_line(t).0.norm_sqr());
        }
        self.zeta_mod_sq(t)
    }

    /// Heights in `(a, b)` where the evaluated `Z` may jump by up to its error
    /// bound: the switch to Riemann–Siegel and every `2πN²` where the main sum
    /// gains a term.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if a < RS_CROSSOVER && RS_CROSSOVER < b {
            out.push(RS_CROSSOVER);
        }
        let lo = a.max(RS_CROSSOVER);
        if lo >= b {
            return out;
        }
        let mut n = (lo / TAU).sqrt().floor() as u64;
        loop {
            let x = TAU * (n * n) as f64;
            if x >= b {
                break;
            }
            if x > a && x >= RS_CROSSOVER {
                out.push(x);
            }
            n += 1;
        }
        out
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
