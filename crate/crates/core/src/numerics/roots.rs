use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of times [`find_level_crossing`] doubles its scan grid before
/// giving up.
pub const MAX_SCAN_REFINEMENTS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo < hi {
            Ok(Bracket { lo, hi })
        } else {
            Err(Error::BracketInvalid {
                lo,
                hi,
                reason: "need lo < hi",
            })
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Solves `g(x) = target` for a nondecreasing `g` on `bracket`.
///
/// Uses Brent's method on `g − target`; the returned point is one end of a
/// sign-change bracket of width at most `tol` (up to a few ulps of `x`).
pub fn invert_increasing<G>(mut g: G, bracket: Bracket, target: f64, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(bracket.lo < bracket.hi) {
        return Err(Error::BracketInvalid {
            lo: bracket.lo,
            hi: bracket.hi,
            reason: "need lo < hi",
        });
    }
    let flo = g(bracket.lo)? - target;
    if flo == 0.0 {
        return Ok(bracket.lo);
    }
    let fhi = g(bracket.hi)? - target;
    if fhi == 0.0 {
        return Ok(bracket.hi);
    }
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::BracketInvalid {
            lo: bracket.lo,
            hi: bracket.hi,
            reason: "target not enclosed by g(lo) ≤ target ≤ g(hi)",
        });
    }
    brent(|x| Ok(g(x)? - target), bracket.lo, bracket.hi, flo, fhi, tol)
}

// Brent–Dekker zeroin. `fa` and `fb` must have opposite signs.
fn brent<H>(mut h: H, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> Result<f64>
where
    H: FnMut(f64) -> Result<f64>,
{
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.25 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = h(b)?;
    }
    Ok(b)
}

/// Finds the leftmost crossing of `level` by `g` inside the open interval
/// `(a, b)`.
///
/// The interval is sampled on a uniform grid of `scan_points` panels; the first
/// panel whose end values straddle the level is refined by bisection to width
/// `tol`. A grid point hitting the level exactly wins if it comes first. If no
/// sign change is seen, the grid is doubled up to [`MAX_SCAN_REFINEMENTS`]
/// times. The returned point is always strictly inside `(a, b)`.
pub fn find_level_crossing<G>(mut g: G, a: f64, b: f64, level: f64, scan_points: usize, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::BracketInvalid {
            lo: a,
            hi: b,
            reason: "need a < b",
        });
    }
    let base = scan_points.max(2);
    for depth in 0..=MAX_SCAN_REFINEMENTS {
        let n = base << depth;
        let grid = |i: usize| if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
        let mut x_prev = a;
        let mut h_prev = g(a)? - level;
        for i in 1..=n {
            let x = grid(i);
            let h = g(x)? - level;
            if h == 0.0 && i < n {
                return Ok(x);
            }
            if (h_prev < 0.0 && h > 0.0) || (h_prev > 0.0 && h < 0.0) {
                return bisect(&mut g, level, x_prev, h_prev, x, h, a, b, tol);
            }
            x_prev = x;
            h_prev = h;
        }
    }
    Err(Error::NoCrossing { a, b, level })
}

#[allow(clippy::too_many_arguments)]
fn bisect<G>(g: &mut G, level: f64, mut lo: f64, mut h_lo: f64, mut hi: f64, mut h_hi: f64, a: f64, b: f64, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h = g(mid)? - level;
        if h == 0.0 {
            return Ok(mid);
        }
        if (h < 0.0) == (h_lo < 0.0) {
            lo = mid;
            h_lo = h;
        } else {
            hi = mid;
            h_hi = h;
        }
    }
    // Prefer the end with the smaller residual, but never return a or b.
    let (first, second) = if h_lo.abs() <= h_hi.abs() { (lo, hi) } else { (hi, lo) };
    if first > a && first < b {
        Ok(first)
    } else if second > a && second < b {
        Ok(second)
    } else {
        Ok(0.5 * (lo + hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn square_root_of_two() {
        let x = invert_increasing(|x| Ok(x * x), Bracket::new(1.0, 2.0).unwrap(), 2.0, 1e-12).unwrap();
        assert!((x - 2f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn identity_inversion() {
        let x = invert_increasing(Ok, Bracket::new(0.0, 1.0).unwrap(), 0.25, 1e-14).unwrap();
        assert!((x - 0.25).abs() <= 1e-14);
    }

    #[test]
    fn x_plus_sin_residual() {
        let g = |x: f64| x + x.sin();
        let tol = 1e-12;
        let x = invert_increasing(|x| Ok(g(x)), Bracket::new(0.0, 4.0).unwrap(), 3.0, tol).unwrap();
        // g′ ≤ 2, so the residual is bounded by twice the bracket width
        assert!((g(x) - 3.0).abs() <= 2.0 * tol);
    }

    #[test]
    fn inversion_rejects_unenclosed_target() {
        let err = invert_increasing(Ok, Bracket { lo: 0.0, hi: 1.0 }, 2.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::BracketInvalid { .. }));
        assert!(Bracket::new(1.0, 1.0).is_err());
    }

    #[test]
    fn sin_squared_unique_crossing() {
        let l = 200.0;
        let (a, b) = (PI * l, PI * l + 1.0);
        let x = find_level_crossing(|t| Ok(t.sin().powi(2)), a, b, 0.3, 64, 1e-13).unwrap();
        let expected = PI * l + 0.3f64.sqrt().asin();
        assert!((x - expected).abs() < 1e-11, "{x} vs {expected}");
    }

    #[test]
    fn constant_function_takes_leftmost_grid_point() {
        let x = find_level_crossing(|_| Ok(2.5), 0.0, 1.0, 2.5, 10, 1e-12).unwrap();
        assert_eq!(x, 0.1);
    }

    #[test]
    fn leftmost_of_several_crossings() {
        // sin crosses 0.5 at π/6 and 5π/6 on (0, π)
        let x = find_level_crossing(|t| Ok(t.sin()), 0.0, PI, 0.5, 16, 1e-14).unwrap();
        assert!((x - PI / 6.0).abs() < 1e-13);
    }

    #[test]
    fn narrow_feature_found_after_refinement() {
        // a bump of width 0.02 that a 4-panel grid misses
        let bump = |t: f64| Ok(if (t - 0.37).abs() < 0.01 { 1.0 } else { 0.0 });
        let x = find_level_crossing(bump, 0.0, 1.0, 0.5, 4, 1e-12).unwrap();
        assert!((x - 0.36).abs() < 1e-9);
    }

    #[test]
    fn no_crossing_is_an_error() {
        let err = find_level_crossing(Ok, 0.0, 1.0, 5.0, 8, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NoCrossing { .. }));
    }

    proptest! {
        #[test]
        fn inversion_round_trip(x0 in 0.1f64..9.9, p in 1.0f64..3.0) {
            let g = |x: f64| x.powf(p) + x;
            let tol = 1e-12;
            let x = invert_increasing(|x| Ok(g(x)), Bracket::new(0.0, 10.0).unwrap(), g(x0), tol).unwrap();
            prop_assert!((x - x0).abs() <= tol);
        }

        #[test]
        fn crossing_residual_bounded_by_lipschitz(level in 0.05f64..0.95, w in 1.0f64..6.0) {
            // g = sin²(w t) has Lipschitz constant w
            let tol = 1e-12;
            let x = find_level_crossing(|t| Ok((w * t).sin().powi(2)), 0.0, 3.0, level, 64, tol).unwrap();
            prop_assert!(x > 0.0 && x < 3.0);
            prop_assert!(((w * x).sin().powi(2) - level).abs() <= w * tol + 1e-15);
        }
    }
}
