use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hard cap on the number of panels held by one adaptive integration.
pub const MAX_PANELS: usize = 4096;

/// Relative size below which a panel's error estimate is treated as rounding
/// noise in the integrand rather than discretisation error.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_311,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // ∫|f| over the panel
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[10];
    let mut kronrod_abs = fc.abs() * WGK[10];
    let mut gauss = 0.0;
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let (fl, fr) = (f(center - dx)?, f(center + dx)?);
        let pair = fl + fr;
        kronrod += w * pair;
        kronrod_abs += w * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        magnitude: kronrod_abs * half,
    })
}

/// Adaptive Gauss–Kronrod (G10/K21) integration with an absolute tolerance.
///
/// When `min_wavelength` is given the interval is first cut into panels no
/// wider than it, so that no initial panel straddles more than one oscillation.
/// The panel with the largest error estimate is then halved until the summed
/// estimate drops below `tol`. A panel whose estimate is already below
/// [`NOISE_FLOOR`] relative to `∫|f|` and does not shrink when halved is left
/// alone; its estimate still shows up in the returned `error_estimate`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64, min_wavelength: Option<f64>) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_with_limit(f, a, b, tol, min_wavelength, MAX_PANELS)
}

pub fn integrate_with_limit<F>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    min_wavelength: Option<f64>,
    max_panels: usize,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("integration bounds need a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let initial = match min_wavelength {
        Some(w) if w > 0.0 => ((b - a) / w).ceil().max(1.0) as usize,
        Some(w) => {
            return Err(Error::InvalidParameter(format!("min_wavelength must be positive, got {w}")));
        }
        None => 1,
    };
    let max_panels = max_panels.max(initial);

    let mut heap = BinaryHeap::with_capacity(initial * 2);
    let width = (b - a) / initial as f64;
    for i in 0..initial {
        let lo = a + width * i as f64;
        let hi = if i + 1 == initial { b } else { a + width * (i + 1) as f64 };
        heap.push(gk21(&mut f, lo, hi)?);
    }
    let mut evaluations = 21 * initial;
    // panels whose halving stopped paying off at the noise level
    let mut settled: Vec<Panel> = Vec::new();

    loop {
        let open_error: f64 = heap.iter().map(|p| p.error).sum();
        if open_error <= tol {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() + settled.len() + 1 >= max_panels || mid <= worst.a || mid >= worst.b {
            let settled_error: f64 = settled.iter().map(|p| p.error).sum();
            return Err(Error::NonConvergence {
                a,
                b,
                error_estimate: open_error + settled_error,
                tol,
                panels: heap.len() + settled.len() + 1,
            });
        }
        let (left, right) = (gk21(&mut f, worst.a, mid)?, gk21(&mut f, mid, worst.b)?);
        evaluations += 42;
        let noisy = worst.error <= NOISE_FLOOR * worst.magnitude && left.error + right.error > 0.5 * worst.error;
        if noisy {
            settled.extend([left, right]);
        } else {
            heap.push(left);
            heap.push(right);
        }
    }

    let mut panels = heap.into_vec();
    panels.extend(settled);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error_estimate = panels.iter().map(|p| p.error).sum();
    Ok(QuadratureResult {
        value,
        error_estimate,
        evaluations,
    })
}

/// Integrates over `[a, b]` split at the given interior break points, giving
/// each piece a share of `tol` proportional to its width.
///
/// Break points outside `(a, b)` are ignored; the rest need not be sorted.
pub fn integrate_pieces<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
    min_wavelength: Option<f64>,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut total = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    for w in edges.windows(2) {
        let piece_tol = tol * (w[1] - w[0]) / (b - a);
        let r = integrate(&mut f, w[0], w[1], piece_tol, min_wavelength)?;
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn polynomial_exactness() {
        let r = integrate(|t| Ok(t * t), 0.0, 1.0, 1e-12, None).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() <= 1e-12);
        assert!(r.error_estimate >= 0.0);
        assert!(r.evaluations >= 1);
        // degree 31 is integrated exactly by a single K21 panel
        let r = integrate(|t| Ok(32.0 * t.powi(31)), 0.0, 1.0, 1e-12, None).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn sin_squared_half_period() {
        let r = integrate(|t| Ok(t.sin().powi(2)), 0.0, PI, 1e-12, None).unwrap();
        assert!((r.value - PI / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn sin_squared_shifted_segment() {
        let l = 3.0;
        let u = FRAC_PI_4;
        let r = integrate(|t| Ok(t.sin().powi(2)), PI * l, PI * l + u, 1e-12, None).unwrap();
        let closed = u / 2.0 * (1.0 - (2.0 * u).sin() / (2.0 * u));
        assert!((closed - (PI / 8.0 - 0.25)).abs() < 1e-15);
        assert!((r.value - closed).abs() <= 1e-12);
    }

    #[test]
    fn wavelength_cap_sets_initial_panels() {
        let r = integrate(|t| Ok((10.0 * t).cos()), 0.0, 10.0, 1e-10, Some(0.25)).unwrap();
        assert!(r.evaluations >= 40 * 21);
        assert!((r.value - (100.0f64).sin() / 10.0).abs() <= 1e-10);
    }

    #[test]
    fn unresolvable_jump_reports_nonconvergence() {
        let step = |t: f64| Ok(if t < 1.0 / 3.0 { 0.0 } else { 1.0 });
        let err = integrate_with_limit(step, 0.0, 1.0, 1e-14, None, 16).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn pieces_respect_break_points() {
        let step = |t: f64| Ok(if t < 0.3 { 1.0 } else { 2.0 + t });
        let r = integrate_pieces(step, 0.0, 1.0, &[0.3, 5.0], 1e-13, None).unwrap();
        let exact = 0.3 + 2.0 * 0.7 + 0.5 * (1.0 - 0.09);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(integrate(Ok, 1.0, 0.0, 1e-10, None).is_err());
        assert!(integrate(Ok, 0.0, 1.0, 0.0, None).is_err());
        assert!(integrate(Ok, 0.0, 1.0, 1e-10, Some(-1.0)).is_err());
    }

    proptest! {
        #[test]
        fn additivity(c in 0.05f64..0.95, freq in 0.5f64..8.0) {
            let tol = 1e-11;
            let f = |t: f64| Ok((freq * t).sin().powi(2) + t);
            let left = integrate(f, 0.0, c * 4.0, tol, Some(1.0)).unwrap().value;
            let right = integrate(f, c * 4.0, 4.0, tol, Some(1.0)).unwrap().value;
            let whole = integrate(f, 0.0, 4.0, tol, Some(1.0)).unwrap().value;
            prop_assert!((left + right - whole).abs() <= 3.0 * tol);
        }
    }

    #[test]
    fn rounding_noise_does_not_block_convergence() {
        // deterministic noise at 1e-13 relative, far above the requested tolerance
        let noisy = |x: f64| {
            let h = ((x * 1e9).to_bits().wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
            Ok(2.0 + x.sin() + 1e-13 * (h - 0.5))
        };
        let r = integrate(noisy, 0.0, 10.0, 1e-16, None).unwrap();
        let exact = 20.0 + 1.0 - 10f64.cos();
        assert!((r.value - exact).abs() < 1e-11, "{}", r.value - exact);
    }

}
