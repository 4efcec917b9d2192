//! The computational Jacob's ladder.
//!
//! `φ₁` is defined implicitly by `V(φ₁(T)) = A(T)` where
//! `A(T) = ∫₀ᵀ Z²(u) du` and `V(y) = y ln y + (c − ln 2π) y`. Differentiating
//! gives `φ₁′(T) = Z²(T)/V′(φ₁(T)) = Z̃²(T)`, which makes every change of
//! variables along the ladder exact up to quadrature and root tolerances.
//! Since `A(T) − V(T) ≈ (c − 1) T`, the ladder lags its argument by roughly
//! `(1 − c) T / ln T`.

mod table;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use table::CumulativeTable;

use crate::numerics::{integrate_pieces, invert_increasing, z_squared_wavelength, Bracket};
use crate::zeta::{ZetaEvaluator, DEFAULT_RS_TERMS};
use crate::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
pub const LN_TWO_PI: f64 = 1.837_877_066_409_345_483_6;

// knots appended beyond the requested height on every extension
const EXTENSION_MARGIN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub euler_c: f64,
    pub ln_two_pi: f64,
}

impl Constants {
    pub const STANDARD: Constants = Constants {
        euler_c: EULER_GAMMA,
        ln_two_pi: LN_TWO_PI,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizerId {
    /// `V(y) = y ln y + (c − ln 2π) y`, matching the Hardy–Littlewood mean value.
    #[serde(rename = "HL_STANDARD")]
    HlStandard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub normalizer: NormalizerId,
    /// Absolute quadrature tolerance for `A`, per unit of integrated height.
    pub quad_tol: f64,
    /// Bracket width for reverse steps.
    pub root_tol: f64,
    /// Riemann–Siegel correction terms after `C₀`.
    pub rs_terms: usize,
    pub knot_spacing: f64,
    /// Floor of the normalizer domain; must exceed `2π e^{−1−c}` so `V′ > 0`.
    pub t_min: f64,
    /// Smallest argument accepted by `φ₁`.
    pub t_start: f64,
    /// Largest height the cumulative table may be extended to.
    pub t_cap: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            normalizer: NormalizerId::HlStandard,
            quad_tol: 1e-12,
            root_tol: 1e-10,
            rs_terms: DEFAULT_RS_TERMS,
            knot_spacing: 0.5,
            t_min: 2.0,
            t_start: 200.0,
            t_cap: 1e6,
        }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        let floor = std::f64::consts::TAU * (-1.0 - EULER_GAMMA).exp();
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.quad_tol > 0.0) || !(self.root_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.knot_spacing > 0.0 && self.knot_spacing <= 2.0) {
            return bad(format!("knot spacing must lie in (0, 2], got {}", self.knot_spacing));
        }
        if !(self.t_min > floor) {
            return bad(format!("t_min must exceed 2π e^(-1-c) = {floor:.6}"));
        }
        if !(self.t_start >= self.t_min && self.t_start >= crate::zeta::RS_FLOOR) {
            return bad("t_start must be at least t_min and 10".into());
        }
        if !(self.t_cap > self.t_start) {
            return bad("t_cap must exceed t_start".into());
        }
        ZetaEvaluator::new(self.rs_terms)?;
        Ok(())
    }

    /// Checksum over everything that changes the cached values of `A`.
    pub fn config_hash(&self) -> String {
        let key = format!(
            "quad_tol={:e};normalizer={:?};rs_terms={};spacing={:e}",
            self.quad_tol, self.normalizer, self.rs_terms, self.knot_spacing
        );
        let digest = Sha256::digest(key.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// `φ₁`, `ω`, `Z̃²` and reverse iteration over a shared cumulative table.
///
/// Evaluations only read the table; extending it takes the write lock, so one
/// model can serve many worker threads.
#[derive(Debug)]
pub struct LadderModel {
    config: LadderConfig,
    zeta: ZetaEvaluator,
    table: RwLock<CumulativeTable>,
}

impl LadderModel {
    pub fn new(config: LadderConfig) -> Result<Self> {
        config.validate()?;
        let table = CumulativeTable::new(config.knot_spacing, config.config_hash());
        Ok(LadderModel {
            zeta: ZetaEvaluator::new(config.rs_terms)?,
            config,
            table: RwLock::new(table),
        })
    }

    /// Starts from an existing table, refusing one built under another
    /// configuration.
    pub fn with_table(config: LadderConfig, table: CumulativeTable) -> Result<Self> {
        let model = LadderModel::new(config)?;
        let expected = config.config_hash();
        if table.config_hash() != expected || table.spacing() != config.knot_spacing {
            return Err(Error::ConfigHashMismatch {
                expected,
                found: table.config_hash().to_string(),
            });
        }
        *model.table.write().expect("table lock") = table;
        Ok(model)
    }

    pub fn load_cache(config: LadderConfig, path: &Path) -> Result<Self> {
        let table = CumulativeTable::read_csv(BufReader::new(File::open(path)?))?;
        LadderModel::with_table(config, table)
    }

    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let table = self.table.read().expect("table lock");
        let tmp = path.with_extension("csv.tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            table.write_csv(&mut w)?;
            std::io::Write::flush(&mut w)?;
        }
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn config(&self) -> &LadderConfig {
        &self.config
    }

    pub fn zeta(&self) -> &ZetaEvaluator {
        &self.zeta
    }

    pub fn constants(&self) -> Constants {
        Constants::STANDARD
    }

    pub fn table_snapshot(&self) -> CumulativeTable {
        self.table.read().expect("table lock").clone()
    }

    pub fn normalizer(&self, y: f64) -> Result<f64> {
        self.check_normalizer_domain(y)?;
        Ok(y * y.ln() + (EULER_GAMMA - LN_TWO_PI) * y)
    }

    pub fn normalizer_prime(&self, y: f64) -> Result<f64> {
        self.check_normalizer_domain(y)?;
        Ok(y.ln() + 1.0 + EULER_GAMMA - LN_TWO_PI)
    }

    fn check_normalizer_domain(&self, y: f64) -> Result<()> {
        if y >= self.config.t_min {
            Ok(())
        } else {
            Err(Error::DomainTooSmall {
                what: "normalizer",
                value: y,
                floor: self.config.t_min,
            })
        }
    }

    /// Solves `V(y) = a` on `[t_min, ∞)`.
    ///
    /// `V` is convex and increasing there, so Newton's method started to the
    /// right of the root decreases monotonically onto it.
    pub fn normalizer_inverse(&self, a: f64) -> Result<f64> {
        let floor = self.config.t_min;
        let v_floor = self.normalizer(floor)?;
        if !(a >= v_floor) {
            return Err(Error::DomainTooSmall {
                what: "normalizer_inverse",
                value: a,
                floor: v_floor,
            });
        }
        let mut y = a.max(2.0 * floor).max(20.0);
        while self.normalizer(y)? < a {
            y *= 2.0;
        }
        for _ in 0..100 {
            let step = (self.normalizer(y)? - a) / self.normalizer_prime(y)?;
            let next = (y - step).max(floor);
            if !(next < y) {
                break;
            }
            y = next;
        }
        Ok(y)
    }

    /// Makes sure the table has knots up to at least `t`.
    pub fn ensure_table(&self, t: f64) -> Result<()> {
        if self.table.read().expect("table lock").last_t() >= t {
            return Ok(());
        }
        if t > self.config.t_cap {
            return Err(Error::TableExhausted {
                requested: t,
                cap: self.config.t_cap,
            });
        }
        let mut table = self.table.write().expect("table lock");
        if table.last_t() >= t {
            return Ok(());
        }
        let spacing = table.spacing();
        let cap_index = (self.config.t_cap / spacing).floor() as usize;
        let target = ((t / spacing).ceil() as usize + EXTENSION_MARGIN).min(cap_index);
        let first = table.knots().len();
        let increments = (first..=target)
            .into_par_iter()
            .map(|i| {
                let (lo, hi) = (table.knot_time(i - 1), table.knot_time(i));
                Ok(self.integrate_mod_sq(lo, hi, self.config.quad_tol * spacing)?.0)
            })
            .collect::<Result<Vec<f64>>>()?;
        table.append_increments(&increments);
        Ok(())
    }

    fn integrate_mod_sq(&self, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
        let breaks = self.zeta.breakpoints(lo, hi);
        let r = integrate_pieces(
            |u| self.zeta.mod_sq_extended(u),
            lo,
            hi,
            &breaks,
            tol,
            Some(z_squared_wavelength(hi)),
        )?;
        Ok((r.value, r.error_estimate))
    }

    /// `A(T) = ∫₀ᵀ |ζ(½+iu)|² du`: nearest knot at or below `T` plus a
    /// quadrature of the remainder.
    pub fn cumulative_hl(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::DomainTooSmall {
                what: "cumulative_hl",
                value: t,
                floor: 0.0,
            });
        }
        self.ensure_table(t)?;
        let (tk, ak) = self.table.read().expect("table lock").knot_below(t);
        if t == tk {
            return Ok(ak);
        }
        let tol = self.config.quad_tol * (t - tk).max(1e-3);
        Ok(ak + self.integrate_mod_sq(tk, t, tol)?.0)
    }

    fn check_ladder_domain(&self, what: &'static str, t: f64) -> Result<()> {
        if t >= self.config.t_start {
            Ok(())
        } else {
            Err(Error::DomainTooSmall {
                what,
                value: t,
                floor: self.config.t_start,
            })
        }
    }

    pub fn phi1(&self, t: f64) -> Result<f64> {
        self.check_ladder_domain("phi1", t)?;
        self.normalizer_inverse(self.cumulative_hl(t)?)
    }

    /// `ω(t) = V′(φ₁(t))`.
    pub fn omega(&self, t: f64) -> Result<f64> {
        self.normalizer_prime(self.phi1(t)?)
    }

    /// `Z̃²(t) = |ζ(½+it)|²/ω(t)`, the derivative of `φ₁`.
    pub fn ztilde_sq(&self, t: f64) -> Result<f64> {
        self.check_ladder_domain("ztilde_sq", t)?;
        Ok(self.zeta.zeta_mod_sq(t)? / self.omega(t)?)
    }

    /// `ln Z̃²(t)`, computed from the logarithms of numerator and denominator.
    pub fn ln_ztilde_sq(&self, t: f64) -> Result<f64> {
        self.check_ladder_domain("ln_ztilde_sq", t)?;
        Ok(self.zeta.zeta_mod_sq(t)?.ln() - self.omega(t)?.ln())
    }

    /// The `x̂ > x` with `φ₁(x̂) = x`, found by solving `A(x̂) = V(x)`.
    pub fn reverse_step(&self, x: f64) -> Result<f64> {
        let target = self.normalizer(x)?;
        let a_x = self.cumulative_hl(x)?;
        if !(a_x < target) {
            return Err(Error::InvalidParameter(format!(
                "A({x}) = {a_x} is not below V({x}) = {target}; no reverse image to the right"
            )));
        }
        // A grows like V′ per unit height, so the deficit over V′ is a good step
        let guess = (target - a_x) / self.normalizer_prime(x)?;
        let mut hi = x + 2.0 * guess + 10.0;
        while self.cumulative_hl(hi)? < target {
            hi += hi - x;
        }
        invert_increasing(|u| self.cumulative_hl(u), Bracket::new(x, hi)?, target, self.config.root_tol)
    }

    /// `r` reverse steps.
    pub fn reverse_iterate(&self, x: f64, r: usize) -> Result<f64> {
        (0..r).try_fold(x, |y, _| self.reverse_step(y))
    }

    /// `φ₁` applied `j` times.
    pub fn forward_iterate(&self, t: f64, j: usize) -> Result<f64> {
        (0..j).try_fold(t, |y, _| self.phi1(y))
    }
}

/// One default-configured model shared by the unit tests of every module.
#[cfg(test)]
pub(crate) fn shared_test_model() -> &'static LadderModel {
    static MODEL: std::sync::OnceLock<LadderModel> = std::sync::OnceLock::new();
    MODEL.get_or_init(|| LadderModel::new(LadderConfig::default()).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, TAU};

    fn model() -> &'static LadderModel {
        shared_test_model()
    }

    #[test]
    fn normalizer_closed_forms() {
        let m = model();
        let y = TAU * (1.0 - EULER_GAMMA).exp();
        assert!((m.normalizer_prime(y).unwrap() - 2.0).abs() < 1e-14);
        let ve = m.normalizer(E).unwrap();
        assert!((ve - E * (1.0 + EULER_GAMMA - LN_TWO_PI)).abs() < 1e-14);
        assert!((ve / E + 0.2607).abs() < 1e-4);
        assert!((m.normalizer_prime(1000.0).unwrap() - 6.6471).abs() < 1e-4);
        assert!(matches!(m.normalizer(1.0), Err(Error::DomainTooSmall { .. })));
    }

    #[test]
    fn normalizer_inverse_round_trip() {
        let m = model();
        for y in [2.5, 10.0, 314.159, 2718.0, 1e5] {
            let back = m.normalizer_inverse(m.normalizer(y).unwrap()).unwrap();
            assert!((back - y).abs() <= 4.0 * f64::EPSILON * y, "{y} -> {back}");
        }
    }

    #[test]
    fn cumulative_starts_at_zero_and_grows() {
        let m = model();
        assert_eq!(m.cumulative_hl(0.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for i in 1..200 {
            let a = m.cumulative_hl(i as f64 * 1.37).unwrap();
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn cumulative_at_one_hundred() {
        let a = model().cumulative_hl(100.0).unwrap();
        // 20-digit quadrature of |ζ(½+it)|² over [0, 100]
        assert!((a - 295.635_099_054_719_130_37).abs() < 1e-7, "{a}");
        // leading Hardy–Littlewood terms T ln(T/2π) + (2c − 1) T
        let hl = 100.0 * (100.0 / TAU).ln() + (2.0 * EULER_GAMMA - 1.0) * 100.0;
        assert!(((a - hl) / hl).abs() < 0.05);
    }

    #[test]
    fn ladder_lags_its_argument() {
        let m = model();
        for t in (300..=5000).step_by(157) {
            let t = t as f64;
            assert!(m.phi1(t).unwrap() < t);
        }
        let t = 3000.0;
        let gap = t - m.phi1(t).unwrap();
        let predicted = (1.0 - EULER_GAMMA) * t / t.ln();
        assert!((gap / predicted - 1.0).abs() < 0.3, "gap {gap} predicted {predicted}");
    }

    #[test]
    fn omega_tracks_log() {
        let m = model();
        let ratio = m.omega(1000.0).unwrap() / 1000f64.ln();
        assert!(ratio > 0.75 && ratio < 1.25);
        let (w0, w1) = (m.omega(1000.0).unwrap(), m.omega(1000.0 + 1e-6).unwrap());
        assert!((w1 - w0).abs() < 1e-7);
    }

    #[test]
    fn reverse_step_inverts_phi1() {
        let m = model();
        let x = 1000.0;
        let xh = m.reverse_step(x).unwrap();
        assert!(xh > x);
        assert!((m.phi1(xh).unwrap() - x).abs() <= 10.0 * m.config().root_tol);
        let y = m.reverse_step(1000.5).unwrap();
        assert!(y > xh);
    }

    #[test]
    fn change_of_variables_over_unit_segment() {
        let m = model();
        let (x, y) = (1000.0, 1001.0);
        let (xh, yh) = (m.reverse_step(x).unwrap(), m.reverse_step(y).unwrap());
        let r = crate::numerics::integrate(|t| m.ztilde_sq(t), xh, yh, 1e-10, Some(z_squared_wavelength(yh))).unwrap();
        assert!((r.value - (y - x)).abs() <= 1e-6, "{}", r.value);
    }

    #[test]
    fn ztilde_vanishes_at_a_zero_and_is_nonnegative() {
        let m = model();
        // zero number 1000
        let z = m.ztilde_sq(1_419.422_480_945_995_686_466).unwrap();
        assert!(z < 1e-14);
        for i in 0..10_000 {
            assert!(m.ztilde_sq(300.0 + i as f64 * 0.37).unwrap() >= 0.0);
        }
    }

    #[test]
    fn round_trip_over_a_grid() {
        let m = model();
        let worst = (0..120)
            .into_par_iter()
            .map(|i| {
                let x = 300.0 + 4700.0 * i as f64 / 119.0;
                (m.phi1(m.reverse_step(x).unwrap()).unwrap() - x).abs()
            })
            .reduce(|| 0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn domain_checks() {
        let m = model();
        assert!(matches!(m.phi1(150.0), Err(Error::DomainTooSmall { .. })));
        assert!(m.cumulative_hl(-1.0).is_err());
        let small = LadderModel::new(LadderConfig {
            t_cap: 400.0,
            ..LadderConfig::default()
        })
        .unwrap();
        assert!(matches!(small.cumulative_hl(500.0), Err(Error::TableExhausted { .. })));
    }

    #[test]
    fn config_validation_and_hash() {
        let base = LadderConfig::default();
        assert!(LadderConfig { t_min: 1.0, ..base }.validate().is_err());
        assert!(LadderConfig { quad_tol: 0.0, ..base }.validate().is_err());
        assert!(LadderConfig { knot_spacing: 3.0, ..base }.validate().is_err());
        assert_eq!(base.config_hash(), LadderConfig::default().config_hash());
        assert_ne!(base.config_hash(), LadderConfig { quad_tol: 1e-11, ..base }.config_hash());
        assert_ne!(base.config_hash(), LadderConfig { rs_terms: 2, ..base }.config_hash());
    }

    #[test]
    fn mismatched_table_is_refused() {
        let other = LadderConfig {
            quad_tol: 1e-11,
            ..LadderConfig::default()
        };
        let table = CumulativeTable::new(0.5, other.config_hash());
        let err = LadderModel::with_table(LadderConfig::default(), table).unwrap_err();
        assert!(matches!(err, Error::ConfigHashMismatch { .. }));
    }
}
