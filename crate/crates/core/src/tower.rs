//! Reverse-iteration towers over `[πL, πL+U]` and the mean-value point chains
//! living on them.
//!
//! For a generating function `f` on the base segment and depth `k`, the chain
//! weight on segment `k` is
//!
//! ```text
//! g(t) = f(φ₁ᵏ(t)) · ∏_{j<k} Z̃²(φ₁ʲ(t)),
//! ```
//!
//! so that `∫_{seg k} g = ∫_{base} f` by `k` substitutions. A point `ξ` where
//! `g` meets its mean gives the chain `α_r = φ₁^{k−r}(ξ)` and with it
//!
//! ```text
//! ∏_{r=1}^{k} Z̃²(α_r)/Z̃²(β_r) = mean(f)/f(α₀),
//! ```
//!
//! where the β chain is the same construction for `f ≡ 1`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ladder::LadderModel;
use crate::numerics::{find_level_crossing, integrate_pieces, z_squared_wavelength};
use crate::{Error, Result};

/// Bounds on the admissible `(L, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowerLimits {
    pub l_floor: u32,
    pub k_cap: usize,
}

impl Default for TowerLimits {
    fn default() -> Self {
        TowerLimits {
            l_floor: 100,
            k_cap: 4,
        }
    }
}

/// Tolerances for solving chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Quadrature tolerance for `∫ g`, relative to `∫_{base} f`.
    pub quad_tol: f64,
    /// Final bracket width of the level crossing.
    pub crossing_tol: f64,
    /// Scan samples per local oscillation of `Z²`.
    pub scan_per_wavelength: usize,
    /// Largest accepted `κ = Σ |ln Z̃²|` over a formula's points.
    pub condition_bound: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            quad_tol: 1e-10,
            crossing_tol: 1e-12,
            scan_per_wavelength: 16,
            condition_bound: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub r: usize,
}

impl Segment {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Membership in the open interval.
    pub fn contains_open(&self, t: f64) -> bool {
        self.lo < t && t < self.hi
    }
}

/// The base segment `[πL, πL+U]` and its reverse iterates `r = 1..k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTower {
    l: u32,
    u: f64,
    segments: Vec<Segment>,
}

impl IterationTower {
    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn k(&self) -> usize {
        self.segments.len() - 1
    }

    /// `πL`.
    pub fn base_lo(&self) -> f64 {
        PI * self.l as f64
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, r: usize) -> Result<&Segment> {
        self.segments.get(r).ok_or(Error::IndexOutOfTower { r, k: self.k() })
    }

    pub fn top(&self) -> &Segment {
        self.segments.last().expect("tower has a base segment")
    }

    /// The same tower cut down to depth `k`; segments are shared bit for bit.
    pub fn truncated(&self, k: usize) -> Result<IterationTower> {
        if k > self.k() {
            return Err(Error::IndexOutOfTower { r: k, k: self.k() });
        }
        Ok(IterationTower {
            l: self.l,
            u: self.u,
            segments: self.segments[..=k].to_vec(),
        })
    }
}

/// Validates `(L, U, k)` and applies `k` reverse steps to both base endpoints.
pub fn build_tower(model: &LadderModel, limits: &TowerLimits, l: u32, u: f64, k: usize) -> Result<IterationTower> {
    if l < limits.l_floor {
        return Err(Error::InvalidParameter(format!("L = {l} is below the floor {}", limits.l_floor)));
    }
    if !(u > 0.0 && u < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!("U = {u} must lie in (0, π/2)")));
    }
    if k > limits.k_cap {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds the cap {}", limits.k_cap)));
    }
    let lo = PI * l as f64;
    let mut segments = vec![Segment { lo, hi: lo + u, r: 0 }];
    for r in 1..=k {
        let prev = segments[r - 1];
        let seg = Segment {
            lo: model.reverse_step(prev.lo)?,
            hi: model.reverse_step(prev.hi)?,
            r,
        };
        if !(seg.lo > prev.hi && seg.hi > seg.lo) {
            return Err(Error::InvalidParameter(format!(
                "reverse iterate {r} [{}, {}] does not lie right of [{}, {}]",
                seg.lo, seg.hi, prev.lo, prev.hi
            )));
        }
        segments.push(seg);
    }
    Ok(IterationTower { l, u, segments })
}

/// Generating functions on the base segment `[πL, πL+U]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FunctionFamily {
    Sin2,
    Cos2,
    /// `(t − πL)^Δ`.
    PowerDelta(f64),
    One,
}

impl fmt::Display for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionFamily::Sin2 => write!(f, "sin2"),
            FunctionFamily::Cos2 => write!(f, "cos2"),
            FunctionFamily::PowerDelta(d) => write!(f, "power({d})"),
            FunctionFamily::One => write!(f, "one"),
        }
    }
}

impl FunctionFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctionFamily::PowerDelta(d) if !(d > 0.0 && d.is_finite()) => {
                Err(Error::InvalidParameter(format!("power exponent must be positive, got {d}")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64, base_lo: f64) -> f64 {
        match *self {
            FunctionFamily::Sin2 => t.sin().powi(2),
            FunctionFamily::Cos2 => t.cos().powi(2),
            FunctionFamily::PowerDelta(d) => (t - base_lo).max(0.0).powf(d),
            FunctionFamily::One => 1.0,
        }
    }

    /// Whether `f` leaves zero at the base segment's left end with unbounded
    /// slope.
    pub fn steep_at_base(&self) -> bool {
        matches!(*self, FunctionFamily::PowerDelta(d) if d < 1.0)
    }

    /// Closed-form mean over `[πL, πL+U]`; `sin²` and `cos²` are π-periodic,
    /// so `L` drops out.
    pub fn mean(&self, u: f64) -> f64 {
        let s = (2.0 * u).sin() / (2.0 * u);
        match *self {
            FunctionFamily::Sin2 => 0.5 * (1.0 - s),
            FunctionFamily::Cos2 => 0.5 * (1.0 + s),
            FunctionFamily::PowerDelta(d) => u.powf(d) / (1.0 + d),
            FunctionFamily::One => 1.0,
        }
    }
}

/// `g(t) = f(φ₁ᵏ(t)) · ∏_{j<k} Z̃²(φ₁ʲ(t))` on the top segment of a tower.
#[derive(Debug, Clone, Copy)]
pub struct ChainWeight<'a> {
    model: &'a LadderModel,
    family: FunctionFamily,
    base_lo: f64,
    k: usize,
}

impl<'a> ChainWeight<'a> {
    pub fn new(model: &'a LadderModel, family: FunctionFamily, tower: &IterationTower) -> Self {
        ChainWeight {
            model,
            family,
            base_lo: tower.base_lo(),
            k: tower.k(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let mut x = t;
        let mut weight = 1.0;
        for _ in 0..self.k {
            let next = self.model.phi1(x)?;
            // Z̃²(x) = Z²(x)/V′(φ₁(x)), reusing the forward step
            weight *= self.model.zeta().zeta_mod_sq(x)? / self.model.normalizer_prime(next)?;
            x = next;
        }
        Ok(weight * self.family.eval(x, self.base_lo))
    }

    /// The forward orbit `t, φ₁(t), …, φ₁ᵏ(t)`.
    pub fn orbit(&self, t: f64) -> Result<Vec<f64>> {
        let mut points = Vec::with_capacity(self.k + 1);
        points.push(t);
        for j in 0..self.k {
            points.push(self.model.phi1(points[j])?);
        }
        Ok(points)
    }

    /// Points of the top segment whose orbit hits a height where the computed
    /// `Z` may jump.
    pub fn breakpoints(&self, tower: &IterationTower) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for j in 0..self.k {
            let seg = tower.segment(self.k - j)?;
            for b in self.model.zeta().breakpoints(seg.lo, seg.hi) {
                out.push(self.model.reverse_iterate(b, j)?);
            }
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

/// Mean-value points for one generating function at one depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPoints {
    pub family: FunctionFamily,
    pub k: usize,
    /// Seed root on the top segment; equals `alpha[k]`.
    pub xi: f64,
    /// Mean of the chain weight over the top segment.
    pub level: f64,
    /// `α₀ … α_k`.
    pub alpha: Vec<f64>,
    /// `ln Z̃²(α_r)` for `r = 1..k`, re-evaluated at the stored points.
    pub ln_ztilde_sq: Vec<f64>,
    /// `|g(ξ) − level|`.
    pub residual: f64,
    /// Quadrature estimate of `∫_{seg k} g`.
    pub weight_integral: f64,
    pub weight_integral_error: f64,
}

impl ChainPoints {
    pub fn alpha0(&self) -> f64 {
        self.alpha[0]
    }

    /// `Σ_{r=1}^{k} ln Z̃²(α_r)`.
    pub fn ln_product(&self) -> f64 {
        self.ln_ztilde_sq.iter().sum()
    }

    /// `Σ |ln Z̃²(α_r)|`.
    pub fn condition(&self) -> f64 {
        self.ln_ztilde_sq.iter().map(|v| v.abs()).sum()
    }
}

/// Largest accepted `|g(ξ) − level|/level`.
pub const MAX_CROSSING_RESIDUAL: f64 = 1e-6;

/// Solves the chain of `family` on `tower`.
pub fn solve_chain(model: &LadderModel, family: FunctionFamily, tower: &IterationTower, cfg: &ChainConfig) -> Result<ChainPoints> {
    family.validate()?;
    if family == FunctionFamily::One && tower.k() == 0 {
        // constant weight: every point is a mean-value point
        let base = tower.top();
        let mid = 0.5 * (base.lo + base.hi);
        return Ok(ChainPoints {
            family,
            k: 0,
            xi: mid,
            level: 1.0,
            alpha: vec![mid],
            ln_ztilde_sq: Vec::new(),
            residual: 0.0,
            weight_integral: base.width(),
            weight_integral_error: 0.0,
        });
    }
    let weight = ChainWeight::new(model, family, tower);
    let top = *tower.top();
    let k = tower.k();
    let breaks = weight.breakpoints(tower)?;
    let expected = tower.u() * family.mean(tower.u());
    let integral = integrate_pieces(
        |t| weight.eval(t),
        top.lo,
        top.hi,
        &breaks,
        cfg.quad_tol * expected,
        Some(z_squared_wavelength(top.hi)),
    )?;
    let level = integral.value / top.width();

    let scan_points = ((top.width() / z_squared_wavelength(top.hi)).ceil() as usize * cfg.scan_per_wavelength).max(32);
    let crossing = |a: f64| find_level_crossing(|t| weight.eval(t), a, top.hi, level, scan_points, cfg.crossing_tol);
    // `s^Δ` with Δ < 1 rises with unbounded slope from zero at the segment's
    // left end; a crossing there cannot be resolved in double precision. An
    // interior crossing always exists too, so the first scan cell is skipped.
    let xi = if family.steep_at_base() {
        match crossing(top.lo + top.width() / scan_points as f64) {
            Err(Error::NoCrossing { .. }) => crossing(top.lo)?,
            found => found?,
        }
    } else {
        crossing(top.lo)?
    };
    let residual = (weight.eval(xi)? - level).abs();
    if residual > MAX_CROSSING_RESIDUAL * level {
        return Err(Error::CrossingInaccurate { xi, level, residual });
    }

    let mut alpha = weight.orbit(xi)?;
    alpha.reverse();
    for (r, &a) in alpha.iter().enumerate() {
        let seg = tower.segment(r)?;
        if !seg.contains_open(a) {
            return Err(Error::MembershipViolated {
                r,
                point: a,
                lo: seg.lo,
                hi: seg.hi,
            });
        }
    }
    let ln_ztilde_sq = alpha[1..]
        .iter()
        .map(|&a| model.ln_ztilde_sq(a))
        .collect::<Result<Vec<_>>>()?;
    debug_assert_eq!(ln_ztilde_sq.len(), k);

    Ok(ChainPoints {
        family,
        k,
        xi,
        level,
        alpha,
        ln_ztilde_sq,
        residual,
        weight_integral: integral.value,
        weight_integral_error: integral.error_estimate,
    })
}

/// The β chain: [`solve_chain`] with `f ≡ 1`.
pub fn beta_chain(model: &LadderModel, tower: &IterationTower, cfg: &ChainConfig) -> Result<ChainPoints> {
    solve_chain(model, FunctionFamily::One, tower, cfg)
}

/// One serialized row of a point dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub r: usize,
    pub alpha: f64,
    pub beta: f64,
    pub segment_lo: f64,
    pub segment_hi: f64,
}

/// All chains of one tower, sharing a single β chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSet {
    pub tower: IterationTower,
    pub beta: ChainPoints,
    pub chains: Vec<ChainPoints>,
}

impl ChainSet {
    /// Solves β and every requested family in parallel.
    pub fn solve(model: &LadderModel, tower: IterationTower, families: &[FunctionFamily], cfg: &ChainConfig) -> Result<Self> {
        let mut unique: Vec<FunctionFamily> = Vec::new();
        for f in families {
            if *f != FunctionFamily::One && !unique.contains(f) {
                unique.push(*f);
            }
        }
        let (beta, chains) = rayon::join(
            || beta_chain(model, &tower, cfg),
            || {
                unique
                    .par_iter()
                    .map(|&f| solve_chain(model, f, &tower, cfg))
                    .collect::<Result<Vec<_>>>()
            },
        );
        Ok(ChainSet {
            beta: beta?,
            chains: chains?,
            tower,
        })
    }

    pub fn k(&self) -> usize {
        self.tower.k()
    }

    pub fn chain(&self, family: FunctionFamily) -> Result<&ChainPoints> {
        if family == FunctionFamily::One {
            return Ok(&self.beta);
        }
        self.chains
            .iter()
            .find(|c| c.family == family)
            .ok_or_else(|| Error::MissingChain {
                family: family.to_string(),
                k: self.k(),
            })
    }

    pub fn point_records(&self, family: FunctionFamily) -> Result<Vec<PointRecord>> {
        let chain = self.chain(family)?;
        Ok(self
            .tower
            .segments()
            .iter()
            .map(|seg| PointRecord {
                r: seg.r,
                alpha: chain.alpha[seg.r],
                beta: self.beta.alpha[seg.r],
                segment_lo: seg.lo,
                segment_hi: seg.hi,
            })
            .collect())
    }
}

/// The three factorization lemmas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lemma {
    Sin2,
    Cos2,
    Power(f64),
}

impl Lemma {
    pub fn family(&self) -> FunctionFamily {
        match *self {
            Lemma::Sin2 => FunctionFamily::Sin2,
            Lemma::Cos2 => FunctionFamily::Cos2,
            Lemma::Power(d) => FunctionFamily::PowerDelta(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaResidual {
    /// `Σ ln Z̃²(α_r) − Σ ln Z̃²(β_r)`.
    pub ln_lhs: f64,
    /// `ln mean(f) − ln f(α₀)`.
    pub ln_rhs: f64,
    pub rel_residual: f64,
    pub condition: f64,
    pub tolerance: f64,
}

impl LemmaResidual {
    pub fn passed(&self) -> bool {
        self.rel_residual <= self.tolerance
    }
}

/// Acceptance tolerance for an identity whose points have condition `κ`.
pub fn identity_tolerance(condition: f64) -> f64 {
    (condition * 1e-9).max(1e-6)
}

/// `|LHS/RHS − 1|` from logarithms.
pub fn log_rel_residual(ln_lhs: f64, ln_rhs: f64) -> f64 {
    (ln_lhs - ln_rhs).exp_m1().abs()
}

/// Checks `∏ Z̃²(α_r)/Z̃²(β_r) = mean(f)/f(α₀)` for one lemma.
pub fn lemma_residual(lemma: Lemma, chains: &ChainSet, cfg: &ChainConfig) -> Result<LemmaResidual> {
    let chain = chains.chain(lemma.family())?;
    let u = chains.tower.u();
    let condition = chain.condition() + chains.beta.condition();
    if condition > cfg.condition_bound {
        return Err(Error::ConditionTooHigh {
            kappa: condition,
            bound: cfg.condition_bound,
        });
    }
    let ln_lhs = chain.ln_product() - chains.beta.ln_product();
    let f_alpha0 = lemma.family().eval(chain.alpha0(), chains.tower.base_lo());
    let ln_rhs = lemma.family().mean(u).ln() - f_alpha0.ln();
    Ok(LemmaResidual {
        ln_lhs,
        ln_rhs,
        rel_residual: log_rel_residual(ln_lhs, ln_rhs),
        condition,
        tolerance: identity_tolerance(condition),
    })
}
