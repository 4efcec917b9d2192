//! Prime counting and the distances between consecutive tower components,
//! which grow like `(1 − c) π(πL)`.

use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::ladder::{LadderModel, EULER_GAMMA};
use crate::tower::{build_tower, IterationTower, TowerLimits};
use crate::{Error, Result};

/// Largest argument accepted by [`prime_pi`].
pub const SIEVE_BOUND: f64 = 1e8;

/// Primes up to a bound, from an odd-only sieve of Eratosthenes.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    limit: u64,
    primes: Vec<u32>,
}

impl PrimeSieve {
    pub fn new(limit: u64) -> Self {
        let mut primes = Vec::new();
        if limit >= 2 {
            primes.push(2);
        }
        // index i stands for 2i + 1
        let n = limit.div_ceil(2) as usize;
        let mut composite = vec![false; n];
        let mut i = 1;
        while (2 * i + 1) * (2 * i + 1) <= limit as usize {
            if !composite[i] {
                let p = 2 * i + 1;
                let mut j = p * p / 2;
                while j < n {
                    composite[j] = true;
                    j += p;
                }
            }
            i += 1;
        }
        primes.extend((1..n).filter(|&i| !composite[i]).map(|i| (2 * i + 1) as u32));
        PrimeSieve { limit, primes }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Number of primes `≤ x`; `x` must not exceed the sieve limit.
    pub fn count(&self, x: u64) -> u64 {
        debug_assert!(x <= self.limit);
        self.primes.partition_point(|&p| (p as u64) <= x) as u64
    }
}

fn shared_sieve(limit: u64) -> Arc<PrimeSieve> {
    static SIEVE: Mutex<Option<Arc<PrimeSieve>>> = Mutex::new(None);
    let mut guard = SIEVE.lock().expect("sieve lock");
    match guard.as_ref() {
        Some(s) if s.limit() >= limit => s.clone(),
        current => {
            let grown = limit.max(1 << 20).max(current.map_or(0, |s| 2 * s.limit()));
            let s = Arc::new(PrimeSieve::new(grown.min(SIEVE_BOUND as u64)));
            *guard = Some(s.clone());
            s
        }
    }
}

/// `π(x)`, the number of primes `≤ x`, for `x ≤ 10⁸`.
pub fn prime_pi(x: f64) -> Result<u64> {
    if x.is_nan() || x > SIEVE_BOUND {
        return Err(Error::RangeTooLarge { x, max: SIEVE_BOUND });
    }
    if x < 2.0 {
        return Ok(0);
    }
    let n = x.floor() as u64;
    Ok(shared_sieve(n).count(n))
}

/// The logarithmic integral `li(x)` for `x > 1`, by Ramanujan's series.
pub fn li(x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::DomainTooSmall {
            what: "li",
            value: x,
            floor: 1.0,
        });
    }
    let lnx = x.ln();
    let mut sum = 0.0;
    let mut term = 1.0; // (ln x)^n / (n! 2^{n−1}), up to sign
    let mut inner = 0.0; // Σ_{k ≤ (n−1)/2} 1/(2k+1)
    for n in 1..400 {
        term *= lnx / n as f64 / if n == 1 { 1.0 } else { 2.0 };
        if (n - 1) % 2 == 0 {
            inner += 1.0 / (n as f64);
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let add = sign * term * inner;
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(EULER_GAMMA + lnx.ln() + x.sqrt() * sum)
}

/// Distance between tower components `r` and `r + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "U")]
    pub u: f64,
    pub r: usize,
    pub rho: f64,
    /// `(1 − c) π(πL)`.
    pub predicted: f64,
    pub ratio: f64,
    /// `(1 − c) li(πL)`.
    pub li_predicted: f64,
    pub li_ratio: f64,
}

pub fn gap_rho(tower: &IterationTower, r: usize) -> Result<GapReport> {
    if r + 1 > tower.k() {
        return Err(Error::IndexOutOfTower { r: r + 1, k: tower.k() });
    }
    let rho = tower.segment(r + 1)?.lo - tower.segment(r)?.hi;
    let x = tower.base_lo();
    let predicted = (1.0 - EULER_GAMMA) * prime_pi(x)? as f64;
    let li_predicted = (1.0 - EULER_GAMMA) * li(x)?;
    Ok(GapReport {
        l: tower.l(),
        u: tower.u(),
        r,
        rho,
        predicted,
        ratio: rho / predicted,
        li_predicted,
        li_ratio: rho / li_predicted,
    })
}

/// Gaps `r = 0..r_max` for every `L` of a grid.
pub fn gap_scan(model: &LadderModel, limits: &TowerLimits, ls: &[u32], u: f64, r_max: usize) -> Result<Vec<GapReport>> {
    let mut out = Vec::new();
    for &l in ls {
        let tower = build_tower(model, limits, l, u, r_max + 1)?;
        for r in 0..=r_max {
            out.push(gap_rho(&tower, r)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::shared_test_model;
    use proptest::prelude::*;

    #[test]
    fn small_counts() {
        assert_eq!(prime_pi(10.0).unwrap(), 4);
        assert_eq!(prime_pi(100.0).unwrap(), 25);
        assert_eq!(prime_pi(2.0).unwrap(), 1);
        assert_eq!(prime_pi(1.5).unwrap(), 0);
        assert_eq!(prime_pi(1_000_000.0).unwrap(), 78_498);
        assert!(matches!(prime_pi(2e8), Err(Error::RangeTooLarge { .. })));
    }

    #[test]
    fn sieve_agrees_with_trial_division() {
        let sieve = PrimeSieve::new(5000);
        let is_prime = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        let mut count = 0;
        for n in 0..=5000 {
            count += is_prime(n) as u64;
            assert_eq!(sieve.count(n), count, "{n}");
        }
    }

    #[test]
    fn logarithmic_integral() {
        // li(10⁶) and li(2) to 12 digits
        assert!((li(1e6).unwrap() - 78_627.549_159_462_2).abs() < 1e-6);
        assert!((li(2.0).unwrap() - 1.045_163_780_117_49).abs() < 1e-12);
        assert!(li(1.0).is_err());
    }

    #[test]
    fn gap_matches_the_prime_count_scale() {
        let m = shared_test_model();
        let tower = build_tower(m, &TowerLimits::default(), 500, 1.0, 2).unwrap();
        let g0 = gap_rho(&tower, 0).unwrap();
        let g1 = gap_rho(&tower, 1).unwrap();
        assert!(g0.rho > 0.0 && g1.rho > 0.0);
        assert!((0.7..=1.3).contains(&g0.ratio), "{g0:?}");
        // the later component sits higher, so its gap is larger; the size of
        // the step is set by the mean-value remainder, not by (1 − c) π(πL)
        assert!((0.7..=1.3).contains(&g1.ratio) && g1.rho > g0.rho, "{g0:?} {g1:?}");
        assert!(matches!(gap_rho(&tower, 2), Err(Error::IndexOutOfTower { .. })));
    }

    #[test]
    fn reverse_step_gap_near_one_thousand_pi() {
        let m = shared_test_model();
        let x = 3141.59;
        let gap = m.reverse_step(x).unwrap() - x;
        let predicted = (1.0 - EULER_GAMMA) * prime_pi(3141.0).unwrap() as f64;
        assert!((gap / predicted - 1.0).abs() < 0.3, "{gap} vs {predicted}");
    }

    proptest! {
        #[test]
        fn prime_pi_is_monotone(x in 0.0f64..2e5, y in 0.0f64..2e5) {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(prime_pi(lo).unwrap() <= prime_pi(hi).unwrap());
        }
    }
}
