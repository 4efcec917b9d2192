//! Exponent pairs `(Δ₃, Δ₄)` of the power generating functions.

use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// One exponent, kept as an exact fraction when it was given as one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaValue {
    value: f64,
    exact: Option<Ratio<i64>>,
}

impl DeltaValue {
    pub fn from_f64(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(format!("Δ must be positive and finite, got {value}")));
        }
        Ok(DeltaValue { value, exact: None })
    }

    pub fn from_ratio(r: Ratio<i64>) -> Result<Self> {
        if *r.numer() <= 0 {
            return Err(Error::InvalidParameter(format!("Δ must be positive, got {r}")));
        }
        Ok(DeltaValue {
            value: *r.numer() as f64 / *r.denom() as f64,
            exact: Some(r),
        })
    }

    /// Accepts `p/q`, decimals such as `0.25`, and integers; all are kept
    /// exact.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse Δ = {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return DeltaValue::from_ratio(Ratio::new(p, q));
        }
        if let Some((whole, frac)) = s.split_once('.') {
            if frac.len() <= 15 && frac.bytes().all(|b| b.is_ascii_digit()) {
                let scale = 10i64.pow(frac.len() as u32);
                let whole: i64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
                let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
                let numer = whole.checked_mul(scale).and_then(|w| w.checked_add(frac)).ok_or_else(bad)?;
                return DeltaValue::from_ratio(Ratio::new(numer, scale));
            }
        }
        if let Ok(n) = s.parse::<i64>() {
            return DeltaValue::from_ratio(Ratio::from_integer(n));
        }
        DeltaValue::from_f64(s.parse().map_err(|_| bad())?)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        self.exact
    }
}

impl fmt::Display for DeltaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// `(Δ₃, Δ₄)` with `Δ₃ ≠ Δ₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPair {
    d3: DeltaValue,
    d4: DeltaValue,
}

/// Exponents that appear after eliminating the β products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaExponents {
    /// `Δ₃Δ₄/(Δ₃ − Δ₄)`.
    pub outer: f64,
    /// `Δ₄/(Δ₃ − Δ₄)`, the power of the `Δ₃` chain product.
    pub p3: f64,
    /// `−Δ₃/(Δ₃ − Δ₄)`, the power of the `Δ₄` chain product.
    pub p4: f64,
}

impl DeltaPair {
    pub fn from_values(d3: DeltaValue, d4: DeltaValue) -> Result<Self> {
        let equal = match (d3.exact, d4.exact) {
            (Some(a), Some(b)) => a == b,
            _ => d3.value == d4.value,
        };
        if equal {
            return Err(Error::DeltaDegenerate { delta: d3.value });
        }
        Ok(DeltaPair { d3, d4 })
    }

    pub fn new(d3: f64, d4: f64) -> Result<Self> {
        DeltaPair::from_values(DeltaValue::from_f64(d3)?, DeltaValue::from_f64(d4)?)
    }

    pub fn from_ratios(d3: Ratio<i64>, d4: Ratio<i64>) -> Result<Self> {
        DeltaPair::from_values(DeltaValue::from_ratio(d3)?, DeltaValue::from_ratio(d4)?)
    }

    pub fn parse(d3: &str, d4: &str) -> Result<Self> {
        DeltaPair::from_values(DeltaValue::parse(d3)?, DeltaValue::parse(d4)?)
    }

    /// The pair of the displayed special case, `(1/3, 1/5)`.
    pub fn third_fifth() -> Self {
        DeltaPair::from_ratios(Ratio::new(1, 3), Ratio::new(1, 5)).expect("distinct")
    }

    pub fn d3(&self) -> f64 {
        self.d3.value
    }

    pub fn d4(&self) -> f64 {
        self.d4.value
    }

    pub fn swapped(&self) -> Self {
        DeltaPair { d3: self.d4, d4: self.d3 }
    }

    /// Computed in exact rational arithmetic when both exponents are exact.
    pub fn exponents(&self) -> DeltaExponents {
        if let (Some(a), Some(b)) = (self.d3.exact, self.d4.exact) {
            let (a, b) = (widen(a), widen(b));
            let diff = a - b;
            let f = |r: Ratio<i128>| *r.numer() as f64 / *r.denom() as f64;
            return DeltaExponents {
                outer: f(a * b / diff),
                p3: f(b / diff),
                p4: f(-a / diff),
            };
        }
        let (a, b) = (self.d3.value, self.d4.value);
        DeltaExponents {
            outer: a * b / (a - b),
            p3: b / (a - b),
            p4: -a / (a - b),
        }
    }

    /// `ln[(1+Δ₄)^{1/Δ₄}/(1+Δ₃)^{1/Δ₃}]`.
    pub fn ln_ratio_constant(&self) -> f64 {
        self.d4.value.ln_1p() / self.d4.value - self.d3.value.ln_1p() / self.d3.value
    }

    /// `(1+Δ₄)^{1/Δ₄}/(1+Δ₃)^{1/Δ₃}`, the right side of the second secondary
    /// formula.
    pub fn ratio_constant(&self) -> f64 {
        self.ln_ratio_constant().exp()
    }

    /// The same ratio raised to `Δ₃Δ₄/(Δ₃ − Δ₄)`, the right side of the first
    /// secondary formula.
    pub fn secondary_constant(&self) -> f64 {
        (self.exponents().outer * self.ln_ratio_constant()).exp()
    }

    /// Exact value of [`Self::ratio_constant`] when both exponents are unit
    /// fractions `1/n` with `n ≤ 12`, where `(1 + 1/n)^n` is rational.
    pub fn ratio_constant_exact(&self) -> Option<Ratio<i128>> {
        let unit_power = |d: DeltaValue| -> Option<Ratio<i128>> {
            let r = d.exact?;
            if *r.numer() != 1 || *r.denom() > 12 {
                return None;
            }
            let n = *r.denom() as i128;
            Some(Ratio::new((n + 1).pow(n as u32), n.pow(n as u32)))
        };
        Some(unit_power(self.d4)? / unit_power(self.d3)?)
    }
}

fn widen(r: Ratio<i64>) -> Ratio<i128> {
    Ratio::new(*r.numer() as i128, *r.denom() as i128)
}

#[derive(Serialize)]
struct DeltaPairRepr {
    d3: f64,
    d4: f64,
    d3_exact: Option<String>,
    d4_exact: Option<String>,
}

impl Serialize for DeltaPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DeltaPairRepr {
            d3: self.d3.value,
            d4: self.d4.value,
            d3_exact: self.d3.exact.map(|r| r.to_string()),
            d4_exact: self.d4.exact.map(|r| r.to_string()),
        }
        .serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fractions_decimals_and_integers() {
        assert_eq!(DeltaValue::parse("1/3").unwrap().exact(), Some(Ratio::new(1, 3)));
        assert_eq!(DeltaValue::parse(" 0.25 ").unwrap().exact(), Some(Ratio::new(1, 4)));
        assert_eq!(DeltaValue::parse("2").unwrap().exact(), Some(Ratio::from_integer(2)));
        assert_eq!(DeltaValue::parse("1e-1").unwrap().value(), 0.1);
        for bad in ["", "1/0", "-1/3", "0", "abc", "1/x"] {
            assert!(DeltaValue::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn equal_exponents_are_degenerate() {
        assert!(matches!(DeltaPair::parse("1/2", "1/2"), Err(Error::DeltaDegenerate { .. })));
        assert!(matches!(DeltaPair::parse("1/2", "0.5"), Err(Error::DeltaDegenerate { .. })));
        assert!(matches!(DeltaPair::new(0.3, 0.3), Err(Error::DeltaDegenerate { .. })));
    }

    #[test]
    fn third_fifth_exponents() {
        let e = DeltaPair::third_fifth().exponents();
        assert_eq!((e.outer, e.p3, e.p4), (0.5, 1.5, -2.5));
        // the β-elimination exponent Δ₃Δ₄/(Δ₄ − Δ₃) is the negative
        assert_eq!(-e.outer, -0.5);
    }

    #[test]
    fn third_fifth_constants() {
        let pair = DeltaPair::third_fifth();
        assert_eq!(pair.ratio_constant_exact(), Some(Ratio::new(6561, 6250)));
        assert!((pair.ratio_constant() - 1.049_76).abs() < 1e-12);
        let displayed = 81.0 * 10f64.sqrt() / 250.0;
        assert!((pair.secondary_constant() - displayed).abs() < 1e-10);
        assert!((displayed - 1.024_577_96).abs() < 1e-8);
        // (81√10/250)² = 65610/62500 is the exact ratio constant
        assert_eq!(Ratio::<i128>::new(81 * 81 * 10, 250 * 250), Ratio::new(6561, 6250));
    }

    proptest! {
        #[test]
        fn swapping_inverts_the_ratio_constant(a in 0.05f64..3.0, b in 0.05f64..3.0) {
            prop_assume!((a - b).abs() > 1e-3);
            let p = DeltaPair::new(a, b).unwrap();
            let product = p.ratio_constant() * p.swapped().ratio_constant();
            prop_assert!((product - 1.0).abs() < 1e-12);
            // base and exponent both flip, so the secondary constant is symmetric
            let ratio = p.secondary_constant() / p.swapped().secondary_constant();
            prop_assert!((ratio - 1.0).abs() < 1e-12);
        }

        #[test]
        fn exponents_sum_to_minus_one(n3 in 1i64..20, d3 in 1i64..20, n4 in 1i64..20, d4 in 1i64..20) {
            prop_assume!(Ratio::new(n3, d3) != Ratio::new(n4, d4));
            let e = DeltaPair::from_ratios(Ratio::new(n3, d3), Ratio::new(n4, d4)).unwrap().exponents();
            prop_assert!((1.0 + e.p3 + e.p4).abs() < 1e-15);
        }
    }
}
