//! Cumulative Hardy–Littlewood table `A(t) = ∫₀ᵗ |ζ(½+iu)|² du` on a uniform
//! knot grid, and its CSV cache format.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const FORMAT_LINE: &str = "# zeta-ladder cumulative table v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeTable {
    spacing: f64,
    knots: Vec<(f64, f64)>,
    config_hash: String,
}

impl CumulativeTable {
    /// A table holding only the knot `A(0) = 0`.
    pub fn new(spacing: f64, config_hash: impl Into<String>) -> Self {
        CumulativeTable {
            spacing,
            knots: vec![(0.0, 0.0)],
            config_hash: config_hash.into(),
        }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn last_t(&self) -> f64 {
        self.knots.last().map(|k| k.0).unwrap_or(0.0)
    }

    pub fn knot_time(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    /// The last knot at or below `t`. Requires `0 ≤ t ≤ last_t()`.
    pub(crate) fn knot_below(&self, t: f64) -> (f64, f64) {
        let mut i = ((t / self.spacing).floor() as usize).min(self.knots.len() - 1);
        while i > 0 && self.knots[i].0 > t {
            i -= 1;
        }
        self.knots[i]
    }

    /// Appends knots whose increments over the previous knot are `increments`.
    pub(crate) fn append_increments(&mut self, increments: &[f64]) {
        let mut a = self.knots.last().expect("table has a first knot").1;
        for (j, inc) in increments.iter().enumerate() {
            a += inc;
            let t = self.knot_time(self.knots.len());
            debug_assert!(j < increments.len());
            self.knots.push((t, a));
        }
    }

    /// True when every knot of `other` is present, bit for bit, in `self`.
    pub fn extends(&self, other: &CumulativeTable) -> bool {
        self.spacing == other.spacing
            && self.config_hash == other.config_hash
            && other.knots.len() <= self.knots.len()
            && self.knots[..other.knots.len()] == other.knots[..]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{FORMAT_LINE}")?;
        writeln!(w, "# config_hash={}", self.config_hash)?;
        writeln!(w, "# spacing={}", self.spacing)?;
        writeln!(w, "t,a")?;
        for (t, a) in &self.knots {
            writeln!(w, "{t},{a}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::CacheFormat(format!("missing {what}")))
        };
        if next("format line")?.trim() != FORMAT_LINE {
            return Err(Error::CacheFormat("unknown format version".into()));
        }
        let hash = header_value(&next("config hash")?, "config_hash")?;
        let spacing: f64 = header_value(&next("spacing")?, "spacing")?
            .parse()
            .map_err(|_| Error::CacheFormat("bad spacing".into()))?;
        if next("column header")?.trim() != "t,a" {
            return Err(Error::CacheFormat("expected column header t,a".into()));
        }
        let mut knots = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (t, a) = line
                .split_once(',')
                .ok_or_else(|| Error::CacheFormat(format!("bad row {line:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::CacheFormat(format!("bad number in row {line:?}")))
            };
            knots.push((parse(t)?, parse(a)?));
        }
        let table = CumulativeTable {
            spacing,
            knots,
            config_hash: hash,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) {
            return Err(Error::CacheFormat("spacing must be positive".into()));
        }
        if self.knots.first() != Some(&(0.0, 0.0)) {
            return Err(Error::CacheFormat("table must start at A(0) = 0".into()));
        }
        for (i, w) in self.knots.windows(2).enumerate() {
            if w[1].0 != self.knot_time(i + 1) || w[1].1 < w[0].1 {
                return Err(Error::CacheFormat(format!("knot {} breaks the uniform monotone grid", i + 1)));
            }
        }
        Ok(())
    }
}

fn header_value(line: &str, key: &str) -> Result<String> {
    line.strip_prefix("# ")
        .and_then(|rest| rest.strip_prefix(key))
        .and_then(|rest| rest.strip_prefix('='))
        .map(|v| v.trim().to_string())
        .ok_or_else(|| Error::CacheFormat(format!("expected `# {key}=` header, got {line:?}")))
}
