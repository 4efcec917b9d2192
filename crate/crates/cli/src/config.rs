use std::path::PathBuf;

use clap::{Args, ValueEnum};
use zeta_ladder::{ChainConfig, Error, LadderConfig, LadderModel, TowerLimits, Verifier};

/// Overrides the directory holding the cumulative-table cache.
pub const CACHE_DIR_ENV: &str = "ZETA_LADDER_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".zladder-cache";
pub const CACHE_FILE: &str = "ladder-table.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Smallest admissible L.
    #[arg(long = "l0", global = true, default_value_t = 100)]
    pub l0: u32,
    /// Largest admissible iteration depth.
    #[arg(long = "k0", global = true, default_value_t = 4)]
    pub k0: usize,
    /// Relative tolerance of the cumulative-table quadrature.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub quad_tol: f64,
    /// Tolerance of monotone inversions.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub root_tol: f64,
    /// Riemann–Siegel correction terms.
    #[arg(long, global = true, default_value_t = 4)]
    pub rs_terms: usize,
    /// Cache file; defaults to `$ZETA_LADDER_CACHE_DIR/ladder-table.csv`.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for sampled scans.
    #[arg(long, global = true, default_value_t = 20_261_018)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn ladder_config(&self) -> Result<LadderConfig, Error> {
        let config = LadderConfig {
            quad_tol: self.quad_tol,
            root_tol: self.root_tol,
            rs_terms: self.rs_terms,
            ..LadderConfig::default()
        };
        config.validate()?;
        if self.k0 < 1 {
            return Err(Error::InvalidParameter("k0 must be at least 1".into()));
        }
        Ok(config)
    }

    pub fn limits(&self) -> TowerLimits {
        TowerLimits {
            l_floor: self.l0,
            k_cap: self.k0,
        }
    }

    pub fn cache_path(&self) -> PathBuf {
        if let Some(p) = &self.cache {
            return p.clone();
        }
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        dir.join(CACHE_FILE)
    }

    /// The model, seeded from the cache file when one exists. A cache built
    /// under another configuration is refused.
    pub fn model(&self) -> Result<LadderModel, Error> {
        let config = self.ladder_config()?;
        let path = self.cache_path();
        if path.exists() {
            LadderModel::load_cache(config, &path)
        } else {
            LadderModel::new(config)
        }
    }

    pub fn verifier<'a>(&self, model: &'a LadderModel) -> Verifier<'a> {
        let mut v = Verifier::new(model);
        v.limits = self.limits();
        v.chain_cfg = ChainConfig::default();
        v
    }
}
