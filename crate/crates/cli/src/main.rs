//! `zladder`: builds the ladder cache, verifies single formulas and runs scans.
//!
//! Exit codes: 0 pass, 1 tolerance failure, 2 usage or configuration error,
//! 3 numerical failure.

mod config;
mod report;

use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use zeta_ladder::gaps::{gap_scan, GapReport};
use zeta_ladder::hybrid::{asymptotic_scan, invariance_scan, ScanRanges};
use zeta_ladder::{DeltaPair, Error, FormulaId, HybridParams};

use crate::config::RunConfig;
use crate::report::{emit_json, emit_rows, Emitter};

/// Largest accepted relative deviation in an invariance scan.
const INVARIANCE_TOL: f64 = 1e-5;
/// Exact-form residual bound for the asymptotic scan.
const ANCHOR_TOL: f64 = 1e-6;
/// Raw against predicted deviation, as a factor either way.
const OMEGA_FACTOR: f64 = 3.0;
const GAP_SOFT: (f64, f64) = (0.7, 1.3);
const GAP_HARD: (f64, f64) = (0.5, 1.5);

#[derive(Debug, Parser)]
#[command(name = "zladder", version, about = "Jacob's ladder chains and hybrid-formula verification")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Builds or extends the cumulative-table cache up to `--tmax`.
    LadderBuild {
        #[arg(long)]
        tmax: f64,
    },
    /// Verifies one formula and prints its report.
    Verify(VerifyArgs),
    /// Runs a family of verifications.
    #[command(subcommand)]
    Scan(ScanKind),
}

#[derive(Debug, Args)]
struct DeltaArgs {
    /// Δ₃, as a fraction ("1/3"), decimal or integer.
    #[arg(long)]
    delta3: Option<String>,
    #[arg(long)]
    delta4: Option<String>,
}

impl DeltaArgs {
    fn pair(&self) -> Result<Option<DeltaPair>, Error> {
        match (&self.delta3, &self.delta4) {
            (Some(a), Some(b)) => DeltaPair::parse(a, b).map(Some),
            (None, None) => Ok(None),
            _ => Err(Error::InvalidParameter("--delta3 and --delta4 go together".into())),
        }
    }

    fn pair_or_default(&self) -> Result<DeltaPair, Error> {
        Ok(self.pair()?.unwrap_or_else(DeltaPair::third_fifth))
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Formula alias (echf1, echf2, beta-elim, secondary1, secondary1-special,
    /// mixed, secondary2, ternary, asymptotic) or identifier.
    formula: String,
    #[command(flatten)]
    delta: DeltaArgs,
    #[arg(long = "L")]
    l: u32,
    #[arg(long = "U")]
    u: f64,
    #[arg(long, default_value_t = 1)]
    k1: usize,
    #[arg(long, default_value_t = 2)]
    k2: usize,
    #[arg(long, default_value_t = 1)]
    k3: usize,
    #[arg(long, default_value_t = 2)]
    k4: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Debug, Subcommand)]
enum ScanKind {
    /// Seeded samples of the first secondary formula against its constant.
    Invariance {
        #[command(flatten)]
        delta: DeltaArgs,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        u_min: f64,
        #[arg(long, default_value_t = 1.5)]
        u_max: f64,
        #[arg(long, default_value_t = 100)]
        l_min: u32,
        #[arg(long, default_value_t = 1000)]
        l_max: u32,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
    },
    /// Gaps between tower components against the prime-count scale.
    Gaps {
        #[arg(long = "L", value_delimiter = ',', default_values_t = [300, 500, 1000])]
        l: Vec<u32>,
        #[arg(long = "U", default_value_t = 1.0)]
        u: f64,
        #[arg(long, default_value_t = 0)]
        r_max: usize,
    },
    /// The raw-|ζ| form of the first secondary formula along a grid of L.
    Asymptotic {
        #[command(flatten)]
        delta: DeltaArgs,
        #[arg(long = "L", value_delimiter = ',', default_values_t = [150, 300, 500, 1000])]
        l: Vec<u32>,
        #[arg(long = "U", default_value_t = 1.0)]
        u: f64,
        #[arg(long, default_value_t = 1)]
        k1: usize,
        #[arg(long, default_value_t = 2)]
        k2: usize,
    },
}

/// How a run ended when it did not fail outright.
enum Verdict {
    Pass,
    Breach,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Breach) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(err) if err.is_usage() => 2,
        Some(_) => 3,
        None => 2,
    }
}

fn run(cli: &Cli) -> anyhow::Result<Verdict> {
    let out = Emitter::new(cli.run.output.as_deref(), cli.run.format);
    match &cli.command {
        Command::LadderBuild { tmax } => ladder_build(&cli.run, *tmax, &out),
        Command::Verify(args) => verify(&cli.run, args, &out),
        Command::Scan(kind) => scan(&cli.run, kind, &out),
    }
}

#[derive(Serialize)]
struct BuildSummary {
    cache: String,
    config_hash: String,
    spacing: f64,
    knots: usize,
    last_t: f64,
}

fn ladder_build(run: &RunConfig, tmax: f64, out: &Emitter) -> anyhow::Result<Verdict> {
    let model = run.model()?;
    let cap = model.config().t_cap;
    if !(tmax > 0.0 && tmax <= cap) {
        return Err(Error::InvalidParameter(format!("--tmax must lie in (0, {cap}], got {tmax}")).into());
    }
    model.ensure_table(tmax)?;
    let path = run.cache_path();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::from).with_context(|| format!("creating {}", dir.display()))?;
    }
    model.save_cache(&path)?;
    let table = model.table_snapshot();
    emit_json(
        out,
        &BuildSummary {
            cache: path.display().to_string(),
            config_hash: table.config_hash().to_string(),
            spacing: table.spacing(),
            knots: table.knots().len(),
            last_t: table.last_t(),
        },
    )?;
    Ok(Verdict::Pass)
}

fn verify(run: &RunConfig, args: &VerifyArgs, out: &Emitter) -> anyhow::Result<Verdict> {
    let id: FormulaId = args.formula.parse()?;
    let mut params = HybridParams::new(args.l, args.u)
        .with_depths(args.k1, args.k2, args.k3, args.k4)
        .with_k(args.k);
    if let Some(pair) = args.delta.pair()? {
        params = params.with_delta(pair);
    }
    if id.needs_delta() && params.delta.is_none() {
        return Err(Error::InvalidParameter(format!("{id} needs --delta3 and --delta4")).into());
    }
    let model = run.model()?;
    let report = run.verifier(&model).verify(id, &params)?;
    report::emit_report(out, &report)?;
    Ok(if report.passed { Verdict::Pass } else { Verdict::Breach })
}

fn scan(run: &RunConfig, kind: &ScanKind, out: &Emitter) -> anyhow::Result<Verdict> {
    let model = run.model()?;
    let verifier = run.verifier(&model);
    match kind {
        ScanKind::Invariance {
            delta,
            samples,
            u_min,
            u_max,
            l_min,
            l_max,
            k_max,
        } => {
            let ranges = ScanRanges {
                u_min: *u_min,
                u_max: *u_max,
                l_min: *l_min,
                l_max: *l_max,
                k_max: *k_max,
            };
            let scan = invariance_scan(&verifier, &delta.pair_or_default()?, *samples, run.seed, &ranges)?;
            for s in scan.samples.iter().filter(|s| s.error.is_some()) {
                eprintln!("sample L={} U={} k=({},{}) failed: {}", s.l, s.u, s.k1, s.k2, s.error.as_deref().unwrap_or(""));
            }
            emit_rows(out, &scan, &scan.samples)?;
            let ok = scan.failures == 0 && scan.max_rel_dev <= INVARIANCE_TOL;
            Ok(if ok { Verdict::Pass } else { Verdict::Breach })
        }
        ScanKind::Gaps { l, u, r_max } => {
            let rows = gap_scan(&model, &run.limits(), l, *u, *r_max)?;
            let mut ok = true;
            for g in rows.iter().filter(|g| g.r == 0) {
                if !within(g.ratio, GAP_HARD) {
                    ok = false;
                    eprintln!("gap ratio {:.3} at L={} is outside [{}, {}]", g.ratio, g.l, GAP_HARD.0, GAP_HARD.1);
                } else if !within(g.ratio, GAP_SOFT) {
                    eprintln!("warning: gap ratio {:.3} at L={} is outside [{}, {}]", g.ratio, g.l, GAP_SOFT.0, GAP_SOFT.1);
                }
            }
            #[derive(Serialize)]
            struct Gaps<'a> {
                rows: &'a [GapReport],
            }
            emit_rows(out, &Gaps { rows: &rows }, &rows)?;
            Ok(if ok { Verdict::Pass } else { Verdict::Breach })
        }
        ScanKind::Asymptotic { delta, l, u, k1, k2 } => {
            let scan = asymptotic_scan(&verifier, &delta.pair_or_default()?, l, *u, *k1, *k2)?;
            let mut ok = true;
            for row in &scan.rows {
                let consistent = match (row.raw_deviation, row.predicted_deviation, row.exact_rel_residual) {
                    (Some(raw), Some(pred), Some(anchor)) => {
                        let factor = (raw / pred).abs().max((pred / raw).abs());
                        anchor <= ANCHOR_TOL && factor <= OMEGA_FACTOR
                    }
                    _ => false,
                };
                if !consistent {
                    ok = false;
                    eprintln!("L={}: {}", row.l, row.error.as_deref().unwrap_or("anchor or deviation out of bounds"));
                }
            }
            emit_rows(out, &scan, &scan.rows)?;
            Ok(if ok { Verdict::Pass } else { Verdict::Breach })
        }
    }
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}
