use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use zeta_ladder::HybridReport;

use crate::config::Format;

/// Where and how reports are written.
pub struct Emitter {
    path: Option<PathBuf>,
    format: Format,
}

impl Emitter {
    pub fn new(path: Option<&Path>, format: Format) -> Self {
        Emitter {
            path: path.map(Path::to_path_buf),
            format,
        }
    }

    fn with_writer(&self, f: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
        match &self.path {
            Some(p) => {
                let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
                f(&mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                f(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }
}

pub fn emit_json<T: Serialize>(out: &Emitter, value: &T) -> anyhow::Result<()> {
    out.with_writer(|w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// JSON gets the whole document; CSV gets one line per row.
pub fn emit_rows<T: Serialize, R: Serialize>(out: &Emitter, whole: &T, rows: &[R]) -> anyhow::Result<()> {
    match out.format {
        Format::Json => emit_json(out, whole),
        Format::Csv => out.with_writer(|w| {
            let mut csv = csv::Writer::from_writer(w);
            for row in rows {
                csv.serialize(row)?;
            }
            csv.flush()?;
            Ok(())
        }),
    }
}

#[derive(Serialize)]
struct ReportRow<'a> {
    formula_id: &'a str,
    lhs: f64,
    rhs: f64,
    rel_residual: f64,
    condition: f64,
    tolerance: f64,
    passed: bool,
}

pub fn emit_report(out: &Emitter, report: &HybridReport) -> anyhow::Result<()> {
    let row = ReportRow {
        formula_id: report.formula_id.as_str(),
        lhs: report.lhs,
        rhs: report.rhs,
        rel_residual: report.rel_residual,
        condition: report.condition,
        tolerance: report.tolerance,
        passed: report.passed,
    };
    emit_rows(out, report, &[row])
}
