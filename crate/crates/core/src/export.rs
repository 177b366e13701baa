//! CSV and JSON writers.
//!
//! CSV files carry a header row and write every float as `{:.16e}`
//! (17 significant digits, enough to round-trip an `f64`). JSON documents
//! share one envelope: schema version, document kind, data source, the full
//! run configuration and the payload.

use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::fock::FcTable;
use crate::spectral::{DiagonalCut, SpectrumGrid};

/// Bumped whenever a field of any JSON document changes meaning.
pub const SCHEMA_VERSION: &str = "1.0.0";

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// One row per grid point, `p` outermost: `dp,dq,S`.
pub fn write_grid_csv(path: &Path, grid: &SpectrumGrid) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["dp", "dq", "S"])?;
    for (ip, &p) in grid.p_axis.iter().enumerate() {
        for (iq, &q) in grid.q_axis.iter().enumerate() {
            w.write_record([fmt_float(p), fmt_float(q), fmt_float(grid.get(ip, iq))])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `delta,S` along the diagonal `Δp = Δq = Δ`.
pub fn write_diagonal_csv(path: &Path, cut: &DiagonalCut) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["delta", "S"])?;
    for (&d, &s) in cut.axis.iter().zip(&cut.values) {
        w.write_record([fmt_float(d), fmt_float(s)])?;
    }
    w.flush()?;
    Ok(())
}

/// Every tabulated overlap `⟨j̃(m)|s̃(n)⟩`: `m,j,n,s,re,im`.
pub fn write_fc_csv(path: &Path, table: &FcTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["m", "j", "n", "s", "re", "im"])?;
    for e in table.entries() {
        w.write_record([
            e.m.to_string(),
            e.j.to_string(),
            e.n.to_string(),
            e.s.to_string(),
            fmt_float(e.re),
            fmt_float(e.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Envelope shared by all JSON outputs.
#[derive(Debug, Serialize)]
pub struct Document<'a, C: Serialize, P: Serialize> {
    pub schema_version: &'static str,
    pub generator: &'static str,
    pub kind: &'a str,
    /// `"analytic"`, `"time-domain"` or `"comparison"`.
    pub source: &'a str,
    pub config: &'a C,
    pub payload: P,
}

impl<'a, C: Serialize, P: Serialize> Document<'a, C, P> {
    pub fn new(kind: &'a str, source: &'a str, config: &'a C, payload: P) -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            generator: concat!("optoscatter ", env!("CARGO_PKG_VERSION")),
            kind,
            source,
            config,
            payload,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
