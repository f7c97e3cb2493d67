//! CSV tables and their metadata sidecars.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which parses back
//! to the same `f64`. Rows are written in index order, so identical inputs give
//! byte-identical files.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use super::config::{FlatConfig, RunConfig};
use crate::analysis::{EscapeRecord, LyapunovEstimate, SosPoint};
use crate::dynamics::BounceEvent;
use crate::error::{Error, Result};
use crate::geometry::ParaxialReport;

pub const STABILITY_HEADER: [&str; 7] = [
    "config_label",
    "m_left",
    "m_right",
    "M_left",
    "M_right",
    "lambda0_left",
    "lambda0_right",
];
pub const TRACE_HEADER: [&str; 7] = ["event_index", "t", "z", "y", "vz", "vy", "surface_id"];
pub const SOS_HEADER: [&str; 3] = ["bounce_index", "y", "vy"];
pub const ESCAPE_HEADER: [&str; 5] = ["y0", "angle0", "n_bounces", "escape_time_s", "capped"];
pub const LYAP_HEADER: [&str; 6] = ["label", "lambda1", "stderr", "exponent_sum", "n_orbits", "bounces"];

/// Round-trip exact float text.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Row-by-row CSV writer bound to one output file.
pub struct Table {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl Table {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|source| io_error(path, source))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer.write_record(header)?;
        Ok(Table {
            path: path.to_owned(),
            writer,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        Ok(self.writer.write_record(fields)?)
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|source| io_error(&self.path, source))?;
        Ok(self.path)
    }
}

pub(crate) fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn write_stability(path: &Path, report: &ParaxialReport) -> Result<PathBuf> {
    let mut t = Table::create(path, &STABILITY_HEADER)?;
    t.row([
        report.label(),
        fmt_f64(report.left.half_trace),
        fmt_f64(report.right.half_trace),
        fmt_opt(report.left.magnification),
        fmt_opt(report.right.magnification),
        fmt_opt(report.left.lambda0),
        fmt_opt(report.right.lambda0),
    ])?;
    t.finish()
}

pub fn write_trace(path: &Path, events: &[BounceEvent]) -> Result<PathBuf> {
    let mut t = Table::create(path, &TRACE_HEADER)?;
    for (i, e) in events.iter().enumerate() {
        t.row([
            (i + 1).to_string(),
            fmt_f64(e.t),
            fmt_f64(e.point.x),
            fmt_f64(e.point.y),
            fmt_f64(e.v_out.x),
            fmt_f64(e.v_out.y),
            e.surface.name().to_owned(),
        ])?;
    }
    t.finish()
}

pub fn write_sos(path: &Path, points: &[SosPoint]) -> Result<PathBuf> {
    let mut t = Table::create(path, &SOS_HEADER)?;
    for p in points {
        t.row([p.bounce_index.to_string(), fmt_f64(p.y), fmt_f64(p.v_y)])?;
    }
    t.finish()
}

pub fn write_escape(path: &Path, records: &[EscapeRecord]) -> Result<PathBuf> {
    let mut t = Table::create(path, &ESCAPE_HEADER)?;
    for r in records {
        t.row([
            fmt_f64(r.y0),
            fmt_f64(r.angle0),
            r.n_bounces.to_string(),
            fmt_f64(r.escape_time),
            u8::from(r.capped).to_string(),
        ])?;
    }
    t.finish()
}

pub fn write_lyap(path: &Path, label: &str, est: &LyapunovEstimate) -> Result<PathBuf> {
    let mut t = Table::create(path, &LYAP_HEADER)?;
    t.row([
        label.to_owned(),
        fmt_f64(est.lambda1),
        fmt_f64(est.stderr),
        fmt_f64(est.exponent_sum),
        est.n_orbits.to_string(),
        est.bounces_per_orbit.to_string(),
    ])?;
    t.finish()
}

/// Contents of the `<name>.meta.json` file written next to each table. The
/// `config` object is itself a valid `--config` file for the same run.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub output_file: String,
    pub config: FlatConfig,
    pub wall_clock_s: f64,
    pub workers: usize,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl RunMetadata {
    pub fn new(subcommand: &str, output: &Path, config: &RunConfig, elapsed: Duration) -> Self {
        RunMetadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_owned(),
            output_file: output
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            config: config.to_flat(),
            wall_clock_s: elapsed.as_secs_f64(),
            workers: config.workers,
            extra: serde_json::Map::new(),
        }
    }

    /// Sidecar path for a table: `escape.csv` becomes `escape.meta.json`.
    pub fn sidecar_path(table: &Path) -> PathBuf {
        table.with_extension("meta.json")
    }

    pub fn write(&self, table: &Path) -> Result<PathBuf> {
        let path = Self::sidecar_path(table);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).map_err(|source| io_error(&path, source))?;
        Ok(path)
    }
}
