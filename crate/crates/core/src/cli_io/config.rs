//! Run configuration: built-in presets, a flat JSON file and command-line
//! overrides, merged in that order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{LyapunovParams, ScanGrid, TangentMethod};
use crate::error::{Error, Result};
use crate::geometry::CavityConfig;

/// Bounce cap of the escape-time scans.
pub const DEFAULT_CAP: u64 = 60_000;

/// Named cavities: one per stability class, plus `fig2a` (hard chaos, same as
/// UU) and `fig2b` (soft chaos, same as SS) for surface-of-section runs.
pub const PRESETS: [(&str, [f64; 4]); 8] = [
    ("UU", [1.0, 0.25, 0.04, 0.04]),
    ("US", [1.0, 0.90, 0.05, 0.30]),
    ("SS", [1.0, 0.90, 0.45, 0.45]),
    ("MM", [1.0, 0.80, 0.20, 0.20]),
    ("SM", [1.0, 0.80, 0.40, 0.20]),
    ("UM", [1.0, 0.80, 0.01, 0.20]),
    ("fig2a", [1.0, 0.25, 0.04, 0.04]),
    ("fig2b", [1.0, 0.90, 0.45, 0.45]),
];

/// Cavity for a preset name, with the default apertures.
pub fn preset(name: &str) -> Option<CavityConfig> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, [big_r, r, ll, lr])| CavityConfig::new(*big_r, *r, *ll, *lr))
}

/// Flat key/value form shared by the JSON file, the command line and the
/// metadata echo. Absent keys fall through to the next source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub concave_radius: Option<f64>,
    #[serde(rename = "r", skip_serializing_if = "Option::is_none")]
    pub convex_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_left: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_right: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_orbits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounces_per_orbit: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transient: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<TangentMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude_regular: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl FlatConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(offending_key(&e.to_string()), e.to_string()))
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overlay(self, other: FlatConfig) -> Self {
        macro_rules! pick {
            ($($field:ident),*) => {
                FlatConfig { $($field: other.$field.or(self.$field)),* }
            };
        }
        pick!(
            preset,
            concave_radius,
            convex_radius,
            l_left,
            l_right,
            a,
            b,
            cap,
            y_min,
            y_max,
            n_samples,
            angle0,
            y0,
            n_points,
            n_orbits,
            bounces_per_orbit,
            transient,
            method,
            depth,
            exclude_regular,
            output,
            workers
        )
    }
}

/// Pull the field name out of a serde message such as
/// "unknown field `foo`, expected ...".
fn offending_key(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map_or_else(|| "<file>".to_owned(), str::to_owned)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SosParams {
    pub y0: f64,
    pub angle0: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovRun {
    pub n_orbits: usize,
    pub depth: u32,
    /// Drop orbits that lie on KAM tori before averaging.
    pub exclude_regular: bool,
    pub params: LyapunovParams,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub cavity: CavityConfig,
    pub cap: u64,
    pub scan: ScanGrid,
    pub sos: SosParams,
    pub lyapunov: LyapunovRun,
    pub output: PathBuf,
    pub workers: usize,
}

impl RunConfig {
    /// Merge preset, file and flags (flags win) and validate the result.
    pub fn resolve(file: Option<&Path>, flags: FlatConfig) -> Result<Self> {
        let from_file = match file {
            Some(path) => FlatConfig::from_json_file(path)?,
            None => FlatConfig::default(),
        };
        Self::from_flat(from_file.overlay(flags))
    }

    pub fn from_flat(flat: FlatConfig) -> Result<Self> {
        let base = match flat.preset.as_deref() {
            Some(name) => Some(preset(name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                Error::config(
                    "preset",
                    format!("unknown preset `{name}` (one of {})", names.join(", ")),
                )
            })?),
            None => None,
        };
        let required = |key: &str, value: Option<f64>, from_preset: Option<f64>| {
            value
                .or(from_preset)
                .ok_or_else(|| Error::config(key, "missing (set it or choose a preset)"))
        };
        let cavity = CavityConfig {
            concave_radius: required("R", flat.concave_radius, base.map(|c| c.concave_radius))?,
            convex_radius: required("r", flat.convex_radius, base.map(|c| c.convex_radius))?,
            l_left: required("l_left", flat.l_left, base.map(|c| c.l_left))?,
            l_right: required("l_right", flat.l_right, base.map(|c| c.l_right))?,
            element_aperture: flat.a.unwrap_or(CavityConfig::DEFAULT_ELEMENT_APERTURE),
            mirror_aperture: flat.b.unwrap_or(CavityConfig::DEFAULT_MIRROR_APERTURE),
        };
        cavity.validate()?;

        let angle0 = flat.angle0.unwrap_or(0.0);
        let config = RunConfig {
            preset: flat.preset,
            cavity,
            cap: flat.cap.unwrap_or(DEFAULT_CAP),
            scan: ScanGrid {
                y_min: flat.y_min.unwrap_or(0.001),
                y_max: flat.y_max.unwrap_or(0.024),
                n_samples: flat.n_samples.unwrap_or(1_000),
                angle0,
            },
            sos: SosParams {
                y0: flat.y0.unwrap_or(1e-3),
                angle0,
                n_points: flat.n_points.unwrap_or(1_000),
            },
            lyapunov: LyapunovRun {
                n_orbits: flat.n_orbits.unwrap_or(10),
                depth: flat.depth.unwrap_or(3),
                exclude_regular: flat.exclude_regular.unwrap_or(true),
                params: LyapunovParams {
                    bounces: flat.bounces_per_orbit.unwrap_or(10_000),
                    transient: flat.transient.unwrap_or(100),
                    method: flat.method.unwrap_or(TangentMethod::Exact),
                },
            },
            output: flat.output.unwrap_or_else(|| PathBuf::from(".")),
            workers: flat.workers.unwrap_or_else(default_workers),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let b = self.cavity.mirror_aperture;
        let checks: [(&str, bool, String); 10] = [
            ("cap", self.cap >= 1, "must be at least 1".into()),
            ("n_samples", self.scan.n_samples >= 2, "must be at least 2".into()),
            (
                "y_min",
                self.scan.y_min.abs() <= b,
                format!("must lie within [-{b}, {b}]"),
            ),
            (
                "y_max",
                self.scan.y_max.abs() <= b,
                format!("must lie within [-{b}, {b}]"),
            ),
            ("angle0", self.scan.angle0.is_finite(), "must be finite".into()),
            ("y0", self.sos.y0.abs() <= b, format!("must lie within [-{b}, {b}]")),
            ("n_orbits", self.lyapunov.n_orbits >= 1, "must be at least 1".into()),
            (
                "bounces_per_orbit",
                self.lyapunov.params.bounces >= 1_000,
                "must be at least 1000".into(),
            ),
            ("depth", self.lyapunov.depth >= 1, "must be at least 1".into()),
            ("workers", self.workers >= 1, "must be at least 1".into()),
        ];
        match checks.into_iter().find(|(_, ok, _)| !ok) {
            Some((key, _, message)) => Err(Error::config(key, message)),
            None => Ok(()),
        }
    }

    /// Flat form that [`RunConfig::from_flat`] maps back to `self`.
    pub fn to_flat(&self) -> FlatConfig {
        FlatConfig {
            preset: self.preset.clone(),
            concave_radius: Some(self.cavity.concave_radius),
            convex_radius: Some(self.cavity.convex_radius),
            l_left: Some(self.cavity.l_left),
            l_right: Some(self.cavity.l_right),
            a: Some(self.cavity.element_aperture),
            b: Some(self.cavity.mirror_aperture),
            cap: Some(self.cap),
            y_min: Some(self.scan.y_min),
            y_max: Some(self.scan.y_max),
            n_samples: Some(self.scan.n_samples),
            angle0: Some(self.scan.angle0),
            y0: Some(self.sos.y0),
            n_points: Some(self.sos.n_points),
            n_orbits: Some(self.lyapunov.n_orbits),
            bounces_per_orbit: Some(self.lyapunov.params.bounces),
            transient: Some(self.lyapunov.params.transient),
            method: Some(self.lyapunov.params.method),
            depth: Some(self.lyapunov.depth),
            exclude_regular: Some(self.lyapunov.exclude_regular),
            output: Some(self.output.clone()),
            workers: Some(self.workers),
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
