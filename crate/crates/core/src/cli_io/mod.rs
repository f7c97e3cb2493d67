//! Command-line front end.
//!
//! Every subcommand resolves a [`RunConfig`] (preset, then `--config` file,
//! then flags), runs one analysis on a rayon pool of `workers` threads and
//! writes `<output>/<name>.csv` together with `<output>/<name>.meta.json`.

mod config;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

pub use config::{preset, FlatConfig, LyapunovRun, RunConfig, SosParams, DEFAULT_CAP, PRESETS};
pub use output::{
    fmt_f64, write_escape, write_lyap, write_sos, write_stability, write_trace, RunMetadata, Table, ESCAPE_HEADER,
    LYAP_HEADER, SOS_HEADER, STABILITY_HEADER, TRACE_HEADER,
};

use crate::analysis::{escape_scan, repeller_lyapunov, sos_collect, RepellerSearch, TangentMethod};
use crate::dynamics::{trace, RayState};
use crate::error::{Error, Result};
use crate::geometry::{build_cavity, classify};

#[derive(Debug, Parser)]
#[command(
    name = "cavity-chaos",
    version,
    about = "Ray chaos in a two-sub-cavity optical resonator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Paraxial half-traces, magnifications and axial exponents
    Stability(RunArgs),
    /// Bounce-by-bounce record of one ray launched at (y0, angle0)
    Trace(RunArgs),
    /// Surface of section at the left concave mirror
    Sos(RunArgs),
    /// Largest Lyapunov exponent averaged over long-lived orbits
    Lyapunov(RunArgs),
    /// Escape time against launch height
    Escape(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Stability(_) => "stability",
            Command::Trace(_) => "trace",
            Command::Sos(_) => "sos",
            Command::Lyapunov(_) => "lyapunov",
            Command::Escape(_) => "escape",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Stability(a) | Command::Trace(a) | Command::Sos(a) | Command::Lyapunov(a) | Command::Escape(a) => {
                a
            }
        }
    }
}

/// Flags shared by all subcommands. Each one overrides the matching key of
/// the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named cavity: UU, US, SS, MM, SM, UM, fig2a, fig2b
    #[arg(long)]
    pub preset: Option<String>,
    /// Radius of the concave end mirrors (m)
    #[arg(long = "R", value_name = "R")]
    pub concave_radius: Option<f64>,
    /// Radius of the convex central element (m)
    #[arg(long = "r", value_name = "r")]
    pub convex_radius: Option<f64>,
    #[arg(long)]
    pub l_left: Option<f64>,
    #[arg(long)]
    pub l_right: Option<f64>,
    /// Half-aperture of the convex element (m)
    #[arg(long)]
    pub a: Option<f64>,
    /// Half-aperture of the end mirrors (m)
    #[arg(long)]
    pub b: Option<f64>,
    /// Maximum number of bounces per ray
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_max: Option<f64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Launch angle from the optical axis (rad)
    #[arg(long, allow_hyphen_values = true)]
    pub angle0: Option<f64>,
    /// Launch height for trace and sos (m)
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub n_orbits: Option<usize>,
    #[arg(long)]
    pub bounces_per_orbit: Option<u64>,
    #[arg(long)]
    pub transient: Option<u64>,
    /// Tangent propagation: exact or shadow
    #[arg(long)]
    pub method: Option<TangentMethod>,
    /// Refinement levels of the repeller search
    #[arg(long)]
    pub depth: Option<u32>,
    /// Skip orbits on invariant tori when averaging exponents
    #[arg(long)]
    pub exclude_regular: Option<bool>,
    /// Output directory
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (default: available cores)
    #[arg(long)]
    pub workers: Option<usize>,
}

impl RunArgs {
    pub fn to_flat(&self) -> FlatConfig {
        FlatConfig {
            preset: self.preset.clone(),
            concave_radius: self.concave_radius,
            convex_radius: self.convex_radius,
            l_left: self.l_left,
            l_right: self.l_right,
            a: self.a,
            b: self.b,
            cap: self.cap,
            y_min: self.y_min,
            y_max: self.y_max,
            n_samples: self.n_samples,
            angle0: self.angle0,
            y0: self.y0,
            n_points: self.n_points,
            n_orbits: self.n_orbits,
            bounces_per_orbit: self.bounces_per_orbit,
            transient: self.transient,
            method: self.method,
            depth: self.depth,
            exclude_regular: self.exclude_regular,
            output: self.output.clone(),
            workers: self.workers,
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        RunConfig::resolve(self.config.as_deref(), self.to_flat())
    }
}

/// Parse `args`, run, and return the process exit code. Messages go to
/// stdout (help, version, written files) or stderr (errors).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli
        .command
        .args()
        .resolve()
        .and_then(|cfg| run_subcommand(&cli.command, &cfg))
    {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run one subcommand and return the paths written (table, then sidecar).
pub fn run_subcommand(command: &Command, config: &RunConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&config.output).map_err(|source| output::io_error(&config.output, source))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let started = Instant::now();
    let name = command.name();
    info!("{name}: {} worker(s)", config.workers);

    let (table, meta) = pool.install(|| -> Result<_> {
        let geom = build_cavity(&config.cavity)?;
        let report = classify(&config.cavity);
        Ok(match command {
            Command::Stability(_) => {
                let path = write_stability(&config.output.join("stability.csv"), &report)?;
                (path, None)
            }
            Command::Trace(_) => {
                let (y0, angle0) = (config.sos.y0, config.sos.angle0);
                let result = trace(RayState::launch(&geom, y0, angle0), &geom, config.cap)
                    .map_err(|e| e.at_launch(y0, angle0))?;
                let path = write_trace(&config.output.join("trace.csv"), &result.events)?;
                let extra = serde_json::json!({
                    "capped": result.outcome.is_capped(),
                    "path_length_m": result.path_length,
                });
                (path, Some(extra))
            }
            Command::Sos(_) => {
                let points = sos_collect(&geom, config.sos.y0, config.sos.angle0, config.sos.n_points)?;
                let path = write_sos(&config.output.join("sos.csv"), &points)?;
                (path, None)
            }
            Command::Escape(_) => {
                let records = escape_scan(&geom, &config.scan, config.cap)?;
                let path = write_escape(&config.output.join("escape.csv"), &records)?;
                (path, None)
            }
            Command::Lyapunov(_) => {
                let run = &config.lyapunov;
                let search = RepellerSearch::new(config.scan, config.cap, run.depth);
                let est = repeller_lyapunov(&geom, &search, run.n_orbits, run.exclude_regular, &run.params)?;
                let path = write_lyap(&config.output.join("lyap.csv"), &report.label(), &est)?;
                let orbits: Vec<_> = est
                    .orbits
                    .iter()
                    .map(|o| serde_json::json!({ "y0": o.y0, "angle0": o.angle0, "lambda1": o.lambda1() }))
                    .collect();
                (path, Some(serde_json::json!({ "orbits": orbits })))
            }
        })
    })?;

    let mut meta_doc = RunMetadata::new(name, &table, config, started.elapsed());
    if let Some(serde_json::Value::Object(extra)) = meta {
        meta_doc.extra = extra;
    }
    let sidecar = meta_doc.write(&table)?;
    Ok(vec![table, sidecar])
}
