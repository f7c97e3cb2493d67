use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::SurfaceId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cavity: {0} violated")]
    InvalidCavity(&'static str),

    #[error("stable sub-cavity: magnification undefined (m = {0})")]
    StableSubCavity(f64),

    #[error("reflection from non-approaching ray (n·v = {0})")]
    NonApproaching(f64),

    #[error("ambiguous collision: {first:?} and {second:?} hit within {dt:e} s at distinct points")]
    AmbiguousCollision {
        first: SurfaceId,
        second: SurfaceId,
        dt: f64,
    },

    #[error("tangent map ill-conditioned: grazing incidence on {surface:?} (|n·v| = {cos_incidence:e})")]
    Grazing { surface: SurfaceId, cos_incidence: f64 },

    #[error("shadow trajectory left the reference orbit at bounce {bounce}")]
    ShadowDiverged { bounce: u64 },

    #[error("launch y0 = {y0}, angle0 = {angle0}: {source}")]
    AtLaunch {
        y0: f64,
        angle0: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no data")]
    NoData,

    #[error("all {0} orbits escaped before the requested number of bounces")]
    AllOrbitsEscaped(usize),

    #[error("invalid parameter `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_launch(self, y0: f64, angle0: f64) -> Self {
        Error::AtLaunch {
            y0,
            angle0,
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 configuration, 2 I/O, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AtLaunch { source, .. } => source.exit_code(),
            Error::InvalidCavity(_) | Error::Config { .. } | Error::Json(_) => 1,
            Error::Io { .. } | Error::Csv(_) => 2,
            _ => 3,
        }
    }
}
