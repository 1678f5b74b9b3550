use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the pipeline can surface. The variant name doubles as the
/// machine-readable category reported by the command-line driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("volume contains non-finite intensities")]
    NonFiniteInput,
    #[error("all intensities are equal")]
    DegenerateVolume,
    #[error("cluster {cluster} lost all members after re-seeding")]
    EmptyClusterCollapse { cluster: usize },
    #[error("seed point {0:?} is not inside the mask")]
    SeedNotInMask([usize; 3]),
    #[error("seed point vanished during erosion step {step}; try fewer erosion steps")]
    SeedEroded { step: usize },
    #[error("mask is empty")]
    EmptyMask,
    #[error("mask covers the whole domain")]
    FullMask,
    #[error("{0} region is empty; the front collapsed or filled the domain")]
    EmptyRegion(&'static str),
    #[error("field has no zero crossing")]
    NoZeroCrossing,
    #[error("zero level set touches the domain border")]
    SurfaceTouchesBorder,
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch([usize; 3], [usize; 3]),
    #[error("both masks are empty")]
    BothEmpty,
    #[error("phantom geometry does not fit the domain with a 3-voxel margin")]
    GeometryOutOfBounds,
    #[error("header declares {expected} payload bytes but {path} holds {actual}")]
    HeaderPayloadMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
    #[error("unknown dtype {0:?}")]
    UnknownDtype(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("mask byte {value} at offset {offset} is not 0 or 1")]
    MalformedMask { offset: usize, value: u8 },
    #[error("malformed config: {0}")]
    MalformedConfig(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("index {index} out of range for extent {extent}")]
    IndexOutOfRange { index: usize, extent: usize },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::NonFiniteInput => "NonFiniteInput",
            Error::DegenerateVolume => "DegenerateVolume",
            Error::EmptyClusterCollapse { .. } => "EmptyClusterCollapse",
            Error::SeedNotInMask(_) => "SeedNotInMask",
            Error::SeedEroded { .. } => "SeedEroded",
            Error::EmptyMask => "EmptyMask",
            Error::FullMask => "FullMask",
            Error::EmptyRegion(_) => "EmptyRegion",
            Error::NoZeroCrossing => "NoZeroCrossing",
            Error::SurfaceTouchesBorder => "SurfaceTouchesBorder",
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::BothEmpty => "BothEmpty",
            Error::GeometryOutOfBounds => "GeometryOutOfBounds",
            Error::HeaderPayloadMismatch { .. } => "HeaderPayloadMismatch",
            Error::UnknownDtype(_) => "UnknownDtype",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::MalformedMask { .. } => "MalformedMask",
            Error::MalformedConfig(_) => "MalformedConfig",
            Error::InvalidParams(_) => "InvalidParams",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::IoFailure { .. } => "IoFailure",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
