use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("open boundary at edge ({0}, {1})")]
    OpenBoundary(u32, u32),

    #[error("non-manifold edge ({0}, {1}) shared by {2} faces")]
    NonManifoldEdge(u32, u32, usize),

    #[error("inconsistent orientation at face {face} (edge ({a}, {b}) traversed twice in the same direction)")]
    InconsistentOrientation { face: usize, a: u32, b: u32 },

    #[error("face {0} references vertex {1} which does not exist")]
    BadVertexIndex(usize, u32),

    #[error("degenerate face {0} (area {1:e} m^2)")]
    DegenerateFace(usize, f64),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("patch label '{0}' not present on mesh")]
    MissingPatch(String),

    #[error("remesher produced an invalid configuration: {0}")]
    Remesh(String),

    #[error("special function overflow: {0}")]
    Overflow(String),

    #[error("dense assembly cap exceeded: {faces} faces > cap {cap}")]
    AssemblyCap { faces: usize, cap: usize },

    #[error("singular or ill-conditioned system")]
    Singular,

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("evaluation point {index} too close to or inside the boundary (distance {distance:e} m)")]
    NearSurface { index: usize, distance: f64 },

    #[error("fields are not index-aligned: {0}")]
    Misaligned(String),

    #[error("reference field has zero norm on the selected subset")]
    ZeroReference,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::OpenBoundary(..)
            | Error::NonManifoldEdge(..)
            | Error::InconsistentOrientation { .. }
            | Error::BadVertexIndex(..)
            | Error::DegenerateFace(..)
            | Error::InvalidMesh(_) => "mesh",
            Error::InvalidArgument(_) => "argument",
            Error::MissingPatch(_) => "patch",
            Error::Remesh(_) => "remesh",
            Error::Overflow(_) => "overflow",
            Error::AssemblyCap { .. } => "capacity",
            Error::Singular | Error::NoConvergence { .. } => "solver",
            Error::NearSurface { .. } => "evaluation",
            Error::Misaligned(_) | Error::ZeroReference => "metrics",
        }
    }
}
