use std::path::PathBuf;

use crate::bundle::ChartPoint;

/// Everything that can go wrong in the library.
///
/// Variants split into two families: precondition/validation failures
/// (malformed input) and mathematical failures (degenerate pencils, inner
/// products outside the domain of a map, ...). [`Error::is_validation`]
/// tells them apart.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not hermitian: max |A - A*| = {residual:e} exceeds {tolerance:e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("hermitian form is degenerate: {zero} eigenvalue(s) within tolerance")]
    DegenerateForm { zero: usize },

    #[error("basis is not of full column rank (rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("matrix is not positive definite: inertia (p, q, z) = ({p}, {q}, {z})")]
    NotPositiveDefinite { p: usize, q: usize, z: usize },

    #[error(
        "pencil is not diagonalizable with non-neutral eigenvectors (trace of J*M = {trace:e})"
    )]
    PencilDegenerate { trace: f64 },

    #[error("operation needs a line bundle (rank 1) but the model has rank {rank}")]
    RankMismatch { rank: usize },

    #[error("section does not lie in the subspace (residual {residual:e})")]
    NotInSubspace { residual: f64 },

    #[error("sample nodes do not determine the inner product: {0}")]
    SingularNodes(String),

    #[error("samples are not the Bergman function of any inner product (residual {residual:e})")]
    NotInRange { residual: f64 },

    #[error("Bergman function is not positive at {point} (value {value:e})")]
    NonpositiveKappa { point: ChartPoint, value: f64 },

    #[error("rather-ampleness ({rather_ample}) disagrees with curvature positivity ({curvature_positive}); check tolerances")]
    ConsistencyViolation {
        rather_ample: bool,
        curvature_positive: bool,
    },

    #[error("inner product is not positive semidefinite with rather ample support")]
    NotInAE,

    #[error("no admissible {dim}-dimensional subspace found in {samples} samples")]
    NoAdmissibleSubspace { dim: usize, samples: usize },

    #[error(
        "metric weight does not have positive curvature (min density {min_density:e} at {point})"
    )]
    UnsupportedWeight { point: ChartPoint, min_density: f64 },

    #[error("invalid metric weight: {0}")]
    InvalidWeight(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable name, used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NonFinite => "NonFinite",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DegenerateForm { .. } => "DegenerateForm",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::NotPositiveSemidefinite { .. } => "NotPositiveSemidefinite",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::PencilDegenerate { .. } => "PencilDegenerate",
            Error::RankMismatch { .. } => "RankMismatch",
            Error::NotInSubspace { .. } => "NotInSubspace",
            Error::SingularNodes(_) => "SingularNodes",
            Error::NotInRange { .. } => "NotInRange",
            Error::NonpositiveKappa { .. } => "NonpositiveKappa",
            Error::ConsistencyViolation { .. } => "ConsistencyViolation",
            Error::NotInAE => "NotInAE",
            Error::NoAdmissibleSubspace { .. } => "NoAdmissibleSubspace",
            Error::UnsupportedWeight { .. } => "UnsupportedWeight",
            Error::InvalidWeight(_) => "InvalidWeight",
            Error::InvalidScenario(_) => "InvalidScenario",
            Error::EmptySamples => "EmptySamples",
            Error::Io { .. } => "IoError",
        }
    }

    /// True for malformed input, false for mathematical degeneracy.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NonFinite
                | Error::DimensionMismatch(_)
                | Error::RankMismatch { .. }
                | Error::InvalidWeight(_)
                | Error::InvalidScenario(_)
                | Error::EmptySamples
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
