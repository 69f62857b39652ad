use alloc::boxed::Box;
use alloc::string::String;

use crate::sequences::ParseError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("displacement between the two centers must be non-zero")]
    ZeroDisplacement,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("eigenstate labeling failed for eigenvector {index}: best product-state overlap {overlap:.3}")]
    Labeling { index: usize, overlap: f64 },

    #[error("the |-1>,|+1> levels of center {center} are degenerate; spin labels are ill-posed at zero field")]
    DegenerateLevels { center: char },

    #[error("missing template parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("sweep point {index}: {source}")]
    AtSweepPoint { index: usize, source: Box<Error> },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("insufficient data: {found} entries, at least {required} required")]
    InsufficientData { found: usize, required: usize },

    #[error("geometry fit did not converge from any start (best chi-square {best_chi_square:e})")]
    NoConvergence { best_chi_square: f64 },

    #[error("ellipsoid covariance is not positive definite")]
    DegenerateEllipsoid,

    #[error("time grid is not uniform")]
    NonUniformGrid,

    #[error("cross-correlation is flat; displacement undefined")]
    FlatCorrelation,

    #[error("shot noise requested without a random source")]
    MissingRandomSource,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_point(index: usize, source: Error) -> Self {
        Error::AtSweepPoint {
            index,
            source: Box::new(source),
        }
    }
}
