use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin projection m = {0}; expected one of -1, 0, +1")]
    InvalidProjection(i32),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("cannot normalize a zero spin state")]
    ZeroNorm,

    #[error("pre- and post-selected states are orthogonal (|<post|pre>| = {overlap:e} < {tolerance:e}); weak value undefined")]
    OrthogonalPrePost { overlap: f64, tolerance: f64 },

    #[error("closed-form phi is singular at alpha = {alpha} rad")]
    SingularAlpha { alpha: f64 },

    #[error("branch state is at stage {found}, operation requires {expected}")]
    Stage {
        expected: &'static str,
        found: &'static str,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("probe {probe}: {source}")]
    Probe {
        probe: String,
        #[source]
        source: Box<Error>,
    },

    #[error("meter grid too small: shift {shift} plus 8 sigma margin exceeds grid half-extent {half_extent}")]
    GridTooSmall { shift: f64, half_extent: f64 },

    #[error("post-selection impossible (probability {probability:e})")]
    PostselectionImpossible { probability: f64 },
}

impl Error {
    /// True when the error reflects a physically impossible post-selection
    /// rather than a malformed input.
    pub fn is_physical(&self) -> bool {
        match self {
            Error::OrthogonalPrePost { .. } | Error::PostselectionImpossible { .. } => true,
            Error::Probe { source, .. } => source.is_physical(),
            _ => false,
        }
    }
}
