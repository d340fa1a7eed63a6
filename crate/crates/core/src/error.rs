use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("image is {width}x{height}, at least {min}x{min} required")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("image has zero intensity variance")]
    ZeroVariance,
    #[error("foreground covers {percent:.2}% of the image (minimum 5%)")]
    EmptyForeground { percent: f64 },
    #[error("orientation field has no valid pixels")]
    NoValidPixels,
    #[error("offset {offset} must be smaller than min(width, height) = {limit}")]
    OffsetTooLarge { offset: usize, limit: usize },
    #[error("descriptor is constant and cannot be normalized")]
    DegenerateDescriptor,
    #[error("invalid configuration `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },
    #[error("need at least {required} training samples, got {found}")]
    TooFewSamples { required: usize, found: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("template model hash {found} does not match database model {expected}")]
    ModelMismatch { expected: String, found: String },
    #[error("unknown subject `{0}`")]
    UnknownSubject(String),
    #[error("score set has no {0} scores")]
    EmptyScores(&'static str),
    #[error("invalid sensor profile `{name}`: {reason}")]
    InvalidProfile { name: String, reason: String },
}

impl Error {
    pub fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
