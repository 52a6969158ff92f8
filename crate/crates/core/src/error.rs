use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("audio clip is empty")]
    EmptyAudio,
    #[error("audio clip contains a non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("window length {window} does not fit in a clip of {len} samples")]
    WindowTooLong { window: usize, len: usize },
    #[error("window length must be even and positive, got {0}")]
    InvalidWindow(usize),
    #[error("sliding window {window} out of range 1..={len}")]
    SlidingWindowOutOfRange { window: usize, len: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sequence has zero variance")]
    ZeroVariance,
    #[error("curve needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("curve has zero length")]
    ZeroLengthCurve,
    #[error("all points coincide")]
    DuplicatePoints,
    #[error("weight map has no positive mass")]
    EmptyWeights,
    #[error("requested {requested} points but only {available} pixels carry weight")]
    TooManyPoints { requested: usize, available: usize },
    #[error("mesh is not watertight: edge ({0}, {1}) borders {2} faces")]
    NotWatertight(usize, usize, usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("dual graph has no perfect matching")]
    NoPerfectMatching,
    #[error("mesh is disconnected ({0} face cycles cannot be joined)")]
    DisconnectedMesh(usize),
    #[error("clips differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("carrier too short: {frames} SWS frames, need at least {needed}")]
    CarrierTooShort { frames: usize, needed: usize },
    #[error("missing evaluation sidecar")]
    MissingSidecar,
}
