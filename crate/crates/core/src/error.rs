use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {reason}")]
    UnparsableRow { row: usize, reason: String },
    #[error("duplicate timestamp at row {row}")]
    DuplicateTimestamp { row: usize },
    #[error("non-hourly cadence at row {row}: step of {hours} h")]
    NonHourlyCadence { row: usize, hours: f64 },
    #[error("gap at series boundary cannot be filled")]
    BoundaryGap,
    #[error("series contains {count} gap(s) and the gap policy is `fail`")]
    GapsPresent { count: usize },
    #[error("gap of {hours} h exceeds the {max} h interpolation limit")]
    GapTooLong { hours: usize, max: usize },
    #[error("invalid peak calendar: {0}")]
    InvalidCalendar(String),
    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("scale {scale} out of range [{lo}, {hi}]")]
    ScaleOutOfRange { scale: usize, lo: usize, hi: usize },
    #[error("insufficient boxes at scale {scale}: {boxes} < {min}")]
    InsufficientBoxes {
        scale: usize,
        boxes: usize,
        min: usize,
    },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("empty fit range after exclusions")]
    EmptyFitRange,
    #[error("candidate period {period} h outside (2, {max}) h")]
    PeriodOutOfRange { period: f64, max: f64 },
    #[error("no samples inside price range [{lo}, {hi}]")]
    EmptyPriceRange { lo: f64, hi: f64 },
    #[error("only {found} nonzero histogram bins in range, need at least {need}")]
    InsufficientBins { found: usize, need: usize },
    #[error("too few increment pairs: {found}, need at least {need}")]
    TooFewPairs { found: usize, need: usize },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
