use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("degree vector has {got} entries but the window holds {expected} vertices")]
    DegreeCount { expected: usize, got: usize },
    #[error("vertex {0} lies outside the window")]
    OutsideWindow(i64),
    #[error("self-loop at vertex {0}")]
    SelfLoop(i64),
    #[error("duplicate pair {{{0}, {1}}}")]
    DuplicatePair(i64, i64),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("tail mean undefined: the distribution has infinite mean")]
    TailMeanUndefined,
    #[error("no valid truncation: F lacks finite second moment")]
    NoValidTruncation,
    #[error("no even truncation level up to {0} satisfies the tail bound")]
    TruncationSearchExhausted(u32),
    #[error("invalid truncation level {0}: must be even and at least 2")]
    InvalidTruncation(u32),
    #[error("alpha must lie in (0, 1] for the cluster model, got {0}")]
    InvalidAlpha(f64),
    #[error("empty support: every vertex has degree 0")]
    EmptySupport,
    #[error("level {0} has no members")]
    EmptyLevel(u32),
    #[error("configuration has degree-0 vertices; strip zeros before running the cluster model")]
    NotZeroStripped,
    #[error(
        "lemma violation: cluster [{lo}, {hi}] has {bad} unmatched bad stubs but only {low} low vertices"
    )]
    LemmaViolation { lo: i64, hi: i64, bad: u64, low: u64 },
    #[error("window too small: no measurable vertices")]
    WindowTooSmall,
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A malformed distribution spec string, annotated with the 1-based column
/// where parsing failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub input: String,
    pub column: usize,
    pub message: String,
}

impl SpecError {
    pub(crate) fn new(input: &str, offset: usize, message: impl Into<String>) -> Self {
        SpecError {
            input: input.to_string(),
            column: offset + 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid distribution spec `{}` at column {}: {}",
            self.input, self.column, self.message
        )
    }
}

impl std::error::Error for SpecError {}
