//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by grid operations, detection, blow-up and the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is the vanished (zero) metric; operation undefined")]
    VanishedMetric,

    #[error("grid too coarse: grid_n = {0} (need at least {1})")]
    GridTooCoarse(usize, usize),

    #[error("region is not contained in the metric's chart")]
    RegionOutOfChart,

    #[error("circle (center ({0}, {1}), radius {2}) leaves the chart or its stencil support")]
    CircleOutOfChart(f64, f64, f64),

    #[error("chart contains (or touches) the origin; inversion is singular")]
    OriginInDomain,

    #[error("iterative solver exceeded {0} iterations without reaching tolerance")]
    SolverDivergence(usize),

    #[error("metric is not rotationally symmetric about the requested center (deviation {0:.3e})")]
    NotRotationallySymmetric(f64),

    #[error("radius {0:.3e} is below the resolvable floor {1:.3e}")]
    RadiusUnresolvable(f64, f64),

    #[error("{found} accepted candidates exceed the count bound {bound}; tolerances are misconfigured")]
    CountBoundViolated { found: usize, bound: usize },

    #[error("no circle-length crossing of the filter above the resolvable radius")]
    NoCrossing,

    #[error("circle length {0:.6} at the outer neck radius exceeds the filter {1:.6}")]
    PreconditionLengthTooLarge(f64, f64),

    #[error("recentering window leaves the chart")]
    WindowOutOfChart,

    #[error("rescale window samples outside the source chart")]
    WindowExceedsSource,

    #[error("candidate has no measurable concentration at this filter")]
    NoConcentration,

    #[error("child {quantity} {child:.6} exceeds parent concentration {parent:.6} beyond tolerance")]
    BudgetViolated {
        quantity: &'static str,
        child: f64,
        parent: f64,
    },

    #[error("tree recursion exceeded max depth {0}")]
    DepthExceeded(usize),

    #[error("thin component circle length {len:.6} is not strictly below eps {eps:.6}")]
    ThinViolation { len: f64, eps: f64 },

    #[error("chart too small for the requested family: {0}")]
    ChartTooSmall(String),

    #[error("holomorphic factor has a critical point inside the chart (|f'| = {0:.3e} at ({1}, {2}))")]
    CriticalPointInChart(f64, f64, f64),

    #[error("generated frame has non-finite or oversized functionals: {0}")]
    GenerationInvariant(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("tree invariant violated: {0}")]
    TreeInvariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed sequence file: {0}")]
    BadSequenceFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
