use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid quantum numbers, projections or other out-of-domain physics input.
    #[error("domain error: {0}")]
    Domain(String),

    /// A steady state was requested for a transition that leaks population.
    #[error("steady state requested for open transition `{system}` (alpha_loss = {alpha_loss}); only the trivial empty state is stationary, use the integrated mode")]
    NotClosed { system: String, alpha_loss: f64 },

    /// The generator has more than one stationary state.
    #[error("steady state is not unique: generator null space has dimension {null_dim}")]
    Degenerate { null_dim: usize },

    /// The steady-state linear solve could not meet its residual target.
    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    /// Adaptive step size fell below the representable minimum.
    #[error("step size underflow at t = {t} (h = {h:e}); the problem is too stiff for the explicit integrator, reduce the Rabi frequency or use the steady-state path")]
    Stiffness { t: f64, h: f64 },

    /// The scan grid does not resolve the narrow resonance.
    #[error("grid too coarse: only {points} samples inside the detected half-width {half_width:e} (need at least {required})")]
    Resolution {
        points: usize,
        half_width: f64,
        required: usize,
    },

    /// A scan point failed; the offending field value is attached.
    #[error("scan point b_larmor = {b_larmor}: {source}")]
    ScanPoint {
        b_larmor: f64,
        #[source]
        source: Box<Error>,
    },

    /// Scenario text could not be parsed.
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A scenario value is outside its allowed range.
    #[error("config value out of range for `{key}`: {value} ({reason})")]
    Range {
        key: String,
        value: String,
        reason: String,
    },

    /// Structurally invalid scenario (missing or conflicting keys).
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
