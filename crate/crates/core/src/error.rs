//! Error type shared by every solver and check in this crate.
//!
//! Anything that can fail for a *reason the caller can act on* gets its own
//! variant with enough payload to diagnose the failure without re-running:
//! the stalled eigensolver carries its best iterate, the time stepper reports
//! the node and time where positivity broke, and precondition failures spell
//! out which contract was violated.

use crate::eigensolver::EigenPair;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Domain construction or combination was rejected (empty interior,
    /// non-positive spacing, over-erosion, mismatched grids, ...).
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// A scalar parameter is outside its admissible range. `name` is the
    /// parameter as the caller spelled it, so CLI errors can cite the key.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two objects that must live on the same grid (or share snapshot times)
    /// do not.
    #[error("mismatch: {0}")]
    Mismatch(String),

    /// A documented precondition of an operation was violated. These are
    /// contract errors, not numerical failures.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The projected descent exhausted its iteration budget before the
    /// stationarity residual dropped below `tol`. The best iterate seen so
    /// far is returned for diagnosis (its `residual` field holds the achieved
    /// value).
    #[error(
        "eigensolver stalled after {iterations} iterations: residual {residual:.3e} > tol {tol:.3e}"
    )]
    SolverStall {
        iterations: usize,
        residual: f64,
        tol: f64,
        best: Box<EigenPair>,
    },

    /// The explicit step drove the conserved variable below the clipping
    /// tolerance; the step size or the data are inconsistent.
    #[error("conserved variable went negative ({value:.3e}) at node {node}, t = {time:.6e}")]
    NegativeDensity { node: usize, time: f64, value: f64 },

    /// The semi-implicit fixed-point sweep failed to converge.
    #[error("semi-implicit sweep did not converge within {max_sweeps} sweeps at t = {time:.6e}")]
    SweepDiverged { time: f64, max_sweeps: usize },

    /// Filesystem failure while reading or writing an artifact.
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
