//! A finite-difference laboratory for the doubly nonlinear diffusion
//!
//! ```text
//!     d/dt (v^(p-1)) = div(|grad v|^(p-2) grad v),    1 < p < infinity,
//! ```
//!
//! on intervals and masked planar domains with zero Dirichlet data, and for
//! the companion eigenproblem
//!
//! ```text
//!     div(|grad u|^(p-2) grad u) + lambda |u|^(p-2) u = 0.
//! ```
//!
//! The equation is homogeneous — scalar multiples of solutions are again
//! solutions — which makes the pair special: `v(x, t) =
//! exp(-lambda t / (p-1)) u(x)` solves the evolution exactly, and nonnegative
//! solutions relax toward that separable form. The crate provides the pieces
//! to observe all of this numerically:
//!
//! - [`grid`]: interval and masked-rectangle domains with an
//!   interior/boundary/exterior node classification;
//! - [`operators`]: gradient, conservative p-Laplacian, norms, the Rayleigh
//!   quotient and its stationarity residual, and weak-form residuals of
//!   space-time fields;
//! - [`eigensolver`]: descent with exponent continuation for the first
//!   eigenpair, plus a domain-exhaustion study;
//! - [`evolution`]: explicit and semi-implicit marching of the conserved
//!   variable `w = v^(p-1)` with step-size control;
//! - [`verification`]: executable checks of the structural theory —
//!   comparison certificates, uniqueness cross-checks, large-time asymptotic
//!   profiles, pointwise (viscosity-style) audits;
//! - [`export`]: deterministic text output for traces and reports.
//!
//! Numerical conventions that hold crate-wide: fields live on the nodes of a
//! uniform lattice of spacing `h`; interior sums run in a fixed row-major
//! order so repeated runs are bit-identical; integrals are node sums times
//! `h^dim`.

pub mod eigensolver;
pub mod error;
pub mod export;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod num;
pub mod operators;
pub mod tolerances;
pub mod verification;

pub use eigensolver::{DescentOptions, EigenPair, ExhaustionRow};
pub use error::{Error, Result};
pub use evolution::{EvolutionTrace, Scheme, StepOptions, TraceMeta};
pub use field::{PExponent, Regularization, ScalarField, VectorField};
pub use grid::{GridDomain, NodeKind};
pub use verification::{
    AuditReport, ComparisonCertificate, ProfileReport, SpaceTimeBump, Violation,
};
