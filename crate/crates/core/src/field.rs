//! Fields over a grid domain, and the two parameter types every operator
//! carries: the diffusion exponent `p` and the regularization knobs.
//!
//! A [`ScalarField`] stores one `f64` per node of the bounding array and
//! shares its [`GridDomain`] through an `Arc` — an evolution trace holds
//! hundreds of snapshots of the same domain and cloning masks around would
//! dwarf the numerics. Exterior nodes always hold 0; boundary nodes usually
//! hold the Dirichlet value 0, but hand-built verification fixtures (e.g. a
//! solution shifted by a constant) are allowed to carry other values — the
//! solvers enforce the zero-boundary contract on their *inputs and outputs*,
//! not the container.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{GridDomain, NodeKind};
use crate::num::powf_fast;

/// The exponent of the diffusion nonlinearity. Valid range is `1 < p < oo`;
/// `p = 2` is linear diffusion, `p > 2` degenerate, `p < 2` singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<PExponent> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("exponent must satisfy 1 < p < infinity, got {p}"),
            });
        }
        Ok(PExponent(p))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Hoelder conjugate `p / (p - 1)`, the natural norm for stationarity
    /// residuals.
    #[inline]
    pub fn conjugate(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }

    #[inline]
    pub fn is_linear(self) -> bool {
        self.0 == 2.0
    }
}

/// Smoothing parameters.
///
/// `eps` regularizes the flux coefficient `(|grad v|^2 + eps^2)^((p-2)/2)`;
/// it matters for `p < 2`, where the raw coefficient blows up on flat
/// regions, and as a floor for degenerate (`p > 2`) step-size bounds.
/// `delta` is the kink width for the piecewise-linear unit step and its
/// primitive ([`crate::operators::heaviside_approx`],
/// [`crate::operators::g_delta`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub eps: f64,
    pub delta: f64,
}

impl Regularization {
    pub fn new(eps: f64, delta: f64) -> Result<Regularization> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("flux smoothing must be >= 0, got {eps}"),
            });
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("kink width must be > 0, got {delta}"),
            });
        }
        Ok(Regularization { eps, delta })
    }

    /// Problem-adapted default: no flux smoothing in the linear and
    /// degenerate ranges (the coefficient is already continuous there), one
    /// grid spacing of smoothing in the singular range `p < 2`, so the
    /// regularization vanishes under refinement. `delta` defaults to `h` for
    /// the same reason.
    pub fn for_problem(p: PExponent, h: f64) -> Regularization {
        let eps = if p.get() < 2.0 { h } else { 0.0 };
        Regularization { eps, delta: h }
    }
}

/// A scalar sample per grid node. See the module docs for the storage
/// conventions.
#[derive(Debug, Clone)]
pub struct ScalarField {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(domain: &Arc<GridDomain>) -> ScalarField {
        ScalarField {
            domain: Arc::clone(domain),
            values: vec![0.0; domain.len()],
        }
    }

    /// Sample `f(x, y)` at every interior *and* boundary node; exterior nodes
    /// stay 0. Use this for fixtures that need nonzero boundary data.
    pub fn from_fn(domain: &Arc<GridDomain>, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let mut out = ScalarField::zeros(domain);
        for idx in 0..domain.len() {
            if domain.kind(idx) != NodeKind::Exterior {
                let [x, y] = domain.coords(idx);
                out.values[idx] = f(x, y);
            }
        }
        out
    }

    /// Sample `f` at interior nodes only; boundary and exterior nodes hold 0.
    /// This is the right constructor for initial data of the zero-boundary
    /// problems.
    pub fn from_fn_interior(domain: &Arc<GridDomain>, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let mut out = ScalarField::zeros(domain);
        for idx in domain.interior_indices() {
            let [x, y] = domain.coords(idx);
            out.values[idx] = f(x, y);
        }
        out
    }

    pub fn from_values(domain: &Arc<GridDomain>, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != domain.len() {
            return Err(Error::Mismatch(format!(
                "value vector has {} entries, domain has {} nodes",
                values.len(),
                domain.len()
            )));
        }
        Ok(ScalarField {
            domain: Arc::clone(domain),
            values,
        })
    }

    #[inline]
    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// All values finite? Exterior nodes zero? Call after handing values_mut
    /// to numerical code you do not trust yet.
    pub fn validate(&self) -> Result<()> {
        for (idx, &v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Precondition(format!(
                    "field has non-finite value {v} at node {idx}"
                )));
            }
            if self.domain.kind(idx) == NodeKind::Exterior && v != 0.0 {
                return Err(Error::Precondition(format!(
                    "exterior node {idx} carries value {v}"
                )));
            }
        }
        Ok(())
    }

    /// True when every boundary node holds exactly the Dirichlet value 0
    /// (up to `tol` in absolute value).
    pub fn boundary_is_zero(&self, tol: f64) -> bool {
        (0..self.domain.len())
            .filter(|&i| self.domain.is_boundary(i))
            .all(|i| self.values[i].abs() <= tol)
    }

    /// New field scaled by `c` at every node.
    pub fn scaled(&self, c: f64) -> ScalarField {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= c;
        }
        out
    }

    /// Pointwise max with another field (same domain).
    pub fn max_with(&self, other: &ScalarField) -> ScalarField {
        debug_assert!(self.domain.same_layout(&other.domain));
        let mut out = self.clone();
        for (v, &o) in out.values.iter_mut().zip(&other.values) {
            *v = v.max(o);
        }
        out
    }

    /// Pointwise max with a constant on interior and boundary nodes.
    pub fn max_with_constant(&self, c: f64) -> ScalarField {
        let mut out = self.clone();
        for idx in 0..self.domain.len() {
            if self.domain.kind(idx) != NodeKind::Exterior {
                out.values[idx] = out.values[idx].max(c);
            }
        }
        out
    }

    /// Clamp negative values to zero (interior and boundary).
    pub fn clipped_nonnegative(&self) -> ScalarField {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        out
    }

    /// `sup |self - other|` over interior nodes.
    pub fn sup_diff(&self, other: &ScalarField) -> f64 {
        debug_assert!(self.domain.same_layout(&other.domain));
        let mut m = 0.0f64;
        for idx in self.domain.interior_indices() {
            m = m.max((self.values[idx] - other.values[idx]).abs());
        }
        m
    }

    /// `sup |v|` over interior nodes.
    pub fn sup_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for idx in self.domain.interior_indices() {
            m = m.max(self.values[idx].abs());
        }
        m
    }

    /// `min v` over interior nodes.
    pub fn min_interior(&self) -> f64 {
        let mut m = f64::INFINITY;
        for idx in self.domain.interior_indices() {
            m = m.min(self.values[idx]);
        }
        m
    }

    /// Raise every node value to the conserved-variable power `p - 1`
    /// (values are assumed nonnegative where this is used).
    pub fn to_conserved(&self, p: PExponent) -> ScalarField {
        let e = p.get() - 1.0;
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v = crate::num::signed_pow(*v, e);
        }
        out
    }
}

/// One `dim`-vector per node (zero outside the interior); produced by the
/// gradient stencil.
#[derive(Debug, Clone)]
pub struct VectorField {
    domain: Arc<GridDomain>,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl VectorField {
    pub fn zeros(domain: &Arc<GridDomain>) -> VectorField {
        VectorField {
            domain: Arc::clone(domain),
            xs: vec![0.0; domain.len()],
            ys: vec![0.0; domain.len()],
        }
    }

    #[inline]
    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    #[inline]
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    #[inline]
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    #[inline]
    pub fn xs_mut(&mut self) -> &mut [f64] {
        &mut self.xs
    }

    #[inline]
    pub fn ys_mut(&mut self) -> &mut [f64] {
        &mut self.ys
    }

    /// Euclidean magnitude at one node.
    #[inline]
    pub fn magnitude(&self, idx: usize) -> f64 {
        let gx = self.xs[idx];
        let gy = self.ys[idx];
        if self.domain.dim() == 1 {
            gx.abs()
        } else {
            (gx * gx + gy * gy).sqrt()
        }
    }

    /// `|g|^2` at one node, avoiding the square root.
    #[inline]
    pub fn magnitude_sq(&self, idx: usize) -> f64 {
        let gx = self.xs[idx];
        let gy = self.ys[idx];
        gx * gx + gy * gy
    }
}

/// `(s^2 + eps^2)^((p-2)/2)` — the flux coefficient evaluated on a squared
/// gradient magnitude. Kept here so the operator, the stepping kernel and the
/// step-size bound all share one definition.
#[inline]
pub fn flux_coefficient(gradient_sq: f64, p: PExponent, eps: f64) -> f64 {
    powf_fast(gradient_sq + eps * eps, (p.get() - 2.0) / 2.0)
}
