//! Discrete differential operators and integral functionals on grid fields.
//!
//! Two discrete gradients coexist here, on purpose:
//!
//! - [`gradient`] is the node-centered stencil (centered differences at
//!   interior nodes). It is what pointwise quantities use — the flux in
//!   [`weak_residual`], jets in the verification module.
//! - Face gradients (two-point normal differences, four-point tangential
//!   averages) drive the conservative [`p_laplacian`] and the energy sums in
//!   [`rayleigh_quotient`]. The conservative pairing is what makes the
//!   discrete divergence theorem hold to rounding and makes the quotient
//!   second-order accurate: the face energy captures the near-boundary
//!   gradient mass that a node-centered interior sum misses at O(h).
//!
//! The face p-Laplacian is, in one dimension (and, for `p = 2`, in two), the
//! exact negative gradient of the face energy `sum_faces (g^2 + eps^2)^(p/2)
//! h^dim` — the eigensolver leans on that identity to drive its stationarity
//! residual to zero instead of plateauing at a cross-discretization floor.
//!
//! All integrals are node sums times `h^dim` over interior nodes, accumulated
//! in row-major order so repeated runs are bit-identical.

use crate::error::{Error, Result};
use crate::evolution::{EvolutionTrace, Scheme, TraceMeta};
use crate::field::{flux_coefficient, PExponent, Regularization, ScalarField, VectorField};
use crate::grid::{GridDomain, NodeKind};
use crate::num::{powf_fast, signed_pow};

/// Node-centered gradient: centered differences at every interior node
/// (both axis neighbors carry values by the domain invariant), zero
/// elsewhere. Exact on affine fields, O(h^2) on smooth ones.
pub fn gradient(f: &ScalarField) -> VectorField {
    let d = f.domain().clone();
    let vals = f.values();
    let h2 = 2.0 * d.h();
    let mut out = VectorField::zeros(&d);
    for iy in 0..d.shape()[1] {
        for ix in 0..d.shape()[0] {
            let idx = d.idx(ix, iy);
            if d.kind(idx) != NodeKind::Interior {
                continue;
            }
            // Interior nodes always have in-array, non-exterior axis
            // neighbors; the unwraps document that invariant.
            let xm = d.idx(ix - 1, iy);
            let xp = d.idx(ix + 1, iy);
            out.xs_mut()[idx] = (vals[xp] - vals[xm]) / h2;
            if d.dim() == 2 {
                let ym = d.idx(ix, iy - 1);
                let yp = d.idx(ix, iy + 1);
                out.ys_mut()[idx] = (vals[yp] - vals[ym]) / h2;
            }
        }
    }
    out
}

/// Centered tangential difference in y at node (ix, iy), if both y-neighbors
/// exist and carry values.
#[inline]
fn centered_y(d: &GridDomain, vals: &[f64], ix: usize, iy: usize) -> Option<f64> {
    if iy == 0 || iy + 1 >= d.shape()[1] {
        return None;
    }
    let lo = d.idx(ix, iy - 1);
    let hi = d.idx(ix, iy + 1);
    if d.kind(lo) == NodeKind::Exterior || d.kind(hi) == NodeKind::Exterior {
        return None;
    }
    Some((vals[hi] - vals[lo]) / (2.0 * d.h()))
}

/// Centered tangential difference in x at node (ix, iy), same contract as
/// [`centered_y`].
#[inline]
fn centered_x(d: &GridDomain, vals: &[f64], ix: usize, iy: usize) -> Option<f64> {
    if ix == 0 || ix + 1 >= d.shape()[0] {
        return None;
    }
    let lo = d.idx(ix - 1, iy);
    let hi = d.idx(ix + 1, iy);
    if d.kind(lo) == NodeKind::Exterior || d.kind(hi) == NodeKind::Exterior {
        return None;
    }
    Some((vals[hi] - vals[lo]) / (2.0 * d.h()))
}

/// Squared gradient magnitude at the x-face between (ix, iy) and (ix+1, iy):
/// two-point normal difference plus the average of the valid centered
/// tangential differences at the two endpoints. Returns (gn, |g|^2).
#[inline]
pub(crate) fn x_face_gradient(d: &GridDomain, vals: &[f64], ix: usize, iy: usize) -> (f64, f64) {
    let i0 = d.idx(ix, iy);
    let i1 = d.idx(ix + 1, iy);
    let gn = (vals[i1] - vals[i0]) / d.h();
    let mut gt = 0.0;
    if d.dim() == 2 {
        let a = centered_y(d, vals, ix, iy);
        let b = centered_y(d, vals, ix + 1, iy);
        gt = match (a, b) {
            (Some(x), Some(y)) => 0.5 * (x + y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => 0.0,
        };
    }
    (gn, gn * gn + gt * gt)
}

/// y-face analogue of [`x_face_gradient`], between (ix, iy) and (ix, iy+1).
#[inline]
pub(crate) fn y_face_gradient(d: &GridDomain, vals: &[f64], ix: usize, iy: usize) -> (f64, f64) {
    let i0 = d.idx(ix, iy);
    let i1 = d.idx(ix, iy + 1);
    let gn = (vals[i1] - vals[i0]) / d.h();
    let a = centered_x(d, vals, ix, iy);
    let b = centered_x(d, vals, ix, iy + 1);
    let gt = match (a, b) {
        (Some(x), Some(y)) => 0.5 * (x + y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => 0.0,
    };
    (gn, gn * gn + gt * gt)
}

/// Flux and coefficient at a face given its normal gradient and squared
/// magnitude: `((|g|^2 + eps^2)^((p-2)/2) * gn, (|g|^2 + eps^2)^((p-2)/2))`.
/// A perfectly flat face carries no flux for any p > 1 (the limit of
/// `|g|^(p-2) g`), but its coefficient is honestly infinite when p < 2 and
/// eps = 0 — step-size control must see that.
#[inline]
pub(crate) fn face_flux_and_coef(gn: f64, m2: f64, p: PExponent, eps: f64) -> (f64, f64) {
    if m2 == 0.0 && eps == 0.0 {
        let coef = if p.get() < 2.0 { f64::INFINITY } else { flux_coefficient(0.0, p, 0.0) };
        return (0.0, coef);
    }
    let coef = flux_coefficient(m2, p, eps);
    (coef * gn, coef)
}

/// Flux through a face; see [`face_flux_and_coef`].
#[inline]
fn face_flux(gn: f64, m2: f64, p: PExponent, eps: f64) -> f64 {
    face_flux_and_coef(gn, m2, p, eps).0
}

/// Conservative p-Laplacian into a preallocated buffer. `out` is zeroed and
/// its interior entries receive `div((|grad f|^2 + eps^2)^((p-2)/2) grad f)`.
/// Each face's flux is evaluated once per sweep direction, so the same face
/// seen from its two sides contributes bit-identical values and interior
/// face fluxes telescope exactly.
pub(crate) fn p_laplacian_into(
    d: &GridDomain,
    vals: &[f64],
    p: PExponent,
    eps: f64,
    out: &mut [f64],
) {
    debug_assert_eq!(vals.len(), d.len());
    debug_assert_eq!(out.len(), d.len());
    out.fill(0.0);
    let h = d.h();
    let [nx, ny] = d.shape();
    // x-direction sweep: walk each row once, carrying the previous face flux.
    for iy in 0..ny {
        let mut flux_left = 0.0;
        for ix in 0..nx {
            let idx = d.idx(ix, iy);
            let flux_right = if ix + 1 < nx
                && d.kind(idx) != NodeKind::Exterior
                && d.kind(d.idx(ix + 1, iy)) != NodeKind::Exterior
            {
                let (gn, m2) = x_face_gradient(d, vals, ix, iy);
                face_flux(gn, m2, p, eps)
            } else {
                0.0
            };
            if d.kind(idx) == NodeKind::Interior {
                out[idx] += (flux_right - flux_left) / h;
            }
            flux_left = flux_right;
        }
    }
    if d.dim() == 1 {
        return;
    }
    // y-direction sweep, column by column.
    for ix in 0..nx {
        let mut flux_down = 0.0;
        for iy in 0..ny {
            let idx = d.idx(ix, iy);
            let flux_up = if iy + 1 < ny
                && d.kind(idx) != NodeKind::Exterior
                && d.kind(d.idx(ix, iy + 1)) != NodeKind::Exterior
            {
                let (gn, m2) = y_face_gradient(d, vals, ix, iy);
                face_flux(gn, m2, p, eps)
            } else {
                0.0
            };
            if d.kind(idx) == NodeKind::Interior {
                out[idx] += (flux_up - flux_down) / h;
            }
            flux_down = flux_up;
        }
    }
}

/// Conservative p-Laplacian `div((|grad f|^2 + eps^2)^((p-2)/2) grad f)` at
/// interior nodes, zero at boundary and exterior nodes. At `p = 2`, `eps = 0`
/// this is exactly the classical 3/5-point Laplacian in conservative form.
pub fn p_laplacian(f: &ScalarField, p: PExponent, reg: Regularization) -> ScalarField {
    let mut out = ScalarField::zeros(f.domain());
    let d = f.domain().clone();
    p_laplacian_into(&d, f.values(), p, reg.eps, out.values_mut());
    out
}

/// Net outward flux through the faces separating interior from boundary
/// nodes, times `h^(dim-1)`. By conservation,
/// `sum_interior p_laplacian(f) * h^dim == boundary_flux(f)` to rounding —
/// the discrete divergence theorem.
pub fn boundary_flux(f: &ScalarField, p: PExponent, reg: Regularization) -> f64 {
    let d = f.domain();
    let vals = f.values();
    let h = d.h();
    let area = powf_fast(h, (d.dim() - 1) as f64);
    let [nx, ny] = d.shape();
    let mut total = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let idx = d.idx(ix, iy);
            if d.kind(idx) != NodeKind::Interior {
                continue;
            }
            // +x face outward if the right neighbor is boundary, and so on.
            if d.kind(d.idx(ix + 1, iy)) == NodeKind::Boundary {
                let (gn, m2) = x_face_gradient(d, vals, ix, iy);
                total += face_flux(gn, m2, p, reg.eps) * area;
            }
            if d.kind(d.idx(ix - 1, iy)) == NodeKind::Boundary {
                let (gn, m2) = x_face_gradient(d, vals, ix - 1, iy);
                total -= face_flux(gn, m2, p, reg.eps) * area;
            }
            if d.dim() == 2 {
                if d.kind(d.idx(ix, iy + 1)) == NodeKind::Boundary {
                    let (gn, m2) = y_face_gradient(d, vals, ix, iy);
                    total += face_flux(gn, m2, p, reg.eps) * area;
                }
                if d.kind(d.idx(ix, iy - 1)) == NodeKind::Boundary {
                    let (gn, m2) = y_face_gradient(d, vals, ix, iy - 1);
                    total -= face_flux(gn, m2, p, reg.eps) * area;
                }
            }
        }
    }
    total
}

/// `(sum_interior |f|^p h^dim)^(1/p)`.
pub fn lp_norm(f: &ScalarField, p: PExponent) -> f64 {
    let d = f.domain();
    let vals = f.values();
    let pe = p.get();
    let mut sum = 0.0;
    for idx in d.interior_indices() {
        sum += powf_fast(vals[idx].abs(), pe);
    }
    powf_fast(sum * d.cell_volume(), 1.0 / pe)
}

/// Coefficient-weighted face energy `sum_faces (|g|^2 + eps^2)^((p-2)/2)
/// g_n^2 h^dim`, summed over both face families. With `eps = 0` this is the
/// discrete Dirichlet p-energy (in the continuum limit,
/// `int |grad f|^(p-2) (f_x^2 + f_y^2) = int |grad f|^p`), and the face
/// p-Laplacian is its exact negative gradient in 1D and at p = 2.
/// Faces with at least one interior endpoint participate.
pub(crate) fn face_energy(d: &GridDomain, vals: &[f64], p: PExponent, eps: f64) -> f64 {
    let [nx, ny] = d.shape();
    let vol = d.cell_volume();
    let mut sum = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let idx = d.idx(ix, iy);
            let k0 = d.kind(idx);
            if k0 == NodeKind::Exterior {
                continue;
            }
            if ix + 1 < nx {
                let k1 = d.kind(d.idx(ix + 1, iy));
                if k1 != NodeKind::Exterior
                    && (k0 == NodeKind::Interior || k1 == NodeKind::Interior)
                {
                    let (gn, m2) = x_face_gradient(d, vals, ix, iy);
                    if m2 != 0.0 || eps != 0.0 {
                        sum += flux_coefficient(m2, p, eps) * gn * gn * vol;
                    }
                }
            }
            if d.dim() == 2 && iy + 1 < ny {
                let k1 = d.kind(d.idx(ix, iy + 1));
                if k1 != NodeKind::Exterior
                    && (k0 == NodeKind::Interior || k1 == NodeKind::Interior)
                {
                    let (gn, m2) = y_face_gradient(d, vals, ix, iy);
                    if m2 != 0.0 || eps != 0.0 {
                        sum += flux_coefficient(m2, p, eps) * gn * gn * vol;
                    }
                }
            }
        }
    }
    sum
}

/// Rayleigh quotient `sum |grad f|^p h^dim / sum |f|^p h^dim`, with the
/// gradient energy measured on faces (see [`face_energy`]) and the
/// denominator the same quadrature as [`lp_norm`]. Scale-invariant to
/// machine precision. Errors on the zero field (invalid candidate) and on
/// fields that do not vanish on the boundary.
pub fn rayleigh_quotient(f: &ScalarField, p: PExponent) -> Result<f64> {
    let sup = f.sup_abs();
    if !f.boundary_is_zero(1e-12 * sup.max(1.0)) {
        return Err(Error::Precondition(
            "Rayleigh quotient requires zero boundary values".into(),
        ));
    }
    let pe = p.get();
    let d = f.domain();
    let mut den = 0.0;
    for idx in d.interior_indices() {
        den += powf_fast(f.values()[idx].abs(), pe);
    }
    den *= d.cell_volume();
    if den == 0.0 {
        return Err(Error::Precondition(
            "Rayleigh quotient of the zero field is undefined".into(),
        ));
    }
    Ok(face_energy(d, f.values(), p, 0.0) / den)
}

/// Discrete `L^(p/(p-1))` norm over interior nodes of
/// `p_laplacian(f) + lambda |f|^(p-2) f` — the stationarity defect of the
/// Rayleigh quotient. Zero exactly when `f` solves the discrete extremal
/// equation with multiplier `lambda`.
pub fn euler_lagrange_residual(
    f: &ScalarField,
    lambda: f64,
    p: PExponent,
    reg: Regularization,
) -> f64 {
    let d = f.domain().clone();
    let mut lap = vec![0.0; d.len()];
    p_laplacian_into(&d, f.values(), p, reg.eps, &mut lap);
    let pe = p.get();
    let dual = pe / (pe - 1.0);
    let mut sum = 0.0;
    for idx in d.interior_indices() {
        let r = lap[idx] + lambda * signed_pow(f.values()[idx], pe - 1.0);
        sum += powf_fast(r.abs(), dual);
    }
    powf_fast(sum * d.cell_volume(), 1.0 / dual)
}

/// Space-time weak-form residual of a trace against a test function:
///
/// ```text
///     R(phi) = int int ( -v^(p-1) phi_t + |grad v|^(p-2) grad v . grad phi ) dx dt
/// ```
///
/// with trapezoidal time quadrature, node-sum space quadrature, the
/// node-centered gradient for both fields, and phi_t from centered (one-sided
/// at the ends) differences of the sampled test function. Sign convention:
/// `R >= 0` is supersolution behavior, `<= 0` subsolution, `~ 0` solution.
///
/// `phi` must be compactly supported: zero on boundary nodes at every
/// snapshot and identically zero at the first and last snapshot times
/// (otherwise uncontrolled boundary terms would corrupt the sign).
pub fn weak_residual(
    trace: &EvolutionTrace,
    p: PExponent,
    phi: &dyn Fn([f64; 2], f64) -> f64,
) -> Result<f64> {
    let n = trace.len();
    if n < 3 {
        return Err(Error::Precondition(format!(
            "weak residual needs at least 3 snapshots, got {n}"
        )));
    }
    let d = trace.domain().clone();
    let times = trace.times();

    // Sample the test function on every snapshot.
    let phis: Vec<ScalarField> = times
        .iter()
        .map(|&t| ScalarField::from_fn(&d, |x, y| phi([x, y], t)))
        .collect();

    // Compact support. The tolerance scales with the test function itself so
    // an overall rescaling of phi cannot flip the verdict.
    let scale: f64 = phis.iter().map(|f| f.sup_abs()).fold(0.0, f64::max);
    let tol = 1e-12 * (1.0 + scale);
    for (k, pf) in phis.iter().enumerate() {
        if !pf.boundary_is_zero(tol) {
            return Err(Error::Precondition(format!(
                "test function does not vanish on the boundary at t = {}",
                times[k]
            )));
        }
    }
    for (label, pf) in [("first", &phis[0]), ("last", &phis[n - 1])] {
        if pf.sup_abs() > tol {
            return Err(Error::Precondition(format!(
                "test function does not vanish at the {label} snapshot time"
            )));
        }
    }

    let pe = p.get();
    let vol = d.cell_volume();
    let mut total = 0.0;
    for k in 0..n {
        // Trapezoid weight, robust to nonuniform snapshot spacing.
        let t_lo = if k == 0 { times[0] } else { times[k - 1] };
        let t_hi = if k == n - 1 { times[n - 1] } else { times[k + 1] };
        let weight = 0.5 * (t_hi - t_lo);

        // phi_t by centered differences over the same snapshot grid.
        let (ka, kb) = if k == 0 {
            (0, 1)
        } else if k == n - 1 {
            (n - 2, n - 1)
        } else {
            (k - 1, k + 1)
        };
        let dt_span = times[kb] - times[ka];

        let v = trace.field(k);
        let gv = gradient(v);
        let gphi = gradient(&phis[k]);
        let mut space = 0.0;
        for idx in d.interior_indices() {
            let w = signed_pow(v.values()[idx], pe - 1.0);
            let phi_t = (phis[kb].values()[idx] - phis[ka].values()[idx]) / dt_span;
            let m2 = gv.magnitude_sq(idx);
            let coef = if m2 == 0.0 {
                0.0
            } else {
                powf_fast(m2, (pe - 2.0) / 2.0)
            };
            let fluxdot = coef * (gv.xs()[idx] * gphi.xs()[idx] + gv.ys()[idx] * gphi.ys()[idx]);
            space += -w * phi_t + fluxdot;
        }
        total += weight * space * vol;
    }
    Ok(total)
}

/// Piecewise-linear unit step of kink width `delta`: 0 for `s <= 0`,
/// `s/delta` on the ramp, 1 for `s >= delta`.
pub fn heaviside_approx(s: f64, delta: f64) -> f64 {
    assert!(delta > 0.0, "kink width must be positive");
    if s <= 0.0 {
        0.0
    } else if s >= delta {
        1.0
    } else {
        s / delta
    }
}

/// The primitive of [`heaviside_approx`] vanishing on the negative axis:
/// 0 for `s <= 0`, `s^2/(2 delta)` on the ramp, `s - delta/2` beyond it.
pub fn g_delta(s: f64, delta: f64) -> f64 {
    assert!(delta > 0.0, "kink width must be positive");
    if s <= 0.0 {
        0.0
    } else if s >= delta {
        s - delta / 2.0
    } else {
        s * s / (2.0 * delta)
    }
}

/// Backward-in-time sliding mean of a trace:
/// `out(x, t) = (1/window) int_{t-window}^{t} v(x, s) ds`, by trapezoidal
/// quadrature on the snapshot grid. Requires equally spaced snapshots and a
/// window that is a whole number of spacings; the output is restricted to
/// the times where the backward window fits.
pub fn steklov_average(trace: &EvolutionTrace, window: f64) -> Result<EvolutionTrace> {
    let times = trace.times();
    let n = times.len();
    if n < 2 {
        return Err(Error::Precondition(
            "Steklov average needs at least two snapshots".into(),
        ));
    }
    let span = times[n - 1] - times[0];
    if !(window > 0.0) || window >= span {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("window must lie in (0, span = {span}), got {window}"),
        });
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    for k in 1..n {
        let step = times[k] - times[k - 1];
        if (step - dt).abs() > 1e-9 * dt {
            return Err(Error::Precondition(format!(
                "snapshots are not equally spaced: step {} vs mean {}",
                step, dt
            )));
        }
    }
    let m = (window / dt).round() as usize;
    if m < 1 || (m as f64 * dt - window).abs() > 1e-9 * window.max(dt) {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!(
                "window {window} is not a whole number of snapshot spacings {dt}"
            ),
        });
    }

    let d = trace.domain().clone();
    let mut out_times = Vec::with_capacity(n - m);
    let mut out_fields = Vec::with_capacity(n - m);
    for k in m..n {
        let mut avg = ScalarField::zeros(&d);
        for j in (k - m)..=k {
            // Trapezoid: half weight at the window's ends.
            let w = if j == k - m || j == k { 0.5 } else { 1.0 };
            let src = trace.field(j).values();
            for (o, &s) in avg.values_mut().iter_mut().zip(src) {
                *o += w * s;
            }
        }
        let norm = dt / window;
        for o in avg.values_mut() {
            *o *= norm;
        }
        out_times.push(times[k]);
        out_fields.push(avg);
    }
    EvolutionTrace::from_snapshots(
        &d,
        trace.p(),
        out_times,
        out_fields,
        TraceMeta {
            scheme: Scheme::Derived,
            eps: trace.meta().eps,
            dt_mean: dt,
            steps: trace.meta().steps,
        },
    )
}
