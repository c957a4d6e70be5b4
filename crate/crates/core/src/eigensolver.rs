//! First extremal pairs of the discrete Rayleigh quotient, computed by
//! preconditioned projected descent on the face energy, plus the
//! domain-exhaustion study built on [`GridDomain::shrink_domain`].
//!
//! The solver minimizes `face energy / ||f||_p^p` over nonnegative fields
//! vanishing on the boundary. Two structural facts carry the design:
//!
//! - the conservative face-flux operator is the exact negative gradient of
//!   the regularized face energy in 1D (any `p`) and at `p = 2` in any
//!   dimension, so the stationarity residual genuinely reaches zero at the
//!   constrained minimizer there, instead of plateauing at a discretization
//!   mismatch;
//! - the product-sine bump is the exact discrete `p = 2` eigenvector on
//!   rectangles, which makes the linear stage (and every warm start derived
//!   from it) essentially free.
//!
//! For `p != 2` the solve walks a short exponent homotopy from 2 to the
//! target, warm-starting each stage; intermediate stages run at a relaxed
//! tolerance and are allowed to stall, only the final stage is binding. In
//! 2D with `p != 2` the gradient identity above is approximate (the
//! tangential coupling of the face coefficients is dropped), so the residual
//! can floor at a small `h`-dependent level; pick `tol` accordingly there.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{PExponent, Regularization, ScalarField};
use crate::grid::{GridDomain, NodeKind};
use crate::num::powf_fast;
use crate::operators::{
    euler_lagrange_residual, face_energy, face_flux_and_coef, lp_norm, p_laplacian_into,
    rayleigh_quotient, x_face_gradient, y_face_gradient,
};

/// A candidate first eigenpair of the Dirichlet p-Laplacian: the minimizer of
/// the Rayleigh quotient together with the quotient value at the minimizer.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Rayleigh quotient of `u` (so the pair is consistent by construction).
    pub lambda: f64,
    /// Normalized eigenfunction estimate, positive in the interior.
    pub u: ScalarField,
    /// Descent iterations actually spent (summed over continuation stages).
    pub iterations: usize,
    /// Stationarity residual at `u`, measured with the default
    /// regularization for the problem's exponent and grid.
    pub residual: f64,
}

/// Knobs for the descent loop.
#[derive(Debug, Clone)]
pub struct DescentOptions {
    /// Accept once the stationarity residual at the current quotient falls to
    /// this level.
    pub tol: f64,
    /// Iteration cap per continuation stage.
    pub max_iters: usize,
    /// Step shrink factor of the backtracking line search, in (0, 1).
    pub backtrack_factor: f64,
    /// Stages on the exponent path from 2 to the target (1 = no continuation).
    pub continuation_stages: usize,
    /// First trial step of the backtracking line search, in units of the
    /// current iterate's amplitude.
    pub initial_step: f64,
}

impl Default for DescentOptions {
    fn default() -> DescentOptions {
        DescentOptions {
            tol: 5e-3,
            max_iters: 40_000,
            backtrack_factor: 0.5,
            continuation_stages: 4,
            initial_step: 1.0,
        }
    }
}

impl DescentOptions {
    /// Reject out-of-range knobs with a pointer at the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: format!("residual target must be positive, got {}", self.tol),
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "iteration cap must be at least 1".into(),
            });
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidParameter {
                name: "backtrack_factor",
                reason: format!(
                    "line-search shrink factor must lie in (0, 1), got {}",
                    self.backtrack_factor
                ),
            });
        }
        if self.continuation_stages == 0 {
            return Err(Error::InvalidParameter {
                name: "continuation_stages",
                reason: "at least one exponent stage is required".into(),
            });
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return Err(Error::InvalidParameter {
                name: "initial_step",
                reason: format!("first trial step must be positive, got {}", self.initial_step),
            });
        }
        Ok(())
    }
}

/// `pi_p = 2 pi / (p sin(pi/p))`, the half-period of the p-sine: the first
/// Dirichlet eigenvalue of the 1D p-Laplacian on (0, L) is
/// `(p - 1) (pi_p / L)^p`. See [`interval_eigenvalue`].
pub fn pi_p(p: PExponent) -> f64 {
    let pe = p.get();
    2.0 * std::f64::consts::PI / (pe * (std::f64::consts::PI / pe).sin())
}

/// Closed-form first Dirichlet eigenvalue of the 1D p-Laplacian on an
/// interval of the given length: `(p - 1) * (pi_p / length)^p`.
pub fn interval_eigenvalue(p: PExponent, length: f64) -> f64 {
    (p.get() - 1.0) * powf_fast(pi_p(p) / length, p.get())
}

/// One row of an exhaustion study: the shrink depth, the eigenvalue of the
/// shrunken domain, and the largest constant `c` with `c * u_inner <= u_outer`
/// on the shrunken interior (both eigenfields at unit norm).
#[derive(Debug, Clone)]
pub struct ExhaustionRow {
    /// Erosion depth `j` in node layers.
    pub layers: usize,
    /// First eigenvalue of the eroded domain.
    pub lambda: f64,
    /// `min u_outer / u_inner` over the eroded interior, skipping nodes where
    /// the inner eigenfield is below 1e-12.
    pub containment: f64,
}

/// What one continuation stage hands back: the iterate is always usable as a
/// warm start even when the stage ran out of iterations or line-search
/// progress.
struct StageOutcome {
    u: ScalarField,
    iterations: usize,
    converged: bool,
}

/// Minimize the quotient at one fixed exponent from a warm start.
///
/// Each iteration: assemble the flux operator, measure the stationarity
/// residual at the current quotient (the public, unregularized quotient on
/// the binding stage — that is the certificate the caller checks), and stop
/// if it clears `tol`; otherwise step along the Jacobi-preconditioned
/// residual, clip negatives, renormalize, and accept by backtracking line
/// search on the (regularized) quotient.
fn descend_stage(
    d: &Arc<GridDomain>,
    p: PExponent,
    eps: f64,
    init: &ScalarField,
    tol: f64,
    opts: &DescentOptions,
    publish_quotient: bool,
    mut history: Option<&mut Vec<f64>>,
) -> Result<StageOutcome> {
    let pe = p.get();
    let dual = pe / (pe - 1.0);
    let vol = d.cell_volume();
    let h2 = d.h() * d.h();

    let mut u = init.clipped_nonnegative();
    let nrm = lp_norm(&u, p);
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::Precondition(
            "descent needs a nonnegative, nonzero initial iterate".into(),
        ));
    }
    scale_in_place(&mut u, 1.0 / nrm);

    let len = d.len();
    let mut lap = vec![0.0; len];
    let mut stiff = vec![0.0; len];
    let mut dir = vec![0.0; len];
    let mut trial = vec![0.0; len];
    let mut step = opts.initial_step;

    for iter in 0..=opts.max_iters {
        p_laplacian_into(d, u.values(), p, eps, &mut lap);
        let mut den = 0.0;
        for idx in d.interior_indices() {
            den += powf_fast(u.values()[idx], pe);
        }
        den *= vol;
        let (num, objective) = face_energies(d, u.values(), p, eps);
        let lambda_line = num / den;
        // The binding certificate is the residual at the unregularized
        // quotient; off the binding stage the line-search quotient is close
        // enough and saves a pass.
        let lambda_check = if publish_quotient && eps > 0.0 {
            face_energy(d, u.values(), p, 0.0) / den
        } else {
            lambda_line
        };
        let mut rsum = 0.0;
        for idx in d.interior_indices() {
            let r = lap[idx] + lambda_check * powf_fast(u.values()[idx], pe - 1.0);
            rsum += powf_fast(r.abs(), dual);
        }
        let residual = powf_fast(rsum * vol, 1.0 / dual);
        if let Some(hist) = history.as_deref_mut() {
            hist.push(objective);
        }
        if residual <= tol {
            return Ok(StageOutcome { u, iterations: iter, converged: true });
        }
        if iter == opts.max_iters {
            return Ok(StageOutcome { u, iterations: iter, converged: false });
        }

        // Jacobi preconditioner: the face-stiffness row sum plus the
        // zero-order curvature of the constraint term. The curvature factor
        // u^(p-2) is unbounded at u = 0 for p < 2, where the stiffness part
        // already carries the right scale (eps keeps it finite), so it only
        // enters for p > 2; the flat lambda keeps the diagonal positive at
        // degenerate nodes.
        stiffness_sums(d, u.values(), p, eps, &mut stiff);
        let mut dmax: f64 = 0.0;
        for idx in d.interior_indices() {
            let r = lap[idx] + lambda_line * powf_fast(u.values()[idx], pe - 1.0);
            let mut diag = (pe - 1.0) * stiff[idx] / h2 + lambda_line;
            if pe > 2.0 {
                diag += lambda_line * (pe - 1.0) * powf_fast(u.values()[idx], pe - 2.0);
            }
            dir[idx] = r / diag;
            dmax = dmax.max(dir[idx].abs());
        }
        if dmax == 0.0 {
            // Residual above tol but no usable direction: give the caller
            // the iterate and let the binding stage decide.
            return Ok(StageOutcome { u, iterations: iter, converged: false });
        }
        let scale = u.sup_abs() / dmax;

        let mut s = step;
        let mut accepted = false;
        let mut first_trial = true;
        while s > 1e-14 {
            trial.copy_from_slice(u.values());
            for idx in d.interior_indices() {
                let v = trial[idx] + s * scale * dir[idx];
                trial[idx] = if v > 0.0 { v } else { 0.0 };
            }
            let mut tden = 0.0;
            for idx in d.interior_indices() {
                tden += powf_fast(trial[idx], pe);
            }
            tden *= vol;
            if tden > 0.0 && tden.is_finite() {
                let tnrm = powf_fast(tden, 1.0 / pe);
                for v in trial.iter_mut() {
                    *v /= tnrm;
                }
                let (_, trial_objective) = face_energies(d, &trial, p, eps);
                if trial_objective < objective {
                    u.values_mut().copy_from_slice(&trial);
                    // Re-arm the step: grow after a clean first-try accept,
                    // keep the shrunken step otherwise.
                    step = if first_trial { (s * 2.0).min(1e3) } else { s };
                    accepted = true;
                    break;
                }
            }
            s *= opts.backtrack_factor;
            first_trial = false;
        }
        if !accepted {
            return Ok(StageOutcome { u, iterations: iter, converged: false });
        }
    }
    unreachable!("loop returns on the max_iters pass");
}

/// Scale a field in place (normalization sites stay one-liners).
fn scale_in_place(u: &mut ScalarField, c: f64) {
    for v in u.values_mut() {
        *v *= c;
    }
}

/// One pass over the faces touching the interior, returning
/// `(sum coef gn^2 vol, sum coef (gn^2 + eps^2) vol)` with
/// `coef = (m2 + eps^2)^((p-2)/2)`.
///
/// The first component is the quotient numerator (the multiplier scale); the
/// second is the regularized energy whose exact negative gradient the flux
/// operator is in 1D — and, up to a constant offset, at p = 2 — which makes
/// it the honest line-search objective. With `eps = 0` they coincide.
fn face_energies(d: &GridDomain, vals: &[f64], p: PExponent, eps: f64) -> (f64, f64) {
    let [nx, ny] = d.shape();
    let vol = d.cell_volume();
    let e2 = eps * eps;
    let mut num = 0.0;
    let mut full = 0.0;
    let mut tally = |gn: f64, m2: f64| {
        if m2 != 0.0 || eps != 0.0 {
            let (_, coef) = face_flux_and_coef(gn, m2, p, eps);
            num += coef * gn * gn * vol;
            full += coef * (gn * gn + e2) * vol;
        }
    };
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
                    tally(gn, m2);
                }
            }
            if d.dim() == 2 && iy + 1 < ny {
                let k1 = d.kind(d.idx(ix, iy + 1));
                if k1 != NodeKind::Exterior
                    && (k0 == NodeKind::Interior || k1 == NodeKind::Interior)
                {
                    let (gn, m2) = y_face_gradient(d, vals, ix, iy);
                    tally(gn, m2);
                }
            }
        }
    }
    (num, full)
}

/// Per-node sum of the regularized face-stiffness coefficients over adjacent
/// faces, for interior nodes (others stay zero). The caller divides by h^2.
fn stiffness_sums(d: &GridDomain, vals: &[f64], p: PExponent, eps: f64, out: &mut [f64]) {
    out.fill(0.0);
    let [nx, ny] = d.shape();
    for iy in 0..ny {
        for ix in 0..nx - 1 {
            face_stiffness(d, vals, p, eps, d.idx(ix, iy), d.idx(ix + 1, iy), true, ix, iy, out);
        }
    }
    if d.dim() == 2 {
        for iy in 0..ny - 1 {
            for ix in 0..nx {
                face_stiffness(d, vals, p, eps, d.idx(ix, iy), d.idx(ix, iy + 1), false, ix, iy, out);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn face_stiffness(
    d: &GridDomain,
    vals: &[f64],
    p: PExponent,
    eps: f64,
    a: usize,
    b: usize,
    x_face: bool,
    ix: usize,
    iy: usize,
    out: &mut [f64],
) {
    let ka = d.kind(a);
    let kb = d.kind(b);
    if ka == NodeKind::Exterior || kb == NodeKind::Exterior {
        return;
    }
    if ka != NodeKind::Interior && kb != NodeKind::Interior {
        return;
    }
    let (gn, m2) = if x_face {
        x_face_gradient(d, vals, ix, iy)
    } else {
        y_face_gradient(d, vals, ix, iy)
    };
    let (_, coef) = face_flux_and_coef(gn, m2, p, eps);
    if ka == NodeKind::Interior {
        out[a] += coef;
    }
    if kb == NodeKind::Interior {
        out[b] += coef;
    }
}

/// Positive product-sine bump over the node bounding box, zero outside the
/// interior. On rectangles this is the exact discrete eigenvector of the
/// linear problem, which is what makes it the canonical start.
fn sine_bump(d: &Arc<GridDomain>) -> ScalarField {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for idx in 0..d.len() {
        if d.kind(idx) == NodeKind::Exterior {
            continue;
        }
        let c = d.coords(idx);
        for axis in 0..2 {
            lo[axis] = lo[axis].min(c[axis]);
            hi[axis] = hi[axis].max(c[axis]);
        }
    }
    let pi = std::f64::consts::PI;
    ScalarField::from_fn_interior(d, move |x, y| {
        let fx = if hi[0] > lo[0] {
            (pi * (x - lo[0]) / (hi[0] - lo[0])).sin()
        } else {
            1.0
        };
        let fy = if hi[1] > lo[1] {
            (pi * (y - lo[1]) / (hi[1] - lo[1])).sin()
        } else {
            1.0
        };
        fx * fy
    })
}

/// Exponent path for the continuation: a single linear stage for `p = 2`,
/// otherwise 2 followed by `stages` evenly spaced exponents ending at `p`.
fn exponent_path(pe: f64, stages: usize) -> Vec<f64> {
    if pe == 2.0 {
        return vec![2.0];
    }
    let mut path = Vec::with_capacity(stages + 1);
    path.push(2.0);
    for k in 1..=stages {
        path.push(2.0 + (pe - 2.0) * k as f64 / stages as f64);
    }
    path
}

/// Compute the first eigenpair on `d`: projected descent on the face energy
/// over the unit `L^p` sphere, exponent continuation from the linear problem,
/// stopping when the stationarity residual at `lambda = rayleigh_quotient(u)`
/// clears `opts.tol`. The returned pair is renormalized exactly and carries
/// the public quotient, so its internal consistency invariants hold by
/// construction. Runs that exhaust `max_iters` (or stall in the line search)
/// on the binding stage return [`Error::SolverStall`] carrying the best
/// iterate.
pub fn solve_extremal(d: &Arc<GridDomain>, p: PExponent, opts: &DescentOptions) -> Result<EigenPair> {
    solve_impl(d, p, opts, None)
}

/// [`solve_extremal`], also reporting the line-search objective at every
/// accepted iterate of the binding stage — the Rayleigh quotient whenever no
/// gradient floor is active (`p >= 2`), the regularized face energy
/// otherwise. Nonincreasing by construction either way.
pub fn solve_extremal_with_history(
    d: &Arc<GridDomain>,
    p: PExponent,
    opts: &DescentOptions,
) -> Result<(EigenPair, Vec<f64>)> {
    let mut history = Vec::new();
    let pair = solve_impl(d, p, opts, Some(&mut history))?;
    Ok((pair, history))
}

fn solve_impl(
    d: &Arc<GridDomain>,
    p: PExponent,
    opts: &DescentOptions,
    mut history: Option<&mut Vec<f64>>,
) -> Result<EigenPair> {
    opts.validate()?;
    d.validate()?;
    let pe = p.get();
    let h = d.h();

    let path = exponent_path(pe, opts.continuation_stages);
    let last = path.len() - 1;
    let mut current = sine_bump(d);
    let mut total_iters = 0;
    let mut final_converged = false;
    for (si, &pk) in path.iter().enumerate() {
        let pk = PExponent::new(pk).expect("continuation exponents stay within (1, inf)");
        let eps_k = Regularization::for_problem(pk, h).eps;
        let binding = si == last;
        let tol_k = if binding { opts.tol } else { opts.tol * 10.0 };
        let out = descend_stage(
            d,
            pk,
            eps_k,
            &current,
            tol_k,
            opts,
            binding,
            if binding { history.as_deref_mut() } else { None },
        )?;
        total_iters += out.iterations;
        current = out.u;
        if binding {
            final_converged = out.converged;
        }
    }

    // Publish: exact unit norm, the unregularized quotient as lambda, and
    // the residual re-measured at that pair with the default regularization.
    let nrm = lp_norm(&current, p);
    scale_in_place(&mut current, 1.0 / nrm);
    let u = current;
    let lambda = rayleigh_quotient(&u, p)?;
    let reg = Regularization::for_problem(p, h);
    let residual = euler_lagrange_residual(&u, lambda, p, reg);
    let pair = EigenPair { lambda, u, iterations: total_iters, residual };
    if !final_converged && residual > opts.tol {
        return Err(Error::SolverStall {
            iterations: total_iters,
            residual,
            tol: opts.tol,
            best: Box::new(pair),
        });
    }
    Ok(pair)
}

/// Exhaustion study: for each erosion depth `j`, solve the extremal problem
/// on [`GridDomain::shrink_domain`]`(j)` and report its eigenvalue together
/// with the containment constant `c_j = min u / u_j` over the eroded
/// interior (nodes where `u_j <= 1e-12` are skipped; both fields carry unit
/// norm on their own domains). Erosion keeps the array layout, so the ratio
/// is a plain nodewise loop.
pub fn exhaustion_study(
    d: &Arc<GridDomain>,
    p: PExponent,
    layers: &[usize],
    opts: &DescentOptions,
) -> Result<Vec<ExhaustionRow>> {
    let base = solve_extremal(d, p, opts)?;
    let mut rows = Vec::with_capacity(layers.len());
    for &j in layers {
        let dj = Arc::new(d.shrink_domain(j)?);
        let inner = solve_extremal(&dj, p, opts)?;
        let mut c = f64::INFINITY;
        for idx in dj.interior_indices() {
            let uj = inner.u.values()[idx];
            if uj <= 1e-12 {
                continue;
            }
            c = c.min(base.u.values()[idx] / uj);
        }
        if !c.is_finite() {
            return Err(Error::Precondition(
                "inner eigenfield vanishes across the eroded interior".into(),
            ));
        }
        rows.push(ExhaustionRow { layers: j, lambda: inner.lambda, containment: c });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn interval(n: usize) -> Arc<GridDomain> {
        Arc::new(GridDomain::build_interval(0.0, 1.0, n).unwrap())
    }

    fn unit_square(n: usize) -> Arc<GridDomain> {
        Arc::new(
            GridDomain::build_masked(
                |x, y| x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0,
                [0.0, 1.0, 0.0, 1.0],
                n,
            )
            .unwrap(),
        )
    }

    fn assert_pair_invariants(pair: &EigenPair, p: PExponent) {
        assert!((lp_norm(&pair.u, p) - 1.0).abs() <= 1e-10, "unit norm");
        assert!(pair.u.values().iter().all(|&v| v >= 0.0), "nonnegative");
        assert!(pair.u.boundary_is_zero(0.0), "zero boundary");
        assert!(pair.u.min_interior() > 0.0, "interior positivity");
        let rq = rayleigh_quotient(&pair.u, p).unwrap();
        assert!(
            (rq - pair.lambda).abs() <= 1e-8 * pair.lambda,
            "quotient consistency: rq = {rq}, lambda = {}",
            pair.lambda
        );
    }

    /// Tanh-sinh quadrature of `2 int_0^1 (1 - s^p)^(-1/p) ds`. The change of
    /// variable concentrates nodes double-exponentially at the endpoints, so
    /// the integrable singularity at s = 1 costs nothing; this is a genuinely
    /// different route to pi_p than the closed form. The integrand is
    /// evaluated through `1 - s` directly (`1 - tanh(z) = e^{-2z}/(1+e^{-2z})`
    /// and `1 - s^p` via `expm1`/`log1p`), since forming `s` first loses the
    /// endpoint digits that the singular factor then amplifies.
    fn pi_p_by_quadrature(pe: f64) -> f64 {
        let hstep = 1.0 / 64.0;
        let mut sum = 0.0;
        for k in -500..=500 {
            let kh = k as f64 * hstep;
            let sh = (PI / 2.0) * kh.sinh();
            if sh.abs() > 350.0 {
                continue; // weight underflows well before this
            }
            let ch = sh.cosh();
            let w = (PI / 2.0) * kh.cosh() / (ch * ch);
            if !(w > 0.0) || !w.is_finite() {
                continue;
            }
            let em = (-2.0 * sh).exp();
            let one_minus_s = em / (1.0 + em);
            if one_minus_s <= 0.0 || one_minus_s >= 1.0 {
                continue;
            }
            let one_minus_sp = -(pe * (-one_minus_s).ln_1p()).exp_m1();
            if one_minus_sp <= 0.0 {
                continue;
            }
            let f = one_minus_sp.powf(-1.0 / pe);
            if f.is_finite() {
                sum += w * f * 0.5;
            }
        }
        2.0 * sum * hstep
    }

    #[test]
    fn closed_form_pi_p_agrees_with_the_quadrature() {
        for &(pe, frozen) in &[
            (1.5, 4.836798304624581),
            (2.0, PI),
            (3.0, 2.4183991523122905),
        ] {
            let p = PExponent::new(pe).unwrap();
            assert!((pi_p(p) - frozen).abs() < 1e-12, "closed form at p = {pe}");
            let quad = pi_p_by_quadrature(pe);
            assert!(
                (quad - frozen).abs() < 1e-6,
                "quadrature at p = {pe}: {quad} vs {frozen}"
            );
        }
    }

    #[test]
    fn interval_eigenvalue_frozen_values() {
        let cases = [
            (1.5, 5.318718076379172),
            (2.0, PI * PI),
            (3.0, 28.288761976002555),
        ];
        for (pe, lam) in cases {
            let p = PExponent::new(pe).unwrap();
            assert!((interval_eigenvalue(p, 1.0) - lam).abs() < 1e-9 * lam);
            // Length scaling: lambda(L) = lambda(1) / L^p.
            let halved = interval_eigenvalue(p, 0.5);
            assert!((halved - lam * powf_fast(2.0, pe)).abs() < 1e-9 * halved);
        }
    }

    #[test]
    fn linear_interval_pair_is_the_discrete_sine() {
        let d = interval(256);
        let p = PExponent::new(2.0).unwrap();
        let pair = solve_extremal(&d, p, &DescentOptions::default()).unwrap();
        assert!(
            (pair.lambda - PI * PI).abs() < 0.01 * PI * PI,
            "lambda = {}",
            pair.lambda
        );
        assert_pair_invariants(&pair, p);
        // The sine bump is the exact discrete eigenvector, so the solve is a
        // residual check, not a descent.
        assert!(pair.iterations <= 2, "iterations = {}", pair.iterations);
        let exact = ScalarField::from_fn_interior(&d, |x, _| SQRT_2 * (PI * x).sin());
        assert!(pair.u.sup_diff(&exact) <= 2e-2);
    }

    #[test]
    fn linear_square_eigenvalue_is_two_pi_squared() {
        let d = unit_square(64);
        let p = PExponent::new(2.0).unwrap();
        let pair = solve_extremal(&d, p, &DescentOptions::default()).unwrap();
        let target = 2.0 * PI * PI;
        assert!(
            (pair.lambda - target).abs() < 0.02 * target,
            "lambda = {}",
            pair.lambda
        );
        assert_pair_invariants(&pair, p);
    }

    #[test]
    fn linear_disk_eigenvalue_approaches_the_bessel_root() {
        // First Dirichlet eigenvalue of the unit disk: j_{0,1}^2, with the
        // staircase mask accurate only to O(h).
        let d = Arc::new(
            GridDomain::build_masked(
                |x, y| x * x + y * y < 1.0,
                [-1.0, 1.0, -1.0, 1.0],
                64,
            )
            .unwrap(),
        );
        let p = PExponent::new(2.0).unwrap();
        let pair = solve_extremal(&d, p, &DescentOptions::default()).unwrap();
        let target = 5.78318596294678; // j_{0,1}^2
        assert!(
            (pair.lambda - target).abs() < 0.08 * target,
            "lambda = {}",
            pair.lambda
        );
        assert_pair_invariants(&pair, p);
        assert!(pair.iterations > 2, "the disk is a genuine descent run");
    }

    #[test]
    fn nonlinear_interval_eigenvalues_match_the_closed_form() {
        for pe in [1.5, 3.0] {
            let d = interval(128);
            let p = PExponent::new(pe).unwrap();
            let pair = solve_extremal(&d, p, &DescentOptions::default()).unwrap();
            let target = interval_eigenvalue(p, 1.0);
            assert!(
                (pair.lambda - target).abs() < 0.02 * target,
                "p = {pe}: lambda = {} vs {target}",
                pair.lambda
            );
            assert_pair_invariants(&pair, p);
        }
    }

    #[test]
    fn quotient_history_is_nonincreasing() {
        let d = interval(64);
        let p = PExponent::new(3.0).unwrap();
        let (pair, history) =
            solve_extremal_with_history(&d, p, &DescentOptions::default()).unwrap();
        assert!(history.len() >= 2, "binding stage actually iterated");
        for w in history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
        }
        assert_pair_invariants(&pair, p);
    }

    #[test]
    fn scaling_law_on_the_stretched_interval() {
        // scale_domain(alpha) stretches lengths by 1/alpha, so the eigenvalue
        // drops by alpha^p.
        let p2 = PExponent::new(2.0).unwrap();
        let d = interval(128);
        let stretched = Arc::new(d.scale_domain(0.5).unwrap());
        let base = solve_extremal(&d, p2, &DescentOptions::default()).unwrap();
        let scaled = solve_extremal(&stretched, p2, &DescentOptions::default()).unwrap();
        let predicted = 0.25 * base.lambda;
        assert!((scaled.lambda - predicted).abs() < 0.01 * predicted);

        let p15 = PExponent::new(1.5).unwrap();
        let d = interval(64);
        let stretched = Arc::new(d.scale_domain(0.5).unwrap());
        let base = solve_extremal(&d, p15, &DescentOptions::default()).unwrap();
        let scaled = solve_extremal(&stretched, p15, &DescentOptions::default()).unwrap();
        let predicted = powf_fast(0.5, 1.5) * base.lambda;
        assert!(
            (scaled.lambda - predicted).abs() < 0.05 * predicted,
            "scaled = {}, predicted = {predicted}",
            scaled.lambda
        );
    }

    #[test]
    fn nested_domains_order_their_eigenvalues() {
        let d = interval(128);
        let p = PExponent::new(2.0).unwrap();
        let opts = DescentOptions::default();
        let outer = solve_extremal(&d, p, &opts).unwrap();
        let inner_domain = Arc::new(d.shrink_domain(8).unwrap());
        let inner = solve_extremal(&inner_domain, p, &opts).unwrap();
        assert!(inner.lambda >= outer.lambda - 2.0 * opts.tol);
    }

    #[test]
    fn exhaustion_tracks_the_shrunken_interval_eigenvalues() {
        let d = interval(256);
        let p = PExponent::new(2.0).unwrap();
        let layers = [16, 8, 4, 0];
        let rows = exhaustion_study(&d, p, &layers, &DescentOptions::default()).unwrap();
        let h = d.h();
        for row in &rows {
            let len = 1.0 - 2.0 * row.layers as f64 * h;
            let target = PI * PI / (len * len);
            assert!(
                (row.lambda - target).abs() < 0.02 * target,
                "j = {}: lambda = {} vs {target}",
                row.layers,
                row.lambda
            );
        }
        // Deeper erosion -> smaller domain -> larger eigenvalue, and the
        // containment constant climbs toward 1 as the erosion fades.
        for w in rows.windows(2) {
            assert!(w[0].lambda > w[1].lambda);
            assert!(w[0].containment < w[1].containment);
            assert!(w[0].containment > 0.0 && w[0].containment <= 1.0 + 1e-9);
        }
        let last = rows.last().unwrap();
        assert_eq!(last.layers, 0);
        assert!((last.containment - 1.0).abs() <= 1e-9, "identical solves");
        assert!((last.lambda - PI * PI).abs() < 0.01 * PI * PI);
    }

    #[test]
    fn stalled_solve_reports_its_best_iterate() {
        let d = interval(64);
        let p = PExponent::new(3.0).unwrap();
        let opts = DescentOptions {
            tol: 1e-13,
            max_iters: 2,
            ..DescentOptions::default()
        };
        match solve_extremal(&d, p, &opts) {
            Err(Error::SolverStall { best, residual, .. }) => {
                assert!((lp_norm(&best.u, p) - 1.0).abs() <= 1e-10);
                assert!(residual > opts.tol);
                let rq = rayleigh_quotient(&best.u, p).unwrap();
                assert!((rq - best.lambda).abs() <= 1e-8 * best.lambda);
            }
            other => panic!("expected a stall, got {other:?}"),
        }
    }

    #[test]
    fn descent_options_are_validated() {
        let d = interval(16);
        let p = PExponent::new(2.0).unwrap();
        let bad = [
            DescentOptions { tol: 0.0, ..DescentOptions::default() },
            DescentOptions { max_iters: 0, ..DescentOptions::default() },
            DescentOptions { backtrack_factor: 1.0, ..DescentOptions::default() },
            DescentOptions { backtrack_factor: 0.0, ..DescentOptions::default() },
            DescentOptions { continuation_stages: 0, ..DescentOptions::default() },
            DescentOptions { initial_step: -1.0, ..DescentOptions::default() },
        ];
        for opts in bad {
            assert!(matches!(
                solve_extremal(&d, p, &opts),
                Err(Error::InvalidParameter { .. })
            ));
        }
    }
}
