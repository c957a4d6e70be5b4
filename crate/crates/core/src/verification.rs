//! Executable checks over evolution traces: comparison certificates,
//! nodewise ordering audits, cross-scheme uniqueness audits, separable
//! sandwiching, large-time profile extraction, pointwise viscosity-style
//! audits, and weak-form subsolution batteries.
//!
//! Every check returns either a typed certificate or an [`AuditReport`] and
//! never panics on failing data: a failed property is a result, a broken
//! fixture (mismatched grids, missing hypotheses) is an error. Tolerances
//! come from [`crate::tolerances`] and scale with the discretization, so a
//! refinement study can assert both the defect and its ceiling shrink.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionTrace, Scheme, StepOptions, TraceMeta};
use crate::field::{PExponent, ScalarField};
use crate::grid::{GridDomain, NodeKind};
use crate::num::powf_fast;
use crate::operators::weak_residual;
use crate::tolerances::{
    ASYM_GROWTH_SLACK, CERT_ABS, CERT_REL, C_COMPARISON, C_UNIQUENESS, C_VISC, ESS_INF_FLOOR,
    TOL_ASYM, TOL_WEAK, VISC_REJECT, VISC_SKIP,
};
use crate::eigensolver::EigenPair;
use crate::num::signed_pow;

/// One audited point that fell below the tolerance.
#[derive(Debug, Clone)]
pub struct Violation {
    /// Node index (or battery index for test-function checks).
    pub node: usize,
    /// Snapshot time (or test-function center time).
    pub time: f64,
    /// The failing margin; compare against `-tolerance`.
    pub margin: f64,
}

/// Outcome of a pointwise audit: every checked point carries a signed margin
/// that must stay above `-tolerance`; `passed` holds exactly when no point
/// fell below.
#[derive(Debug, Clone)]
pub struct AuditReport {
    /// Number of (node, time) pairs — or test functions — actually audited.
    pub checked_points: usize,
    /// Points below `-tolerance`, in audit order.
    pub violations: Vec<Violation>,
    /// Smallest margin seen (`+inf` when nothing was audited).
    pub worst_margin: f64,
    /// `violations.is_empty()`, i.e. `worst_margin >= -tolerance`.
    pub passed: bool,
    /// The additive tolerance the margins were held to.
    pub tolerance: f64,
}

/// Accumulator for audit loops; `finish` seals the pass/fail invariant.
struct Audit {
    tolerance: f64,
    checked: usize,
    worst: f64,
    violations: Vec<Violation>,
}

impl Audit {
    fn new(tolerance: f64) -> Audit {
        Audit { tolerance, checked: 0, worst: f64::INFINITY, violations: Vec::new() }
    }

    fn point(&mut self, node: usize, time: f64, margin: f64) {
        self.checked += 1;
        self.worst = self.worst.min(margin);
        // NaN margins count as violations rather than vanishing in a
        // comparison that is false both ways.
        if !(margin >= -self.tolerance) {
            self.violations.push(Violation { node, time, margin });
        }
    }

    fn finish(self) -> AuditReport {
        AuditReport {
            checked_points: self.checked,
            passed: self.violations.is_empty(),
            violations: self.violations,
            worst_margin: self.worst,
            tolerance: self.tolerance,
        }
    }
}

/// Time series of the ordering defect integral
/// `I(t) = sum_interior (u^(p-1) - (beta v)^(p-1))^+ h^dim` between two
/// traces. For weak solutions the theorem behind it makes `I` nonincreasing
/// for every `beta > 1`; discrete runs may tick upward at rounding scale,
/// which is what `max_uptick` records.
#[derive(Debug, Clone)]
pub struct ComparisonCertificate {
    /// The margin parameter, strictly above 1.
    pub beta: f64,
    /// Snapshot times the integral was evaluated at.
    pub times: Vec<f64>,
    /// `I(t)` per snapshot; nonnegative by construction.
    pub values: Vec<f64>,
    /// Largest `I(t_{k+1}) - I(t_k)`; negative when strictly decreasing.
    pub max_uptick: f64,
}

impl ComparisonCertificate {
    /// Uptick ceiling this certificate is held to:
    /// `CERT_REL * I(t_0) + CERT_ABS`.
    pub fn tolerance(&self) -> f64 {
        CERT_REL * self.values[0] + CERT_ABS
    }

    /// Monotonicity verdict at the default tolerance.
    pub fn passed(&self) -> bool {
        self.max_uptick <= self.tolerance()
    }
}

/// Mean spacing the scheme actually stepped at; falls back to snapshot
/// spacing for sampled traces (which have no step history).
fn effective_dt(trace: &EvolutionTrace) -> f64 {
    let meta = trace.meta();
    if meta.dt_mean > 0.0 {
        return meta.dt_mean;
    }
    let ts = trace.times();
    if ts.len() < 2 {
        return 0.0;
    }
    (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64
}

/// Structural compatibility for pointwise cross-trace audits: same layout,
/// same exponent, identical snapshot times.
fn require_matched(a: &EvolutionTrace, b: &EvolutionTrace, p: PExponent) -> Result<()> {
    if !a.domain().same_layout(b.domain()) {
        return Err(Error::Mismatch(
            "traces live on different domain layouts".into(),
        ));
    }
    if a.p().get() != p.get() || b.p().get() != p.get() {
        return Err(Error::Mismatch(
            "traces carry a different exponent than the check".into(),
        ));
    }
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "snapshot counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    for (ta, tb) in a.times().iter().zip(b.times()) {
        if (ta - tb).abs() > 1e-12 * (1.0 + ta.abs()) {
            return Err(Error::Mismatch(format!(
                "snapshot times do not match: {ta} vs {tb}"
            )));
        }
    }
    Ok(())
}

/// Evaluate the ordering-defect certificate between two traces at margin
/// `beta`. Errors on structural mismatch, on `beta <= 1`, and when the
/// majorant trace loses strict interior positivity (the hypothesis the
/// underlying monotonicity statement needs; deliberately degenerate fixtures
/// are negative controls, not failed certificates).
pub fn comparison_certificate(
    u_trace: &EvolutionTrace,
    v_trace: &EvolutionTrace,
    beta: f64,
    p: PExponent,
) -> Result<ComparisonCertificate> {
    require_matched(u_trace, v_trace, p)?;
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("certificate margin must exceed 1, got {beta}"),
        });
    }
    if u_trace.len() < 2 {
        return Err(Error::Precondition(
            "certificate needs at least 2 snapshots".into(),
        ));
    }
    for f in v_trace.fields() {
        if !(f.min_interior() > ESS_INF_FLOOR) {
            return Err(Error::Precondition(
                "majorant trace must stay strictly positive on the interior".into(),
            ));
        }
    }
    let d = u_trace.domain();
    let vol = d.cell_volume();
    let pe = p.get();
    let mut values = Vec::with_capacity(u_trace.len());
    for k in 0..u_trace.len() {
        let u = u_trace.field(k).values();
        let v = v_trace.field(k).values();
        let mut sum = 0.0;
        for idx in d.interior_indices() {
            let defect = signed_pow(u[idx], pe - 1.0) - signed_pow(beta * v[idx], pe - 1.0);
            if defect > 0.0 {
                sum += defect;
            }
        }
        values.push(sum * vol);
    }
    let max_uptick = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonCertificate {
        beta,
        times: u_trace.times().to_vec(),
        values,
        max_uptick,
    })
}

/// Zero lateral boundary values, required by the ordering checks.
fn require_zero_boundary(trace: &EvolutionTrace, which: &str) -> Result<()> {
    for f in trace.fields() {
        if !f.boundary_is_zero(1e-12 * (1.0 + f.sup_abs())) {
            return Err(Error::Precondition(format!(
                "{which} trace must vanish on the lateral boundary"
            )));
        }
    }
    Ok(())
}

/// Nodewise ordering audit `u <= v + tol` at every matched snapshot, with
/// `tol = C_COMPARISON * (h + dt)`.
///
/// The initial-data ordering is audited like every other snapshot rather
/// than rejected up front: a deliberately reversed pair produces a failing
/// report naming its violations — the useful diagnostic — while structural
/// problems (layouts, times, boundary values) stay hard errors.
pub fn check_comparison(
    u_trace: &EvolutionTrace,
    v_trace: &EvolutionTrace,
    p: PExponent,
) -> Result<AuditReport> {
    require_matched(u_trace, v_trace, p)?;
    require_zero_boundary(u_trace, "minorant")?;
    require_zero_boundary(v_trace, "majorant")?;
    let d = u_trace.domain();
    let dt = effective_dt(u_trace).max(effective_dt(v_trace));
    let mut audit = Audit::new(C_COMPARISON * (d.h() + dt));
    for k in 0..u_trace.len() {
        let t = u_trace.times()[k];
        let u = u_trace.field(k).values();
        let v = v_trace.field(k).values();
        for idx in d.interior_indices() {
            audit.point(idx, t, v[idx] - u[idx]);
        }
    }
    Ok(audit.finish())
}

/// Cross-scheme agreement audit on a star-shaped domain: the same data are
/// evolved with the explicit scheme at two step safeties and with the
/// semi-implicit scheme, all landing on the same snapshot times, and every
/// pair must agree within `C_UNIQUENESS * (h + dt_coarse)`.
pub fn uniqueness_check(
    d: &Arc<GridDomain>,
    p: PExponent,
    g: &ScalarField,
    t_end: f64,
) -> Result<AuditReport> {
    if d.star_center().is_none() {
        return Err(Error::Precondition(
            "uniqueness audit needs a star-shaped domain".into(),
        ));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: format!("horizon must be positive, got {t_end}"),
        });
    }
    let forced: Vec<f64> = (1..=4).map(|k| t_end * k as f64 / 4.0).collect();
    let run = |scheme: Scheme, cfl: f64| -> Result<EvolutionTrace> {
        let opts = StepOptions {
            scheme,
            cfl_safety: cfl,
            snapshot_stride: usize::MAX,
            snapshot_times: forced.clone(),
            ..StepOptions::defaults(p, d.h())
        };
        evolve(d, p, g, t_end, &opts)
    };
    let coarse = run(Scheme::Explicit, 0.5)?;
    let fine = run(Scheme::Explicit, 0.25)?;
    let semi = run(Scheme::SemiImplicit, 1.0)?;

    let tol = C_UNIQUENESS * (d.h() + effective_dt(&coarse));
    let mut audit = Audit::new(tol);
    for (a, b) in [(&coarse, &fine), (&coarse, &semi), (&fine, &semi)] {
        require_matched(a, b, p)?;
        for k in 0..a.len() {
            let t = a.times()[k];
            let fa = a.field(k).values();
            let fb = b.field(k).values();
            for idx in d.interior_indices() {
                audit.point(idx, t, -(fa[idx] - fb[idx]).abs());
            }
        }
    }
    Ok(audit.finish())
}

/// Separable envelope audit: `v(.,t) <= e^(-lambda_hi t/(p-1)) u_hi + tol`
/// at every snapshot, and symmetrically from below when `pair_lo` is given.
/// The initial data must already sit inside the envelope — that is the
/// hypothesis, so leaving it is an error, not a failed audit.
pub fn sandwich_check(
    trace: &EvolutionTrace,
    pair_hi: &EigenPair,
    pair_lo: Option<&EigenPair>,
    p: PExponent,
) -> Result<AuditReport> {
    if trace.p().get() != p.get() {
        return Err(Error::Mismatch(
            "trace carries a different exponent than the check".into(),
        ));
    }
    let d = trace.domain();
    if !d.same_layout(pair_hi.u.domain()) {
        return Err(Error::Mismatch(
            "upper eigenfield lives on a different domain layout".into(),
        ));
    }
    if let Some(lo) = pair_lo {
        if !d.same_layout(lo.u.domain()) {
            return Err(Error::Mismatch(
                "lower eigenfield lives on a different domain layout".into(),
            ));
        }
    }
    let g = trace.field(0);
    let slack = 1e-12 * (1.0 + g.sup_abs());
    for idx in d.interior_indices() {
        if g.values()[idx] > pair_hi.u.values()[idx] + slack {
            return Err(Error::Precondition(
                "initial data exceed the upper eigenfield".into(),
            ));
        }
        if let Some(lo) = pair_lo {
            if g.values()[idx] < lo.u.values()[idx] - slack {
                return Err(Error::Precondition(
                    "initial data fall below the lower eigenfield".into(),
                ));
            }
        }
    }

    let pe = p.get();
    let tol = C_COMPARISON * (d.h() + effective_dt(trace));
    let mut audit = Audit::new(tol);
    for k in 0..trace.len() {
        let t = trace.times()[k];
        let v = trace.field(k).values();
        let decay_hi = (-pair_hi.lambda * t / (pe - 1.0)).exp();
        let decay_lo = pair_lo.map(|lo| (-lo.lambda * t / (pe - 1.0)).exp());
        for idx in d.interior_indices() {
            audit.point(idx, t, decay_hi * pair_hi.u.values()[idx] - v[idx]);
            if let (Some(lo), Some(el)) = (pair_lo, decay_lo) {
                audit.point(idx, t, v[idx] - el * lo.u.values()[idx]);
            }
        }
    }
    Ok(audit.finish())
}

/// Convergence record for [`asymptotic_profile`]: sup-norm Cauchy increments
/// between consecutive rescaled tail snapshots.
#[derive(Debug, Clone)]
pub struct ProfileReport {
    /// Tail snapshot times the increments connect.
    pub times: Vec<f64>,
    /// `sup |rescaled_{k+1} - rescaled_k|` per consecutive tail pair.
    pub increments: Vec<f64>,
    /// Increments nonincreasing (within [`ASYM_GROWTH_SLACK`]) and the last
    /// one at or below `tolerance`.
    pub converged: bool,
    /// The increment ceiling applied ([`TOL_ASYM`]).
    pub tolerance: f64,
}

/// Rescale the tail of a decaying trace by `e^(lambda t/(p-1))` and measure
/// whether the rescaled snapshots form a Cauchy sequence in sup norm.
/// Returns the final rescaled profile together with the increment record.
pub fn asymptotic_profile(
    trace: &EvolutionTrace,
    lambda: f64,
    p: PExponent,
    t_tail: f64,
) -> Result<(ScalarField, ProfileReport)> {
    if trace.p().get() != p.get() {
        return Err(Error::Mismatch(
            "trace carries a different exponent than the check".into(),
        ));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("rescaling rate must be positive, got {lambda}"),
        });
    }
    let pe = p.get();
    let tail: Vec<usize> = (0..trace.len())
        .filter(|&k| trace.times()[k] >= t_tail - 1e-12)
        .collect();
    if tail.len() < 3 {
        return Err(Error::Precondition(format!(
            "profile extraction needs at least 3 snapshots past t = {t_tail}, found {}",
            tail.len()
        )));
    }
    let rescaled: Vec<ScalarField> = tail
        .iter()
        .map(|&k| {
            let t = trace.times()[k];
            trace.field(k).scaled((lambda * t / (pe - 1.0)).exp())
        })
        .collect();
    let increments: Vec<f64> = rescaled
        .windows(2)
        .map(|w| w[1].sup_diff(&w[0]))
        .collect();
    let mut monotone = true;
    for w in increments.windows(2) {
        if w[1] > w[0] * ASYM_GROWTH_SLACK + 1e-15 {
            monotone = false;
        }
    }
    let last = *increments.last().expect("at least two tail snapshots");
    let report = ProfileReport {
        times: tail.iter().map(|&k| trace.times()[k]).collect(),
        increments,
        converged: monotone && last <= TOL_ASYM,
        tolerance: TOL_ASYM,
    };
    let profile = rescaled.into_iter().last().expect("nonempty tail");
    Ok((profile, report))
}

/// Pointwise audit of the equation in viscosity style, for `p >= 2`: at each
/// interior space-time node, build the local second-order jet (centered
/// differences in space, a centered three-point derivative in time), gate it
/// by how well a quadratic actually fits the stencil, and where it fits,
/// compare `(p-1) v^(p-2) v_t` against the jet's p-Laplacian as a relative
/// defect. Nodes where `v = 0` at a local minimum get the one-sided check
/// with a vanishing-gradient requirement instead. Stencils a quadratic
/// cannot fit at all (far beyond discretization scale) are reported as
/// violations so corrupted data cannot hide in the resolvability gate.
pub fn viscosity_audit(trace: &EvolutionTrace, p: PExponent) -> Result<AuditReport> {
    let pe = p.get();
    if pe < 2.0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("the viscosity audit covers p >= 2 only, got {pe}"),
        });
    }
    if trace.p().get() != pe {
        return Err(Error::Mismatch(
            "trace carries a different exponent than the check".into(),
        ));
    }
    if trace.len() < 3 {
        return Err(Error::Precondition(
            "viscosity audit needs at least 3 snapshots for the time jet".into(),
        ));
    }
    let d = trace.domain();
    let h = d.h();
    let [nx, _ny] = d.shape();
    let dt_snap = effective_dt(trace);
    let tol = C_VISC * (h * h + dt_snap * dt_snap);
    let mut audit = Audit::new(tol);

    for k in 1..trace.len() - 1 {
        let t0 = trace.times()[k];
        let a = trace.times()[k + 1] - t0;
        let b = t0 - trace.times()[k - 1];
        let vm = trace.field(k - 1).values();
        let v0 = trace.field(k).values();
        let vp = trace.field(k + 1).values();
        for idx in d.interior_indices() {
            let (ix, _) = d.ixy(idx);
            // Centered time derivative, exact for quadratics even on
            // nonuniform spacing.
            let vt = (b * b * vp[idx] + (a * a - b * b) * v0[idx] - a * a * vm[idx])
                / (a * b * (a + b));

            let c = v0[idx];
            let e = v0[idx + 1];
            let w = v0[idx - 1];
            let gx = (e - w) / (2.0 * h);
            let dxx = (e - 2.0 * c + w) / (h * h);
            let (gy, dyy, dxy, corners) = if d.dim() == 2 {
                let n_ = v0[idx + nx];
                let s = v0[idx - nx];
                let corner_kinds = [
                    d.kind(idx + nx + 1),
                    d.kind(idx + nx - 1),
                    d.kind(idx - nx + 1),
                    d.kind(idx - nx - 1),
                ];
                if corner_kinds.contains(&NodeKind::Exterior) {
                    continue; // jet incomplete at mask corners; not audited
                }
                let gy = (n_ - s) / (2.0 * h);
                let dyy = (n_ - 2.0 * c + s) / (h * h);
                let dxy = (v0[idx + nx + 1] - v0[idx + nx - 1] - v0[idx - nx + 1]
                    + v0[idx - nx - 1])
                    / (4.0 * h * h);
                (gy, dyy, dxy, Some([idx + nx + 1, idx + nx - 1, idx - nx + 1, idx - nx - 1]))
            } else {
                (0.0, 0.0, 0.0, None)
            };

            // Resolvability: how far the quadratic jet misses the stencil
            // points it did not interpolate, relative to the stencil spread.
            let theta = match corners {
                Some(cs) => {
                    let mut spread_lo = c;
                    let mut spread_hi = c;
                    for &q in &[e, w, v0[idx + nx], v0[idx - nx], v0[cs[0]], v0[cs[1]], v0[cs[2]], v0[cs[3]]] {
                        spread_lo = spread_lo.min(q);
                        spread_hi = spread_hi.max(q);
                    }
                    let mut dev: f64 = 0.0;
                    for (sx, sy, q) in [
                        (1.0, 1.0, v0[cs[0]]),
                        (-1.0, 1.0, v0[cs[1]]),
                        (1.0, -1.0, v0[cs[2]]),
                        (-1.0, -1.0, v0[cs[3]]),
                    ] {
                        let pred = c
                            + gx * sx * h
                            + gy * sy * h
                            + 0.5 * (dxx + dyy) * h * h
                            + dxy * sx * sy * h * h;
                        dev = dev.max((pred - q).abs());
                    }
                    dev / (spread_hi - spread_lo + 1e-300)
                }
                None => {
                    let far_ok = ix >= 2
                        && ix + 2 < nx
                        && d.kind(idx - 2) != NodeKind::Exterior
                        && d.kind(idx + 2) != NodeKind::Exterior;
                    if far_ok {
                        let e2 = v0[idx + 2];
                        let w2 = v0[idx - 2];
                        let spread_hi = c.max(e).max(w).max(e2).max(w2);
                        let spread_lo = c.min(e).min(w).min(e2).min(w2);
                        let pred_e = c + 2.0 * h * gx + 2.0 * h * h * dxx;
                        let pred_w = c - 2.0 * h * gx + 2.0 * h * h * dxx;
                        let dev = (pred_e - e2).abs().max((pred_w - w2).abs());
                        dev / (spread_hi - spread_lo + 1e-300)
                    } else {
                        0.0
                    }
                }
            };
            if theta >= VISC_REJECT {
                // No quadratic comes close: data, not regularity.
                audit.point(idx, t0, -(1.0 + theta));
                continue;
            }
            if theta > VISC_SKIP {
                continue; // genuinely low-regularity point; not audited
            }

            let g2 = gx * gx + gy * gy;
            let lapl = dxx + dyy;
            let rhs = if g2 == 0.0 {
                if pe == 2.0 {
                    lapl
                } else {
                    0.0
                }
            } else {
                powf_fast(g2, (pe - 2.0) / 2.0) * lapl
                    + (pe - 2.0)
                        * powf_fast(g2, (pe - 4.0) / 2.0)
                        * (gx * gx * dxx + 2.0 * gx * gy * dxy + gy * gy * dyy)
            };

            if c > 1e-12 {
                let lhs = (pe - 1.0) * powf_fast(c, pe - 2.0) * vt;
                let defect = (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1.0);
                audit.point(idx, t0, -defect);
            } else {
                // The jet only constrains the equation at v = 0 when the
                // touching function bottoms out there.
                let local_min = {
                    let mut ok = c <= e + 1e-12 && c <= w + 1e-12;
                    if d.dim() == 2 {
                        ok = ok && c <= v0[idx + nx] + 1e-12 && c <= v0[idx - nx] + 1e-12;
                    }
                    ok
                };
                if !local_min {
                    continue;
                }
                let gmag = g2.sqrt();
                if gmag > h {
                    audit.point(idx, t0, -(1.0 + gmag));
                    continue;
                }
                let lhs = if pe == 2.0 { vt } else { 0.0 };
                let defect = (lhs - rhs).max(0.0) / (lhs.abs() + rhs.abs() + 1.0);
                audit.point(idx, t0, -defect);
            }
        }
    }
    Ok(audit.finish())
}

/// A smooth, compactly supported space-time test function: the standard
/// mollifier profile in a ball around `center` times the same profile in a
/// time window around `t_center`. Identically zero outside both supports
/// (exactly, not just small), which is what the weak-form quadrature needs.
#[derive(Debug, Clone)]
pub struct SpaceTimeBump {
    pub center: [f64; 2],
    pub radius: f64,
    pub t_center: f64,
    pub t_radius: f64,
    pub amplitude: f64,
}

impl SpaceTimeBump {
    /// Evaluate at a point and time; nonnegative everywhere.
    pub fn eval(&self, x: [f64; 2], t: f64) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let r = (dx * dx + dy * dy).sqrt() / self.radius;
        let s = (t - self.t_center) / self.t_radius;
        self.amplitude * mollifier(r) * mollifier(s)
    }
}

/// `exp(1 - 1/(1-s^2))` inside `|s| < 1`, zero outside: smooth, compact,
/// normalized to 1 at the center.
fn mollifier(s: f64) -> f64 {
    let s2 = s * s;
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

/// Build `count` test bumps spread along the interior of the domain and the
/// open time window `(t_first, t_last)`: centers walk the diagonal of the
/// interior bounding box, spatial radii keep each bump strictly inside the
/// boundary, and time radii keep each bump zero at both window ends.
pub fn bump_battery(
    d: &Arc<GridDomain>,
    t_first: f64,
    t_last: f64,
    count: usize,
) -> Vec<SpaceTimeBump> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for idx in d.interior_indices() {
        let c = d.coords(idx);
        for axis in 0..2 {
            lo[axis] = lo[axis].min(c[axis]);
            hi[axis] = hi[axis].max(c[axis]);
        }
    }
    let boundary: Vec<[f64; 2]> = (0..d.len())
        .filter(|&i| d.kind(i) == NodeKind::Boundary)
        .map(|i| d.coords(i))
        .collect();
    let mut battery = Vec::with_capacity(count);
    for i in 0..count {
        let frac = (i + 1) as f64 / (count + 1) as f64;
        let center = [
            lo[0] + frac * (hi[0] - lo[0]),
            lo[1] + frac * (hi[1] - lo[1]),
        ];
        let wall = boundary
            .iter()
            .map(|b| ((b[0] - center[0]).powi(2) + (b[1] - center[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        let tc = t_first + frac * (t_last - t_first);
        let tr = 0.9 * (tc - t_first).min(t_last - tc);
        battery.push(SpaceTimeBump {
            center,
            radius: 0.8 * wall,
            t_center: tc,
            t_radius: tr,
            amplitude: 1.0,
        });
    }
    battery
}

/// Lift a trace to `max{v, c}` nodewise and hold its weak-form residual
/// against every test function in the battery to the subsolution ceiling
/// [`TOL_WEAK`] (residuals at or below the ceiling pass; strongly negative
/// residuals are strong subsolution behavior and pass a fortiori). In the
/// report, `node` is the battery index and `time` the bump's center time.
pub fn max_with_constant_check(
    trace: &EvolutionTrace,
    c: f64,
    p: PExponent,
    battery: &[SpaceTimeBump],
) -> Result<AuditReport> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: format!("the lift constant must be positive, got {c}"),
        });
    }
    if trace.p().get() != p.get() {
        return Err(Error::Mismatch(
            "trace carries a different exponent than the check".into(),
        ));
    }
    if battery.is_empty() {
        return Err(Error::Precondition(
            "subsolution battery needs at least one test function".into(),
        ));
    }
    let fields = trace
        .fields()
        .iter()
        .map(|f| f.max_with_constant(c))
        .collect();
    let lifted = EvolutionTrace::from_snapshots(
        trace.domain(),
        p,
        trace.times().to_vec(),
        fields,
        TraceMeta::derived(),
    )?;
    let mut audit = Audit::new(TOL_WEAK);
    for (i, bump) in battery.iter().enumerate() {
        let r = weak_residual(&lifted, p, &|x, t| bump.eval(x, t))?;
        audit.point(i, bump.t_center, -r);
    }
    Ok(audit.finish())
}
