//! Small numeric helpers for the power-law kernels.
//!
//! Every flux and norm in this crate raises something to an exponent derived
//! from `p` — `(p-2)/2`, `1/(p-1)`, `p-1`, `2-p`. For the workhorse cases
//! `p` in {1.5, 2, 3} those exponents are 0, ±1, ±2, ±1/2, ±1/4 or 3/2, and
//! routing them through `sqrt`/multiplication instead of `powf` does two
//! things: the inner time-stepping loops get measurably faster (millions of
//! steps call this), and scalings by powers of two stay *bit-exact*, which is
//! what lets the homogeneity checks assert near-exact agreement instead of a
//! loose tolerance.

/// `x^e` with fast, correctly-rounded paths for the exponents that appear in
/// the `p`-power kernels. Falls back to `f64::powf` for anything else.
#[inline]
pub fn powf_fast(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e == 0.5 {
        x.sqrt()
    } else if e == -0.5 {
        1.0 / x.sqrt()
    } else if e == -1.0 {
        1.0 / x
    } else if e == 1.5 {
        x * x.sqrt()
    } else if e == -0.25 {
        1.0 / x.sqrt().sqrt()
    } else if e == 0.25 {
        x.sqrt().sqrt()
    } else if e == -2.0 {
        1.0 / (x * x)
    } else if e == 3.0 {
        x * x * x
    } else {
        x.powf(e)
    }
}

/// Signed power `|s|^(e-1) * s / |s| ... ` i.e. `sign(s) |s|^e`, with the
/// convention that `s = 0` maps to 0 (the correct limit for every positive
/// exponent used here).
#[inline]
pub fn signed_pow(s: f64, e: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else if s > 0.0 {
        powf_fast(s, e)
    } else {
        -powf_fast(-s, e)
    }
}

/// Slope of the least-squares line through `(xs, ys)`.
///
/// Plain normal equations; the callers fit a handful of points. Returns
/// `None` when fewer than two points or a degenerate abscissa are supplied.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
