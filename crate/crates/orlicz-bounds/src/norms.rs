//! Luxembourg and Orlicz norms.
//!
//! The Luxembourg norm is the gauge `inf { r > 0 : int U(f/r) dmu <= 1 }`,
//! computed here by bracketed bisection on the defining integral. The dual
//! Orlicz norm `sup { int f v dmu : int U(v) dmu <= 1 }` is computed through
//! its exact one-parameter dual form
//! `inf_{k > 0} (1 + int U*(k f) dmu) / k`,
//! which a golden-section search minimizes; any trial `k` yields an upper
//! bound of the supremum, so the result errs on the side that keeps the
//! Hölder inequality intact.

use crate::error::{Error, Result};
use crate::measure::MeasureGrid;
use crate::nfunc::NFunction;
use crate::search::golden_min;

/// i.i.d. realizations of a random variable, tagged with the seed that
/// produced them.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("sample set must be nonempty".into()));
        }
        Ok(Self { values, seed })
    }
}

/// A norm estimate from samples, with a leave-block-out jackknife standard
/// error for downstream uncertainty propagation.
#[derive(Clone, Copy, Debug)]
pub struct NormEstimate {
    pub value: f64,
    pub jackknife_se: f64,
}

/// A Chebyshev-type tail bound, reported raw and clamped to `[0, 1]`.
#[derive(Clone, Copy, Debug)]
pub struct TailBound {
    pub raw: f64,
    pub clamped: f64,
}

/// Luxembourg norm of a sample set: the `r` solving `mean U(x_i / r) = 1`.
pub fn luxembourg_norm_samples(u: &NFunction, xs: &SampleSet) -> Result<NormEstimate> {
    let n = xs.values.len();
    let value = lux_norm_weighted(u, &xs.values, None, n as f64)?;
    if value == 0.0 {
        return Ok(NormEstimate { value, jackknife_se: 0.0 });
    }
    // Leave-block-out jackknife (20 blocks, fewer for tiny samples).
    let blocks = n.min(20);
    let mut theta = Vec::with_capacity(blocks);
    if blocks >= 2 {
        for b in 0..blocks {
            let lo = b * n / blocks;
            let hi = (b + 1) * n / blocks;
            let mut rest = Vec::with_capacity(n - (hi - lo));
            rest.extend_from_slice(&xs.values[..lo]);
            rest.extend_from_slice(&xs.values[hi..]);
            if rest.is_empty() {
                continue;
            }
            let len = rest.len() as f64;
            theta.push(lux_norm_weighted(u, &rest, None, len)?);
        }
    }
    let jackknife_se = if theta.len() >= 2 {
        let b = theta.len() as f64;
        let mean = theta.iter().sum::<f64>() / b;
        let ss: f64 = theta.iter().map(|t| (t - mean) * (t - mean)).sum();
        ((b - 1.0) / b * ss).sqrt()
    } else {
        0.0
    };
    Ok(NormEstimate { value, jackknife_se })
}

/// Luxembourg norm of a deterministic function tabulated on a measure grid:
/// the `r` solving `sum_i w_i U(f(t_i) / r) = 1`.
pub fn luxembourg_norm_function(
    u: &NFunction,
    f: &dyn Fn(f64) -> f64,
    g: &MeasureGrid,
) -> Result<f64> {
    let values: Vec<f64> = g.points().iter().map(|&t| f(t)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "function must be finite on the grid".into(),
        ));
    }
    lux_norm_weighted(u, &values, Some(g.weights()), 1.0)
}

/// Shared bisection for both Luxembourg norms. `weights = None` means the
/// empirical measure with mass `1 / denom` per point.
fn lux_norm_weighted(
    u: &NFunction,
    values: &[f64],
    weights: Option<&[f64]>,
    denom: f64,
) -> Result<f64> {
    let max_abs = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let integral = |r: f64| -> Result<f64> {
        let mut s = 0.0;
        match weights {
            Some(w) => {
                for (v, wi) in values.iter().zip(w) {
                    s += wi * u.eval(v / r)?;
                }
            }
            None => {
                for v in values {
                    s += u.eval(v / r)?;
                }
                s /= denom;
            }
        }
        Ok(s)
    };
    // Bracket: at r_lo the largest term alone pushes the integral above 1;
    // at r_hi every term is at most 1e-12.
    let min_mass = match weights {
        Some(w) => w.iter().cloned().fold(f64::INFINITY, f64::min),
        None => 1.0 / denom,
    };
    let mut lo = max_abs / u.generalized_inverse(1.0 / min_mass)?;
    let mut hi = max_abs / u.generalized_inverse(1e-12)?;
    debug_assert!(lo < hi);
    if integral(lo)? < 1.0 {
        return Ok(lo);
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..crate::nfunc::ROOT_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let s = integral(mid)?;
        if (s - 1.0).abs() <= 1e-9 || hi - lo <= f64::EPSILON * hi {
            return Ok(mid);
        }
        if s > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Orlicz norm of `phi` via the one-parameter dual form (see module docs).
pub fn orlicz_norm_function(
    u: &NFunction,
    phi: &dyn Fn(f64) -> f64,
    g: &MeasureGrid,
) -> Result<f64> {
    let values: Vec<f64> = g.points().iter().map(|&t| phi(t).abs()).collect();
    let max_abs = values.iter().cloned().fold(0.0_f64, f64::max);
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let conj = |y: f64| -> Result<f64> {
        match u.conjugate_hint(y) {
            Some(v) => Ok(v),
            None => u.conjugate(y),
        }
    };
    let objective = |k: f64| -> Result<f64> {
        let mut s = 1.0;
        for (v, w) in values.iter().zip(g.weights()) {
            s += w * conj(k * v)?;
        }
        Ok(s / k)
    };
    // Bracket the minimum of the unimodal objective around k ~ 1 / max|phi|.
    let mut k_mid = 1.0 / max_abs;
    let mut f_mid = objective(k_mid)?;
    let mut k_lo = k_mid;
    let mut k_hi = k_mid;
    for _ in 0..200 {
        let k = 0.5 * k_lo;
        match objective(k) {
            Ok(v) if v < f_mid => {
                k_hi = k_mid;
                k_mid = k;
                f_mid = v;
                k_lo = k;
            }
            _ => {
                k_lo = k;
                break;
            }
        }
    }
    for _ in 0..200 {
        let k = 2.0 * k_hi;
        match objective(k) {
            Ok(v) if v < f_mid => {
                k_lo = k_mid;
                k_mid = k;
                f_mid = v;
                k_hi = k;
            }
            Ok(_) => {
                k_hi = k;
                break;
            }
            // Conjugate overflow: the objective is effectively infinite there.
            Err(_) => {
                k_hi = k_hi * 1.5;
                break;
            }
        }
    }
    let safe = |k: f64| objective(k).unwrap_or(f64::INFINITY);
    let (_, val) = golden_min(safe, k_lo, k_hi, 1e-12 * k_hi, 400);
    Ok(val.min(f_mid))
}

/// Orlicz norm of the indicator of a set of measure `measure_a`:
/// `mu(A) U^(-1)(1 / mu(A))`.
pub fn indicator_orlicz_norm(u: &NFunction, measure_a: f64) -> Result<f64> {
    if !(measure_a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "indicator norm: need mu(A) > 0, got {measure_a}"
        )));
    }
    Ok(measure_a * u.generalized_inverse(1.0 / measure_a)?)
}

/// Chebyshev-type tail bound `P(|xi| > x) <= 1 / U(x / ||xi||)`.
pub fn chebyshev_tail(u: &NFunction, norm: f64, x: f64) -> Result<TailBound> {
    if !(norm > 0.0) || !(x > 0.0) {
        return Err(Error::InvalidParameter(
            "chebyshev_tail: need norm > 0 and x > 0".into(),
        ));
    }
    let denom = u.eval(x / norm)?;
    let raw = if denom > 0.0 { 1.0 / denom } else { f64::INFINITY };
    Ok(TailBound { raw, clamped: raw.min(1.0) })
}

/// Hölder residual `||f||_U * ||phi||_(U*) - int |f phi| dmu`; nonnegative up
/// to roundoff by the Hölder inequality on the grid measure.
pub fn holder_residual(
    u: &NFunction,
    f: &dyn Fn(f64) -> f64,
    phi: &dyn Fn(f64) -> f64,
    g: &MeasureGrid,
) -> Result<f64> {
    let lux = luxembourg_norm_function(u, f, g)?;
    let dual = orlicz_norm_function(u, phi, g)?;
    let pairing: f64 = g
        .points()
        .iter()
        .zip(g.weights())
        .map(|(&t, &w)| w * (f(t) * phi(t)).abs())
        .sum();
    Ok(lux * dual - pairing)
}
