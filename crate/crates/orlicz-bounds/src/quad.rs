//! Quadrature kernels: adaptive Simpson, a dyadic integrator for integrands
//! singular at the lower endpoint, and double integrals over measure grids.
//!
//! The dyadic integrator doubles as the finiteness check for the entropy-type
//! integrals: hypotheses of the bounds are asserted numerically, so divergence
//! must be detected rather than assumed away.

use crate::error::{Error, Result};
use crate::measure::{MeasureGrid, Support};

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
///
/// The integrand may fail (domain overflow); failures propagate.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let fa = f(a)?;
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let half = 0.5 * tol;
    Ok(simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}

/// Convenience wrapper for infallible integrands.
pub fn adaptive_simpson_plain<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    adaptive_simpson(&|x| Ok(f(x)), a, b, tol).expect("infallible integrand")
}

/// Integrate `f` over `(0, upper]` where `f` may blow up as `u -> 0`.
///
/// The interval is split into dyadic segments `[upper/2^(k+1), upper/2^k]`.
/// Segment sums behave geometrically for power-type singularities, so the
/// remaining tail is extrapolated from the observed segment ratio once it
/// stabilizes. Divergence is declared when segment ratios stay >= 1 for 8
/// consecutive segments, or when the tail never meets `rel_tol`.
pub fn integrate_singular_lower<F>(f: &F, upper: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if upper <= 0.0 {
        return Ok(0.0);
    }
    const MAX_SEGMENTS: usize = 4000;
    let mut partial = 0.0_f64;
    let mut prev_seg: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut rising = 0_u32;
    let mut hi = upper;
    for _ in 0..MAX_SEGMENTS {
        let lo = 0.5 * hi;
        // Rough estimate sets the per-segment absolute tolerance.
        let rough = {
            let m = 0.5 * (lo + hi);
            (hi - lo) / 6.0 * (f(lo)? + 4.0 * f(m)? + f(hi)?)
        };
        let seg_tol = rel_tol * rough.abs().max(1e-3 * partial.abs()).max(1e-300);
        let seg = adaptive_simpson(f, lo, hi, seg_tol)?;
        partial += seg;
        if let Some(prev) = prev_seg {
            if prev != 0.0 {
                let ratio = seg / prev;
                if ratio >= 1.0 {
                    rising += 1;
                    if rising >= 8 {
                        return Err(Error::Divergent(format!(
                            "integrand near 0 is not integrable (segment ratio {ratio:.6} >= 1)"
                        )));
                    }
                } else {
                    rising = 0;
                    // Geometric tail: exact for pure power singularities.
                    let tail = seg * ratio / (1.0 - ratio);
                    let drift = prev_ratio.map_or(f64::INFINITY, |r: f64| (r - ratio).abs());
                    let tail_err = if ratio < 1.0 {
                        drift * seg / ((1.0 - ratio) * (1.0 - ratio))
                    } else {
                        f64::INFINITY
                    };
                    let scale = (partial + tail).abs().max(1e-300);
                    if tail.abs() <= rel_tol * scale
                        || (drift <= 1e-3 * ratio.max(1e-3) && tail_err <= rel_tol * scale)
                    {
                        return Ok(partial + tail);
                    }
                }
                prev_ratio = Some(ratio);
            } else if seg == 0.0 {
                return Ok(partial);
            }
        }
        prev_seg = Some(seg);
        hi = lo;
    }
    Err(Error::Divergent(
        "integral over (0, a] did not stabilize within the segment budget".into(),
    ))
}

/// How the diagonal of a double integral is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalRule {
    /// Drop diagonal terms (measure-zero diagonal, bounded integrand).
    Skip,
    /// Keep `w_i^2 f(t_i, t_i)` atoms (genuinely discrete measures).
    Atom,
    /// Integrate each diagonal cell in the difference variable
    /// `2 * int_0^w (w - h) f(t - h/2, t + h/2) dh`; exact whenever the
    /// integrand locally depends on `|u - v|` only.
    LocalDifference,
}

/// Double integral of `f` against `mu x mu` represented by `grid`.
pub fn double_integral<F>(grid: &MeasureGrid, f: &F, diag: DiagonalRule, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let pts = grid.points();
    let w = grid.weights();
    let n = pts.len();
    let mut total = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            total += w[i] * w[j] * f(pts[i], pts[j])?;
        }
    }
    for i in 0..n {
        match diag {
            DiagonalRule::Skip => {}
            DiagonalRule::Atom => total += w[i] * w[i] * f(pts[i], pts[i])?,
            DiagonalRule::LocalDifference => {
                let c = pts[i];
                let wi = w[i];
                let g = |h: f64| -> Result<f64> { Ok((wi - h) * f(c - 0.5 * h, c + 0.5 * h)?) };
                total += 2.0 * integrate_singular_lower(&g, wi, rel_tol)?;
            }
        }
    }
    Ok(total)
}

/// Double integral over an interval's Lebesgue measure with internal midpoint
/// refinement `n -> 2n` until two levels agree to `rel_tol`.
///
/// Returns `Divergent` when the refinement never stabilizes.
pub fn refined_lebesgue_double_integral<F>(
    lo: f64,
    hi: f64,
    f: &F,
    rel_tol: f64,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let mut n = 64usize;
    let mut prev: Option<f64> = None;
    while n <= 4096 {
        let grid = MeasureGrid::lebesgue_on(lo, hi, n)?;
        let val = double_integral(&grid, f, DiagonalRule::LocalDifference, rel_tol)?;
        if let Some(p) = prev {
            if (val - p).abs() <= rel_tol * val.abs().max(1e-300) + 1e-300 {
                return Ok(val);
            }
        }
        prev = Some(val);
        n *= 2;
    }
    Err(Error::Divergent(
        "double integral did not stabilize under grid refinement".into(),
    ))
}

/// Integrate a function of the gap `|u - v|` over `[lo, hi]^2`:
/// `int int g(|u-v|) du dv = 2 int_0^L (L - h) g(h) dh` with `L = hi - lo`.
///
/// Handles an integrable singularity of `g` at `h = 0`.
pub fn double_integral_of_gap<F>(lo: f64, hi: f64, g: &F, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let len = hi - lo;
    if len <= 0.0 {
        return Ok(0.0);
    }
    let integrand = |h: f64| -> Result<f64> { Ok((len - h) * g(h)?) };
    Ok(2.0 * integrate_singular_lower(&integrand, len, rel_tol)?)
}

/// Used by `Support::Interval` grids when they need ad-hoc subgrids.
impl MeasureGrid {
    /// Uniform midpoint discretization of Lebesgue measure on `[lo, hi]`.
    pub fn lebesgue_on(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "lebesgue_on: empty interval [{lo}, {hi}]"
            )));
        }
        let step = (hi - lo) / n as f64;
        let points: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * step).collect();
        let weights = vec![step; n];
        MeasureGrid::from_parts(points, weights, hi - lo, Support::Interval { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let v = adaptive_simpson_plain(&|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-10);
    }

    #[test]
    fn singular_power_integral() {
        // int_0^1 u^(-1/2) du = 2
        let v = integrate_singular_lower(&|u: f64| Ok(u.powf(-0.5)), 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn singular_near_one_exponent() {
        // int_0^1 u^(-0.95) du = 20; ratio per segment is 2^(-0.05), so the
        // geometric tail extrapolation has to carry most of the mass.
        let v = integrate_singular_lower(&|u: f64| Ok(u.powf(-0.95)), 1.0, 1e-9).unwrap();
        assert!((v - 20.0).abs() < 20.0 * 1e-7, "got {v}");
    }

    #[test]
    fn divergent_log_singularity_detected() {
        let err = integrate_singular_lower(&|u: f64| Ok(1.0 / u), 1.0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::Divergent(_)));
    }

    #[test]
    fn gap_reduction_matches_closed_form() {
        // int_0^1 int_0^1 |u-v| du dv = 1/3
        let v = double_integral_of_gap(0.0, 1.0, &|h| Ok(h), 1e-10).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn grid_double_integral_with_diagonal_rule() {
        let g = MeasureGrid::lebesgue_on(0.0, 1.0, 128).unwrap();
        let v = double_integral(&g, &|u, v| Ok((u - v).abs()), DiagonalRule::LocalDifference, 1e-9)
            .unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-10, "got {v}");
    }
}
