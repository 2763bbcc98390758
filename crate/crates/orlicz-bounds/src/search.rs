//! 1-D search primitives: bracketed bisection and golden-section optimization.

/// 1/phi and 1/phi^2 for golden-section interval splits.
const INV_PHI: f64 = 0.618_033_988_749_894_9;
const INV_PHI2: f64 = 0.381_966_011_250_105_1;

/// Bisection root finding on `[lo, hi]`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs (zero counts as
/// either). Stops when the bracket width drops below
/// `rtol * max(|lo|, |hi|, 1)` or after `max_iter` halvings.
pub fn bisect_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rtol: f64,
    max_iter: usize,
) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return hi;
    }
    debug_assert!(
        flo * fhi <= 0.0,
        "bisect_root: no sign change on bracket [{lo}, {hi}]"
    );
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rtol * lo.abs().max(hi.abs()).max(1.0) {
            return mid;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`.
///
/// Shrinks the interval to `width_tol` (capped at `max_iter` steps) and
/// returns the midpoint of the final bracket with its value.
pub fn golden_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    width_tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let mut x1 = a + INV_PHI2 * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if (b - a).abs() <= width_tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_PHI2 * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub fn golden_min<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    width_tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let (x, neg) = golden_max(|t| -f(t), a, b, width_tol, max_iter);
    (x, -neg)
}
