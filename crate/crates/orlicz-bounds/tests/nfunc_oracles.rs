//! Oracle tests for the N-function algebra: every expected value below is
//! either immediate arithmetic or computed by an independent method (dense
//! scan with parabolic refinement, hand bisection) before being frozen here.

use orlicz_bounds::nfunc::{conjugate_of, Catalog, NFunction};

/// Independent conjugate oracle: dense scan of `x y - U(y)` over `[0, y_hi]`
/// followed by one parabolic refinement. No shared code with the
/// golden-section path under test.
fn oracle_conjugate(u: &NFunction, x: f64, y_hi: f64, n: usize) -> f64 {
    let ax = x.abs();
    let g = |y: f64| ax * y - u.eval(y).unwrap();
    let mut best_i = 0usize;
    let mut best = 0.0_f64;
    for i in 0..=n {
        let y = y_hi * i as f64 / n as f64;
        let v = g(y);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if best_i == 0 || best_i == n {
        return best;
    }
    let h = y_hi / n as f64;
    let y0 = y_hi * best_i as f64 / n as f64;
    let (fm, f0, fp) = (g(y0 - h), g(y0), g(y0 + h));
    let denom = fm - 2.0 * f0 + fp;
    if denom < 0.0 {
        let shift = 0.5 * h * (fm - fp) / denom;
        best = best.max(g(y0 + shift));
    }
    best
}

#[test]
fn catalog_trivial_values() {
    let u = NFunction::power(1.0, 2.0).unwrap();
    assert_eq!(u.eval(3.0).unwrap(), 9.0);
    let u = NFunction::power_over_p(2.0).unwrap();
    assert_eq!(u.eval(2.0).unwrap(), 2.0);
    let u = NFunction::exp_linear();
    assert_eq!(u.eval(0.0).unwrap(), 0.0);
}

#[test]
fn generalized_inverse_against_hand_bisection() {
    // Solve exp(x) - x - 1 = 1 on [1, 2] by a test-local bisection.
    let mut lo = 1.0_f64;
    let mut hi = 2.0_f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid.exp() - mid - 1.0 < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let u = NFunction::exp_linear();
    let x = u.generalized_inverse(1.0).unwrap();
    assert!((x - oracle).abs() < 1e-9, "{x} vs {oracle}");
    assert!((u.eval(x).unwrap() - 1.0).abs() <= 1e-10);
}

#[test]
fn generalized_inverse_round_trip_and_monotone() {
    for u in catalog_instances() {
        let mut prev = 0.0;
        for i in 1..=20 {
            let y = 0.05 * i as f64;
            let x = u.generalized_inverse(y).unwrap();
            assert!(
                (u.eval(x).unwrap() - y).abs() <= 1e-9 * y.max(1.0),
                "{u:?} at y = {y}"
            );
            assert!(x >= prev - 1e-12, "{u:?}: inverse not monotone at y = {y}");
            prev = x;
        }
        // round trip the other way on x >= 0
        for i in 0..=10 {
            let x = 0.3 * i as f64;
            if u.eval(x).is_err() {
                continue;
            }
            let back = u.generalized_inverse(u.eval(x).unwrap()).unwrap();
            assert!((back - x).abs() <= 1e-7 * x.max(1.0), "{u:?} at x = {x}");
        }
    }
}

#[test]
fn conjugate_of_exp_linear_matches_scan_oracle_and_closed_form() {
    let u = NFunction::exp_linear();
    // The legendre pair of exp(y) - y - 1 is (1+x) ln(1+x) - x; the oracle
    // scan confirms the closed form, and both pin the searched value.
    for x in [0.3, 1.0, 2.5] {
        let scanned = oracle_conjugate(&u, x, 10.0, 400_000);
        let closed = (1.0 + x) * (1.0 + x).ln() - x;
        assert!(
            (scanned - closed).abs() < 1e-9,
            "scan {scanned} vs closed {closed} at x = {x}"
        );
        let searched = u.conjugate(x).unwrap();
        assert!(
            (searched - closed).abs() < 1e-9,
            "search {searched} vs closed {closed} at x = {x}"
        );
    }
    // Value at x = 1 frozen from the oracle: 2 ln 2 - 1.
    let expect = 2.0 * 2.0_f64.ln() - 1.0;
    assert!((u.conjugate(1.0).unwrap() - expect).abs() < 1e-10);
}

#[test]
fn conjugate_power_family_calculus_values() {
    // sup_y (3 y - y^2) = 9/4 at y = 3/2
    let u = NFunction::power(1.0, 2.0).unwrap();
    assert!((u.conjugate(3.0).unwrap() - 2.25).abs() < 1e-10);
    // |x|^p / p pairs with |x|^q / q
    let upp = NFunction::power_over_p(2.0).unwrap();
    assert!((upp.conjugate(1.0).unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn conjugate_pair_exponents() {
    for p in [1.5_f64, 2.0, 3.0] {
        let q = p / (p - 1.0);
        let u = NFunction::power_over_p(p).unwrap();
        for i in 0..=20 {
            let x = -5.0 + 0.5 * i as f64;
            let got = u.conjugate(x).unwrap();
            let expect = x.abs().powf(q) / q;
            assert!(
                (got - expect).abs() <= 1e-8,
                "p = {p}, x = {x}: {got} vs {expect}"
            );
        }
    }
}

#[test]
fn biconjugate_residuals_small() {
    let u = NFunction::power(1.0, 2.0).unwrap();
    let grid = [0.0, 1.0, -1.0, 2.0, -2.0];
    assert!(u.biconjugate_residual(&grid).unwrap() <= 1e-6);

    let u = NFunction::power_over_p(3.0).unwrap();
    let grid: Vec<f64> = (0..50).map(|i| -5.0 + 10.0 * i as f64 / 49.0).collect();
    assert!(u.biconjugate_residual(&grid).unwrap() <= 1e-6);

    let u = NFunction::exp_linear();
    assert_eq!(u.biconjugate_residual(&[0.0]).unwrap(), 0.0);
}

#[test]
fn youngs_inequality_sampled() {
    for u in catalog_instances() {
        for i in 0..=8 {
            for j in 0..=8 {
                let x = 0.3 * i as f64;
                let y = 0.3 * j as f64;
                if u.eval(x).is_err() {
                    continue;
                }
                let lhs = x * y;
                let rhs = u.eval(x).unwrap() + u.conjugate(y).unwrap();
                assert!(
                    lhs <= rhs + 1e-9 * lhs.abs().max(1.0),
                    "{u:?}: Young fails at ({x}, {y})"
                );
            }
        }
    }
}

#[test]
fn conjugate_convex_and_even_on_grid() {
    for u in catalog_instances() {
        let pts: Vec<f64> = (0..=12).map(|i| 0.25 * i as f64).collect();
        for w in pts.windows(3) {
            let (a, b, c) = (
                u.conjugate(w[0]).unwrap(),
                u.conjugate(w[1]).unwrap(),
                u.conjugate(w[2]).unwrap(),
            );
            assert!(b <= 0.5 * (a + c) + 1e-8, "{u:?}: conjugate not convex");
        }
        for &x in &pts {
            let plus = u.conjugate(x).unwrap();
            let minus = u.conjugate(-x).unwrap();
            assert!((plus - minus).abs() <= 1e-10 * plus.max(1.0));
        }
    }
}

#[test]
fn conjugate_of_generic_callable() {
    // conjugate_of against a hand-rolled quadratic: sup (x y - y^2/2) = x^2/2
    let f = |y: f64| -> orlicz_bounds::Result<f64> { Ok(0.5 * y * y) };
    let v = conjugate_of(&f, 2.0, 1e6).unwrap();
    assert!((v - 2.0).abs() < 1e-9);
}

fn catalog_instances() -> Vec<NFunction> {
    vec![
        NFunction::power(1.0, 2.0).unwrap(),
        NFunction::power(2.0, 1.5).unwrap(),
        NFunction::exp_linear(),
        NFunction::catalog(Catalog::ExpPower { a: 1.0, b: 2.0 }).unwrap(),
        NFunction::power_over_p(3.0).unwrap(),
        NFunction::catalog(Catalog::PiecewiseExp { alpha: 0.5 }).unwrap(),
    ]
}
