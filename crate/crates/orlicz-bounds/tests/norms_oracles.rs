//! Oracle and property tests for the norm computations.

use orlicz_bounds::nfunc::NFunction;
use orlicz_bounds::norms::{
    chebyshev_tail, holder_residual, indicator_orlicz_norm, luxembourg_norm_function,
    luxembourg_norm_samples, orlicz_norm_function, SampleSet,
};
use orlicz_bounds::rng::PathStream;
use orlicz_bounds::MeasureGrid;

fn power2() -> NFunction {
    NFunction::power(1.0, 2.0).unwrap()
}

fn normal_samples(n: usize, seed: u64) -> Vec<f64> {
    let mut s = PathStream::new(seed, 0);
    (0..n).map(|_| s.standard_normal()).collect()
}

#[test]
fn l2_norm_of_standard_normals() {
    // For U = x^2 the sample norm is the RMS, which estimates 1.
    let u = power2();
    let xs = SampleSet::new(normal_samples(100_000, 5), 5).unwrap();
    let est = luxembourg_norm_samples(&u, &xs).unwrap();
    assert!((est.value - 1.0).abs() < 0.02, "norm {}", est.value);
    // RMS jackknife se should be near 1/sqrt(2 n) ~ 0.0022
    assert!(est.jackknife_se > 0.0 && est.jackknife_se < 0.01);
}

#[test]
fn homogeneity_exact_under_power_of_two_scaling() {
    // Power-of-two scalars shift only exponents, so the bisection visits
    // bitwise-identical iterates and the norm scales exactly.
    let u = power2();
    let base = normal_samples(2_000, 9);
    let r0 = luxembourg_norm_samples(&u, &SampleSet::new(base.clone(), 9).unwrap())
        .unwrap()
        .value;
    for c in [2.0_f64, 0.5, 4.0, -2.0] {
        let scaled: Vec<f64> = base.iter().map(|v| c * v).collect();
        let r = luxembourg_norm_samples(&u, &SampleSet::new(scaled, 9).unwrap())
            .unwrap()
            .value;
        assert_eq!(r, c.abs() * r0, "scaling by {c}");
    }
}

#[test]
fn triangle_inequality_on_shared_samples() {
    let u = power2();
    let a = normal_samples(5_000, 11);
    let b = normal_samples(5_000, 12);
    let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let na = luxembourg_norm_samples(&u, &SampleSet::new(a, 11).unwrap()).unwrap().value;
    let nb = luxembourg_norm_samples(&u, &SampleSet::new(b, 12).unwrap()).unwrap().value;
    let ns = luxembourg_norm_samples(&u, &SampleSet::new(sum, 13).unwrap()).unwrap().value;
    assert!(ns <= na + nb + 1e-8, "{ns} vs {na} + {nb}");
}

#[test]
fn linear_ramp_norm_quadrature_oracle() {
    // f(t) = t on [0, 1] under U = x^2: the defining sum equals the grid's
    // own second moment, and as the grid refines the norm tends to
    // (int_0^1 t^2 dt)^(1/2) = 1/sqrt(3).
    let u = power2();
    for (n, tol) in [(256usize, 2e-5), (4096, 1e-7)] {
        let g = MeasureGrid::lebesgue(1.0, n).unwrap();
        let r = luxembourg_norm_function(&u, &|t| t, &g).unwrap();
        // exact grid oracle: r* = sqrt(sum w t^2)
        let oracle: f64 = g
            .points()
            .iter()
            .zip(g.weights())
            .map(|(&t, &w)| w * t * t)
            .sum::<f64>()
            .sqrt();
        assert!((r - oracle).abs() < 1e-9, "n = {n}: {r} vs oracle {oracle}");
        assert!((r - 1.0 / 3.0_f64.sqrt()).abs() < tol, "n = {n}: {r}");
    }
}

#[test]
fn indicator_norm_brute_force_cross_check() {
    // Brute-force the defining sup over piecewise-constant v on a 3-point
    // discrete space: maximize sum w_i phi_i v_i subject to
    // sum w_i U(v_i) <= 1. The grid search lower-bounds the true sup and
    // must come within 2% of the closed form.
    let u = power2();
    let w = [0.25_f64, 0.25, 0.5];
    let phi = [1.0_f64, 1.0, 0.0]; // indicator of the first two atoms
    let measure_a: f64 = 0.5;
    let exact = indicator_orlicz_norm(&u, measure_a).unwrap();

    let vmax = 3.0;
    let steps = 120;
    let mut brute: f64 = 0.0;
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let v = [
                    vmax * i as f64 / steps as f64,
                    vmax * j as f64 / steps as f64,
                    vmax * k as f64 / steps as f64,
                ];
                let budget: f64 = w.iter().zip(&v).map(|(wi, vi)| wi * vi * vi).sum();
                if budget <= 1.0 {
                    let pairing: f64 = w
                        .iter()
                        .zip(&phi)
                        .zip(&v)
                        .map(|((wi, pi), vi)| wi * pi * vi)
                        .sum();
                    brute = brute.max(pairing);
                }
            }
        }
    }
    assert!(brute <= exact + 1e-9);
    assert!(exact - brute <= 0.02 * exact, "brute {brute} vs exact {exact}");

    // The dual-form computation should agree with the closed form tightly.
    let g = MeasureGrid::discrete(vec![0.0, 1.0, 2.0], w.to_vec()).unwrap();
    let dual = orlicz_norm_function(&u, &|t| if t < 1.5 { 1.0 } else { 0.0 }, &g).unwrap();
    assert!((dual - exact).abs() <= 1e-7 * exact, "dual {dual} vs {exact}");
}

#[test]
fn chebyshev_exp_tail_is_small() {
    let u = NFunction::exp_linear();
    let b = chebyshev_tail(&u, 1.0, 10.0).unwrap();
    let expect = 1.0 / (10.0_f64.exp() - 11.0);
    assert!((b.raw - expect).abs() < 1e-12 * expect);
    assert!(b.clamped < 1e-3);
}

#[test]
fn chebyshev_dominates_empirical_normal_tail() {
    let u = power2();
    let samples = normal_samples(100_000, 21);
    let n = samples.len() as f64;
    for i in 1..=20 {
        let x = 0.25 * i as f64;
        let bound = chebyshev_tail(&u, 1.0, x).unwrap();
        let k = samples.iter().filter(|s| s.abs() > x).count() as f64;
        let phat = k / n;
        let stderr = (phat * (1.0 - phat) / n).sqrt();
        assert!(
            bound.raw >= phat - 3.0 * stderr,
            "x = {x}: bound {} vs empirical {phat}",
            bound.raw
        );
    }
}

#[test]
fn holder_residual_nonnegative_on_random_pairs() {
    let u = power2();
    let g = MeasureGrid::lebesgue(1.0, 64).unwrap();
    let mut stream = PathStream::new(33, 0);
    for trial in 0..100 {
        // random piecewise-linear functions from a handful of random knots
        let mk = |s: &mut PathStream| {
            let a = 4.0 * s.uniform_01() - 2.0;
            let b = 4.0 * s.uniform_01() - 2.0;
            let c = 4.0 * s.uniform_01() - 2.0;
            move |t: f64| a + b * t + c * (t - 0.5).abs()
        };
        let f = mk(&mut stream);
        let phi = mk(&mut stream);
        let r = holder_residual(&u, &f, &phi, &g).unwrap();
        assert!(r >= -1e-8, "trial {trial}: residual {r}");
    }
}

#[test]
fn holder_residual_exp_linear_pairs() {
    // Exercises the numeric-conjugate path inside the dual norm.
    let u = NFunction::exp_linear();
    let g = MeasureGrid::lebesgue(1.0, 24).unwrap();
    let mut stream = PathStream::new(34, 0);
    for trial in 0..5 {
        let a = stream.uniform_01() + 0.2;
        let b = stream.uniform_01();
        let f = move |t: f64| a * t - b;
        let phi = move |t: f64| b + (t - a).abs();
        let r = holder_residual(&u, &f, &phi, &g).unwrap();
        assert!(r >= -1e-8, "trial {trial}: residual {r}");
    }
}
