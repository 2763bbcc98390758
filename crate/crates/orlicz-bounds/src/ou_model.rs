//! Exponential-covariance (Ornstein-Uhlenbeck type) specialization in L2.
//!
//! For the centered unit-variance process with covariance `exp(-tau |t-s|)`
//! on `[0, T]`, the chaining ingredients take closed or nearly closed forms:
//! the modulus `sigma(h) = sqrt(2) (tau h)^(beta/2)` dominates the increment
//! norm through `1 - exp(-x) <= x^beta` (`0 < beta <= 1`), the ball measure
//! `nu_t` is an explicit three-branch function, the second moment of the path
//! average has a closed form, and the deviation integral reduces to one
//! dimension. Two growth exponents are carried: `beta1` enters the deviation
//! integral, `beta2` the entropy integral, and the scale exponent `alpha`
//! must lie in `(2/beta2, 1/beta1 + 1)`, which forces
//! `2/beta2 < 1/beta1 + 1`.

use crate::bound_engine::{self, SigmaModulus, ZetaSpec};
use crate::error::{Error, Result};
use crate::measure::MeasureGrid;
use crate::quad::double_integral_of_gap;
use crate::search::golden_min;

/// Centered unit-variance process with covariance `exp(-tau |t - s|)` on
/// `[0, T]`, plus the exponents used by the bound machinery.
#[derive(Clone, Copy, Debug)]
pub struct OUModel {
    tau: f64,
    t_horizon: f64,
    beta1: f64,
    beta2: f64,
    alpha_zeta: f64,
    tau_prime: f64,
}

impl OUModel {
    /// The admissible scale-exponent interval `(2/beta2, 1/beta1 + 1)`.
    ///
    /// Empty (an error) unless `2/beta2 < 1/beta1 + 1`; note no pair with
    /// `beta1 = beta2 < 1` is admissible.
    pub fn admissible_alpha_interval(beta1: f64, beta2: f64) -> Result<(f64, f64)> {
        if !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need beta1 in (0,1) and beta2 in (0,1], got ({beta1}, {beta2})"
            )));
        }
        let lo = 2.0 / beta2;
        let hi = 1.0 / beta1 + 1.0;
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "inadmissible (beta1, beta2) = ({beta1}, {beta2}): requires 2/beta2 < 1/beta1 + 1, \
                 but 2/beta2 = {lo:.6} >= 1/beta1 + 1 = {hi:.6}"
            )));
        }
        Ok((lo, hi))
    }

    pub fn new(tau: f64, t_horizon: f64, beta1: f64, beta2: f64, alpha_zeta: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("need tau > 0, got {tau}")));
        }
        if !(t_horizon > 0.0) || !t_horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need T > 0, got {t_horizon}"
            )));
        }
        let (lo, hi) = Self::admissible_alpha_interval(beta1, beta2)?;
        if !(alpha_zeta > lo && alpha_zeta < hi) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha_zeta} outside the admissible interval ({lo:.6}, {hi:.6})"
            )));
        }
        Ok(Self {
            tau,
            t_horizon,
            beta1,
            beta2,
            alpha_zeta,
            tau_prime: tau * 2.0_f64.powf(3.0 / beta2),
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn alpha_zeta(&self) -> f64 {
        self.alpha_zeta
    }

    pub fn tau_prime(&self) -> f64 {
        self.tau_prime
    }

    /// `R(t, s) = exp(-tau |t - s|)`.
    pub fn covariance(&self, t: f64, s: f64) -> f64 {
        (-self.tau * (t - s).abs()).exp()
    }

    /// Increment norm `d(t, s) = sqrt(2 - 2 exp(-tau |t - s|))`.
    pub fn d(&self, t: f64, s: f64) -> f64 {
        (-2.0 * (-self.tau * (t - s).abs()).exp_m1()).sqrt()
    }

    fn sigma_for(&self, beta: f64) -> SigmaModulus {
        // sigma(h) = sqrt(2) (tau h)^(beta/2)
        let coef = std::f64::consts::SQRT_2 * self.tau.powf(beta / 2.0);
        SigmaModulus::power(coef, beta / 2.0).expect("positive parameters")
    }

    /// The modulus instantiated with `beta1` (deviation-integral side).
    pub fn sigma_beta1(&self) -> SigmaModulus {
        self.sigma_for(self.beta1)
    }

    /// The modulus instantiated with `beta2` (entropy-integral side).
    pub fn sigma_beta2(&self) -> SigmaModulus {
        self.sigma_for(self.beta2)
    }

    pub fn zeta_spec(&self) -> ZetaSpec {
        ZetaSpec::new(self.alpha_zeta).expect("validated at construction")
    }

    /// Interval support `[0, T]` for the generic machinery (the Lebesgue ball
    /// measure only depends on the support, not on the grid resolution).
    pub fn support_grid(&self) -> MeasureGrid {
        MeasureGrid::lebesgue(self.t_horizon, 8).expect("valid horizon")
    }

    /// Closed-form ball measure at scale `u` (geometric branch constants).
    ///
    /// With `r(u) = u^(2/(alpha beta2)) / tau'` the three branches are: `T`
    /// once the ball covers `[0, T]`; `2 r(u)` while it fits inside; and
    /// `min(t, T-t) + r(u)` when exactly one side clips.
    pub fn nu_t_closed(&self, t: f64, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let tt = self.t_horizon;
        let e = self.alpha_zeta * self.beta2 / 2.0;
        let m = t.min(tt - t);
        let mm = t.max(tt - t);
        let r = u.powf(2.0 / (self.alpha_zeta * self.beta2)) / self.tau_prime;
        if u > (self.tau_prime * mm).powf(e) {
            tt
        } else if u <= (self.tau_prime * m).powf(e) {
            2.0 * r
        } else {
            m + r
        }
    }

    /// The branch constants as printed in the source derivation: `r(u)/2` on
    /// the inner branch and `max(t, T-t) + r(u)` on the clipped branch. Both
    /// disagree with the ball geometry (the clipped form can even exceed `T`);
    /// kept only for logging and comparison, never for computation.
    pub fn nu_t_closed_paper_text(&self, t: f64, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let tt = self.t_horizon;
        let e = self.alpha_zeta * self.beta2 / 2.0;
        let m = t.min(tt - t);
        let mm = t.max(tt - t);
        let r = u.powf(2.0 / (self.alpha_zeta * self.beta2)) / self.tau_prime;
        if u > (self.tau_prime * mm).powf(e) {
            tt
        } else if u <= (self.tau_prime * m).powf(e) {
            0.5 * r
        } else {
            mm + r
        }
    }

    /// Second moment of the averaged deviation:
    /// `2 (T tau + exp(-tau T) - 1) / (tau T)^2 + (int f / T)^2`.
    pub fn gamma2_closed(&self, f_integral: f64) -> f64 {
        let tt = self.t_horizon;
        let c = 2.0 * (tt * self.tau + (-self.tau * tt).exp() - 1.0) / (self.tau * self.tau * tt * tt);
        c + (f_integral / tt) * (f_integral / tt)
    }

    /// Deviation integral at the model's own `alpha`.
    pub fn delta2_quad(&self, delta_mod: &dyn Fn(f64) -> f64, quad_tol: f64) -> Result<f64> {
        self.delta2_quad_at(self.alpha_zeta, delta_mod, quad_tol)
    }

    /// Deviation integral
    /// `int int (2 (tau |u-v|)^beta1 + delta((2 tau |u-v|)^(beta1/2))^2)^(1-alpha)`
    /// reduced exactly to one dimension through the gap variable.
    pub fn delta2_quad_at(
        &self,
        alpha: f64,
        delta_mod: &dyn Fn(f64) -> f64,
        quad_tol: f64,
    ) -> Result<f64> {
        let tau = self.tau;
        let b1 = self.beta1;
        let g = |h: f64| -> Result<f64> {
            let dd = delta_mod((2.0 * tau * h).powf(b1 / 2.0));
            Ok((2.0 * (tau * h).powf(b1) + dd * dd).powf(1.0 - alpha))
        };
        double_integral_of_gap(0.0, self.t_horizon, &g, quad_tol).map_err(|e| match e {
            Error::Divergent(_) => Error::Divergent(format!(
                "deviation integral infinite at alpha = {alpha}: needs alpha < 1/beta1 + 1 = {}",
                1.0 / self.beta1 + 1.0
            )),
            other => other,
        })
    }

    /// Generic-quadrature entropy integral at `q = 2` (the primary route).
    pub fn d_p2_quad(&self, p: f64, quad_tol: f64) -> Result<f64> {
        self.d_p2_quad_at(self.alpha_zeta, p, quad_tol)
    }

    pub fn d_p2_quad_at(&self, alpha: f64, p: f64, quad_tol: f64) -> Result<f64> {
        let z = ZetaSpec::new(alpha)?;
        let g = self.support_grid();
        let t_grid = bound_engine::BoundQuery::default_t_grid(&g, 29);
        bound_engine::d_pq_quad(p, 2.0, &g, &self.sigma_beta2(), &z, &t_grid, quad_tol)
    }

    /// The closed-form expression for the entropy integral at `q = 2`, as
    /// stated in the source: with `m = min(t, T-t)`, `M = max(t, T-t)`,
    /// `e = alpha beta2 / 2`,
    ///
    /// ```text
    /// (1/(p(1-p))) [ 2 tau' (tau' m)^(e-1) / (1 - 2/alpha)
    ///                + (p 2^(3 alpha/2) (tau M)^e - (tau' m)^e) / T ]
    /// ```
    ///
    /// Its derivation contains algebra slips (see `nu_t_closed_paper_text`),
    /// so it is NOT reliably an upper bound of the quadrature value; it is
    /// exposed for cross-checks and reporting only.
    pub fn d_p2_closed(&self, p: f64, t: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < p < 1, got {p}")));
        }
        let tt = self.t_horizon;
        if !(t > 0.0 && t < tt) {
            return Err(Error::SingularEndpoint(format!(
                "closed form is singular at t = {t} (min(t, T-t) raised to a negative power)"
            )));
        }
        let alpha = self.alpha_zeta;
        let e = alpha * self.beta2 / 2.0;
        let m = t.min(tt - t);
        let mm = t.max(tt - t);
        let term1 = 2.0 * self.tau_prime * (self.tau_prime * m).powf(e - 1.0) / (1.0 - 2.0 / alpha);
        let term2 =
            (p * 2.0_f64.powf(1.5 * alpha) * (self.tau * mm).powf(e) - (self.tau_prime * m).powf(e)) / tt;
        Ok((term1 + term2) / (p * (1.0 - p)))
    }

    /// Bound coefficient `(Gamma_2^(1/3) + inf_alpha (D_{p,2}^2 Delta_2)^(1/3))^3`
    /// so that the tail bound at level `x` is `coefficient / x^2`.
    pub fn theorem4_coefficient(
        &self,
        p: f64,
        f_integral: f64,
        delta_mod: &dyn Fn(f64) -> f64,
        quad_tol: f64,
    ) -> Result<Theorem4Coefficient> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < p < 1, got {p}")));
        }
        let (lo, hi) = Self::admissible_alpha_interval(self.beta1, self.beta2)?;
        let pad = 1e-4 * (hi - lo);
        let mut last_err: Option<Error> = None;
        let objective = |alpha: f64,
                         last_err: &mut Option<Error>|
         -> f64 {
            let d = match self.d_p2_quad_at(alpha, p, quad_tol) {
                Ok(v) => v,
                Err(e) => {
                    *last_err = Some(e);
                    return f64::INFINITY;
                }
            };
            let dl = match self.delta2_quad_at(alpha, delta_mod, quad_tol) {
                Ok(v) => v,
                Err(e) => {
                    *last_err = Some(e);
                    return f64::INFINITY;
                }
            };
            (d * d * dl).powf(1.0 / 3.0)
        };
        let (alpha_star, obj) = golden_min(
            |a| objective(a, &mut last_err),
            lo + pad,
            hi - pad,
            1e-6 * (hi - lo),
            60,
        );
        if !obj.is_finite() {
            return Err(last_err.unwrap_or_else(|| {
                Error::Divergent("no admissible alpha gave finite integrals".into())
            }));
        }
        let gamma2 = self.gamma2_closed(f_integral);
        let d_p2 = self.d_p2_quad_at(alpha_star, p, quad_tol)?;
        let delta2 = self.delta2_quad_at(alpha_star, delta_mod, quad_tol)?;
        let coefficient = (gamma2.powf(1.0 / 3.0) + obj).powi(3);
        Ok(Theorem4Coefficient {
            coefficient,
            alpha_star,
            gamma2,
            delta2,
            d_p2,
        })
    }

    /// Tail bound `coefficient / x^2` with the scale exponent optimized over
    /// its admissible interval.
    pub fn theorem4_bound(
        &self,
        x: f64,
        p: f64,
        f_integral: f64,
        delta_mod: &dyn Fn(f64) -> f64,
        quad_tol: f64,
    ) -> Result<Theorem4Bound> {
        if !(x > 0.0) {
            return Err(Error::InvalidParameter(format!("need x > 0, got {x}")));
        }
        let c = self.theorem4_coefficient(p, f_integral, delta_mod, quad_tol)?;
        Ok(Theorem4Bound {
            value: c.coefficient / (x * x),
            alpha_star: c.alpha_star,
        })
    }

    /// Optimize the chain parameter `p` as well (coarse grid plus golden
    /// refinement; any `p` gives a valid bound).
    pub fn theorem4_optimize_p(
        &self,
        f_integral: f64,
        delta_mod: &dyn Fn(f64) -> f64,
        quad_tol: f64,
        p_grid: usize,
    ) -> Result<OptimizedTheorem4> {
        let grid = p_grid.max(3);
        let mut best: Option<(f64, Theorem4Coefficient)> = None;
        for i in 0..grid {
            let p = 0.05 + 0.9 * i as f64 / (grid - 1) as f64;
            let c = self.theorem4_coefficient(p, f_integral, delta_mod, quad_tol)?;
            if best.as_ref().map_or(true, |(_, b)| c.coefficient < b.coefficient) {
                best = Some((p, c));
            }
        }
        let (p0, c0) = best.expect("grid is nonempty");
        let span = 0.9 / (grid - 1) as f64;
        let mut refined = (p0, c0.clone());
        let (p_ref, _) = golden_min(
            |p| {
                self.theorem4_coefficient(p, f_integral, delta_mod, quad_tol)
                    .map(|c| c.coefficient)
                    .unwrap_or(f64::INFINITY)
            },
            (p0 - span).max(0.01),
            (p0 + span).min(0.99),
            1e-6,
            20,
        );
        if let Ok(c) = self.theorem4_coefficient(p_ref, f_integral, delta_mod, quad_tol) {
            if c.coefficient < refined.1.coefficient {
                refined = (p_ref, c);
            }
        }
        let (p_star, c) = refined;
        Ok(OptimizedTheorem4 { p_star, details: c })
    }
}

/// Everything behind a Theorem-4-style bound evaluation, for reporting.
#[derive(Clone, Debug)]
pub struct Theorem4Coefficient {
    pub coefficient: f64,
    pub alpha_star: f64,
    pub gamma2: f64,
    pub delta2: f64,
    pub d_p2: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Theorem4Bound {
    pub value: f64,
    pub alpha_star: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizedTheorem4 {
    pub p_star: f64,
    pub details: Theorem4Coefficient,
}

/// Zero drift modulus, for `f = 0`.
pub fn zero_modulus(_: f64) -> f64 {
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> OUModel {
        OUModel::new(1.0, 1.0, 0.5, 0.95, 2.4).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(OUModel::admissible_alpha_interval(0.5, 0.95).is_ok());
        // No equal pair below 1 is admissible.
        for b in [0.3, 0.5, 0.9, 0.99] {
            assert!(OUModel::admissible_alpha_interval(b, b).is_err());
        }
        // beta2 = 1 admits every beta1 in (0, 1).
        assert!(OUModel::admissible_alpha_interval(0.9, 1.0).is_ok());
        assert!(OUModel::new(1.0, 1.0, 0.9, 0.9, 2.15).is_err());
        assert!(OUModel::new(1.0, 1.0, 0.5, 0.95, 2.0).is_err());
        assert!(OUModel::new(-1.0, 1.0, 0.5, 0.95, 2.4).is_err());
    }

    #[test]
    fn covariance_basics() {
        let m = model();
        assert_eq!(m.covariance(0.3, 0.3), 1.0);
        assert!((m.covariance(0.0, 1.0) - (-1.0_f64).exp()).abs() < 1e-15);
        assert_eq!(m.covariance(0.2, 0.7), m.covariance(0.7, 0.2));
    }

    #[test]
    fn sigma_closed_inverse_roundtrip() {
        let m = model();
        for sm in [m.sigma_beta1(), m.sigma_beta2()] {
            for h in [1e-4, 0.01, 0.3, 1.0, 2.5] {
                let v = sm.sigma(sm.sigma_inv(h));
                assert!((v - h).abs() <= 1e-12 * h.max(1.0), "roundtrip {h} -> {v}");
            }
            assert_eq!(sm.sigma(0.0), 0.0);
            assert_eq!(sm.sigma_inv(0.0), 0.0);
        }
        // beta = 1, tau = 1: sigma(h) = sqrt(2 h), sigma_inv(h) = h^2 / 2
        let m1 = OUModel::new(1.0, 1.0, 0.5, 1.0, 2.5).unwrap();
        let sm = m1.sigma_beta2();
        assert!((sm.sigma_inv(2.0) - 2.0).abs() < 1e-12);
        assert!((sm.sigma(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_dominates_increment_norm() {
        let m = model();
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let t = next();
            let s = next();
            let d = m.d(t, s);
            for sm in [m.sigma_beta1(), m.sigma_beta2()] {
                assert!(d <= sm.sigma((t - s).abs()) + 1e-12);
            }
        }
    }

    #[test]
    fn gamma2_closed_values() {
        let m = model();
        // tau = T = 1, f = 0: 2 (1 + 1/e - 1) = 2/e
        let v = m.gamma2_closed(0.0);
        assert!((v - 2.0 / std::f64::consts::E).abs() < 1e-15);
        // adding a constant drift c contributes c^2 exactly
        let c = 0.7;
        let v2 = m.gamma2_closed(c * m.t_horizon());
        assert!((v2 - (v + c * c)).abs() < 1e-15);
        // T -> 0 limit is the variance at a single point
        for tt in [1e-3, 1e-5] {
            let tiny = OUModel::new(1.0, tt, 0.5, 0.95, 2.4).unwrap();
            let g = tiny.gamma2_closed(0.0);
            assert!((g - 1.0).abs() < tt, "T = {tt}: gamma2 = {g}");
        }
    }

    #[test]
    fn nu_t_closed_branches() {
        let m = model();
        // huge scale covers the interval
        assert_eq!(m.nu_t_closed(0.3, 1e9), 1.0);
        // monotone nondecreasing in u across branch boundaries
        let mut prev = 0.0;
        for i in 1..=500 {
            let u = i as f64 * 0.05;
            let v = m.nu_t_closed(0.3, u);
            assert!(v >= prev - 1e-14, "u = {u}");
            prev = v;
        }
        assert_eq!(m.nu_t_closed(0.3, 0.0), 0.0);
    }

    #[test]
    fn d_p2_closed_symmetry_and_endpoints() {
        let m = model();
        let a = m.d_p2_closed(0.4, 0.2).unwrap();
        let b = m.d_p2_closed(0.4, 0.8).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        assert!(matches!(
            m.d_p2_closed(0.4, 0.0),
            Err(Error::SingularEndpoint(_))
        ));
        assert!(matches!(
            m.d_p2_closed(0.4, 1.0),
            Err(Error::SingularEndpoint(_))
        ));
        // After removing the 1/(p(1-p)) prefactor, the bracket is affine in
        // p: its second difference over equally spaced p vanishes.
        let bracket = |p: f64| m.d_p2_closed(p, 0.2).unwrap() * p * (1.0 - p);
        let (b1, b2, b3) = (bracket(0.25), (bracket(0.25) + bracket(0.75)) / 2.0, bracket(0.5));
        assert!((b2 - b3).abs() < 1e-12 * b1.abs().max(1.0));
    }

    #[test]
    fn delta2_alpha_one_is_horizon_squared() {
        // At alpha = 1 the integrand is identically 1 off the diagonal.
        let m = OUModel::new(1.0, 1.5, 0.5, 0.95, 2.4).unwrap();
        let v = m.delta2_quad_at(1.0, &zero_modulus, 1e-8).unwrap();
        assert!((v - 2.25).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn delta2_matches_calculus_oracle() {
        // delta = 0, tau = 1, T = 1: integrand 2^(1-alpha) h^(-s) with
        // s = beta1 (alpha - 1); for s < 1 the gap integral is exactly
        // 2^(2-alpha) / ((1-s)(2-s)).
        let m = OUModel::new(1.0, 1.0, 0.999, 1.0, 2.0005).unwrap();
        for alpha in [1.5, 1.9] {
            let v = m.delta2_quad_at(alpha, &zero_modulus, 1e-9).unwrap();
            let s = 0.999 * (alpha - 1.0);
            let exact = (2.0_f64).powf(2.0 - alpha) / ((1.0 - s) * (2.0 - s));
            assert!(
                (v - exact).abs() < 1e-6 * exact,
                "alpha = {alpha}: {v} vs {exact}"
            );
        }
        // Once s >= 1 the gap integrand is no longer integrable at 0.
        assert!(matches!(
            m.delta2_quad_at(2.1, &zero_modulus, 1e-8),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn theorem4_scaling_in_x() {
        let m = model();
        let b1 = m.theorem4_bound(10.0, 0.5, 0.0, &zero_modulus, 1e-5).unwrap();
        let b2 = m.theorem4_bound(20.0, 0.5, 0.0, &zero_modulus, 1e-5).unwrap();
        assert!((b2.value - b1.value / 4.0).abs() <= 1e-9 * b1.value);
        assert_eq!(b1.alpha_star, b2.alpha_star);
    }
}
