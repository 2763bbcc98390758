//! Orlicz N-function algebra.
//!
//! An N-function is an even convex `U` with `U(0) = 0`, strictly increasing
//! for `x > 0`, `U(x)/x -> 0` at 0 and `-> inf` at infinity. This module
//! provides a catalog of standard examples together with evaluation, the
//! generalized inverse, and the Young-Fenchel (convex) conjugate
//! `U*(x) = sup_y (x y - U(y))`, plus growth metadata used by the tail-bound
//! machinery:
//!
//! * doubling growth: `U(z x) <= K(z) U(x)` for `z >= 1, x >= x0`;
//! * submultiplicative growth: `U(x) U(y) <= B U(D x y)` for `x, y >= z0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::search::golden_max;

/// Root-finding tolerance for inverses and norm bisections.
pub const ROOT_RTOL: f64 = 1e-10;
/// Iteration cap for bracketed bisection.
pub const ROOT_MAX_ITER: usize = 200;
/// Interval width target for golden-section conjugate searches.
const CONJ_WIDTH_TOL: f64 = 1e-12;

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type GrowthFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Doubling-growth metadata: `U(z x) <= K(z) U(x)` for `z >= 1`, `x >= x0`.
#[derive(Clone)]
pub struct Delta2Growth {
    pub x0: f64,
    k: GrowthFn,
}

impl Delta2Growth {
    pub fn new(x0: f64, k: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { x0, k: Arc::new(k) }
    }

    /// Evaluate `K(z)`.
    pub fn k(&self, z: f64) -> f64 {
        (self.k)(z)
    }
}

impl std::fmt::Debug for Delta2Growth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Delta2Growth").field("x0", &self.x0).finish()
    }
}

/// Submultiplicative-growth constants: `U(x) U(y) <= B U(D x y)` for `x, y >= z0`.
#[derive(Clone, Copy, Debug)]
pub struct ClassEBounds {
    pub z0: f64,
    pub b: f64,
    pub d: f64,
}

/// Catalog of concrete N-functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Catalog {
    /// `c |x|^p` with `c > 0`, `p > 1`.
    Power { c: f64, p: f64 },
    /// `exp(|x|) - |x| - 1`.
    ExpLinear,
    /// `exp(a |x|^b) - 1` with `a > 0`, `b > 1`.
    ExpPower { a: f64, b: f64 },
    /// `|x|^p / p` with `p > 1`.
    PowerOverP { p: f64 },
    /// `(e a / 2)^(2/a) x^2` up to the knee `(2/a)^(1/a)`, then `exp(|x|^a)`,
    /// with `0 < a < 1`.
    PiecewiseExp { alpha: f64 },
}

#[derive(Clone)]
enum Kind {
    Power { c: f64, p: f64 },
    ExpLinear,
    ExpPower { a: f64, b: f64 },
    PowerOverP { p: f64 },
    PiecewiseExp { alpha: f64, knee: f64, quad_coef: f64 },
    Custom { eval: EvalFn },
}

/// An Orlicz N-function with optional closed-form hints and growth metadata.
///
/// All evaluations stay finite: arguments beyond `eval_domain_cap` signal
/// `DomainOverflow` instead of returning infinity.
#[derive(Clone)]
pub struct NFunction {
    kind: Kind,
    delta2: Option<Delta2Growth>,
    class_e: Option<ClassEBounds>,
    eval_domain_cap: f64,
}

impl std::fmt::Debug for NFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match &self.kind {
            Kind::Power { c, p } => format!("power(c={c}, p={p})"),
            Kind::ExpLinear => "exp_linear".into(),
            Kind::ExpPower { a, b } => format!("exp_power(a={a}, b={b})"),
            Kind::PowerOverP { p } => format!("power_over_p(p={p})"),
            Kind::PiecewiseExp { alpha, .. } => format!("piecewise_exp(alpha={alpha})"),
            Kind::Custom { .. } => "custom".into(),
        };
        f.debug_struct("NFunction")
            .field("kind", &name)
            .field("eval_domain_cap", &self.eval_domain_cap)
            .finish()
    }
}

/// Build a catalog N-function, filling growth metadata where the standard
/// examples provide it.
pub fn make_catalog_function(spec: Catalog) -> Result<NFunction> {
    NFunction::catalog(spec)
}

impl NFunction {
    pub fn catalog(spec: Catalog) -> Result<Self> {
        match spec {
            Catalog::Power { c, p } => {
                require(c > 0.0 && c.is_finite(), "power: need c > 0")?;
                require(p > 1.0 && p.is_finite(), "power: need p > 1")?;
                Ok(Self {
                    kind: Kind::Power { c, p },
                    delta2: Some(Delta2Growth::new(0.0, move |z| z.powf(p))),
                    class_e: Some(ClassEBounds { z0: 0.0, b: c, d: 1.0 }),
                    eval_domain_cap: (1e300 / c).powf(1.0 / p),
                })
            }
            Catalog::ExpLinear => Ok(Self {
                kind: Kind::ExpLinear,
                // Grows faster than any power: no doubling growth.
                delta2: None,
                class_e: None,
                eval_domain_cap: 700.0,
            }),
            Catalog::ExpPower { a, b } => {
                require(a > 0.0 && a.is_finite(), "exp_power: need a > 0")?;
                require(b > 1.0 && b.is_finite(), "exp_power: need b > 1")?;
                Ok(Self {
                    kind: Kind::ExpPower { a, b },
                    delta2: None,
                    // Submultiplicative, but with no explicit constants to
                    // store; bounds needing them reject this function.
                    class_e: None,
                    eval_domain_cap: (700.0 / a).powf(1.0 / b),
                })
            }
            Catalog::PowerOverP { p } => {
                require(p > 1.0 && p.is_finite(), "power_over_p: need p > 1")?;
                Ok(Self {
                    kind: Kind::PowerOverP { p },
                    delta2: Some(Delta2Growth::new(0.0, move |z| z.powf(p))),
                    class_e: Some(ClassEBounds { z0: 0.0, b: 1.0 / p, d: 1.0 }),
                    eval_domain_cap: (1e300 * p).powf(1.0 / p),
                })
            }
            Catalog::PiecewiseExp { alpha } => {
                require(
                    alpha > 0.0 && alpha < 1.0,
                    "piecewise_exp: need 0 < alpha < 1",
                )?;
                let knee = (2.0 / alpha).powf(1.0 / alpha);
                let quad_coef = (std::f64::consts::E * alpha / 2.0).powf(2.0 / alpha);
                Ok(Self {
                    kind: Kind::PiecewiseExp { alpha, knee, quad_coef },
                    delta2: None,
                    class_e: None,
                    eval_domain_cap: 700.0_f64.powf(1.0 / alpha),
                })
            }
        }
    }

    /// Shorthand for `catalog(Power { c, p })`.
    pub fn power(c: f64, p: f64) -> Result<Self> {
        Self::catalog(Catalog::Power { c, p })
    }

    /// Shorthand for `catalog(PowerOverP { p })`.
    pub fn power_over_p(p: f64) -> Result<Self> {
        Self::catalog(Catalog::PowerOverP { p })
    }

    /// Shorthand for `catalog(ExpLinear)`.
    pub fn exp_linear() -> Self {
        Self::catalog(Catalog::ExpLinear).expect("no parameters")
    }

    /// An N-function from a user-supplied evaluator. The evaluator is trusted
    /// to satisfy the N-function axioms; only sampled checks are available.
    pub fn custom(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        eval_domain_cap: f64,
        delta2: Option<Delta2Growth>,
        class_e: Option<ClassEBounds>,
    ) -> Result<Self> {
        require(eval_domain_cap > 0.0, "custom: need positive domain cap")?;
        Ok(Self {
            kind: Kind::Custom { eval: Arc::new(eval) },
            delta2,
            class_e,
            eval_domain_cap,
        })
    }

    pub fn delta2(&self) -> Option<&Delta2Growth> {
        self.delta2.as_ref()
    }

    pub fn class_e(&self) -> Option<ClassEBounds> {
        self.class_e
    }

    pub fn eval_domain_cap(&self) -> f64 {
        self.eval_domain_cap
    }

    /// Evaluate `U(x)`; signals `DomainOverflow` beyond the finite domain.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        if !ax.is_finite() || ax > self.eval_domain_cap {
            return Err(Error::DomainOverflow(format!(
                "U({x}) exceeds the evaluation cap {}",
                self.eval_domain_cap
            )));
        }
        Ok(match &self.kind {
            Kind::Power { c, p } => c * ax.powf(*p),
            Kind::ExpLinear => ax.exp_m1() - ax,
            Kind::ExpPower { a, b } => (a * ax.powf(*b)).exp_m1(),
            Kind::PowerOverP { p } => ax.powf(*p) / p,
            Kind::PiecewiseExp { alpha, knee, quad_coef } => {
                if ax <= *knee {
                    quad_coef * ax * ax
                } else {
                    ax.powf(*alpha).exp()
                }
            }
            Kind::Custom { eval } => eval(ax),
        })
    }

    fn inverse_hint(&self, y: f64) -> Option<f64> {
        match &self.kind {
            Kind::Power { c, p } => Some((y / c).powf(1.0 / p)),
            Kind::PowerOverP { p } => Some((y * p).powf(1.0 / p)),
            Kind::ExpPower { a, b } => Some((y.ln_1p() / a).powf(1.0 / b)),
            Kind::PiecewiseExp { alpha, knee, quad_coef } => {
                let at_knee = quad_coef * knee * knee;
                Some(if y <= at_knee {
                    (y / quad_coef).sqrt()
                } else {
                    y.ln().powf(1.0 / alpha)
                })
            }
            Kind::ExpLinear | Kind::Custom { .. } => None,
        }
    }

    /// Closed-form conjugate where the catalog provides one; used by tests as
    /// an oracle and by norm computations as a fast path.
    pub fn conjugate_hint(&self, x: f64) -> Option<f64> {
        let ax = x.abs();
        match &self.kind {
            Kind::Power { c, p } => {
                // sup_y (x y - c y^p) at y* = (x / (c p))^(1/(p-1))
                let q = p / (p - 1.0);
                Some((p - 1.0) / p * ax.powf(q) / (c * p).powf(1.0 / (p - 1.0)))
            }
            Kind::PowerOverP { p } => {
                let q = p / (p - 1.0);
                Some(ax.powf(q) / q)
            }
            Kind::ExpLinear => Some((1.0 + ax) * ax.ln_1p() - ax),
            _ => None,
        }
    }

    /// Generalized inverse on `[0, inf)`: the `x >= 0` with `U(x) = y`,
    /// within `ROOT_RTOL * max(y, 1)` in function value.
    pub fn generalized_inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "generalized_inverse: need y >= 0, got {y}"
            )));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let cap = self.eval_domain_cap;
        if y > self.eval(cap)? {
            return Err(Error::DomainOverflow(format!(
                "U^(-1)({y}) lies beyond the evaluation cap {cap}"
            )));
        }
        if let Some(x) = self.inverse_hint(y) {
            return Ok(x);
        }
        // Bracket by doubling, then bisect on the residual in function value.
        let mut hi = 1.0_f64.min(cap);
        while self.eval(hi)? < y {
            hi = (2.0 * hi).min(cap);
            if hi == cap {
                break;
            }
        }
        let mut lo = if hi <= 1.0 { 0.0 } else { 0.5 * hi };
        let tol = ROOT_RTOL * y.max(1.0);
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..ROOT_MAX_ITER {
            mid = 0.5 * (lo + hi);
            let resid = self.eval(mid)? - y;
            if resid.abs() <= tol || hi - lo <= f64::EPSILON * hi.max(1.0) {
                return Ok(mid);
            }
            if resid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(mid)
    }

    /// Young-Fenchel conjugate `U*(x) = sup_{y > 0} (|x| y - U(y))`, computed
    /// by slope bracketing and golden-section on the concave objective.
    pub fn conjugate(&self, x: f64) -> Result<f64> {
        conjugate_of(&|y| self.eval(y), x, self.eval_domain_cap)
    }

    /// Max absolute Fenchel-Moreau residual `|(U*)*(x) - U(x)|` over `grid`.
    ///
    /// Both conjugations run through the numerical search, so this exercises
    /// the full machinery rather than closed-form hints. The conjugate is
    /// finite on all of R (U is superlinear), so the outer search gets a wide
    /// domain cap; the inner one still respects U's own cap.
    pub fn biconjugate_residual(&self, grid: &[f64]) -> Result<f64> {
        let inner = |y: f64| self.conjugate(y);
        let mut worst = 0.0_f64;
        for &x in grid {
            let direct = self.eval(x)?;
            let through = conjugate_of(&inner, x, 1e18)?;
            worst = worst.max((through - direct).abs());
        }
        Ok(worst)
    }
}

/// Conjugate `sup_{y > 0} (|x| y - f(y))` of an arbitrary convex `f` with
/// `f(0) = 0`, searched on `[0, y_cap]`.
///
/// The bracket grows by doubling until the finite-difference slope
/// `|x| - f'(y)` turns negative; a supremum still unreachable at `y_cap`
/// signals `DomainOverflow`.
pub fn conjugate_of<F>(f: &F, x: f64, y_cap: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let ax = x.abs();
    if ax == 0.0 {
        return Ok(0.0);
    }
    // Finite-difference slope of the objective, one-sided near zero.
    let slope = |y: f64| -> Result<f64> {
        let h = 1e-6 * y.abs().max(1.0);
        let lo = (y - h).max(0.0);
        let hi = y + h;
        Ok(ax - (f(hi)? - f(lo)?) / (hi - lo))
    };
    let mut hi = 1.0_f64.min(0.5 * y_cap);
    loop {
        match slope(hi) {
            Ok(s) if s <= 0.0 => break,
            Ok(_) => {
                let next = 2.0 * hi;
                if next + 1e-6 * next.max(1.0) >= y_cap {
                    return Err(Error::DomainOverflow(format!(
                        "conjugate at {x}: supremum not bracketed within the domain cap {y_cap}"
                    )));
                }
                hi = next;
            }
            Err(_) => {
                return Err(Error::DomainOverflow(format!(
                    "conjugate at {x}: evaluation overflowed while bracketing"
                )))
            }
        }
    }
    let objective = |y: f64| match f(y) {
        Ok(v) => ax * y - v,
        Err(_) => f64::NEG_INFINITY,
    };
    let width = CONJ_WIDTH_TOL.max(1e-15 * hi);
    let (_, best) = golden_max(objective, 0.0, hi, width, 400);
    // The supremum is >= the y = 0 candidate, which gives 0.
    Ok(best.max(0.0))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}
