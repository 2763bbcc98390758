//! Majorizing-measure tail-bound machinery.
//!
//! Ingredients, for a separable process with increment norm `d` on a
//! parameter set `S` with metric `|u - v|`:
//!
//! * `zeta1(t) = zeta(2 sigma(sup_s |t - s|))`, the chaining scale at `t`;
//! * `nu_t(u)`, the measure of the ball around `t` of radius
//!   `sigma^(-1)(zeta^(-1)(u) / 2)`;
//! * entropy-type integrals `C_p` and `D_{p,q}` of `U^(-1)(nu^-2)` and
//!   `nu^(-2/q)` over `(0, p zeta1(t)]`, sup over `t`;
//! * the deviation integrals `Z(x)` and `Delta_q` over `S x S`;
//! * the mixed bound (split parameter `alpha`, chain parameter `p`) and the
//!   moment-space `L_q` bound assembled from those pieces.
//!
//! Every finiteness hypothesis is checked numerically: the dyadic integrators
//! report divergence instead of silently truncating.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{MeasureGrid, Support};
use crate::nfunc::NFunction;
use crate::quad::{
    double_integral, integrate_singular_lower, refined_lebesgue_double_integral, DiagonalRule,
};
use crate::rng::PathStream;
use crate::search::golden_min;

type MapFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Map2Fn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Modulus of continuity in norm: increasing `sigma` with `sigma(0+) = 0`
/// bounding `||X(t) - X(s)||` over `|t - s| <= h`, plus its generalized
/// inverse `sigma^(-1)(h) = sup { s : sigma(s) <= h }`.
#[derive(Clone)]
pub struct SigmaModulus {
    sigma: MapFn,
    sigma_inv: MapFn,
}

impl SigmaModulus {
    pub fn new(
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma_inv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            sigma: Arc::new(sigma),
            sigma_inv: Arc::new(sigma_inv),
        }
    }

    /// `sigma(h) = coef * h^exponent` with its closed-form inverse.
    pub fn power(coef: f64, exponent: f64) -> Result<Self> {
        if !(coef > 0.0) || !(exponent > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power modulus needs coef > 0 and exponent > 0, got ({coef}, {exponent})"
            )));
        }
        Ok(Self::new(
            move |h: f64| coef * h.powf(exponent),
            move |h: f64| (h / coef).powf(1.0 / exponent),
        ))
    }

    /// Wrap an arbitrary increasing `sigma`, inverting by bisection on
    /// `[0, h_max]`.
    pub fn from_monotone(sigma: impl Fn(f64) -> f64 + Send + Sync + 'static, h_max: f64) -> Self {
        let s = Arc::new(sigma);
        let s2 = s.clone();
        let inv = move |h: f64| -> f64 {
            if s2(h_max) <= h {
                return h_max;
            }
            let mut lo = 0.0;
            let mut hi = h_max;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if s2(mid) <= h {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        Self {
            sigma: s,
            sigma_inv: Arc::new(inv),
        }
    }

    pub fn sigma(&self, h: f64) -> f64 {
        (self.sigma)(h)
    }

    pub fn sigma_inv(&self, h: f64) -> f64 {
        (self.sigma_inv)(h)
    }
}

/// The rescaling function `zeta(u) = u^alpha` and its companions
/// `zeta^(-1)(u) = u^(1/alpha)` and `gamma(u) = u / zeta(u) = u^(1-alpha)`.
#[derive(Clone, Copy, Debug)]
pub struct ZetaSpec {
    alpha: f64,
}

impl ZetaSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "zeta exponent must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn zeta(&self, u: f64) -> f64 {
        u.powf(self.alpha)
    }

    pub fn zeta_inv(&self, v: f64) -> f64 {
        v.powf(1.0 / self.alpha)
    }

    /// `gamma(y)^q = y^((1 - alpha) q)` with the limit conventions at `y = 0`.
    pub fn gamma_pow(&self, y: f64, q: f64) -> f64 {
        let e = (1.0 - self.alpha) * q;
        if y > 0.0 {
            y.powf(e)
        } else if e > 0.0 {
            0.0
        } else if e == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }

    pub fn gamma(&self, y: f64) -> f64 {
        self.gamma_pow(y, 1.0)
    }
}

/// Process/drift geometry: increment norm `d`, drift `f` with modulus
/// `delta`, and the normalizing pseudometric `d_f`.
///
/// `d_f` may be the shifted increment norm itself or any pointwise upper
/// bound of it that still satisfies the chaining requirements (symmetry,
/// triangle chain, domination by `2 sigma` on balls). Working with a
/// smoothed upper bound is often necessary: `gamma = y / zeta(y)` decreases
/// for scale exponents above 1, so the deviation integral taken with the raw
/// norm can be infinite while the smoothed one is finite. The
/// exponential-covariance route uses `(2 (tau h)^beta1 + delta^2)^(1/2)` for
/// exactly this reason.
///
/// When `d_f(u, v)` depends on the arguments only through `|u - v|`, set the
/// gap kernel (`with_gap_kernel` or the `stationary` constructor): the
/// deviation integrals then reduce exactly to one dimension, which is both
/// faster and the only way to meet tight tolerances when the integrand is
/// singular on the diagonal.
#[derive(Clone)]
pub struct DeviationModel {
    pub d: Map2Fn,
    pub f: MapFn,
    pub delta: MapFn,
    pub d_f: Map2Fn,
    d_f_gap: Option<MapFn>,
}

impl DeviationModel {
    pub fn new(
        d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d_f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            d: Arc::new(d),
            f: Arc::new(f),
            delta: Arc::new(delta),
            d_f: Arc::new(d_f),
            d_f_gap: None,
        }
    }

    /// Declare `d_f(u, v) = kernel(|u - v|)`.
    pub fn with_gap_kernel(mut self, kernel: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d_f_gap = Some(Arc::new(kernel));
        self
    }

    /// Drift-free stationary case: `d(u, v) = d_f(u, v) = kernel(|u - v|)`.
    pub fn stationary(kernel: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let k = Arc::new(kernel);
        let (k1, k2, k3) = (k.clone(), k.clone(), k.clone());
        Self {
            d: Arc::new(move |u: f64, v: f64| k1((u - v).abs())),
            f: Arc::new(|_| 0.0),
            delta: Arc::new(|_| 0.0),
            d_f: Arc::new(move |u: f64, v: f64| k2((u - v).abs())),
            d_f_gap: Some(k3),
        }
    }

    pub fn gap_kernel(&self) -> Option<&MapFn> {
        self.d_f_gap.as_ref()
    }

    /// Centered L2 case: increments of `X` and `f` are orthogonal, so
    /// `d_f(u,v)^2 = d(u,v)^2 + (f(u) - f(v))^2`.
    pub fn centered_l2(
        d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let d = Arc::new(d);
        let f = Arc::new(f);
        let d2 = d.clone();
        let f2 = f.clone();
        Self {
            d,
            f: f.clone(),
            delta: Arc::new(delta),
            d_f: Arc::new(move |u, v| {
                let df = f2(u) - f2(v);
                (d2(u, v).powi(2) + df * df).sqrt()
            }),
            d_f_gap: None,
        }
    }

    /// Check the modulus chain `|f(u)-f(v)| <= delta(d(u,v)) <= d(u,v)` and
    /// `d(u,v) <= sigma(|u-v|)` on randomly sampled pairs, along with symmetry
    /// and vanishing on the diagonal.
    pub fn validate_on_samples(
        &self,
        sm: &SigmaModulus,
        g: &MeasureGrid,
        n_pairs: usize,
        seed: u64,
    ) -> Result<()> {
        let (lo, hi) = match g.support() {
            Support::Interval { lo, hi } => (lo, hi),
            Support::Discrete => (g.points()[0], *g.points().last().unwrap()),
        };
        let mut stream = PathStream::new(seed, 0);
        let tol = 1e-9;
        for _ in 0..n_pairs {
            let u = lo + (hi - lo) * stream.uniform_01();
            let v = lo + (hi - lo) * stream.uniform_01();
            let duv = (self.d)(u, v);
            let dfuv = (self.d_f)(u, v);
            if duv < -tol || dfuv < -tol {
                return Err(Error::InvalidParameter("negative increment norm".into()));
            }
            if ((self.d)(v, u) - duv).abs() > tol || ((self.d_f)(v, u) - dfuv).abs() > tol {
                return Err(Error::InvalidParameter("asymmetric increment norm".into()));
            }
            if (self.d)(u, u).abs() > tol || (self.d_f)(v, v).abs() > tol {
                return Err(Error::InvalidParameter("nonzero diagonal".into()));
            }
            let fgap = ((self.f)(u) - (self.f)(v)).abs();
            let del = (self.delta)(duv);
            if fgap > del + tol || del > duv + tol {
                return Err(Error::InvalidParameter(format!(
                    "modulus chain violated at ({u}, {v}): |f gap| = {fgap}, delta = {del}, d = {duv}"
                )));
            }
            if duv > sm.sigma((u - v).abs()) + tol {
                return Err(Error::InvalidParameter(format!(
                    "sigma fails to dominate d at ({u}, {v})"
                )));
            }
        }
        Ok(())
    }
}

/// Search-grid shape: coarse grid size plus golden refinement effort.
#[derive(Clone, Copy, Debug)]
pub struct SearchSpec {
    pub grid: usize,
    pub refine_steps: usize,
    pub sweeps: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self { grid: 19, refine_steps: 30, sweeps: 2 }
    }
}

/// Configuration for a bound computation.
#[derive(Clone, Debug)]
pub struct BoundQuery {
    pub x_grid: Vec<f64>,
    pub p_search: SearchSpec,
    pub alpha_search: SearchSpec,
    pub quad_tol: f64,
    pub t_grid: Vec<f64>,
}

impl BoundQuery {
    pub fn new(
        x_grid: Vec<f64>,
        p_search: SearchSpec,
        alpha_search: SearchSpec,
        quad_tol: f64,
        t_grid: Vec<f64>,
    ) -> Result<Self> {
        if x_grid.is_empty() || x_grid.windows(2).any(|w| !(w[0] < w[1])) || x_grid[0] <= 0.0 {
            return Err(Error::InvalidParameter(
                "x grid must be positive and strictly increasing".into(),
            ));
        }
        if !(quad_tol > 0.0) {
            return Err(Error::InvalidParameter("quad_tol must be positive".into()));
        }
        if p_search.grid < 2 || alpha_search.grid < 2 {
            return Err(Error::InvalidParameter("search grids need >= 2 points".into()));
        }
        Ok(Self { x_grid, p_search, alpha_search, quad_tol, t_grid })
    }

    /// Default probe grid over the support of `g`.
    pub fn default_t_grid(g: &MeasureGrid, interior: usize) -> Vec<f64> {
        let [lo, _, hi] = g.probe_anchors();
        (1..=interior)
            .map(|i| lo + (hi - lo) * i as f64 / (interior + 1) as f64)
            .collect()
    }
}

/// `zeta1(t) = zeta(2 sigma(sup_s |t - s|))`.
pub fn zeta1(t: f64, g: &MeasureGrid, sm: &SigmaModulus, z: &ZetaSpec) -> f64 {
    z.zeta(2.0 * sm.sigma(g.sup_distance(t)))
}

/// Measure of the chaining ball at `t` for scale parameter `u > 0`.
pub fn nu_t(t: f64, u: f64, g: &MeasureGrid, sm: &SigmaModulus, z: &ZetaSpec) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let r = sm.sigma_inv(z.zeta_inv(u) / 2.0);
    g.ball_measure(t, r)
}

fn probe_points(t_grid: &[f64], g: &MeasureGrid) -> Vec<f64> {
    let mut pts: Vec<f64> = t_grid.to_vec();
    pts.extend_from_slice(&g.probe_anchors());
    pts
}

/// Entropy integral at a single `t`:
/// `(1/(p(1-p))) int_0^(p zeta1(t)) map(nu_t(u)) du`.
fn entropy_integral_at<F>(
    t: f64,
    p: f64,
    g: &MeasureGrid,
    sm: &SigmaModulus,
    z: &ZetaSpec,
    map: &F,
    quad_tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let upper = p * zeta1(t, g, sm, z);
    let integrand = |u: f64| -> Result<f64> { map(nu_t(t, u, g, sm, z)) };
    let val = integrate_singular_lower(&integrand, upper, quad_tol).map_err(|e| match e {
        // An unbounded integrand (e.g. empty balls on a discrete grid) means
        // the entropy hypothesis fails.
        Error::DomainOverflow(m) => Error::Divergent(format!("entropy integrand unbounded: {m}")),
        other => other,
    })?;
    Ok(val / (p * (1.0 - p)))
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < p < 1, got {p}")));
    }
    Ok(())
}

/// `C_p = sup_t (1/(p(1-p))) int_0^(p zeta1(t)) U^(-1)(nu_t(u)^-2) du`.
///
/// The sup runs over `t_grid` plus the support's endpoints and midpoint.
/// Divergence of the integral signals that the entropy hypothesis
/// `sup_t int_0^(zeta1(t)) U^(-1)(nu_t(u)^-2) du < inf` fails.
pub fn c_p(
    p: f64,
    g: &MeasureGrid,
    sm: &SigmaModulus,
    z: &ZetaSpec,
    u_fn: &NFunction,
    t_grid: &[f64],
    quad_tol: f64,
) -> Result<f64> {
    check_p(p)?;
    let map = |nu: f64| -> Result<f64> {
        if nu <= 0.0 {
            return Err(Error::DomainOverflow("empty chaining ball".into()));
        }
        u_fn.generalized_inverse(nu.powi(-2))
    };
    let mut sup = 0.0_f64;
    for t in probe_points(t_grid, g) {
        sup = sup.max(entropy_integral_at(t, p, g, sm, z, &map, quad_tol)?);
    }
    Ok(sup)
}

/// Single-`t` value of the `D_{p,q}` integrand family:
/// `(1/(p(1-p))) int_0^(p zeta1(t)) nu_t(u)^(-2/q) du`.
pub fn d_pq_at(
    t: f64,
    p: f64,
    q_exp: f64,
    g: &MeasureGrid,
    sm: &SigmaModulus,
    z: &ZetaSpec,
    quad_tol: f64,
) -> Result<f64> {
    check_p(p)?;
    let e = -2.0 / q_exp;
    let map = |nu: f64| -> Result<f64> {
        if nu <= 0.0 {
            return Err(Error::DomainOverflow("empty chaining ball".into()));
        }
        Ok(nu.powf(e))
    };
    entropy_integral_at(t, p, g, sm, z, &map, quad_tol)
}

/// `D_{p,q} = sup_t (1/(p(1-p))) int_0^(zeta1(t) p) nu_t(u)^(-2/q) du`.
pub fn d_pq_quad(
    p: f64,
    q_exp: f64,
    g: &MeasureGrid,
    sm: &SigmaModulus,
    z: &ZetaSpec,
    t_grid: &[f64],
    quad_tol: f64,
) -> Result<f64> {
    let mut sup = 0.0_f64;
    for t in probe_points(t_grid, g) {
        sup = sup.max(d_pq_at(t, p, q_exp, g, sm, z, quad_tol)?);
    }
    Ok(sup)
}

fn z_integrand(
    dm: &DeviationModel,
    z: &ZetaSpec,
    u_fn: &NFunction,
    x: f64,
) -> Result<impl Fn(f64, f64) -> Result<f64> + 'static> {
    let growth = u_fn.delta2().ok_or_else(|| {
        Error::MissingCapability(
            "the deviation-tail integral needs doubling-growth metadata (K, x0)".into(),
        )
    })?;
    let scale = 1.0 + u_fn.eval(growth.x0)?;
    let d_f = dm.d_f.clone();
    let zeta = *z;
    let growth = growth.clone();
    Ok(move |u: f64, v: f64| -> Result<f64> {
        let gamma = zeta.gamma(d_f(u, v));
        let indicator = if gamma / x <= 1.0 { 1.0 } else { 0.0 };
        Ok(indicator + scale * growth.k(gamma / x))
    })
}

/// Deviation-tail integral
/// `Z(x) = int int [ chi(gamma(d_f)/x <= 1) + (1 + U(x0)) K(gamma(d_f)/x) ]`,
/// so that `P(eta_f > x) <= Z(x)`.
pub fn z_of_x(
    x: f64,
    dm: &DeviationModel,
    z: &ZetaSpec,
    u_fn: &NFunction,
    g: &MeasureGrid,
    quad_tol: f64,
) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("need x > 0, got {x}")));
    }
    let f = z_integrand(dm, z, u_fn, x)?;
    match (g.support(), dm.gap_kernel()) {
        (Support::Interval { lo, hi }, Some(k)) => {
            let k = k.clone();
            let growth = u_fn.delta2().expect("checked by z_integrand").clone();
            let scale = 1.0 + u_fn.eval(growth.x0)?;
            let zz = *z;
            let gk = move |h: f64| -> Result<f64> {
                let gamma = zz.gamma(k(h));
                let indicator = if gamma / x <= 1.0 { 1.0 } else { 0.0 };
                Ok(indicator + scale * growth.k(gamma / x))
            };
            crate::quad::double_integral_of_gap(lo, hi, &gk, quad_tol)
        }
        (Support::Interval { lo, hi }, None) => {
            refined_lebesgue_double_integral(lo, hi, &f, quad_tol)
        }
        (Support::Discrete, _) => double_integral(g, &f, DiagonalRule::Atom, quad_tol),
    }
}

/// Lighter version of `Z(x)` used inside parameter searches.
fn z_fast(
    x: f64,
    dm: &DeviationModel,
    z: &ZetaSpec,
    u_fn: &NFunction,
    g: &MeasureGrid,
) -> Result<f64> {
    if let (Support::Interval { .. }, Some(_)) = (g.support(), dm.gap_kernel()) {
        return z_of_x(x, dm, z, u_fn, g, 1e-5);
    }
    let f = z_integrand(dm, z, u_fn, x)?;
    match g.support() {
        Support::Interval { lo, hi } => {
            let grid = MeasureGrid::lebesgue_on(lo, hi, 128)?;
            let off = double_integral(&grid, &f, DiagonalRule::Skip, 1e-6)?;
            // Diagonal cells: for alpha < 1 the integrand tends to 1 there;
            // for alpha >= 1 their (integrable) mass vanishes under
            // refinement and is dropped in this search-grade estimate.
            let diag: f64 = if z.alpha() < 1.0 {
                grid.weights().iter().map(|w| w * w).sum()
            } else {
                0.0
            };
            Ok(off + diag)
        }
        Support::Discrete => double_integral(g, &f, DiagonalRule::Atom, 1e-6),
    }
}

/// Tail bound for the chaining variable when `U` is submultiplicative with
/// `z0 = 0`: `P(eta_f > x) <= Z(r) B / U(x / (D r))`.
pub fn eta_tail_class_e(
    x: f64,
    r: f64,
    dm: &DeviationModel,
    z: &ZetaSpec,
    u_fn: &NFunction,
    g: &MeasureGrid,
    quad_tol: f64,
) -> Result<f64> {
    if !(x > 0.0) || !(r > 0.0) {
        return Err(Error::InvalidParameter("need x > 0 and r > 0".into()));
    }
    let e = u_fn.class_e().ok_or_else(|| {
        Error::MissingCapability("submultiplicative-growth constants (B, D) missing".into())
    })?;
    if e.z0 != 0.0 {
        return Err(Error::MissingCapability(format!(
            "this tail form needs z0 = 0, but the function stores z0 = {}",
            e.z0
        )));
    }
    let zr = z_of_x(r, dm, z, u_fn, g, quad_tol)?;
    // Clamping the argument to the evaluation cap only loosens the bound.
    let arg = (x / (e.d * r)).min(u_fn.eval_domain_cap());
    Ok(zr * e.b / u_fn.eval(arg)?)
}

/// Result of the mixed two-term bound.
#[derive(Clone, Copy, Debug)]
pub struct MixedBound {
    /// Infimum of the clamped two-term sum.
    pub value: f64,
    /// Unclamped sum at the same `(alpha, p)`.
    pub raw: f64,
    pub alpha_star: f64,
    pub p_star: f64,
}

/// Mixed bound on `P(sup_t |X(t) - f(t)| > x)`: infimum over the split
/// parameter `alpha` and chain parameter `p` of
/// `min(1, 1/U(alpha x / m)) + min(1, Z((1 - alpha) x / C_p))`,
/// where `m` is the norm of the averaged deviation, supplied by the caller
/// (analytically for known covariances, by Monte Carlo otherwise).
///
/// Search: coarse grid over `(0.05, 0.95)^2`, then coordinate-wise golden
/// refinement; any `(alpha, p)` already yields a valid bound, so the search
/// only tightens it. Ties break toward smaller `p`.
#[allow(clippy::too_many_arguments)]
pub fn theorem1_bound(
    x: f64,
    mean_dev_norm: f64,
    dm: &DeviationModel,
    sm: &SigmaModulus,
    z: &ZetaSpec,
    u_fn: &NFunction,
    g: &MeasureGrid,
    q: &BoundQuery,
) -> Result<MixedBound> {
    if !(x > 0.0) || !(mean_dev_norm > 0.0) {
        return Err(Error::InvalidParameter(
            "need x > 0 and mean_dev_norm > 0".into(),
        ));
    }
    let first_term = |alpha: f64| -> f64 {
        let arg = (alpha * x / mean_dev_norm).min(u_fn.eval_domain_cap());
        match u_fn.eval(arg) {
            Ok(u) if u > 0.0 => 1.0 / u,
            _ => f64::INFINITY,
        }
    };
    let mut cp_cache: Vec<(f64, Option<f64>)> = Vec::new();
    let mut cp_for = |p: f64| -> Result<Option<f64>> {
        if let Some((_, v)) = cp_cache.iter().find(|(pp, _)| *pp == p) {
            return Ok(*v);
        }
        let v = match c_p(p, g, sm, z, u_fn, &q.t_grid, q.quad_tol) {
            Ok(v) => Some(v),
            Err(Error::Divergent(_)) => None,
            Err(e) => return Err(e),
        };
        cp_cache.push((p, v));
        Ok(v)
    };
    // Clamped objective for a given (alpha, C_p).
    let objective = |alpha: f64, cp: f64| -> f64 {
        let arg = (1.0 - alpha) * x / cp;
        let second = match z_fast(arg, dm, z, u_fn, g) {
            Ok(v) => v,
            Err(_) => f64::INFINITY,
        };
        first_term(alpha).min(1.0) + second.min(1.0)
    };
    let grid_pts = |n: usize| -> Vec<f64> {
        (0..n).map(|i| 0.05 + 0.9 * i as f64 / (n - 1) as f64).collect()
    };
    let alphas = grid_pts(q.alpha_search.grid);
    let ps = grid_pts(q.p_search.grid);
    let mut best: Option<(f64, f64, f64)> = None; // (value, alpha, p)
    for &p in &ps {
        let Some(cp) = cp_for(p)? else { continue };
        for &alpha in &alphas {
            let v = objective(alpha, cp);
            // Strict improvement keeps ties at the smaller p seen first.
            if best.map_or(true, |(bv, _, _)| v < bv) {
                best = Some((v, alpha, p));
            }
        }
    }
    let Some((mut val, mut alpha_star, mut p_star)) = best else {
        return Err(Error::Divergent(
            "the entropy integral C_p diverges for every p in the search grid".into(),
        ));
    };
    // Coordinate-wise golden refinement around the best cell.
    let alpha_span = 0.9 / (q.alpha_search.grid - 1) as f64;
    let p_span = 0.9 / (q.p_search.grid - 1) as f64;
    for _ in 0..q.alpha_search.sweeps.max(q.p_search.sweeps) {
        if let Some(cp) = cp_for(p_star)? {
            let (a, v) = golden_min(
                |alpha| objective(alpha, cp),
                (alpha_star - alpha_span).max(0.01),
                (alpha_star + alpha_span).min(0.99),
                1e-10,
                q.alpha_search.refine_steps,
            );
            if v < val {
                val = v;
                alpha_star = a;
            }
        }
        let mut probe_p = |p: f64| -> f64 {
            match cp_for(p) {
                Ok(Some(cp)) => objective(alpha_star, cp),
                _ => f64::INFINITY,
            }
        };
        let (p_ref, v) = golden_min(
            &mut probe_p,
            (p_star - p_span).max(0.01),
            (p_star + p_span).min(0.99),
            1e-10,
            q.p_search.refine_steps,
        );
        if v < val {
            val = v;
            p_star = p_ref;
        }
    }
    // Raw (unclamped) value at the optimum, with the refined Z quadrature.
    let cp = cp_for(p_star)?.ok_or_else(|| {
        Error::Divergent("the entropy integral C_p diverges at the optimum".into())
    })?;
    let _ = val;
    let zv = z_of_x((1.0 - alpha_star) * x / cp, dm, z, u_fn, g, q.quad_tol)?;
    let raw = first_term(alpha_star) + zv;
    let value = first_term(alpha_star).min(1.0) + zv.min(1.0);
    Ok(MixedBound {
        value,
        raw,
        alpha_star,
        p_star,
    })
}

/// `q`-th moment estimate of the averaged deviation, by Monte Carlo over
/// paths produced by `sample_path(i)` on the points of `g`.
pub fn gamma_q_mc(
    q_exp: f64,
    f: &dyn Fn(f64) -> f64,
    g: &MeasureGrid,
    sample_path: &dyn Fn(usize) -> Vec<f64>,
    n_paths: usize,
) -> Result<McEstimate> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    if !(q_exp > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need q > 1, got {q_exp}"
        )));
    }
    let f_vals: Vec<f64> = g.points().iter().map(|&t| f(t)).collect();
    let total = g.total_measure();
    let mut sum = 0.0_f64;
    let mut sum_sq = 0.0_f64;
    for i in 0..n_paths {
        let path = sample_path(i);
        debug_assert_eq!(path.len(), g.len());
        let avg: f64 = path
            .iter()
            .zip(&f_vals)
            .zip(g.weights())
            .map(|((x, fv), w)| w * (x - fv))
            .sum::<f64>()
            / total;
        let m = signed_pow(avg, q_exp)?;
        sum += m;
        sum_sq += m * m;
    }
    let n = n_paths as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(McEstimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

fn signed_pow(base: f64, q: f64) -> Result<f64> {
    if base >= 0.0 {
        return Ok(base.powf(q));
    }
    if q.fract() == 0.0 {
        let mag = (-base).powf(q);
        return Ok(if (q as i64) % 2 == 0 { mag } else { -mag });
    }
    Err(Error::InvalidParameter(format!(
        "negative base {base} with non-integer exponent {q}"
    )))
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// `Delta_q = int int gamma(d_f(u,v))^q d(mu x mu)`, with refinement
/// convergence required; non-convergence signals a failed hypothesis.
pub fn delta_q_quad(
    q_exp: f64,
    dm: &DeviationModel,
    z: &ZetaSpec,
    g: &MeasureGrid,
    quad_tol: f64,
) -> Result<f64> {
    if !(q_exp > 1.0) {
        return Err(Error::InvalidParameter(format!("need q > 1, got {q_exp}")));
    }
    let d_f = dm.d_f.clone();
    let zz = *z;
    let f = move |u: f64, v: f64| -> Result<f64> {
        let val = zz.gamma_pow(d_f(u, v), q_exp);
        if val.is_finite() {
            Ok(val)
        } else {
            Err(Error::Divergent(
                "gamma(d_f)^q is unbounded on the diagonal".into(),
            ))
        }
    };
    match (g.support(), dm.gap_kernel()) {
        (Support::Interval { lo, hi }, Some(k)) => {
            let k = k.clone();
            let gk = move |h: f64| -> Result<f64> { Ok(zz.gamma_pow(k(h), q_exp)) };
            crate::quad::double_integral_of_gap(lo, hi, &gk, quad_tol).map_err(divergent_delta)
        }
        (Support::Interval { lo, hi }, None) => {
            refined_lebesgue_double_integral(lo, hi, &f, quad_tol).map_err(divergent_delta)
        }
        (Support::Discrete, _) => double_integral(g, &f, DiagonalRule::Atom, quad_tol),
    }
}

fn divergent_delta(e: Error) -> Error {
    match e {
        Error::Divergent(m) => Error::Divergent(format!("deviation integral infinite: {m}")),
        other => other,
    }
}

/// Result of the `L_q` bound.
#[derive(Clone, Copy, Debug)]
pub struct LqBound {
    pub value: f64,
    pub p_star: f64,
}

/// Moment-space bound
/// `x^-q (Gamma_q^(1/(q+1)) + (D_{p,q}^q Delta_q)^(1/(q+1)))^(q+1)`,
/// minimized over `p` (grid plus golden refinement, ties toward smaller `p`).
pub fn lq_bound(
    x: f64,
    q_exp: f64,
    gamma_q: f64,
    delta_q: f64,
    d_pq_fn: &dyn Fn(f64) -> Result<f64>,
    p_search: SearchSpec,
) -> Result<LqBound> {
    if !(x > 0.0) || !(q_exp > 1.0) {
        return Err(Error::InvalidParameter("need x > 0 and q > 1".into()));
    }
    if !(gamma_q >= 0.0) || !delta_q.is_finite() || delta_q < 0.0 {
        return Err(Error::InvalidParameter(
            "need gamma_q >= 0 and finite delta_q >= 0".into(),
        ));
    }
    let qq = q_exp;
    let combine = |d: f64| -> f64 {
        let a = gamma_q.powf(1.0 / (qq + 1.0));
        let b = (d.powf(qq) * delta_q).powf(1.0 / (qq + 1.0));
        x.powf(-qq) * (a + b).powf(qq + 1.0)
    };
    let eval_p = |p: f64| -> Result<f64> { Ok(combine(d_pq_fn(p)?)) };
    let mut best_p = f64::NAN;
    let mut best = f64::INFINITY;
    let grid = p_search.grid.max(2);
    for i in 0..grid {
        let p = 0.05 + 0.9 * i as f64 / (grid - 1) as f64;
        let v = eval_p(p)?;
        if v < best {
            best = v;
            best_p = p;
        }
    }
    // Golden refinement around the best grid cell.
    let span = 0.9 / (grid - 1) as f64;
    let lo = (best_p - span).max(0.01);
    let hi = (best_p + span).min(0.99);
    let (p_ref, v_ref) = golden_min(
        |p| eval_p(p).unwrap_or(f64::INFINITY),
        lo,
        hi,
        1e-10,
        p_search.refine_steps.max(8),
    );
    if v_ref < best {
        best = v_ref;
        best_p = p_ref;
    }
    Ok(LqBound { value: best, p_star: best_p })
}
