//! Monte Carlo verification lab: exact path sampling on a grid, empirical
//! supremum tails with confidence bands, and bound-domination reports.

use crate::error::{Error, Result};
use crate::measure::MeasureGrid;
use crate::ou_model::OUModel;
use crate::rng::PathStream;

/// z for two-sided 99% Wilson intervals.
const WILSON_Z: f64 = 2.575_829_303_548_900_4;

/// A batch of process realizations on a common grid, row-major
/// `n_paths x grid.len()`.
#[derive(Clone, Debug)]
pub struct PathBatch {
    pub grid: MeasureGrid,
    pub n_paths: usize,
    pub seed: u64,
    values: Vec<f64>,
}

impl PathBatch {
    pub fn path(&self, i: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[i * n..(i + 1) * n]
    }
}

fn worker_count() -> usize {
    match std::env::var("ORLICZ_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => default_workers(),
            Ok(n) => n,
        },
        Err(_) => default_workers(),
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Sample the exponential-covariance process exactly on a grid.
///
/// The first point draws from the stationary N(0,1) marginal; successive
/// points use the Gauss-Markov step `X_{i+1} = rho_i X_i + sqrt(1-rho_i^2) z`
/// with `rho_i = exp(-tau (t_{i+1} - t_i))`. Each path has its own counter
/// stream keyed by `(seed, path index)`, so the batch is identical for any
/// worker count or generation order.
pub fn sample_ou_batch(m: &OUModel, n_points: usize, n_paths: usize, seed: u64) -> Result<PathBatch> {
    if n_points < 2 {
        return Err(Error::InvalidParameter("need at least 2 grid points".into()));
    }
    let grid = MeasureGrid::lebesgue(m.t_horizon(), n_points)?;
    sample_ou_batch_on_grid(m, &grid, n_paths, seed)
}

/// Same as [`sample_ou_batch`] on a caller-supplied grid (used for nested
/// grid studies).
pub fn sample_ou_batch_on_grid(
    m: &OUModel,
    grid: &MeasureGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let n = grid.len();
    let pts = grid.points();
    let steps: Vec<(f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let rho = (-m.tau() * (w[1] - w[0])).exp();
            (rho, (1.0 - rho * rho).sqrt())
        })
        .collect();
    let mut values = vec![0.0_f64; n_paths * n];
    let workers = worker_count().max(1).min(n_paths);
    let chunk = n_paths.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slab) in values.chunks_mut(chunk * n).enumerate() {
            let steps = &steps;
            scope.spawn(move || {
                for (k, row) in slab.chunks_mut(n).enumerate() {
                    let path_index = (w * chunk + k) as u64;
                    let mut stream = PathStream::new(seed, path_index);
                    row[0] = stream.standard_normal();
                    for (i, (rho, scale)) in steps.iter().enumerate() {
                        row[i + 1] = rho * row[i] + scale * stream.standard_normal();
                    }
                }
            });
        }
    });
    Ok(PathBatch {
        grid: grid.clone(),
        n_paths,
        seed,
        values,
    })
}

/// Per-path `max_i |X(t_i) - f(t_i)|`.
pub fn per_path_sup_deviation(b: &PathBatch, f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let f_vals: Vec<f64> = b.grid.points().iter().map(|&t| f(t)).collect();
    (0..b.n_paths)
        .map(|i| {
            b.path(i)
                .iter()
                .zip(&f_vals)
                .map(|(x, fv)| (x - fv).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Per-path supremum of the deviation re-centered by its own path average:
/// `sup_i |X(t_i) - f(t_i) - (1/mu(S)) sum_j w_j (X(t_j) - f(t_j))|`.
pub fn averaged_deviation_stat(b: &PathBatch, f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let f_vals: Vec<f64> = b.grid.points().iter().map(|&t| f(t)).collect();
    let w = b.grid.weights();
    let total = b.grid.total_measure();
    (0..b.n_paths)
        .map(|i| {
            let path = b.path(i);
            let avg: f64 = path
                .iter()
                .zip(&f_vals)
                .zip(w)
                .map(|((x, fv), wi)| wi * (x - fv))
                .sum::<f64>()
                / total;
            path.iter()
                .zip(&f_vals)
                .map(|(x, fv)| (x - fv - avg).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Empirical tail of the supremum statistic with Wilson 99% half-widths.
#[derive(Clone, Debug)]
pub struct EmpiricalTail {
    pub x: Vec<f64>,
    pub empirical: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    pub n_paths: usize,
}

pub fn empirical_sup_tail(
    b: &PathBatch,
    f: &dyn Fn(f64) -> f64,
    x_grid: &[f64],
) -> Result<EmpiricalTail> {
    if b.n_paths == 0 {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    if x_grid.is_empty() || x_grid.windows(2).any(|w| !(w[0] < w[1])) || x_grid[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "x grid must be positive and strictly increasing".into(),
        ));
    }
    let sups = per_path_sup_deviation(b, f);
    let n = b.n_paths as f64;
    let mut empirical = Vec::with_capacity(x_grid.len());
    let mut ci = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let k = sups.iter().filter(|&&s| s > x).count() as f64;
        empirical.push(k / n);
        ci.push(wilson_halfwidth(k, n));
    }
    Ok(EmpiricalTail {
        x: x_grid.to_vec(),
        empirical,
        ci_halfwidth: ci,
        n_paths: b.n_paths,
    })
}

fn wilson_halfwidth(k: f64, n: f64) -> f64 {
    let z2 = WILSON_Z * WILSON_Z;
    let phat = k / n;
    WILSON_Z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

/// A theoretical bound value at one `x`.
#[derive(Clone, Copy, Debug)]
pub struct BoundValue {
    pub raw: f64,
    pub clamped: f64,
    pub alpha_star: f64,
    pub p_star: f64,
}

impl BoundValue {
    pub fn from_raw(raw: f64, alpha_star: f64, p_star: f64) -> Self {
        Self {
            raw,
            clamped: raw.min(1.0),
            alpha_star,
            p_star,
        }
    }
}

/// Domination status at one `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domination {
    /// Bound checked and it dominates the empirical tail.
    Dominated,
    /// Bound checked and it fell below the empirical tail.
    Violated,
    /// Clamped bound is 1, so the comparison is vacuous.
    Skipped,
}

/// Joined theoretical/empirical tail table.
#[derive(Clone, Debug)]
pub struct TailReport {
    pub x: Vec<f64>,
    pub empirical: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    pub bound_raw: Vec<f64>,
    pub bound_clamped: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub p_star: Vec<f64>,
    pub dominated: Vec<Domination>,
    pub n_paths: usize,
    pub seed: u64,
}

impl TailReport {
    /// True when no checked row is violated.
    pub fn all_dominated(&self) -> bool {
        !self.dominated.iter().any(|d| *d == Domination::Violated)
    }
}

/// Join a bound function with the empirical tail. A row is checked only where
/// the clamped bound is informative (< 1); the domination criterion is
/// `bound_raw >= empirical - 3 * binomial stderr`.
pub fn domination_report(
    b: &PathBatch,
    f: &dyn Fn(f64) -> f64,
    bound_fn: &dyn Fn(f64) -> BoundValue,
    x_grid: &[f64],
) -> Result<TailReport> {
    let tail = empirical_sup_tail(b, f, x_grid)?;
    let n = b.n_paths as f64;
    let mut bound_raw = Vec::with_capacity(x_grid.len());
    let mut bound_clamped = Vec::with_capacity(x_grid.len());
    let mut alpha_star = Vec::with_capacity(x_grid.len());
    let mut p_star = Vec::with_capacity(x_grid.len());
    let mut dominated = Vec::with_capacity(x_grid.len());
    for (i, &x) in x_grid.iter().enumerate() {
        let bv = bound_fn(x);
        let phat = tail.empirical[i];
        let status = if bv.clamped < 1.0 {
            let stderr = (phat * (1.0 - phat) / n).sqrt();
            if bv.raw >= phat - 3.0 * stderr {
                Domination::Dominated
            } else {
                Domination::Violated
            }
        } else {
            Domination::Skipped
        };
        bound_raw.push(bv.raw);
        bound_clamped.push(bv.clamped);
        alpha_star.push(bv.alpha_star);
        p_star.push(bv.p_star);
        dominated.push(status);
    }
    Ok(TailReport {
        x: tail.x,
        empirical: tail.empirical,
        ci_halfwidth: tail.ci_halfwidth,
        bound_raw,
        bound_clamped,
        alpha_star,
        p_star,
        dominated,
        n_paths: b.n_paths,
        seed: b.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> OUModel {
        OUModel::new(1.0, 1.0, 0.5, 0.95, 2.4).unwrap()
    }

    #[test]
    fn batch_is_seed_deterministic() {
        let m = model();
        let a = sample_ou_batch(&m, 16, 32, 7).unwrap();
        let b = sample_ou_batch(&m, 16, 32, 7).unwrap();
        assert_eq!(a.values, b.values);
        let c = sample_ou_batch(&m, 16, 32, 8).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn batch_deterministic_across_worker_counts() {
        let m = model();
        std::env::set_var("ORLICZ_THREADS", "1");
        let a = sample_ou_batch(&m, 16, 33, 7).unwrap();
        std::env::set_var("ORLICZ_THREADS", "8");
        let b = sample_ou_batch(&m, 16, 33, 7).unwrap();
        std::env::remove_var("ORLICZ_THREADS");
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn sup_tail_edges() {
        let m = model();
        let b = sample_ou_batch(&m, 32, 500, 3).unwrap();
        let sups = per_path_sup_deviation(&b, &|_| 0.0);
        let max = sups.iter().cloned().fold(0.0, f64::max);
        let tail = empirical_sup_tail(&b, &|_| 0.0, &[1e-12, 1.0, max + 1.0]).unwrap();
        assert_eq!(tail.empirical[0], 1.0);
        assert_eq!(*tail.empirical.last().unwrap(), 0.0);
        for w in tail.empirical.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn averaged_deviation_vanishes_for_matched_drift() {
        let m = model();
        let b = sample_ou_batch(&m, 16, 10, 3).unwrap();
        // constant path equals its own average
        let mut bb = b.clone();
        for v in bb.values.iter_mut() {
            *v = 2.5;
        }
        let stats = averaged_deviation_stat(&bb, &|_| 0.0);
        for s in stats {
            assert!(s.abs() < 1e-12);
        }
        // nonnegative in general
        assert!(averaged_deviation_stat(&b, &|_| 0.0).iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn domination_report_vacuous_when_clamped() {
        let m = model();
        let b = sample_ou_batch(&m, 16, 100, 3).unwrap();
        let bound = |_x: f64| BoundValue::from_raw(5.0, 0.5, 0.5);
        let rep = domination_report(&b, &|_| 0.0, &bound, &[0.5, 1.0, 2.0]).unwrap();
        assert!(rep.dominated.iter().all(|d| *d == Domination::Skipped));
        assert!(rep.all_dominated());
        assert_eq!(rep.x.len(), 3);
    }

    #[test]
    fn refinement_only_increases_sup() {
        // Same batch, sup over a subgrid vs the full grid.
        let m = model();
        let b = sample_ou_batch(&m, 64, 200, 11).unwrap();
        let full = per_path_sup_deviation(&b, &|_| 0.0);
        let n = b.grid.len();
        let coarse: Vec<f64> = (0..b.n_paths)
            .map(|i| {
                b.path(i)
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| j % 2 == 0 && *j < n)
                    .map(|(_, x)| x.abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for (c, f) in coarse.iter().zip(&full) {
            assert!(c <= f);
        }
    }
}
