//! Discretized parameter sets: grid points with positive measure weights.

use crate::error::{Error, Result};

/// What the grid discretizes: a continuum interval or a genuinely finite set.
///
/// Ball measures differ: on an interval the measure of `[t-r, t+r]` is its
/// clipped length, while a discrete set sums the weights of points within `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Interval { lo: f64, hi: f64 },
    Discrete,
}

/// A parameter set `S` with metric `|u - v|` and a finite measure given by
/// per-point weights.
#[derive(Clone, Debug)]
pub struct MeasureGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    total_measure: f64,
    support: Support,
}

impl MeasureGrid {
    /// Uniform midpoint discretization of Lebesgue measure on `[0, t_horizon]`
    /// with `n` points of weight `t_horizon / n` each.
    pub fn lebesgue(t_horizon: f64, n: usize) -> Result<Self> {
        if !(t_horizon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lebesgue: horizon must be positive, got {t_horizon}"
            )));
        }
        Self::lebesgue_on(0.0, t_horizon, n)
    }

    /// A finite discrete measure on explicitly listed points.
    pub fn discrete(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total = weights.iter().sum();
        Self::from_parts(points, weights, total, Support::Discrete)
    }

    pub(crate) fn from_parts(
        points: Vec<f64>,
        weights: Vec<f64>,
        total_measure: f64,
        support: Support,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("grid must be nonempty".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points vs {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "grid points must be strictly increasing".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "grid weights must be positive and finite".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if !(total_measure > 0.0) || (sum - total_measure).abs() > 1e-12 * total_measure {
            return Err(Error::InvalidParameter(format!(
                "weights sum {sum} does not match total measure {total_measure}"
            )));
        }
        if let Support::Interval { lo, hi } = support {
            if !(lo < hi) {
                return Err(Error::InvalidParameter("empty interval support".into()));
            }
        }
        Ok(Self {
            points,
            weights,
            total_measure,
            support,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Measure of the closed metric ball `{s in S : |s - t| <= r}`.
    pub fn ball_measure(&self, t: f64, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        match self.support {
            Support::Interval { lo, hi } => ((t + r).min(hi) - (t - r).max(lo)).max(0.0),
            Support::Discrete => self
                .points
                .iter()
                .zip(&self.weights)
                .filter(|(p, _)| (*p - t).abs() <= r)
                .map(|(_, w)| w)
                .sum(),
        }
    }

    /// `sup_{s in S} |t - s|`, the radius needed for a ball at `t` to cover S.
    pub fn sup_distance(&self, t: f64) -> f64 {
        match self.support {
            Support::Interval { lo, hi } => (t - lo).max(hi - t),
            Support::Discrete => self
                .points
                .iter()
                .map(|p| (p - t).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Extremes and a central point of the support, used when a sup over `t`
    /// is evaluated on a finite probe grid. For discrete supports all anchors
    /// are actual members of the set.
    pub fn probe_anchors(&self) -> [f64; 3] {
        match self.support {
            Support::Interval { lo, hi } => [lo, 0.5 * (lo + hi), hi],
            Support::Discrete => [
                self.points[0],
                self.points[self.points.len() / 2],
                *self.points.last().unwrap(),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_weights_sum_to_horizon() {
        let g = MeasureGrid::lebesgue(2.0, 128).unwrap();
        assert_eq!(g.len(), 128);
        assert!((g.weights().iter().sum::<f64>() - 2.0).abs() < 1e-12);
        assert!((g.total_measure() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ball_measure_clips_to_interval() {
        let g = MeasureGrid::lebesgue(1.0, 16).unwrap();
        assert!((g.ball_measure(0.5, 0.1) - 0.2).abs() < 1e-15);
        assert!((g.ball_measure(0.05, 0.1) - 0.15).abs() < 1e-15);
        assert!((g.ball_measure(0.5, 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(g.ball_measure(0.5, -0.5), 0.0);
    }

    #[test]
    fn discrete_ball_measure_sums_weights() {
        let g = MeasureGrid::discrete(vec![0.0, 1.0, 2.0], vec![0.5, 0.25, 0.25]).unwrap();
        assert!((g.ball_measure(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((g.ball_measure(1.0, 0.5) - 0.25).abs() < 1e-15);
        assert!((g.total_measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsorted_points() {
        let err = MeasureGrid::discrete(vec![1.0, 0.5], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }
}
