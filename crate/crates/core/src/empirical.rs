//! Finite point measures and their distance to a continuous law.

use serde::{Deserialize, Serialize};

/// Uniform probability measure on a sorted list of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    points: Vec<f64>,
}

impl EmpiricalMeasure {
    /// NaN points are dropped.
    pub fn new(mut points: Vec<f64>) -> Self {
        points.retain(|p| !p.is_nan());
        points.sort_by(f64::total_cmp);
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `#{points <= x} / n`; 0 for an empty measure.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let k = self.points.partition_point(|&p| p <= x);
        k as f64 / self.points.len() as f64
    }

    /// `(1/n) sum x_i^k`.
    pub fn moment(&self, k: u32) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().map(|p| p.powi(k as i32)).sum::<f64>() / self.points.len() as f64
    }

    /// `sup_x |F_emp(x) - cdf(x)|` for a continuous `cdf`. The supremum is
    /// attained at a jump, so both one-sided limits are checked there; tied
    /// points form a single jump.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.points.len();
        if n == 0 {
            return 1.0;
        }
        let nf = n as f64;
        let mut worst = 0.0f64;
        let mut i = 0;
        while i < n {
            let x = self.points[i];
            let mut j = i;
            while j < n && self.points[j] == x {
                j += 1;
            }
            let c = cdf(x);
            worst = worst.max((c - i as f64 / nf).abs());
            worst = worst.max((j as f64 / nf - c).abs());
            i = j;
        }
        worst
    }
}
