//! Residual accumulation over sample points and index tuples.

use crate::fields::Tensor;

/// Tracks `max|L − R|` and `max|L|` across many comparisons.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Residual {
    pub max_diff: f64,
    pub max_lhs: f64,
    pub worst_point: Vec<f64>,
    pub worst_indices: Vec<usize>,
}

impl Residual {
    pub fn new() -> Self {
        Residual::default()
    }

    /// Records the comparison `lhs` vs `rhs` at `point`.
    pub fn compare(&mut self, lhs: &Tensor, rhs: &Tensor, point: &[f64]) {
        let diff = lhs.sub(rhs);
        self.record(&diff, point);
        self.max_lhs = self.max_lhs.max(lhs.max_abs());
    }

    /// Records a tensor expected to vanish.
    pub fn zero(&mut self, t: &Tensor, point: &[f64]) {
        self.record(t, point);
    }

    fn record(&mut self, diff: &Tensor, point: &[f64]) {
        let (m, idx) = diff.argmax_abs();
        if m > self.max_diff || self.worst_point.is_empty() {
            self.max_diff = self.max_diff.max(m);
            self.worst_point = point.to_vec();
            self.worst_indices = idx;
        }
    }

    pub fn scalar(&mut self, lhs: f64, rhs: f64, point: &[f64]) {
        let m = (lhs - rhs).abs();
        let m = if m.is_nan() { f64::INFINITY } else { m };
        if m > self.max_diff || self.worst_point.is_empty() {
            self.max_diff = self.max_diff.max(m);
            self.worst_point = point.to_vec();
            self.worst_indices = vec![];
        }
        self.max_lhs = self.max_lhs.max(lhs.abs());
    }

    pub fn merge(&mut self, other: &Residual) {
        if other.max_diff > self.max_diff || self.worst_point.is_empty() {
            self.max_diff = self.max_diff.max(other.max_diff);
            self.worst_point = other.worst_point.clone();
            self.worst_indices = other.worst_indices.clone();
        }
        self.max_lhs = self.max_lhs.max(other.max_lhs);
    }

    /// `max|L − R| / (1 + max|L|)`.
    pub fn normalized(&self) -> f64 {
        self.max_diff / (1.0 + self.max_lhs)
    }

    pub fn absolute(&self) -> f64 {
        self.max_diff
    }
}

/// Normalized residual of a single comparison.
pub fn normalized(lhs: &Tensor, rhs: &Tensor) -> f64 {
    lhs.sub(rhs).max_abs() / (1.0 + lhs.max_abs())
}
