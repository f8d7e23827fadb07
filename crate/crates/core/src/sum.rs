//! Compensated summation.
//!
//! Tail sums `F_n = sum_{i >= n} x_i^2` span many orders of magnitude, so
//! they are accumulated with Neumaier's variant of Kahan summation.

use core::ops::AddAssign;

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Backward tail sums: `out[i] = sum_{j >= i} values[j]`.
pub fn tail_sums(values: &[f64]) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec![0.0; values.len()];
    let mut acc = NeumaierSum::new();
    for (i, v) in values.iter().enumerate().rev() {
        acc.add(*v);
        out[i] = acc.value();
    }
    out
}
