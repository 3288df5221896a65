//! Error-compensated accumulation.
//!
//! Suffix sums of `a_j x_j` with `a_j ~ 1/j` lose several digits at
//! truncation sizes around 10^6 when accumulated naively. Everything in the
//! crate that sums long series goes through [`NeumaierSum`].

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = NeumaierSum::new();
    acc.extend(iter);
    acc.value()
}

/// `(sum |x_i|^p)^(1/p)` with compensated accumulation.
pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        sum(x.iter().map(|v| v * v)).sqrt()
    } else {
        sum(x.iter().map(|v| v.abs().powf(p))).powf(1.0 / p)
    }
}

/// Compensated dot product.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    sum(x.iter().zip(y).map(|(a, b)| a * b))
}
