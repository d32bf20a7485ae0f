//! Compensated summation.

/// Neumaier's variant of Kahan summation.
///
/// The error of the running total stays at a few ulps of the result,
/// independent of the number of terms, which matters for the telescoping
/// sums of this crate where the total is much smaller than the terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
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

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_total_from_large_terms() {
        let values = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(values), 1.0);
        assert_eq!(values.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn harmonic_telescoping() {
        // Σ_{h=1}^{n-1} 1/(h(h+1)) = 1 - 1/n
        let n = 100_000usize;
        let s = compensated_sum((1..n).map(|h| 1.0 / (h as f64 * (h + 1) as f64)));
        assert!((s - (1.0 - 1.0 / n as f64)).abs() <= 2.0 * f64::EPSILON);
    }
}
