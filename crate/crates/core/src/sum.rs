//! Compensated (Neumaier) accumulation with a fixed traversal order.
//!
//! Every reduction in the crate goes through these helpers so that results do
//! not depend on how work was split across threads: parallel code produces
//! per-row partials into an ordered buffer and the buffer is then folded here,
//! left to right.

/// Neumaier's variant of Kahan summation.
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

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn ordered_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(iter);
    acc.value()
}

/// Compensated dot product in index order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    ordered_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Euclidean norm with compensated accumulation of the squares.
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        // naive summation loses the 1.0 entirely
        let values = [1e100, 1.0, -1e100];
        assert_eq!(values.iter().sum::<f64>(), 0.0);
        assert_eq!(ordered_sum(values), 1.0);
    }

    #[test]
    fn many_small_terms() {
        let n = 1_000_000;
        let s = ordered_sum(std::iter::repeat_n(0.1, n));
        assert!((s - 100_000.0).abs() < 1e-9);
    }

    #[test]
    fn dot_and_norm() {
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 32.0);
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
    }
}
