//! Compensated (Neumaier) accumulation for long positive series.

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

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_addends_lost_by_naive_sum() {
        let values = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = values.iter().sum();
        let compensated: CompensatedSum = values.iter().copied().collect();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated.value(), 2.0);
    }

    #[test]
    fn harmonic_tail_matches_reference() {
        // sum_{n=1}^{10^6} 1/n^2, reference from 40-digit arithmetic
        let s: CompensatedSum = (1..=1_000_000u64)
            .rev()
            .map(|n| 1.0 / (n as f64).powi(2))
            .collect();
        let mut fwd = CompensatedSum::new();
        fwd.extend((1..=1_000_000u64).map(|n| 1.0 / (n as f64).powi(2)));
        assert!((s.value() - fwd.value()).abs() < 1e-15);
        assert!((fwd.value() - 1.644_933_066_848_726_4).abs() < 1e-14);
    }
}
