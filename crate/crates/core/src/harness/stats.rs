//! Accumulators and confidence intervals.

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }
}

/// Running first and second moments of a real sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum.value() / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq.value() - self.sum.value().powi(2) / n) / (n - 1.0)).max(0.0)
    }

    /// Half-width of the 95% normal confidence interval on the mean.
    pub fn ci95(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        1.96 * (self.variance() / self.count as f64).sqrt()
    }
}

/// 95% half-width for an error rate `errors / n`. With no errors, returns
/// the rule-of-three upper bound `3/n`.
pub fn binomial_ci95(errors: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    if errors == 0 {
        return 3.0 / n as f64;
    }
    let p = errors as f64 / n as f64;
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Standard deviation of an error-rate estimate.
pub fn binomial_sigma(errors: u64, n: u64) -> f64 {
    let p = errors as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        let mut a = Moments::default();
        let mut b = Moments::default();
        a.push(1.0);
        a.push(2.0);
        b.push(3.0);
        b.push(4.0);
        a.merge(&b);
        assert_eq!(a.mean(), m.mean());
        assert!((a.variance() - m.variance()).abs() < 1e-15);
    }

    #[test]
    fn binomial() {
        assert_eq!(binomial_ci95(0, 1000), 0.003);
        let ci = binomial_ci95(100, 100_000);
        assert!((ci - 1.96 * (0.001f64 * 0.999 / 1e5).sqrt()).abs() < 1e-15);
    }
}
