//! Order-stable summary helpers. All reductions run serially over slices in
//! their given order.

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
}

impl McEstimate {
    /// True when `|value − target| ≤ k·se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Mean with the standard error of the mean.
pub fn mean_se(xs: &[f64]) -> McEstimate {
    McEstimate {
        value: mean(xs),
        se: (variance(xs) / xs.len() as f64).sqrt(),
    }
}

/// Sample variance with the delta-method standard error
/// `sqrt((m₄ − s⁴)/n)` of the variance estimate.
pub fn variance_se(xs: &[f64]) -> McEstimate {
    let n = xs.len() as f64;
    let m = mean(xs);
    let v = variance(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    McEstimate {
        value: v,
        se: ((m4 - v * v).max(0.0) / n).sqrt(),
    }
}

/// Running first and second moments; combined in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean_se(&self) -> McEstimate {
        let n = self.count as f64;
        let m = self.sum / n;
        let var = ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0);
        McEstimate {
            value: m,
            se: (var / n).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(variance(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0] {
            m.push(x);
        }
        let e = m.mean_se();
        assert!((e.value - 2.0).abs() < 1e-15);
        assert!((e.se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(e.within(2.5, 1.0));
    }
}
