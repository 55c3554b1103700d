//! Small statistics helpers: running moments, medians, and line fits.

/// Running mean/variance accumulator (Welford).
#[derive(Debug, Clone, Default)]
pub struct Acc {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Acc {
    pub fn new() -> Self {
        Acc::default()
    }

    pub fn push(&mut self, value: f64) {
        self.count += 1.0;
        let delta = value - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (n-1 in the denominator).
    pub fn var(&self) -> f64 {
        if self.count > 1.0 {
            self.m2 / (self.count - 1.0)
        } else {
            f64::NAN
        }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        (self.var() / self.count).sqrt()
    }
}

/// Median of a slice; ties broken by total order on f64 bits, so the result
/// is deterministic. NaNs are rejected.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v: Vec<f64> = values.to_vec();
    assert!(v.iter().all(|x| !x.is_nan()), "median over NaN");
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares line `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Slope of `ln y` against `ln x`, using only strictly positive samples.
/// Returns `None` when fewer than two points survive.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Some(linear_fit(&xs, &ys).0)
}

/// Half-width of the normal-approximation 95% interval for a binomial
/// fraction observed as `successes / trials`.
pub fn binomial_95_halfwidth(successes: usize, trials: usize) -> f64 {
    let n = trials as f64;
    let p = successes as f64 / n;
    1.96 * (p * (1.0 - p) / n).sqrt()
}
