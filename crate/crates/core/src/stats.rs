//! Small statistical helpers shared by estimators and checks.

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum / self.n as f64
    }

    /// Standard error of the mean (sample variance with `n - 1`).
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Standard error of an empirical frequency `p` over `n` trials.
pub fn proportion_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let hi = (i + 1) as f64 / n - f;
            let lo = f - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample K-S statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Hill estimate of the tail index `alpha` from the `k` largest values.
///
/// Returns `None` unless `1 <= k < n` and the `(k+1)`-th largest value is positive.
pub fn hill_tail_index(sample: &[f64], k: usize) -> Option<f64> {
    if k == 0 || k >= sample.len() {
        return None;
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    let anchor = xs[k];
    if !(anchor > 0.0) {
        return None;
    }
    let mean_log: f64 = xs[..k].iter().map(|&x| (x / anchor).ln()).sum::<f64>() / k as f64;
    (mean_log > 0.0).then(|| 1.0 / mean_log)
}

/// Pearson correlation of two equal-length series.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}
