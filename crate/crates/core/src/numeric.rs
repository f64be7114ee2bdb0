//! Numerical building blocks shared by the evidence modules: stable log-space
//! reductions, compensated summation, fixed quadrature rules and the exact
//! binomial upper confidence limit used by every Monte Carlo pass/fail rule.

use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

/// Two log-evidence values closer than this are treated as the same atom.
/// Threshold comparisons count such ties as exceedances.
pub const LOG_TIE_TOLERANCE: f64 = 1e-9;

/// Slack granted to exact (enumerated) probability sums when they are
/// compared against a level.
pub const ACCUMULATION_TOLERANCE: f64 = 1e-12;

/// `ln(sum(exp(x_i)))` with the usual max shift.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut sum = NeumaierSum::default();
    for &v in values {
        sum.add((v - max).exp());
    }
    max + sum.value().ln()
}

/// Compensated (Neumaier) summation. Terms are reduced in the order they are
/// added, so a fixed insertion order gives bit-stable results.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[lower, upper]`.
pub fn gauss_legendre(n: usize, lower: f64, upper: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mid = 0.5 * (upper + lower);
    let half = 0.5 * (upper - lower);
    let nf = n as f64;
    for i in 1..=n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 - 0.25) / (nf + 0.5)).cos();
        let mut deriv;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            deriv = nf * (z * p1 - p2) / (z * z - 1.0);
            let previous = z;
            z = previous - p1 / deriv;
            if (z - previous).abs() < 1e-15 {
                break;
            }
        }
        nodes[i - 1] = mid - half * z;
        nodes[n - i] = mid + half * z;
        let w = 2.0 * half / ((1.0 - z * z) * deriv * deriv);
        weights[i - 1] = w;
        weights[n - i] = w;
    }
    (nodes, weights)
}

/// Nodes and weights for `E[f(Y)]`, `Y ~ N(mean, variance)`, from the
/// `n`-point Gauss–Hermite rule. Weights sum to one.
pub fn gauss_hermite_normal(n: usize, mean: f64, variance: f64) -> (Vec<f64>, Vec<f64>) {
    const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut deriv;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PI_POW_NEG_QUARTER, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            deriv = (2.0 * nf).sqrt() * p2;
            let previous = z;
            z = previous - p1 / deriv;
            if (z - previous).abs() <= 1e-14 {
                x[i] = z;
                x[n - 1 - i] = -z;
                w[i] = 2.0 / (deriv * deriv);
                w[n - 1 - i] = w[i];
                break;
            }
        }
    }
    let sd = variance.sqrt();
    let scale = std::f64::consts::PI.sqrt();
    let nodes = x.iter().map(|&xi| mean + std::f64::consts::SQRT_2 * sd * xi).collect();
    let weights = w.iter().map(|&wi| wi / scale).collect();
    (nodes, weights)
}

/// One-sided exact binomial (Clopper–Pearson) upper confidence limit for a
/// success probability after `successes` out of `trials`.
pub fn clopper_pearson_upper(successes: u64, trials: u64, confidence: f64) -> f64 {
    assert!(trials > 0, "at least one trial is required");
    assert!(successes <= trials);
    if successes == trials {
        return 1.0;
    }
    let tail = 1.0 - confidence;
    let (k, n) = (successes as f64, trials as f64);
    // P(X <= k | p) = I_{1-p}(n - k, k + 1), decreasing in p.
    let cdf = |p: f64| beta_reg(n - k, k + 1.0, 1.0 - p);
    let (mut lo, mut hi) = (successes as f64 / trials as f64, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Mean and standard error of a sample, reduced in slice order.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().copied().collect::<NeumaierSum>().value() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .collect::<NeumaierSum>()
        .value();
    let var = ss / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
