//! Small statistics helpers shared by the experiments.

use serde::{Deserialize, Serialize};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sample mean and its standard error (`sd / sqrt(n)`).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut s = NeumaierSum::default();
    xs.iter().for_each(|&x| s.add(x));
    let mean = s.value() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let mut ss = NeumaierSum::default();
    xs.iter().for_each(|&x| ss.add((x - mean) * (x - mean)));
    let var = ss.value() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn std_dev(xs: &[f64]) -> f64 {
    let (_, se) = mean_se(xs);
    se * (xs.len() as f64).sqrt()
}

/// Empirical quantile with linear interpolation (`p` in `[0, 1]`).
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub points: usize,
}

/// Least squares `y = intercept + slope x`. With `sigma` given, points are
/// weighted by `1 / sigma^2` and the standard errors come from the weights;
/// otherwise they come from the residual variance.
pub fn linear_fit(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return None;
    }
    let w: Vec<f64> = match sigma {
        Some(s) => s.iter().map(|&v| 1.0 / (v * v)).collect(),
        None => vec![1.0; n],
    };
    if w.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = (0..n).map(|i| w[i] * (x[i] - mx) * (y[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let scale = if sigma.is_some() {
        1.0
    } else if n > 2 {
        let rss: f64 = (0..n).map(|i| (y[i] - intercept - slope * x[i]).powi(2)).sum();
        rss / (n - 2) as f64
    } else {
        f64::NAN
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_se: (scale / sxx).sqrt(),
        intercept_se: (scale * (1.0 / sw + mx * mx / sxx)).sqrt(),
        points: n,
    })
}

/// Coefficients `c` with `intercept = sum_i c_i y_i` for the unweighted fit
/// of `y` on `x`. Lets callers push per-replica data through the fit.
pub fn intercept_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    x.iter().map(|v| 1.0 / n - mx * (v - mx) / sxx).collect()
}

/// `sup |F(x) - G(x)|` between the CDF of a lattice law (`atoms` sorted by
/// position, with probabilities) and a continuous CDF, checked on both sides
/// of every jump.
pub fn ks_distance_lattice(atoms: &[(f64, f64)], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut worst = 0.0_f64;
    for &(x, p) in atoms {
        let g = cdf(x);
        worst = worst.max((acc - g).abs());
        acc += p;
        worst = worst.max((acc - g).abs());
    }
    worst
}
