//! Disorder laws and the large-deviation quantities built from them.

mod sample;
mod stretch;

pub use sample::{read_binary, write_binary, write_csv, DisorderStream, DisorderVector};
pub use stretch::{atypical_stretch_scan, longest_stretch_profile, scan_stream, StretchScan};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Symmetric unit-variance law of a single `omega_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderLaw {
    /// `±1` with probability 1/2.
    BernoulliPm1,
    /// Standard normal.
    GaussianStd,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformBounded,
}

impl DisorderLaw {
    pub const ALL: [DisorderLaw; 3] = [
        DisorderLaw::BernoulliPm1,
        DisorderLaw::GaussianStd,
        DisorderLaw::UniformBounded,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            DisorderLaw::BernoulliPm1 => "bernoulli",
            DisorderLaw::GaussianStd => "gaussian",
            DisorderLaw::UniformBounded => "uniform",
        }
    }

    pub(crate) fn byte_tag(self) -> u8 {
        match self {
            DisorderLaw::BernoulliPm1 => 1,
            DisorderLaw::GaussianStd => 2,
            DisorderLaw::UniformBounded => 3,
        }
    }

    pub(crate) fn from_byte_tag(b: u8) -> Option<Self> {
        match b {
            1 => Some(DisorderLaw::BernoulliPm1),
            2 => Some(DisorderLaw::GaussianStd),
            3 => Some(DisorderLaw::UniformBounded),
            _ => None,
        }
    }

    /// `ess sup omega_1` (`+inf` for the Gaussian).
    pub fn ess_sup(self) -> f64 {
        match self {
            DisorderLaw::BernoulliPm1 => 1.0,
            DisorderLaw::GaussianStd => f64::INFINITY,
            DisorderLaw::UniformBounded => SQRT_3,
        }
    }

    /// `log E[exp(t omega_1)]`.
    pub fn log_mgf<T: Real>(self, t: T) -> T {
        match self {
            DisorderLaw::BernoulliPm1 => {
                let a = t.abs();
                a + (-(a + a)).exp().ln_1p() - T::LN_2()
            }
            DisorderLaw::GaussianStd => t * t / T::lit(2.0),
            DisorderLaw::UniformBounded => {
                let a = t.abs() * T::lit(SQRT_3);
                if a < T::lit(1e-3) {
                    let a2 = a * a;
                    a2 / T::lit(6.0) - a2 * a2 / T::lit(180.0)
                } else {
                    // log(sinh a / a)
                    a + (-(-(a + a)).exp()).ln_1p() - T::LN_2() - a.ln()
                }
            }
        }
    }

    /// Derivative `(log M)'(t)`, the mean of the tilted law.
    pub fn log_mgf_derivative<T: Real>(self, t: T) -> T {
        match self {
            DisorderLaw::BernoulliPm1 => t.tanh(),
            DisorderLaw::GaussianStd => t,
            DisorderLaw::UniformBounded => {
                let s3 = T::lit(SQRT_3);
                let a = t * s3;
                if a.abs() < T::lit(1e-3) {
                    t - t * t * t / T::lit(5.0)
                } else {
                    s3 / a.tanh() - T::one() / t
                }
            }
        }
    }
}

impl std::str::FromStr for DisorderLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bernoulli" | "bernoulli_pm1" | "pm1" => Ok(DisorderLaw::BernoulliPm1),
            "gaussian" | "gaussian_std" | "normal" => Ok(DisorderLaw::GaussianStd),
            "uniform" | "uniform_bounded" => Ok(DisorderLaw::UniformBounded),
            other => Err(Error::invalid(
                "law",
                format!("expected bernoulli|gaussian|uniform, got `{other}`"),
            )),
        }
    }
}

/// Rigorous bounds on the critical point and the annealed rate `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalBounds {
    pub lambda: f64,
    /// `log M(4 lambda/3) / (4 lambda/3)`.
    pub h_lower: f64,
    /// `log M(2 lambda) / (2 lambda)`.
    pub h_upper: f64,
    /// `2 lambda h - log M(2 lambda)` for the supplied `h`.
    pub beta: f64,
}

pub fn critical_bounds(law: DisorderLaw, lambda: f64, h: f64) -> Result<CriticalBounds> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    let t_lo = 4.0 * lambda / 3.0;
    let t_hi = 2.0 * lambda;
    Ok(CriticalBounds {
        lambda,
        h_lower: law.log_mgf(t_lo) / t_lo,
        h_upper: law.log_mgf(t_hi) / t_hi,
        beta: annealed_beta(law, lambda, h),
    })
}

/// `beta = 2 lambda h - log M(2 lambda)`; zero when `lambda = 0`.
pub fn annealed_beta(law: DisorderLaw, lambda: f64, h: f64) -> f64 {
    2.0 * lambda * h - law.log_mgf(2.0 * lambda)
}

/// `h_upper(lambda) = log M(2 lambda) / (2 lambda)`.
pub fn h_upper(law: DisorderLaw, lambda: f64) -> f64 {
    law.log_mgf(2.0 * lambda) / (2.0 * lambda)
}

/// Upper end of the optimization window for the tilt parameter.
const TILT_MAX: f64 = 64.0;

/// Cramér rate of `omega_1 + h` at a level `q < h`:
/// `sup_{t >= 0} [t (h - q) - log M(t)]`.
///
/// Closed forms for the Bernoulli and Gaussian laws; the uniform law goes
/// through [`cramer_rate_numeric`]. Returns `+inf` below the support.
pub fn cramer_rate(law: DisorderLaw, h: f64, q: f64) -> Result<f64> {
    if !(q < h) {
        return Err(Error::invalid(
            "q",
            format!("the rate is taken at a level q < h, got q = {q}, h = {h}"),
        ));
    }
    let d = h - q;
    match law {
        DisorderLaw::GaussianStd => Ok(d * d / 2.0),
        DisorderLaw::BernoulliPm1 => {
            if d > 1.0 {
                return Ok(f64::INFINITY);
            }
            // Fraction of +1 values giving mean -d, against a fair coin.
            let p = (1.0 - d) / 2.0;
            let term = |x: f64| if x > 0.0 { x * (2.0 * x).ln() } else { 0.0 };
            Ok(term(p) + term(1.0 - p))
        }
        DisorderLaw::UniformBounded => {
            if d >= SQRT_3 {
                return Ok(f64::INFINITY);
            }
            Ok(cramer_rate_numeric(law, d))
        }
    }
}

/// Numerical Legendre transform `sup_{t in [0, 64]} [t d - log M(t)]` by
/// bisection on the stationarity condition `(log M)'(t) = d`.
pub fn cramer_rate_numeric(law: DisorderLaw, d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let t_star = if law.log_mgf_derivative(TILT_MAX) <= d {
        TILT_MAX
    } else {
        let (mut lo, mut hi) = (0.0_f64, TILT_MAX);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if law.log_mgf_derivative(mid) < d {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi.max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    (t_star * d - law.log_mgf(t_star)).max(0.0)
}

/// The exponent `delta(lambda, h) = sup_{q < h} (-2 lambda q - S(q)) / S(q)`,
/// with `S` the Cramér rate of `omega_1 + h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaExponent {
    pub delta: f64,
    /// Maximizing level (`NaN` when the supremum is not attained).
    pub q_star: f64,
    /// `sup_q (-2 lambda q - S(q))` found numerically.
    pub legendre_numeric: f64,
    /// Its closed form `-2 lambda h + log M(2 lambda)`.
    pub legendre_closed: f64,
}

pub fn delta_exponent(law: DisorderLaw, lambda: f64, h: f64) -> Result<DeltaExponent> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::invalid("h", format!("must be >= 0, got {h}")));
    }
    let legendre_closed = -2.0 * lambda * h + law.log_mgf(2.0 * lambda);
    // Work in the deviation d = h - q > 0.
    let rate = |d: f64| cramer_rate(law, h, h - d).unwrap_or(f64::INFINITY);
    let d_max = match law {
        DisorderLaw::BernoulliPm1 => 1.0,
        DisorderLaw::UniformBounded => SQRT_3 * (1.0 - 1e-12),
        DisorderLaw::GaussianStd => (8.0 * (h + lambda)).max(16.0),
    };

    let legendre = |d: f64| 2.0 * lambda * d - rate(d) - 2.0 * lambda * h;
    let legendre_numeric = maximize(legendre, 1e-12, d_max).1;

    if h == 0.0 {
        // The ratio diverges as q -> 0^- whenever lambda > 0.
        return Ok(DeltaExponent {
            delta: f64::INFINITY,
            q_star: f64::NAN,
            legendre_numeric,
            legendre_closed,
        });
    }
    let ratio = |d: f64| {
        let s = rate(d);
        if !s.is_finite() || s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (-2.0 * lambda * (h - d) - s) / s
    };
    let (d_star, delta) = maximize(ratio, 1e-9, d_max);
    Ok(DeltaExponent {
        delta,
        q_star: h - d_star,
        legendre_numeric,
        legendre_closed,
    })
}

/// Grid search on a geometric-plus-linear grid followed by golden-section
/// polishing. Ties go to the smaller argument (the larger level `q`).
fn maximize(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let n_geo = 1500;
    let n_lin = 2500;
    let mut grid = Vec::with_capacity(n_geo + n_lin + 1);
    let ratio = (hi / lo).ln();
    for i in 0..n_geo {
        grid.push(lo * (ratio * i as f64 / n_geo as f64).exp());
    }
    for i in 0..=n_lin {
        grid.push(lo + (hi - lo) * i as f64 / n_lin as f64);
    }
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for i in 1..grid.len() {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (mut x, mut fx) = (grid[best], vals[best]);
    if b > a {
        let (gx, gf) = golden_section(&f, a, b);
        if gf > fx {
            x = gx;
            fx = gf;
        }
    }
    (x, fx)
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
