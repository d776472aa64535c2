//! Exact sampling of zeros and excursion signs from the Gibbs measure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{is_copolymer, PartitionTables};
use crate::error::{Error, Result};
use crate::model::Endpoint;
use crate::num::{log1p_exp, Real};
use crate::walk::WalkTables;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "len")]
pub enum FinalSegment {
    None,
    Positive(usize),
    Negative(usize),
}

/// Zeros `0 = t_0 < t_1 < ... <= N`, the sign of each completed excursion and
/// the trailing segment after the last zero.
///
/// For the pinning variant signs carry no weight and are drawn fairly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcursionSkeleton {
    pub n: usize,
    pub zeros: Vec<usize>,
    pub signs: Vec<i8>,
    pub final_segment: FinalSegment,
}

impl ExcursionSkeleton {
    /// Number of monomers in the lower half-plane.
    pub fn occupation(&self) -> usize {
        let mut m: usize = self
            .zeros
            .windows(2)
            .zip(&self.signs)
            .filter(|(_, &s)| s < 0)
            .map(|(w, _)| w[1] - w[0])
            .sum();
        if let FinalSegment::Negative(len) = self.final_segment {
            m += len;
        }
        m
    }

    /// Number of zeros among `S_1..S_N`.
    pub fn zero_count(&self) -> usize {
        self.zeros.len() - 1
    }

    /// `max A`: end of the last negative excursion, `N` when the walk ends
    /// below the axis, `0` when it never goes below.
    pub fn last_exit(&self) -> usize {
        if let FinalSegment::Negative(_) = self.final_segment {
            return self.n;
        }
        self.zeros
            .windows(2)
            .zip(&self.signs)
            .filter(|(_, &s)| s < 0)
            .map(|(w, _)| w[1])
            .max()
            .unwrap_or(0)
    }
}

/// Draws an index with probability proportional to `exp(logw[i])`.
fn draw_index<T: Real, R: Rng + ?Sized>(logw: &[T], rng: &mut R) -> usize {
    let max = logw.iter().copied().fold(T::neg_infinity(), T::max);
    let weights: Vec<f64> = logw.iter().map(|&w| (w - max).exp().to_f64_lossy()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).expect("some weight is positive")
}

/// Probability that a completed or final copolymer segment is negative:
/// `psi / (1 + psi)`.
fn negative_prob<T: Real>(log_psi: T) -> f64 {
    (log_psi - log1p_exp(log_psi)).exp().to_f64_lossy()
}

/// Samples a skeleton from the measure behind `pt` (built by the excursion
/// or position engine with the same parameters).
pub fn sample_skeleton<T: Real, R: Rng + ?Sized>(
    pt: &PartitionTables<T>,
    tables: &WalkTables<T>,
    rng: &mut R,
) -> Result<ExcursionSkeleton> {
    let params = &pt.params;
    tables.require(params.n)?;
    if pt.log_z_c.len() != params.n / 2 + 1 {
        return Err(Error::invalid("tables", "partition tables do not match N"));
    }
    let n = params.n;
    let half = n / 2;
    let copolymer = is_copolymer(params);
    let ln2 = T::LN_2();
    let mut final_segment = FinalSegment::None;
    let mut last_zero = n;
    if params.endpoint == Endpoint::Free {
        let logw: Vec<T> = (0..=half)
            .map(|i| {
                let k = 2 * i;
                if k == n {
                    pt.log_z_c[i]
                } else if copolymer {
                    pt.log_z_c[i] + tables.log_p_plus(n - k) + log1p_exp(pt.log_psi(k, n))
                } else {
                    pt.log_z_c[i] + tables.log_u(n - k)
                }
            })
            .collect();
        let i = draw_index(&logw, rng);
        last_zero = 2 * i;
        if last_zero < n {
            let neg = if copolymer {
                rng.random::<f64>() < negative_prob(pt.log_psi(last_zero, n))
            } else {
                rng.random::<bool>()
            };
            let len = n - last_zero;
            final_segment = if neg {
                FinalSegment::Negative(len)
            } else {
                FinalSegment::Positive(len)
            };
        }
    }
    let mut zeros = vec![last_zero];
    let mut signs = Vec::new();
    let mut t = last_zero;
    while t > 0 {
        let j = t / 2;
        let logw: Vec<T> = (0..j)
            .map(|i| {
                let k = 2 * i;
                let base = pt.log_z_c[i] + tables.log_f(t - k);
                if copolymer {
                    base + log1p_exp(pt.log_psi(k, t)) - ln2
                } else {
                    base
                }
            })
            .collect();
        let k = 2 * draw_index(&logw, rng);
        let neg = if copolymer {
            rng.random::<f64>() < negative_prob(pt.log_psi(k, t))
        } else {
            rng.random::<bool>()
        };
        signs.push(if neg { -1 } else { 1 });
        zeros.push(k);
        t = k;
    }
    zeros.reverse();
    signs.reverse();
    Ok(ExcursionSkeleton {
        n,
        zeros,
        signs,
        final_segment,
    })
}
