//! Exhaustive path enumeration as a reference for every engine.

use crate::error::{Error, Result};
use crate::model::{check_disorder, Endpoint, ModelParams, Variant};
use crate::walk::enumerate_paths;

/// Largest `N` accepted by [`BruteForce`].
pub const ORACLE_MAX_N: usize = 16;

#[derive(Clone, Debug)]
struct PathRecord {
    /// `log(2^{-N} weight)`.
    log_w: f64,
    end: i32,
    delta: Vec<u8>,
    occupation: usize,
    last_exit: usize,
    max_a_first_half: usize,
    min_a_second_half: usize,
}

/// Every path of length `N` with its Gibbs weight.
#[derive(Clone, Debug)]
pub struct BruteForce {
    params: ModelParams,
    paths: Vec<PathRecord>,
}

/// Compensated sum of `exp(x - anchor)`; returns the log of the full sum.
fn log_sum<'a>(xs: impl Iterator<Item = &'a f64> + Clone) -> f64 {
    let anchor = xs.clone().copied().fold(f64::NEG_INFINITY, f64::max);
    if anchor == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for &x in xs {
        let v = (x - anchor).exp();
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    anchor + (sum + c).ln()
}

impl BruteForce {
    pub fn new(params: &ModelParams, omega: &[f64]) -> Result<Self> {
        params.validate()?;
        check_disorder(omega, params.n)?;
        let n = params.n;
        if n > ORACLE_MAX_N {
            return Err(Error::BudgetExceeded {
                what: "oracle N",
                requested: n,
                cap: ORACLE_MAX_N,
            });
        }
        let mid = n / 2;
        let base = -(n as f64) * std::f64::consts::LN_2;
        let paths = enumerate_paths(n)?
            .map(|p| {
                let delta: Vec<u8> = match params.variant {
                    Variant::Copolymer => p.delta.clone(),
                    Variant::Pinning => p.positions[1..].iter().map(|&x| u8::from(x == 0)).collect(),
                };
                let energy: f64 = delta
                    .iter()
                    .zip(&omega[..n])
                    .filter(|(&d, _)| d == 1)
                    .map(|(_, &w)| w + params.h)
                    .sum();
                let occupation = delta.iter().map(|&d| d as usize).sum();
                let in_a = |i: usize| delta[i - 1] == 1;
                let max_a_first_half = (1..=mid).rev().find(|&i| in_a(i)).unwrap_or(0);
                let min_a_second_half = (mid.max(1)..=n).find(|&i| in_a(i)).unwrap_or(n);
                PathRecord {
                    log_w: base - 2.0 * params.lambda * energy,
                    end: *p.positions.last().expect("N >= 2"),
                    occupation,
                    last_exit: p.last_exit,
                    max_a_first_half,
                    min_a_second_half,
                    delta,
                }
            })
            .collect();
        Ok(Self {
            params: *params,
            paths,
        })
    }

    fn in_endpoint(&self, endpoint: Endpoint) -> impl Iterator<Item = &PathRecord> + Clone {
        self.paths
            .iter()
            .filter(move |p| endpoint == Endpoint::Free || p.end == 0)
    }

    fn log_z_where(&self, endpoint: Endpoint, pred: impl Fn(&PathRecord) -> bool + Clone) -> f64 {
        log_sum(self.in_endpoint(endpoint).filter(move |p| pred(p)).map(|p| &p.log_w))
    }

    pub fn log_z(&self, endpoint: Endpoint) -> f64 {
        self.log_z_where(endpoint, |_| true)
    }

    /// `log Z(endpoint, N_occ = m)` over `m = stride * i` (see
    /// [`crate::partition::OccupationSpectrum`]).
    pub fn spectrum(&self, endpoint: Endpoint) -> Vec<f64> {
        let (stride, len) = match self.params.variant {
            Variant::Copolymer => (2, self.params.n / 2 + 1),
            Variant::Pinning => (1, self.params.n / 2 + 1),
        };
        (0..len)
            .map(|i| self.log_z_where(endpoint, move |p| p.occupation == i * stride))
            .collect()
    }

    pub fn last_exit(&self, ell: usize) -> f64 {
        self.log_z_where(Endpoint::Free, move |p| p.last_exit <= ell)
    }

    pub fn two_sided_exit(&self, ell1: usize, ell2: usize) -> f64 {
        let n = self.params.n;
        self.log_z_where(Endpoint::Constrained, move |p| {
            p.max_a_first_half <= ell1 || p.min_a_second_half >= n - ell2
        })
    }

    /// `E[Delta_n]`, `n = 1..N`.
    pub fn delta_marginals(&self, endpoint: Endpoint) -> Vec<f64> {
        self.delta_marginals_filtered(endpoint, |_| true)
    }

    /// `E[Delta_n | N_occ = m]`, `n = 1..N`.
    pub fn delta_marginals_given(&self, endpoint: Endpoint, m: usize) -> Vec<f64> {
        self.delta_marginals_filtered(endpoint, move |p| p.occupation == m)
    }

    fn delta_marginals_filtered(
        &self,
        endpoint: Endpoint,
        pred: impl Fn(&PathRecord) -> bool + Clone,
    ) -> Vec<f64> {
        let total = self.log_z_where(endpoint, pred.clone());
        (0..self.params.n)
            .map(|i| {
                let pred = pred.clone();
                let part = self.log_z_where(endpoint, move |p| pred(p) && p.delta[i] == 1);
                (part - total).exp()
            })
            .collect()
    }

    /// `P^f(S_N = i - N)` for `i = 0..=2N`.
    pub fn endpoint_marginal(&self) -> Vec<f64> {
        let n = self.params.n as i32;
        let total = self.log_z(Endpoint::Free);
        (-n..=n)
            .map(|x| (self.log_z_where(Endpoint::Free, move |p| p.end == x) - total).exp())
            .collect()
    }
}
