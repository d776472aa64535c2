//! Renewal recursion over returns to zero.

use serde::{Deserialize, Serialize};

use super::{is_copolymer, log_psi, log_site_weight, prefix_sums, validate_inputs, Engine, PartitionTables};
use crate::error::{Error, Result};
use crate::model::{Endpoint, ModelParams, Variant};
use crate::num::{log_sum_exp, LogAccumulator, Real};
use crate::walk::WalkTables;

/// Default cap on `N` for the cubic occupation spectrum.
pub const DEFAULT_SPECTRUM_BUDGET: usize = 600;

/// Excursion engine.
///
/// Copolymer: `Z^c_n = sum_{k < n} Z^c_k f_{n-k} (1 + psi(k, n)) / 2` and
/// `Z^f_N = sum_{k < N} Z^c_k p_plus(N - k) (1 + psi(k, N)) + Z^c_N`.
/// Pinning: `Z^c_n = sum_k Z^c_k f_{n-k} e^{-2 lambda (omega_n + h)}` and
/// `Z^f_N = sum_k Z^c_k u_{N-k}`.
pub fn partition<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: &WalkTables<T>,
) -> Result<PartitionTables<T>> {
    validate_inputs(params, omega, Some(tables))?;
    let n = params.n;
    let half = n / 2;
    let prefix = prefix_sums(omega, params.h, n);
    let lambda = T::lit(params.lambda);
    let ln2 = T::LN_2();
    let mut lzc = Vec::with_capacity(half + 1);
    lzc.push(T::zero());
    let copolymer = is_copolymer(params);
    for j in 1..=half {
        let t = 2 * j;
        let mut acc = LogAccumulator::new();
        if copolymer {
            for i in 0..j {
                let k = 2 * i;
                let base = lzc[i] + tables.log_f(t - k) - ln2;
                acc.push(base);
                acc.push(base + log_psi(&prefix, lambda, k, t));
            }
        } else {
            let w = log_site_weight(&prefix, lambda, t);
            for i in 0..j {
                acc.push(lzc[i] + tables.log_f(t - 2 * i) + w);
            }
        }
        lzc.push(acc.value());
    }
    let log_z_f = free_from_constrained(&lzc, &prefix, lambda, copolymer, tables, n);
    Ok(PartitionTables {
        params: *params,
        log_z_c: lzc,
        log_z_f,
        engine: Engine::Excursion,
        prefix,
    })
}

/// `log Z^f_n` from `log Z^c_k`, `k <= n`.
pub(super) fn free_from_constrained<T: Real>(
    lzc: &[T],
    prefix: &[T],
    lambda: T,
    copolymer: bool,
    tables: &WalkTables<T>,
    n: usize,
) -> T {
    let half = n / 2;
    let mut acc = LogAccumulator::new();
    if copolymer {
        for i in 0..half {
            let k = 2 * i;
            let base = lzc[i] + tables.log_p_plus(n - k);
            acc.push(base);
            acc.push(base + log_psi(prefix, lambda, k, n));
        }
        acc.push(lzc[half]);
    } else {
        for i in 0..=half {
            acc.push(lzc[i] + tables.log_u(n - 2 * i));
        }
    }
    acc.value()
}

/// `log Z(endpoint, N_occ = m)` over `m = stride * i`.
///
/// For the copolymer `N_occ` counts monomers in the lower half-plane
/// (`stride = 2`); for the pinning variant it counts zeros among
/// `S_1..S_N` (`stride = 1`, at most `N/2`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OccupationSpectrum<T> {
    pub endpoint: Endpoint,
    pub variant: Variant,
    pub n: usize,
    pub stride: usize,
    pub log_z_by_m: Vec<T>,
}

impl<T: Real> OccupationSpectrum<T> {
    pub fn m_values(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.log_z_by_m.len()).map(move |i| i * self.stride)
    }

    /// `log Z(N_occ = m)`, or `None` when `m` is not on the grid.
    pub fn log_z_at(&self, m: usize) -> Option<T> {
        if m % self.stride != 0 {
            return None;
        }
        self.log_z_by_m.get(m / self.stride).copied()
    }

    /// `(1/N) log Z(N_occ = m)`.
    pub fn free_energy_at(&self, m: usize) -> Option<T> {
        self.log_z_at(m).map(|v| v / T::from_usize_lossy(self.n))
    }

    pub fn log_total(&self) -> T {
        log_sum_exp(&self.log_z_by_m)
    }

    /// Gibbs law of `N_occ`.
    pub fn probabilities(&self) -> Vec<T> {
        let total = self.log_total();
        self.log_z_by_m.iter().map(|&v| (v - total).exp()).collect()
    }

    /// `P(N_occ >= m)` on the grid.
    pub fn tail_probabilities(&self) -> Vec<T> {
        let p = self.probabilities();
        let mut out = vec![T::zero(); p.len()];
        let mut acc = T::zero();
        for i in (0..p.len()).rev() {
            acc += p[i];
            out[i] = acc.min(T::one());
        }
        out
    }

    pub fn mean(&self) -> T {
        self.probabilities()
            .iter()
            .enumerate()
            .map(|(i, &p)| p * T::from_usize_lossy(i * self.stride))
            .sum()
    }
}

pub fn occupation_spectrum<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: &WalkTables<T>,
) -> Result<OccupationSpectrum<T>> {
    occupation_spectrum_with_budget(params, omega, tables, DEFAULT_SPECTRUM_BUDGET)
}

/// Cubic dynamic program over (time, occupation).
pub fn occupation_spectrum_with_budget<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: &WalkTables<T>,
    budget: usize,
) -> Result<OccupationSpectrum<T>> {
    validate_inputs(params, omega, Some(tables))?;
    if params.n > budget {
        return Err(Error::BudgetExceeded {
            what: "spectrum N",
            requested: params.n,
            cap: budget,
        });
    }
    let prefix = prefix_sums(omega, params.h, params.n);
    let log_z_by_m = if is_copolymer(params) {
        copolymer_spectrum(params, &prefix, tables)
    } else {
        pinning_spectrum(params, &prefix, tables)
    };
    Ok(OccupationSpectrum {
        endpoint: params.endpoint,
        variant: params.variant,
        n: params.n,
        stride: if is_copolymer(params) { 2 } else { 1 },
        log_z_by_m,
    })
}

fn copolymer_spectrum<T: Real>(params: &ModelParams, prefix: &[T], tables: &WalkTables<T>) -> Vec<T> {
    let n = params.n;
    let half = n / 2;
    let lambda = T::lit(params.lambda);
    let ln2 = T::LN_2();
    // rows[j][b] = log Z^c_{2j}(N_occ = 2b)
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(half + 1);
    rows.push(vec![T::zero()]);
    for j in 1..=half {
        let t = 2 * j;
        let mut acc = vec![LogAccumulator::new(); j + 1];
        for (i, row) in rows.iter().enumerate() {
            let gap = j - i;
            let lf = tables.log_f(t - 2 * i) - ln2;
            let lpsi = log_psi(prefix, lambda, 2 * i, t);
            for (b, &v) in row.iter().enumerate() {
                let base = v + lf;
                acc[b].push(base);
                acc[b + gap].push(base + lpsi);
            }
        }
        rows.push(acc.iter().map(LogAccumulator::value).collect());
    }
    match params.endpoint {
        Endpoint::Constrained => rows.pop().expect("N >= 2"),
        Endpoint::Free => {
            let mut acc = vec![LogAccumulator::new(); half + 1];
            for (i, row) in rows.iter().enumerate().take(half) {
                let gap = half - i;
                let lp = tables.log_p_plus(n - 2 * i);
                let lpsi = log_psi(prefix, lambda, 2 * i, n);
                for (b, &v) in row.iter().enumerate() {
                    acc[b].push(v + lp);
                    acc[b + gap].push(v + lp + lpsi);
                }
            }
            for (b, &v) in rows[half].iter().enumerate() {
                acc[b].push(v);
            }
            acc.iter().map(LogAccumulator::value).collect()
        }
    }
}

fn pinning_spectrum<T: Real>(params: &ModelParams, prefix: &[T], tables: &WalkTables<T>) -> Vec<T> {
    let n = params.n;
    let half = n / 2;
    let lambda = T::lit(params.lambda);
    // rows[j][c] = log Z^c_{2j}(c zeros among S_1..S_{2j})
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(half + 1);
    rows.push(vec![T::zero()]);
    for j in 1..=half {
        let t = 2 * j;
        let w = log_site_weight(prefix, lambda, t);
        let mut acc = vec![LogAccumulator::new(); j + 1];
        for (i, row) in rows.iter().enumerate() {
            let lf = tables.log_f(t - 2 * i) + w;
            for (c, &v) in row.iter().enumerate() {
                acc[c + 1].push(v + lf);
            }
        }
        rows.push(acc.iter().map(LogAccumulator::value).collect());
    }
    match params.endpoint {
        Endpoint::Constrained => rows.pop().expect("N >= 2"),
        Endpoint::Free => {
            let mut acc = vec![LogAccumulator::new(); half + 1];
            for (i, row) in rows.iter().enumerate() {
                let lu = tables.log_u(n - 2 * i);
                for (c, &v) in row.iter().enumerate() {
                    acc[c].push(v + lu);
                }
            }
            acc.iter().map(LogAccumulator::value).collect()
        }
    }
}

/// `F(lambda, h; m) - (F(lambda, h - eps; m) - 2 lambda eps m / N)`.
pub fn shift_identity_residual<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: &WalkTables<T>,
    eps: f64,
    m: usize,
) -> Result<T> {
    params.require_copolymer("shift identity")?;
    if !(eps >= 0.0) || params.h - eps < 0.0 {
        return Err(Error::invalid(
            "eps",
            format!("need 0 <= eps <= h, got eps = {eps}, h = {}", params.h),
        ));
    }
    if m % 2 != 0 || m > params.n {
        return Err(Error::invalid("m", format!("must be even in [0, N], got {m}")));
    }
    let at_h = occupation_spectrum(params, omega, tables)?;
    let shifted = occupation_spectrum(&params.with_h(params.h - eps), omega, tables)?;
    let nn = T::from_usize_lossy(params.n);
    let f_h = at_h.log_z_at(m).expect("m on grid") / nn;
    let f_shift = shifted.log_z_at(m).expect("m on grid") / nn;
    let corr = T::lit(2.0 * params.lambda * eps * m as f64 / params.n as f64);
    Ok(f_h - (f_shift - corr))
}

/// Whether `F(lambda, h; m) = F(lambda, h - eps; m) - 2 lambda eps m / N`
/// holds to `1e-10`.
pub fn shift_identity_check<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: &WalkTables<T>,
    eps: f64,
    m: usize,
) -> Result<bool> {
    let r = shift_identity_residual(params, omega, tables, eps, m)?;
    Ok(r.abs().to_f64_lossy() <= 1e-10)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `|F_omega(m) - F_omega'(m)| <= (2 lambda sqrt(m) / N) |omega - omega'|`.
pub fn lipschitz_check<T: Real>(
    params: &ModelParams,
    omega: &[T],
    omega_prime: &[T],
    tables: &WalkTables<T>,
    m: usize,
) -> Result<LipschitzCheck> {
    params.require_copolymer("Lipschitz check")?;
    if omega.len() != params.n || omega_prime.len() != params.n {
        return Err(Error::invalid(
            "omega",
            format!(
                "both vectors must have length N = {}, got {} and {}",
                params.n,
                omega.len(),
                omega_prime.len()
            ),
        ));
    }
    if m % 2 != 0 || m > params.n {
        return Err(Error::invalid("m", format!("must be even in [0, N], got {m}")));
    }
    let a = occupation_spectrum(params, omega, tables)?;
    let b = occupation_spectrum(params, omega_prime, tables)?;
    let fa = a.free_energy_at(m).expect("m on grid").to_f64_lossy();
    let fb = b.free_energy_at(m).expect("m on grid").to_f64_lossy();
    let lhs = (fa - fb).abs();
    let dist = omega
        .iter()
        .zip(omega_prime)
        .map(|(x, y)| (x.to_f64_lossy() - y.to_f64_lossy()).powi(2))
        .sum::<f64>()
        .sqrt();
    let rhs = 2.0 * params.lambda * (m as f64).sqrt() / params.n as f64 * dist;
    Ok(LipschitzCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + 1e-12,
    })
}
