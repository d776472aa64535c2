//! Disorder averages: `E[Z(N_occ = m)] = P(N_occ = m) e^{-beta m}` with
//! `beta = 2 lambda h - log M(2 lambda)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{annealed_beta, h_upper, DisorderLaw, DisorderVector};
use crate::error::{Error, Result};
use crate::experiments::stats::NeumaierSum;
use crate::model::{Endpoint, ModelParams};
use crate::num::log_sum_exp;
use crate::partition::occupation_spectrum;
use crate::walk::{log_occupation_law, WalkTables};

/// Monte-Carlo average of `Z(N_occ = m)` over disorder replicas.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuenchedAverage {
    pub n_replicas: usize,
    pub seed: u64,
    /// `log` of the sample mean of `Z(N_occ = m)`.
    pub log_mean_by_m: Vec<f64>,
    /// Standard error of the sample mean divided by the exact value.
    pub rel_stderr_by_m: Vec<f64>,
    /// `(mean - exact) / stderr` per `m`.
    pub z_scores: Vec<f64>,
    pub log_mean_total: f64,
    pub z_total: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnealedReport {
    pub law: DisorderLaw,
    pub lambda: f64,
    pub h: f64,
    pub n: usize,
    pub endpoint: Endpoint,
    pub beta: f64,
    /// Entry `i` is `log E[Z(N_occ = 2i)]`.
    pub log_annealed_by_m: Vec<f64>,
    pub log_annealed_total: f64,
    pub mc: Option<QuenchedAverage>,
}

impl AnnealedReport {
    pub fn m_values(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.log_annealed_by_m.len()).map(|i| 2 * i)
    }
}

/// Exact annealed spectrum and total.
pub fn annealed_spectrum(params: &ModelParams, law: DisorderLaw, tables: &WalkTables<f64>) -> Result<AnnealedReport> {
    params.validate()?;
    params.require_copolymer("annealed spectrum")?;
    tables.require(params.n)?;
    let beta = annealed_beta(law, params.lambda, params.h);
    let law_m = log_occupation_law(tables, params.n, params.endpoint);
    let by_m: Vec<f64> = law_m
        .iter()
        .enumerate()
        .map(|(i, &lp)| lp - beta * (2 * i) as f64)
        .collect();
    let total = log_sum_exp(&by_m);
    Ok(AnnealedReport {
        law,
        lambda: params.lambda,
        h: params.h,
        n: params.n,
        endpoint: params.endpoint,
        beta,
        log_annealed_by_m: by_m,
        log_annealed_total: total,
        mc: None,
    })
}

/// Exact report plus a Monte-Carlo average of the quenched spectrum over
/// `n_replicas` disorder draws. Each sum is anchored at the exact annealed
/// value so that no term overflows, and summed in replica order.
pub fn annealed_vs_quenched(
    params: &ModelParams,
    law: DisorderLaw,
    tables: &WalkTables<f64>,
    n_replicas: usize,
    seed: u64,
) -> Result<AnnealedReport> {
    if n_replicas < 100 {
        return Err(Error::invalid(
            "replicas",
            format!("need at least 100 replicas, got {n_replicas}"),
        ));
    }
    let mut report = annealed_spectrum(params, law, tables)?;
    let spectra: Vec<(Vec<f64>, f64)> = (0..n_replicas as u64)
        .into_par_iter()
        .map(|r| {
            let omega = DisorderVector::sample(law, params.n, seed, r)?;
            let sp = occupation_spectrum(params, &omega.values, tables)?;
            let total = sp.log_total();
            Ok((sp.log_z_by_m, total))
        })
        .collect::<Result<_>>()?;
    let k = report.log_annealed_by_m.len();
    let nr = n_replicas as f64;
    let mut log_mean_by_m = Vec::with_capacity(k);
    let mut rel_se = Vec::with_capacity(k);
    let mut z_scores = Vec::with_capacity(k);
    let summarize = |anchor: f64, get: &dyn Fn(usize) -> f64| {
        let mut s = NeumaierSum::default();
        let mut s2 = NeumaierSum::default();
        for i in 0..n_replicas {
            let x = (get(i) - anchor).exp();
            s.add(x);
            s2.add(x * x);
        }
        let mean = s.value() / nr;
        let var = ((s2.value() / nr - mean * mean) * nr / (nr - 1.0)).max(0.0);
        let se = (var / nr).sqrt();
        let z = if se > 0.0 {
            (mean - 1.0) / se
        } else if (mean - 1.0).abs() <= 1e-12 {
            // every replica gave the same value, e.g. m = 0
            0.0
        } else {
            f64::INFINITY
        };
        (anchor + mean.ln(), se, z)
    };
    for j in 0..k {
        let anchor = report.log_annealed_by_m[j];
        let (lm, se, z) = summarize(anchor, &|i| spectra[i].0[j]);
        log_mean_by_m.push(lm);
        rel_se.push(se);
        z_scores.push(z);
    }
    let (log_mean_total, _, z_total) = summarize(report.log_annealed_total, &|i| spectra[i].1);
    report.mc = Some(QuenchedAverage {
        n_replicas,
        seed,
        log_mean_by_m,
        rel_stderr_by_m: rel_se,
        z_scores,
        log_mean_total,
        z_total,
    });
    Ok(report)
}

/// Largest `N` for [`bernoulli_disorder_average`] (`2^N` disorder vectors).
pub const DISORDER_ENUMERATION_MAX_N: usize = 14;

/// `log E[Z(N_occ = m)]` for `±1` disorder by averaging the quenched
/// spectrum over all `2^N` sign vectors.
pub fn bernoulli_disorder_average(params: &ModelParams, tables: &WalkTables<f64>) -> Result<Vec<f64>> {
    params.validate()?;
    if params.n > DISORDER_ENUMERATION_MAX_N {
        return Err(Error::BudgetExceeded {
            what: "disorder enumeration N",
            requested: params.n,
            cap: DISORDER_ENUMERATION_MAX_N,
        });
    }
    let n = params.n;
    let spectra: Vec<Vec<f64>> = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| {
            let omega: Vec<f64> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            Ok(occupation_spectrum(params, &omega, tables)?.log_z_by_m)
        })
        .collect::<Result<_>>()?;
    let k = spectra[0].len();
    let count = (1u64 << n) as f64;
    Ok((0..k)
        .map(|j| {
            let col: Vec<f64> = spectra.iter().map(|s| s[j]).collect();
            log_sum_exp(&col) - count.ln()
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupermartingaleReport {
    pub law: DisorderLaw,
    pub lambda: f64,
    pub h: f64,
    pub beta: f64,
    pub h_upper: f64,
    pub n_grid: Vec<usize>,
    /// `log E[Z^f_N]` per grid point.
    pub log_expected: Vec<f64>,
    /// Whether the sequence is nonincreasing (up to `1e-12` relative).
    pub nonincreasing: bool,
    /// `max / min` of `sqrt(N) E[Z^f_N]` over the grid.
    pub sqrt_n_ratio: f64,
    /// `true` when `h >= h_upper`, i.e. when monotonicity is asserted.
    pub asserted: bool,
}

/// `E[Z^f_N] = E[e^{-beta N_occ}]` over an increasing grid of even `N`.
///
/// Returns [`Error::EstimationFailed`] when `h >= h_upper(lambda)` and the
/// sequence increases, which would contradict `N_occ` being nondecreasing in
/// `N`.
pub fn supermartingale_diagnostic(
    lambda: f64,
    h: f64,
    law: DisorderLaw,
    n_grid: &[usize],
) -> Result<SupermartingaleReport> {
    let n_max = *n_grid.iter().max().ok_or_else(|| Error::invalid("N_grid", "empty grid"))?;
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("N_grid", "must be strictly increasing"));
    }
    let tables = WalkTables::<f64>::build(n_max)?;
    let mut log_expected = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let p = ModelParams::copolymer(lambda, h, n, Endpoint::Free)?;
        log_expected.push(annealed_spectrum(&p, law, &tables)?.log_annealed_total);
    }
    let nonincreasing = log_expected
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
    let scaled: Vec<f64> = n_grid
        .iter()
        .zip(&log_expected)
        .map(|(&n, &l)| 0.5 * (n as f64).ln() + l)
        .collect();
    let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hu = h_upper(law, lambda);
    let asserted = lambda > 0.0 && h >= hu;
    let report = SupermartingaleReport {
        law,
        lambda,
        h,
        beta: annealed_beta(law, lambda, h),
        h_upper: hu,
        n_grid: n_grid.to_vec(),
        log_expected,
        nonincreasing,
        sqrt_n_ratio: (hi - lo).exp(),
        asserted,
    };
    if asserted && !report.nonincreasing {
        return Err(Error::EstimationFailed(format!(
            "E[Z^f_N] increases although h = {h} >= h_upper = {hu}"
        )));
    }
    Ok(report)
}
