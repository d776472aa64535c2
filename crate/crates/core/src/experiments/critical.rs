//! Critical curve `h_c(lambda)` by bisection on the localization detector.

use serde::{Deserialize, Serialize};

use super::free_energy::{free_energy_estimate, FreeEnergyConfig, FreeEnergyEstimate};
use crate::disorder::{critical_bounds, h_upper, DisorderLaw};
use crate::error::{Error, Result};
use crate::model::Endpoint;

/// Detector verdict at one `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// `F - 3 se > 0`.
    Localized,
    /// `F + 3 se < 0`: significantly below zero, hence no evidence of
    /// localization at all.
    Delocalized,
    /// Neither.
    Indeterminate,
}

impl Phase {
    fn of(est: &FreeEnergyEstimate) -> Self {
        if est.f_inf - 3.0 * est.f_inf_se > 0.0 {
            Phase::Localized
        } else if est.f_inf + 3.0 * est.f_inf_se < 0.0 {
            Phase::Delocalized
        } else {
            Phase::Indeterminate
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub h: f64,
    pub f_inf: f64,
    pub f_inf_se: f64,
    pub phase: Phase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalConfig {
    pub law: DisorderLaw,
    pub n_grid: Vec<usize>,
    pub n_replicas: usize,
    pub seed: u64,
    /// Bisection stops when the bracket is narrower than this.
    pub tol: f64,
    pub endpoint: Endpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub lambda: f64,
    pub law: DisorderLaw,
    /// Largest `h` found localized.
    pub h_lo: f64,
    /// Smallest `h` found not localized.
    pub h_hi: f64,
    pub h_c: f64,
    pub h_lower_bound: f64,
    pub h_upper_bound: f64,
    /// Range of `h` where the detector was indeterminate, if any.
    pub indeterminate_band: Option<(f64, f64)>,
    pub evaluations: Vec<Evaluation>,
}

impl CriticalEstimate {
    /// Whether `[h_lo, h_hi]` meets `[h_lower_bound, h_upper_bound]`.
    pub fn consistent_with_bounds(&self) -> bool {
        self.h_lo <= self.h_upper_bound && self.h_hi >= self.h_lower_bound
    }
}

/// Bisection on `[0, h_upper + 0.5]`. The same replicas are used at every
/// `h`, which keeps the detector monotone in practice.
pub fn critical_point_estimate(lambda: f64, cfg: &CriticalConfig) -> Result<CriticalEstimate> {
    let bounds = critical_bounds(cfg.law, lambda, 0.0)?;
    if !(cfg.tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let mut evaluations = Vec::new();
    let mut eval = |h: f64| -> Result<bool> {
        let est = free_energy_estimate(&FreeEnergyConfig {
            lambda,
            h,
            law: cfg.law,
            n_grid: cfg.n_grid.clone(),
            n_replicas: cfg.n_replicas,
            seed: cfg.seed,
            endpoint: cfg.endpoint,
        })?;
        let phase = Phase::of(&est);
        evaluations.push(Evaluation {
            h,
            f_inf: est.f_inf,
            f_inf_se: est.f_inf_se,
            phase,
        });
        Ok(phase == Phase::Localized)
    };
    let mut lo = 0.0;
    let mut hi = h_upper(cfg.law, lambda) + 0.5;
    if eval(hi)? {
        return Err(Error::EstimationFailed(format!(
            "detector reports localization at h = {hi}, above the bracket"
        )));
    }
    if eval(lo)? {
        while hi - lo > cfg.tol {
            let mid = 0.5 * (lo + hi);
            if eval(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        hi = 0.0;
    }
    let band = evaluations
        .iter()
        .filter(|e| e.phase == Phase::Indeterminate)
        .map(|e| e.h)
        .fold(None, |acc: Option<(f64, f64)>, h| match acc {
            None => Some((h, h)),
            Some((a, b)) => Some((a.min(h), b.max(h))),
        });
    Ok(CriticalEstimate {
        lambda,
        law: cfg.law,
        h_lo: lo,
        h_hi: hi,
        h_c: 0.5 * (lo + hi),
        h_lower_bound: bounds.h_lower,
        h_upper_bound: bounds.h_upper,
        indeterminate_band: band,
        evaluations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopePoint {
    pub lambda: f64,
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub estimate: CriticalEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub law: DisorderLaw,
    pub points: Vec<SlopePoint>,
    /// Every ratio interval meets `[2/3 - 0.05, 1 + 0.05]`.
    pub within_band: bool,
}

/// `h_c(lambda) / lambda` along a grid of small couplings.
pub fn slope_at_origin(lambdas: &[f64], cfg: &CriticalConfig) -> Result<SlopeReport> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0 && l <= 0.5)) {
        return Err(Error::invalid("lambda_grid", "entries must lie in (0, 0.5]"));
    }
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let est = critical_point_estimate(lambda, cfg)?;
        points.push(SlopePoint {
            lambda,
            ratio: est.h_c / lambda,
            ratio_lo: est.h_lo / lambda,
            ratio_hi: est.h_hi / lambda,
            estimate: est,
        });
    }
    let within_band = points
        .iter()
        .all(|p| p.ratio_hi >= 2.0 / 3.0 - 0.05 && p.ratio_lo <= 1.05);
    Ok(SlopeReport {
        law: cfg.law,
        points,
        within_band,
    })
}
