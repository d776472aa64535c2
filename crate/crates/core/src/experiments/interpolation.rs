//! Law universality at weak coupling: `|E_1 F_N - E_2 F_N|` against `lambda`
//! along the ray `h = v lambda`.

use serde::{Deserialize, Serialize};

use super::stats::{linear_fit, mean_se, LinearFit};
use super::{check_replicas, par_replicas};
use crate::disorder::{DisorderLaw, DisorderVector};
use crate::error::{Error, Result};
use crate::model::{Endpoint, ModelParams};
use crate::partition::partition;
use crate::walk::WalkTables;

/// Seed offset for the second law, so the two samples are independent.
const SECOND_LAW_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationConfig {
    pub v: f64,
    pub lambdas: Vec<f64>,
    pub laws: (DisorderLaw, DisorderLaw),
    pub n: usize,
    pub endpoint: Endpoint,
    pub n_replicas: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationPoint {
    pub lambda: f64,
    pub h: f64,
    pub mean_first: f64,
    pub se_first: f64,
    pub mean_second: f64,
    pub se_second: f64,
    pub diff: f64,
    pub diff_se: f64,
    /// `|diff| > 2 diff_se`.
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub config: InterpolationConfig,
    pub points: Vec<InterpolationPoint>,
    /// Weighted fit of `ln |diff|` on `ln lambda` over significant points.
    pub fit: Option<LinearFit>,
    pub n_significant: usize,
    /// At least four significant points.
    pub conclusive: bool,
}

impl InterpolationReport {
    pub fn slope(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.slope)
    }
}

fn replica_mean(
    law: DisorderLaw,
    params: &ModelParams,
    tables: &WalkTables<f64>,
    n_replicas: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let values = par_replicas(n_replicas, |r| {
        let omega = DisorderVector::sample(law, params.n, seed, r)?;
        Ok(partition(params, &omega.values, tables)?.free_energy())
    })?;
    Ok(mean_se(&values))
}

pub fn interpolation_experiment(cfg: &InterpolationConfig) -> Result<InterpolationReport> {
    check_replicas(cfg.n_replicas, 2)?;
    if !(cfg.v >= 0.0) {
        return Err(Error::invalid("v", "must be >= 0"));
    }
    if cfg.lambdas.is_empty() || cfg.lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::invalid("lambda_grid", "entries must be > 0"));
    }
    let tables = WalkTables::<f64>::build(cfg.n)?;
    let mut points = Vec::with_capacity(cfg.lambdas.len());
    for &lambda in &cfg.lambdas {
        let h = cfg.v * lambda;
        let params = ModelParams::copolymer(lambda, h, cfg.n, cfg.endpoint)?;
        let (m1, s1) = replica_mean(cfg.laws.0, &params, &tables, cfg.n_replicas, cfg.seed)?;
        let (m2, s2) = replica_mean(
            cfg.laws.1,
            &params,
            &tables,
            cfg.n_replicas,
            cfg.seed ^ SECOND_LAW_SEED_SALT,
        )?;
        let diff = m1 - m2;
        let diff_se = (s1 * s1 + s2 * s2).sqrt();
        points.push(InterpolationPoint {
            lambda,
            h,
            mean_first: m1,
            se_first: s1,
            mean_second: m2,
            se_second: s2,
            diff,
            diff_se,
            significant: diff.abs() > 2.0 * diff_se,
        });
    }
    let sig: Vec<&InterpolationPoint> = points.iter().filter(|p| p.significant).collect();
    let x: Vec<f64> = sig.iter().map(|p| p.lambda.ln()).collect();
    let y: Vec<f64> = sig.iter().map(|p| p.diff.abs().ln()).collect();
    let s: Vec<f64> = sig.iter().map(|p| p.diff_se / p.diff.abs()).collect();
    let fit = linear_fit(&x, &y, Some(&s));
    Ok(InterpolationReport {
        config: cfg.clone(),
        n_significant: sig.len(),
        conclusive: sig.len() >= 4,
        points,
        fit,
    })
}
