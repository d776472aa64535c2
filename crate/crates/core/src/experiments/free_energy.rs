//! Disorder-averaged free energy with a `1/N` extrapolation.

use serde::{Deserialize, Serialize};

use super::stats::{intercept_weights, mean_se};
use super::{check_grid, check_replicas, par_replicas};
use crate::disorder::{DisorderLaw, DisorderVector};
use crate::error::Result;
use crate::model::{Endpoint, ModelParams};
use crate::partition::partition;
use crate::walk::WalkTables;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyConfig {
    pub lambda: f64,
    pub h: f64,
    pub law: DisorderLaw,
    pub n_grid: Vec<usize>,
    pub n_replicas: usize,
    pub seed: u64,
    /// Endpoint whose free energy is extrapolated.
    pub endpoint: Endpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyPoint {
    pub n: usize,
    pub mean_f_c: f64,
    pub se_f_c: f64,
    pub mean_f_f: f64,
    pub se_f_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyEstimate {
    pub config: FreeEnergyConfig,
    pub points: Vec<FreeEnergyPoint>,
    /// Intercept of `F_N = F + a/N` fitted on the upper half of the grid.
    pub f_inf: f64,
    /// Standard error of `f_inf` across replicas.
    pub f_inf_se: f64,
    /// `f_inf - 3 se > 0`.
    pub localized: bool,
}

/// Grid points used by the extrapolation (upper half, at least two).
fn fit_points(grid: &[usize]) -> &[usize] {
    let k = grid.len();
    let take = (k - k / 2).max(2).min(k);
    &grid[k - take..]
}

/// Every replica uses one disorder vector for the whole grid: the excursion
/// engine at `N_max` yields `Z^c_N` for all smaller `N` on the way.
pub fn free_energy_estimate(cfg: &FreeEnergyConfig) -> Result<FreeEnergyEstimate> {
    check_grid("N_grid", &cfg.n_grid)?;
    check_replicas(cfg.n_replicas, 50)?;
    if cfg.n_grid.len() < 2 {
        return Err(crate::Error::invalid("N_grid", "need at least two sizes"));
    }
    let n_max = *cfg.n_grid.last().expect("nonempty");
    let tables = WalkTables::<f64>::build(n_max)?;
    // per replica: (F^c_N, F^f_N) over the grid
    let rows: Vec<Vec<(f64, f64)>> = par_replicas(cfg.n_replicas, |r| {
        let omega = DisorderVector::sample(cfg.law, n_max, cfg.seed, r)?;
        let p = ModelParams::copolymer(cfg.lambda, cfg.h, n_max, Endpoint::Free)?;
        let pt = partition(&p, &omega.values, &tables)?;
        Ok(cfg
            .n_grid
            .iter()
            .map(|&n| {
                let nf = n as f64;
                (pt.log_z_c_at(n) / nf, pt.log_z_f_at(n, &tables) / nf)
            })
            .collect())
    })?;
    let points: Vec<FreeEnergyPoint> = cfg
        .n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let c: Vec<f64> = rows.iter().map(|r| r[i].0).collect();
            let f: Vec<f64> = rows.iter().map(|r| r[i].1).collect();
            let (mean_f_c, se_f_c) = mean_se(&c);
            let (mean_f_f, se_f_f) = mean_se(&f);
            FreeEnergyPoint {
                n,
                mean_f_c,
                se_f_c,
                mean_f_f,
                se_f_f,
            }
        })
        .collect();
    let fit = fit_points(&cfg.n_grid);
    let offset = cfg.n_grid.len() - fit.len();
    let x: Vec<f64> = fit.iter().map(|&n| 1.0 / n as f64).collect();
    let c = intercept_weights(&x);
    let per_replica: Vec<f64> = rows
        .iter()
        .map(|r| {
            c.iter()
                .enumerate()
                .map(|(i, w)| {
                    let (fc, ff) = r[offset + i];
                    w * match cfg.endpoint {
                        Endpoint::Constrained => fc,
                        Endpoint::Free => ff,
                    }
                })
                .sum()
        })
        .collect();
    let (f_inf, f_inf_se) = mean_se(&per_replica);
    Ok(FreeEnergyEstimate {
        config: cfg.clone(),
        points,
        f_inf,
        f_inf_se,
        localized: f_inf - 3.0 * f_inf_se > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_uses_upper_half() {
        assert_eq!(fit_points(&[1, 2, 3, 4, 5]), &[3, 4, 5]);
        assert_eq!(fit_points(&[1, 2]), &[1, 2]);
    }

    #[test]
    fn strong_coupling_at_zero_asymmetry_is_localized() {
        let cfg = FreeEnergyConfig {
            lambda: 1.0,
            h: 0.0,
            law: DisorderLaw::GaussianStd,
            n_grid: vec![50, 100, 150, 200],
            n_replicas: 50,
            seed: 3,
            endpoint: Endpoint::Constrained,
        };
        let est = free_energy_estimate(&cfg).unwrap();
        assert!(est.localized, "{est:?}");
        for p in &est.points {
            assert!(p.mean_f_f >= p.mean_f_c);
        }
    }

    #[test]
    fn far_above_upper_bound_is_not_localized() {
        let cfg = FreeEnergyConfig {
            lambda: 1.0,
            h: 2.0,
            law: DisorderLaw::GaussianStd,
            n_grid: vec![50, 100, 150, 200],
            n_replicas: 50,
            seed: 3,
            endpoint: Endpoint::Constrained,
        };
        assert!(!free_energy_estimate(&cfg).unwrap().localized);
    }
}
