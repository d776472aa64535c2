//! Growth of `N^{1/2} Z^f_{tau_N}` at the first atypical stretch.

use serde::{Deserialize, Serialize};

use super::stats::{median, quantile};
use super::{check_grid, check_replicas, par_replicas};
use crate::disorder::{delta_exponent, scan_stream, DisorderLaw, DisorderStream};
use crate::error::{Error, Result};
use crate::partition::log_partition_free_long;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchConfig {
    pub lambda: f64,
    pub h: f64,
    /// Stretch level, `q < h`.
    pub q: f64,
    /// The statistic is `N^{1/2 - delta_prime} Z^f_{tau_N}`.
    pub delta_prime: f64,
    pub law: DisorderLaw,
    pub n_grid: Vec<usize>,
    pub n_replicas: usize,
    pub seed: u64,
    /// Upper limit on the disorder drawn per replica.
    pub max_len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchPoint {
    pub n: usize,
    pub r_n: usize,
    /// Per replica, in replica order.
    pub tau: Vec<usize>,
    pub log_stat: Vec<f64>,
    pub median_log_stat: f64,
    pub q25_log_stat: f64,
    pub q75_log_stat: f64,
    /// Median of `ln tau_N / ln N`.
    pub median_tau_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchGrowthReport {
    pub config: StretchConfig,
    pub delta: f64,
    pub q_star: f64,
    pub points: Vec<StretchPoint>,
    /// Median of the log statistic strictly increases along the grid.
    pub median_increasing: bool,
    /// Fraction of replicas whose statistic increases along the whole grid.
    pub replica_increasing_fraction: f64,
    /// Every median exponent lies in `[0.8, 1.2]`.
    pub tau_exponent_ok: bool,
}

/// Each replica owns one disorder stream shared by every `N`, so `tau_N`
/// is nondecreasing in `N` replica by replica.
pub fn stretch_growth_experiment(cfg: &StretchConfig) -> Result<StretchGrowthReport> {
    check_grid("N_grid", &cfg.n_grid)?;
    check_replicas(cfg.n_replicas, 1)?;
    if !(cfg.q < cfg.h) {
        return Err(Error::invalid("q", format!("need q < h, got q = {}, h = {}", cfg.q, cfg.h)));
    }
    let de = delta_exponent(cfg.law, cfg.lambda, cfg.h)?;
    if !(cfg.delta_prime < de.delta) {
        return Err(Error::invalid(
            "delta_prime",
            format!("need delta' < delta = {}, got {}", de.delta, cfg.delta_prime),
        ));
    }
    // per replica: (tau, log stat) per grid point
    let rows: Vec<Vec<(usize, usize, f64)>> = par_replicas(cfg.n_replicas, |r| {
        let mut stream = DisorderStream::new(cfg.law, cfg.seed, r);
        let mut out = Vec::with_capacity(cfg.n_grid.len());
        for &n in &cfg.n_grid {
            let scan = scan_stream(&mut stream, cfg.h, cfg.q, n, cfg.max_len)?;
            let z = log_partition_free_long(cfg.lambda, cfg.h, stream.values(), scan.tau)?;
            out.push((scan.r_n, scan.tau, (0.5 - cfg.delta_prime) * (n as f64).ln() + z.log_z_f));
        }
        Ok(out)
    })?;
    let points: Vec<StretchPoint> = cfg
        .n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let tau: Vec<usize> = rows.iter().map(|r| r[i].1).collect();
            let log_stat: Vec<f64> = rows.iter().map(|r| r[i].2).collect();
            let ln_n = (n as f64).ln();
            let expo: Vec<f64> = tau.iter().map(|&t| (t as f64).ln() / ln_n).collect();
            StretchPoint {
                n,
                r_n: rows[0][i].0,
                median_log_stat: median(&log_stat),
                q25_log_stat: quantile(&log_stat, 0.25),
                q75_log_stat: quantile(&log_stat, 0.75),
                median_tau_exponent: median(&expo),
                tau,
                log_stat,
            }
        })
        .collect();
    let median_increasing = points
        .windows(2)
        .all(|w| w[1].median_log_stat > w[0].median_log_stat);
    let increasing = rows
        .iter()
        .filter(|r| r.windows(2).all(|w| w[1].2 > w[0].2))
        .count();
    let tau_exponent_ok = points
        .iter()
        .all(|p| (0.8..=1.2).contains(&p.median_tau_exponent));
    Ok(StretchGrowthReport {
        config: cfg.clone(),
        delta: de.delta,
        q_star: de.q_star,
        replica_increasing_fraction: increasing as f64 / cfg.n_replicas as f64,
        points,
        median_increasing,
        tau_exponent_ok,
    })
}
