//! Delocalized-phase tails: occupation `N_occ` and last exit `max A`.

use serde::{Deserialize, Serialize};

use super::stats::{linear_fit, mean_se, LinearFit};
use super::{check_replicas, par_replicas};
use crate::disorder::{annealed_beta, DisorderLaw, DisorderVector};
use crate::error::{Error, Result};
use crate::model::{Endpoint, ModelParams};
use crate::partition::{last_exit_profile, occupation_spectrum, partition, two_sided_exit_partition};
use crate::walk::WalkTables;

/// Replica average of `P(N_occ >= m)` against `e^{-beta m} / (1 - e^{-beta})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub params: ModelParams,
    pub law: DisorderLaw,
    pub n_replicas: usize,
    pub seed: u64,
    pub beta: f64,
    pub m: Vec<usize>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub envelope: Vec<f64>,
    /// `mean <= envelope + 3 se` at every `m`.
    pub within_envelope: bool,
}

/// Needs `beta > 0`, i.e. `h > h_upper(lambda)`.
pub fn deloc_tail_experiment(
    params: &ModelParams,
    law: DisorderLaw,
    n_replicas: usize,
    seed: u64,
) -> Result<TailCurve> {
    params.require_copolymer("occupation tail")?;
    check_replicas(n_replicas, 2)?;
    let beta = annealed_beta(law, params.lambda, params.h);
    if !(beta > 0.0) {
        return Err(Error::invalid(
            "h",
            format!("the tail envelope needs beta > 0, got beta = {beta}"),
        ));
    }
    let tables = WalkTables::<f64>::build(params.n)?;
    let tails: Vec<Vec<f64>> = par_replicas(n_replicas, |r| {
        let omega = DisorderVector::sample(law, params.n, seed, r)?;
        Ok(occupation_spectrum(params, &omega.values, &tables)?.tail_probabilities())
    })?;
    let k = tails[0].len();
    let m: Vec<usize> = (0..k).map(|i| 2 * i).collect();
    let (mut mean, mut se) = (Vec::with_capacity(k), Vec::with_capacity(k));
    for i in 0..k {
        let col: Vec<f64> = tails.iter().map(|t| t[i]).collect();
        let (a, b) = mean_se(&col);
        mean.push(a);
        se.push(b);
    }
    let denom = -(-beta).exp_m1();
    let envelope: Vec<f64> = m.iter().map(|&m| (-beta * m as f64).exp() / denom).collect();
    let within_envelope = (0..k).all(|i| mean[i] <= envelope[i] + 3.0 * se[i]);
    Ok(TailCurve {
        params: *params,
        law,
        n_replicas,
        seed,
        beta,
        m,
        mean,
        se,
        envelope,
        within_envelope,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteriorTailReport {
    /// Points with `m >= q_hat ln N` and a positive mean.
    pub m_min: usize,
    pub fit: Option<LinearFit>,
    /// Fitted decay `-slope` of `ln P(N_occ >= m)`.
    pub decay_rate: f64,
    /// `slope + 3 se < 0`.
    pub significant: bool,
}

/// Weighted fit of `ln P(N_occ >= m)` for `m >= q_hat ln N`, with
/// delta-method errors `se / mean`.
pub fn deloc_tail_interior(curve: &TailCurve, q_hat: f64) -> InteriorTailReport {
    let m_min = (q_hat * (curve.params.n as f64).ln()).ceil() as usize;
    let (mut x, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..curve.m.len() {
        if curve.m[i] >= m_min && curve.mean[i] > 0.0 && curve.se[i] > 0.0 {
            x.push(curve.m[i] as f64);
            y.push(curve.mean[i].ln());
            s.push(curve.se[i] / curve.mean[i]);
        }
    }
    let fit = linear_fit(&x, &y, Some(&s));
    let (decay_rate, significant) = match fit {
        Some(f) => (-f.slope, f.slope + 3.0 * f.slope_se < 0.0),
        None => (f64::NAN, false),
    };
    InteriorTailReport {
        m_min,
        fit,
        decay_rate,
        significant,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LastExitReport {
    pub params: ModelParams,
    pub law: DisorderLaw,
    pub n_replicas: usize,
    pub seed: u64,
    pub ell: Vec<usize>,
    /// Replica mean of `P^f(max A > ell)`.
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// Weighted fit of `ln mean` on `ln(ell + 1)`.
    pub fit: Option<LinearFit>,
    /// Smallest `c` with `mean <= c / sqrt(ell + 1)` on the grid.
    pub envelope_c: f64,
    /// Fitted slope in `[-0.7, -0.3]`.
    pub slope_ok: bool,
    /// Constrained endpoint, `ell1 = ell2 = ell`: replica mean of the
    /// complement of the two-sided event.
    pub two_sided_mean: Option<Vec<f64>>,
    pub two_sided_se: Option<Vec<f64>>,
    pub two_sided_fit: Option<LinearFit>,
}

/// `P^f(max A > ell)` over `ell_grid`; with `two_sided`, also the
/// constrained two-sided analogue on the grid points `<= N/2`.
pub fn last_exit_experiment(
    params: &ModelParams,
    law: DisorderLaw,
    ell_grid: &[usize],
    n_replicas: usize,
    seed: u64,
    two_sided: bool,
) -> Result<LastExitReport> {
    params.require_copolymer("last-exit experiment")?;
    params.require_endpoint(Endpoint::Free, "last-exit experiment")?;
    check_replicas(n_replicas, 2)?;
    let n = params.n;
    if ell_grid.is_empty() || ell_grid.iter().any(|&l| l % 2 != 0 || l > n) {
        return Err(Error::invalid("ell_grid", "entries must be even and at most N"));
    }
    let ts_grid: Vec<usize> = ell_grid.iter().copied().filter(|&l| l <= n / 2).collect();
    let tables = WalkTables::<f64>::build(n)?;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = par_replicas(n_replicas, |r| {
        let omega = DisorderVector::sample(law, n, seed, r)?;
        let pt = partition(params, &omega.values, &tables)?;
        let prof = last_exit_profile(&pt, &tables)?;
        let comp = ell_grid
            .iter()
            .map(|&l| -(prof[l / 2] - pt.log_z_f).exp_m1())
            .collect();
        let mut ts = Vec::new();
        if two_sided {
            let pc = params.with_endpoint(Endpoint::Constrained);
            let total = pt.log_z_c_at(n);
            for &l in &ts_grid {
                let v = two_sided_exit_partition(&pc, &omega.values, &tables, l, l)?;
                ts.push(-(v - total).exp_m1());
            }
        }
        Ok((comp, ts))
    })?;
    let column = |pick: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> f64| {
        let col: Vec<f64> = rows.iter().map(pick).collect();
        mean_se(&col)
    };
    let (mut mean, mut se) = (Vec::new(), Vec::new());
    for i in 0..ell_grid.len() {
        let (a, b) = column(&|r| r.0[i]);
        mean.push(a);
        se.push(b);
    }
    let fit = log_log_fit(ell_grid, &mean, &se);
    let envelope_c = ell_grid
        .iter()
        .zip(&mean)
        .map(|(&l, &m)| m * ((l + 1) as f64).sqrt())
        .fold(0.0, f64::max);
    let slope_ok = fit.is_some_and(|f| (-0.7..=-0.3).contains(&f.slope));
    let (two_sided_mean, two_sided_se, two_sided_fit) = if two_sided {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..ts_grid.len() {
            let (x, y) = column(&|r| r.1[i]);
            a.push(x);
            b.push(y);
        }
        let f = log_log_fit(&ts_grid, &a, &b);
        (Some(a), Some(b), f)
    } else {
        (None, None, None)
    };
    Ok(LastExitReport {
        params: *params,
        law,
        n_replicas,
        seed,
        ell: ell_grid.to_vec(),
        mean,
        se,
        fit,
        envelope_c,
        slope_ok,
        two_sided_mean,
        two_sided_se,
        two_sided_fit,
    })
}

fn log_log_fit(ell: &[usize], mean: &[f64], se: &[f64]) -> Option<LinearFit> {
    let (mut x, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..ell.len() {
        if mean[i] > 0.0 && se[i] > 0.0 {
            x.push(((ell[i] + 1) as f64).ln());
            y.push(mean[i].ln());
            s.push(se[i] / mean[i]);
        }
    }
    linear_fit(&x, &y, Some(&s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_tail_is_walk_tail() {
        let p = ModelParams::copolymer(0.0, 1.0, 20, Endpoint::Free).unwrap();
        assert!(deloc_tail_experiment(&p, DisorderLaw::GaussianStd, 4, 1).is_err());
        let p = ModelParams::copolymer(0.5, 1.0, 20, Endpoint::Constrained).unwrap();
        let c = deloc_tail_experiment(&p, DisorderLaw::BernoulliPm1, 4, 1).unwrap();
        assert!((c.mean[0] - 1.0).abs() < 1e-12);
        assert!(c.mean.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn last_exit_complement_decreases() {
        let p = ModelParams::copolymer(1.0, 1.5, 60, Endpoint::Free).unwrap();
        let r = last_exit_experiment(&p, DisorderLaw::GaussianStd, &[2, 4, 8, 16, 30], 6, 5, true).unwrap();
        assert!(r.mean.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(r.mean.iter().all(|&m| (0.0..=1.0).contains(&m)));
        assert_eq!(r.two_sided_mean.unwrap().len(), 5);
    }
}
