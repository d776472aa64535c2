//! Concentration of `F(Omega_m) = (1/N) log Z(N_occ = m)` in the disorder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::stats::{mean_se, std_dev};
use super::{check_replicas, par_replicas};
use crate::disorder::{DisorderLaw, DisorderVector};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::partition::{lipschitz_check, occupation_spectrum};
use crate::walk::WalkTables;

/// Replica indices at or above this offset feed the Lipschitz trials, so
/// they never coincide with the concentration sample.
const TRIAL_REPLICA_OFFSET: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub params: ModelParams,
    pub law: DisorderLaw,
    /// Occupation level for the fluctuation sample.
    pub m: usize,
    pub n_replicas: usize,
    pub lipschitz_trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    /// Deviation in units of the sample standard deviation.
    pub u_over_sd: f64,
    pub upper_frequency: f64,
    pub lower_frequency: f64,
    pub envelope: f64,
    /// Both frequencies are within `3` binomial standard errors of the envelope.
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub config: ConcentrationConfig,
    pub lipschitz_violations: usize,
    /// Largest `lhs / rhs` among trials with `rhs > 0`.
    pub worst_lipschitz_ratio: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub sd: f64,
    /// `kappa` with `P(|F - E F| >= u) <= exp(-u^2 N^2 / (kappa lambda^2 m))`
    /// matched to the sample variance.
    pub kappa: f64,
    /// `sd <= 4 lambda sqrt(m) / N`.
    pub sd_within_envelope: bool,
    pub tails: Vec<TailCheck>,
}

pub fn concentration_experiment(cfg: &ConcentrationConfig) -> Result<ConcentrationReport> {
    let p = &cfg.params;
    p.require_copolymer("concentration experiment")?;
    check_replicas(cfg.n_replicas, 2)?;
    if cfg.m % 2 != 0 || cfg.m > p.n || cfg.m == 0 {
        return Err(Error::invalid("m", format!("must be even in (0, N], got {}", cfg.m)));
    }
    let n = p.n;
    let tables = WalkTables::<f64>::build(n)?;

    let trials: Vec<(bool, f64)> = par_replicas(cfg.lipschitz_trials, |t| {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t);
        let omega = DisorderVector::sample(cfg.law, n, cfg.seed, TRIAL_REPLICA_OFFSET + 2 * t)?.values;
        let other = DisorderVector::sample(cfg.law, n, cfg.seed, TRIAL_REPLICA_OFFSET + 2 * t + 1)?.values;
        // half the trials use independent pairs, half small perturbations
        let omega_prime: Vec<f64> = if rng.random_bool(0.5) {
            other
        } else {
            let eps = 10f64.powf(rng.random_range(-4.0..0.0));
            omega.iter().zip(&other).map(|(a, b)| a + eps * b).collect()
        };
        let m = 2 * rng.random_range(0..=n / 2);
        let c = lipschitz_check(p, &omega, &omega_prime, &tables, m)?;
        let ratio = if c.rhs > 0.0 { c.lhs / c.rhs } else { 0.0 };
        Ok((c.ok, ratio))
    })?;
    let lipschitz_violations = trials.iter().filter(|t| !t.0).count();
    let worst_lipschitz_ratio = trials.iter().map(|t| t.1).fold(0.0, f64::max);

    let values: Vec<f64> = par_replicas(cfg.n_replicas, |r| {
        let omega = DisorderVector::sample(cfg.law, n, cfg.seed, r)?;
        let sp = occupation_spectrum(p, &omega.values, &tables)?;
        Ok(sp.free_energy_at(cfg.m).expect("m on grid"))
    })?;
    let (mean, mean_se) = mean_se(&values);
    let sd = std_dev(&values);
    let scale = p.lambda * p.lambda * cfg.m as f64;
    let nn = (n * n) as f64;
    let kappa = 2.0 * sd * sd * nn / scale;
    let count = values.len() as f64;
    let tails = [1.0, 2.0, 3.0]
        .iter()
        .map(|&k| {
            let u = k * sd;
            let up = values.iter().filter(|&&v| v - mean >= u).count() as f64 / count;
            let lo = values.iter().filter(|&&v| mean - v >= u).count() as f64 / count;
            let envelope = (-u * u * nn / (kappa * scale)).exp();
            let tol = 3.0 * (envelope * (1.0 - envelope) / count).sqrt();
            TailCheck {
                u_over_sd: k,
                upper_frequency: up,
                lower_frequency: lo,
                envelope,
                ok: up <= envelope + tol && lo <= envelope + tol,
            }
        })
        .collect();
    Ok(ConcentrationReport {
        config: cfg.clone(),
        lipschitz_violations,
        worst_lipschitz_ratio,
        mean,
        mean_se,
        sd,
        kappa,
        sd_within_envelope: sd <= 4.0 * p.lambda * (cfg.m as f64).sqrt() / n as f64,
        tails,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Endpoint;

    #[test]
    fn small_run_has_no_violations() {
        let cfg = ConcentrationConfig {
            params: ModelParams::copolymer(1.0, 0.5, 30, Endpoint::Free).unwrap(),
            law: DisorderLaw::GaussianStd,
            m: 10,
            n_replicas: 50,
            lipschitz_trials: 40,
            seed: 9,
        };
        let r = concentration_experiment(&cfg).unwrap();
        assert_eq!(r.lipschitz_violations, 0);
        assert!(r.worst_lipschitz_ratio <= 1.0);
        assert!(r.sd > 0.0 && r.kappa > 0.0);
        assert!(r.sd_within_envelope);
    }
}
