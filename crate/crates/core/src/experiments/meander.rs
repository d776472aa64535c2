//! Endpoint law in the delocalized phase against the Brownian meander.

use serde::{Deserialize, Serialize};

use super::stats::ks_distance_lattice;
use super::{check_replicas, par_replicas};
use crate::disorder::{DisorderLaw, DisorderVector};
use crate::error::Result;
use crate::model::{Endpoint, ModelParams};
use crate::partition::endpoint_marginal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanderReport {
    pub params: ModelParams,
    pub law: DisorderLaw,
    pub n_replicas: usize,
    pub seed: u64,
    /// Disorder-averaged `P(S_N = x)`, index `x + N`.
    pub endpoint_law: Vec<f64>,
    /// Mass at `S_N >= 0`.
    pub nonnegative_mass: f64,
    /// Kolmogorov distance between `S_N / sqrt N` and `1 - e^{-x^2/2}`.
    pub ks: f64,
    /// `ks <= 0.05`.
    pub close: bool,
}

pub fn meander_endpoint_check(
    params: &ModelParams,
    law: DisorderLaw,
    n_replicas: usize,
    seed: u64,
) -> Result<MeanderReport> {
    params.require_copolymer("meander check")?;
    params.require_endpoint(Endpoint::Free, "meander check")?;
    check_replicas(n_replicas, 1)?;
    let n = params.n;
    let laws = par_replicas(n_replicas, |r| {
        let omega = DisorderVector::sample(law, n, seed, r)?;
        endpoint_marginal(params, &omega.values)
    })?;
    let count = n_replicas as f64;
    let endpoint_law: Vec<f64> = (0..=2 * n)
        .map(|i| laws.iter().map(|l| l[i]).sum::<f64>() / count)
        .collect();
    let scale = (n as f64).sqrt();
    let atoms: Vec<(f64, f64)> = endpoint_law
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| ((i as f64 - n as f64) / scale, p))
        .collect();
    let ks = ks_distance_lattice(&atoms, |x| {
        if x <= 0.0 {
            0.0
        } else {
            -(-x * x / 2.0).exp_m1()
        }
    });
    let nonnegative_mass = endpoint_law[n..].iter().sum();
    Ok(MeanderReport {
        params: *params,
        law,
        n_replicas,
        seed,
        endpoint_law,
        nonnegative_mass,
        ks,
        close: ks <= 0.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_is_normalized() {
        let p = ModelParams::copolymer(1.0, 2.0, 40, Endpoint::Free).unwrap();
        let r = meander_endpoint_check(&p, DisorderLaw::GaussianStd, 5, 4).unwrap();
        let total: f64 = r.endpoint_law.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(r.nonnegative_mass > 0.9);
        assert!(r.ks < 0.5);
    }
}
