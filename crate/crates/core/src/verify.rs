//! The `oracle-verify` suite: engines against enumeration plus the hard
//! invariants (renewal identity, spectrum consistency, lower bounds,
//! monotonicity in `h`, sampler histogram).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderLaw, DisorderVector};
use crate::error::{Error, Result};
use crate::model::{Endpoint, ModelParams};
use crate::num::log_sum_exp;
use crate::oracle::{BruteForce, ORACLE_MAX_N};
use crate::partition::{
    delta_marginals, delta_marginals_given_occupation, endpoint_marginal, last_exit_profile,
    occupation_spectrum, partition, partition_position_engine, sample_skeleton, two_sided_exit_partition,
};
use crate::walk::WalkTables;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Largest `N` compared against enumeration.
    pub oracle_n_max: usize,
    pub configs_per_n: usize,
    /// Renewal identity checked for `n <= renewal_n`.
    pub renewal_n: usize,
    /// Chain length for the invariant checks.
    pub invariant_n: usize,
    pub invariant_configs: usize,
    pub sampler_n: usize,
    pub sampler_draws: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            oracle_n_max: 12,
            configs_per_n: 50,
            renewal_n: 2000,
            invariant_n: 200,
            invariant_configs: 50,
            sampler_n: 60,
            sampler_draws: 100_000,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Relative difference of two logs, `0` when both are `-inf`.
fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn random_copolymer(rng: &mut ChaCha12Rng, n: usize) -> Result<(ModelParams, DisorderLaw, Vec<f64>)> {
    let law = DisorderLaw::ALL[rng.random_range(0..3)];
    let lambda = rng.random_range(0.0..=2.0);
    let h = rng.random_range(0.0..=2.0);
    let ep = Endpoint::BOTH[rng.random_range(0..2)];
    let omega = DisorderVector::sample(law, n, rng.random(), 0)?.values;
    Ok((ModelParams::copolymer(lambda, h, n, ep)?, law, omega))
}

/// Largest deviation over every engine output for one configuration.
fn oracle_deviation(p: &ModelParams, omega: &[f64], m_pick: usize) -> Result<f64> {
    let n = p.n;
    let t = WalkTables::<f64>::build(n)?;
    let bf = BruteForce::new(p, omega)?;
    let mut worst = 0.0_f64;
    let pt = partition(p, omega, &t)?;
    let pos = partition_position_engine(p, omega)?;
    for ep in Endpoint::BOTH {
        let pe = p.with_endpoint(ep);
        let want = bf.log_z(ep);
        worst = worst.max(rel(pt.log_z_for(ep), want)).max(rel(pos.log_z_for(ep), want));
        let sp = occupation_spectrum(&pe, omega, &t)?;
        let bs = bf.spectrum(ep);
        for (x, y) in sp.log_z_by_m.iter().zip(&bs) {
            worst = worst.max(rel(*x, *y));
        }
        for (x, y) in delta_marginals(&pe, omega)?.iter().zip(bf.delta_marginals(ep)) {
            worst = worst.max((x - y).abs());
        }
        // conditioned marginals at one reachable occupation level
        let reachable: Vec<usize> = bs
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, _)| 2 * i)
            .collect();
        let m = reachable[m_pick % reachable.len()];
        let given = delta_marginals_given_occupation(&pe, omega, m)?;
        for (x, y) in given.iter().zip(bf.delta_marginals_given(ep, m)) {
            worst = worst.max((x - y).abs());
        }
    }
    let free = p.with_endpoint(Endpoint::Free);
    let prof = last_exit_profile(&partition(&free, omega, &t)?, &t)?;
    for (i, v) in prof.iter().enumerate() {
        worst = worst.max(rel(*v, bf.last_exit(2 * i)));
    }
    for (x, y) in endpoint_marginal(&free, omega)?.iter().zip(bf.endpoint_marginal()) {
        worst = worst.max((x - y).abs());
    }
    let c = p.with_endpoint(Endpoint::Constrained);
    for l1 in (0..=n / 2).step_by(2) {
        for l2 in (0..=n / 2).step_by(2) {
            let v = two_sided_exit_partition(&c, omega, &t, l1, l2)?;
            worst = worst.max(rel(v, bf.two_sided_exit(l1, l2)));
        }
    }
    // pinning variant on the same disorder, with a signed h
    let hp = 2.0 * p.h - 2.0;
    for ep in Endpoint::BOTH {
        let pp = ModelParams::pinning(p.lambda, hp, n, ep)?;
        let bp = BruteForce::new(&pp, omega)?;
        let a = partition(&pp, omega, &t)?;
        let b = partition_position_engine(&pp, omega)?;
        worst = worst.max(rel(a.log_z(), bp.log_z(ep))).max(rel(b.log_z(), bp.log_z(ep)));
        let sp = occupation_spectrum(&pp, omega, &t)?;
        for (x, y) in sp.log_z_by_m.iter().zip(bp.spectrum(ep)) {
            worst = worst.max(rel(*x, y));
        }
    }
    Ok(worst)
}

/// Every engine output against enumeration for all even `N <= n_max`.
pub fn oracle_equivalence(n_max: usize, configs_per_n: usize, seed: u64) -> Result<CheckResult> {
    if n_max > ORACLE_MAX_N {
        return Err(Error::BudgetExceeded {
            what: "oracle N",
            requested: n_max,
            cap: ORACLE_MAX_N,
        });
    }
    let jobs: Vec<(usize, u64)> = (2..=n_max)
        .step_by(2)
        .flat_map(|n| (0..configs_per_n as u64).map(move |c| (n, c)))
        .collect();
    let devs: Vec<f64> = jobs
        .par_iter()
        .map(|&(n, c)| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream((n as u64) << 32 | c);
            let (p, _, omega) = random_copolymer(&mut rng, n)?;
            oracle_deviation(&p, &omega, rng.random_range(0..=n))
        })
        .collect::<Result<_>>()?;
    let worst = devs.iter().copied().fold(0.0, f64::max);
    let tol = 1e-12;
    Ok(CheckResult {
        name: "oracle_equivalence".into(),
        passed: worst <= tol,
        max_deviation: worst,
        tolerance: tol,
        cases: jobs.len(),
        detail: format!("even N in [2, {n_max}], {configs_per_n} configurations each"),
    })
}

/// `u_n = sum_k f_k u_{n-k}` in the log tables.
pub fn renewal_identity(n_max: usize) -> Result<CheckResult> {
    let t = WalkTables::<f64>::build(n_max)?;
    let mut worst = 0.0_f64;
    for n in (2..=n_max).step_by(2) {
        let terms: Vec<f64> = (2..=n).step_by(2).map(|k| t.log_f(k) + t.log_u(n - k)).collect();
        worst = worst.max((log_sum_exp(&terms) - t.log_u(n)).exp_m1().abs());
    }
    let tol = 1e-12;
    Ok(CheckResult {
        name: "renewal_identity".into(),
        passed: worst <= tol,
        max_deviation: worst,
        tolerance: tol,
        cases: n_max / 2,
        detail: format!("even n <= {n_max}"),
    })
}

/// Spectrum log-sum-exp, lower bounds, monotonicity in `h` and engine
/// agreement on random configurations of length `n`.
pub fn invariants(n: usize, configs: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let t = WalkTables::<f64>::build(n)?;
    let rows: Vec<[f64; 4]> = (0..configs as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let (p, _, omega) = random_copolymer(&mut rng, n)?;
            let pt = partition(&p, &omega, &t)?;
            let sp = occupation_spectrum(&p, &omega, &t)?;
            let lse = rel(sp.log_total(), pt.log_z());
            // positive when a lower bound is violated
            let bound = (t.log_p_plus(n) - pt.log_z_f).max(t.log_p_pos_end0(n) - pt.log_z_c_at(n));
            let dh = rng.random_range(0.0..0.5);
            let higher = partition(&p.with_h(p.h + dh), &omega, &t)?;
            let mono = (higher.log_z_f - pt.log_z_f).max(higher.log_z_c_at(n) - pt.log_z_c_at(n));
            let pos = partition_position_engine(&p, &omega)?;
            let eng = rel(pos.log_z_f, pt.log_z_f).max(rel(pos.log_z_c_at(n), pt.log_z_c_at(n)));
            Ok([lse, bound, mono, eng])
        })
        .collect::<Result<_>>()?;
    let col = |i: usize| rows.iter().map(|r| r[i]).fold(f64::NEG_INFINITY, f64::max);
    let detail = format!("N = {n}, random (lambda, h, law, endpoint)");
    let mk = |name: &str, dev: f64, tol: f64| CheckResult {
        name: name.into(),
        passed: dev <= tol,
        max_deviation: dev,
        tolerance: tol,
        cases: configs,
        detail: detail.clone(),
    };
    Ok(vec![
        mk("spectrum_log_sum_exp", col(0), 1e-10),
        mk("lower_bounds", col(1).max(0.0), 1e-12),
        mk("monotone_in_h", col(2).max(0.0), 1e-12),
        mk("engine_agreement", col(3), 1e-10),
    ])
}

/// Histogram of `N_occ` over sampled skeletons against the exact spectrum;
/// every bin within 3 binomial standard errors.
pub fn sampler_histogram(n: usize, draws: usize, seed: u64) -> Result<CheckResult> {
    let t = WalkTables::<f64>::build(n)?;
    let omega = DisorderVector::sample(DisorderLaw::BernoulliPm1, n, seed, 0)?.values;
    let p = ModelParams::copolymer(0.4, 0.1, n, Endpoint::Free)?;
    let pt = partition(&p, &omega, &t)?;
    let probs = occupation_spectrum(&p, &omega, &t)?.probabilities();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut hist = vec![0usize; probs.len()];
    for _ in 0..draws {
        hist[sample_skeleton(&pt, &t, &mut rng)?.occupation() / 2] += 1;
    }
    let d = draws as f64;
    let mut worst = 0.0_f64;
    for (c, &q) in hist.iter().zip(&probs) {
        let se = (q * (1.0 - q) / d).sqrt();
        let dev = (*c as f64 / d - q).abs();
        let z = if se > 0.0 { dev / se } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
    }
    Ok(CheckResult {
        name: "sampler_histogram".into(),
        passed: worst <= 3.0,
        max_deviation: worst,
        tolerance: 3.0,
        cases: probs.len(),
        detail: format!("N = {n}, {draws} draws, deviation in standard errors"),
    })
}

pub fn run_verify_suite(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = vec![
        oracle_equivalence(cfg.oracle_n_max, cfg.configs_per_n, cfg.seed)?,
        renewal_identity(cfg.renewal_n)?,
    ];
    checks.extend(invariants(cfg.invariant_n, cfg.invariant_configs, cfg.seed)?);
    checks.push(sampler_histogram(cfg.sampler_n, cfg.sampler_draws, cfg.seed)?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        config: cfg.clone(),
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_green() {
        let cfg = VerifyConfig {
            oracle_n_max: 8,
            configs_per_n: 4,
            renewal_n: 200,
            invariant_n: 60,
            invariant_configs: 5,
            sampler_n: 20,
            sampler_draws: 2000,
            seed: 3,
        };
        let r = run_verify_suite(&cfg).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(r.check("renewal_identity").is_some());
    }

    #[test]
    fn oracle_cap_is_enforced() {
        assert!(oracle_equivalence(18, 1, 0).is_err());
    }
}
