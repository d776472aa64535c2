//! Acceptance suite: one line per criterion.
//!
//! Exits nonzero on an engine error. Criterion failures are printed and
//! summarized; set `ACCEPTANCE_STRICT=1` to turn them into a nonzero exit.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use copolymer::annealed::{annealed_spectrum, annealed_vs_quenched, bernoulli_disorder_average};
use copolymer::experiments::*;
use copolymer::verify::{oracle_equivalence, run_verify_suite, VerifyConfig};
use copolymer::*;

const SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn oracle() -> Result<Outcome> {
    let c = oracle_equivalence(16, 50, SEED)?;
    outcome(
        c.passed,
        format!("{} configurations, max deviation {:.2e}", c.cases, c.max_deviation),
    )
}

fn cross_engine() -> Result<Outcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(SEED);
    let tables = WalkTables64::build(2000)?;
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let n = 2 * rng.random_range(1..=1000);
        let law = DisorderLaw::ALL[rng.random_range(0..3)];
        let ep = Endpoint::BOTH[rng.random_range(0..2)];
        let p = ModelParams::copolymer(rng.random_range(0.0..=2.0), rng.random_range(0.0..=2.0), n, ep)?;
        let omega = DisorderVector::sample(law, n, rng.random(), 0)?.values;
        let a = partition(&p, &omega, &tables)?.log_z();
        let b = partition_position_engine(&p, &omega)?.log_z();
        worst = worst.max((a - b).abs() / (1.0 + a.abs()));
    }
    outcome(worst <= 1e-10, format!("20 configurations, N <= 2000, max deviation {worst:.2e}"))
}

fn annealed() -> Result<Outcome> {
    let mut exact_dev = 0.0_f64;
    for n in (2..=12).step_by(2) {
        let t = WalkTables64::build(n)?;
        for ep in Endpoint::BOTH {
            let p = ModelParams::copolymer(0.6, 0.3, n, ep)?;
            let want = annealed_spectrum(&p, DisorderLaw::BernoulliPm1, &t)?.log_annealed_by_m;
            let got = bernoulli_disorder_average(&p, &t)?;
            for (a, b) in got.iter().zip(&want) {
                exact_dev = exact_dev.max((a - b).abs() / (1.0 + b.abs()));
            }
        }
    }
    let t = WalkTables64::build(40)?;
    let mut worst_z = 0.0_f64;
    let mut bad = Vec::new();
    for ep in Endpoint::BOTH {
        let p = ModelParams::copolymer(0.6, 0.3, 40, ep)?;
        let r = annealed_vs_quenched(&p, DisorderLaw::BernoulliPm1, &t, 10_000, SEED)?;
        for (i, z) in r.mc.expect("mc requested").z_scores.iter().enumerate() {
            worst_z = worst_z.max(z.abs());
            if z.abs() > 3.0 {
                bad.push(format!("{}:m={}", ep.tag(), 2 * i));
            }
        }
    }
    outcome(
        exact_dev <= 1e-12 && bad.is_empty(),
        format!(
            "enumeration deviation {exact_dev:.2e}; MC max |z| {worst_z:.2} ({} of 42 levels beyond 3 SE: {})",
            bad.len(),
            bad.join(" ")
        ),
    )
}

fn lipschitz() -> Result<Outcome> {
    let p = ModelParams::copolymer(1.0, 0.5, 100, Endpoint::Free)?;
    let r = concentration_experiment(&ConcentrationConfig {
        params: p,
        law: DisorderLaw::GaussianStd,
        m: 20,
        n_replicas: 200,
        lipschitz_trials: 1000,
        seed: SEED,
    })?;
    outcome(
        r.lipschitz_violations == 0,
        format!(
            "1000 trials, {} violations, worst lhs/rhs {:.3}",
            r.lipschitz_violations, r.worst_lipschitz_ratio
        ),
    )
}

fn occupation_tail() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for ep in Endpoint::BOTH {
        let p = ModelParams::copolymer(1.0, 1.5, 200, ep)?;
        let c = deloc_tail_experiment(&p, DisorderLaw::GaussianStd, 200, SEED)?;
        // m in {2, ..., 40}
        let worst = (1..=20)
            .map(|i| (c.mean[i] - c.envelope[i]) / c.se[i].max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = (1..=20).all(|i| c.mean[i] <= c.envelope[i] + 3.0 * c.se[i]);
        pass &= ok;
        parts.push(format!("{}: max (mean - envelope)/se {worst:.2}", ep.tag()));
    }
    outcome(pass, parts.join("; "))
}

fn last_exit() -> Result<Outcome> {
    let p = ModelParams::copolymer(1.0, 1.5, 400, Endpoint::Free)?;
    let grid: Vec<usize> = (4..=128).step_by(4).collect();
    let r = last_exit_experiment(&p, DisorderLaw::GaussianStd, &grid, 200, SEED, false)?;
    let fit = r.fit.expect("positive complements");
    outcome(
        r.slope_ok,
        format!("slope {:.3} +- {:.3}, envelope c {:.3}", fit.slope, fit.slope_se, r.envelope_c),
    )
}

fn critical() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for law in [DisorderLaw::BernoulliPm1, DisorderLaw::GaussianStd] {
        let cfg = CriticalConfig {
            law,
            n_grid: (40..=400).step_by(40).collect(),
            n_replicas: 200,
            seed: SEED,
            tol: 0.01,
            endpoint: Endpoint::Constrained,
        };
        let mut prev: Option<CriticalEstimate> = None;
        for lambda in [0.5, 1.0, 1.5] {
            let e = critical_point_estimate(lambda, &cfg)?;
            let meets = e.consistent_with_bounds();
            let mono = prev.as_ref().is_none_or(|p| e.h_hi >= p.h_lo);
            pass &= meets && mono;
            parts.push(format!(
                "{} l={lambda}: [{:.3},{:.3}] vs [{:.3},{:.3}]{}",
                law.tag(),
                e.h_lo,
                e.h_hi,
                e.h_lower_bound,
                e.h_upper_bound,
                if meets { "" } else { " (disjoint)" }
            ));
            prev = Some(e);
        }
    }
    outcome(pass, parts.join("; "))
}

fn interpolation() -> Result<Outcome> {
    let r = interpolation_experiment(&InterpolationConfig {
        v: 0.8,
        lambdas: (1..=8).map(|i| i as f64 / 10.0).collect(),
        laws: (DisorderLaw::BernoulliPm1, DisorderLaw::GaussianStd),
        n: 200,
        endpoint: Endpoint::Free,
        n_replicas: 1000,
        seed: SEED,
    })?;
    let slope = r.slope();
    let pass = r.conclusive && slope >= 2.5;
    let se = r.fit.map_or(f64::NAN, |f| f.slope_se);
    let status = if r.conclusive { "" } else { " (inconclusive)" };
    outcome(
        pass,
        format!("{} significant points, slope {slope:.2} +- {se:.2}{status}", r.n_significant),
    )
}

fn stretch() -> Result<Outcome> {
    let r = stretch_growth_experiment(&StretchConfig {
        lambda: 0.5,
        h: 0.4,
        q: -0.2,
        delta_prime: 0.0,
        law: DisorderLaw::BernoulliPm1,
        n_grid: vec![1_000, 10_000, 100_000],
        n_replicas: 50,
        seed: SEED,
        max_len: 1 << 27,
    })?;
    let medians: Vec<String> = r.points.iter().map(|p| format!("{:.3}", p.median_log_stat)).collect();
    let last = r.points.last().expect("nonempty grid");
    let expo_ok = (0.8..=1.2).contains(&last.median_tau_exponent);
    outcome(
        r.median_increasing && expo_ok,
        format!(
            "median ln stat [{}]{}, ln tau/ln N at N=1e5 {:.3}{}",
            medians.join(", "),
            if r.median_increasing { "" } else { " (not increasing)" },
            last.median_tau_exponent,
            if expo_ok { "" } else { " (outside [0.8, 1.2])" }
        ),
    )
}

fn invariant_suite() -> Result<Outcome> {
    let r = run_verify_suite(&VerifyConfig {
        seed: SEED,
        ..VerifyConfig::default()
    })?;
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    outcome(
        r.passed,
        format!("{} checks, failed: [{}]", r.checks.len(), failed.join(", ")),
    )
}

fn meander() -> Result<Outcome> {
    let p = ModelParams::copolymer(1.0, 1.5, 400, Endpoint::Free)?;
    let big = meander_endpoint_check(&p, DisorderLaw::GaussianStd, 200, SEED)?;
    let small = meander_endpoint_check(&p.with_n(100), DisorderLaw::GaussianStd, 200, SEED)?;
    outcome(
        big.close,
        format!("KS {:.4} at N=400 ({:.4} at N=100)", big.ks, small.ks),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Result<Outcome>;
    let criteria: [(u32, &str, Check, bool); 11] = [
        (1, "oracle equivalence", oracle, true),
        (2, "cross-engine agreement", cross_engine, true),
        (3, "annealed identity", annealed, true),
        (4, "Lipschitz bound", lipschitz, true),
        (5, "occupation tail", occupation_tail, true),
        (6, "last-exit decay", last_exit, true),
        (7, "critical-curve bounds", critical, true),
        (8, "interpolation slope", interpolation, true),
        (9, "stretch growth", stretch, true),
        (10, "invariant suite", invariant_suite, true),
        (11, "meander endpoint (exploratory)", meander, false),
    ];
    let filter: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut failed = Vec::new();
    let mut errored = false;
    for (id, name, check, blocking) in criteria {
        if filter.as_ref().is_some_and(|f| !f.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let secs = || t.elapsed().as_secs_f64();
        match check() {
            Ok(o) => {
                let tag = match (o.pass, blocking) {
                    (true, _) => "PASS",
                    (false, true) => "FAIL",
                    (false, false) => "FAIL (non-blocking)",
                };
                println!("criterion {id:>2} {tag}: {name}: {} [{:.1}s]", o.detail, secs());
                if !o.pass && blocking {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} ERROR: {name}: {e} [{:.1}s]", secs());
                errored = true;
            }
        }
    }
    println!(
        "acceptance summary: {} blocking criteria failed {:?}",
        failed.len(),
        failed
    );
    if errored || (strict && !failed.is_empty()) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
