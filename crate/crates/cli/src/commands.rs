use std::io::Write;

use copolymer::annealed::{annealed_vs_quenched, bernoulli_disorder_average, DISORDER_ENUMERATION_MAX_N};
use copolymer::disorder::{write_binary, write_csv};
use copolymer::experiments::*;
use copolymer::oracle::BruteForce;
use copolymer::partition::{
    log_partition_free_long, occupation_spectrum_with_budget, partition_position_engine, sample_skeleton,
};
use copolymer::report::{write_spectrum_csv, write_table_csv, ResultRecord, Status};
use copolymer::verify::{run_verify_suite, VerifyConfig};
use copolymer::{partition, DisorderLaw, DisorderVector, Endpoint, Error, Result, WalkTables64};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::run::RunDir;
use crate::Command;

/// Stream offset separating path-sampling randomness from disorder streams.
const SAMPLER_STREAM: u64 = 1 << 48;

pub fn execute(cmd: Command, cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    use Command::*;
    match cmd {
        GenDisorder => gen_disorder(cfg, dir),
        Partition => partition_cmd(cfg, dir),
        Spectrum => spectrum(cfg, dir),
        FreeEnergy => free_energy(cfg, dir),
        CriticalPoint => critical_point(cfg, dir),
        SlopeOrigin => slope_origin(cfg, dir),
        CheckDelocTail => deloc_tail(cfg, dir),
        CheckLastExit => last_exit(cfg, dir),
        CheckConcentration => concentration(cfg, dir),
        CheckInterpolation => interpolation(cfg, dir),
        CheckStretch => stretch(cfg, dir),
        CheckMeander => meander(cfg, dir),
        CheckAnnealed => annealed(cfg, dir),
        SamplePaths => sample_paths(cfg, dir),
        OracleVerify => oracle_verify(cfg, dir),
    }
}

fn record(cfg: &RunConfig, params: &impl Serialize, result: &impl Serialize) -> Result<ResultRecord> {
    Ok(ResultRecord::new(&cfg.experiment, params, result)?.with_seed(cfg.seed))
}

fn table(dir: &mut RunDir, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = dir.file(name)?;
    write_table_csv(&mut w, header, rows)?;
    w.flush()?;
    Ok(())
}

fn require_spectrum_cap(cfg: &RunConfig) -> Result<()> {
    if cfg.n > cfg.spectrum_cap {
        return Err(Error::BudgetExceeded {
            what: "spectrum N",
            requested: cfg.n,
            cap: cfg.spectrum_cap,
        });
    }
    Ok(())
}

fn require_enumeration_cap(cfg: &RunConfig, n: usize) -> Result<()> {
    if n > cfg.enumeration_cap {
        return Err(Error::BudgetExceeded {
            what: "enumeration N",
            requested: n,
            cap: cfg.enumeration_cap,
        });
    }
    Ok(())
}

fn gen_disorder(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    #[derive(Serialize)]
    struct Summary {
        replica: u64,
        mean: f64,
        min: f64,
        max: f64,
    }
    let mut summaries = Vec::new();
    for r in 0..cfg.replicas as u64 {
        let replica = cfg.replica + r;
        let v = DisorderVector::sample(cfg.law, cfg.n, cfg.seed, replica)?;
        let mut w = dir.file(&format!("disorder_r{replica}.bin"))?;
        write_binary(&mut w, &v)?;
        w.flush()?;
        let mut w = dir.file(&format!("disorder_r{replica}.csv"))?;
        write_csv(&mut w, &v)?;
        w.flush()?;
        summaries.push(Summary {
            replica,
            mean: v.values.iter().sum::<f64>() / v.len() as f64,
            min: v.values.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let params = serde_json::json!({"law": cfg.law, "n": cfg.n, "first_replica": cfg.replica, "replicas": cfg.replicas});
    dir.record(record(cfg, &params, &summaries)?);
    Ok(())
}

fn partition_cmd(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        replica: u64,
        log_z_f: f64,
        log_z_c: f64,
    }
    let p = cfg.params()?;
    let tables = match cfg.engine.as_str() {
        "excursion" => Some(WalkTables64::build(cfg.n)?),
        "enumeration" => {
            require_enumeration_cap(cfg, cfg.n)?;
            None
        }
        _ => None,
    };
    let mut rows = Vec::new();
    for r in 0..cfg.replicas as u64 {
        let replica = cfg.replica + r;
        let omega = DisorderVector::sample(cfg.law, cfg.n, cfg.seed, replica)?.values;
        let (log_z_f, log_z_c) = match cfg.engine.as_str() {
            "excursion" => {
                let pt = partition(&p, &omega, tables.as_ref().expect("built"))?;
                (pt.log_z_for(Endpoint::Free), pt.log_z_for(Endpoint::Constrained))
            }
            "position" => {
                let f = partition_position_engine(&p.with_endpoint(Endpoint::Free), &omega)?.log_z();
                let c = partition_position_engine(&p.with_endpoint(Endpoint::Constrained), &omega)?.log_z();
                (f, c)
            }
            "long" => {
                if p.variant != copolymer::Variant::Copolymer {
                    return Err(Error::InvalidArgument {
                        field: "engine",
                        reason: "the long-chain engine covers the copolymer variant only".into(),
                    });
                }
                let l = log_partition_free_long(p.lambda, p.h, &omega, p.n)?;
                (l.log_z_f, l.log_z_c)
            }
            _ => {
                let bf = BruteForce::new(&p, &omega)?;
                (bf.log_z(Endpoint::Free), bf.log_z(Endpoint::Constrained))
            }
        };
        rows.push(Row {
            replica,
            log_z_f,
            log_z_c,
        });
    }
    let n = cfg.n as f64;
    let csv_rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.replica as f64, r.log_z_f, r.log_z_c, r.log_z_f / n, r.log_z_c / n])
        .collect();
    table(dir, "partition.csv", &["replica", "log_z_f", "log_z_c", "f_f", "f_c"], &csv_rows)?;
    let params = serde_json::json!({"model": p, "law": cfg.law, "engine": cfg.engine, "first_replica": cfg.replica});
    dir.record(record(cfg, &params, &rows)?);
    Ok(())
}

fn spectrum(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let tables = WalkTables64::build(cfg.n)?;
    let omega = DisorderVector::sample(cfg.law, cfg.n, cfg.seed, cfg.replica)?.values;
    let s = occupation_spectrum_with_budget(&p, &omega, &tables, cfg.spectrum_cap)?;
    let mut w = dir.file("spectrum.csv")?;
    write_spectrum_csv(&mut w, &s)?;
    w.flush()?;
    let result = serde_json::json!({
        "log_total": s.log_total(),
        "mean_occupation": s.mean(),
        "log_z_by_m": s.log_z_by_m,
    });
    let params = serde_json::json!({"model": p, "law": cfg.law, "replica": cfg.replica});
    dir.record(record(cfg, &params, &result)?);
    Ok(())
}

fn free_energy(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let fc = FreeEnergyConfig {
        lambda: cfg.lambda,
        h: cfg.h,
        law: cfg.law,
        n_grid: cfg.n_grid.clone(),
        n_replicas: cfg.replicas,
        seed: cfg.seed,
        endpoint: cfg.endpoint,
    };
    let est = free_energy_estimate(&fc)?;
    let rows: Vec<Vec<f64>> = est
        .points
        .iter()
        .map(|p| vec![p.n as f64, p.mean_f_c, p.se_f_c, p.mean_f_f, p.se_f_f])
        .collect();
    table(dir, "free_energy.csv", &["n", "mean_f_c", "se_f_c", "mean_f_f", "se_f_f"], &rows)?;
    dir.record(record(cfg, &fc, &est)?);
    Ok(())
}

fn critical_config(cfg: &RunConfig) -> CriticalConfig {
    CriticalConfig {
        law: cfg.law,
        n_grid: cfg.n_grid.clone(),
        n_replicas: cfg.replicas,
        seed: cfg.seed,
        tol: cfg.tol,
        endpoint: cfg.endpoint,
    }
}

fn critical_point(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let cc = critical_config(cfg);
    let mut estimates: Vec<CriticalEstimate> = Vec::new();
    for &lambda in &cfg.lambda_grid {
        estimates.push(critical_point_estimate(lambda, &cc)?);
    }
    let rows: Vec<Vec<f64>> = estimates
        .iter()
        .map(|e| vec![e.lambda, e.h_lo, e.h_hi, e.h_c, e.h_lower_bound, e.h_upper_bound])
        .collect();
    table(dir, "critical.csv", &["lambda", "h_lo", "h_hi", "h_c", "h_lower", "h_upper"], &rows)?;
    let within = estimates.iter().all(|e| e.consistent_with_bounds());
    let monotone = estimates.windows(2).all(|w| w[1].h_hi >= w[0].h_lo);
    let result = serde_json::json!({
        "estimates": estimates,
        "within_bounds": within,
        "monotone": monotone,
    });
    let params = serde_json::json!({"config": cc, "lambdas": cfg.lambda_grid});
    dir.record(record(cfg, &params, &result)?.with_pass(within && monotone));
    Ok(())
}

fn slope_origin(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let cc = critical_config(cfg);
    let r = slope_at_origin(&cfg.lambda_grid, &cc)?;
    let rows: Vec<Vec<f64>> = r
        .points
        .iter()
        .map(|p| vec![p.lambda, p.ratio, p.ratio_lo, p.ratio_hi])
        .collect();
    table(dir, "slope_origin.csv", &["lambda", "ratio", "ratio_lo", "ratio_hi"], &rows)?;
    let params = serde_json::json!({"config": cc, "lambdas": cfg.lambda_grid});
    dir.record(record(cfg, &params, &r)?.with_pass(r.within_band));
    Ok(())
}

fn deloc_tail(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    require_spectrum_cap(cfg)?;
    let p = cfg.params()?;
    if let Some(&m) = cfg.m_grid.iter().find(|&&m| m > cfg.n) {
        return Err(Error::InvalidArgument {
            field: "m_grid",
            reason: format!("entry {m} exceeds N = {}", cfg.n),
        });
    }
    let curve = deloc_tail_experiment(&p, cfg.law, cfg.replicas, cfg.seed)?;
    let interior = deloc_tail_interior(&curve, cfg.q_hat);
    let denom = -(-curve.beta).exp_m1();
    // the occupation is even, so P(N_occ >= m) = P(N_occ >= m + 1) for odd m
    let mut rows = Vec::new();
    let mut pass = true;
    for &m in &cfg.m_grid {
        let i = m.div_ceil(2);
        let env = (-curve.beta * m as f64).exp() / denom;
        let ok = curve.mean[i] <= env + 3.0 * curve.se[i];
        pass &= ok;
        rows.push(vec![m as f64, curve.mean[i], curve.se[i], env, ok as u8 as f64]);
    }
    table(dir, "deloc_tail.csv", &["m", "mean", "se", "envelope", "within"], &rows)?;
    let params = serde_json::json!({"model": p, "law": cfg.law, "replicas": cfg.replicas, "m_grid": cfg.m_grid, "q_hat": cfg.q_hat});
    let result = serde_json::json!({"curve": curve, "interior": interior, "within_envelope_on_grid": pass});
    dir.record(record(cfg, &params, &result)?.with_pass(pass));
    Ok(())
}

fn last_exit(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let r = last_exit_experiment(&p, cfg.law, &cfg.ell_grid, cfg.replicas, cfg.seed, cfg.two_sided)?;
    let rows: Vec<Vec<f64>> = (0..r.ell.len())
        .map(|i| {
            let mut row = vec![r.ell[i] as f64, r.mean[i], r.se[i]];
            if let (Some(m), Some(s)) = (&r.two_sided_mean, &r.two_sided_se) {
                row.push(m.get(i).copied().unwrap_or(f64::NAN));
                row.push(s.get(i).copied().unwrap_or(f64::NAN));
            }
            row
        })
        .collect();
    let header: &[&str] = if r.two_sided_mean.is_some() {
        &["ell", "mean", "se", "two_sided_mean", "two_sided_se"]
    } else {
        &["ell", "mean", "se"]
    };
    table(dir, "last_exit.csv", header, &rows)?;
    let params = serde_json::json!({"model": p, "law": cfg.law, "replicas": cfg.replicas, "ell_grid": cfg.ell_grid, "two_sided": cfg.two_sided});
    dir.record(record(cfg, &params, &r)?.with_pass(r.slope_ok));
    Ok(())
}

fn concentration(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    require_spectrum_cap(cfg)?;
    let cc = ConcentrationConfig {
        params: cfg.params()?,
        law: cfg.law,
        m: cfg.m,
        n_replicas: cfg.replicas,
        lipschitz_trials: cfg.lipschitz_trials,
        seed: cfg.seed,
    };
    let r = concentration_experiment(&cc)?;
    let rows: Vec<Vec<f64>> = r
        .tails
        .iter()
        .map(|t| vec![t.u_over_sd, t.upper_frequency, t.lower_frequency, t.envelope, t.ok as u8 as f64])
        .collect();
    table(
        dir,
        "concentration_tails.csv",
        &["u_over_sd", "upper_frequency", "lower_frequency", "envelope", "ok"],
        &rows,
    )?;
    dir.record(record(cfg, &cc, &r)?.with_pass(r.lipschitz_violations == 0));
    Ok(())
}

fn interpolation(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let ic = InterpolationConfig {
        v: cfg.v,
        lambdas: cfg.lambda_grid.clone(),
        laws: (cfg.law, cfg.law2),
        n: cfg.n,
        endpoint: cfg.endpoint,
        n_replicas: cfg.replicas,
        seed: cfg.seed,
    };
    let r = interpolation_experiment(&ic)?;
    let rows: Vec<Vec<f64>> = r
        .points
        .iter()
        .map(|p| {
            vec![
                p.lambda,
                p.h,
                p.mean_first,
                p.se_first,
                p.mean_second,
                p.se_second,
                p.diff,
                p.diff_se,
                p.significant as u8 as f64,
            ]
        })
        .collect();
    table(
        dir,
        "interpolation.csv",
        &["lambda", "h", "mean_first", "se_first", "mean_second", "se_second", "diff", "diff_se", "significant"],
        &rows,
    )?;
    let status = if !r.conclusive {
        Status::Inconclusive
    } else if r.slope() >= 2.5 {
        Status::Ok
    } else {
        Status::Failed
    };
    dir.record(record(cfg, &ic, &r)?.with_status(status));
    Ok(())
}

fn stretch(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let sc = StretchConfig {
        lambda: cfg.lambda,
        h: cfg.h,
        q: cfg.q,
        delta_prime: cfg.delta_prime,
        law: cfg.law,
        n_grid: cfg.n_grid.clone(),
        n_replicas: cfg.replicas,
        seed: cfg.seed,
        max_len: cfg.max_len,
    };
    let r = stretch_growth_experiment(&sc)?;
    let rows: Vec<Vec<f64>> = r
        .points
        .iter()
        .map(|p| {
            vec![
                p.n as f64,
                p.r_n as f64,
                p.median_log_stat,
                p.q25_log_stat,
                p.q75_log_stat,
                p.median_tau_exponent,
            ]
        })
        .collect();
    table(
        dir,
        "stretch.csv",
        &["n", "r_n", "median_log_stat", "q25_log_stat", "q75_log_stat", "median_tau_exponent"],
        &rows,
    )?;
    let mut per = Vec::new();
    for p in &r.points {
        for (i, (&tau, &s)) in p.tau.iter().zip(&p.log_stat).enumerate() {
            per.push(vec![p.n as f64, i as f64, tau as f64, s]);
        }
    }
    table(dir, "stretch_replicas.csv", &["n", "replica", "tau", "log_stat"], &per)?;
    dir.record(record(cfg, &sc, &r)?.with_pass(r.median_increasing && r.tau_exponent_ok));
    Ok(())
}

fn meander(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let r = meander_endpoint_check(&p, cfg.law, cfg.replicas, cfg.seed)?;
    let n = cfg.n as i64;
    let rows: Vec<Vec<f64>> = r
        .endpoint_law
        .iter()
        .enumerate()
        .map(|(i, &pr)| vec![(i as i64 - n) as f64, pr])
        .collect();
    table(dir, "endpoint_law.csv", &["x", "probability"], &rows)?;
    let params = serde_json::json!({"model": p, "law": cfg.law, "replicas": cfg.replicas});
    dir.record(record(cfg, &params, &r)?.with_status(Status::Exploratory));
    Ok(())
}

fn annealed(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    require_spectrum_cap(cfg)?;
    let p = cfg.params()?;
    let tables = WalkTables64::build(cfg.n)?;
    let r = annealed_vs_quenched(&p, cfg.law, &tables, cfg.replicas, cfg.seed)?;
    let mc = r.mc.as_ref().expect("replicas requested");
    let enumeration = if cfg.law == DisorderLaw::BernoulliPm1
        && cfg.n <= DISORDER_ENUMERATION_MAX_N.min(cfg.enumeration_cap)
    {
        let got = bernoulli_disorder_average(&p, &tables)?;
        Some(
            got.iter()
                .zip(&r.log_annealed_by_m)
                .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    let rows: Vec<Vec<f64>> = r
        .m_values()
        .enumerate()
        .map(|(i, m)| {
            vec![
                m as f64,
                r.log_annealed_by_m[i],
                mc.log_mean_by_m[i],
                mc.rel_stderr_by_m[i],
                mc.z_scores[i],
            ]
        })
        .collect();
    table(dir, "annealed.csv", &["m", "log_annealed", "log_mc_mean", "rel_se", "z"], &rows)?;
    let max_z = mc.z_scores.iter().map(|z| z.abs()).fold(0.0, f64::max);
    let pass = max_z <= 3.0 && enumeration.is_none_or(|d| d <= 1e-12);
    let params = serde_json::json!({"model": p, "law": cfg.law, "replicas": cfg.replicas});
    let result = serde_json::json!({"report": r, "max_abs_z": max_z, "enumeration_max_deviation": enumeration});
    dir.record(record(cfg, &params, &result)?.with_pass(pass));
    Ok(())
}

fn sample_paths(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    let p = cfg.params()?;
    let tables = WalkTables64::build(cfg.n)?;
    let omega = DisorderVector::sample(cfg.law, cfg.n, cfg.seed, cfg.replica)?.values;
    let pt = partition(&p, &omega, &tables)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SAMPLER_STREAM + cfg.replica);
    let mut rows = Vec::with_capacity(cfg.draws);
    let mut hist = vec![0usize; cfg.n + 1];
    for d in 0..cfg.draws {
        let s = sample_skeleton(&pt, &tables, &mut rng)?;
        hist[s.occupation()] += 1;
        rows.push(vec![d as f64, s.occupation() as f64, s.last_exit() as f64, s.zero_count() as f64]);
    }
    table(dir, "paths.csv", &["draw", "occupation", "last_exit", "zero_count"], &rows)?;
    let exact = if cfg.n <= cfg.spectrum_cap {
        let s = occupation_spectrum_with_budget(&p, &omega, &tables, cfg.spectrum_cap)?;
        Some(s.probabilities())
    } else {
        None
    };
    let mut hrows = Vec::new();
    for (m, &c) in hist.iter().enumerate() {
        let ex = exact.as_ref().map_or(f64::NAN, |e| e.get(m / 2).copied().filter(|_| m % 2 == 0).unwrap_or(0.0));
        if c > 0 || ex > 0.0 {
            hrows.push(vec![m as f64, c as f64 / cfg.draws as f64, ex]);
        }
    }
    table(dir, "occupation_histogram.csv", &["m", "empirical", "exact"], &hrows)?;
    let mean = rows.iter().map(|r| r[1]).sum::<f64>() / cfg.draws as f64;
    let params = serde_json::json!({"model": p, "law": cfg.law, "replica": cfg.replica, "draws": cfg.draws});
    let result = serde_json::json!({"mean_occupation": mean, "histogram": hrows});
    dir.record(record(cfg, &params, &result)?);
    Ok(())
}

fn oracle_verify(cfg: &RunConfig, dir: &mut RunDir) -> Result<()> {
    require_enumeration_cap(cfg, cfg.n)?;
    let vc = VerifyConfig {
        oracle_n_max: cfg.n,
        configs_per_n: cfg.replicas,
        seed: cfg.seed,
        ..VerifyConfig::default()
    };
    let r = run_verify_suite(&vc)?;
    let mut w = dir.file("verify.csv")?;
    {
        let mut wr = csv::Writer::from_writer(&mut w);
        wr.write_record(["check", "passed", "max_deviation", "tolerance", "cases"])?;
        for c in &r.checks {
            wr.write_record([
                c.name.clone(),
                c.passed.to_string(),
                format!("{:e}", c.max_deviation),
                format!("{:e}", c.tolerance),
                c.cases.to_string(),
            ])?;
        }
        wr.flush()?;
    }
    w.flush()?;
    for c in &r.checks {
        eprintln!(
            "{:<28} {} max deviation {:.3e} (tolerance {:.1e}, {} cases)",
            c.name,
            if c.passed { "ok  " } else { "FAIL" },
            c.max_deviation,
            c.tolerance,
            c.cases
        );
    }
    dir.record(record(cfg, &vc, &r)?.with_pass(r.passed));
    Ok(())
}
