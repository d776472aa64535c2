use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::*;
use crate::disorder::{DisorderLaw, DisorderVector};
use crate::model::Endpoint;
use crate::num::log_sum_exp;
use crate::oracle::BruteForce;
use crate::walk::{log_occupation_law, WalkTables};

fn tables(n: usize) -> WalkTables<f64> {
    WalkTables::build(n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn random_config(rng: &mut ChaCha12Rng, n: usize) -> (ModelParams, Vec<f64>) {
    let law = DisorderLaw::ALL[rng.random_range(0..3)];
    let lambda = rng.random_range(0.0..2.0);
    let h = rng.random_range(0.0..2.0);
    let ep = Endpoint::BOTH[rng.random_range(0..2)];
    let omega = DisorderVector::sample(law, n, rng.random(), 0).unwrap().values;
    (ModelParams::copolymer(lambda, h, n, ep).unwrap(), omega)
}

#[test]
fn two_step_constrained_value() {
    let p = ModelParams::copolymer(0.5, 0.0, 2, Endpoint::Constrained).unwrap();
    let omega = [1.0, 1.0];
    let want = (1.0 + (-2.0f64).exp()) / 4.0;
    let a = partition(&p, &omega, &tables(2)).unwrap();
    let b = partition_position_engine(&p, &omega).unwrap();
    assert!((a.log_z().exp() - want).abs() < 1e-15);
    assert!((b.log_z().exp() - want).abs() < 1e-15);
    assert!((want - 0.283_833_820_809_153_2).abs() < 1e-15);
}

#[test]
fn zero_coupling_is_walk_probability() {
    let n = 50;
    let t = tables(n);
    let omega = DisorderVector::sample(DisorderLaw::GaussianStd, n, 1, 0).unwrap().values;
    let p = ModelParams::copolymer(0.0, 0.7, n, Endpoint::Free).unwrap();
    let pt = partition(&p, &omega, &t).unwrap();
    assert!(pt.log_z_f.abs() < 1e-13);
    for k in (0..=n).step_by(2) {
        assert!((pt.log_z_c_at(k) - t.log_u(k)).abs() < 1e-12);
    }
    let pos = partition_position_engine(&p, &omega).unwrap();
    assert!(pos.log_z_f.abs() < 1e-13);
}

#[test]
fn engines_agree() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let t = tables(400);
    for _ in 0..6 {
        let (p, omega) = random_config(&mut rng, 400);
        let a = partition(&p, &omega, &t).unwrap();
        let b = partition_position_engine(&p, &omega).unwrap();
        assert!(rel(a.log_z_f, b.log_z_f) < 1e-10);
        for (x, y) in a.log_z_c.iter().zip(&b.log_z_c) {
            assert!(rel(*x, *y) < 1e-10, "{x} vs {y}");
        }
    }
}

#[test]
fn pinning_engines_agree() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    let t = tables(200);
    for _ in 0..4 {
        let h = rng.random_range(-1.0..1.0);
        let omega = DisorderVector::sample(DisorderLaw::BernoulliPm1, 200, rng.random(), 0)
            .unwrap()
            .values;
        for ep in Endpoint::BOTH {
            let p = ModelParams::pinning(0.8, h, 200, ep).unwrap();
            let a = partition(&p, &omega, &t).unwrap();
            let b = partition_position_engine(&p, &omega).unwrap();
            assert!(rel(a.log_z(), b.log_z()) < 1e-10);
        }
    }
}

#[test]
fn small_n_matches_enumeration() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for n in [2, 4, 8, 12] {
        let t = tables(n);
        for _ in 0..5 {
            let (p, omega) = random_config(&mut rng, n);
            let bf = BruteForce::new(&p, &omega).unwrap();
            let pt = partition(&p, &omega, &t).unwrap();
            for ep in Endpoint::BOTH {
                assert!(rel(pt.log_z_for(ep), bf.log_z(ep)) < 1e-12);
                let sp = occupation_spectrum(&p.with_endpoint(ep), &omega, &t).unwrap();
                for (x, y) in sp.log_z_by_m.iter().zip(bf.spectrum(ep)) {
                    assert!(rel(*x, y) < 1e-12);
                }
                let dm = delta_marginals(&p.with_endpoint(ep), &omega).unwrap();
                for (x, y) in dm.iter().zip(bf.delta_marginals(ep)) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
            let free = p.with_endpoint(Endpoint::Free);
            let profile = last_exit_profile(&partition(&free, &omega, &t).unwrap(), &t).unwrap();
            for (i, v) in profile.iter().enumerate() {
                assert!(rel(*v, bf.last_exit(2 * i)) < 1e-12);
            }
            let em = endpoint_marginal(&free, &omega).unwrap();
            for (x, y) in em.iter().zip(bf.endpoint_marginal()) {
                assert!((x - y).abs() < 1e-12);
            }
            let c = p.with_endpoint(Endpoint::Constrained);
            for l1 in (0..=n / 2).step_by(2) {
                for l2 in (0..=n / 2).step_by(2) {
                    let v = two_sided_exit_partition(&c, &omega, &t, l1, l2).unwrap();
                    assert!(rel(v, bf.two_sided_exit(l1, l2)) < 1e-12, "n={n} l1={l1} l2={l2}");
                }
            }
        }
    }
}

#[test]
fn conditioned_marginals_match_enumeration() {
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let (p, omega) = random_config(&mut rng, 10);
    let bf = BruteForce::new(&p, &omega).unwrap();
    for m in (0..=10).step_by(2) {
        let got = delta_marginals_given_occupation(&p, &omega, m).unwrap();
        let want = bf.delta_marginals_given(p.endpoint, m);
        for (x, y) in got.iter().zip(&want) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((got.iter().sum::<f64>() - m as f64).abs() < 1e-10);
    }
}

#[test]
fn spectrum_sums_to_partition_and_zero_entry_is_fixed() {
    let n = 120;
    let t = tables(n);
    let omega = DisorderVector::sample(DisorderLaw::UniformBounded, n, 3, 0).unwrap().values;
    for ep in Endpoint::BOTH {
        let p = ModelParams::copolymer(1.1, 0.4, n, ep).unwrap();
        let sp = occupation_spectrum(&p, &omega, &t).unwrap();
        let z = partition(&p, &omega, &t).unwrap().log_z();
        assert!(rel(sp.log_total(), z) < 1e-10);
        // no negative monomer: weight one, probability u_N or u_N / (N/2 + 1)
        let want = match ep {
            Endpoint::Free => t.log_u(n),
            Endpoint::Constrained => t.log_u(n) - ((n / 2 + 1) as f64).ln(),
        };
        assert!((sp.log_z_by_m[0] - want).abs() < 1e-12);
    }
}

#[test]
fn zero_coupling_spectrum_is_arcsine_law() {
    let n = 60;
    let t = tables(n);
    let omega = vec![0.3; n];
    let p = ModelParams::copolymer(0.0, 0.5, n, Endpoint::Free).unwrap();
    let sp = occupation_spectrum(&p, &omega, &t).unwrap();
    let law = log_occupation_law(&t, n, Endpoint::Free);
    for (x, y) in sp.log_z_by_m.iter().zip(&law) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn spectrum_budget() {
    let t = tables(700);
    let omega = vec![0.0; 700];
    let p = ModelParams::copolymer(1.0, 0.5, 700, Endpoint::Free).unwrap();
    assert!(matches!(
        occupation_spectrum(&p, &omega, &t),
        Err(crate::Error::BudgetExceeded { .. })
    ));
    assert!(occupation_spectrum_with_budget(&p, &omega[..8], &t, 10).is_err());
}

#[test]
fn marginals_sum_to_spectrum_mean() {
    let n = 100;
    let t = tables(n);
    let omega = DisorderVector::sample(DisorderLaw::GaussianStd, n, 4, 0).unwrap().values;
    for ep in Endpoint::BOTH {
        let p = ModelParams::copolymer(0.6, 0.3, n, ep).unwrap();
        let dm = delta_marginals(&p, &omega).unwrap();
        assert!(dm.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let mean = occupation_spectrum(&p, &omega, &t).unwrap().mean();
        assert!((dm.iter().sum::<f64>() - mean).abs() < 1e-8);
    }
    let p = ModelParams::copolymer(0.0, 0.0, n, Endpoint::Free).unwrap();
    for x in delta_marginals(&p, &omega).unwrap() {
        assert!((x - 0.5).abs() < 1e-12);
    }
}

#[test]
fn endpoint_law_at_zero_coupling_is_binomial() {
    let n = 30;
    let p = ModelParams::copolymer(0.0, 0.0, n, Endpoint::Free).unwrap();
    let em = endpoint_marginal(&p, &vec![0.0; n]).unwrap();
    let t = tables(n);
    assert!((em.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((em[n] - t.log_u(n).exp()).abs() < 1e-14);
    assert_eq!(em[n + 1], 0.0);
    let p = ModelParams::copolymer(1.0, 2.0, 400, Endpoint::Free).unwrap();
    let omega = DisorderVector::sample(DisorderLaw::GaussianStd, 400, 2, 0).unwrap().values;
    let em = endpoint_marginal(&p, &omega).unwrap();
    let below: f64 = em[..=400].iter().sum();
    assert!(below < 0.05, "{below}");
}

#[test]
fn lower_bounds_and_monotone_in_h() {
    let n = 200;
    let t = tables(n);
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for _ in 0..5 {
        let (p, omega) = random_config(&mut rng, n);
        let pt = partition(&p, &omega, &t).unwrap();
        assert!(pt.log_z_f >= t.log_p_plus(n) - 1e-12);
        assert!(pt.log_z_c_at(n) >= t.log_p_pos_end0(n) - 1e-12);
        let higher = partition(&p.with_h(p.h + 0.1), &omega, &t).unwrap();
        assert!(higher.log_z() <= pt.log_z() + 1e-12);
    }
}

#[test]
fn shift_identity_holds() {
    let n = 100;
    let t = tables(n);
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    for _ in 0..5 {
        let (p, omega) = random_config(&mut rng, n);
        let eps = rng.random_range(0.0..=p.h);
        let m = 2 * rng.random_range(0..=n / 2);
        assert!(shift_identity_check(&p, &omega, &t, eps, m).unwrap());
        assert!(shift_identity_check(&p, &omega, &t, 0.0, m).unwrap());
    }
    let p = ModelParams::copolymer(1.0, 0.1, n, Endpoint::Free).unwrap();
    assert!(shift_identity_check(&p, &vec![0.0; n], &t, 0.2, 0).is_err());
}

#[test]
fn lipschitz_trivial_cases() {
    let n = 40;
    let t = tables(n);
    let p = ModelParams::copolymer(1.0, 0.5, n, Endpoint::Constrained).unwrap();
    let a = DisorderVector::sample(DisorderLaw::GaussianStd, n, 1, 0).unwrap().values;
    let b = DisorderVector::sample(DisorderLaw::GaussianStd, n, 2, 0).unwrap().values;
    let same = lipschitz_check(&p, &a, &a, &t, 10).unwrap();
    assert_eq!(same.lhs, 0.0);
    assert!(same.ok);
    let zero = lipschitz_check(&p, &a, &b, &t, 0).unwrap();
    assert!(zero.lhs < 1e-15 && zero.ok);
    let r = lipschitz_check(&p, &a, &b, &t, 20).unwrap();
    assert!(r.ok && r.lhs > 0.0);
}

#[test]
fn last_exit_edges() {
    let n = 80;
    let t = tables(n);
    let omega = DisorderVector::sample(DisorderLaw::BernoulliPm1, n, 12, 0).unwrap().values;
    let p = ModelParams::copolymer(0.9, 0.6, n, Endpoint::Free).unwrap();
    let full = partition(&p, &omega, &t).unwrap().log_z_f;
    assert!(rel(last_exit_partition(&p, &omega, &t, n).unwrap(), full) < 1e-12);
    assert!((last_exit_partition(&p, &omega, &t, 0).unwrap() - t.log_u(n)).abs() < 1e-12);
    let prof = last_exit_profile(&partition(&p, &omega, &t).unwrap(), &t).unwrap();
    assert!(prof.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    let c = p.with_endpoint(Endpoint::Constrained);
    let zc = partition(&c, &omega, &t).unwrap().log_z();
    assert!(rel(two_sided_exit_partition(&c, &omega, &t, n / 2, n / 2).unwrap(), zc) < 1e-12);
    assert!(last_exit_partition(&c, &omega, &t, 4).is_err());
    assert!(two_sided_exit_partition(&p, &omega, &t, 4, 4).is_err());
}

#[test]
fn two_sided_at_zero_coupling_is_a_probability() {
    let n = 12;
    let t = tables(n);
    let p = ModelParams::copolymer(0.0, 0.0, n, Endpoint::Constrained).unwrap();
    let omega = vec![0.0; n];
    let bf = BruteForce::new(&p, &omega).unwrap();
    let v = two_sided_exit_partition(&p, &omega, &t, 2, 4).unwrap();
    // paths counted directly: 2^12 * P(event, S_12 = 0)
    let count = crate::walk::enumerate_paths(n)
        .unwrap()
        .filter(|q| q.end_at_zero)
        .filter(|q| {
            let a: Vec<usize> = (1..=n).filter(|&i| q.delta[i - 1] == 1).collect();
            let first = a.iter().copied().filter(|&i| i <= n / 2).max().unwrap_or(0);
            let second = a.iter().copied().filter(|&i| i >= n / 2).min().unwrap_or(n);
            first <= 2 || second >= n - 4
        })
        .count();
    assert!((v.exp() * 4096.0 - count as f64).abs() < 1e-9);
    assert!(rel(v, bf.two_sided_exit(2, 4)) < 1e-12);
}

#[test]
fn skeleton_sampler_is_deterministic_and_consistent() {
    let n = 40;
    let t = tables(n);
    let omega = DisorderVector::sample(DisorderLaw::GaussianStd, n, 1, 0).unwrap().values;
    for ep in Endpoint::BOTH {
        let p = ModelParams::copolymer(0.7, 0.2, n, ep).unwrap();
        let pt = partition(&p, &omega, &t).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| sample_skeleton(&pt, &t, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        let a = draw(3);
        assert_eq!(a, draw(3));
        for s in &a {
            assert_eq!(s.zeros[0], 0);
            assert!(s.zeros.windows(2).all(|w| w[1] > w[0] && (w[1] - w[0]) % 2 == 0));
            assert_eq!(s.signs.len(), s.zeros.len() - 1);
            assert!(s.occupation() <= n);
            if ep == Endpoint::Constrained {
                assert_eq!(*s.zeros.last().unwrap(), n);
                assert_eq!(s.final_segment, FinalSegment::None);
            }
        }
    }
}

#[test]
fn skeleton_histogram_matches_spectrum() {
    let n = 30;
    let t = tables(n);
    let omega = DisorderVector::sample(DisorderLaw::BernoulliPm1, n, 21, 0).unwrap().values;
    let p = ModelParams::copolymer(0.4, 0.1, n, Endpoint::Free).unwrap();
    let pt = partition(&p, &omega, &t).unwrap();
    let probs = occupation_spectrum(&p, &omega, &t).unwrap().probabilities();
    let draws = 20_000;
    let mut hist = vec![0usize; probs.len()];
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    for _ in 0..draws {
        hist[sample_skeleton(&pt, &t, &mut rng).unwrap().occupation() / 2] += 1;
    }
    for (c, &q) in hist.iter().zip(&probs) {
        let se = (q * (1.0 - q) / draws as f64).sqrt();
        let emp = *c as f64 / draws as f64;
        assert!((emp - q).abs() <= 4.0 * se + 1e-9, "emp {emp} exact {q}");
    }
}

#[test]
fn zero_coupling_signs_are_fair() {
    let n = 200;
    let t = tables(n);
    let p = ModelParams::copolymer(0.0, 0.3, n, Endpoint::Constrained).unwrap();
    let pt = partition(&p, &vec![0.0; n], &t).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let (mut neg, mut total) = (0usize, 0usize);
    for _ in 0..2000 {
        let s = sample_skeleton(&pt, &t, &mut rng).unwrap();
        neg += s.signs.iter().filter(|&&x| x < 0).count();
        total += s.signs.len();
    }
    let frac = neg as f64 / total as f64;
    assert!((frac - 0.5).abs() < 4.0 * (0.25 / total as f64).sqrt());
}

#[test]
fn long_chain_engine_matches_exact() {
    let n = 2000;
    let t = tables(n);
    for (law, seed, lambda, h) in [
        (DisorderLaw::BernoulliPm1, 1, 0.5, 0.4),
        (DisorderLaw::GaussianStd, 2, 1.0, 0.9),
        (DisorderLaw::UniformBounded, 3, 0.3, 0.05),
        (DisorderLaw::BernoulliPm1, 4, 1.5, 0.0),
    ] {
        let omega = DisorderVector::sample(law, n, seed, 0).unwrap().values;
        let p = ModelParams::copolymer(lambda, h, n, Endpoint::Free).unwrap();
        let exact = partition(&p, &omega, &t).unwrap().log_z_f;
        let fast = log_partition_free_long(lambda, h, &omega, n).unwrap();
        assert!(rel(exact, fast.log_z_f) < 1e-10, "{law:?}: {exact} vs {}", fast.log_z_f);
        let zc = partition(&p.with_endpoint(Endpoint::Constrained), &omega, &t).unwrap().log_z();
        assert!(rel(zc, fast.log_z_c) < 1e-10);
    }
}

#[test]
fn f32_engine_is_close() {
    let n = 100;
    let omega = DisorderVector::sample(DisorderLaw::GaussianStd, n, 8, 0).unwrap();
    let p = ModelParams::copolymer(0.8, 0.5, n, Endpoint::Free).unwrap();
    let a = partition(&p, &omega.values, &tables(n)).unwrap().log_z_f;
    let b = partition(&p, &omega.cast::<f32>(), &WalkTables::<f32>::build(n).unwrap())
        .unwrap()
        .log_z_f;
    assert!((a - b as f64).abs() < 1e-3 * (1.0 + a.abs()));
}

#[test]
fn invalid_inputs() {
    let t = tables(10);
    let p = ModelParams::copolymer(1.0, 0.5, 10, Endpoint::Free).unwrap();
    assert!(partition(&p, &[0.0; 8], &t).is_err());
    let mut w = vec![0.0; 10];
    w[3] = f64::NAN;
    assert!(partition(&p, &w, &t).is_err());
    assert!(partition(&p.with_n(12), &[0.0; 12], &t).is_err());
    let _ = log_sum_exp(&[0.0_f64]);
}
