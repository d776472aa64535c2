use copolymer::annealed::supermartingale_diagnostic;
use copolymer::experiments::*;
use copolymer::report::{read_jsonl, write_jsonl, ResultRecord};
use copolymer::*;

#[test]
fn replica_results_are_reproducible() {
    let p = ModelParams::copolymer(1.0, 1.5, 60, Endpoint::Constrained).unwrap();
    let a = deloc_tail_experiment(&p, DisorderLaw::GaussianStd, 20, 5).unwrap();
    let b = deloc_tail_experiment(&p, DisorderLaw::GaussianStd, 20, 5).unwrap();
    assert_eq!(a, b);
    let c = deloc_tail_experiment(&p, DisorderLaw::GaussianStd, 20, 6).unwrap();
    assert_ne!(a.mean, c.mean);
}

#[test]
fn interior_fit_is_negative_in_delocalized_phase() {
    let p = ModelParams::copolymer(1.0, 1.5, 200, Endpoint::Free).unwrap();
    let c = deloc_tail_experiment(&p, DisorderLaw::GaussianStd, 50, 1).unwrap();
    let r = deloc_tail_interior(&c, 3.0);
    assert_eq!(r.m_min, (3.0 * 200f64.ln()).ceil() as usize);
    assert!(r.significant, "{r:?}");
}

#[test]
fn zero_coupling_free_energy_is_zero() {
    let est = free_energy_estimate(&FreeEnergyConfig {
        lambda: 0.0,
        h: 0.3,
        law: DisorderLaw::BernoulliPm1,
        n_grid: vec![20, 40, 60],
        n_replicas: 50,
        seed: 1,
        endpoint: Endpoint::Free,
    })
    .unwrap();
    assert!(est.points.iter().all(|p| p.mean_f_f.abs() < 1e-14));
    assert!(!est.localized);
}

#[test]
fn supermartingale_is_asserted_above_upper_bound() {
    let r = supermartingale_diagnostic(0.5, 0.5, DisorderLaw::BernoulliPm1, &[10, 20, 40, 80]).unwrap();
    assert!(r.asserted && r.nonincreasing);
}

#[test]
fn records_round_trip() {
    let p = ModelParams::copolymer(1.0, 1.5, 40, Endpoint::Free).unwrap();
    let m = meander_endpoint_check(&p, DisorderLaw::GaussianStd, 3, 2).unwrap();
    let rec = ResultRecord::new("check-meander", &p, &m).unwrap().with_seed(2);
    let mut buf = Vec::new();
    write_jsonl(&mut buf, std::slice::from_ref(&rec)).unwrap();
    assert_eq!(read_jsonl(buf.as_slice()).unwrap(), vec![rec]);
}
