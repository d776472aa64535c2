//! Atypical stretches of the shifted disorder `omega_j + h`.
//!
//! With `D_j = sum_{i <= j} (omega_i + h) - q j`, the block `(k, n]` has average
//! at most `q` exactly when `D_n <= D_k`. Both the stopping time and the
//! longest-stretch profile reduce to prefix maxima of `D` over even indices.

use serde::{Deserialize, Serialize};

use super::{cramer_rate, DisorderLaw, DisorderStream};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchScan {
    pub q: f64,
    pub h: f64,
    /// Cramér rate of `omega_1 + h` at `q`.
    pub rate: f64,
    /// Minimal stretch length: largest even integer below `ln N / rate`.
    pub r_n: usize,
    /// First even time at which a stretch of length `>= r_n` has appeared.
    pub tau: usize,
    /// Length of the longest atypical stretch up to `tau`; it ends at `tau`.
    pub stretch_len: usize,
    /// `R_n` for `n = 2, 4, ..., tau` (entry `i` is `R_{2(i+1)}`).
    pub longest_by_n: Vec<usize>,
    /// `delta(lambda, h)` when the caller supplies `lambda`.
    pub delta: Option<f64>,
}

impl StretchScan {
    /// Sum of `omega_j + h` over the discovered stretch.
    pub fn stretch_sum(&self, omega: &[f64]) -> f64 {
        omega[self.tau - self.stretch_len..self.tau]
            .iter()
            .map(|w| w + self.h)
            .sum()
    }
}

/// `r_N`: the largest even integer strictly below `ln n / rate`.
pub fn min_stretch_len(n: usize, rate: f64) -> usize {
    let x = (n as f64).ln() / rate;
    if !x.is_finite() || x <= 2.0 {
        return 0;
    }
    let half = (x / 2.0).ceil() as usize;
    2 * (half - 1)
}

/// Scans a fixed slice. Fails with [`Error::NeedsMoreDisorder`] when no
/// stretch of length `r_N` ends inside it.
pub fn atypical_stretch_scan(
    omega: &[f64],
    law: DisorderLaw,
    h: f64,
    q: f64,
    n: usize,
) -> Result<StretchScan> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::invalid("N", format!("must be even and >= 2, got {n}")));
    }
    let rate = cramer_rate(law, h, q)?;
    let r_n = min_stretch_len(n, rate);
    if r_n == 0 {
        return Err(Error::invalid(
            "N",
            format!("ln N / rate must exceed 2 (N = {n}, rate = {rate})"),
        ));
    }
    let len = omega.len() - omega.len() % 2;
    // D at even times 0, 2, ..., len.
    let mut d_even = Vec::with_capacity(len / 2 + 1);
    d_even.push(0.0_f64);
    let mut acc = 0.0_f64;
    for (j, w) in omega[..len].iter().enumerate() {
        acc += w + h - q;
        if (j + 1) % 2 == 0 {
            d_even.push(acc);
        }
    }
    // Stopping time: D_n <= max over even k <= n - r_N of D_k.
    let lag = r_n / 2;
    let mut best_early = f64::NEG_INFINITY;
    let mut tau_half = None;
    for i in lag..d_even.len() {
        best_early = best_early.max(d_even[i - lag]);
        if d_even[i] <= best_early {
            tau_half = Some(i);
            break;
        }
    }
    let tau_half = tau_half.ok_or(Error::NeedsMoreDisorder { consumed: len })?;
    let longest_by_n = profile_from_d(&d_even[..=tau_half]);
    let stretch_len = *longest_by_n.last().expect("tau >= r_N >= 2");
    Ok(StretchScan {
        q,
        h,
        rate,
        r_n,
        tau: 2 * tau_half,
        stretch_len,
        longest_by_n,
        delta: None,
    })
}

/// Scans an extendable stream, doubling its length until the stopping time
/// appears or `max_len` values have been drawn.
pub fn scan_stream(
    stream: &mut DisorderStream,
    h: f64,
    q: f64,
    n: usize,
    max_len: usize,
) -> Result<StretchScan> {
    let mut len = stream.values().len().max(2 * n).max(1024);
    loop {
        let len_now = len.min(max_len);
        stream.ensure(len_now);
        match atypical_stretch_scan(&stream.values()[..len_now], stream.law(), h, q, n) {
            Err(Error::NeedsMoreDisorder { consumed }) if len_now < max_len => {
                len = 2 * consumed.max(len_now);
            }
            other => return other,
        }
    }
}

/// `R_n` for even `n` along the slice: the longest even-aligned block with
/// average of `omega + h` at most `q`.
pub fn longest_stretch_profile(omega: &[f64], h: f64, q: f64) -> Vec<usize> {
    let len = omega.len() - omega.len() % 2;
    let mut d_even = Vec::with_capacity(len / 2 + 1);
    d_even.push(0.0_f64);
    let mut acc = 0.0_f64;
    for (j, w) in omega[..len].iter().enumerate() {
        acc += w + h - q;
        if (j + 1) % 2 == 0 {
            d_even.push(acc);
        }
    }
    profile_from_d(&d_even)
}

fn profile_from_d(d_even: &[f64]) -> Vec<usize> {
    // prefix_max[i] = max_{k <= i} D_{2k}: nondecreasing, so the earliest
    // start with D_k >= D_l is a binary search.
    let mut prefix_max = Vec::with_capacity(d_even.len());
    let mut m = f64::NEG_INFINITY;
    for &d in d_even {
        m = m.max(d);
        prefix_max.push(m);
    }
    let mut out = Vec::with_capacity(d_even.len().saturating_sub(1));
    let mut best = 0usize;
    for l in 1..d_even.len() {
        let target = d_even[l];
        let k = prefix_max[..l].partition_point(|&pm| pm < target);
        if k < l {
            best = best.max(2 * (l - k));
        }
        out.push(best);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct O(n^2) evaluation of the definition of `R_n`.
    fn brute_profile(omega: &[f64], h: f64, q: f64) -> Vec<usize> {
        let n = omega.len() - omega.len() % 2;
        let mut out = Vec::new();
        let mut best = 0;
        for l in (2..=n).step_by(2) {
            for k in (0..l).step_by(2) {
                let s: f64 = omega[k..l].iter().map(|w| w + h).sum();
                if s <= q * (l - k) as f64 && l - k > best {
                    best = l - k;
                }
            }
            out.push(best);
        }
        out
    }

    #[test]
    fn profile_matches_definition() {
        for seed in 0..20 {
            let v = crate::disorder::DisorderVector::sample(DisorderLaw::BernoulliPm1, 300, seed, 0)
                .unwrap();
            // dyadic h and q keep every partial sum exact, so ties compare equal
            let fast = longest_stretch_profile(&v.values, 0.25, -0.25);
            let slow = brute_profile(&v.values, 0.25, -0.25);
            assert_eq!(fast.len(), slow.len());
            let mismatches = fast.iter().zip(&slow).filter(|(a, b)| a != b).count();
            assert_eq!(mismatches, 0, "seed {seed}");
            assert!(fast.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn min_len_is_largest_even_below() {
        assert_eq!(min_stretch_len(100_000, 0.192_745), 58);
        let ln = (1000f64).ln();
        assert_eq!(min_stretch_len(1000, ln / 9.3), 8);
        assert_eq!(min_stretch_len(1000, ln / 10.7), 10);
        assert_eq!(min_stretch_len(10, 100.0), 0);
    }

    #[test]
    fn constant_disorder_never_stops() {
        let omega = vec![0.0; 10_000];
        let err = atypical_stretch_scan(&omega, DisorderLaw::BernoulliPm1, 0.3, -0.5, 1000)
            .unwrap_err();
        assert!(matches!(err, Error::NeedsMoreDisorder { consumed: 10_000 }));
    }

    #[test]
    fn planted_block_stops_at_block_end() {
        let (h, q) = (0.3, -0.5);
        let n = 1000;
        let rate = cramer_rate(DisorderLaw::BernoulliPm1, h, q).unwrap();
        let r = min_stretch_len(n, rate);
        let start = 400;
        let mut omega = vec![1000.0; 2000];
        for w in &mut omega[start..start + r] {
            *w = -(h - q + 1.0);
        }
        let scan = atypical_stretch_scan(&omega, DisorderLaw::BernoulliPm1, h, q, n).unwrap();
        assert_eq!(scan.tau, start + r);
        assert_eq!(scan.stretch_len, r);
        assert!(scan.stretch_sum(&omega) <= q * r as f64);
    }

    #[test]
    fn discovered_stretch_satisfies_average_condition() {
        for seed in 0..10 {
            let mut s = DisorderStream::new(DisorderLaw::BernoulliPm1, seed, 0);
            let scan = scan_stream(&mut s, 0.4, -0.2, 2000, 1 << 24).unwrap();
            assert!(scan.stretch_len >= scan.r_n);
            assert!(scan.stretch_sum(s.values()) <= scan.q * scan.stretch_len as f64 + 1e-9);
            // no earlier time had a long enough stretch
            let before = scan.longest_by_n[scan.longest_by_n.len() - 2];
            assert!(before < scan.r_n);
        }
    }

    #[test]
    #[ignore = "statistical, ~1e6 draws per replica"]
    fn erdos_renyi_growth_rate() {
        let (h, q) = (0.3, -0.5);
        let rate = cramer_rate(DisorderLaw::BernoulliPm1, h, q).unwrap();
        let n = 1_000_000;
        let mut ratios = Vec::new();
        for seed in 0..10 {
            let v = crate::disorder::DisorderVector::sample(DisorderLaw::BernoulliPm1, n, seed, 0)
                .unwrap();
            let prof = longest_stretch_profile(&v.values, h, q);
            ratios.push(*prof.last().unwrap() as f64 / (n as f64).ln());
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((mean * rate - 1.0).abs() < 0.15, "R_n/log n = {mean}, 1/rate = {}", 1.0 / rate);
    }
}
