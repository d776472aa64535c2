//! Free-endpoint copolymer partition function for very long chains.
//!
//! The first-return law has the exact representation
//! `f_{2j} = (2/pi) int_0^{pi/2} sin^2(t) cos^{2j-2}(t) dt`, a continuous
//! mixture of geometric sequences in `j`. Discretizing it with the trapezoid
//! rule in `ln t` turns the long-range part of the excursion recursion into a
//! bank of first-order filters; gaps shorter than `NEAR` use exact values.
//! Cost is `O(N K)` with `K` about 200 filters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{log1p_exp, LogAccumulator};

/// Gaps `j < NEAR` (in half-steps) are summed exactly.
const NEAR: usize = 32;
const STEP: f64 = 0.1;
const RESCALE_HI: f64 = 1e200;
const RESCALE_LO: f64 = 1e-200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongPartition {
    pub log_z_f: f64,
    pub log_z_c: f64,
    /// Number of geometric filters used for the far field.
    pub filters: usize,
}

/// Nodes `(weight, log ratio)` with `f_{2j} ~ sum_q weight_q ratio_q^{j-1}`
/// for `NEAR <= j <= j_max`.
fn geometric_nodes(j_max: usize) -> Vec<(f64, f64)> {
    let x_hi = std::f64::consts::FRAC_PI_2.ln();
    let x_lo = -0.5 * (j_max.max(NEAR) as f64).ln() - 12.0;
    let count = ((x_hi - x_lo) / STEP).ceil() as usize;
    (0..=count)
        .map(|i| {
            let x = x_hi - i as f64 * STEP;
            let t = x.exp();
            let s = t.sin();
            let w = std::f64::consts::FRAC_2_PI * s * s * t * STEP;
            (w, (-s * s).ln_1p())
        })
        .filter(|&(w, lr)| w > 0.0 && lr.is_finite())
        .collect()
}

/// Exact `f_{2j}` for `j < NEAR`, linear scale.
fn near_first_returns() -> Vec<f64> {
    let mut out = vec![0.0; NEAR];
    let mut u = 1.0_f64;
    for (j, slot) in out.iter_mut().enumerate().skip(1) {
        let jf = j as f64;
        u *= (2.0 * jf - 1.0) / (2.0 * jf);
        *slot = u / (2.0 * jf - 1.0);
    }
    out
}

/// `log Z^f_N` and `log Z^c_N` of the copolymer at `(lambda, h)` on
/// `omega[..n]`, accurate to about `1e-16 N` relative in `Z`.
pub fn log_partition_free_long(lambda: f64, h: f64, omega: &[f64], n: usize) -> Result<LongPartition> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::invalid("N", format!("must be a positive even integer, got {n}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() || !(h >= 0.0) || !h.is_finite() {
        return Err(Error::invalid("lambda", "need finite lambda >= 0 and h >= 0"));
    }
    if omega.len() < n {
        return Err(Error::invalid(
            "omega",
            format!("length {} is shorter than N = {n}", omega.len()),
        ));
    }
    let half = n / 2;
    let near = near_first_returns();
    let nodes = geometric_nodes(half);
    let weights: Vec<f64> = nodes.iter().map(|&(w, _)| w).collect();
    // rounding the ratios costs about j * 1e-16 relative at gap j
    let ratios: Vec<f64> = nodes.iter().map(|&(_, lr)| lr.exp()).collect();
    let entry: Vec<f64> = nodes
        .iter()
        .map(|&(_, lr)| (lr * (NEAR - 1) as f64).exp())
        .collect();

    // a[j] = -2 lambda sum_{i <= 2j} (omega_i + h), compensated
    let mut a = Vec::with_capacity(half + 1);
    a.push(0.0_f64);
    let (mut acc, mut comp) = (0.0_f64, 0.0_f64);
    for (i, &w) in omega[..n].iter().enumerate() {
        let x = -2.0 * lambda * (w + h);
        let t = acc + x;
        if acc.abs() >= x.abs() {
            comp += (acc - t) + x;
        } else {
            comp += (x - t) + acc;
        }
        acc = t;
        if i % 2 == 1 {
            a.push(acc + comp);
        }
    }

    // zc[j] * exp(offset) = Z^c_{2j}
    let mut zc = Vec::with_capacity(half + 1);
    zc.push(1.0_f64);
    let mut offset = 0.0_f64;
    let mut s = vec![0.0_f64; nodes.len()];
    let mut tt = vec![0.0_f64; nodes.len()];
    for j in 1..=half {
        // filters currently hold gaps >= NEAR for target j
        let mut pos = 0.0;
        let mut neg = 0.0;
        for (i, &z) in zc.iter().enumerate().skip(j.saturating_sub(NEAR - 1)) {
            let f = near[j - i];
            pos += z * f;
            neg += z * f * (a[j] - a[i]).exp();
        }
        for q in 0..weights.len() {
            pos += weights[q] * s[q];
            neg += weights[q] * tt[q];
        }
        let mut v = 0.5 * (pos + neg);
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::EstimationFailed(format!(
                "long-chain engine produced {v} at step {}",
                2 * j
            )));
        }
        if !(RESCALE_LO..=RESCALE_HI).contains(&v) {
            let k = v.ln();
            let inv = (-k).exp();
            for z in zc.iter_mut() {
                *z *= inv;
            }
            for x in s.iter_mut().chain(tt.iter_mut()) {
                *x *= inv;
            }
            v *= inv;
            offset += k;
        }
        zc.push(v);
        // advance the filters to target j + 1
        if j < half {
            let e = (a[j + 1] - a[j]).exp();
            let enter = (j + 1).checked_sub(NEAR).map(|i| (zc[i], (a[j + 1] - a[i]).exp()));
            for q in 0..ratios.len() {
                s[q] *= ratios[q];
                tt[q] *= ratios[q] * e;
                if let Some((z, psi)) = enter {
                    s[q] += z * entry[q];
                    tt[q] += z * psi * entry[q];
                }
            }
        }
    }

    // Z^f = sum_{j < half} Z^c_{2j} p_plus(N - 2j) (1 + psi) + Z^c_N
    let mut acc = LogAccumulator::new();
    acc.push(zc[half].ln());
    let mut log_u = 0.0_f64;
    let mut c = 0.0_f64;
    for m in 1..=half {
        let mf = m as f64;
        let x = ((2.0 * mf - 1.0) / (2.0 * mf)).ln();
        let t = log_u + x;
        if log_u.abs() >= x.abs() {
            c += (log_u - t) + x;
        } else {
            c += (x - t) + log_u;
        }
        log_u = t;
        let j = half - m;
        let lpsi = a[half] - a[j];
        acc.push(zc[j].ln() + (log_u + c) - std::f64::consts::LN_2 + log1p_exp(lpsi));
    }
    Ok(LongPartition {
        log_z_f: acc.value() + offset,
        log_z_c: zc[half].ln() + offset,
        filters: nodes.len(),
    })
}
