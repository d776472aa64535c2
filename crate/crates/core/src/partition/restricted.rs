//! Partition functions restricted to events on the set
//! `A = {0} ∪ {n : Delta_n = 1}`.

use super::{log_psi, partition, prefix_sums, validate_inputs, PartitionTables};
use crate::error::{Error, Result};
use crate::model::{Endpoint, ModelParams};
use crate::num::{log_add_exp, log_sub_exp, LogAccumulator, Real};
use crate::walk::WalkTables;

fn check_even_in(name: &'static str, v: usize, hi: usize) -> Result<()> {
    if v % 2 != 0 || v > hi {
        return Err(Error::invalid(name, format!("must be even in [0, {hi}], got {v}")));
    }
    Ok(())
}

/// `log Z^f(max A <= ell)` for the free endpoint.
pub fn last_exit_partition<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: &WalkTables<T>,
    ell: usize,
) -> Result<T> {
    params.require_endpoint(Endpoint::Free, "last-exit partition")?;
    params.require_copolymer("last-exit partition")?;
    check_even_in("ell", ell, params.n)?;
    let pt = partition(params, omega, tables)?;
    Ok(last_exit_profile(&pt, tables)?[ell / 2])
}

/// `log Z^f(max A <= ell)` for every even `ell`, from existing tables.
///
/// Splits on `t = max A` when `t < N`: the walk is a constrained path to `t`
/// whose last excursion is negative (or `t = 0`), followed by a nonnegative
/// suffix of probability `u_{N-t}`. `t = N` also collects a negative final
/// segment.
pub fn last_exit_profile<T: Real>(pt: &PartitionTables<T>, tables: &WalkTables<T>) -> Result<Vec<T>> {
    let params = &pt.params;
    params.require_copolymer("last-exit profile")?;
    tables.require(params.n)?;
    let n = params.n;
    let half = n / 2;
    let ln2 = T::LN_2();
    let mut out = Vec::with_capacity(half + 1);
    let mut running = T::neg_infinity();
    for j in 0..=half {
        let t = 2 * j;
        // G_t: weight of constrained paths to t whose last excursion is negative
        let g = if j == 0 {
            T::zero()
        } else {
            let mut acc = LogAccumulator::new();
            for i in 0..j {
                let k = 2 * i;
                acc.push(pt.log_z_c[i] + tables.log_f(t - k) - ln2 + pt.log_psi(k, t));
            }
            acc.value()
        };
        running = log_add_exp(running, g + tables.log_nonneg(n - t));
        out.push(running);
    }
    let mut neg_final = LogAccumulator::new();
    for i in 0..half {
        let k = 2 * i;
        neg_final.push(pt.log_z_c[i] + tables.log_p_plus(n - k) + pt.log_psi(k, n));
    }
    out[half] = log_add_exp(out[half], neg_final.value());
    Ok(out)
}

/// `log Z^a` restricted to paths with `Delta_n = 0` for every `n` in each of
/// the inclusive `windows`.
///
/// A negative excursion `(k, t]` is dropped when it meets a window; positive
/// excursions never carry `Delta = 1`.
pub fn window_partition<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: &WalkTables<T>,
    windows: &[(usize, usize)],
) -> Result<T> {
    validate_inputs(params, omega, Some(tables))?;
    params.require_copolymer("window partition")?;
    let n = params.n;
    let half = n / 2;
    let prefix = prefix_sums(omega, params.h, n);
    let lambda = T::lit(params.lambda);
    let ln2 = T::LN_2();
    // (k, t] covers monomers k+1..=t
    let hits = |k: usize, t: usize| windows.iter().any(|&(a, b)| a <= b && k < b && t >= a);
    let mut lzc = Vec::with_capacity(half + 1);
    lzc.push(T::zero());
    for j in 1..=half {
        let t = 2 * j;
        let mut acc = LogAccumulator::new();
        for i in 0..j {
            let k = 2 * i;
            let base = lzc[i] + tables.log_f(t - k) - ln2;
            acc.push(base);
            if !hits(k, t) {
                acc.push(base + log_psi(&prefix, lambda, k, t));
            }
        }
        lzc.push(acc.value());
    }
    Ok(match params.endpoint {
        Endpoint::Constrained => lzc[half],
        Endpoint::Free => {
            let mut acc = LogAccumulator::new();
            for i in 0..half {
                let k = 2 * i;
                let base = lzc[i] + tables.log_p_plus(n - k);
                acc.push(base);
                if !hits(k, n) {
                    acc.push(base + log_psi(&prefix, lambda, k, n));
                }
            }
            acc.push(lzc[half]);
            acc.value()
        }
    })
}

/// `log Z^c` restricted to
/// `{max(A ∩ [0, N/2]) <= ell1} ∪ {min(A ∩ [N/2, N]) >= N - ell2}`
/// with `min(∅) = N`, by inclusion-exclusion over the two window events.
pub fn two_sided_exit_partition<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: &WalkTables<T>,
    ell1: usize,
    ell2: usize,
) -> Result<T> {
    params.require_endpoint(Endpoint::Constrained, "two-sided exit partition")?;
    params.require_copolymer("two-sided exit partition")?;
    let n = params.n;
    check_even_in("ell1", ell1, n / 2)?;
    check_even_in("ell2", ell2, n / 2)?;
    let mid = n / 2;
    // event (i): no Delta = 1 on ell1+1..=N/2; event (ii): none on N/2..=N-ell2-1
    let w1 = (ell1 + 1, mid);
    let w2 = (mid, n - ell2 - 1);
    let empty1 = w1.0 > w1.1;
    let empty2 = w2.0 > w2.1;
    if empty1 || empty2 {
        // one of the events is the whole space
        return Ok(partition(params, omega, tables)?.log_z());
    }
    let z1 = window_partition(params, omega, tables, &[w1])?;
    let z2 = window_partition(params, omega, tables, &[w2])?;
    let z12 = window_partition(params, omega, tables, &[w1, w2])?;
    Ok(log_sub_exp(log_add_exp(z1, z2), z12))
}
