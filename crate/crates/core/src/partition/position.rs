//! Position-space engine: a weighted walk on `{-N, ..., N}` with the origin
//! split by the sign of the preceding step.

use super::{is_copolymer, log_site_weight, prefix_sums, validate_inputs, Engine, PartitionTables};
use crate::error::{Error, Result};
use crate::model::{Endpoint, ModelParams};
use crate::num::{log_add_exp, log_sum_exp, Real};

/// Largest `N` accepted by [`delta_marginals_given_occupation`], whose
/// forward table has `O(N^3)` entries.
pub const CONDITIONED_MARGINAL_BUDGET: usize = 128;

/// Slot layout: `x + N` for `x` in `[-N, N]` (the origin slot holds zeros
/// reached from above, or all zeros for the pinning variant) and `2N + 1` for
/// zeros reached from below.
#[derive(Clone, Copy)]
struct Lattice {
    n: usize,
    copolymer: bool,
}

impl Lattice {
    fn width(self) -> usize {
        2 * self.n + 2
    }

    fn zneg(self) -> usize {
        2 * self.n + 1
    }

    fn origin(self) -> usize {
        self.n
    }

    #[inline]
    fn is_delta(self, slot: usize) -> bool {
        if self.copolymer {
            slot < self.n || slot == self.zneg()
        } else {
            slot == self.n
        }
    }

    #[inline]
    fn position(self, slot: usize) -> i64 {
        if slot == self.zneg() {
            0
        } else {
            slot as i64 - self.n as i64
        }
    }

    #[inline]
    fn successors(self, slot: usize) -> [Option<usize>; 2] {
        let x = self.position(slot);
        let map = |y: i64| {
            if y.unsigned_abs() as usize > self.n {
                None
            } else if y == 0 && self.copolymer && x < 0 {
                Some(self.zneg())
            } else {
                Some((y + self.n as i64) as usize)
            }
        };
        [map(x - 1), map(x + 1)]
    }

    /// Slots that can be occupied at time `t`.
    fn active(self, t: usize) -> impl Iterator<Item = usize> {
        let lo = self.n - t.min(self.n);
        let hi = self.n + t.min(self.n);
        let zneg = (self.copolymer && t % 2 == 0 && t > 0).then_some(self.zneg());
        (lo..=hi).step_by(2).chain(zneg)
    }

    fn end_ok(self, slot: usize, endpoint: Endpoint) -> bool {
        match endpoint {
            Endpoint::Free => true,
            Endpoint::Constrained => slot == self.origin() || slot == self.zneg(),
        }
    }
}

struct Weights<T> {
    prefix: Vec<T>,
    lambda: T,
}

impl<T: Real> Weights<T> {
    #[inline]
    fn at(&self, t: usize) -> T {
        log_site_weight(&self.prefix, self.lambda, t)
    }
}

fn forward_step<T: Real>(lat: Lattice, w: &Weights<T>, old: &[T], new: &mut [T], t: usize) {
    new.fill(T::neg_infinity());
    let ln2 = T::LN_2();
    for s in lat.active(t - 1) {
        let v = old[s];
        if v == T::neg_infinity() {
            continue;
        }
        for s2 in lat.successors(s).into_iter().flatten() {
            new[s2] = log_add_exp(new[s2], v - ln2);
        }
    }
    let wt = w.at(t);
    for s in lat.active(t) {
        if lat.is_delta(s) && new[s] != T::neg_infinity() {
            new[s] += wt;
        }
    }
}

fn backward_step<T: Real>(lat: Lattice, w: &Weights<T>, next: &[T], cur: &mut [T], t: usize) {
    // cur is beta_t, next is beta_{t+1}
    cur.fill(T::neg_infinity());
    let ln2 = T::LN_2();
    let wt = w.at(t + 1);
    for s in lat.active(t) {
        let mut acc = T::neg_infinity();
        for s2 in lat.successors(s).into_iter().flatten() {
            let b = next[s2];
            if b == T::neg_infinity() {
                continue;
            }
            let extra = if lat.is_delta(s2) { wt } else { T::zero() };
            acc = log_add_exp(acc, b - ln2 + extra);
        }
        cur[s] = acc;
    }
}

fn setup<T: Real>(params: &ModelParams, omega: &[T]) -> Result<(Lattice, Weights<T>)> {
    validate_inputs(params, omega, None)?;
    let lat = Lattice {
        n: params.n,
        copolymer: is_copolymer(params),
    };
    let w = Weights {
        prefix: prefix_sums(omega, params.h, params.n),
        lambda: T::lit(params.lambda),
    };
    Ok((lat, w))
}

fn initial<T: Real>(lat: Lattice) -> Vec<T> {
    let mut a = vec![T::neg_infinity(); lat.width()];
    a[lat.origin()] = T::zero();
    a
}

/// Independent `O(N^2)` evaluation of `log Z^c_k` (all even `k`) and `log Z^f_N`.
pub fn partition_position_engine<T: Real>(
    params: &ModelParams,
    omega: &[T],
) -> Result<PartitionTables<T>> {
    let (lat, w) = setup(params, omega)?;
    let mut cur = initial::<T>(lat);
    let mut next = cur.clone();
    let mut lzc = Vec::with_capacity(params.n / 2 + 1);
    lzc.push(T::zero());
    for t in 1..=params.n {
        forward_step(lat, &w, &cur, &mut next, t);
        std::mem::swap(&mut cur, &mut next);
        if t % 2 == 0 {
            let z = if lat.copolymer {
                log_add_exp(cur[lat.origin()], cur[lat.zneg()])
            } else {
                cur[lat.origin()]
            };
            lzc.push(z);
        }
    }
    let log_z_f = log_sum_exp(&cur);
    Ok(PartitionTables {
        params: *params,
        log_z_c: lzc,
        log_z_f,
        engine: Engine::Position,
        prefix: w.prefix,
    })
}

/// `E[Delta_n]` for `n = 1..N` under the Gibbs measure with the endpoint in
/// `params`, by a forward-backward pass.
pub fn delta_marginals<T: Real>(params: &ModelParams, omega: &[T]) -> Result<Vec<T>> {
    let (lat, w) = setup(params, omega)?;
    let n = params.n;
    let mut alphas = Vec::with_capacity(n + 1);
    alphas.push(initial::<T>(lat));
    for t in 1..=n {
        let mut next = vec![T::neg_infinity(); lat.width()];
        forward_step(lat, &w, &alphas[t - 1], &mut next, t);
        alphas.push(next);
    }
    let mut beta: Vec<T> = (0..lat.width())
        .map(|s| {
            if lat.end_ok(s, params.endpoint) {
                T::zero()
            } else {
                T::neg_infinity()
            }
        })
        .collect();
    let log_z = {
        let terms: Vec<T> = alphas[n].iter().zip(&beta).map(|(&a, &b)| a + b).collect();
        log_sum_exp(&terms)
    };
    let mut out = vec![T::zero(); n];
    let mut prev = beta.clone();
    for t in (1..=n).rev() {
        if t < n {
            backward_step(lat, &w, &prev, &mut beta, t);
        }
        let mut acc = T::zero();
        for s in lat.active(t) {
            if lat.is_delta(s) {
                let v = alphas[t][s] + beta[s] - log_z;
                if v > T::neg_infinity() {
                    acc += v.exp();
                }
            }
        }
        out[t - 1] = acc.min(T::one());
        std::mem::swap(&mut prev, &mut beta);
    }
    Ok(out)
}

/// `E[Delta_n | N_occ = m]` for `n = 1..N`. Cubic memory; `N` is capped by
/// [`CONDITIONED_MARGINAL_BUDGET`].
pub fn delta_marginals_given_occupation<T: Real>(
    params: &ModelParams,
    omega: &[T],
    m: usize,
) -> Result<Vec<T>> {
    let (lat, w) = setup(params, omega)?;
    let n = params.n;
    if n > CONDITIONED_MARGINAL_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "conditioned marginal N",
            requested: n,
            cap: CONDITIONED_MARGINAL_BUDGET,
        });
    }
    if m > n {
        return Err(Error::invalid("m", format!("must be in [0, N], got {m}")));
    }
    let width = lat.width();
    let stride = n + 2;
    let ln2 = T::LN_2();
    let idx = |s: usize, c: usize| s * stride + c;
    // alpha_t(s, c): c = occupation so far
    let mut alphas: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    let mut a0 = vec![T::neg_infinity(); width * stride];
    a0[idx(lat.origin(), 0)] = T::zero();
    alphas.push(a0);
    for t in 1..=n {
        let old = &alphas[t - 1];
        let mut new = vec![T::neg_infinity(); width * stride];
        let wt = w.at(t);
        for s in lat.active(t - 1) {
            for s2 in lat.successors(s).into_iter().flatten() {
                let d = usize::from(lat.is_delta(s2));
                let extra = if d == 1 { wt } else { T::zero() };
                for c in 0..t {
                    let v = old[idx(s, c)];
                    if v == T::neg_infinity() {
                        continue;
                    }
                    let k = idx(s2, c + d);
                    new[k] = log_add_exp(new[k], v - ln2 + extra);
                }
            }
        }
        alphas.push(new);
    }
    // beta_t(s, r): r = occupation still required
    let mut beta = vec![T::neg_infinity(); width * stride];
    for s in lat.active(n) {
        if lat.end_ok(s, params.endpoint) {
            beta[idx(s, 0)] = T::zero();
        }
    }
    let log_z_m = {
        let mut terms = Vec::new();
        for s in lat.active(n) {
            terms.push(alphas[n][idx(s, m)] + beta[idx(s, 0)]);
        }
        log_sum_exp(&terms)
    };
    if log_z_m == T::neg_infinity() {
        return Err(Error::invalid(
            "m",
            format!("the event N_occ = {m} has zero probability"),
        ));
    }
    let mut out = vec![T::zero(); n];
    for t in (1..=n).rev() {
        if t < n {
            let mut cur = vec![T::neg_infinity(); width * stride];
            let wt = w.at(t + 1);
            for s in lat.active(t) {
                for s2 in lat.successors(s).into_iter().flatten() {
                    let d = usize::from(lat.is_delta(s2));
                    let extra = if d == 1 { wt } else { T::zero() };
                    for r in d..=m {
                        let b = beta[idx(s2, r - d)];
                        if b == T::neg_infinity() {
                            continue;
                        }
                        let k = idx(s, r);
                        cur[k] = log_add_exp(cur[k], b - ln2 + extra);
                    }
                }
            }
            beta = cur;
        }
        let mut acc = T::zero();
        for s in lat.active(t) {
            if !lat.is_delta(s) {
                continue;
            }
            for c in 0..=m.min(t) {
                let v = alphas[t][idx(s, c)] + beta[idx(s, m - c)] - log_z_m;
                if v > T::neg_infinity() {
                    acc += v.exp();
                }
            }
        }
        out[t - 1] = acc.min(T::one());
    }
    Ok(out)
}

/// Law of `S_N` under the free-endpoint Gibbs measure; entry `i` is
/// `P(S_N = i - N)`.
pub fn endpoint_marginal<T: Real>(params: &ModelParams, omega: &[T]) -> Result<Vec<T>> {
    params.require_endpoint(Endpoint::Free, "endpoint marginal")?;
    let (lat, w) = setup(params, omega)?;
    let mut cur = initial::<T>(lat);
    let mut next = cur.clone();
    for t in 1..=params.n {
        forward_step(lat, &w, &cur, &mut next, t);
        std::mem::swap(&mut cur, &mut next);
    }
    let log_z = log_sum_exp(&cur);
    let mut out: Vec<T> = cur[..=2 * params.n]
        .iter()
        .map(|&v| (v - log_z).exp())
        .collect();
    if lat.copolymer {
        out[params.n] += (cur[lat.zneg()] - log_z).exp();
    }
    Ok(out)
}
