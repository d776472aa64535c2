//! Simple-random-walk combinatorics in log domain and an exhaustive path
//! enumerator.
//!
//! Conventions: `u_k = P(S_k = 0)`, `f_k = P(first return to 0 at k)`,
//! `p_plus(m) = P(S_i > 0, i = 1..m)`, `p_pos_end0(k) = P(S_i > 0, i < k, S_k = 0)`.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::Endpoint;
use crate::num::Real;

/// Largest supported table length.
pub const MAX_TABLE_LEN: usize = 1_000_000;
/// Largest walk length the enumerator accepts (2^20 paths).
pub const MAX_ENUMERATION_LEN: usize = 20;

/// Immutable table of walk probabilities up to `n_max`, stored as natural logs.
///
/// Arrays are indexed by half-time `j = k / 2`.
#[derive(Clone, Debug)]
pub struct WalkTables<T> {
    n_max: usize,
    log_u: Vec<T>,
    log_f: Vec<T>,
}

impl<T: Real> WalkTables<T> {
    /// Builds the tables with the ratio recursion
    /// `u_{2j} = u_{2j-2} (2j-1)/(2j)` and `f_{2j} = u_{2j}/(2j-1)`.
    pub fn build(n_max: usize) -> Result<Self> {
        if n_max < 2 || n_max % 2 != 0 {
            return Err(Error::invalid(
                "n_max",
                format!("must be an even integer >= 2, got {n_max}"),
            ));
        }
        if n_max > MAX_TABLE_LEN {
            return Err(Error::BudgetExceeded {
                what: "n_max",
                requested: n_max,
                cap: MAX_TABLE_LEN,
            });
        }
        let half = n_max / 2;
        let mut log_u = Vec::with_capacity(half + 1);
        let mut log_f = Vec::with_capacity(half + 1);
        log_u.push(T::zero());
        log_f.push(T::neg_infinity());
        // Accumulate in f64 then cast: the f32 tables stay correctly rounded.
        let mut acc = 0.0_f64;
        for j in 1..=half {
            let jf = j as f64;
            acc += ((2.0 * jf - 1.0) / (2.0 * jf)).ln();
            log_u.push(T::lit(acc));
            log_f.push(T::lit(acc - (2.0 * jf - 1.0).ln()));
        }
        Ok(Self {
            n_max,
            log_u,
            log_f,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `log P(S_k = 0)`; `-inf` at odd `k`.
    #[inline]
    pub fn log_u(&self, k: usize) -> T {
        if k % 2 == 1 {
            T::neg_infinity()
        } else {
            self.log_u[k / 2]
        }
    }

    /// `log P(first return at k)`; `-inf` at odd `k` and at `k = 0`.
    #[inline]
    pub fn log_f(&self, k: usize) -> T {
        if k % 2 == 1 {
            T::neg_infinity()
        } else {
            self.log_f[k / 2]
        }
    }

    /// `log P(S_i > 0, i = 1..m)`, with `p_plus(0) = 1` and, for odd `m`,
    /// `p_plus(m) = u_{m-1} / 2`.
    #[inline]
    pub fn log_p_plus(&self, m: usize) -> T {
        if m == 0 {
            return T::zero();
        }
        self.log_u[m / 2] - T::LN_2()
    }

    /// `log P(S_i > 0 for 0 < i < k, S_k = 0) = log f_k - log 2`.
    #[inline]
    pub fn log_p_pos_end0(&self, k: usize) -> T {
        self.log_f(k) - T::LN_2()
    }

    /// `log P(S_i >= 0, i = 1..k)` for even `k` (equals `u_k`). This is the
    /// probability that no monomer of a length-`k` walk is in the lower
    /// half-plane under the zero-inherits-sign convention.
    #[inline]
    pub fn log_nonneg(&self, k: usize) -> T {
        debug_assert!(k % 2 == 0);
        self.log_u[k / 2]
    }

    pub(crate) fn require(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::invalid(
                "tables",
                format!("walk tables cover n <= {}, need {n}", self.n_max),
            ));
        }
        Ok(())
    }
}

/// Law of the lower-half-plane occupation `N_occ` over `m = 0, 2, ..., n`.
///
/// Free: `P(N_occ = m) = u_m u_{n-m}` (discrete arcsine law). Constrained:
/// `P(N_occ = m, S_n = 0) = u_n / (n/2 + 1)` for every `m`.
pub fn occupation_law<T: Real>(n: usize, endpoint: Endpoint) -> Result<Vec<T>> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::invalid("N", format!("must be even and positive, got {n}")));
    }
    let tables = WalkTables::<T>::build(n)?;
    Ok(log_occupation_law(&tables, n, endpoint)
        .into_iter()
        .map(|v| v.exp())
        .collect())
}

/// Log-domain version of [`occupation_law`] reusing existing tables.
pub fn log_occupation_law<T: Real>(tables: &WalkTables<T>, n: usize, endpoint: Endpoint) -> Vec<T> {
    (0..=n / 2)
        .map(|b| {
            let m = 2 * b;
            match endpoint {
                Endpoint::Free => tables.log_u(m) + tables.log_u(n - m),
                Endpoint::Constrained => {
                    tables.log_u(n) - T::from_usize_lossy(n / 2 + 1).ln()
                }
            }
        })
        .collect()
}

/// Exact walk probabilities in any numeric type supporting `+ - * /`.
///
/// With `Ratio<i128>` these are exact rationals (`n <= 100` keeps the
/// denominators below `2^127`).
pub mod exact {
    use num_traits::{FromPrimitive, Num};

    /// `u_0, u_2, ..., u_n` by the renewal-free ratio recursion.
    pub fn return_probabilities<Q>(n: usize) -> Vec<Q>
    where
        Q: Num + Clone + FromPrimitive,
    {
        let mut out = vec![Q::one()];
        for j in 1..=n / 2 {
            let prev = out[j - 1].clone();
            let num = Q::from_usize(2 * j - 1).expect("representable");
            let den = Q::from_usize(2 * j).expect("representable");
            out.push(prev * num / den);
        }
        out
    }

    /// `f_0 = 0, f_2, ..., f_n` from the renewal identity
    /// `u_n = sum_k f_k u_{n-k}`, solved forward.
    pub fn first_return_probabilities<Q>(n: usize) -> Vec<Q>
    where
        Q: Num + Clone + FromPrimitive,
    {
        let u = return_probabilities::<Q>(n);
        let mut f = vec![Q::zero(); n / 2 + 1];
        for j in 1..=n / 2 {
            let mut acc = u[j].clone();
            for i in 1..j {
                acc = acc - f[i].clone() * u[j - i].clone();
            }
            f[j] = acc;
        }
        f
    }
}

/// One path of the exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct EnumeratedPath {
    /// Steps `±1`, length `N`.
    pub steps: Vec<i8>,
    /// Positions `S_0 = 0, S_1, ..., S_N`.
    pub positions: Vec<i32>,
    /// `Delta_1..Delta_N`: 1 when the monomer sits in the lower half-plane.
    pub delta: Vec<u8>,
    /// Path probability `2^{-N}`.
    pub prob: Ratio<u64>,
    pub end_at_zero: bool,
    /// Lower-half-plane occupation `sum Delta_n`.
    pub occupation: usize,
    /// Largest `n` with `Delta_n = 1`, or 0.
    pub last_exit: usize,
}

impl EnumeratedPath {
    fn from_mask(mask: u32, n: usize) -> Self {
        let mut steps = Vec::with_capacity(n);
        let mut positions = Vec::with_capacity(n + 1);
        let mut delta = Vec::with_capacity(n);
        positions.push(0);
        let mut s = 0i32;
        let mut prev_negative = false;
        for i in 0..n {
            let step: i8 = if mask >> i & 1 == 1 { 1 } else { -1 };
            s += step as i32;
            steps.push(step);
            positions.push(s);
            let negative = if s == 0 { prev_negative } else { s < 0 };
            delta.push(negative as u8);
            prev_negative = negative;
        }
        let occupation = delta.iter().map(|&d| d as usize).sum();
        let last_exit = delta
            .iter()
            .rposition(|&d| d == 1)
            .map(|i| i + 1)
            .unwrap_or(0);
        Self {
            steps,
            end_at_zero: s == 0,
            positions,
            delta,
            prob: Ratio::new(1, 1u64 << n),
            occupation,
            last_exit,
        }
    }

    /// Number of `n in 1..=N` with `S_n = 0`.
    pub fn zero_count(&self) -> usize {
        self.positions[1..].iter().filter(|&&x| x == 0).count()
    }
}

/// Iterator over all `2^N` paths of length `N`.
pub struct PathEnumerator {
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for PathEnumerator {
    type Item = EnumeratedPath;

    fn next(&mut self) -> Option<EnumeratedPath> {
        if self.next >= self.end {
            return None;
        }
        let p = EnumeratedPath::from_mask(self.next as u32, self.n);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = (self.end - self.next) as usize;
        (rem, Some(rem))
    }
}

impl ExactSizeIterator for PathEnumerator {}

/// Enumerates every simple-random-walk path of even length `n <= 20`.
pub fn enumerate_paths(n: usize) -> Result<PathEnumerator> {
    if n % 2 != 0 {
        return Err(Error::invalid("N", format!("must be even, got {n}")));
    }
    if n > MAX_ENUMERATION_LEN {
        return Err(Error::BudgetExceeded {
            what: "N",
            requested: n,
            cap: MAX_ENUMERATION_LEN,
        });
    }
    Ok(PathEnumerator {
        n,
        next: 0,
        end: 1u64 << n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    fn q(a: i128, b: i128) -> Q {
        Q::new(a, b)
    }

    #[test]
    fn small_values_by_enumeration() {
        let t = WalkTables::<f64>::build(4).unwrap();
        assert_eq!(t.log_u(0), 0.0);
        assert!((t.log_u(2).exp() - 0.5).abs() < 1e-15);
        assert!((t.log_f(2).exp() - 0.5).abs() < 1e-15);
        assert!((t.log_u(4).exp() - 0.375).abs() < 1e-15);
        assert!((t.log_p_plus(4).exp() - 3.0 / 16.0).abs() < 1e-15);

        // Frozen from enumerating all 2- and 4-step paths.
        let paths: Vec<_> = enumerate_paths(4).unwrap().collect();
        let returns = paths.iter().filter(|p| p.end_at_zero).count();
        assert_eq!(returns, 6);
        let positive = paths
            .iter()
            .filter(|p| p.positions[1..].iter().all(|&x| x > 0))
            .count();
        assert_eq!(positive, 3);
    }

    #[test]
    fn bad_sizes_rejected() {
        assert!(WalkTables::<f64>::build(0).is_err());
        assert!(WalkTables::<f64>::build(7).is_err());
        assert!(matches!(
            enumerate_paths(22),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(enumerate_paths(5).is_err());
    }

    #[test]
    fn renewal_identity_in_log_tables() {
        let n_max = 2000;
        let t = WalkTables::<f64>::build(n_max).unwrap();
        for n in (2..=n_max).step_by(2) {
            let terms: Vec<f64> = (2..=n)
                .step_by(2)
                .map(|k| t.log_f(k) + t.log_u(n - k))
                .collect();
            let rhs = crate::num::log_sum_exp(&terms);
            let rel = (rhs - t.log_u(n)).exp_m1().abs();
            assert!(rel <= 1e-12, "n={n}: rel {rel}");
        }
    }

    #[test]
    fn exact_rational_tables_agree_with_closed_form() {
        let u = exact::return_probabilities::<Q>(40);
        let f = exact::first_return_probabilities::<Q>(40);
        assert_eq!(u[1], q(1, 2));
        assert_eq!(u[2], q(3, 8));
        assert_eq!(f[1], q(1, 2));
        assert_eq!(f[2], q(1, 8));
        for j in 1..=20 {
            // f_{2j} = u_{2j} / (2j - 1)
            assert_eq!(f[j], u[j] / Q::from_integer(2 * j as i128 - 1));
        }
        let t = WalkTables::<f64>::build(40).unwrap();
        for j in 0..=20 {
            let exact = *u[j].numer() as f64 / *u[j].denom() as f64;
            assert!((t.log_u(2 * j).exp() - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn enumeration_basics() {
        let paths: Vec<_> = enumerate_paths(2).unwrap().collect();
        assert_eq!(paths.len(), 4);
        let total: Ratio<u64> = paths.iter().map(|p| p.prob).sum();
        assert_eq!(total, Ratio::from_integer(1));
        let zero = paths.iter().filter(|p| p.occupation == 0).count();
        let two = paths.iter().filter(|p| p.occupation == 2).count();
        assert_eq!((zero, two), (2, 2));
        for p in enumerate_paths(12).unwrap() {
            assert_eq!(p.occupation % 2, 0);
            assert_eq!(p.last_exit % 2, 0);
        }
    }

    #[test]
    fn occupation_law_matches_enumeration_exactly() {
        for n in (2..=16).step_by(2) {
            let u = exact::return_probabilities::<Q>(n);
            let mut free = vec![0u64; n / 2 + 1];
            let mut constrained = vec![0u64; n / 2 + 1];
            for p in enumerate_paths(n).unwrap() {
                free[p.occupation / 2] += 1;
                if p.end_at_zero {
                    constrained[p.occupation / 2] += 1;
                }
            }
            let denom = 1i128 << n;
            for b in 0..=n / 2 {
                let m = 2 * b;
                let exact_free = u[m / 2] * u[(n - m) / 2];
                assert_eq!(q(free[b] as i128, denom), exact_free, "n={n} m={m}");
                let exact_c = u[n / 2] / Q::from_integer((n / 2 + 1) as i128);
                assert_eq!(q(constrained[b] as i128, denom), exact_c);
            }
            let lf = occupation_law::<f64>(n, Endpoint::Free).unwrap();
            for b in 0..=n / 2 {
                let e = free[b] as f64 / denom as f64;
                assert!((lf[b] - e).abs() <= 1e-12 * e.max(1e-300));
            }
        }
    }

    #[test]
    fn constrained_two_step_law() {
        let l = occupation_law::<f64>(2, Endpoint::Constrained).unwrap();
        assert!((l[0] - 0.25).abs() < 1e-15 && (l[1] - 0.25).abs() < 1e-15);
        let f = occupation_law::<f64>(2, Endpoint::Free).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-15 && (f[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ballot_scaling_is_bounded() {
        let t = WalkTables::<f64>::build(200_000).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for n in (2..=200_000).step_by(2) {
            let v = t.log_p_plus(n).exp() * (n as f64).sqrt();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        // p_plus(n) ~ 1/sqrt(2 pi n)·... the product sits near 0.4.
        assert!(lo > 0.35 && hi < 0.5, "range [{lo}, {hi}]");
    }

    #[test]
    fn f32_tables_are_close() {
        let a = WalkTables::<f32>::build(1000).unwrap();
        let b = WalkTables::<f64>::build(1000).unwrap();
        for k in (0..=1000).step_by(2) {
            assert!((a.log_u(k) as f64 - b.log_u(k)).abs() < 1e-5);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn free_occupation_law_dominated_by_zero(half in 1usize..400) {
                let n = 2 * half;
                let law = occupation_law::<f64>(n, Endpoint::Free).unwrap();
                let total: f64 = law.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                for &p in &law {
                    prop_assert!(p <= law[0] * (1.0 + 1e-12));
                }
            }

            #[test]
            fn odd_p_plus_equals_previous_even(m in 1usize..999) {
                let t = WalkTables::<f64>::build(1000).unwrap();
                if m % 2 == 1 {
                    prop_assert_eq!(t.log_p_plus(m), t.log_u(m - 1) - std::f64::consts::LN_2);
                }
            }
        }
    }
}
