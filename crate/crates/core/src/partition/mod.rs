//! Quenched partition functions `Z = E[exp(-2 lambda sum_n (omega_n + h) Delta_n); endpoint]`.
//!
//! Two independent engines compute the same numbers: the excursion engine
//! (renewal over returns to zero, `O(N^2)`) and the position engine (a walk
//! on `Z` with a sign bit at the origin, `O(N^2)`). Everything is in the log
//! domain except [`log_partition_free_long`], which trades exactness for
//! speed on very long chains.

mod excursion;
mod long;
mod position;
mod restricted;
mod skeleton;

use serde::{Deserialize, Serialize};

use crate::model::{check_disorder, Endpoint, ModelParams, Variant};
use crate::num::Real;
use crate::walk::WalkTables;
use crate::error::Result;

pub use excursion::{
    lipschitz_check, occupation_spectrum, occupation_spectrum_with_budget, partition,
    shift_identity_check, shift_identity_residual, LipschitzCheck, OccupationSpectrum,
    DEFAULT_SPECTRUM_BUDGET,
};
pub use position::{
    delta_marginals, delta_marginals_given_occupation, endpoint_marginal,
    partition_position_engine, CONDITIONED_MARGINAL_BUDGET,
};
pub use long::{log_partition_free_long, LongPartition};
pub use restricted::{
    last_exit_partition, last_exit_profile, two_sided_exit_partition, window_partition,
};
pub use skeleton::{sample_skeleton, ExcursionSkeleton, FinalSegment};

/// Which engine produced a [`PartitionTables`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Excursion,
    Position,
}

/// `log Z^c_k` for every even `k <= N` and `log Z^f_N`.
#[derive(Clone, Debug)]
pub struct PartitionTables<T> {
    pub params: ModelParams,
    /// Entry `j` is `log Z^c_{2j}`.
    pub log_z_c: Vec<T>,
    pub log_z_f: T,
    pub engine: Engine,
    /// `prefix[j] = sum_{i <= j} (omega_i + h)`, `prefix[0] = 0`.
    pub prefix: Vec<T>,
}

impl<T: Real> PartitionTables<T> {
    /// `log Z^a_N` for the endpoint in `params`.
    pub fn log_z(&self) -> T {
        match self.params.endpoint {
            Endpoint::Free => self.log_z_f,
            Endpoint::Constrained => self.log_z_c_at(self.params.n),
        }
    }

    pub fn log_z_for(&self, endpoint: Endpoint) -> T {
        match endpoint {
            Endpoint::Free => self.log_z_f,
            Endpoint::Constrained => self.log_z_c_at(self.params.n),
        }
    }

    /// `log Z^c_k` for even `k`.
    pub fn log_z_c_at(&self, k: usize) -> T {
        debug_assert!(k % 2 == 0);
        self.log_z_c[k / 2]
    }

    /// `F_N = (1/N) log Z^a_N`.
    pub fn free_energy(&self) -> T {
        self.log_z() / T::from_usize_lossy(self.params.n)
    }

    /// `log Z^f_n` for the prefix of length `n <= N` (even).
    pub fn log_z_f_at(&self, n: usize, tables: &WalkTables<T>) -> T {
        assert!(n % 2 == 0 && n <= self.params.n && n > 0, "n must be even in (0, N]");
        excursion::free_from_constrained(
            &self.log_z_c,
            &self.prefix,
            T::lit(self.params.lambda),
            is_copolymer(&self.params),
            tables,
            n,
        )
    }

    /// `log psi(k, n) = -2 lambda sum_{j = k+1}^{n} (omega_j + h)`.
    #[inline]
    pub fn log_psi(&self, k: usize, n: usize) -> T {
        log_psi(&self.prefix, T::lit(self.params.lambda), k, n)
    }
}

#[inline]
pub(crate) fn log_psi<T: Real>(prefix: &[T], lambda: T, k: usize, n: usize) -> T {
    -(lambda + lambda) * (prefix[n] - prefix[k])
}

/// Per-monomer log weight `-2 lambda (omega_n + h)` of the pinning variant.
#[inline]
pub(crate) fn log_site_weight<T: Real>(prefix: &[T], lambda: T, n: usize) -> T {
    log_psi(prefix, lambda, n - 1, n)
}

pub(crate) fn prefix_sums<T: Real>(omega: &[T], h: f64, n: usize) -> Vec<T> {
    let h = T::lit(h);
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    // Neumaier compensation keeps long prefixes accurate to ~1 ulp.
    let mut comp = T::zero();
    out.push(T::zero());
    for &w in &omega[..n] {
        let x = w + h;
        let t = acc + x;
        if acc.abs() >= x.abs() {
            comp += (acc - t) + x;
        } else {
            comp += (x - t) + acc;
        }
        acc = t;
        out.push(acc + comp);
    }
    out
}

pub(crate) fn validate_inputs<T: Real>(
    params: &ModelParams,
    omega: &[T],
    tables: Option<&WalkTables<T>>,
) -> Result<()> {
    params.validate()?;
    check_disorder(omega, params.n)?;
    if let Some(t) = tables {
        t.require(params.n)?;
    }
    Ok(())
}

pub(crate) fn is_copolymer(params: &ModelParams) -> bool {
    params.variant == Variant::Copolymer
}

#[cfg(test)]
mod tests;
