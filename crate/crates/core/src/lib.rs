//! Exact and Monte-Carlo laboratory for the (1+1)-dimensional random
//! copolymer at a selective interface.
//!
//! The path weight of a simple random walk `S` of length `N` is
//! `exp(-2 lambda sum_n (omega_n + h) Delta_n)`, where `Delta_n = 1` when
//! monomer `n` lies in the lower half-plane (a zero inherits the sign of the
//! step that reached it). Kernels are generic over [`Real`]; the `*64`
//! aliases fix the scalar to `f64`.

pub mod annealed;
pub mod disorder;
pub mod error;
pub mod experiments;
pub mod model;
pub mod num;
pub mod oracle;
pub mod partition;
pub mod report;
pub mod verify;
pub mod walk;

pub use disorder::{DisorderLaw, DisorderStream, DisorderVector};
pub use error::{Error, Result};
pub use model::{Endpoint, ModelParams, Variant};
pub use num::Real;
pub use partition::{
    last_exit_partition, occupation_spectrum, partition, partition_position_engine,
    two_sided_exit_partition, ExcursionSkeleton, OccupationSpectrum, PartitionTables,
};
pub use walk::WalkTables;

pub type WalkTables64 = walk::WalkTables<f64>;
pub type WalkTables32 = walk::WalkTables<f32>;
pub type PartitionTables64 = partition::PartitionTables<f64>;
pub type PartitionTables32 = partition::PartitionTables<f32>;
pub type OccupationSpectrum64 = partition::OccupationSpectrum<f64>;
pub type ExactProb = num_rational::Ratio<i128>;

/// Crate version recorded in every result record.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
