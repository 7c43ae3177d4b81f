use std::fmt;

use thiserror::Error;

use crate::placement::CapacityViolation;

/// Errors shared by the analysis and simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameter validation failed; the message names the offending field.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A placement, rate vector or grid does not match the parameter set.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// One or more clusters cache more files than their capacity allows.
    #[error("{0}")]
    CapacityExceeded(CapacityReport),

    /// A queue's traffic intensity reached or exceeded one.
    #[error("unstable queue: rho = {rho:.6} >= 1")]
    Unstable { rho: f64 },

    /// Like `Unstable`, with the cluster identified (1-based).
    #[error("cluster {cluster} unstable: rho = {rho:.6} >= 1")]
    UnstableCluster { cluster: usize, rho: f64 },

    /// Delay is undefined when no requests arrive.
    #[error("total arrival rate is zero; delay is undefined")]
    ZeroArrivalRate,

    /// Traffic demand at or above the critical demand: no spare capacity.
    #[error("demand {zeta:.4e} bit/s reaches the critical demand {zeta_c:.4e} bit/s")]
    Saturated { zeta: f64, zeta_c: f64 },

    /// Exhaustive placement enumeration would exceed the safety guard.
    #[error("{placements} placements exceed the enumeration guard of {limit}")]
    EnumerationTooLarge { placements: u128, limit: u128 },

    /// The integral form of the outage approximation degenerates at exponent 1.
    #[error("popularity exponent 1 is a singularity of the outage approximation; use the exact form")]
    SingularExponent,

    /// The delay objective is undefined at the starting placement.
    #[error("objective undefined at the starting placement: {0}")]
    UnstableBaseline(String),

    /// Simulation configuration rejected before running.
    #[error("simulation config: {0}")]
    SimConfig(String),
}

/// Per-cluster capacity violations, printable as one message.
#[derive(Debug, Clone)]
pub struct CapacityReport(pub Vec<CapacityViolation>);

impl fmt::Display for CapacityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cache capacity exceeded:")?;
        for v in &self.0 {
            write!(
                f,
                " cluster {} holds {} files (capacity {});",
                v.cluster, v.cached, v.capacity
            )?;
        }
        Ok(())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
