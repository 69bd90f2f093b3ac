//! Greedy rounding of an embedding into clusters, core diagnostics, and the
//! weak-to-strong balancing step.

mod cores;
mod greedy;

pub use cores::{
    compute_cores, constructive_separated_subset, recovery_constant, CoreReport, SeparatedSubset,
};
pub use greedy::{greedy_recover, weak_to_strong, WeakPartition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{closeness_strong, closeness_weak};
use crate::sbm::Partition;

/// Core radius used by the recovery algorithm listing.
pub const LISTING_RHO: f64 = 0.27;
/// Core radius used by the core and separation analysis.
pub const ANALYSIS_RHO: f64 = 0.2;

/// Core radius ρ and separation threshold Δ = 6ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreParams {
    rho: f64,
}

impl CoreParams {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0 / 3.0) {
            return Err(Error::InvalidParams(format!("rho must lie in (0, 1/3), got {rho}")));
        }
        Ok(CoreParams { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn delta_cap(&self) -> f64 {
        6.0 * self.rho
    }
}

impl Default for CoreParams {
    fn default() -> Self {
        CoreParams { rho: LISTING_RHO }
    }
}

/// Closeness of a recovered partition, before and after balancing.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub seed: u64,
    pub weak_cluster_count: usize,
    pub delta_weak: f64,
    pub delta_strong: f64,
    /// Planted cluster i is matched to weak cluster `matching_weak[i]`.
    pub matching_weak: Vec<Option<usize>>,
    /// Planted cluster i is matched to output cluster `matching_strong[i]`.
    pub matching_strong: Vec<usize>,
    pub alpha: Option<f64>,
    pub core_sizes: Vec<usize>,
    pub remote_count: Option<usize>,
    /// ‖Wᵢ − Wⱼ‖ for the planted clusters.
    pub separation: Vec<Vec<f64>>,
}

impl RecoveryReport {
    pub fn new(
        seed: u64,
        weak: &WeakPartition,
        strong: &Partition,
        planted: &Partition,
        cores: Option<&CoreReport>,
    ) -> Result<Self> {
        let w = closeness_weak(weak, planted)?;
        let s = closeness_strong(strong, planted)?;
        Ok(RecoveryReport {
            seed,
            weak_cluster_count: weak.count(),
            delta_weak: w.delta,
            delta_strong: s.delta,
            matching_weak: w.sigma,
            matching_strong: s.sigma.into_iter().map(|x| x.expect("strong matching is total")).collect(),
            alpha: cores.map(|c| c.alpha),
            core_sizes: cores.map(|c| c.core_sizes.clone()).unwrap_or_default(),
            remote_count: cores.map(|c| c.remote_count),
            separation: cores.map(|c| c.center_distances.clone()).unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_params_range() {
        assert!(CoreParams::new(0.27).is_ok());
        assert!(CoreParams::new(0.2).is_ok());
        assert!(CoreParams::new(0.0).is_err());
        assert!(CoreParams::new(1.0 / 3.0).is_err());
        assert!((CoreParams::new(0.2).unwrap().delta_cap() - 1.2).abs() < 1e-15);
    }
}
