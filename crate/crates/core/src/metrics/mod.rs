//! Closeness to the planted partition, cut costs, closed-form bounds and
//! KL-divergence tools.

mod bounds;
mod closeness;
mod kl;

pub use bounds::{
    alpha_bound, alpha_failure_probability, alpha_bound_high_confidence,
    alpha_high_confidence_failure_probability, delta_bounds, grothendieck_residual, kl_model_failure_bound,
    BoundInputs, DeltaBounds, ResidualReport, GROTHENDIECK_BOUND,
};
pub use closeness::{
    closeness_strong, closeness_weak, max_weight_assignment, overlap_matrix, Closeness,
};
pub use kl::{kl_divergence, kl_event_bound, log_sum_lower_bound, DiscreteDistribution};

use crate::sbm::{Graph, Partition};

/// Edges (with multiplicity) whose endpoints carry different labels.
pub fn cut_cost(g: &Graph, p: &Partition) -> usize {
    g.pairs()
        .filter(|&(u, v, _)| !p.same_cluster(u, v))
        .map(|(_, _, m)| m as usize)
        .sum()
}

/// Edges (with multiplicity) whose endpoints share a label.
pub fn within_cost(g: &Graph, p: &Partition) -> usize {
    g.edge_count() - cut_cost(g, p)
}
