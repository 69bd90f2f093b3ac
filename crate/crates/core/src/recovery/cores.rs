use serde::Serialize;

use super::CoreParams;
use crate::error::Result;
use crate::sbm::Partition;
use crate::scalar::Scalar;
use crate::sdp::{compute_diagnostics, Embedding, SdpDiagnostics};

/// Core membership and center separation against a planted partition.
#[derive(Debug, Clone, Serialize)]
pub struct CoreReport {
    pub rho: f64,
    pub alpha: f64,
    /// Members of each planted cluster within ρ of its center.
    pub cores: Vec<Vec<usize>>,
    pub core_sizes: Vec<usize>,
    /// Vertices outside the core of their own cluster.
    pub remote_count: usize,
    /// (α / ρ²)·kn
    pub remote_bound: f64,
    pub center_distances: Vec<Vec<f64>>,
    /// Pairs i < j with ‖Wᵢ − Wⱼ‖ ≥ Δ.
    pub separated_pairs: Vec<(usize, usize)>,
}

pub fn compute_cores<T: Scalar>(
    e: &Embedding<T>,
    planted: &Partition,
    p: &CoreParams,
) -> Result<CoreReport> {
    let diag = compute_diagnostics(e, planted)?;
    Ok(CoreReport::from_diagnostics(&diag, planted, p))
}

impl CoreReport {
    pub fn from_diagnostics<T: Scalar>(
        diag: &SdpDiagnostics<T>,
        planted: &Partition,
        p: &CoreParams,
    ) -> Self {
        let k = diag.k;
        let rho = p.rho();
        let mut cores = vec![Vec::new(); k];
        for (u, r) in diag.radii.iter().enumerate() {
            if r.to_f64_lossy() < rho {
                cores[planted.label(u)].push(u);
            }
        }
        let core_sizes: Vec<usize> = cores.iter().map(Vec::len).collect();
        let remote_count = planted.vertex_count() - core_sizes.iter().sum::<usize>();
        let center_distances: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| diag.center_dist(i, j).to_f64_lossy()).collect())
            .collect();
        let cap = p.delta_cap();
        let mut separated_pairs = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                if center_distances[i][j] >= cap {
                    separated_pairs.push((i, j));
                }
            }
        }
        let alpha = diag.alpha.to_f64_lossy();
        CoreReport {
            rho,
            alpha,
            cores,
            core_sizes,
            remote_count,
            remote_bound: alpha / (rho * rho) * planted.vertex_count() as f64,
            center_distances,
            separated_pairs,
        }
    }
}

/// The well-separated cluster set built by pruning: drop one cluster from
/// every pair with ⟨Wᵢ, Wⱼ⟩ ≥ μ, then drop clusters with αᵢ > 2α/δ.
#[derive(Debug, Clone, Serialize)]
pub struct SeparatedSubset {
    /// δ = 6α / (2 − Δ²)
    pub delta: f64,
    /// μ = α / δ
    pub mu: f64,
    pub alpha_i_cap: f64,
    pub kept: Vec<usize>,
    /// (1 − δ)·k
    pub guaranteed_size: f64,
    /// Every kept pair has ‖Wᵢ − Wⱼ‖ ≥ Δ.
    pub separated: bool,
}

/// `None` when Δ² ≥ 2, where the pruning thresholds are not positive.
pub fn constructive_separated_subset<T: Scalar>(
    diag: &SdpDiagnostics<T>,
    p: &CoreParams,
) -> Option<SeparatedSubset> {
    let cap = p.delta_cap();
    let slack = 2.0 - cap * cap;
    if slack <= 0.0 {
        return None;
    }
    let k = diag.k;
    let alpha = diag.alpha.to_f64_lossy().max(0.0);
    let delta = 6.0 * alpha / slack;
    // α/δ and 2α/δ do not depend on α
    let mu = slack / 6.0;
    let alpha_i_cap = slack / 3.0;

    let mut dropped = vec![false; k];
    for i in 0..k {
        for j in i + 1..k {
            if !dropped[i] && !dropped[j] && diag.center_inner(i, j).to_f64_lossy() >= mu {
                dropped[j] = true;
            }
        }
    }
    let kept: Vec<usize> = (0..k)
        .filter(|&i| !dropped[i] && diag.alpha_i[i].to_f64_lossy() <= alpha_i_cap)
        .collect();
    let separated = kept.iter().enumerate().all(|(a, &i)| {
        kept[a + 1..]
            .iter()
            .all(|&j| diag.center_dist(i, j).to_f64_lossy() >= cap)
    });
    Some(SeparatedSubset {
        delta,
        mu,
        alpha_i_cap,
        kept,
        guaranteed_size: (1.0 - delta) * k as f64,
        separated,
    })
}

/// Weak closeness multiplier 2(1/ρ² + 6/(2 − Δ²)) of the greedy recovery, or
/// `None` when Δ² ≥ 2.
pub fn recovery_constant(p: &CoreParams) -> Option<f64> {
    let cap = p.delta_cap();
    let slack = 2.0 - cap * cap;
    (slack > 0.0).then(|| 2.0 * (1.0 / (p.rho() * p.rho()) + 6.0 / slack))
}
