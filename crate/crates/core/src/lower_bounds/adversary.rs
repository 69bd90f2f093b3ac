use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::poisson::sample_kappa_hat;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, derived_rng};
use crate::sbm::{Graph, Partition, SbmParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbAdversaryConfig {
    /// |L'| / n, in (0, 1/2).
    pub rho_fraction: f64,
    pub seed: u64,
}

impl LbAdversaryConfig {
    pub fn new(rho_fraction: f64, seed: u64) -> Result<Self> {
        if !(rho_fraction > 0.0 && rho_fraction < 0.5) {
            return Err(Error::InvalidParams(format!(
                "rho fraction must lie in (0, 1/2), got {rho_fraction}"
            )));
        }
        Ok(LbAdversaryConfig { rho_fraction, seed })
    }
}

/// Counts for one side pair, e.g. L' against R''.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideCounts {
    /// Edges already present between the two sets.
    pub observed: u64,
    pub added: u64,
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbAdversaryReport {
    pub moved: usize,
    /// |L'| |L''| / n; the aggregate rates are b M and a M.
    pub m: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub left: SideCounts,
    pub right: SideCounts,
}

/// The two-community lower-bound adversary. Equivalent to
/// [`lb_adversary_with_report`] without the counts.
pub fn lb_adversary(
    g: &Graph,
    planted: &Partition,
    params: &SbmParams,
    cfg: &LbAdversaryConfig,
) -> Result<Graph> {
    lb_adversary_with_report(g, planted, params, cfg).map(|(g, _)| g)
}

/// Takes L' and R' as the first `floor(rho n)` ids of each planted side,
/// counts the edges L'-R'' and R'-L'', and adds `kappa_hat` of the count more,
/// each between uniformly chosen endpoints.
pub fn lb_adversary_with_report(
    g: &Graph,
    planted: &Partition,
    params: &SbmParams,
    cfg: &LbAdversaryConfig,
) -> Result<(Graph, LbAdversaryReport)> {
    params.validate()?;
    if params.k != 2 || planted.k() != 2 {
        return Err(Error::Precondition("the lower-bound adversary needs k = 2".into()));
    }
    if g.is_simple() {
        return Err(Error::Precondition(
            "the lower-bound adversary acts on Poisson multigraphs".into(),
        ));
    }
    if g.vertex_count() != planted.vertex_count() || g.vertex_count() != params.vertex_count() {
        return Err(Error::Shape(format!(
            "graph has {} vertices, partition {}, params {}",
            g.vertex_count(),
            planted.vertex_count(),
            params.vertex_count()
        )));
    }
    let clusters = planted.clusters();
    let (left, right) = (&clusters[0], &clusters[1]);
    let moved = (cfg.rho_fraction * params.n as f64).floor() as usize;
    if moved == 0 || moved >= left.len() || moved >= right.len() {
        return Err(Error::InvalidParams(format!(
            "rho n = {moved} must be at least 1 and leave both sides nonempty"
        )));
    }
    let (l1, l2) = left.split_at(moved);
    let (r1, r2) = right.split_at(moved);

    // Per-pair rate a/n or b/n over |L'| |R''| pairs.
    let m = (l1.len() * l2.len()) as f64 / params.n as f64;
    let (lambda1, lambda2) = (params.b * m, params.a * m);

    let mut tag = vec![0u8; g.vertex_count()];
    for &u in l1 {
        tag[u] = 1;
    }
    for &u in l2 {
        tag[u] = 2;
    }
    for &u in r1 {
        tag[u] = 3;
    }
    for &u in r2 {
        tag[u] = 4;
    }
    let (mut z_left, mut z_right) = (0u64, 0u64);
    for (u, v, mult) in g.pairs() {
        let (s, t) = (tag[u].min(tag[v]), tag[u].max(tag[v]));
        match (s, t) {
            (1, 4) => z_left += mult as u64,
            (2, 3) => z_right += mult as u64,
            _ => {}
        }
    }

    let cap = super::poisson::kappa_cap(lambda1, lambda2);
    let draw = |z: u64, stream: u64| -> Result<u64> {
        if lambda2 > lambda1 {
            sample_kappa_hat(lambda1, lambda2, z, derive_seed(cfg.seed, stream))
        } else {
            Ok(0)
        }
    };
    let k_left = draw(z_left, 1)?;
    let k_right = draw(z_right, 2)?;

    let mut rng = derived_rng(cfg.seed, 3);
    let mut extra = Vec::with_capacity((k_left + k_right) as usize);
    for _ in 0..k_left {
        extra.push((l1[rng.random_range(0..l1.len())], r2[rng.random_range(0..r2.len())], 1));
    }
    for _ in 0..k_right {
        extra.push((r1[rng.random_range(0..r1.len())], l2[rng.random_range(0..l2.len())], 1));
    }
    let out = if extra.is_empty() {
        g.clone()
    } else {
        Graph::from_weighted(g.vertex_count(), g.pairs().chain(extra), false)?
    };
    let report = LbAdversaryReport {
        moved,
        m,
        lambda1,
        lambda2,
        left: SideCounts {
            observed: z_left,
            added: k_left,
            cap,
        },
        right: SideCounts {
            observed: z_right,
            added: k_right,
            cap,
        },
    };
    Ok((out, report))
}

/// `rho = eps (a + b) / (4 (a - b))`, so that the adversary's worst-case
/// addition `4 (a - b) rho n` equals the budget `eps (a + b) n`.
pub fn suggest_rho(epsilon: f64, a: f64, b: f64) -> Option<f64> {
    (a > b).then(|| epsilon * (a + b) / (4.0 * (a - b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::sample_poisson_sbm;

    #[test]
    fn equal_rates_leave_graph_unchanged() {
        let p = SbmParams::new(30, 2, 4.0, 4.0).unwrap();
        let (g, planted) = sample_poisson_sbm(&p, 3).unwrap();
        let cfg = LbAdversaryConfig::new(0.2, 9).unwrap();
        let (h, rep) = lb_adversary_with_report(&g, &planted, &p, &cfg).unwrap();
        assert_eq!(h, g);
        assert_eq!(rep.left.added + rep.right.added, 0);
    }

    #[test]
    fn additions_respect_cap_and_sets() {
        let p = SbmParams::new(40, 2, 12.0, 2.0).unwrap();
        for seed in 0..30 {
            let (g, planted) = sample_poisson_sbm(&p, seed).unwrap();
            let cfg = LbAdversaryConfig::new(0.25, seed + 100).unwrap();
            let (h, rep) = lb_adversary_with_report(&g, &planted, &p, &cfg).unwrap();
            assert_eq!(rep.moved, 10);
            assert!((rep.m - 7.5).abs() < 1e-12);
            assert_eq!(rep.left.cap, (2.0f64 * 10.0 * 7.5).floor() as u64);
            assert!(rep.left.added <= rep.left.cap && rep.right.added <= rep.right.cap);
            assert_eq!(h.edge_count(), g.edge_count() + (rep.left.added + rep.right.added) as usize);
            for (u, v, m) in h.symmetric_difference(&g) {
                assert!(m > 0);
                let (lo, hi) = (u.min(v), u.max(v));
                let left_right = lo < 10 && (50..80).contains(&hi);
                let right_left = (10..40).contains(&lo) && (40..50).contains(&hi);
                assert!(left_right || right_left, "edge ({u}, {v}) outside the target sets");
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = SbmParams::new(20, 2, 6.0, 1.0).unwrap();
        let (g, planted) = sample_poisson_sbm(&p, 0).unwrap();
        let cfg = LbAdversaryConfig::new(0.2, 0).unwrap();
        assert!(lb_adversary(&g.flatten_to_simple(), &planted, &p, &cfg).is_err());
        let p3 = SbmParams::new(20, 3, 6.0, 1.0).unwrap();
        let (g3, pl3) = sample_poisson_sbm(&p3, 0).unwrap();
        assert!(lb_adversary(&g3, &pl3, &p3, &cfg).is_err());
        assert!(LbAdversaryConfig::new(0.5, 0).is_err());
        assert!(LbAdversaryConfig::new(0.0, 0).is_err());
        let tiny = LbAdversaryConfig::new(0.01, 0).unwrap();
        assert!(lb_adversary(&g, &planted, &p, &tiny).is_err());
    }

    #[test]
    fn suggested_rho_matches_budget() {
        let rho = suggest_rho(0.1, 30.0, 5.0).unwrap();
        assert!((4.0 * 25.0 * rho - 0.1 * 35.0).abs() < 1e-12);
        assert!(suggest_rho(0.1, 3.0, 3.0).is_none());
    }
}
