//! One round of edge splitting and majority voting that sharpens a coarse
//! balanced partition.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, derived_rng, mix64};
use crate::sbm::{Graph, Partition, SbmParams};

/// The two halves of an edge set. Each pair's colour depends only on the
/// seed and the pair, so the same colouring applies to any graph on the same
/// vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    pub e1: Graph,
    pub e2: Graph,
    pub seed: u64,
}

/// True when the pair goes to the second half.
pub fn pair_colour(seed: u64, u: usize, v: usize) -> bool {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    let key = mix64((u as u64) << 32 ^ v as u64);
    mix64(derive_seed(seed, 0x5EED) ^ key) >> 63 == 1
}

pub fn split_edges(g: &Graph, seed: u64) -> Result<EdgeSplit> {
    if !g.is_simple() {
        return Err(Error::Precondition("edge splitting needs a simple graph".into()));
    }
    let (second, first): (Vec<_>, Vec<_>) = g
        .pairs()
        .partition(|&(u, v, _)| pair_colour(seed, u, v));
    let n = g.vertex_count();
    Ok(EdgeSplit {
        e1: Graph::from_weighted(n, first, true)?,
        e2: Graph::from_weighted(n, second, true)?,
        seed,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostConfig {
    /// Corruption threshold T; (a − b)/20 when absent.
    pub threshold: Option<f64>,
    /// Split each base cluster into seeded random halves instead of by id.
    pub random_halves: bool,
    pub seed: u64,
}


impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        match self.threshold {
            Some(t) if !(t > 0.0) => Err(Error::InvalidParams(format!(
                "threshold must be positive, got {t}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn threshold_for(&self, params: &SbmParams) -> f64 {
        self.threshold.unwrap_or((params.a - params.b) / 20.0)
    }
}

/// Estimates (a, b) from edge counts inside and across the clusters of `p`.
pub fn estimate_ab(g: &Graph, p: &Partition) -> Result<(f64, f64)> {
    let n = p
        .cluster_size()
        .ok_or_else(|| Error::Precondition("estimation needs a balanced partition".into()))?;
    let k = p.k() as f64;
    let nf = n as f64;
    let between = crate::metrics::cut_cost(g, p) as f64;
    let within = g.edge_count() as f64 - between;
    let a = 2.0 * within / (k * nf);
    let b = if p.k() > 1 {
        2.0 * between / (k * (k - 1.0) * nf)
    } else {
        0.0
    };
    Ok((a, b))
}

/// Reassigns every vertex to the base cluster whose opposite half holds most
/// of its neighbours in `e2`, then rebalances to clusters of exactly `n`.
///
/// Only `e2` is read; the base partition must have been computed without it.
pub fn boost(e2: &Graph, base: &Partition, n: usize, k: usize, cfg: &BoostConfig) -> Result<Partition> {
    cfg.validate()?;
    let total = n * k;
    if e2.vertex_count() != total || base.vertex_count() != total {
        return Err(Error::Shape(format!(
            "expected {total} vertices, graph has {} and partition {}",
            e2.vertex_count(),
            base.vertex_count()
        )));
    }
    if base.k() != k || base.cluster_size() != Some(n) {
        return Err(Error::Precondition(format!(
            "base partition must have {k} clusters of size {n}"
        )));
    }
    if k == 1 {
        return Ok(base.clone());
    }

    // false = left half, true = right half
    let mut right = vec![false; total];
    for (i, mut members) in base.clusters().into_iter().enumerate() {
        if cfg.random_halves {
            members.shuffle(&mut derived_rng(cfg.seed, i as u64));
        }
        for &u in &members[n / 2..] {
            right[u] = true;
        }
    }

    let adjacency = e2.adjacency();
    let mut votes = vec![0u64; k];
    let mut assigned = vec![0usize; total];
    for u in 0..total {
        votes.iter_mut().for_each(|c| *c = 0);
        for &(w, m) in &adjacency[u] {
            if right[w] != right[u] {
                votes[base.label(w)] += m as u64;
            }
        }
        let mut best = base.label(u);
        for (j, &c) in votes.iter().enumerate() {
            if c > votes[best] {
                best = j;
            }
        }
        assigned[u] = best;
    }

    let mut labels = vec![usize::MAX; total];
    let mut sizes = vec![0usize; k];
    for u in 0..total {
        let j = assigned[u];
        if sizes[j] < n {
            labels[u] = j;
            sizes[j] += 1;
        }
    }
    let mut target = 0;
    for u in 0..total {
        if labels[u] != usize::MAX {
            continue;
        }
        while sizes[target] >= n {
            target += 1;
        }
        labels[u] = target;
        sizes[target] += 1;
    }
    Partition::new(labels, k)
}

/// Vertices incident to at least `t` pairs on which the second halves of `g`
/// and `g_ref` differ, both coloured with the split's seed.
pub fn count_corrupted(g: &Graph, g_ref: &Graph, split: &EdgeSplit, t: f64) -> Result<usize> {
    if g.vertex_count() != g_ref.vertex_count() {
        return Err(Error::Shape("graphs have different vertex sets".into()));
    }
    let second = |h: &Graph| -> Result<Graph> {
        let kept: Vec<_> = h
            .pairs()
            .filter(|&(u, v, _)| pair_colour(split.seed, u, v))
            .collect();
        Graph::from_weighted(h.vertex_count(), kept, h.is_simple())
    };
    let e2 = second(g)?;
    let e2_ref = second(g_ref)?;
    let mut incident = vec![0u64; g.vertex_count()];
    for (u, v, m) in e2.symmetric_difference(&e2_ref) {
        incident[u] += m as u64;
        incident[v] += m as u64;
    }
    Ok(incident.iter().filter(|&&c| c as f64 >= t).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::sample_sbm;

    #[test]
    fn empty_graph_splits_into_empty_halves() {
        let s = split_edges(&Graph::empty(5), 1).unwrap();
        assert_eq!(s.e1.edge_count(), 0);
        assert_eq!(s.e2.edge_count(), 0);
    }

    #[test]
    fn split_is_a_partition() {
        let params = SbmParams::new(50, 2, 10.0, 2.0).unwrap();
        let (g, _) = sample_sbm(&params, 4).unwrap();
        let s = split_edges(&g, 9).unwrap();
        assert_eq!(s.e1.edge_count() + s.e2.edge_count(), g.edge_count());
        for (u, v) in g.edges() {
            assert!(s.e1.has_edge(u, v) ^ s.e2.has_edge(u, v));
        }
        assert_eq!(split_edges(&g, 9).unwrap(), s);
    }

    #[test]
    fn within_only_graph_keeps_planted() {
        let p = Partition::planted(6, 3);
        let mut edges = Vec::new();
        for c in p.clusters() {
            for (i, &u) in c.iter().enumerate() {
                for &v in &c[i + 1..] {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::simple_from_edges(18, edges).unwrap();
        let out = boost(&g, &p, 6, 3, &BoostConfig::default()).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn single_cluster_unchanged() {
        let p = Partition::planted(5, 1);
        let g = Graph::simple_from_edges(5, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(boost(&g, &p, 5, 1, &BoostConfig::default()).unwrap(), p);
    }

    #[test]
    fn odd_cluster_size_is_balanced() {
        let params = SbmParams::new(7, 2, 5.0, 1.0).unwrap();
        let (g, p) = sample_sbm(&params, 2).unwrap();
        let out = boost(&g, &p, 7, 2, &BoostConfig::default()).unwrap();
        assert_eq!(out.sizes(), vec![7, 7]);
    }

    #[test]
    fn corrupted_counts() {
        let params = SbmParams::new(20, 2, 8.0, 2.0).unwrap();
        let (g, _) = sample_sbm(&params, 3).unwrap();
        let s = split_edges(&g, 5).unwrap();
        assert_eq!(count_corrupted(&g, &g, &s, 1.0).unwrap(), 0);
        // flip three second-half pairs at vertex 0
        let mut flipped = Vec::new();
        for v in 1..40 {
            if pair_colour(5, 0, v) && flipped.len() < 3 {
                flipped.push(v);
            }
        }
        let mut triples: Vec<_> = g.pairs().collect();
        for &v in &flipped {
            if let Some(pos) = triples.iter().position(|&(a, b, _)| (a, b) == (0, v)) {
                triples.remove(pos);
            } else {
                triples.push((0, v, 1));
            }
        }
        let h = Graph::from_weighted(40, triples, true).unwrap();
        let hs = split_edges(&h, 5).unwrap();
        assert!(count_corrupted(&h, &g, &hs, 3.0).unwrap() >= 1);
    }

    #[test]
    fn threshold_default_and_validation() {
        let params = SbmParams::new(10, 2, 40.0, 4.0).unwrap();
        assert_eq!(BoostConfig::default().threshold_for(&params), 1.8);
        let bad = BoostConfig {
            threshold: Some(0.0),
            ..BoostConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn estimates_match_counts() {
        let p = Partition::planted(2, 2);
        let g = Graph::simple_from_edges(4, [(0, 1), (2, 3), (0, 2)]).unwrap();
        let (a, b) = estimate_ab(&g, &p).unwrap();
        assert_eq!(a, 1.0);
        assert_eq!(b, 0.5);
    }
}
