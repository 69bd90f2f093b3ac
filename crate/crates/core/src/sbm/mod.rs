//! Stochastic block model instances: parameters, samplers for the Bernoulli
//! and Poisson variants, the graph and partition containers, adversarial
//! corruption and the plain-text file formats.

mod adversary;
mod graph;
pub mod io;
mod partition;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

pub use adversary::{
    apply_monotone_adversary, apply_outlier_adversary, AdversaryBudget, Corruption, Strategy,
};
pub use graph::Graph;
pub use partition::{random_vertex_permutation, Partition};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Parameters of SBM(n, k, a, b): `k` clusters of `n` vertices, intra-cluster
/// edge probability `a/n`, inter-cluster edge probability `b/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub b: f64,
}

impl SbmParams {
    pub fn new(n: usize, k: usize, a: f64, b: f64) -> Result<Self> {
        let p = SbmParams { n, k, a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::InvalidParams("n and k must be positive".into()));
        }
        if !(self.b >= 0.0 && self.a >= self.b && self.a.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "need a >= b >= 0, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// N = n k.
    pub fn vertex_count(&self) -> usize {
        self.n * self.k
    }

    /// a + b (k - 1), the expected degree.
    pub fn expected_degree(&self) -> f64 {
        self.a + self.b * (self.k as f64 - 1.0)
    }

    /// m = (n k a + n k (k-1) b) / 2, the expected edge count.
    pub fn expected_edges(&self) -> f64 {
        let (n, k) = (self.n as f64, self.k as f64);
        0.5 * (n * k * self.a + n * k * (k - 1.0) * self.b)
    }

    pub fn p_in(&self) -> f64 {
        self.a / self.n as f64
    }

    pub fn p_out(&self) -> f64 {
        self.b / self.n as f64
    }

    /// Same n and k with a and b halved, the model seen by each half of an
    /// edge split.
    pub fn halved(&self) -> SbmParams {
        SbmParams {
            a: self.a / 2.0,
            b: self.b / 2.0,
            ..*self
        }
    }
}

/// Samples SBM(n, k, a, b) with the contiguous planted partition.
///
/// Every unordered pair is visited in lexicographic order and receives one
/// uniform draw, so the output depends on the seed alone.
pub fn sample_sbm(params: &SbmParams, seed: u64) -> Result<(Graph, Partition)> {
    params.validate()?;
    let (p_in, p_out) = (params.p_in(), params.p_out());
    if p_in > 1.0 {
        return Err(Error::InvalidProbability {
            which: "a/n",
            prob: p_in,
        });
    }
    if p_out > 1.0 {
        return Err(Error::InvalidProbability {
            which: "b/n",
            prob: p_out,
        });
    }
    let n_total = params.vertex_count();
    let planted = Partition::planted(params.n, params.k);
    let mut rng = rng_from_seed(seed);
    let mut pairs = Vec::new();
    for u in 0..n_total {
        for v in u + 1..n_total {
            let p = if u / params.n == v / params.n { p_in } else { p_out };
            let x: f64 = rng.random();
            if x < p {
                pairs.push((u, v, 1));
            }
        }
    }
    Ok((Graph::from_sorted_pairs(n_total, pairs, true), planted))
}

/// Samples the Poisson multigraph variant: the multiplicity of every pair is
/// an independent Poisson variable with rate `a/n` or `b/n`.
pub fn sample_poisson_sbm(params: &SbmParams, seed: u64) -> Result<(Graph, Partition)> {
    params.validate()?;
    let n_total = params.vertex_count();
    let planted = Partition::planted(params.n, params.k);
    let mut rng = rng_from_seed(seed);
    let dist = |rate: f64| (rate > 0.0).then(|| Poisson::new(rate).expect("positive rate"));
    let (d_in, d_out) = (dist(params.p_in()), dist(params.p_out()));
    let mut pairs = Vec::new();
    for u in 0..n_total {
        for v in u + 1..n_total {
            let d = if u / params.n == v / params.n { &d_in } else { &d_out };
            if let Some(d) = d {
                let m = d.sample(&mut rng) as u32;
                if m > 0 {
                    pairs.push((u, v, m));
                }
            }
        }
    }
    Ok((Graph::from_sorted_pairs(n_total, pairs, false), planted))
}

/// Caps multiplicities at one.
pub fn flatten_to_simple(g: &Graph) -> Graph {
    g.flatten_to_simple()
}

/// Edge counts (with multiplicity) inside clusters and between clusters.
pub fn classify_edges(g: &Graph, p: &Partition) -> (usize, usize) {
    let mut within = 0;
    let mut between = 0;
    for (u, v, m) in g.pairs() {
        if p.same_cluster(u, v) {
            within += m as usize;
        } else {
            between += m as usize;
        }
    }
    (within, between)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rates_give_empty_graph() {
        let params = SbmParams::new(3, 2, 0.0, 0.0).unwrap();
        let (g, p) = sample_sbm(&params, 17).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(p, Partition::planted(3, 2));
        let (g, _) = sample_poisson_sbm(&params, 17).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(!g.is_simple());
    }

    #[test]
    fn unit_probability_gives_complete_graph() {
        let params = SbmParams::new(2, 2, 2.0, 2.0).unwrap();
        let (g, _) = sample_sbm(&params, 3).unwrap();
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn rejects_probability_above_one() {
        let params = SbmParams::new(2, 2, 3.0, 1.0).unwrap();
        assert!(matches!(
            sample_sbm(&params, 0),
            Err(Error::InvalidProbability { which: "a/n", .. })
        ));
        // the Poisson variant has no such restriction
        assert!(sample_poisson_sbm(&params, 0).is_ok());
    }

    #[test]
    fn rejects_a_below_b() {
        assert!(SbmParams::new(10, 2, 1.0, 2.0).is_err());
        assert!(SbmParams::new(0, 2, 1.0, 0.0).is_err());
    }

    #[test]
    fn expected_edges_formula() {
        let p = SbmParams::new(100, 2, 10.0, 2.0).unwrap();
        assert_eq!(p.expected_edges(), 1200.0);
        assert_eq!(p.expected_degree(), 12.0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let params = SbmParams::new(30, 3, 6.0, 1.0).unwrap();
        assert_eq!(sample_sbm(&params, 9).unwrap(), sample_sbm(&params, 9).unwrap());
        assert_ne!(sample_sbm(&params, 9).unwrap().0, sample_sbm(&params, 10).unwrap().0);
        assert_eq!(
            sample_poisson_sbm(&params, 9).unwrap(),
            sample_poisson_sbm(&params, 9).unwrap()
        );
    }
}
