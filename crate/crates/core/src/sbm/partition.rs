use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Hard assignment of vertices to clusters `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("partition needs k >= 1".into()));
        }
        if let Some((u, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::InvalidParams(format!(
                "vertex {u} has label {l}, outside 0..{k}"
            )));
        }
        Ok(Partition { labels, k })
    }

    /// Like [`Partition::new`] but additionally requires every cluster to have
    /// exactly `labels.len() / k` members.
    pub fn balanced(labels: Vec<usize>, k: usize) -> Result<Self> {
        let p = Self::new(labels, k)?;
        if !p.is_balanced() {
            return Err(Error::Shape(format!(
                "partition is not balanced: cluster sizes {:?}",
                p.sizes()
            )));
        }
        Ok(p)
    }

    /// The contiguous equipartition: vertices `i*n .. (i+1)*n` form cluster `i`.
    pub fn planted(n: usize, k: usize) -> Self {
        Partition {
            labels: (0..n * k).map(|u| u / n).collect(),
            k,
        }
    }

    pub fn from_clusters(clusters: &[Vec<usize>], vertex_count: usize) -> Result<Self> {
        let mut labels = vec![usize::MAX; vertex_count];
        for (i, c) in clusters.iter().enumerate() {
            for &u in c {
                if u >= vertex_count || labels[u] != usize::MAX {
                    return Err(Error::Shape(format!(
                        "vertex {u} is out of range or assigned twice"
                    )));
                }
                labels[u] = i;
            }
        }
        if let Some(u) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Shape(format!("vertex {u} is unassigned")));
        }
        Self::new(labels, clusters.len().max(1))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Cluster size when balanced.
    pub fn cluster_size(&self) -> Option<usize> {
        self.is_balanced().then(|| self.labels.len() / self.k)
    }

    pub fn is_balanced(&self) -> bool {
        self.labels.len().is_multiple_of(self.k) && self.sizes().iter().all(|&s| s == self.labels.len() / self.k)
    }

    /// Members of each cluster in ascending vertex order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.k];
        for (u, &l) in self.labels.iter().enumerate() {
            c[l].push(u);
        }
        c
    }

    pub fn same_cluster(&self, u: usize, v: usize) -> bool {
        self.labels[u] == self.labels[v]
    }

    /// Renames cluster `i` to `perm[i]`.
    pub fn relabel_clusters(&self, perm: &[usize]) -> Result<Partition> {
        if perm.len() != self.k {
            return Err(Error::Shape("cluster permutation length differs from k".into()));
        }
        Partition::new(self.labels.iter().map(|&l| perm[l]).collect(), self.k)
    }

    /// Moves vertex `u` to `perm[u]`.
    pub fn relabel_vertices(&self, perm: &[usize]) -> Result<Partition> {
        if perm.len() != self.labels.len() {
            return Err(Error::Shape("vertex permutation length differs from N".into()));
        }
        let mut labels = vec![0; self.labels.len()];
        for (u, &l) in self.labels.iter().enumerate() {
            labels[perm[u]] = l;
        }
        Partition::new(labels, self.k)
    }
}

/// Uniformly random vertex permutation for fixed `seed`, for hiding the
/// contiguous planted layout.
pub fn random_vertex_permutation(vertex_count: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..vertex_count).collect();
    perm.shuffle(&mut rng_from_seed(seed));
    perm
}
