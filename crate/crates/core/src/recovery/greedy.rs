use serde::Serialize;

use crate::error::{Error, Result};
use crate::sbm::Partition;
use crate::sdp::Embedding;
use crate::scalar::Scalar;

/// Disjoint clusters covering all vertices, each of size at most `n`.
/// The number of clusters may differ from k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeakPartition {
    clusters: Vec<Vec<usize>>,
    vertex_count: usize,
}

impl WeakPartition {
    /// Validates disjointness, coverage and the size cap. Clusters are kept
    /// in the given order; members are sorted.
    pub fn new(mut clusters: Vec<Vec<usize>>, vertex_count: usize, n: usize) -> Result<Self> {
        let mut seen = vec![false; vertex_count];
        for c in &mut clusters {
            if c.is_empty() {
                return Err(Error::InvalidParams("empty cluster".into()));
            }
            if c.len() > n {
                return Err(Error::Precondition(format!(
                    "cluster of size {} exceeds cap {n}",
                    c.len()
                )));
            }
            c.sort_unstable();
            for &u in c.iter() {
                if u >= vertex_count {
                    return Err(Error::Shape(format!("vertex {u} out of range")));
                }
                if std::mem::replace(&mut seen[u], true) {
                    return Err(Error::InvalidParams(format!("vertex {u} in two clusters")));
                }
            }
        }
        if let Some(u) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParams(format!("vertex {u} unassigned")));
        }
        Ok(WeakPartition {
            clusters,
            vertex_count,
        })
    }

    pub fn from_partition(p: &Partition) -> Self {
        WeakPartition {
            clusters: p.clusters().into_iter().filter(|c| !c.is_empty()).collect(),
            vertex_count: p.vertex_count(),
        }
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn count(&self) -> usize {
        self.clusters.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn max_size(&self) -> usize {
        self.clusters.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Greedy ball carving on the auxiliary graph {‖u − v‖ < 2ρ}.
///
/// Each round takes the residual vertex of maximum residual degree (lowest id
/// on ties) and removes its residual neighbourhood, keeping the `n` lowest ids.
pub fn greedy_recover<T: Scalar>(e: &Embedding<T>, n: usize, rho: f64) -> Result<WeakPartition> {
    if n == 0 {
        return Err(Error::InvalidParams("cluster size must be positive".into()));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParams(format!("rho must be positive, got {rho}")));
    }
    let total = e.vertex_count();
    let radius_sq = T::of(4.0 * rho * rho);
    let mut aux: Vec<Vec<usize>> = (0..total).map(|u| vec![u]).collect();
    for u in 0..total {
        for v in u + 1..total {
            if e.dist_sq(u, v) < radius_sq {
                aux[u].push(v);
                aux[v].push(u);
            }
        }
    }
    for list in &mut aux {
        list.sort_unstable();
    }
    let mut degree: Vec<usize> = aux.iter().map(Vec::len).collect();
    let mut alive = vec![true; total];
    let mut remaining = total;
    let mut clusters = Vec::new();
    while remaining > 0 {
        let mut best = usize::MAX;
        for u in 0..total {
            if alive[u] && (best == usize::MAX || degree[u] > degree[best]) {
                best = u;
            }
        }
        let mut cluster: Vec<usize> = aux[best].iter().copied().filter(|&v| alive[v]).collect();
        cluster.truncate(n);
        for &v in &cluster {
            alive[v] = false;
        }
        for &v in &cluster {
            for &x in &aux[v] {
                degree[x] -= 1;
            }
        }
        remaining -= cluster.len();
        clusters.push(cluster);
    }
    Ok(WeakPartition {
        clusters,
        vertex_count: total,
    })
}

/// Keeps the k largest clusters (earlier clusters win ties) and fills them to
/// size `n` with the remaining vertices in ascending order, always into the
/// lowest-index cluster that is still short.
pub fn weak_to_strong(w: &WeakPartition, n: usize, k: usize) -> Result<Partition> {
    if n * k != w.vertex_count() {
        return Err(Error::Shape(format!(
            "{} vertices cannot form {k} clusters of size {n}",
            w.vertex_count()
        )));
    }
    if w.max_size() > n {
        return Err(Error::Precondition(format!(
            "weak partition has a cluster larger than {n}"
        )));
    }
    let mut order: Vec<usize> = (0..w.count()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(w.clusters[i].len()), i));
    let mut kept: Vec<usize> = order.into_iter().take(k).collect();
    kept.sort_unstable();

    let mut labels = vec![usize::MAX; w.vertex_count()];
    let mut sizes = vec![0usize; k];
    for (label, &ci) in kept.iter().enumerate() {
        for &u in &w.clusters[ci] {
            labels[u] = label;
        }
        sizes[label] = w.clusters[ci].len();
    }
    let mut target = 0;
    for u in 0..labels.len() {
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
