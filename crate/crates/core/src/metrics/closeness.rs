use serde::Serialize;

use crate::error::{Error, Result};
use crate::recovery::WeakPartition;
use crate::sbm::Partition;

/// δ together with the matching that attains it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Closeness {
    pub delta: f64,
    /// Planted cluster i is matched to cluster `sigma[i]` of the candidate.
    pub sigma: Vec<Option<usize>>,
    /// Vertices in matched intersections.
    pub overlap: usize,
}

/// `m[i][j]` = |planted cluster i ∩ candidate cluster j|.
pub fn overlap_matrix(planted: &Partition, clusters: &[Vec<usize>]) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; clusters.len()]; planted.k()];
    for (j, c) in clusters.iter().enumerate() {
        for &u in c {
            m[planted.label(u)][j] += 1;
        }
    }
    m
}

/// Exact maximum-weight assignment of every row to a distinct column
/// (rows ≤ columns), by the O(r²c) shortest augmenting path method.
/// Returns the total weight and the column of each row.
pub fn max_weight_assignment(w: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let rows = w.len();
    if rows == 0 {
        return (0, Vec::new());
    }
    let cols = w[0].len();
    assert!(rows <= cols, "more rows than columns");
    let cost = |i: usize, j: usize| -w[i][j];
    // 1-based potentials; column 0 is a sentinel
    let mut u = vec![0i64; rows + 1];
    let mut v = vec![0i64; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| w[i][j]).sum();
    (total, assignment)
}

/// Strong closeness: best permutation between two balanced partitions.
pub fn closeness_strong(p: &Partition, planted: &Partition) -> Result<Closeness> {
    let (Some(n), Some(n_star)) = (p.cluster_size(), planted.cluster_size()) else {
        return Err(Error::Precondition("strong closeness needs balanced partitions".into()));
    };
    if p.k() != planted.k() || n != n_star || p.vertex_count() != planted.vertex_count() {
        return Err(Error::Shape(format!(
            "partition shapes differ: k={} n={n} vs k={} n={n_star}",
            p.k(),
            planted.k()
        )));
    }
    let m = overlap_matrix(planted, &p.clusters());
    let (total, sigma) = max_weight_assignment(&m);
    Ok(Closeness {
        delta: 1.0 - total as f64 / planted.vertex_count() as f64,
        sigma: sigma.into_iter().map(Some).collect(),
        overlap: total as usize,
    })
}

/// Weak closeness: best partial matching between planted clusters and the
/// clusters of a weak partition.
pub fn closeness_weak(w: &WeakPartition, planted: &Partition) -> Result<Closeness> {
    let n = planted
        .cluster_size()
        .ok_or_else(|| Error::Precondition("planted partition must be balanced".into()))?;
    if w.vertex_count() != planted.vertex_count() {
        return Err(Error::Shape(format!(
            "{} vertices vs {} planted",
            w.vertex_count(),
            planted.vertex_count()
        )));
    }
    if w.max_size() > n {
        return Err(Error::Precondition(format!(
            "weak cluster of size {} exceeds {n}",
            w.max_size()
        )));
    }
    let k = planted.k();
    let real = w.count();
    let mut m = overlap_matrix(planted, w.clusters());
    // zero columns stand for "unmatched"
    for row in &mut m {
        row.resize(real.max(k), 0);
    }
    let (total, assignment) = max_weight_assignment(&m);
    Ok(Closeness {
        delta: 1.0 - total as f64 / planted.vertex_count() as f64,
        sigma: assignment.into_iter().map(|j| (j < real).then_some(j)).collect(),
        overlap: total as usize,
    })
}
