use serde::Serialize;

use super::embedding::{sdp_objective, Embedding};
use crate::error::{Error, Result};
use crate::sbm::{Graph, Partition};
use crate::scalar::{dist_sq, dot, Scalar};

/// Average distances of an embedding measured against a planted partition.
#[derive(Debug, Clone, Serialize)]
pub struct SdpDiagnostics<T> {
    pub k: usize,
    pub n: usize,
    /// Mean of ½|u - v|² over ordered within-cluster pairs, diagonal included.
    pub alpha: T,
    /// Mean of ½|u - v|² over ordered between-cluster pairs. NaN when k = 1.
    pub beta: T,
    pub alpha_i: Vec<T>,
    pub centers: Vec<Vec<T>>,
    pub radii: Vec<T>,
    pub objective: Option<T>,
}

/// Computes α and β by direct pair sums and αᵢ, Wᵢ, Rᵤ cluster by cluster.
pub fn compute_diagnostics<T: Scalar>(
    e: &Embedding<T>,
    planted: &Partition,
) -> Result<SdpDiagnostics<T>> {
    let n_total = e.vertex_count();
    if planted.vertex_count() != n_total {
        return Err(Error::Shape(format!(
            "partition has {} vertices, embedding has {n_total}",
            planted.vertex_count()
        )));
    }
    let n = planted.cluster_size().ok_or_else(|| {
        Error::Precondition("diagnostics need a balanced planted partition".into())
    })?;
    let k = planted.k();
    let clusters = planted.clusters();

    let mut alpha_i = Vec::with_capacity(k);
    let mut within_total = T::zero();
    for c in &clusters {
        let mut s = T::zero();
        for (i, &u) in c.iter().enumerate() {
            for &v in &c[i + 1..] {
                s += e.dist_sq(u, v);
            }
        }
        // ordered pairs: each unordered pair twice, times ½
        within_total += s;
        alpha_i.push(s / T::of_usize(n * n));
    }
    let alpha = within_total / T::of_usize(k * n * n);

    let mut between_total = T::zero();
    for u in 0..n_total {
        for v in u + 1..n_total {
            if !planted.same_cluster(u, v) {
                between_total += e.dist_sq(u, v);
            }
        }
    }
    let beta = if k > 1 {
        between_total / T::of_usize(k * (k - 1) * n * n)
    } else {
        T::nan()
    };

    let dim = e.dim();
    let centers: Vec<Vec<T>> = clusters
        .iter()
        .map(|c| {
            let mut w = vec![T::zero(); dim];
            for &u in c {
                for (a, b) in w.iter_mut().zip(e.row(u)) {
                    *a += *b;
                }
            }
            let nf = T::of_usize(c.len().max(1));
            w.iter_mut().for_each(|x| *x /= nf);
            w
        })
        .collect();
    let radii = (0..n_total)
        .map(|u| dist_sq(e.row(u), &centers[planted.label(u)]).sqrt())
        .collect();

    Ok(SdpDiagnostics {
        k,
        n,
        alpha,
        beta,
        alpha_i,
        centers,
        radii,
        objective: None,
    })
}

impl<T: Scalar> SdpDiagnostics<T> {
    pub fn with_objective(mut self, e: &Embedding<T>, g: &Graph) -> Self {
        self.objective = Some(sdp_objective(e, g));
        self
    }

    /// α + (k−1)β − (k−1); zero for every feasible embedding.
    pub fn spread_identity_residual(&self) -> T {
        let km1 = T::of_usize(self.k - 1);
        self.alpha + km1 * self.beta - km1
    }

    pub fn mean_alpha_i(&self) -> T {
        self.alpha_i.iter().copied().sum::<T>() / T::of_usize(self.k)
    }

    pub fn center_norm_sq(&self, i: usize) -> T {
        dot(&self.centers[i], &self.centers[i])
    }

    pub fn center_dist(&self, i: usize, j: usize) -> T {
        dist_sq(&self.centers[i], &self.centers[j]).sqrt()
    }

    pub fn center_inner(&self, i: usize, j: usize) -> T {
        dot(&self.centers[i], &self.centers[j])
    }

    /// Mean of ⟨Wᵢ, Wⱼ⟩ over ordered pairs i ≠ j.
    pub fn mean_center_inner(&self) -> T {
        if self.k < 2 {
            return T::zero();
        }
        let mut s = T::zero();
        for i in 0..self.k {
            for j in 0..self.k {
                if i != j {
                    s += self.center_inner(i, j);
                }
            }
        }
        s / T::of_usize(self.k * (self.k - 1))
    }

    /// Mean of Rᵤ² over the vertices of cluster `i`.
    pub fn mean_radius_sq(&self, planted: &Partition, i: usize) -> T {
        let mut s = T::zero();
        let mut c = 0usize;
        for (u, r) in self.radii.iter().enumerate() {
            if planted.label(u) == i {
                s += *r * *r;
                c += 1;
            }
        }
        s / T::of_usize(c.max(1))
    }
}
