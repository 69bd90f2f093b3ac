#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use robust_sbm::recovery::WeakPartition;
use robust_sbm::rng::Rng as ChaCha;
use robust_sbm::sbm::Partition;
use robust_sbm::Embedding64;

/// Exactly feasible embedding: a weighted sum of `blocks` one-hot blocks,
/// each indexed by a balanced labelling (the first one planted), then
/// rotated by a random orthogonal matrix.
///
/// Unit norms hold since the weights have unit 2-norm, inner products are
/// nonnegative before the rotation, and every block contributes c²/k to
/// ‖mean‖², which is the spread constraint.
pub fn feasible_embedding(rng: &mut ChaCha, n: usize, k: usize, blocks: usize) -> (Embedding64, Partition) {
    let planted = Partition::planted(n, k);
    let total = n * k;
    let dim = blocks * k;
    let mut weights: Vec<f64> = (0..blocks).map(|_| rng.random_range(0.05..1.0)).collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    weights.iter_mut().for_each(|w| *w /= norm);

    let mut rows = vec![vec![0.0; dim]; total];
    for (j, &w) in weights.iter().enumerate() {
        let mut labels = planted.labels().to_vec();
        if j > 0 {
            labels.shuffle(rng);
        }
        for (u, &l) in labels.iter().enumerate() {
            rows[u][j * k + l] = w;
        }
    }
    let q = random_orthogonal(rng, dim);
    let rotated = rows
        .iter()
        .map(|r| (0..dim).map(|i| (0..dim).map(|j| q[i][j] * r[j]).sum()).collect())
        .collect();
    (Embedding64::from_rows(rotated).unwrap(), planted)
}

/// Gram-Schmidt on a Gaussian-ish matrix.
fn random_orthogonal(rng: &mut ChaCha, dim: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while q.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        for b in &q {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            q.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    q
}

pub fn random_balanced(rng: &mut ChaCha, n: usize, k: usize) -> Partition {
    let mut labels = Partition::planted(n, k).labels().to_vec();
    labels.shuffle(rng);
    Partition::new(labels, k).unwrap()
}

/// Planted partition with `swaps` label exchanges between random vertices.
pub fn perturbed(rng: &mut ChaCha, n: usize, k: usize, swaps: usize) -> Partition {
    let mut labels = Partition::planted(n, k).labels().to_vec();
    for _ in 0..swaps {
        let u = rng.random_range(0..n * k);
        let v = rng.random_range(0..n * k);
        labels.swap(u, v);
    }
    Partition::new(labels, k).unwrap()
}

/// 1 − max over all label permutations of the matched fraction.
pub fn brute_force_strong(p: &Partition, planted: &Partition) -> f64 {
    let k = planted.k();
    let mut m = vec![vec![0usize; k]; k];
    for u in 0..planted.vertex_count() {
        m[planted.label(u)][p.label(u)] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |s| {
        best = best.max((0..k).map(|i| m[i][s[i]]).sum());
    });
    1.0 - best as f64 / planted.vertex_count() as f64
}

fn permute(a: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize])) {
    if i == a.len() {
        f(a);
        return;
    }
    for j in i..a.len() {
        a.swap(i, j);
        permute(a, i + 1, f);
        a.swap(i, j);
    }
}

/// Weak partition with clusters of size ≤ n: planted clusters chopped into
/// random pieces with a few vertices moved between pieces, or, with
/// probability ½, a random chopping of a shuffled vertex order.
pub fn random_weak(rng: &mut ChaCha, n: usize, k: usize) -> WeakPartition {
    let total = n * k;
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    let order: Vec<usize> = if rng.random_bool(0.5) {
        let mut o: Vec<usize> = (0..total).collect();
        let moves = rng.random_range(0..=total / 3);
        for _ in 0..moves {
            let (a, b) = (rng.random_range(0..total), rng.random_range(0..total));
            o.swap(a, b);
        }
        o
    } else {
        let mut o: Vec<usize> = (0..total).collect();
        o.shuffle(rng);
        o
    };
    let mut i = 0;
    while i < total {
        let len = if rng.random_bool(0.6) { n } else { rng.random_range(1..=n) };
        let end = (i + len).min(total);
        pieces.push(order[i..end].to_vec());
        i = end;
    }
    WeakPartition::new(pieces, total, n).unwrap()
}

pub fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}
