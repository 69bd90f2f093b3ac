use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::embedding::{check_feasibility, normalize, sdp_objective, Embedding, FeasibilityReport};
use crate::error::{Error, Result};
use crate::rng::derived_rng;
use crate::sbm::{Graph, SbmParams};
use crate::scalar::{axpy, dot, Scalar};

/// Low-rank solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Factor dimension; `None` picks min(N, max(k, ⌈√(2N)⌉ + 1)).
    pub rank: Option<usize>,
    /// Gradient iterations per restart, summed over all multiplier rounds.
    pub max_iterations: usize,
    /// Gradient iterations between multiplier updates.
    pub inner_iterations: usize,
    /// First step length, in units of 1 / average degree.
    pub initial_step: f64,
    /// Upper clamp on the Barzilai-Borwein step, same units.
    pub max_step: f64,
    /// Initial penalty weight, in units of the average degree.
    pub penalty: f64,
    /// Factor applied to a penalty weight whose violation stalls.
    pub penalty_growth: f64,
    /// Stationarity tolerance on the largest row of the Riemannian gradient.
    pub grad_tol: f64,
    pub tol_feas: f64,
    pub tol_obj: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rank: None,
            max_iterations: 4000,
            inner_iterations: 250,
            initial_step: 0.05,
            max_step: 100.0,
            penalty: 1.0,
            penalty_growth: 4.0,
            grad_tol: 1e-5,
            tol_feas: 1e-3,
            tol_obj: 1e-2,
            restarts: 2,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("penalty", self.penalty),
            ("grad_tol", self.grad_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::InvalidParams("penalty_growth must exceed 1".into()));
        }
        for (name, v) in [("tol_feas", self.tol_feas), ("tol_obj", self.tol_obj)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParams(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.max_iterations == 0 || self.inner_iterations == 0 || self.restarts == 0 {
            return Err(Error::InvalidParams(
                "iteration counts and restarts must be positive".into(),
            ));
        }
        if self.rank == Some(0) {
            return Err(Error::InvalidParams("rank must be positive".into()));
        }
        Ok(())
    }

    pub fn rank_for(&self, vertex_count: usize, k: usize) -> usize {
        self.rank.unwrap_or_else(|| {
            let r = (2.0 * vertex_count as f64).sqrt().ceil() as usize + 1;
            r.max(k).min(vertex_count).max(1)
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpSolution<T> {
    pub embedding: Embedding<T>,
    pub objective: T,
    pub feasibility: FeasibilityReport<T>,
    /// False when the iteration budget ran out before the multiplier rounds
    /// reached stationarity and feasibility.
    pub converged: bool,
    pub iterations: usize,
    pub restart_objectives: Vec<T>,
}

/// Solves the relaxation by Riemannian gradient descent on a product of
/// spheres with augmented-Lagrangian terms for the spread and nonnegativity
/// constraints, then projects onto the spread constraint exactly.
pub fn solve_sdp<T: Scalar>(
    g: &Graph,
    params: &SbmParams,
    cfg: &SolverConfig,
) -> Result<SdpSolution<T>> {
    params.validate()?;
    cfg.validate()?;
    let n = params.vertex_count();
    if g.vertex_count() != n {
        return Err(Error::Shape(format!(
            "graph has {} vertices, parameters describe {n}",
            g.vertex_count()
        )));
    }
    if !g.is_simple() {
        return Err(Error::Precondition("solve_sdp needs a simple graph".into()));
    }
    let r = cfg.rank_for(n, params.k);
    let problem = Problem::new(g, n, r, params.k);
    let tol = T::of(cfg.tol_feas);

    let mut best: Option<SdpSolution<T>> = None;
    let mut restart_objectives = Vec::with_capacity(cfg.restarts);
    let mut total_iterations = 0;
    for restart in 0..cfg.restarts {
        let (mut y, converged, iterations) = problem.run(cfg, restart as u64);
        total_iterations += iterations;
        project_spread(&mut y, n, r, params.k)?;
        let embedding = Embedding::from_flat(n, r, y)?;
        let objective = sdp_objective(&embedding, g);
        let feasibility = check_feasibility(&embedding, params, tol);
        restart_objectives.push(objective);
        let candidate = SdpSolution {
            embedding,
            objective,
            converged: converged && feasibility.passed,
            feasibility,
            iterations,
            restart_objectives: Vec::new(),
        };
        let better = match &best {
            None => true,
            Some(b) => match (candidate.feasibility.passed, b.feasibility.passed) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => candidate.objective < b.objective,
                (false, false) => candidate.feasibility.worst() < b.feasibility.worst(),
            },
        };
        if better {
            best = Some(candidate);
        }
    }
    let mut best = best.expect("at least one restart");
    best.iterations = total_iterations;
    best.restart_objectives = restart_objectives;
    Ok(best)
}

struct Problem<T> {
    n: usize,
    r: usize,
    k: usize,
    // CSR adjacency, neighbours ascending
    adj_off: Vec<usize>,
    adj: Vec<usize>,
    edge_count: usize,
    scale: T,
}

struct State<T> {
    lam_pair: Vec<T>,
    lam_spread: T,
    mu_pair: T,
    mu_spread: T,
}

struct Eval<T> {
    lagrangian: T,
    spread_gap: T,
    min_inner: T,
    grad_max: T,
    grad_sq: T,
}

impl<T: Scalar> Problem<T> {
    fn new(g: &Graph, n: usize, r: usize, k: usize) -> Self {
        let adjacency = g.adjacency();
        let mut adj_off = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        adj_off.push(0);
        for list in &adjacency {
            let mut nb: Vec<usize> = list.iter().map(|&(v, _)| v).collect();
            nb.sort_unstable();
            adj.extend(nb);
            adj_off.push(adj.len());
        }
        let edge_count = g.edge_count();
        let avg_degree = if n > 0 { 2.0 * edge_count as f64 / n as f64 } else { 0.0 };
        Problem {
            n,
            r,
            k,
            adj_off,
            adj,
            edge_count,
            scale: T::of(avg_degree.max(1.0)),
        }
    }

    fn initial(&self, seed: u64, restart: u64) -> Vec<T> {
        let mut rng = derived_rng(seed, restart);
        let mut y: Vec<T> = (0..self.n * self.r)
            .map(|_| T::of(rng.sample::<f64, _>(StandardNormal).abs()))
            .collect();
        for row in y.chunks_exact_mut(self.r) {
            normalize(row);
        }
        y
    }

    /// Augmented Lagrangian value and its Riemannian gradient at `y`.
    fn evaluate(&self, y: &[T], st: &State<T>, grad: &mut [T]) -> Eval<T> {
        let (n, r) = (self.n, self.r);
        grad.iter_mut().for_each(|x| *x = T::zero());
        let two = T::of(2.0);
        let mut lagrangian = T::of_usize(self.edge_count);
        let mut min_inner = T::infinity();
        let mut idx = 0;
        for u in 0..n {
            let yu = &y[u * r..(u + 1) * r];
            let nb = &self.adj[self.adj_off[u]..self.adj_off[u + 1]];
            let mut e = nb.partition_point(|&v| v <= u);
            for v in u + 1..n {
                let yv = &y[v * r..(v + 1) * r];
                let ip = dot(yu, yv);
                min_inner = min_inner.min(ip);
                let mut coef = T::zero();
                if e < nb.len() && nb[e] == v {
                    e += 1;
                    coef += T::one();
                    lagrangian -= ip;
                }
                let lam = st.lam_pair[idx];
                let c = lam - st.mu_pair * ip;
                if c > T::zero() {
                    lagrangian += (c * c - lam * lam) / (two * st.mu_pair);
                    coef += c;
                } else {
                    lagrangian -= lam * lam / (two * st.mu_pair);
                }
                if coef != T::zero() {
                    let (head, tail) = grad.split_at_mut(v * r);
                    axpy(-coef, yv, &mut head[u * r..(u + 1) * r]);
                    axpy(-coef, yu, &mut tail[..r]);
                }
                idx += 1;
            }
        }

        // N * (λ h + μ h² / 2) with h = |mean|² - 1/k
        let mut s = vec![T::zero(); r];
        for row in y.chunks_exact(r) {
            axpy(T::one(), row, &mut s);
        }
        let nf = T::of_usize(n);
        let h = dot(&s, &s) / (nf * nf) - T::one() / T::of_usize(self.k);
        lagrangian += nf * (st.lam_spread * h + st.mu_spread * h * h / two);
        let c = two * (st.lam_spread + st.mu_spread * h) / nf;
        for gu in grad.chunks_exact_mut(r) {
            axpy(c, &s, gu);
        }

        let mut grad_max = T::zero();
        let mut grad_sq = T::zero();
        for (gu, yu) in grad.chunks_exact_mut(r).zip(y.chunks_exact(r)) {
            let radial = dot(gu, yu);
            axpy(-radial, yu, gu);
            let sq = dot(gu, gu);
            grad_sq += sq;
            grad_max = grad_max.max(sq);
        }
        Eval {
            lagrangian,
            spread_gap: h,
            min_inner,
            grad_max: grad_max.sqrt(),
            grad_sq,
        }
    }

    fn update_multipliers(&self, y: &[T], st: &mut State<T>, spread_gap: T) {
        let (n, r) = (self.n, self.r);
        let mut idx = 0;
        for u in 0..n {
            let yu = &y[u * r..(u + 1) * r];
            for v in u + 1..n {
                let ip = dot(yu, &y[v * r..(v + 1) * r]);
                st.lam_pair[idx] = (st.lam_pair[idx] - st.mu_pair * ip).max(T::zero());
                idx += 1;
            }
        }
        st.lam_spread += st.mu_spread * spread_gap;
    }

    /// One restart. Returns the final iterate, whether it met the internal
    /// stopping rule, and the gradient iterations used.
    fn run(&self, cfg: &SolverConfig, restart: u64) -> (Vec<T>, bool, usize) {
        let (n, r) = (self.n, self.r);
        let mut y = self.initial(cfg.seed, restart);
        if n <= 1 || self.k == 1 {
            return (y, true, 0);
        }
        let mut st = State {
            lam_pair: vec![T::zero(); n * (n - 1) / 2],
            lam_spread: T::zero(),
            mu_pair: T::of(cfg.penalty) * self.scale,
            mu_spread: T::of(cfg.penalty * 10.0) * self.scale,
        };
        let growth = T::of(cfg.penalty_growth);
        let grad_tol = T::of(cfg.grad_tol) * self.scale;
        let pair_tol = T::of(cfg.tol_feas * 1e-2);
        let spread_tol = T::of(cfg.tol_feas * 1e-2);
        let max_step = T::of(cfg.max_step) / self.scale;
        let min_step = T::of(1e-12) / self.scale;
        let mut step = T::of(cfg.initial_step) / self.scale;

        let mut grad = vec![T::zero(); n * r];
        let mut trial = vec![T::zero(); n * r];
        let mut trial_grad = vec![T::zero(); n * r];
        let mut iterations = 0;
        let mut prev_pair_viol = T::infinity();
        let mut prev_spread_viol = T::infinity();
        let mut prev_lagrangian = T::infinity();
        let mut inner_tol = T::of(0.1) * self.scale;

        while iterations < cfg.max_iterations {
            let mut ev = self.evaluate(&y, &st, &mut grad);
            let mut history = vec![ev.lagrangian];
            let mut stationary = ev.grad_max <= grad_tol;
            let mut inner_done = ev.grad_max <= inner_tol;
            let mut bb_long = true;
            for _ in 0..cfg.inner_iterations {
                if stationary || inner_done || iterations >= cfg.max_iterations {
                    break;
                }
                iterations += 1;
                let reference = history.iter().copied().fold(T::neg_infinity(), T::max);
                let mut t = step;
                let trial_ev = loop {
                    for ((ty, yu), gu) in trial
                        .chunks_exact_mut(r)
                        .zip(y.chunks_exact(r))
                        .zip(grad.chunks_exact(r))
                    {
                        for j in 0..r {
                            ty[j] = yu[j] - t * gu[j];
                        }
                        normalize(ty);
                    }
                    let tev = self.evaluate(&trial, &st, &mut trial_grad);
                    let sufficient = reference - T::of(1e-4) * t * ev.grad_sq;
                    if tev.lagrangian <= sufficient || t <= min_step {
                        break tev;
                    }
                    t *= T::of(0.5);
                };
                // Barzilai-Borwein step from the ambient differences
                let mut ss = T::zero();
                let mut sz = T::zero();
                let mut zz = T::zero();
                for j in 0..n * r {
                    let sj = trial[j] - y[j];
                    let zj = trial_grad[j] - grad[j];
                    ss += sj * sj;
                    sz += sj * zj;
                    zz += zj * zj;
                }
                step = if sz > T::zero() {
                    let s = if bb_long { ss / sz } else { sz / zz };
                    s.max(min_step).min(max_step)
                } else {
                    max_step
                };
                bb_long = !bb_long;
                std::mem::swap(&mut y, &mut trial);
                std::mem::swap(&mut grad, &mut trial_grad);
                ev = trial_ev;
                history.push(ev.lagrangian);
                if history.len() > 10 {
                    history.remove(0);
                }
                stationary = ev.grad_max <= grad_tol;
                inner_done = ev.grad_max <= inner_tol;
            }

            let pair_viol = (-ev.min_inner).max(T::zero());
            let spread_viol = ev.spread_gap.abs();
            let stalled = (ev.lagrangian - prev_lagrangian).abs()
                <= T::of(cfg.tol_obj * 1e-5) * (T::one() + ev.lagrangian.abs());
            if (stationary || stalled) && pair_viol <= pair_tol && spread_viol <= spread_tol {
                return (y, true, iterations);
            }
            prev_lagrangian = ev.lagrangian;
            inner_tol = (inner_tol * T::of(0.3)).max(grad_tol);
            self.update_multipliers(&y, &mut st, ev.spread_gap);
            if pair_viol > pair_tol && pair_viol > T::of(0.25) * prev_pair_viol {
                st.mu_pair *= growth;
            }
            if spread_viol > spread_tol && spread_viol > T::of(0.25) * prev_spread_viol {
                st.mu_spread *= growth;
            }
            prev_pair_viol = pair_viol;
            prev_spread_viol = spread_viol;
        }
        (y, false, iterations)
    }
}

/// Normalizes rows, then moves every row along the homotopy
/// normalize(ȳ + s (y - ȳ)) to the scale `s` at which |mean|² = 1/k.
fn project_spread<T: Scalar>(y: &mut [T], n: usize, r: usize, k: usize) -> Result<()> {
    for row in y.chunks_exact_mut(r) {
        normalize(row);
    }
    if n == 0 {
        return Ok(());
    }
    let nf = T::of_usize(n);
    let mut mean = vec![T::zero(); r];
    for row in y.chunks_exact(r) {
        axpy(T::one() / nf, row, &mut mean);
    }
    if k == 1 {
        let mut d = mean.clone();
        if dot(&d, &d) == T::zero() {
            d = y[..r].to_vec();
        }
        normalize(&mut d);
        for row in y.chunks_exact_mut(r) {
            row.copy_from_slice(&d);
        }
        return Ok(());
    }
    if dot(&mean, &mean) <= T::epsilon() * T::epsilon() {
        mean = y[..r].iter().map(|&x| x * T::of(1e-3)).collect();
    }
    let target = T::one() / T::of_usize(k);
    let mut buf = vec![T::zero(); r];
    let mut gap = |s: T| -> T {
        let mut acc = vec![T::zero(); r];
        for row in y.chunks_exact(r) {
            for j in 0..r {
                buf[j] = mean[j] + s * (row[j] - mean[j]);
            }
            normalize(&mut buf);
            axpy(T::one() / nf, &buf, &mut acc);
        }
        dot(&acc, &acc) - target
    };

    let at_one = gap(T::one());
    if at_one == T::zero() {
        return Ok(());
    }
    let (mut lo, mut hi) = if at_one > T::zero() {
        let mut hi = T::of(2.0);
        while gap(hi) > T::zero() {
            hi *= T::of(2.0);
            if hi > T::of(1e12) {
                return Err(Error::SolverFailure(
                    "spread projection could not reach the target".into(),
                ));
            }
        }
        (T::one(), hi)
    } else {
        (T::zero(), T::one())
    };
    let (mut glo, mut ghi) = (gap(lo), gap(hi));
    if !(glo >= T::zero() && ghi <= T::zero()) {
        return Err(Error::SolverFailure("spread projection lost its bracket".into()));
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::of(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = gap(mid);
        if gm > T::zero() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    let s = if glo.abs() <= ghi.abs() { lo } else { hi };
    let mean = mean;
    for row in y.chunks_exact_mut(r) {
        for x in row.iter_mut().zip(&mean) {
            *x.0 = *x.1 + s * (*x.0 - *x.1);
        }
        normalize(row);
    }
    if y.iter().any(|x| !x.is_finite()) {
        return Err(Error::SolverFailure("non-finite coordinates after projection".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{sample_sbm, Partition};

    #[test]
    fn default_rank() {
        let cfg = SolverConfig::default();
        assert_eq!(cfg.rank_for(500, 2), 33);
        assert_eq!(cfg.rank_for(6, 2), 5);
        assert_eq!(cfg.rank_for(4, 4), 4);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            tol_feas: 1.5,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            restarts: 0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn projection_hits_spread_target() {
        let mut rng = derived_rng(3, 0);
        let (n, r, k) = (40, 6, 3);
        let mut y: Vec<f64> = (0..n * r).map(|_| rng.sample(StandardNormal)).collect();
        project_spread(&mut y, n, r, k).unwrap();
        let e = Embedding::from_flat(n, r, y).unwrap();
        let params = SbmParams::new(n / k + 1, k, 1.0, 0.0).unwrap();
        let mut s = e.row_sum();
        s.iter_mut().for_each(|x| *x /= n as f64);
        assert!((dot(&s, &s) - 1.0 / k as f64).abs() < 1e-12);
        let rep = check_feasibility(&e, &params, 1.0);
        assert!(rep.unit_norm < 1e-12);
    }

    #[test]
    fn solves_small_planted_instance() {
        let params = SbmParams::new(20, 2, 12.0, 1.0).unwrap();
        let (g, p) = sample_sbm(&params, 5).unwrap();
        let sol: SdpSolution<f64> = solve_sdp(&g, &params, &SolverConfig::default()).unwrap();
        assert!(sol.feasibility.passed, "{:?}", sol.feasibility);
        let planted = sdp_objective(&Embedding::<f64>::planted(&p), &g);
        assert!(sol.objective <= planted + 1e-2);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let params = SbmParams::new(10, 2, 6.0, 1.0).unwrap();
        let (g, _) = sample_sbm(&params, 1).unwrap();
        let cfg = SolverConfig::default();
        let a: SdpSolution<f64> = solve_sdp(&g, &params, &cfg).unwrap();
        let b: SdpSolution<f64> = solve_sdp(&g, &params, &cfg).unwrap();
        assert_eq!(a.embedding, b.embedding);
    }

    #[test]
    fn empty_graph_has_zero_objective() {
        let params = SbmParams::new(5, 2, 0.0, 0.0).unwrap();
        let sol: SdpSolution<f64> = solve_sdp(&Graph::empty(10), &params, &SolverConfig::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.feasibility.passed);
    }

    #[test]
    fn single_cluster_collapses() {
        let params = SbmParams::new(6, 1, 3.0, 0.0).unwrap();
        let (g, _) = sample_sbm(&params, 2).unwrap();
        let sol: SdpSolution<f64> = solve_sdp(&g, &params, &SolverConfig::default()).unwrap();
        assert!(sol.objective.abs() < 1e-12);
        assert!(sol.feasibility.passed);
    }

    #[test]
    fn rejects_mismatched_graph() {
        let params = SbmParams::new(5, 2, 1.0, 0.0).unwrap();
        let r: Result<SdpSolution<f64>> = solve_sdp(&Graph::empty(9), &params, &SolverConfig::default());
        assert!(matches!(r, Err(Error::Shape(_))));
        let multi = Graph::from_weighted(10, [(0, 1, 2)], false).unwrap();
        let r: Result<SdpSolution<f64>> = solve_sdp(&multi, &params, &SolverConfig::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
        let _ = Partition::planted(1, 1);
    }
}
