use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::derived_rng;

/// Tail mass we are willing to drop when truncating a pmf sum.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Smallest `K >= lambda` such that `Pr(P > K) < TAIL_TOLERANCE`.
///
/// For `j >= lambda` the pmf ratio `p(j+1)/p(j) = lambda/(j+1)` is below one
/// and decreasing, so the tail past `K` is dominated by a geometric series.
pub fn truncation_for(lambda: f64) -> usize {
    if lambda <= 0.0 {
        return 0;
    }
    let mut k = lambda.ceil() as usize;
    let mut lp = log_pmf(lambda, k);
    loop {
        let next = lp + lambda.ln() - ((k + 1) as f64).ln();
        let ratio = lambda / (k + 2) as f64;
        if ratio < 1.0 && next.exp() / (1.0 - ratio) < 0.1 * TAIL_TOLERANCE {
            return k;
        }
        lp = next;
        k += 1;
    }
}

/// ln Pr(P = j) for P ~ Poisson(lambda).
pub fn log_pmf(lambda: f64, j: usize) -> f64 {
    if lambda <= 0.0 {
        return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let ln_fact: f64 = (2..=j).map(|i| (i as f64).ln()).sum();
    -lambda + j as f64 * lambda.ln() - ln_fact
}

/// `Pr(P = j)` for `j in 0..=k`, accumulated in log space.
pub fn pmf_table(lambda: f64, k: usize) -> Vec<f64> {
    if lambda <= 0.0 {
        let mut t = vec![0.0; k + 1];
        t[0] = 1.0;
        return t;
    }
    let ln_l = lambda.ln();
    let mut lp = -lambda;
    let mut out = Vec::with_capacity(k + 1);
    out.push(lp.exp());
    for j in 1..=k {
        lp += ln_l - (j as f64).ln();
        out.push(lp.exp());
    }
    out
}

/// `Pr(P >= j)`, summed upwards to the truncation point.
pub fn upper_tail(lambda: f64, j: usize) -> f64 {
    let k = truncation_for(lambda).max(j) + 1;
    let t = pmf_table(lambda, k);
    t[j.min(k)..].iter().rev().sum()
}

/// `Pr(P >= x)` for a real threshold.
pub fn upper_tail_real(lambda: f64, x: f64) -> f64 {
    upper_tail(lambda, x.max(0.0).ceil() as usize)
}

/// `Pr(P >= floor(lambda)) >= 1/2`.
pub fn median_fact_holds(lambda: f64) -> bool {
    upper_tail(lambda, lambda.floor() as usize) >= 0.5
}

/// Two Poisson rates and a common truncation point for exact pmf sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonPair {
    pub lambda1: f64,
    pub lambda2: f64,
    pub truncation: usize,
}

impl PoissonPair {
    /// Orders the rates so that `lambda1 <= lambda2`.
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        for l in [lambda1, lambda2] {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "Poisson rates must be positive and finite, got {l}"
                )));
            }
        }
        let (lambda1, lambda2) = if lambda1 <= lambda2 {
            (lambda1, lambda2)
        } else {
            (lambda2, lambda1)
        };
        Ok(PoissonPair {
            lambda1,
            lambda2,
            truncation: truncation_for(lambda2),
        })
    }

    pub fn with_truncation(mut self, k: usize) -> Self {
        self.truncation = k;
        self
    }
}

/// `Pr(P1 = P2)` under the maximal coupling: `sum_j min(p1(j), p2(j))`.
pub fn coupling_overlap(p: &PoissonPair) -> f64 {
    if p.lambda1 == p.lambda2 {
        return 1.0;
    }
    let t1 = pmf_table(p.lambda1, p.truncation);
    let t2 = pmf_table(p.lambda2, p.truncation);
    t1.iter().zip(&t2).map(|(a, b)| a.min(*b)).sum()
}

/// Overlap for unordered positive rates.
pub fn overlap(lambda1: f64, lambda2: f64) -> Result<f64> {
    Ok(coupling_overlap(&PoissonPair::new(lambda1, lambda2)?))
}

/// `(l1 - l2)^2 / (l1 + l2)`.
pub fn coupling_exponent(lambda1: f64, lambda2: f64) -> f64 {
    let d = lambda1 - lambda2;
    d * d / (lambda1 + lambda2)
}

/// For each candidate `c1`, the smallest `c2 >= 0` with
/// `overlap >= c1 exp(-c2 x)` on every grid pair. Candidates that exceed the
/// overlap at some `x = 0` point are dropped.
pub fn coupling_constant_witness(grid: &[(f64, f64)], c1_candidates: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::with_capacity(grid.len());
    for &(l1, l2) in grid {
        points.push((coupling_exponent(l1, l2), overlap(l1, l2)?));
    }
    let mut out = Vec::new();
    'cand: for &c1 in c1_candidates {
        let mut c2: f64 = 0.0;
        for &(x, eta) in &points {
            if x == 0.0 {
                if eta < c1 {
                    continue 'cand;
                }
                continue;
            }
            c2 = c2.max((c1 / eta).ln() / x);
        }
        out.push((c1, c2));
    }
    Ok(out)
}

/// Smallest `C` with `Pr(P >= lambda + t sqrt(lambda)) >= exp(-C t^2)` over
/// the grid, from exact tail sums.
pub fn tail_constant_witness(lambdas: &[f64], ts: &[f64]) -> f64 {
    let mut c: f64 = 0.0;
    for &l in lambdas {
        for &t in ts {
            let tail = upper_tail_real(l, l + t * l.sqrt());
            c = c.max(-tail.ln() / (t * t));
        }
    }
    c
}

/// `floor(2 (lambda2 - lambda1))`, the cap on the adversary's additions.
pub fn kappa_cap(lambda1: f64, lambda2: f64) -> u64 {
    (2.0 * (lambda2 - lambda1)).floor().max(0.0) as u64
}

fn check_rates(lambda1: f64, lambda2: f64) -> Result<()> {
    if !(lambda1 >= 0.0 && lambda2.is_finite() && lambda2 > lambda1) {
        return Err(Error::InvalidParams(format!(
            "need lambda2 > lambda1 >= 0, got lambda1 = {lambda1}, lambda2 = {lambda2}"
        )));
    }
    Ok(())
}

fn sample_poisson(mu: f64, rng: &mut crate::rng::Rng) -> u64 {
    if mu <= 0.0 {
        return 0;
    }
    Poisson::new(mu).expect("positive rate").sample(rng) as u64
}

/// Draws `min(kappa, floor(2 (lambda2 - lambda1)))` with
/// `kappa ~ Poisson(lambda2 - lambda1)`.
///
/// The draw does not depend on `z`; the argument mirrors the adversary, which
/// feeds in the observed count.
pub fn sample_kappa_hat(lambda1: f64, lambda2: f64, z: u64, seed: u64) -> Result<u64> {
    check_rates(lambda1, lambda2)?;
    let _ = z;
    let mut rng = derived_rng(seed, 0x4B41);
    let kappa = sample_poisson(lambda2 - lambda1, &mut rng);
    Ok(kappa.min(kappa_cap(lambda1, lambda2)))
}

/// One draw of the coupling `P2 = P1 + kappa`, together with the capped
/// `kappa_hat` the adversary would add.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoupledDraw {
    pub p1: u64,
    pub p2: u64,
    pub kappa_hat: u64,
}

impl CoupledDraw {
    pub fn matched(&self) -> bool {
        self.p2 == self.p1 + self.kappa_hat
    }
}

pub fn sample_coupled(lambda1: f64, lambda2: f64, seed: u64) -> Result<CoupledDraw> {
    check_rates(lambda1, lambda2)?;
    let mut rng = derived_rng(seed, 0xC0);
    let p1 = sample_poisson(lambda1, &mut rng);
    // Same stream as `sample_kappa_hat`, so `kappa_hat` equals its output.
    let raw = sample_poisson(lambda2 - lambda1, &mut derived_rng(seed, 0x4B41));
    Ok(CoupledDraw {
        p1,
        p2: p1 + raw,
        kappa_hat: raw.min(kappa_cap(lambda1, lambda2)),
    })
}

/// Law of `min(Poisson(mu), cap)` on `0..=cap`.
pub fn capped_pmf(mu: f64, cap: u64) -> Vec<f64> {
    let cap = cap as usize;
    let mut t = pmf_table(mu, cap);
    t[cap] = upper_tail(mu, cap);
    t
}

/// Law of `Z + min(Poisson(mu2), cap)` with `Z ~ Poisson(mu1)`, on
/// `0..=len-1`; the mass at and beyond `len-1` is lumped into the last cell.
pub fn shifted_pmf(mu1: f64, mu2: f64, cap: u64, len: usize) -> Vec<f64> {
    let base = pmf_table(mu1, len);
    let add = capped_pmf(mu2, cap);
    let mut out = vec![0.0; len];
    for (i, &pb) in base.iter().enumerate() {
        for (j, &pa) in add.iter().enumerate() {
            let idx = (i + j).min(len - 1);
            out[idx] += pb * pa;
        }
    }
    let body: f64 = out[..len - 1].iter().sum();
    out[len - 1] = (1.0 - body).max(0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_matches_closed_form() {
        let t = pmf_table(4.0, 10);
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
        for (j, f) in fact.iter().enumerate() {
            let exact = (-4.0f64).exp() * 4f64.powi(j as i32) / f;
            assert!((t[j] - exact).abs() < 1e-15);
            assert!((log_pmf(4.0, j).exp() - exact).abs() < 1e-15);
        }
        assert_eq!(pmf_table(0.0, 3), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn truncation_tail_is_negligible() {
        for &l in &[0.01, 0.5, 1.0, 4.0, 20.0, 50.0, 200.0] {
            let k = truncation_for(l);
            let far = pmf_table(l, k + 400);
            let tail: f64 = far[k + 1..].iter().sum();
            assert!(tail < TAIL_TOLERANCE, "lambda {l}: tail {tail}");
        }
    }

    #[test]
    fn overlap_basics() {
        assert_eq!(overlap(3.0, 3.0).unwrap(), 1.0);
        let a = overlap(1.0, 4.0).unwrap();
        let b = overlap(4.0, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(a > 0.0 && a < 1.0);
        assert!(PoissonPair::new(0.0, 1.0).is_err());
        assert!(PoissonPair::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn kappa_cap_and_errors() {
        for s in 0..200 {
            assert_eq!(sample_kappa_hat(1.0, 1.4, 3, s).unwrap(), 0);
            assert!(sample_kappa_hat(2.0, 5.5, 0, s).unwrap() <= 7);
        }
        assert!(sample_kappa_hat(2.0, 2.0, 0, 0).is_err());
        assert!(sample_kappa_hat(-1.0, 2.0, 0, 0).is_err());
        assert!(sample_kappa_hat(0.0, 2.0, 0, 0).is_ok());
    }

    #[test]
    fn coupled_draw_is_consistent() {
        for s in 0..100 {
            let d = sample_coupled(3.0, 5.0, s).unwrap();
            assert!(d.p2 >= d.p1);
            assert!(d.kappa_hat <= 4);
            assert_eq!(d.matched(), d.p2 - d.p1 <= 4);
        }
    }

    #[test]
    fn capped_and_shifted_laws_sum_to_one() {
        let c = capped_pmf(2.0, 4);
        assert_eq!(c.len(), 5);
        assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let s = shifted_pmf(1.5, 2.0, 4, 30);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_fact_small_cases() {
        for &l in &[0.1, 0.9, 1.0, 2.5, 7.0, 49.9] {
            assert!(median_fact_holds(l));
        }
    }
}
