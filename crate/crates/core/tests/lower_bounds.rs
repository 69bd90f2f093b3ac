use robust_sbm::lower_bounds::{
    coupling_constant_witness, coupling_exponent, coupling_overlap, distinguishing_game, lb_adversary_with_report,
    median_fact_holds, overlap, sample_kappa_hat, tail_constant_witness, LbAdversaryConfig, PoissonPair,
};
use robust_sbm::sbm::{sample_poisson_sbm, SbmParams};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

fn pmf(lambda: f64, j: u64) -> f64 {
    Poisson::new(lambda).unwrap().pmf(j)
}

/// Pr(P ≥ j).
fn tail(lambda: f64, j: u64) -> f64 {
    if j == 0 {
        1.0
    } else {
        Poisson::new(lambda).unwrap().sf(j - 1)
    }
}

fn chi_square_p_value(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
    1.0 - ChiSquared::new((observed.len() - 1) as f64).unwrap().cdf(stat)
}

/// Merges adjacent cells until each expected count is at least 5.
fn pool(observed: &[f64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let (mut ao, mut ae) = (0.0, 0.0);
    for (x, y) in observed.iter().zip(expected) {
        ao += x;
        ae += y;
        if ae >= 5.0 {
            o.push(ao);
            e.push(ae);
            ao = 0.0;
            ae = 0.0;
        }
    }
    if let (Some(lo), Some(le)) = (o.last_mut(), e.last_mut()) {
        *lo += ao;
        *le += ae;
    }
    (o, e)
}

#[test]
fn overlap_matches_direct_sum() {
    for (l1, l2) in [(1.0, 4.0), (3.0, 5.0), (0.5, 0.7), (10.0, 20.0)] {
        let direct: f64 = (0..=60u64).map(|j| pmf(l1, j).min(pmf(l2, j))).sum();
        let ours = overlap(l1, l2).unwrap();
        assert!((ours - direct).abs() < 1e-12, "({l1}, {l2}): {ours} vs {direct}");
    }
    // independent summation in double precision
    assert!((overlap(1.0, 4.0).unwrap() - 0.318_404_702_624_938_5).abs() < 1e-14);
}

#[test]
fn overlap_of_equal_rates_is_one() {
    for l in [0.1, 1.0, 7.3, 50.0, 1e4] {
        assert_eq!(coupling_overlap(&PoissonPair::new(l, l).unwrap()), 1.0);
    }
}

#[test]
fn overlap_shrinks_along_rays() {
    // separating the rates, or scaling both up at a fixed ratio
    for base in [0.5, 2.0, 10.0] {
        let mut prev = 1.0;
        for step in 1..30 {
            let o = overlap(base, base + 0.25 * step as f64).unwrap();
            assert!(o < prev, "base {base}, step {step}");
            prev = o;
        }
    }
    for ratio in [1.5, 3.0] {
        let mut prev = 1.0;
        for step in 1..40 {
            let s = 0.5 * step as f64;
            let o = overlap(s, ratio * s).unwrap();
            assert!(o < prev, "ratio {ratio}, scale {s}");
            prev = o;
        }
    }
}

#[test]
fn median_fact_on_a_fine_grid() {
    for i in 1..=500 {
        let l = i as f64 / 10.0;
        assert!(tail(l, l.floor() as u64) >= 0.5, "lambda {l}");
        assert!(median_fact_holds(l), "lambda {l}");
    }
}

#[test]
fn tail_witness_holds_pointwise() {
    let lambdas: Vec<f64> = (1..=50).map(f64::from).collect();
    let ts: Vec<f64> = (0..=16).map(|i| 1.0 + 0.25 * i as f64).collect();
    let c = tail_constant_witness(&lambdas, &ts);
    assert!(c.is_finite() && c > 0.0);
    let mut tight = false;
    for &l in &lambdas {
        for &t in &ts {
            let x = l + t * l.sqrt();
            let exact = tail(l, x.ceil() as u64);
            let bound = (-c * t * t).exp();
            assert!(exact >= bound * (1.0 - 1e-9), "lambda {l}, t {t}");
            tight |= (exact / bound - 1.0).abs() < 1e-6;
        }
    }
    assert!(tight, "the witness should be attained somewhere on the grid");
}

#[test]
fn coupling_witness_holds_pointwise() {
    let mut grid = Vec::new();
    for i in 1..=20 {
        for j in i..=20 {
            grid.push((i as f64, j as f64));
        }
    }
    let witnesses = coupling_constant_witness(&grid, &[0.1, 0.25, 0.5, 1.0]).unwrap();
    assert_eq!(witnesses.len(), 4);
    for (c1, c2) in witnesses {
        for &(l1, l2) in &grid {
            let direct: f64 = (0..=200u64).map(|j| pmf(l1, j).min(pmf(l2, j))).sum();
            let x = coupling_exponent(l1, l2);
            assert!(direct >= c1 * (-c2 * x).exp() - 1e-12, "c1 {c1}, ({l1}, {l2})");
        }
    }
    assert!(coupling_constant_witness(&grid, &[1.5]).unwrap().is_empty());
}

#[test]
fn kappa_hat_is_a_capped_poisson() {
    let (l1, l2) = (3.0, 5.5);
    let cap = 5u64;
    let draws = 40_000;
    let mut counts = vec![0.0; cap as usize + 1];
    for seed in 0..draws {
        let k = sample_kappa_hat(l1, l2, seed % 7, seed).unwrap();
        assert!(k <= cap);
        counts[k as usize] += 1.0;
    }
    let mu = l2 - l1;
    let mut expected: Vec<f64> = (0..cap).map(|j| draws as f64 * pmf(mu, j)).collect();
    expected.push(draws as f64 * tail(mu, cap));
    let p = chi_square_p_value(&counts, &expected);
    assert!(p > 1e-4, "p = {p}, {counts:?} vs {expected:?}");
}

#[test]
fn adversary_output_follows_the_coupled_law() {
    let params = SbmParams::new(40, 2, 6.0, 2.0).unwrap();
    let rho = 0.25;
    let (moved, n) = (10usize, 40usize);
    let m = (moved * (n - moved)) as f64 / n as f64;
    let (l1, l2) = (params.b * m, params.a * m);
    let cap = (2.0 * (l2 - l1)).floor() as u64;
    let len = 150usize;

    // law of Poisson(l1) + min(Poisson(l2 - l1), cap), by direct convolution
    let mut law = vec![0.0; len];
    for i in 0..len as u64 {
        for j in 0..=cap {
            let pj = if j < cap { pmf(l2 - l1, j) } else { tail(l2 - l1, cap) };
            let idx = (i + j) as usize;
            if idx < len {
                law[idx] += pmf(l1, i) * pj;
            }
        }
    }
    let eta: f64 = (0..len).map(|j| law[j].min(pmf(l2, j as u64))).sum();
    assert!(eta >= 0.5, "overlap with Poisson(aM) = {eta}");

    let seeds = 10_000u64;
    let mut counts = vec![0.0; len];
    for seed in 0..seeds {
        let (g, planted) = sample_poisson_sbm(&params, seed).unwrap();
        let cfg = LbAdversaryConfig::new(rho, seed.wrapping_mul(31) + 7).unwrap();
        let (h, rep) = lb_adversary_with_report(&g, &planted, &params, &cfg).unwrap();
        assert_eq!(rep.moved, moved);
        // L' = 0..10, R'' = 50..80
        let mut total = 0u64;
        for u in 0..moved {
            for v in n + moved..2 * n {
                total += h.multiplicity(u, v) as u64;
            }
        }
        assert_eq!(total, rep.left.observed + rep.left.added);
        counts[(total as usize).min(len - 1)] += 1.0;
    }
    let expected: Vec<f64> = law.iter().map(|p| p * seeds as f64).collect();
    let (o, e) = pool(&counts, &expected);
    let p = chi_square_p_value(&o, &e);
    assert!(p > 1e-4, "p = {p}");
}

#[test]
fn game_error_respects_the_overlap_floor() {
    for (l1, l2) in [(1.0, 1.5), (2.0, 6.0), (5.0, 5.0)] {
        let r = distinguishing_game(l1, l2, 200_000, 17).unwrap();
        let eta = overlap(l1, l2).unwrap();
        assert_eq!(r.eta, eta);
        assert!(r.upper_limit >= eta.powi(4) / 2.0);
        assert!(r.floor_respected);
    }
}
