mod common;

use common::{brute_force_strong, feasible_embedding, perturbed, random_balanced, random_weak, rel_close};
use proptest::prelude::*;
use robust_sbm::metrics::{closeness_strong, closeness_weak};
use robust_sbm::recovery::{greedy_recover, weak_to_strong};
use robust_sbm::rng::rng_from_seed;
use robust_sbm::sbm::io::{format_edge_list, read_edge_list};
use robust_sbm::sbm::{sample_sbm, Graph, SbmParams};
use robust_sbm::sdp::{check_feasibility, compute_diagnostics, sdp_objective};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn center_identities(seed in any::<u64>(), n in 2usize..24, k in prop::sample::select(vec![2usize, 3, 5]), blocks in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let (e, planted) = feasible_embedding(&mut rng, n, k, blocks);
        let params = SbmParams::new(n, k, 1.0, 1.0).unwrap();
        prop_assert!(check_feasibility(&e, &params, 1e-9).passed);
        let d = compute_diagnostics(&e, &planted).unwrap();
        prop_assert!(rel_close(d.mean_alpha_i(), d.alpha, 1e-9));
        let mut mean_r2 = 0.0;
        for i in 0..k {
            prop_assert!(rel_close(d.mean_radius_sq(&planted, i), d.alpha_i[i], 1e-9));
            prop_assert!(rel_close(d.center_norm_sq(i), 1.0 - d.alpha_i[i], 1e-9));
            mean_r2 += d.mean_radius_sq(&planted, i) / k as f64;
        }
        prop_assert!(rel_close(mean_r2, d.alpha, 1e-9));
        prop_assert!(rel_close(d.mean_center_inner(), 1.0 - d.beta, 1e-9));
        prop_assert!(rel_close(d.mean_center_inner(), d.alpha / (k - 1) as f64, 1e-9));
        prop_assert!(d.spread_identity_residual().abs() < 1e-9 * k as f64);
    }

    #[test]
    fn strong_closeness_is_the_best_permutation(seed in any::<u64>(), n in 1usize..12, k in 1usize..6, swaps in 0usize..20) {
        let mut rng = rng_from_seed(seed);
        let planted = robust_sbm::sbm::Partition::planted(n, k);
        let p = if swaps % 2 == 0 { perturbed(&mut rng, n, k, swaps) } else { random_balanced(&mut rng, n, k) };
        let c = closeness_strong(&p, &planted).unwrap();
        prop_assert!((c.delta - brute_force_strong(&p, &planted)).abs() < 1e-12);
        let sym = closeness_strong(&planted, &p).unwrap();
        prop_assert!((sym.delta - c.delta).abs() < 1e-12);
    }

    #[test]
    fn weak_to_strong_at_most_doubles(seed in any::<u64>(), n in 1usize..15, k in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let planted = robust_sbm::sbm::Partition::planted(n, k);
        let w = random_weak(&mut rng, n, k);
        let weak = closeness_weak(&w, &planted).unwrap().delta;
        let strong = weak_to_strong(&w, n, k).unwrap();
        prop_assert!(strong.is_balanced());
        let s = closeness_strong(&strong, &planted).unwrap().delta;
        prop_assert!(s <= 2.0 * weak + 1e-12, "strong {} weak {}", s, weak);
    }

    #[test]
    fn weak_closeness_never_exceeds_strong_for_partitions(seed in any::<u64>(), n in 1usize..12, k in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let planted = robust_sbm::sbm::Partition::planted(n, k);
        let p = random_balanced(&mut rng, n, k);
        let w = robust_sbm::recovery::WeakPartition::from_partition(&p);
        let weak = closeness_weak(&w, &planted).unwrap().delta;
        let strong = closeness_strong(&p, &planted).unwrap().delta;
        prop_assert!((weak - strong).abs() < 1e-12);
    }

    #[test]
    fn objective_moves_by_the_edited_pair(seed in any::<u64>(), u in 0usize..20, v in 0usize..20) {
        prop_assume!(u != v);
        let params = SbmParams::new(10, 2, 4.0, 2.0).unwrap();
        let (g, _) = sample_sbm(&params, seed).unwrap();
        let mut rng = rng_from_seed(seed ^ 1);
        let (e, _) = feasible_embedding(&mut rng, 10, 2, 3);
        let base = sdp_objective(&e, &g);
        let mut edges: Vec<(usize, usize)> = g.edges().collect();
        let present = g.has_edge(u, v);
        if present {
            edges.retain(|&(x, y)| (x, y) != (u.min(v), u.max(v)));
        } else {
            edges.push((u, v));
        }
        let h = Graph::simple_from_edges(20, edges).unwrap();
        let delta = sdp_objective(&e, &h) - base;
        let pair = 0.5 * e.dist_sq(u, v);
        let expected = if present { -pair } else { pair };
        prop_assert!((delta - expected).abs() < 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&pair));
    }

    #[test]
    fn greedy_output_is_a_weak_partition(seed in any::<u64>(), n in 2usize..15, k in prop::sample::select(vec![2usize, 3, 5]), rho in 0.1f64..0.5) {
        let mut rng = rng_from_seed(seed);
        let (e, planted) = feasible_embedding(&mut rng, n, k, 2);
        let w = greedy_recover(&e, n, rho).unwrap();
        prop_assert!(w.max_size() <= n);
        let covered: usize = w.clusters().iter().map(Vec::len).sum();
        prop_assert_eq!(covered, n * k);
        prop_assert!(closeness_weak(&w, &planted).is_ok());
    }

    #[test]
    fn edge_list_round_trip(seed in any::<u64>(), n in 1usize..30, k in 1usize..4) {
        let params = SbmParams::new(n, k, (n as f64).min(5.0), 0.5f64.min(n as f64)).unwrap();
        let (g, _) = sample_sbm(&params, seed).unwrap();
        let text = format_edge_list(&g);
        let back = read_edge_list(text.as_bytes()).unwrap();
        prop_assert_eq!(back, g);
    }
}
