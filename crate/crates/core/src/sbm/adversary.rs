use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::graph::canonical;
use super::{Graph, Partition, SbmParams};
use crate::error::{Error, Result};
use crate::rng::{derived_rng, Rng};

/// Corruption budget. `epsilon1` and `epsilon2` are fractions of the expected
/// edge count m; the monotone counts are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct AdversaryBudget {
    pub epsilon: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    #[serde(default)]
    pub monotone_add: usize,
    #[serde(default)]
    pub monotone_remove: usize,
}

impl AdversaryBudget {
    pub fn outlier(epsilon: f64, epsilon1: f64, epsilon2: f64) -> Result<Self> {
        let b = AdversaryBudget {
            epsilon,
            epsilon1,
            epsilon2,
            ..Default::default()
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.epsilon, self.epsilon1, self.epsilon2];
        if all.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Precondition("budget fractions must be nonnegative".into()));
        }
        if self.epsilon1 + self.epsilon2 > self.epsilon * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "epsilon1 + epsilon2 = {} exceeds epsilon = {}",
                self.epsilon1 + self.epsilon2,
                self.epsilon
            )));
        }
        Ok(())
    }

    /// (floor(epsilon1 m), floor(epsilon2 m)).
    pub fn edit_counts(&self, m: f64) -> (usize, usize) {
        let fl = |x: f64| (x + 1e-9).floor().max(0.0) as usize;
        (fl(self.epsilon1 * m), fl(self.epsilon2 * m))
    }
}

/// How an outlier adversary picks its targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Uniform over eligible pairs.
    Uniform,
    /// Edits incident to the currently lowest-degree vertices.
    DegreeTargeted,
    /// Whole budget spent on a seeded vertex subset of size budget/(a-b).
    Concentrated,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::Uniform,
        Strategy::DegreeTargeted,
        Strategy::Concentrated,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::DegreeTargeted => "degree-targeted",
            Strategy::Concentrated => "concentrated",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.id() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

/// Output of an outlier adversary with its edit log.
#[derive(Debug, Clone, PartialEq)]
pub struct Corruption {
    pub graph: Graph,
    pub added: Vec<(usize, usize)>,
    pub removed: Vec<(usize, usize)>,
}

impl Corruption {
    pub fn edit_count(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

fn check_inputs(g: &Graph, planted: &Partition) -> Result<()> {
    if !g.is_simple() {
        return Err(Error::Precondition("adversaries act on simple graphs".into()));
    }
    if planted.vertex_count() != g.vertex_count() {
        return Err(Error::Shape(format!(
            "partition covers {} vertices, graph has {}",
            planted.vertex_count(),
            g.vertex_count()
        )));
    }
    Ok(())
}

/// Pairs not present in `g` whose endpoints are in the same cluster (`within`)
/// or in different clusters (`!within`), lexicographic order.
fn absent_pairs(g: &Graph, planted: &Partition, within: bool) -> Vec<(usize, usize)> {
    let n = g.vertex_count();
    let present: HashSet<(usize, usize)> = g.pairs().map(|(u, v, _)| (u, v)).collect();
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if planted.same_cluster(u, v) == within && !present.contains(&(u, v)) {
                out.push((u, v));
            }
        }
    }
    out
}

fn present_pairs(g: &Graph, planted: &Partition, within: bool) -> Vec<(usize, usize)> {
    g.pairs()
        .filter(|&(u, v, _)| planted.same_cluster(u, v) == within)
        .map(|(u, v, _)| (u, v))
        .collect()
}

/// First `count` entries of a Fisher-Yates shuffle. For a fixed RNG stream the
/// selection for a smaller count is a prefix of the selection for a larger one.
fn shuffled_prefix<T: Copy>(mut items: Vec<T>, count: usize, rng: &mut Rng) -> Vec<T> {
    debug_assert!(count <= items.len());
    for i in 0..count {
        let j = rng.random_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(count);
    items
}

fn apply_edits(g: &Graph, added: &[(usize, usize)], removed: &[(usize, usize)]) -> Graph {
    let removed: HashSet<(usize, usize)> = removed.iter().map(|&(u, v)| canonical(u, v)).collect();
    let mut pairs: Vec<(usize, usize, u32)> = g
        .pairs()
        .filter(|&(u, v, _)| !removed.contains(&(u, v)))
        .collect();
    pairs.extend(added.iter().map(|&(u, v)| {
        let (a, b) = canonical(u, v);
        (a, b, 1)
    }));
    pairs.sort_unstable();
    Graph::from_sorted_pairs(g.vertex_count(), pairs, true)
}

/// Monotone (strengthening) corruption: adds `add_within` absent within-cluster
/// pairs and deletes `remove_between` present between-cluster edges, both
/// chosen uniformly at random.
pub fn apply_monotone_adversary(
    g: &Graph,
    planted: &Partition,
    add_within: usize,
    remove_between: usize,
    seed: u64,
) -> Result<Graph> {
    check_inputs(g, planted)?;
    let candidates_add = absent_pairs(g, planted, true);
    if add_within > candidates_add.len() {
        return Err(Error::BudgetInfeasible {
            what: "within-cluster additions",
            requested: add_within,
            max: candidates_add.len(),
        });
    }
    let candidates_remove = present_pairs(g, planted, false);
    if remove_between > candidates_remove.len() {
        return Err(Error::BudgetInfeasible {
            what: "between-cluster removals",
            requested: remove_between,
            max: candidates_remove.len(),
        });
    }
    let added = shuffled_prefix(candidates_add, add_within, &mut derived_rng(seed, 0));
    let removed = shuffled_prefix(candidates_remove, remove_between, &mut derived_rng(seed, 1));
    Ok(apply_edits(g, &added, &removed))
}

/// Outlier corruption: adds at most floor(epsilon1 m) between-cluster edges and
/// removes at most floor(epsilon2 m) within-cluster edges. Every strategy
/// spends the full floored budget.
pub fn apply_outlier_adversary(
    g: &Graph,
    planted: &Partition,
    budget: &AdversaryBudget,
    params: &SbmParams,
    strategy: Strategy,
    seed: u64,
) -> Result<Corruption> {
    check_inputs(g, planted)?;
    budget.validate()?;
    let (n_add, n_remove) = budget.edit_counts(params.expected_edges());
    if n_add == 0 && n_remove == 0 {
        return Ok(Corruption {
            graph: g.clone(),
            added: Vec::new(),
            removed: Vec::new(),
        });
    }
    let (added, removed) = match strategy {
        Strategy::Uniform => uniform_edits(g, planted, n_add, n_remove, seed)?,
        Strategy::DegreeTargeted => degree_targeted_edits(g, planted, n_add, n_remove)?,
        Strategy::Concentrated => concentrated_edits(g, planted, params, n_add, n_remove, seed)?,
    };
    Ok(Corruption {
        graph: apply_edits(g, &added, &removed),
        added,
        removed,
    })
}

type Edits = (Vec<(usize, usize)>, Vec<(usize, usize)>);

fn check_count(what: &'static str, requested: usize, max: usize) -> Result<()> {
    if requested > max {
        Err(Error::BudgetInfeasible {
            what,
            requested,
            max,
        })
    } else {
        Ok(())
    }
}

fn uniform_edits(
    g: &Graph,
    planted: &Partition,
    n_add: usize,
    n_remove: usize,
    seed: u64,
) -> Result<Edits> {
    let add_pool = absent_pairs(g, planted, false);
    check_count("between-cluster additions", n_add, add_pool.len())?;
    let remove_pool = present_pairs(g, planted, true);
    check_count("within-cluster removals", n_remove, remove_pool.len())?;
    Ok((
        shuffled_prefix(add_pool, n_add, &mut derived_rng(seed, 0)),
        shuffled_prefix(remove_pool, n_remove, &mut derived_rng(seed, 1)),
    ))
}

fn degree_targeted_edits(
    g: &Graph,
    planted: &Partition,
    n_add: usize,
    n_remove: usize,
) -> Result<Edits> {
    let n = g.vertex_count();
    let mut present: HashSet<(usize, usize)> = g.pairs().map(|(u, v, _)| (u, v)).collect();
    let mut deg = g.degrees();

    let mut added = Vec::with_capacity(n_add);
    for _ in 0..n_add {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by_key(|&u| (deg[u], u));
        let pick = order.iter().find_map(|&u| {
            (0..n)
                .filter(|&v| !planted.same_cluster(u, v) && !present.contains(&canonical(u, v)))
                .min_by_key(|&v| (deg[v], v))
                .map(|v| (u, v))
        });
        let Some((u, v)) = pick else {
            return Err(Error::BudgetInfeasible {
                what: "between-cluster additions",
                requested: n_add,
                max: added.len(),
            });
        };
        present.insert(canonical(u, v));
        deg[u] += 1;
        deg[v] += 1;
        added.push(canonical(u, v));
    }

    let adj = g.adjacency();
    let mut within_alive: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            adj[u]
                .iter()
                .map(|&(v, _)| v)
                .filter(|&v| planted.same_cluster(u, v))
                .collect()
        })
        .collect();
    let mut removed = Vec::with_capacity(n_remove);
    for _ in 0..n_remove {
        let pick = (0..n)
            .filter(|&u| !within_alive[u].is_empty())
            .min_by_key(|&u| (deg[u], u))
            .map(|u| {
                let v = *within_alive[u].iter().min_by_key(|&&v| (deg[v], v)).unwrap();
                (u, v)
            });
        let Some((u, v)) = pick else {
            return Err(Error::BudgetInfeasible {
                what: "within-cluster removals",
                requested: n_remove,
                max: removed.len(),
            });
        };
        within_alive[u].retain(|&w| w != v);
        within_alive[v].retain(|&w| w != u);
        deg[u] -= 1;
        deg[v] -= 1;
        removed.push(canonical(u, v));
    }
    Ok((added, removed))
}

fn concentrated_edits(
    g: &Graph,
    planted: &Partition,
    params: &SbmParams,
    n_add: usize,
    n_remove: usize,
    seed: u64,
) -> Result<Edits> {
    let n = g.vertex_count();
    let gap = params.a - params.b;
    let total = (n_add + n_remove) as f64;
    let size = if gap > 0.0 {
        ((total / gap).floor() as usize).clamp(1, n)
    } else {
        n
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut derived_rng(seed, 2));
    let mut target = vec![false; n];
    for &u in &order[..size] {
        target[u] = true;
    }

    let add_pool: Vec<_> = absent_pairs(g, planted, false)
        .into_iter()
        .filter(|&(u, v)| target[u] || target[v])
        .collect();
    check_count("between-cluster additions at the target set", n_add, add_pool.len())?;
    let remove_pool: Vec<_> = present_pairs(g, planted, true)
        .into_iter()
        .filter(|&(u, v)| target[u] || target[v])
        .collect();
    check_count("within-cluster removals at the target set", n_remove, remove_pool.len())?;
    Ok((
        shuffled_prefix(add_pool, n_add, &mut derived_rng(seed, 0)),
        shuffled_prefix(remove_pool, n_remove, &mut derived_rng(seed, 1)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{classify_edges, sample_sbm};

    fn instance() -> (Graph, Partition, SbmParams) {
        let params = SbmParams::new(50, 2, 10.0, 2.0).unwrap();
        let (g, p) = sample_sbm(&params, 5).unwrap();
        (g, p, params)
    }

    #[test]
    fn monotone_empty_action_is_identity() {
        let (g, p, _) = instance();
        assert_eq!(apply_monotone_adversary(&g, &p, 0, 0, 1).unwrap(), g);
    }

    #[test]
    fn monotone_edits_are_legal() {
        let (g, p, _) = instance();
        let h = apply_monotone_adversary(&g, &p, 100, 50, 3).unwrap();
        assert_eq!(h.edge_count(), g.edge_count() + 100 - 50);
        let (w0, b0) = classify_edges(&g, &p);
        let (w1, b1) = classify_edges(&h, &p);
        assert_eq!(w1, w0 + 100);
        assert_eq!(b1, b0 - 50);
        for (u, v, _) in g.symmetric_difference(&h) {
            if h.has_edge(u, v) {
                assert!(p.same_cluster(u, v));
            } else {
                assert!(!p.same_cluster(u, v));
            }
        }
    }

    #[test]
    fn monotone_reports_max_feasible() {
        // complete within-cluster subgraphs
        let p = Partition::planted(3, 2);
        let g = Graph::simple_from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap();
        match apply_monotone_adversary(&g, &p, 1, 0, 0) {
            Err(Error::BudgetInfeasible { max, .. }) => assert_eq!(max, 0),
            other => panic!("expected infeasible budget, got {other:?}"),
        }
    }

    #[test]
    fn outlier_zero_budget_is_identity() {
        let (g, p, params) = instance();
        let b = AdversaryBudget::outlier(0.0, 0.0, 0.0).unwrap();
        for s in Strategy::ALL {
            let c = apply_outlier_adversary(&g, &p, &b, &params, s, 1).unwrap();
            assert_eq!(c.graph, g);
            assert_eq!(c.edit_count(), 0);
        }
    }

    #[test]
    fn outlier_uniform_adds_exact_count() {
        // m = 600 for these parameters, so epsilon1 = 5/600 buys 5 additions
        let (g, p, params) = instance();
        let e1 = 5.0 / params.expected_edges();
        let b = AdversaryBudget::outlier(e1, e1, 0.0).unwrap();
        let c = apply_outlier_adversary(&g, &p, &b, &params, Strategy::Uniform, 2).unwrap();
        let diff = g.symmetric_difference(&c.graph);
        assert_eq!(diff.len(), 5);
        assert!(diff.iter().all(|&(u, v, _)| !p.same_cluster(u, v) && c.graph.has_edge(u, v)));
    }

    #[test]
    fn outlier_rejects_overspent_budget() {
        assert!(matches!(
            AdversaryBudget::outlier(0.1, 0.08, 0.05),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn every_strategy_respects_budget() {
        let (g, p, params) = instance();
        let b = AdversaryBudget::outlier(0.1, 0.06, 0.04).unwrap();
        let (n_add, n_rem) = b.edit_counts(params.expected_edges());
        for s in Strategy::ALL {
            let c = apply_outlier_adversary(&g, &p, &b, &params, s, 11).unwrap();
            let mut adds = 0;
            let mut rems = 0;
            for (u, v, _) in g.symmetric_difference(&c.graph) {
                if c.graph.has_edge(u, v) {
                    assert!(!p.same_cluster(u, v), "{s}: added a within edge");
                    adds += 1;
                } else {
                    assert!(p.same_cluster(u, v), "{s}: removed a between edge");
                    rems += 1;
                }
            }
            assert_eq!((adds, rems), (n_add, n_rem), "{s}");
        }
    }

    #[test]
    fn uniform_selection_is_nested_in_budget() {
        let (g, p, params) = instance();
        let small = AdversaryBudget::outlier(0.02, 0.01, 0.01).unwrap();
        let large = AdversaryBudget::outlier(0.1, 0.05, 0.05).unwrap();
        let a = apply_outlier_adversary(&g, &p, &small, &params, Strategy::Uniform, 4).unwrap();
        let b = apply_outlier_adversary(&g, &p, &large, &params, Strategy::Uniform, 4).unwrap();
        assert_eq!(a.added[..], b.added[..a.added.len()]);
        assert_eq!(a.removed[..], b.removed[..a.removed.len()]);
    }

    #[test]
    fn strategy_ids_parse() {
        for s in Strategy::ALL {
            assert_eq!(s.id().parse::<Strategy>().unwrap(), s);
        }
        assert!(matches!("worst-case".parse::<Strategy>(), Err(Error::UnknownStrategy(_))));
    }
}
