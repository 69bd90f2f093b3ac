use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Undirected graph on vertices `0..vertex_count`, stored as a canonical
/// sorted list of distinct pairs `(u, v)` with `u < v` and a multiplicity.
///
/// Simple graphs carry multiplicity 1 on every pair. Multigraphs (the Poisson
/// model) may carry any positive multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    pairs: Vec<(usize, usize, u32)>,
    simple: bool,
}

impl Graph {
    pub fn empty(vertex_count: usize) -> Self {
        Graph {
            vertex_count,
            pairs: Vec::new(),
            simple: true,
        }
    }

    /// Builds a simple graph. Duplicate pairs are rejected.
    pub fn simple_from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let g = Self::from_weighted(vertex_count, edges.into_iter().map(|(u, v)| (u, v, 1)), true)?;
        Ok(g)
    }

    /// Builds a graph from `(u, v, multiplicity)` triples; repeated pairs
    /// accumulate. With `simple` set, any multiplicity above one is an error.
    pub fn from_weighted<I>(vertex_count: usize, edges: I, simple: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let mut acc: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (u, v, m) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidParams(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{vertex_count}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParams(format!("self-loop at vertex {u}")));
            }
            if m == 0 {
                continue;
            }
            *acc.entry(canonical(u, v)).or_insert(0) += m;
        }
        if simple {
            if let Some(((u, v), m)) = acc.iter().find(|(_, &m)| m > 1) {
                return Err(Error::InvalidParams(format!(
                    "pair ({u}, {v}) has multiplicity {m} in a simple graph"
                )));
            }
        }
        Ok(Graph {
            vertex_count,
            pairs: acc.into_iter().map(|((u, v), m)| (u, v, m)).collect(),
            simple,
        })
    }

    /// Internal constructor for already canonical, sorted, deduplicated pairs.
    pub(crate) fn from_sorted_pairs(
        vertex_count: usize,
        pairs: Vec<(usize, usize, u32)>,
        simple: bool,
    ) -> Self {
        debug_assert!(pairs.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        debug_assert!(pairs.iter().all(|&(u, v, m)| u < v && v < vertex_count && m > 0));
        debug_assert!(!simple || pairs.iter().all(|p| p.2 == 1));
        Graph {
            vertex_count,
            pairs,
            simple,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    /// Total edge count, counting multiplicity.
    pub fn edge_count(&self) -> usize {
        self.pairs.iter().map(|p| p.2 as usize).sum()
    }

    /// Number of distinct vertex pairs carrying at least one edge.
    pub fn distinct_pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Iterator over `(u, v, multiplicity)` with `u < v`, lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.pairs.iter().copied()
    }

    /// Iterator over edges with multiplicity expanded.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs
            .iter()
            .flat_map(|&(u, v, m)| std::iter::repeat_n((u, v), m as usize))
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        if u == v {
            return 0;
        }
        let key = canonical(u, v);
        self.pairs
            .binary_search_by(|p| (p.0, p.1).cmp(&key))
            .map(|i| self.pairs[i].2)
            .unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.multiplicity(u, v) > 0
    }

    /// Adjacency lists with multiplicities, neighbours in ascending order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, u32)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v, m) in &self.pairs {
            adj[u].push((v, m));
            adj[v].push((u, m));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Degrees counting multiplicity.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count];
        for &(u, v, m) in &self.pairs {
            deg[u] += m as usize;
            deg[v] += m as usize;
        }
        deg
    }

    /// Caps every multiplicity at one and marks the graph simple.
    pub fn flatten_to_simple(&self) -> Graph {
        Graph {
            vertex_count: self.vertex_count,
            pairs: self.pairs.iter().map(|&(u, v, _)| (u, v, 1)).collect(),
            simple: true,
        }
    }

    /// Relabels vertices: vertex `u` becomes `perm[u]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.vertex_count {
            return Err(Error::Shape(format!(
                "permutation has length {}, graph has {} vertices",
                perm.len(),
                self.vertex_count
            )));
        }
        Graph::from_weighted(
            self.vertex_count,
            self.pairs.iter().map(|&(u, v, m)| (perm[u], perm[v], m)),
            self.simple,
        )
    }

    /// Pairs present in exactly one of the two graphs, with the multiplicity
    /// difference. Both graphs must share the vertex set.
    pub fn symmetric_difference(&self, other: &Graph) -> Vec<(usize, usize, u32)> {
        let (a, b) = (&self.pairs, &other.pairs);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() || j < b.len() {
            let ka = a.get(i).map(|p| (p.0, p.1));
            let kb = b.get(j).map(|p| (p.0, p.1));
            match (ka, kb) {
                (Some(x), Some(y)) if x == y => {
                    let d = a[i].2.abs_diff(b[j].2);
                    if d > 0 {
                        out.push((x.0, x.1, d));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    out.push((x.0, x.1, a[i].2));
                    i += 1;
                }
                (Some(_), None) => {
                    out.push((a[i].0, a[i].1, a[i].2));
                    i += 1;
                }
                _ => {
                    out.push((b[j].0, b[j].1, b[j].2));
                    j += 1;
                }
            }
        }
        out
    }
}

#[inline]
pub(crate) fn canonical(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_out_of_range() {
        assert!(Graph::simple_from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::simple_from_edges(3, [(0, 3)]).is_err());
        assert!(Graph::simple_from_edges(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn flatten_caps_multiplicity() {
        let g = Graph::from_weighted(4, [(0, 1, 3), (2, 3, 1), (1, 0, 1)], false).unwrap();
        assert_eq!(g.multiplicity(0, 1), 4);
        assert_eq!(g.edge_count(), 5);
        let s = g.flatten_to_simple();
        assert!(s.is_simple());
        assert_eq!(s.multiplicity(1, 0), 1);
        assert_eq!(s.edge_count(), g.distinct_pair_count());
        assert_eq!(s.flatten_to_simple(), s);
    }

    #[test]
    fn symmetric_difference_counts_multiplicity_changes() {
        let a = Graph::from_weighted(4, [(0, 1, 2), (1, 2, 1)], false).unwrap();
        let b = Graph::from_weighted(4, [(0, 1, 1), (2, 3, 1)], false).unwrap();
        assert_eq!(a.symmetric_difference(&b), vec![(0, 1, 1), (1, 2, 1), (2, 3, 1)]);
        assert!(a.symmetric_difference(&a).is_empty());
    }
}
