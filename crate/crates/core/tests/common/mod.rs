//! Test-side oracles written independently of the library's matching code.

#![allow(dead_code)]

use distbap::WeightedBipartiteGraph;

/// Size of a maximum matching using only edges accepted by `keep`,
/// by simple augmenting paths from every agent.
pub fn matching_size(g: &WeightedBipartiteGraph, keep: impl Fn(usize, usize) -> bool) -> usize {
    let (m, n) = (g.agent_count(), g.task_count());
    let adj: Vec<Vec<usize>> = (0..m)
        .map(|i| (0..n).filter(|&j| keep(i, j)).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn grow(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| grow(k, adj, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    (0..m)
        .filter(|&i| grow(i, &adj, &mut vec![false; n], &mut owner))
        .count()
}

/// Smallest threshold `t` such that the edges of weight at most `t` still
/// carry a maximum-cardinality matching of the whole graph.
pub fn threshold_bottleneck(g: &WeightedBipartiteGraph) -> f64 {
    let present = |i: usize, j: usize| g.has_edge(distbap::Edge::new(i, j));
    let full = matching_size(g, present);
    let mut weights: Vec<f64> = g.edges().iter().map(|e| g.weight(e)).collect();
    weights.sort_by(f64::total_cmp);
    weights.dedup();
    *weights
        .iter()
        .find(|&&t| {
            matching_size(g, |i, j| {
                present(i, j) && g.weight(distbap::Edge::new(i, j)) <= t
            }) == full
        })
        .expect("the heaviest weight keeps every edge")
}
