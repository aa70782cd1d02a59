//! Small hand-built instances used by the documentation, the tests and the
//! CLI demos. Index helpers take 1-based labels so that fixtures read like
//! the usual `a1..am`, `b1..bn` notation.

use crate::graph::{Edge, Matching, Positions, Vertex, WeightedBipartiteGraph};

/// Agent `a{k}` (1-based).
pub fn a(k: usize) -> Vertex {
    Vertex::Agent(k - 1)
}

/// Task `b{k}` (1-based).
pub fn t(k: usize) -> Vertex {
    Vertex::Task(k - 1)
}

/// Edge `{a{p}, b{q}}` (1-based).
pub fn e(p: usize, q: usize) -> Edge {
    Edge::new(p - 1, q - 1)
}

/// 4x4 complete graph whose weights are the ranks 1..16 of its edges.
pub fn ranked_square() -> WeightedBipartiteGraph {
    // RANKED_SQUARE[p][q] is the weight of {a(p+1), b(q+1)}.
    const RANKED_SQUARE: [[f64; 4]; 4] = [
        [13.0, 5.0, 7.0, 11.0],
        [6.0, 8.0, 10.0, 1.0],
        [12.0, 15.0, 9.0, 4.0],
        [14.0, 2.0, 3.0, 16.0],
    ];
    WeightedBipartiteGraph::complete(RANKED_SQUARE.iter().map(|r| r.to_vec()).collect())
        .expect("valid fixture")
}

/// Five agents, four tasks, unit weights; `{a1,b1}` is the edge that gets removed.
pub fn five_agent_graph() -> WeightedBipartiteGraph {
    let edges: Vec<(usize, usize, f64)> = [
        (1, 1),
        (2, 2),
        (3, 3),
        (4, 4),
        (2, 1),
        (3, 1),
        (4, 2),
        (1, 3),
        (5, 2),
        (5, 4),
    ]
    .iter()
    .map(|&(p, q)| (p - 1, q - 1, 1.0))
    .collect();
    WeightedBipartiteGraph::from_edges(5, 4, &edges).expect("valid fixture")
}

/// `{a1b1, a2b2, a3b3, a4b4}`.
pub fn five_agent_matching() -> Matching {
    Matching::from_edges(5, [e(1, 1), e(2, 2), e(3, 3), e(4, 4)]).expect("valid fixture")
}

/// The five-agent matching with `{a1,b1}` removed.
pub fn five_agent_reduced_matching() -> Matching {
    five_agent_matching().without(e(1, 1))
}

/// 7x7 graph with 13 edges forming a bottleneck cluster around `{a1,b1}`.
pub fn cluster_graph() -> WeightedBipartiteGraph {
    let edges: Vec<(usize, usize, f64)> = [
        (2, 1, 2.0),
        (2, 2, 3.0),
        (3, 1, 5.0),
        (3, 3, 7.0),
        (4, 1, 11.0),
        (4, 4, 20.0),
        (1, 5, 13.0),
        (5, 5, 20.0),
        (1, 6, 17.0),
        (6, 6, 19.0),
        (1, 7, 5.0),
        (7, 7, 5.0),
        (1, 1, 20.0),
    ]
    .iter()
    .map(|&(p, q, w)| (p - 1, q - 1, w))
    .collect();
    WeightedBipartiteGraph::from_edges(7, 7, &edges).expect("valid fixture")
}

/// Identity matching of the cluster graph.
pub fn cluster_matching() -> Matching {
    Matching::index_pairing(7, 7)
}

/// Three-plus-two agent merge scenario drawn to scale; weights are distances.
///
/// Agents `a1..a3` then `alpha1, alpha2`; tasks `b1..b3` then `beta1, beta2`.
/// The first sub-problem is solved by the identity pairing with bottleneck
/// `{a1,b1}`, the second by `{alpha1,beta1}, {alpha2,beta2}`.
pub fn merge_scenario_positions() -> Positions {
    Positions {
        agents: vec![
            [-0.5, 0.0],
            [-1.0, -2.0],
            [3.0, 0.5],
            [1.0, -3.5],
            [3.0, -2.0],
        ],
        tasks: vec![
            [2.0, 0.0],
            [-1.0, -1.0],
            [3.0, -0.5],
            [0.0, -3.0],
            [2.2, -3.0],
        ],
    }
}

pub fn merge_scenario_graph() -> WeightedBipartiteGraph {
    WeightedBipartiteGraph::from_positions(merge_scenario_positions()).expect("valid fixture")
}

/// Chain search instance on `n` tasks: `b_k` reaches `a_{k+1}`, matched to
/// `b_{k+1}`. The free agent `a1` hangs off the last task when `reachable`.
/// Returns the graph, the reduced matching and the removed edge `{a1,b1}`.
pub fn chain_search(n: usize, reachable: bool) -> (WeightedBipartiteGraph, Matching, Edge) {
    let mut edges = vec![(0, 0, 1.0)];
    for k in 1..n {
        edges.push((k, k, 1.0));
        edges.push((k, k - 1, 1.0));
    }
    if reachable && n > 1 {
        edges.push((0, n - 1, 1.0));
    }
    let g = WeightedBipartiteGraph::from_edges(n, n, &edges).expect("valid fixture");
    let reduced = Matching::index_pairing(n, n).without(Edge::new(0, 0));
    (g, reduced, Edge::new(0, 0))
}
