//! Greedy baseline: repeatedly commit the globally cheapest edge between an
//! unassigned agent and an unassigned task, agreed on by min-consensus.

use crate::error::{BapError, Result};
use crate::graph::{weight_cmp, Edge, Matching, WeightedBipartiteGraph};
use crate::sim::{min_order, CommGraph, Network, Payload};

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub matching: Matching,
    /// Heaviest edge weight in the greedy matching.
    pub largest_weight: f64,
    pub time_steps: usize,
    /// Heaviest committed weight after each round.
    pub weight_after_round: Vec<f64>,
}

pub fn greedy_assign(g: &WeightedBipartiteGraph, comm: &CommGraph) -> Result<GreedyOutcome> {
    if comm.agent_count() != g.agent_count() {
        return Err(BapError::invalid(format!(
            "topology has {} agents, instance has {}",
            comm.agent_count(),
            g.agent_count()
        )));
    }
    let (m, n) = (g.agent_count(), g.task_count());
    // Each agent's view: its own row plus the tasks it has seen committed.
    let rows: Vec<Vec<Option<f64>>> = (0..m).map(|i| g.agent_row(i)).collect();
    let mut taken = vec![false; n];
    let mut matched: Vec<Option<usize>> = vec![None; m];
    let mut net = Network::new(comm);
    let mut largest = f64::NEG_INFINITY;
    let mut weight_after_round = Vec::new();
    loop {
        let candidates = (0..m)
            .map(|i| {
                if matched[i].is_some() {
                    return None;
                }
                rows[i]
                    .iter()
                    .enumerate()
                    .filter_map(|(t, w)| w.filter(|_| !taken[t]).map(|w| (t, w)))
                    .min_by(|a, b| weight_cmp(a.1, b.1).then(a.0.cmp(&b.0)))
                    .map(|(t, w)| Payload::MinCandidate {
                        edge: Edge::new(i, t),
                        weight: w,
                    })
            })
            .collect::<Vec<_>>();
        if candidates.iter().all(Option::is_none) {
            break;
        }
        let (best, _) = net.consensus(candidates, min_order);
        match best {
            Some(Payload::MinCandidate { edge, weight }) => {
                matched[edge.agent] = Some(edge.task);
                taken[edge.task] = true;
                largest = largest.max(weight);
                weight_after_round.push(largest);
            }
            _ => break,
        }
    }
    let matching = Matching::from_assignment(matched)?;
    if matching.is_empty() {
        return Err(BapError::EmptyMatching);
    }
    Ok(GreedyOutcome {
        matching,
        largest_weight: largest,
        time_steps: net.metrics.time_steps,
        weight_after_round,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::graph::check_mcm;

    #[test]
    fn ranked_square_greedy() {
        let g = ranked_square();
        let out = greedy_assign(&g, &CommGraph::complete(4).unwrap()).unwrap();
        let expected = Matching::from_edges(4, [e(2, 4), e(4, 2), e(1, 3), e(3, 1)]).unwrap();
        assert_eq!(out.matching, expected);
        assert_eq!(out.largest_weight, 12.0);
        assert_eq!(out.time_steps, 4);
        assert_eq!(out.weight_after_round, vec![1.0, 2.0, 7.0, 12.0]);
        let ring = greedy_assign(&g, &CommGraph::ring(4).unwrap()).unwrap();
        assert_eq!(ring.time_steps, 8);
        assert_eq!(ring.matching, out.matching);
    }

    #[test]
    fn single_edge_and_equal_weights() {
        let one = WeightedBipartiteGraph::complete(vec![vec![3.0]]).unwrap();
        let out = greedy_assign(&one, &CommGraph::complete(1).unwrap()).unwrap();
        assert_eq!(out.largest_weight, 3.0);
        let flat = WeightedBipartiteGraph::complete(vec![vec![2.0; 3]; 3]).unwrap();
        let out = greedy_assign(&flat, &CommGraph::complete(3).unwrap()).unwrap();
        assert_eq!(out.largest_weight, 2.0);
        check_mcm(&flat, &out.matching).unwrap();
    }
}
