//! The pruning loop: repeatedly remove the heaviest matched edge and look for
//! an augmenting path among strictly cheaper edges, stopping when none exists.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{BapError, Result};
use crate::graph::{
    check_mcm, max_edge_in_matching, prune_below, Edge, Matching, WeightedBipartiteGraph,
};
use crate::search::{aug_bfs, aug_dfs, SearchInput, SearchOutcome};

/// Which augmenting-path search the pruning loop runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Depth-first, cheapest edge first.
    DfsGreedy,
    /// Depth-first, lowest agent index first.
    DfsIndex,
    Bfs,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::DfsGreedy, Strategy::DfsIndex, Strategy::Bfs];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::DfsGreedy => "dfs_greedy",
            Strategy::DfsIndex => "dfs_index",
            Strategy::Bfs => "bfs",
        }
    }

    pub fn is_dfs(self) -> bool {
        !matches!(self, Strategy::Bfs)
    }

    pub fn search(self, input: &SearchInput<'_>) -> Result<SearchOutcome> {
        match self {
            Strategy::DfsGreedy => aug_dfs(input, true),
            Strategy::DfsIndex => aug_dfs(input, false),
            Strategy::Bfs => aug_bfs(input),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = BapError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "dfs" | "dfs_greedy" => Ok(Strategy::DfsGreedy),
            "dfs_index" => Ok(Strategy::DfsIndex),
            "bfs" => Ok(Strategy::Bfs),
            other => Err(BapError::invalid(format!(
                "unknown strategy '{other}', expected dfs, dfs-index or bfs"
            ))),
        }
    }
}

/// One pass of the pruning loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub removed_edge: Edge,
    pub bottleneck_weight: f64,
    /// Size of the surviving edge set the search ran on.
    pub surviving_edge_count: usize,
    pub search_found: bool,
    pub search_iterations: usize,
    pub explored_per_iteration: Vec<usize>,
    /// Largest matched weight after this pass.
    pub matching_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneTrace {
    pub records: Vec<IterationRecord>,
    pub final_matching: Matching,
    pub final_bottleneck: (Edge, f64),
}

impl PruneTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn removed_edges(&self) -> Vec<Edge> {
        self.records.iter().map(|r| r.removed_edge).collect()
    }

    pub fn bottleneck_weight(&self) -> f64 {
        self.final_bottleneck.1
    }

    pub fn search_iterations(&self) -> usize {
        self.records.iter().map(|r| r.search_iterations).sum()
    }

    /// Clock ticks of a distributed run over a network of diameter `d`: one
    /// max-consensus and one consensus per search pass, `d` ticks each.
    pub fn time_steps(&self, diameter: usize) -> usize {
        self.records
            .iter()
            .map(|r| diameter * (1 + r.search_iterations))
            .sum()
    }

    /// Explored-agent counts of every search pass that explored something.
    pub fn exploring_rounds(&self) -> impl Iterator<Item = usize> + '_ {
        self.records
            .iter()
            .flat_map(|r| r.explored_per_iteration.iter().copied())
            .filter(|&c| c > 0)
    }

    /// Writes the trace as CSV with columns
    /// `iteration,removed_agent,removed_task,weight,edges_left,found,search_iters`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "iteration",
            "removed_agent",
            "removed_task",
            "weight",
            "edges_left",
            "found",
            "search_iters",
        ])?;
        for r in &self.records {
            w.write_record([
                r.iteration.to_string(),
                r.removed_edge.agent.to_string(),
                r.removed_edge.task.to_string(),
                r.bottleneck_weight.to_string(),
                r.surviving_edge_count.to_string(),
                r.search_found.to_string(),
                r.search_iterations.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Solves the bottleneck assignment problem starting from the maximum
/// cardinality matching `m0`.
///
/// `m0` must match every task: each search is rooted at the single task
/// freed by the removed edge, which only covers every augmenting path when
/// no other task is free.
pub fn prune_bap(
    g: &WeightedBipartiteGraph,
    m0: &Matching,
    strategy: Strategy,
) -> Result<(Matching, PruneTrace)> {
    check_mcm(g, m0)?;
    if m0.len() != g.task_count() {
        return Err(BapError::Precondition(format!(
            "no maximum matching covers all {} tasks",
            g.task_count()
        )));
    }
    let mut matching = m0.clone();
    let mut records = Vec::new();
    loop {
        let (removed, weight) = max_edge_in_matching(g, &matching)?;
        let mut edges = prune_below(g, &matching, weight);
        edges.remove(removed);
        let reduced = matching.without(removed);
        let input = SearchInput::new(g, &edges, &reduced, removed)?;
        let outcome = strategy.search(&input)?;
        if outcome.found {
            matching = outcome.new_matching;
        }
        records.push(IterationRecord {
            iteration: records.len() + 1,
            removed_edge: removed,
            bottleneck_weight: weight,
            surviving_edge_count: edges.len(),
            search_found: outcome.found,
            search_iterations: outcome.iterations,
            explored_per_iteration: outcome.explored_per_iteration,
            matching_weight: matching.max_weight(g).unwrap_or(weight),
        });
        if !outcome.found {
            let trace = PruneTrace {
                records,
                final_matching: matching.clone(),
                final_bottleneck: (removed, weight),
            };
            return Ok((matching, trace));
        }
    }
}

/// Index pairing when it is a maximum-cardinality matching, otherwise a
/// deterministic maximum-cardinality matching.
pub fn default_initial_matching(g: &WeightedBipartiteGraph) -> Matching {
    let pairing = Matching::index_pairing(g.agent_count(), g.task_count());
    if check_mcm(g, &pairing).is_ok() {
        pairing
    } else {
        crate::graph::mcm_oracle(g, &g.edges())
    }
}

/// Union of matchings over disjoint vertex sets, all indexed over the same
/// combined graph.
pub fn warm_start_from(parts: &[Matching]) -> Result<Matching> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| BapError::invalid("warm start needs at least one matching"))?;
    rest.iter()
        .try_fold(first.clone(), |acc, part| acc.union(part))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::graph::brute_force_bottleneck;

    #[test]
    fn ranked_square_replay() {
        let g = ranked_square();
        let m0 = Matching::index_pairing(4, 4);
        for strategy in Strategy::ALL {
            let (m, trace) = prune_bap(&g, &m0, strategy).unwrap();
            assert_eq!(trace.bottleneck_weight(), 6.0, "{strategy}");
            assert!(!trace.records.last().unwrap().search_found);
            if strategy == Strategy::DfsGreedy {
                assert_eq!(trace.removed_edges(), vec![e(4, 4), e(1, 1), e(2, 1)]);
                let expected =
                    Matching::from_edges(4, [e(1, 2), e(2, 1), e(3, 4), e(4, 3)]).unwrap();
                assert_eq!(m, expected);
            }
        }
    }

    #[test]
    fn single_edge_graph_takes_one_iteration() {
        let g = WeightedBipartiteGraph::complete(vec![vec![4.0]]).unwrap();
        let (m, trace) = prune_bap(&g, &Matching::index_pairing(1, 1), Strategy::Bfs).unwrap();
        assert_eq!(trace.iterations(), 1);
        assert_eq!(m, Matching::index_pairing(1, 1));
        assert_eq!(trace.time_steps(3), 6);
    }

    #[test]
    fn warm_start_on_split_ranked_square_takes_one_iteration() {
        let g = ranked_square();
        let m1 = Matching::from_edges(4, [e(1, 2), e(2, 1)]).unwrap();
        let m2 = Matching::from_edges(4, [e(4, 3), e(3, 4)]).unwrap();
        let m0 = warm_start_from(&[m1, m2]).unwrap();
        assert_eq!(m0.len(), 4);
        let (m, trace) = prune_bap(&g, &m0, Strategy::DfsGreedy).unwrap();
        assert_eq!(trace.iterations(), 1);
        assert_eq!(m, m0);
        assert_eq!(
            brute_force_bottleneck(&g).unwrap().1,
            trace.bottleneck_weight()
        );
    }

    #[test]
    fn warm_start_validation() {
        let single = Matching::from_edges(4, [e(1, 2)]).unwrap();
        assert_eq!(
            warm_start_from(std::slice::from_ref(&single)).unwrap(),
            single
        );
        let clash = Matching::from_edges(4, [e(3, 2)]).unwrap();
        assert!(warm_start_from(&[single, clash]).is_err());
        assert!(warm_start_from(&[]).is_err());
    }

    #[test]
    fn rejects_non_maximum_start() {
        let g = ranked_square();
        let m = Matching::from_edges(4, [e(1, 1)]).unwrap();
        assert!(matches!(
            prune_bap(&g, &m, Strategy::Bfs),
            Err(BapError::NotMaximum { .. })
        ));
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("dfs".parse::<Strategy>().unwrap(), Strategy::DfsGreedy);
        assert_eq!("dfs-index".parse::<Strategy>().unwrap(), Strategy::DfsIndex);
        assert_eq!("BFS".parse::<Strategy>().unwrap(), Strategy::Bfs);
        assert!("dijkstra".parse::<Strategy>().is_err());
    }

    #[test]
    fn trace_csv_columns() {
        let g = ranked_square();
        let (_, trace) =
            prune_bap(&g, &Matching::index_pairing(4, 4), Strategy::DfsGreedy).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,removed_agent,removed_task,weight,edges_left,found,search_iters"
        );
        assert_eq!(lines.next().unwrap(), "1,3,3,16,15,true,2");
        assert_eq!(lines.count(), 2);
    }
}
