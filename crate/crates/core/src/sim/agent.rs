use std::collections::BTreeSet;

use super::network::Payload;
use crate::graph::{Edge, Matching, WeightedBipartiteGraph};

/// What a single agent knows: its own incident edges and weights, its
/// matched task, and the protocol state replicated through messages.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentLocalState {
    pub id: usize,
    /// Weight of the edge to each task, `None` where there is no edge.
    row: Vec<Option<f64>>,
    pub matched_task: Option<usize>,
    /// Task this agent was reached from; equals the matched task when idle.
    pub parent_task: Option<usize>,
    pub explored: bool,
    /// Tasks on the current depth-first search path, root first.
    pub dfs_task_stack: Vec<usize>,
    /// Tasks below this agent in the breadth-first search tree, including
    /// its own matched task.
    pub descendant_tasks: BTreeSet<usize>,
    /// Tasks of this agent's edges that survive pruning.
    pub pruned_local: BTreeSet<usize>,
    frontier: BTreeSet<usize>,
    /// Task given up when this agent's edge was removed.
    released_task: Option<usize>,
}

/// Consistent outcome of one search pass, as seen by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassResult {
    /// Continue searching.
    Continue,
    /// An augmenting path ending at this free agent was committed.
    Found(usize),
    Failed,
}

impl AgentLocalState {
    pub fn new(id: usize, row: Vec<Option<f64>>, matched_task: Option<usize>) -> Self {
        AgentLocalState {
            id,
            row,
            matched_task,
            parent_task: matched_task,
            explored: false,
            dfs_task_stack: Vec::new(),
            descendant_tasks: BTreeSet::new(),
            pruned_local: BTreeSet::new(),
            frontier: BTreeSet::new(),
            released_task: None,
        }
    }

    /// One state per agent, each holding only its own row of the graph.
    pub fn from_graph(g: &WeightedBipartiteGraph, m: &Matching) -> Vec<Self> {
        (0..g.agent_count())
            .map(|i| {
                let mut s = Self::new(i, g.agent_row(i), m.task_of(i));
                s.pruned_local = (0..g.task_count())
                    .filter(|&t| s.row[t].is_some())
                    .collect();
                s
            })
            .collect()
    }

    pub fn task_count(&self) -> usize {
        self.row.len()
    }

    pub fn weight_to(&self, task: usize) -> Option<f64> {
        self.row.get(task).copied().flatten()
    }

    /// This agent's proposal for the heaviest matched edge.
    pub fn max_candidate(&self) -> Option<Payload> {
        let task = self.matched_task?;
        Some(Payload::MaxCandidate {
            edge: Edge::new(self.id, task),
            weight: self.weight_to(task)?,
        })
    }

    /// Keeps the matched edge and every edge strictly lighter than `weight`.
    /// The owner of `removed` also drops that edge and becomes free.
    pub fn prune(&mut self, removed: Edge, weight: f64) {
        let matched = self.matched_task;
        self.pruned_local = (0..self.row.len())
            .filter(|&t| match self.row[t] {
                Some(w) => Some(t) == matched || w < weight,
                None => false,
            })
            .collect();
        if removed.agent == self.id {
            self.pruned_local.remove(&removed.task);
            if self.matched_task == Some(removed.task) {
                self.released_task = self.matched_task.take();
            }
        }
        self.parent_task = self.matched_task;
    }

    /// Takes the released edge back after a failed search.
    pub fn restore(&mut self) {
        if let Some(t) = self.released_task.take() {
            self.matched_task = Some(t);
            self.parent_task = Some(t);
        }
    }

    pub(crate) fn accept_release(&mut self) {
        self.released_task = None;
    }

    pub fn begin_search(&mut self, root: usize) {
        self.explored = false;
        self.parent_task = self.matched_task;
        self.dfs_task_stack = vec![root];
        self.descendant_tasks.clear();
        self.frontier = BTreeSet::from([root]);
    }

    /// Depth-first bid: offered when unexplored and adjacent to the current task.
    pub fn dfs_bid(&self) -> Option<Payload> {
        let task = *self.dfs_task_stack.last()?;
        if self.explored || !self.pruned_local.contains(&task) {
            return None;
        }
        Some(Payload::ExploreNotify {
            agent: self.id,
            task,
            weight: self.weight_to(task)?,
            matched_task: self.matched_task,
        })
    }

    /// Applies the agreed winner of a depth-first pass, or backtracks when
    /// there was none.
    pub fn dfs_apply(&mut self, winner: Option<&Payload>) -> PassResult {
        match winner {
            Some(&Payload::ExploreNotify {
                agent,
                task,
                matched_task,
                ..
            }) => {
                if agent == self.id {
                    self.explored = true;
                    self.parent_task = Some(task);
                }
                match matched_task {
                    Some(next) => {
                        self.dfs_task_stack.push(next);
                        PassResult::Continue
                    }
                    None => {
                        // Agents still holding a parent on the path shift to it.
                        self.matched_task = self.parent_task;
                        PassResult::Found(agent)
                    }
                }
            }
            _ => {
                if self.dfs_task_stack.len() <= 1 {
                    return PassResult::Failed;
                }
                let task = self.dfs_task_stack.pop();
                if self.matched_task == task {
                    self.parent_task = self.matched_task;
                }
                PassResult::Continue
            }
        }
    }

    /// Breadth-first exploration: an unexplored agent adjacent to the
    /// frontier explores itself and announces its parent and matched task.
    pub fn bfs_record(&mut self) -> Option<Payload> {
        if self.explored {
            return None;
        }
        let parent = *self
            .frontier
            .iter()
            .find(|t| self.pruned_local.contains(t))?;
        self.explored = true;
        self.parent_task = Some(parent);
        self.descendant_tasks = self.matched_task.into_iter().collect();
        Some(Payload::ParentPair {
            agent: self.id,
            parent,
            child: self.matched_task,
        })
    }

    /// Folds in every record of a breadth-first pass.
    pub fn bfs_apply(&mut self, known: &[Payload]) -> PassResult {
        let records: Vec<(usize, usize, Option<usize>)> = known
            .iter()
            .filter_map(|p| match *p {
                Payload::ParentPair {
                    agent,
                    parent,
                    child,
                } => Some((agent, parent, child)),
                _ => None,
            })
            .collect();
        if records.is_empty() {
            return PassResult::Failed;
        }
        if self.explored {
            for &(_, parent, child) in &records {
                if let Some(child) = child {
                    if self.descendant_tasks.contains(&parent) {
                        self.descendant_tasks.insert(child);
                    }
                }
            }
        }
        let free = records
            .iter()
            .filter(|r| r.2.is_none())
            .min_by_key(|r| (r.1, r.0))
            .copied();
        match free {
            Some((agent, parent, _)) => {
                if agent == self.id || (self.explored && self.descendant_tasks.contains(&parent)) {
                    self.matched_task = self.parent_task;
                }
                PassResult::Found(agent)
            }
            None => {
                self.frontier = records.iter().filter_map(|r| r.2).collect();
                PassResult::Continue
            }
        }
    }

    pub fn end_search(&mut self) {
        self.parent_task = self.matched_task;
        self.dfs_task_stack.clear();
        self.frontier.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    #[test]
    fn prune_keeps_cheaper_edges_and_frees_the_owner() {
        let g = ranked_square();
        let mut states = AgentLocalState::from_graph(&g, &Matching::index_pairing(4, 4));
        for s in &mut states {
            s.prune(e(4, 4), 16.0);
        }
        assert_eq!(states[3].matched_task, None);
        let total: usize = states.iter().map(|s| s.pruned_local.len()).sum();
        assert_eq!(total, 15);
        let again = states.clone();
        for s in &mut states {
            s.prune(e(4, 4), 16.0);
        }
        assert_eq!(states, again);
    }

    #[test]
    fn prune_below_everything_keeps_only_matched_edges() {
        let g = ranked_square();
        let mut states = AgentLocalState::from_graph(&g, &Matching::index_pairing(4, 4));
        for s in &mut states {
            s.prune(e(2, 4), 1.0);
        }
        for (i, s) in states.iter().enumerate() {
            assert_eq!(s.pruned_local, BTreeSet::from([i]));
        }
    }

    #[test]
    fn restore_after_release() {
        let g = ranked_square();
        let mut states = AgentLocalState::from_graph(&g, &Matching::index_pairing(4, 4));
        states[1].prune(e(2, 2), 8.0);
        assert_eq!(states[1].matched_task, None);
        states[1].restore();
        assert_eq!(states[1].matched_task, Some(1));
    }
}
