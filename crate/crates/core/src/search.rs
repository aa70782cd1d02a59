//! Augmenting-path searches from the task freed by removing the bottleneck
//! edge: a depth-first search that explores one agent per iteration and a
//! breadth-first search that explores a whole level per iteration.

use std::collections::BTreeSet;

use crate::error::{BapError, Result};
use crate::graph::{
    augment, weight_cmp, Edge, EdgeSet, Matching, Path, Vertex, WeightedBipartiteGraph,
};

/// Input to one augmenting-path search.
#[derive(Debug, Clone, Copy)]
pub struct SearchInput<'a> {
    pub graph: &'a WeightedBipartiteGraph,
    /// Surviving edges, without the removed edge.
    pub edges: &'a EdgeSet,
    /// Current matching with the removed edge taken out.
    pub matching: &'a Matching,
    pub removed_edge: Edge,
}

impl<'a> SearchInput<'a> {
    pub fn new(
        graph: &'a WeightedBipartiteGraph,
        edges: &'a EdgeSet,
        matching: &'a Matching,
        removed_edge: Edge,
    ) -> Result<Self> {
        let input = SearchInput {
            graph,
            edges,
            matching,
            removed_edge,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn root(&self) -> usize {
        self.removed_edge.task
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.graph;
        if self.edges.agent_count() != g.agent_count() || self.edges.task_count() != g.task_count()
        {
            return Err(BapError::invalid(
                "edge set dimensions do not match the graph",
            ));
        }
        if let Some(e) = self.edges.iter().find(|e| !g.has_edge(*e)) {
            return Err(BapError::MissingEdge(e));
        }
        g.check_vertex(Vertex::Agent(self.removed_edge.agent))?;
        g.check_vertex(Vertex::Task(self.removed_edge.task))?;
        if self.edges.contains(self.removed_edge) {
            return Err(BapError::invalid("removed edge is still in the edge set"));
        }
        self.matching.check_in(g, Some(self.edges))?;
        if !self
            .matching
            .is_free(Vertex::Agent(self.removed_edge.agent))
        {
            return Err(BapError::invalid(
                "agent of the removed edge is still matched",
            ));
        }
        let free_tasks: Vec<usize> = (0..g.task_count())
            .filter(|&t| self.matching.is_free(Vertex::Task(t)))
            .collect();
        if free_tasks != [self.root()] {
            return Err(BapError::Precondition(format!(
                "the search root must be the only free task, free tasks are {free_tasks:?}"
            )));
        }
        Ok(())
    }

    /// Unexplored agents adjacent to `task` in the surviving edges, ascending.
    fn candidates(&self, task: usize, explored: &[bool]) -> impl Iterator<Item = usize> + '_ {
        let explored = explored.to_vec();
        (0..self.graph.agent_count())
            .filter(move |&a| !explored[a] && self.edges.contains(Edge::new(a, task)))
    }
}

/// Result of one search, with per-iteration accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub new_matching: Matching,
    pub found: bool,
    /// Augmenting path edges ordered from the root task; empty when not found.
    pub path: Vec<Edge>,
    pub free_agent: Option<usize>,
    /// Passes through the main loop, including the final failing pass.
    pub iterations: usize,
    /// Agents explored in each pass; backtracking passes explore none.
    pub explored_per_iteration: Vec<usize>,
    /// Agents explored in order of exploration.
    pub explored: Vec<usize>,
}

impl SearchOutcome {
    fn failed(input: &SearchInput<'_>, explored: Vec<usize>, per_iteration: Vec<usize>) -> Self {
        SearchOutcome {
            new_matching: input.matching.clone(),
            found: false,
            path: Vec::new(),
            free_agent: None,
            iterations: per_iteration.len(),
            explored_per_iteration: per_iteration,
            explored,
        }
    }

    pub fn path_length(&self) -> usize {
        self.path.len()
    }
}

/// Builds the path from `free_agent` back to the root by following parent
/// tasks and matched partners, then augments.
fn finish(
    input: &SearchInput<'_>,
    parent_task: &[Option<usize>],
    free_agent: usize,
    explored: Vec<usize>,
    per_iteration: Vec<usize>,
) -> Result<SearchOutcome> {
    let mut edges = Vec::new();
    let mut agent = free_agent;
    loop {
        let task = parent_task[agent].ok_or_else(|| {
            BapError::Precondition(format!("explored agent a{} has no parent", agent + 1))
        })?;
        edges.push(Edge::new(agent, task));
        if task == input.root() {
            break;
        }
        agent = input.matching.agent_of(task).ok_or_else(|| {
            BapError::Precondition(format!("interior task b{} is not matched", task + 1))
        })?;
        edges.push(Edge::new(agent, task));
    }
    edges.reverse();
    let path = Path::from_edges(&edges)?;
    let new_matching = augment(input.matching, &path)?;
    Ok(SearchOutcome {
        new_matching,
        found: true,
        path: edges,
        free_agent: Some(free_agent),
        iterations: per_iteration.len(),
        explored_per_iteration: per_iteration,
        explored,
    })
}

/// Chooses the next agent to explore from `task`: the cheapest edge when
/// `greedy`, otherwise the lowest index. Ties go to the lowest index.
pub(crate) fn choose_dfs_agent(
    g: &WeightedBipartiteGraph,
    task: usize,
    candidates: impl Iterator<Item = usize>,
    greedy: bool,
) -> Option<usize> {
    if greedy {
        candidates.min_by(|x, y| {
            weight_cmp(g.weight(Edge::new(*x, task)), g.weight(Edge::new(*y, task))).then(x.cmp(y))
        })
    } else {
        candidates.min()
    }
}

/// Depth-first search for an augmenting path from the freed task.
///
/// Each pass either explores one agent or, when the current task has no
/// unexplored neighbours, backtracks to the task the current task was reached
/// from. The search fails when the root has no unexplored neighbours left.
pub fn aug_dfs(input: &SearchInput<'_>, greedy: bool) -> Result<SearchOutcome> {
    input.validate()?;
    let g = input.graph;
    let m = g.agent_count();
    let root = input.root();
    let mut explored_flag = vec![false; m];
    let mut explored = Vec::new();
    // Parent task of every agent currently on the search path.
    let mut parent_task: Vec<Option<usize>> = vec![None; m];
    let mut per_iteration = Vec::new();
    let mut task = root;

    loop {
        if per_iteration.len() > 2 * m + 1 {
            return Err(BapError::Precondition(
                "depth-first search did not terminate".into(),
            ));
        }
        match choose_dfs_agent(g, task, input.candidates(task, &explored_flag), greedy) {
            Some(agent) => {
                per_iteration.push(1);
                explored_flag[agent] = true;
                explored.push(agent);
                parent_task[agent] = Some(task);
                match input.matching.task_of(agent) {
                    None => return finish(input, &parent_task, agent, explored, per_iteration),
                    Some(next) => task = next,
                }
            }
            None if task == root => {
                per_iteration.push(0);
                return Ok(SearchOutcome::failed(input, explored, per_iteration));
            }
            None => {
                per_iteration.push(0);
                let owner = input
                    .matching
                    .agent_of(task)
                    .expect("non-root task on the search path is matched");
                task = parent_task[owner]
                    .take()
                    .expect("agent on the search path has a parent");
            }
        }
    }
}

/// Breadth-first search for a shortest augmenting path from the freed task.
///
/// Each pass explores every unexplored agent adjacent to the current frontier
/// of tasks; an agent's parent is the lowest-indexed frontier task it is
/// adjacent to. When several free agents are reached in the same pass, the
/// one with the lowest parent task wins, then the lowest agent index.
pub fn aug_bfs(input: &SearchInput<'_>) -> Result<SearchOutcome> {
    input.validate()?;
    let g = input.graph;
    let m = g.agent_count();
    let mut explored_flag = vec![false; m];
    let mut explored = Vec::new();
    let mut parent_task: Vec<Option<usize>> = vec![None; m];
    let mut per_iteration = Vec::new();
    let mut frontier: BTreeSet<usize> = BTreeSet::from([input.root()]);

    loop {
        let mut level = Vec::new();
        for &task in &frontier {
            let fresh: Vec<usize> = input.candidates(task, &explored_flag).collect();
            for agent in fresh {
                explored_flag[agent] = true;
                parent_task[agent] = Some(task);
                level.push(agent);
            }
        }
        per_iteration.push(level.len());
        explored.extend(&level);
        if level.is_empty() {
            return Ok(SearchOutcome::failed(input, explored, per_iteration));
        }
        let free = level
            .iter()
            .copied()
            .filter(|&a| input.matching.task_of(a).is_none())
            .min_by_key(|&a| (parent_task[a], a));
        if let Some(agent) = free {
            return finish(input, &parent_task, agent, explored, per_iteration);
        }
        frontier = level
            .iter()
            .filter_map(|&a| input.matching.task_of(a))
            .collect();
    }
}

/// Agents reachable from the root by an alternating path inside the
/// surviving edges, found by enumerating simple paths. Exponential; test use.
pub fn alternating_reachable_agents(input: &SearchInput<'_>) -> BTreeSet<usize> {
    fn walk(
        input: &SearchInput<'_>,
        task: usize,
        on_path: &mut Vec<usize>,
        reached: &mut BTreeSet<usize>,
    ) {
        for agent in 0..input.graph.agent_count() {
            if on_path.contains(&agent) || !input.edges.contains(Edge::new(agent, task)) {
                continue;
            }
            if input.matching.task_of(agent) == Some(task) {
                continue;
            }
            reached.insert(agent);
            if let Some(next) = input.matching.task_of(agent) {
                on_path.push(agent);
                walk(input, next, on_path, reached);
                on_path.pop();
            }
        }
    }
    let mut reached = BTreeSet::new();
    walk(input, input.root(), &mut Vec::new(), &mut reached);
    reached
}

/// True iff every agent with an alternating path to the root within the
/// surviving edges is in `explored`.
pub fn verify_alternating_search(explored: &[usize], input: &SearchInput<'_>) -> bool {
    let explored: BTreeSet<usize> = explored.iter().copied().collect();
    alternating_reachable_agents(input).is_subset(&explored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::graph::{prune_below, Matching};

    fn five_agent_edges() -> EdgeSet {
        let g = five_agent_graph();
        let mut edges = g.edges();
        edges.remove(e(1, 1));
        edges
    }

    #[test]
    fn index_dfs_on_five_agent_example() {
        let g = five_agent_graph();
        let edges = five_agent_edges();
        let m = five_agent_reduced_matching();
        let input = SearchInput::new(&g, &edges, &m, e(1, 1)).unwrap();
        let out = aug_dfs(&input, false).unwrap();
        assert!(out.found);
        assert_eq!(out.path, vec![e(2, 1), e(2, 2), e(4, 2), e(4, 4), e(5, 4)]);
        assert_eq!(out.iterations, 3);
        assert_eq!(out.explored, vec![1, 3, 4]);
        assert_eq!(out.free_agent, Some(4));
    }

    #[test]
    fn bfs_on_five_agent_example() {
        let g = five_agent_graph();
        let edges = five_agent_edges();
        let m = five_agent_reduced_matching();
        let input = SearchInput::new(&g, &edges, &m, e(1, 1)).unwrap();
        let out = aug_bfs(&input).unwrap();
        assert!(out.found);
        assert_eq!(out.path, vec![e(2, 1), e(2, 2), e(5, 2)]);
        assert_eq!(out.iterations, 2);
        assert_eq!(out.explored_per_iteration, vec![2, 3]);
        let expected = Matching::from_edges(5, [e(2, 1), e(5, 2), e(3, 3), e(4, 4)]).unwrap();
        assert_eq!(out.new_matching, expected);
    }

    #[test]
    fn isolated_root_fails_in_one_pass() {
        let (g, m, removed) = chain_search(1, false);
        let edges = EdgeSet::empty(1, 1);
        let input = SearchInput::new(&g, &edges, &m, removed).unwrap();
        for out in [aug_dfs(&input, true).unwrap(), aug_bfs(&input).unwrap()] {
            assert!(!out.found);
            assert_eq!(out.iterations, 1);
            assert_eq!(&out.new_matching, &m);
            assert!(out.explored.is_empty());
            assert!(verify_alternating_search(&out.explored, &input));
        }
    }

    #[test]
    fn greedy_dfs_on_ranked_square_first_iteration() {
        let g = ranked_square();
        let m0 = Matching::index_pairing(4, 4);
        let mut edges = prune_below(&g, &m0, 16.0);
        edges.remove(e(4, 4));
        let reduced = m0.without(e(4, 4));
        let input = SearchInput::new(&g, &edges, &reduced, e(4, 4)).unwrap();
        let out = aug_dfs(&input, true).unwrap();
        assert!(out.found);
        let expected = Matching::from_edges(4, [e(1, 1), e(2, 4), e(3, 3), e(4, 2)]).unwrap();
        assert_eq!(out.new_matching, expected);
        assert!(out.new_matching.max_weight(&g).unwrap() <= 13.0);
    }

    #[test]
    fn chain_worst_cases_hit_the_iteration_bounds() {
        for n in 1..=6 {
            let (g, m, removed) = chain_search(n, false);
            let mut edges = g.edges();
            edges.remove(removed);
            let input = SearchInput::new(&g, &edges, &m, removed).unwrap();
            let dfs = aug_dfs(&input, false).unwrap();
            assert!(!dfs.found);
            assert_eq!(dfs.iterations, 2 * n - 1);

            let (g, m, removed) = chain_search(n, true);
            let mut edges = g.edges();
            edges.remove(removed);
            let input = SearchInput::new(&g, &edges, &m, removed).unwrap();
            if n > 1 {
                let bfs = aug_bfs(&input).unwrap();
                assert!(bfs.found);
                assert_eq!(bfs.iterations, n);
            }
        }
    }

    #[test]
    fn failed_search_on_ranked_square_explores_everything_reachable() {
        let g = ranked_square();
        let m = Matching::from_edges(4, [e(1, 2), e(2, 1), e(3, 4), e(4, 3)]).unwrap();
        let mut edges = prune_below(&g, &m, 6.0);
        edges.remove(e(2, 1));
        let reduced = m.without(e(2, 1));
        let input = SearchInput::new(&g, &edges, &reduced, e(2, 1)).unwrap();
        for out in [aug_dfs(&input, true).unwrap(), aug_bfs(&input).unwrap()] {
            assert!(!out.found);
            assert!(verify_alternating_search(&out.explored, &input));
            assert!(out.explored.iter().all(|&a| reduced.task_of(a).is_some()));
        }
    }

    #[test]
    fn verification_rejects_a_missing_agent() {
        let g = five_agent_graph();
        let edges = five_agent_edges();
        let m = five_agent_reduced_matching();
        let input = SearchInput::new(&g, &edges, &m, e(1, 1)).unwrap();
        assert!(!verify_alternating_search(&[1], &input));
    }

    #[test]
    fn input_validation() {
        let g = five_agent_graph();
        let m = five_agent_reduced_matching();
        let all = g.edges();
        assert!(SearchInput::new(&g, &all, &m, e(1, 1)).is_err());
        let edges = five_agent_edges();
        let full = five_agent_matching();
        assert!(SearchInput::new(&g, &edges, &full, e(1, 1)).is_err());
        let two_free = m.without(e(2, 2));
        assert!(matches!(
            SearchInput::new(&g, &edges, &two_free, e(1, 1)),
            Err(BapError::Precondition(_))
        ));
    }
}
