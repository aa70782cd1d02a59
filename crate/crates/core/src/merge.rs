//! Merging two solved sub-problems over disjoint agents and tasks.
//!
//! The union of the two sub-solutions is always a maximum-cardinality
//! matching of the combined graph when both parts cover their tasks, and its
//! heaviest edge bounds the combined bottleneck from above. Three cheap
//! conditions on the cross edges and the second sub-problem are necessary for
//! the combined bottleneck to drop below the heavier sub-bottleneck `w(e1)`.
//! When one of them fails and `e1` is critical, the union is already optimal
//! and no further search is needed; otherwise the pruning loop is
//! warm-started from the union.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{BapError, Result};
use crate::graph::{
    alternating_reach, alternating_tree, check_mcm, max_edge_in_matching, mcm_oracle, prune_below,
    weight_cmp, AlternatingTree, Edge, Matching, Vertex, WeightedBipartiteGraph,
};
use crate::pruner::{default_initial_matching, prune_bap, warm_start_from, PruneTrace, Strategy};

/// Two sub-problems of a combined graph and their solutions, all indexed
/// over the combined graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub graph: WeightedBipartiteGraph,
    pub agents: [Vec<usize>; 2],
    pub tasks: [Vec<usize>; 2],
    pub matchings: [Matching; 2],
    /// Bottleneck edge of each sub-solution; `None` for an empty part.
    pub bottlenecks: [Option<(Edge, f64)>; 2],
}

impl Partition {
    pub fn new(
        graph: WeightedBipartiteGraph,
        agents: [Vec<usize>; 2],
        tasks: [Vec<usize>; 2],
        matchings: [Matching; 2],
        bottlenecks: [Option<Edge>; 2],
    ) -> Result<Self> {
        let (m, n) = (graph.agent_count(), graph.task_count());
        check_split(&agents, m, "agent")?;
        check_split(&tasks, n, "task")?;
        let mut weighted = [None, None];
        for k in 0..2 {
            if agents[k].len() < tasks[k].len() {
                return Err(BapError::invalid(format!(
                    "sub-problem {} has fewer agents than tasks",
                    k + 1
                )));
            }
            matchings[k].check_in(&graph, None)?;
            for e in matchings[k].edges() {
                if !agents[k].contains(&e.agent) || !tasks[k].contains(&e.task) {
                    return Err(BapError::invalid(format!(
                        "edge {e} of sub-matching {} leaves its sub-problem",
                        k + 1
                    )));
                }
            }
            weighted[k] = match bottlenecks[k] {
                Some(e) if matchings[k].contains(e) => Some((e, graph.weight(e))),
                Some(e) => {
                    return Err(BapError::invalid(format!(
                        "bottleneck {e} is not in sub-matching {}",
                        k + 1
                    )))
                }
                None if matchings[k].is_empty() => None,
                None => return Err(BapError::invalid("missing sub-problem bottleneck edge")),
            };
        }
        Ok(Partition {
            graph,
            agents,
            tasks,
            matchings,
            bottlenecks: weighted,
        })
    }

    /// Solves both sub-problems with the pruning loop. The second part is the
    /// complement of the given agents and tasks.
    pub fn solve(
        graph: WeightedBipartiteGraph,
        agents1: &[usize],
        tasks1: &[usize],
        strategy: Strategy,
    ) -> Result<Self> {
        let agents = [
            sorted(agents1),
            (0..graph.agent_count())
                .filter(|a| !agents1.contains(a))
                .collect(),
        ];
        let tasks = [
            sorted(tasks1),
            (0..graph.task_count())
                .filter(|t| !tasks1.contains(t))
                .collect(),
        ];
        let mut matchings = [
            Matching::empty(graph.agent_count()),
            Matching::empty(graph.agent_count()),
        ];
        let mut bottlenecks = [None, None];
        for k in 0..2 {
            if agents[k].is_empty() || tasks[k].is_empty() {
                continue;
            }
            let sub = graph.subgraph(&agents[k], &tasks[k])?;
            let (local, trace) = prune_bap(&sub, &default_initial_matching(&sub), strategy)?;
            matchings[k] = lift(&local, &agents[k], &tasks[k], graph.agent_count())?;
            let e = trace.final_bottleneck.0;
            bottlenecks[k] = Some(Edge::new(agents[k][e.agent], tasks[k][e.task]));
        }
        Self::new(graph, agents, tasks, matchings, bottlenecks)
    }

    /// Sub-graph `k` with its matching and bottleneck in local indices.
    pub fn local(&self, k: usize) -> Result<(WeightedBipartiteGraph, Matching, Option<Edge>)> {
        let g = self.graph.subgraph(&self.agents[k], &self.tasks[k])?;
        let local_task = |t: usize| self.tasks[k].iter().position(|&x| x == t);
        let assignment = self.agents[k]
            .iter()
            .map(|&a| self.matchings[k].task_of(a).and_then(local_task))
            .collect();
        let m = Matching::from_assignment(assignment)?;
        let e = self.bottlenecks[k].map(|(e, _)| {
            Edge::new(
                self.agents[k]
                    .iter()
                    .position(|&x| x == e.agent)
                    .unwrap_or(0),
                local_task(e.task).unwrap_or(0),
            )
        });
        Ok((g, m, e))
    }

    pub fn union(&self) -> Result<Matching> {
        warm_start_from(&self.matchings)
    }

    fn swapped(&self) -> Self {
        Partition {
            graph: self.graph.clone(),
            agents: [self.agents[1].clone(), self.agents[0].clone()],
            tasks: [self.tasks[1].clone(), self.tasks[0].clone()],
            matchings: [self.matchings[1].clone(), self.matchings[0].clone()],
            bottlenecks: [self.bottlenecks[1], self.bottlenecks[0]],
        }
    }
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn check_split(parts: &[Vec<usize>; 2], total: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; total];
    for &x in parts.iter().flatten() {
        if x >= total || seen[x] {
            return Err(BapError::invalid(format!(
                "{what} split is not a partition"
            )));
        }
        seen[x] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(BapError::invalid(format!(
            "{what} split does not cover every {what}"
        )));
    }
    Ok(())
}

fn lift(local: &Matching, agents: &[usize], tasks: &[usize], m: usize) -> Result<Matching> {
    Matching::from_edges(
        m,
        local
            .edges()
            .map(|e| Edge::new(agents[e.agent], tasks[e.task])),
    )
}

/// Upper bound on the combined bottleneck weight: the heavier sub-bottleneck.
pub fn bottleneck_bound(p: &Partition) -> f64 {
    p.bottlenecks
        .iter()
        .flatten()
        .map(|(_, w)| *w)
        .max_by(|a, b| weight_cmp(*a, *b))
        .unwrap_or(f64::NEG_INFINITY)
}

fn check_heaviest(g: &WeightedBipartiteGraph, m: &Matching, e: Edge) -> Result<()> {
    check_mcm(g, m)?;
    if !m.contains(e) {
        return Err(BapError::invalid(format!(
            "edge {e} is not in the matching"
        )));
    }
    Ok(())
}

/// True iff `e` is a heaviest edge of `m` and removing it from the pruned
/// edge set leaves no augmenting path relative to `m` without `e`.
pub fn is_critical_bottleneck_edge(
    g: &WeightedBipartiteGraph,
    m: &Matching,
    e: Edge,
) -> Result<bool> {
    check_heaviest(g, m, e)?;
    let (_, top) = max_edge_in_matching(g, m)?;
    if weight_cmp(g.weight(e), top).is_ne() {
        return Ok(false);
    }
    let mut edges = prune_below(g, m, top);
    edges.remove(e);
    Ok(mcm_oracle(g, &edges).len() < m.len())
}

/// True iff every vertex reaches an endpoint of `e` by an alternating path
/// inside the pruned edge set. `e` must be a heaviest matched edge.
pub fn is_bottleneck_cluster(g: &WeightedBipartiteGraph, m: &Matching, e: Edge) -> Result<bool> {
    check_heaviest(g, m, e)?;
    let (_, top) = max_edge_in_matching(g, m)?;
    if weight_cmp(g.weight(e), top).is_ne() {
        return Err(BapError::Precondition(format!(
            "{e} is not a heaviest matched edge"
        )));
    }
    let edges = prune_below(g, m, top);
    let mut reached = alternating_reach(g, &edges, m, Vertex::Agent(e.agent));
    reached.extend(alternating_reach(g, &edges, m, Vertex::Task(e.task)));
    let all = g.agent_count() + g.task_count();
    Ok(reached.len() == all)
}

/// Alternating trees of the pruned edge set without `e`, rooted at the
/// agent and at the task of `e`. No error checking.
fn trees_unchecked(
    g: &WeightedBipartiteGraph,
    m: &Matching,
    e: Edge,
) -> (AlternatingTree, AlternatingTree) {
    let top = g
        .weight(e)
        .max(m.max_weight(g).unwrap_or(f64::NEG_INFINITY));
    let mut edges = prune_below(g, m, top);
    edges.remove(e);
    let agent_tree = alternating_tree(
        g,
        &edges,
        m,
        Vertex::Agent(e.agent),
        &[Vertex::Task(e.task)],
    );
    let task_tree = alternating_tree(
        g,
        &edges,
        m,
        Vertex::Task(e.task),
        &[Vertex::Agent(e.agent)],
    );
    (agent_tree, task_tree)
}

/// Agent tree rooted at the agent of `e` and task tree rooted at its task.
///
/// Requires a bottleneck cluster around the critical edge `e`; the trees
/// then partition the vertices.
pub fn agent_task_trees(
    g: &WeightedBipartiteGraph,
    m: &Matching,
    e: Edge,
) -> Result<(AlternatingTree, AlternatingTree)> {
    if !is_critical_bottleneck_edge(g, m, e)? {
        return Err(BapError::Precondition(format!(
            "{e} is not a critical bottleneck edge"
        )));
    }
    if !is_bottleneck_cluster(g, m, e)? {
        return Err(BapError::Precondition(format!(
            "graph is not a bottleneck cluster around {e}"
        )));
    }
    let (mu, nu) = trees_unchecked(g, m, e);
    let overlap = mu.vertices().any(|v| nu.contains(v));
    if overlap || mu.level.len() + nu.level.len() != g.agent_count() + g.task_count() {
        return Err(BapError::Precondition(
            "agent and task trees do not partition the vertices".into(),
        ));
    }
    Ok((mu, nu))
}

/// Which hypotheses of the merge test hold, after orienting so that the
/// first sub-problem has the heavier bottleneck.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    pub first_is_cluster: bool,
    pub second_is_cluster: bool,
    pub first_edge_critical: bool,
    pub second_edge_critical: bool,
    /// The first bottleneck is strictly heavier than the second.
    pub strict_order: bool,
    /// The first bottleneck is the only heaviest edge of the first matching.
    pub unique_max: bool,
    /// The second matching leaves no agent or task of its sub-problem free.
    pub second_perfect: bool,
    /// Both sub-matchings match every agent of their sub-problem.
    pub agents_covered: bool,
    /// The union of the sub-matchings is maximum in the combined graph.
    pub union_maximum: bool,
}

impl Hypotheses {
    /// Requirements on the sub-problems themselves.
    pub fn sub_problems_hold(&self) -> bool {
        self.first_is_cluster
            && self.second_is_cluster
            && self.first_edge_critical
            && self.second_edge_critical
    }

    /// Requirements for the three conditions to decide the merge exactly.
    pub fn exact(&self) -> bool {
        self.sub_problems_hold() && self.strict_order && self.unique_max
    }

    /// Whether the failed conditions prove the union optimal.
    ///
    /// An augmenting path after removing `e1` can only leave the first part
    /// from a task-tree task (condition i) and, when no other agent is free,
    /// must come back into an agent-tree agent (condition ii). With `e1`
    /// critical inside the first part, either failure rules such a path out.
    ///
    /// Failure of condition iii alone needs the cluster structure as well.
    pub fn reuse_proven(&self, cond_i: bool, cond_ii: bool, cond_iii: bool) -> bool {
        let escape_blocked = self.union_maximum
            && self.first_edge_critical
            && (!cond_i || (!cond_ii && self.agents_covered));
        let cluster_blocked = !cond_iii
            && self.first_is_cluster
            && self.first_edge_critical
            && self.second_perfect
            && self.strict_order
            && self.unique_max;
        escape_blocked || cluster_blocked
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeDecision {
    ReuseUnion,
    WarmStartRequired,
}

/// Witness of the three conditions, in combined-graph indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Second-part agent with a cheap edge into the first task tree.
    pub agent: usize,
    /// First-part task at the other end of that edge.
    pub tree_task: usize,
    /// Second-part task with a cheap edge into the first agent tree.
    pub task: usize,
    pub tree_agent: usize,
    /// Alternating path from `agent` to `task` inside the second part,
    /// starting and ending with matched edges.
    pub path: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeReport {
    pub bound: f64,
    /// True when the parts were swapped to put the heavier bottleneck first.
    pub swapped: bool,
    pub first_bottleneck: Option<Edge>,
    pub second_bottleneck: Option<Edge>,
    pub hypotheses: Hypotheses,
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii: bool,
    /// Second-part agents satisfying the first condition.
    pub entry_agents: Vec<usize>,
    /// Second-part tasks satisfying the second condition.
    pub exit_tasks: Vec<usize>,
    pub witness: Option<Witness>,
    pub decision: MergeDecision,
    pub note: Option<String>,
}

impl MergeReport {
    pub fn all_conditions(&self) -> bool {
        self.cond_i && self.cond_ii && self.cond_iii
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Evaluates the three merge conditions.
///
/// With `verify`, fails unless both parts are bottleneck clusters around
/// critical bottleneck edges.
pub fn check_merge_conditions(p: &Partition, verify: bool) -> Result<MergeReport> {
    let (p, swapped) = match p.bottlenecks {
        [Some((_, w1)), Some((_, w2))] if w1 < w2 => (p.swapped(), true),
        [None, Some(_)] => (p.swapped(), true),
        _ => (p.clone(), false),
    };
    let g = &p.graph;
    let (e1, w1) =
        p.bottlenecks[0].ok_or_else(|| BapError::invalid("both sub-problems are empty"))?;
    let second = p.bottlenecks[1];

    let (g1, m1, le1) = p.local(0)?;
    let le1 = le1.expect("nonempty part");
    let first_edge_critical = is_critical_bottleneck_edge(&g1, &m1, le1)?;
    let first_is_cluster = first_edge_critical && is_bottleneck_cluster(&g1, &m1, le1)?;
    // A second part without a matched edge imposes nothing of its own.
    let (second_edge_critical, second_is_cluster, second_matched) = match second {
        Some(_) => {
            let (g2, m2, le2) = p.local(1)?;
            let le2 = le2.expect("nonempty part");
            let critical = is_critical_bottleneck_edge(&g2, &m2, le2)?;
            (
                critical,
                critical && is_bottleneck_cluster(&g2, &m2, le2)?,
                m2.len(),
            )
        }
        None => (true, true, 0),
    };
    let hypotheses = Hypotheses {
        first_is_cluster,
        second_is_cluster,
        first_edge_critical,
        second_edge_critical,
        strict_order: second.is_none_or(|(_, w2)| w1 > w2),
        unique_max: m1.edges().filter(|e| g1.weight(*e) == w1).count() == 1,
        second_perfect: second_matched == p.agents[1].len() && second_matched == p.tasks[1].len(),
        agents_covered: m1.len() == p.agents[0].len() && second_matched == p.agents[1].len(),
        union_maximum: check_mcm(g, &p.union()?).is_ok(),
    };
    if verify && !hypotheses.sub_problems_hold() {
        return Err(BapError::Precondition(format!(
            "sub-problems are not bottleneck clusters around critical edges: {hypotheses:?}"
        )));
    }

    let (mu, nu) = trees_unchecked(&g1, &m1, le1);
    let tree_agents: Vec<usize> = mu.agents().iter().map(|&a| p.agents[0][a]).collect();
    let tree_tasks: Vec<usize> = nu.tasks().iter().map(|&t| p.tasks[0][t]).collect();
    let cheap = |e: Edge| g.has_edge(e) && g.weight(e) < w1;

    let entry: Vec<(usize, usize)> = p.agents[1]
        .iter()
        .filter_map(|&i| {
            tree_tasks
                .iter()
                .find(|&&b| cheap(Edge::new(i, b)))
                .map(|&b| (i, b))
        })
        .collect();
    let exit: Vec<(usize, usize)> = p.tasks[1]
        .iter()
        .filter_map(|&j| {
            tree_agents
                .iter()
                .find(|&&a| cheap(Edge::new(a, j)))
                .map(|&a| (j, a))
        })
        .collect();

    let in_second_tasks: BTreeSet<usize> = p.tasks[1].iter().copied().collect();
    let mut witness = None;
    for &(i, b) in &entry {
        let targets: BTreeSet<usize> = exit.iter().map(|&(j, _)| j).collect();
        if let Some((j, path)) = matched_path(g, &p.matchings[1], &in_second_tasks, i, &targets, w1)
        {
            let a = exit.iter().find(|x| x.0 == j).map(|x| x.1).unwrap_or(0);
            witness = Some(Witness {
                agent: i,
                tree_task: b,
                task: j,
                tree_agent: a,
                path,
            });
            break;
        }
    }

    let cond_i = !entry.is_empty();
    let cond_ii = !exit.is_empty();
    let cond_iii = witness.is_some();
    let decision = if hypotheses.reuse_proven(cond_i, cond_ii, cond_iii) {
        MergeDecision::ReuseUnion
    } else {
        MergeDecision::WarmStartRequired
    };
    let note = if second.is_none() {
        Some("second sub-problem has no matched edge".into())
    } else if decision == MergeDecision::ReuseUnion || (cond_i && cond_ii && cond_iii) {
        None
    } else if !hypotheses.union_maximum {
        Some("the union is not maximum in the combined graph".into())
    } else if !hypotheses.first_edge_critical {
        Some("the first bottleneck edge is not critical".into())
    } else if cond_i && !cond_ii {
        Some("free agents leave the failed condition ii inconclusive".into())
    } else {
        Some(
            "condition iii fails but the first sub-problem lacks the cluster structure to conclude"
                .into(),
        )
    };
    Ok(MergeReport {
        bound: w1,
        swapped,
        first_bottleneck: Some(e1),
        second_bottleneck: second.map(|(e2, _)| e2),
        hypotheses,
        cond_i,
        cond_ii,
        cond_iii,
        entry_agents: entry.iter().map(|x| x.0).collect(),
        exit_tasks: exit.iter().map(|x| x.0).collect(),
        witness,
        decision,
        note,
    })
}

/// Shortest alternating path from agent `start` that begins with its matched
/// edge, alternates inside the second part over edges lighter than `limit`,
/// and ends with the matched edge of a task in `targets`. The lowest target
/// wins among the reachable ones.
fn matched_path(
    g: &WeightedBipartiteGraph,
    m: &Matching,
    tasks: &BTreeSet<usize>,
    start: usize,
    targets: &BTreeSet<usize>,
    limit: f64,
) -> Option<(usize, Vec<Edge>)> {
    let cheap = |e: Edge| g.has_edge(e) && g.weight(e) < limit;
    let first = m.task_of(start).filter(|&t| cheap(Edge::new(start, t)))?;
    // For each reached task: the agent owning it and the task that agent was
    // reached from over an unmatched edge.
    let mut prev: BTreeMap<usize, Option<(usize, usize)>> = BTreeMap::from([(first, None)]);
    let mut queue = VecDeque::from([first]);
    while let Some(t) = queue.pop_front() {
        for a in 0..g.agent_count() {
            let e = Edge::new(a, t);
            if m.contains(e) || !cheap(e) {
                continue;
            }
            let Some(next) = m
                .task_of(a)
                .filter(|&u| tasks.contains(&u) && cheap(Edge::new(a, u)))
            else {
                continue;
            };
            if let std::collections::btree_map::Entry::Vacant(slot) = prev.entry(next) {
                slot.insert(Some((a, t)));
                queue.push_back(next);
            }
        }
    }
    let j = *targets.iter().find(|t| prev.contains_key(t))?;
    let mut path = Vec::new();
    let mut t = j;
    loop {
        path.push(Edge::new(m.agent_of(t)?, t));
        match prev[&t] {
            None => break,
            Some((a, from)) => {
                path.push(Edge::new(a, from));
                t = from;
            }
        }
    }
    path.reverse();
    Some((j, path))
}

/// Union of the sub-solutions when the conditions prove it optimal,
/// otherwise the pruning loop warm-started from the union.
pub fn merge_or_warmstart(
    p: &Partition,
    strategy: Strategy,
) -> Result<(Matching, MergeReport, Option<PruneTrace>)> {
    let report = check_merge_conditions(p, false)?;
    let union = p.union()?;
    if report.decision == MergeDecision::ReuseUnion {
        return Ok((union, report, None));
    }
    let (m, trace) = prune_bap(&p.graph, &union, strategy)?;
    Ok((m, report, Some(trace)))
}
