//! Weighted bipartite assignment graphs and the matching vocabulary shared by
//! every other module: edge sets, matchings, paths, alternating trees and the
//! pruned edge set, plus exhaustive oracles used as ground truth in tests.
//!
//! Agents and tasks are indexed from zero. Wherever an argmax or argmin over
//! edges is taken, ties are broken by the lexicographic `(agent, task)` order.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{BapError, Result};

/// An agent-task pair `{a_agent, b_task}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub agent: usize,
    pub task: usize,
}

impl Edge {
    pub const fn new(agent: usize, task: usize) -> Self {
        Edge { agent, task }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{a{},b{}}}", self.agent + 1, self.task + 1)
    }
}

/// A vertex of the bipartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vertex {
    Agent(usize),
    Task(usize),
}

impl Vertex {
    pub fn is_agent(self) -> bool {
        matches!(self, Vertex::Agent(_))
    }

    pub fn index(self) -> usize {
        match self {
            Vertex::Agent(i) | Vertex::Task(i) => i,
        }
    }

    /// Edge joining this vertex and `other`, if they lie on opposite sides.
    pub fn edge_to(self, other: Vertex) -> Option<Edge> {
        match (self, other) {
            (Vertex::Agent(a), Vertex::Task(t)) | (Vertex::Task(t), Vertex::Agent(a)) => {
                Some(Edge::new(a, t))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Agent(i) => write!(f, "a{}", i + 1),
            Vertex::Task(j) => write!(f, "b{}", j + 1),
        }
    }
}

/// Planar coordinates of agents and tasks, when the weights are distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Positions {
    pub agents: Vec<[f64; 2]>,
    pub tasks: Vec<[f64; 2]>,
}

/// Total order on weights used for every argmax/argmin.
pub(crate) fn weight_cmp(a: f64, b: f64) -> std::cmp::Ordering {
    a.total_cmp(&b)
}

/// A set of edges over an `m x n` bipartite vertex set, stored as a dense mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    m: usize,
    n: usize,
    bits: Vec<bool>,
}

impl EdgeSet {
    pub fn empty(m: usize, n: usize) -> Self {
        EdgeSet {
            m,
            n,
            bits: vec![false; m * n],
        }
    }

    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(Edge) -> bool) -> Self {
        let mut set = Self::empty(m, n);
        for agent in 0..m {
            for task in 0..n {
                set.bits[agent * n + task] = f(Edge::new(agent, task));
            }
        }
        set
    }

    pub fn from_edges(m: usize, n: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut set = Self::empty(m, n);
        for e in edges {
            set.insert(e);
        }
        set
    }

    pub fn agent_count(&self) -> usize {
        self.m
    }

    pub fn task_count(&self) -> usize {
        self.n
    }

    pub fn contains(&self, e: Edge) -> bool {
        e.agent < self.m && e.task < self.n && self.bits[e.agent * self.n + e.task]
    }

    pub fn insert(&mut self, e: Edge) {
        self.bits[e.agent * self.n + e.task] = true;
    }

    pub fn remove(&mut self, e: Edge) {
        if e.agent < self.m && e.task < self.n {
            self.bits[e.agent * self.n + e.task] = false;
        }
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Edges in ascending `(agent, task)` order.
    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(k, _)| Edge::new(k / self.n, k % self.n))
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.iter().all(|e| other.contains(e))
    }
}

/// A weighted bipartite graph between `m` agents and `n` tasks.
///
/// Complete graphs are the common case; the mask allows the filtered
/// subgraphs that pruning and sub-problem extraction produce.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBipartiteGraph {
    m: usize,
    n: usize,
    present: Vec<bool>,
    weight: Vec<f64>,
    pub agent_labels: Option<Vec<String>>,
    pub task_labels: Option<Vec<String>>,
    pub positions: Option<Positions>,
}

impl WeightedBipartiteGraph {
    /// Complete graph from an agent-major weight matrix.
    pub fn complete(weights: Vec<Vec<f64>>) -> Result<Self> {
        let m = weights.len();
        let n = weights.first().map_or(0, Vec::len);
        Self::with_mask(weights, vec![vec![true; n]; m])
    }

    pub fn with_mask(weights: Vec<Vec<f64>>, mask: Vec<Vec<bool>>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(BapError::invalid("graph needs at least one agent"));
        }
        let n = weights[0].len();
        if n == 0 {
            return Err(BapError::invalid("graph needs at least one task"));
        }
        if weights.iter().any(|row| row.len() != n) {
            return Err(BapError::invalid(
                "weight matrix rows have different lengths",
            ));
        }
        if mask.len() != m || mask.iter().any(|row| row.len() != n) {
            return Err(BapError::invalid(
                "mask shape does not match the weight matrix",
            ));
        }
        let mut present = Vec::with_capacity(m * n);
        let mut weight = Vec::with_capacity(m * n);
        for (i, (wrow, mrow)) in weights.iter().zip(&mask).enumerate() {
            for (j, (&w, &p)) in wrow.iter().zip(mrow).enumerate() {
                if p && !w.is_finite() {
                    return Err(BapError::invalid(format!(
                        "weight of edge {} is not finite",
                        Edge::new(i, j)
                    )));
                }
                present.push(p);
                weight.push(if p { w } else { f64::INFINITY });
            }
        }
        Ok(WeightedBipartiteGraph {
            m,
            n,
            present,
            weight,
            agent_labels: None,
            task_labels: None,
            positions: None,
        })
    }

    /// Graph on `m x n` vertices holding only the listed edges.
    pub fn from_edges(m: usize, n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = vec![vec![0.0; n]; m];
        let mut mask = vec![vec![false; n]; m];
        for &(a, t, w) in edges {
            if a >= m || t >= n {
                return Err(BapError::MissingEdge(Edge::new(a, t)));
            }
            weights[a][t] = w;
            mask[a][t] = true;
        }
        Self::with_mask(weights, mask)
    }

    /// Complete graph whose weights are Euclidean distances.
    pub fn from_positions(positions: Positions) -> Result<Self> {
        let weights = positions
            .agents
            .iter()
            .map(|a| {
                positions
                    .tasks
                    .iter()
                    .map(|t| ((a[0] - t[0]).powi(2) + (a[1] - t[1]).powi(2)).sqrt())
                    .collect()
            })
            .collect();
        let mut g = Self::complete(weights)?;
        g.positions = Some(positions);
        Ok(g)
    }

    pub fn agent_count(&self) -> usize {
        self.m
    }

    pub fn task_count(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        e.agent < self.m && e.task < self.n && self.present[e.agent * self.n + e.task]
    }

    /// Weight of an edge; `+inf` for pairs that are not edges.
    pub fn weight(&self, e: Edge) -> f64 {
        self.weight[e.agent * self.n + e.task]
    }

    pub fn edge_weight(&self, e: Edge) -> Result<f64> {
        if self.has_edge(e) {
            Ok(self.weight(e))
        } else {
            Err(BapError::MissingEdge(e))
        }
    }

    /// Row of agent `i`: the weights of its incident edges, `None` where absent.
    pub fn agent_row(&self, agent: usize) -> Vec<Option<f64>> {
        (0..self.n)
            .map(|t| {
                let e = Edge::new(agent, t);
                self.has_edge(e).then(|| self.weight(e))
            })
            .collect()
    }

    pub fn edges(&self) -> EdgeSet {
        EdgeSet {
            m: self.m,
            n: self.n,
            bits: self.present.clone(),
        }
    }

    pub fn weight_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|i| (0..self.n).map(|j| self.weight[i * self.n + j]).collect())
            .collect()
    }

    pub fn mask_matrix(&self) -> Vec<Vec<bool>> {
        (0..self.m)
            .map(|i| self.present[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Induced subgraph on the given agents and tasks, reindexed in the given order.
    pub fn subgraph(&self, agents: &[usize], tasks: &[usize]) -> Result<Self> {
        for &a in agents {
            self.check_vertex(Vertex::Agent(a))?;
        }
        for &t in tasks {
            self.check_vertex(Vertex::Task(t))?;
        }
        let weights = agents
            .iter()
            .map(|&a| {
                tasks
                    .iter()
                    .map(|&t| self.weight(Edge::new(a, t)))
                    .collect()
            })
            .collect();
        let mask = agents
            .iter()
            .map(|&a| {
                tasks
                    .iter()
                    .map(|&t| self.has_edge(Edge::new(a, t)))
                    .collect()
            })
            .collect();
        Self::with_mask(weights, mask)
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        let ok = match v {
            Vertex::Agent(i) => i < self.m,
            Vertex::Task(j) => j < self.n,
        };
        if ok {
            Ok(())
        } else {
            Err(BapError::VertexOutOfRange(v))
        }
    }

    fn check_edge_set(&self, edges: &EdgeSet) -> Result<()> {
        if edges.m != self.m || edges.n != self.n {
            return Err(BapError::invalid(
                "edge set dimensions do not match the graph",
            ));
        }
        Ok(())
    }
}

/// A matching, stored canonically as each agent's matched task.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    matched_task: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(agent_count: usize) -> Self {
        Matching {
            matched_task: vec![None; agent_count],
        }
    }

    pub fn from_assignment(matched_task: Vec<Option<usize>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for t in matched_task.iter().flatten() {
            if !seen.insert(*t) {
                return Err(BapError::NotAMatching(format!(
                    "task b{} matched twice",
                    t + 1
                )));
            }
        }
        Ok(Matching { matched_task })
    }

    pub fn from_edges(agent_count: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut matched_task = vec![None; agent_count];
        for e in edges {
            if e.agent >= agent_count {
                return Err(BapError::VertexOutOfRange(Vertex::Agent(e.agent)));
            }
            if matched_task[e.agent].is_some() {
                return Err(BapError::NotAMatching(format!(
                    "agent a{} matched twice",
                    e.agent + 1
                )));
            }
            matched_task[e.agent] = Some(e.task);
        }
        Self::from_assignment(matched_task)
    }

    /// `{a_p, b_p}` for every `p < min(m, n)`.
    pub fn index_pairing(agent_count: usize, task_count: usize) -> Self {
        Matching {
            matched_task: (0..agent_count)
                .map(|i| (i < task_count).then_some(i))
                .collect(),
        }
    }

    /// Parses the `-1`-sentinel array form.
    pub fn from_sentinel(values: &[i64]) -> Result<Self> {
        let assignment = values
            .iter()
            .map(|&v| match v {
                -1 => Ok(None),
                v if v >= 0 => Ok(Some(v as usize)),
                v => Err(BapError::invalid(format!("bad matched task {v}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_assignment(assignment)
    }

    pub fn to_sentinel(&self) -> Vec<i64> {
        self.matched_task
            .iter()
            .map(|t| t.map_or(-1, |t| t as i64))
            .collect()
    }

    pub fn agent_count(&self) -> usize {
        self.matched_task.len()
    }

    pub fn task_of(&self, agent: usize) -> Option<usize> {
        self.matched_task.get(agent).copied().flatten()
    }

    pub fn agent_of(&self, task: usize) -> Option<usize> {
        self.matched_task.iter().position(|t| *t == Some(task))
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.matched_task
    }

    pub fn len(&self) -> usize {
        self.matched_task.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.task_of(e.agent) == Some(e.task)
    }

    /// Edge-set view, in ascending agent order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.matched_task
            .iter()
            .enumerate()
            .filter_map(|(a, t)| t.map(|t| Edge::new(a, t)))
    }

    pub fn is_free(&self, v: Vertex) -> bool {
        match v {
            Vertex::Agent(a) => self.task_of(a).is_none(),
            Vertex::Task(t) => self.agent_of(t).is_none(),
        }
    }

    /// Partner of `v` in the matching.
    pub fn mate(&self, v: Vertex) -> Option<Vertex> {
        match v {
            Vertex::Agent(a) => self.task_of(a).map(Vertex::Task),
            Vertex::Task(t) => self.agent_of(t).map(Vertex::Agent),
        }
    }

    pub fn without(&self, e: Edge) -> Self {
        let mut out = self.clone();
        if out.contains(e) {
            out.matched_task[e.agent] = None;
        }
        out
    }

    /// Union of matchings over disjoint vertex sets.
    pub fn union(&self, other: &Matching) -> Result<Self> {
        if self.agent_count() != other.agent_count() {
            return Err(BapError::invalid("matchings have different agent counts"));
        }
        let mut out = self.clone();
        for e in other.edges() {
            if out.matched_task[e.agent].is_some() {
                return Err(BapError::NotAMatching(format!(
                    "agent a{} shared",
                    e.agent + 1
                )));
            }
            out.matched_task[e.agent] = Some(e.task);
        }
        Self::from_assignment(out.matched_task)
    }

    /// Checks that every matched edge is an edge of `g` within `edges` (when given).
    pub fn check_in(&self, g: &WeightedBipartiteGraph, edges: Option<&EdgeSet>) -> Result<()> {
        if self.agent_count() != g.agent_count() {
            return Err(BapError::invalid(
                "matching and graph have different agent counts",
            ));
        }
        for e in self.edges() {
            if !g.has_edge(e) || edges.is_some_and(|s| !s.contains(e)) {
                return Err(BapError::MissingEdge(e));
            }
        }
        Ok(())
    }

    /// Largest matched weight in `g`, or `None` for the empty matching.
    pub fn max_weight(&self, g: &WeightedBipartiteGraph) -> Option<f64> {
        self.edges()
            .map(|e| g.weight(e))
            .max_by(|a, b| weight_cmp(*a, *b))
    }

    pub(crate) fn set(&mut self, agent: usize, task: Option<usize>) {
        self.matched_task[agent] = task;
    }
}

/// A simple path given by its vertex sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    vertices: Vec<Vertex>,
}

impl Path {
    /// Validates distinctness and that consecutive vertices lie on opposite sides.
    pub fn from_vertices(vertices: Vec<Vertex>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for v in &vertices {
            if !seen.insert(*v) {
                return Err(BapError::NotAPath(format!("vertex {v} repeated")));
            }
        }
        for w in vertices.windows(2) {
            if w[0].edge_to(w[1]).is_none() {
                return Err(BapError::NotAPath(format!(
                    "{} and {} are not adjacent",
                    w[0], w[1]
                )));
            }
        }
        if vertices.len() == 1 {
            return Err(BapError::NotAPath("a path needs at least one edge".into()));
        }
        Ok(Path { vertices })
    }

    /// Builds a path from an ordered edge list; consecutive edges must share a vertex.
    pub fn from_edges(edges: &[Edge]) -> Result<Self> {
        match edges {
            [] => Ok(Path {
                vertices: Vec::new(),
            }),
            [e] => Self::from_vertices(vec![Vertex::Task(e.task), Vertex::Agent(e.agent)]),
            [first, second, ..] => {
                let start = if first.task == second.task {
                    Vertex::Agent(first.agent)
                } else if first.agent == second.agent {
                    Vertex::Task(first.task)
                } else {
                    return Err(BapError::NotAPath(format!(
                        "{first} and {second} do not meet"
                    )));
                };
                let mut vertices = vec![start];
                let mut cur = start;
                for e in edges {
                    let next = match cur {
                        Vertex::Agent(a) if a == e.agent => Vertex::Task(e.task),
                        Vertex::Task(t) if t == e.task => Vertex::Agent(e.agent),
                        _ => {
                            return Err(BapError::NotAPath(format!(
                                "{e} does not continue at {cur}"
                            )))
                        }
                    };
                    vertices.push(next);
                    cur = next;
                }
                Self::from_vertices(vertices)
            }
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.vertices
            .windows(2)
            .filter_map(|w| w[0].edge_to(w[1]))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn endpoints(&self) -> Option<(Vertex, Vertex)> {
        Some((*self.vertices.first()?, *self.vertices.last()?))
    }
}

/// `N((V, edges), v)` in ascending index order.
pub fn neighbors(g: &WeightedBipartiteGraph, v: Vertex, edges: &EdgeSet) -> Result<Vec<Vertex>> {
    g.check_vertex(v)?;
    g.check_edge_set(edges)?;
    Ok(match v {
        Vertex::Agent(a) => (0..g.task_count())
            .filter(|&t| edges.contains(Edge::new(a, t)))
            .map(Vertex::Task)
            .collect(),
        Vertex::Task(t) => (0..g.agent_count())
            .filter(|&a| edges.contains(Edge::new(a, t)))
            .map(Vertex::Agent)
            .collect(),
    })
}

/// Every vertex touches at most one matched and at most one unmatched path edge.
pub fn is_alternating_path(path: &Path, matching: &Matching) -> bool {
    let mut in_m: BTreeMap<Vertex, usize> = BTreeMap::new();
    let mut out_m: BTreeMap<Vertex, usize> = BTreeMap::new();
    for e in path.edges() {
        let counts = if matching.contains(e) {
            &mut in_m
        } else {
            &mut out_m
        };
        *counts.entry(Vertex::Agent(e.agent)).or_default() += 1;
        *counts.entry(Vertex::Task(e.task)).or_default() += 1;
    }
    in_m.values().chain(out_m.values()).all(|&c| c <= 1)
}

/// Alternating, nonempty, with both endpoints free.
pub fn is_augmenting_path(path: &Path, matching: &Matching) -> bool {
    match path.endpoints() {
        Some((s, t)) if !path.is_empty() => {
            is_alternating_path(path, matching) && matching.is_free(s) && matching.is_free(t)
        }
        _ => false,
    }
}

/// Symmetric difference `M xor P` for an augmenting path `P`.
pub fn augment(matching: &Matching, path: &Path) -> Result<Matching> {
    if !is_augmenting_path(path, matching) {
        return Err(BapError::NotAugmenting);
    }
    let edges = path.edges();
    let mut out = matching.clone();
    for e in edges.iter().filter(|e| matching.contains(**e)) {
        out.set(e.agent, None);
    }
    for e in edges.iter().filter(|e| !matching.contains(**e)) {
        if e.agent >= out.agent_count() {
            return Err(BapError::VertexOutOfRange(Vertex::Agent(e.agent)));
        }
        out.set(e.agent, Some(e.task));
    }
    debug_assert_eq!(out.len(), matching.len() + 1);
    Ok(out)
}

/// Edge of maximum weight in the matching; ties go to the lowest agent index.
pub fn max_edge_in_matching(
    g: &WeightedBipartiteGraph,
    matching: &Matching,
) -> Result<(Edge, f64)> {
    let mut best: Option<(Edge, f64)> = None;
    for e in matching.edges() {
        let w = g.edge_weight(e)?;
        if best.is_none_or(|(_, bw)| weight_cmp(w, bw).is_gt()) {
            best = Some((e, w));
        }
    }
    best.ok_or(BapError::EmptyMatching)
}

/// Maximum-cardinality matching within `edges` by repeated augmentation.
///
/// Free agents are scanned in ascending order and each tries tasks in
/// ascending order, so the result is deterministic.
pub fn mcm_oracle(g: &WeightedBipartiteGraph, edges: &EdgeSet) -> Matching {
    let (m, n) = (g.agent_count(), g.task_count());
    let mut task_owner: Vec<Option<usize>> = vec![None; n];

    fn try_agent(
        a: usize,
        g: &WeightedBipartiteGraph,
        edges: &EdgeSet,
        seen: &mut [bool],
        task_owner: &mut [Option<usize>],
    ) -> bool {
        for t in 0..g.task_count() {
            let e = Edge::new(a, t);
            if seen[t] || !g.has_edge(e) || !edges.contains(e) {
                continue;
            }
            seen[t] = true;
            let free = match task_owner[t] {
                None => true,
                Some(other) => try_agent(other, g, edges, seen, task_owner),
            };
            if free {
                task_owner[t] = Some(a);
                return true;
            }
        }
        false
    }

    for a in 0..m {
        let mut seen = vec![false; n];
        try_agent(a, g, edges, &mut seen, &mut task_owner);
    }
    let mut matched = vec![None; m];
    for (t, owner) in task_owner.iter().enumerate() {
        if let Some(a) = owner {
            matched[*a] = Some(t);
        }
    }
    Matching {
        matched_task: matched,
    }
}

/// Cardinality of a maximum matching of the whole graph.
pub fn max_cardinality(g: &WeightedBipartiteGraph) -> usize {
    mcm_oracle(g, &g.edges()).len()
}

/// Checks that `matching` is a matching of `g` with maximum cardinality.
pub fn check_mcm(g: &WeightedBipartiteGraph, matching: &Matching) -> Result<()> {
    matching.check_in(g, None)?;
    let maximum = max_cardinality(g);
    if matching.len() != maximum {
        return Err(BapError::NotMaximum {
            found: matching.len(),
            maximum,
        });
    }
    Ok(())
}

/// `M` together with every edge strictly lighter than the heaviest edge of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedEdgeSet {
    pub edges: EdgeSet,
    pub threshold: f64,
}

/// Pruned edge set of an MCM; fails if `matching` is not a maximum-cardinality matching.
pub fn pruned_edge_set(g: &WeightedBipartiteGraph, matching: &Matching) -> Result<PrunedEdgeSet> {
    check_mcm(g, matching)?;
    let (_, threshold) = max_edge_in_matching(g, matching)?;
    Ok(PrunedEdgeSet {
        edges: prune_below(g, matching, threshold),
        threshold,
    })
}

pub(crate) fn prune_below(
    g: &WeightedBipartiteGraph,
    matching: &Matching,
    threshold: f64,
) -> EdgeSet {
    EdgeSet::from_fn(g.agent_count(), g.task_count(), |e| {
        g.has_edge(e) && (matching.contains(e) || g.weight(e) < threshold)
    })
}

/// Exhaustive bottleneck assignment: minimises the heaviest edge over every
/// maximum-cardinality matching. Test oracle; refuses more than 9 tasks.
pub fn brute_force_bottleneck(g: &WeightedBipartiteGraph) -> Result<(Matching, f64)> {
    let (m, n) = (g.agent_count(), g.task_count());
    if n > 9 || m > 16 {
        return Err(BapError::TooLarge { m, n });
    }
    let target = max_cardinality(g);
    if target == 0 {
        return Err(BapError::EmptyMatching);
    }

    struct Search<'a> {
        g: &'a WeightedBipartiteGraph,
        target: usize,
        used: Vec<bool>,
        current: Vec<Option<usize>>,
        best: Option<(Vec<Option<usize>>, f64)>,
    }

    impl Search<'_> {
        fn run(&mut self, task: usize, size: usize, worst: f64) {
            let n = self.g.task_count();
            if size + (n - task) < self.target {
                return;
            }
            if let Some((_, b)) = &self.best {
                if worst >= *b {
                    return;
                }
            }
            if task == n {
                if size == self.target {
                    self.best = Some((self.current.clone(), worst));
                }
                return;
            }
            for a in 0..self.g.agent_count() {
                let e = Edge::new(a, task);
                if self.used[a] || !self.g.has_edge(e) {
                    continue;
                }
                self.used[a] = true;
                self.current[a] = Some(task);
                let w = self.g.weight(e);
                self.run(task + 1, size + 1, if w > worst { w } else { worst });
                self.current[a] = None;
                self.used[a] = false;
            }
            self.run(task + 1, size, worst);
        }
    }

    let mut search = Search {
        g,
        target,
        used: vec![false; m],
        current: vec![None; m],
        best: None,
    };
    search.run(0, 0, f64::NEG_INFINITY);
    let (assignment, w) = search.best.ok_or(BapError::EmptyMatching)?;
    Ok((Matching::from_assignment(assignment)?, w))
}

/// A rooted tree with parent links and levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingTree {
    pub root: Vertex,
    pub parent: BTreeMap<Vertex, Vertex>,
    pub level: BTreeMap<Vertex, usize>,
}

impl AlternatingTree {
    pub fn contains(&self, v: Vertex) -> bool {
        self.level.contains_key(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.level.keys().copied()
    }

    pub fn agents(&self) -> Vec<usize> {
        self.vertices()
            .filter_map(|v| match v {
                Vertex::Agent(a) => Some(a),
                Vertex::Task(_) => None,
            })
            .collect()
    }

    pub fn tasks(&self) -> Vec<usize> {
        self.vertices()
            .filter_map(|v| match v {
                Vertex::Task(t) => Some(t),
                Vertex::Agent(_) => None,
            })
            .collect()
    }

    /// Tree edges, one per non-root vertex.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .parent
            .iter()
            .filter_map(|(c, p)| c.edge_to(*p))
            .collect();
        out.sort();
        out
    }

    /// Path from `v` up to the root.
    pub fn path_to_root(&self, v: Vertex) -> Option<Path> {
        if !self.contains(v) {
            return None;
        }
        let mut vertices = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent.get(&cur) {
            vertices.push(*p);
            cur = *p;
        }
        Some(Path { vertices })
    }
}

/// Breadth-first alternating tree from `root` inside `edges`.
///
/// The root leaves by unmatched edges; afterwards a vertex entered by an
/// unmatched edge continues along its matched edge and vice versa. Vertices in
/// `blocked` are never entered. Children are discovered in ascending index
/// order, so the first discoverer becomes the parent.
pub fn alternating_tree(
    g: &WeightedBipartiteGraph,
    edges: &EdgeSet,
    matching: &Matching,
    root: Vertex,
    blocked: &[Vertex],
) -> AlternatingTree {
    let mut parent = BTreeMap::new();
    let mut level = BTreeMap::new();
    level.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    let root_side = root.is_agent();
    while let Some(v) = queue.pop_front() {
        let leave_unmatched = v.is_agent() == root_side;
        let next: Vec<Vertex> = if leave_unmatched {
            let mate = matching.mate(v);
            neighbors(g, v, edges)
                .unwrap_or_default()
                .into_iter()
                .filter(|u| Some(*u) != mate)
                .collect()
        } else {
            matching
                .mate(v)
                .filter(|u| v.edge_to(*u).is_some_and(|e| edges.contains(e)))
                .into_iter()
                .collect()
        };
        for u in next {
            if level.contains_key(&u) || blocked.contains(&u) {
                continue;
            }
            level.insert(u, level[&v] + 1);
            parent.insert(u, v);
            queue.push_back(u);
        }
    }
    AlternatingTree {
        root,
        parent,
        level,
    }
}

/// Every vertex reachable from `root` by an alternating path inside `edges`,
/// whether the path leaves the root by an unmatched or by its matched edge.
pub fn alternating_reach(
    g: &WeightedBipartiteGraph,
    edges: &EdgeSet,
    matching: &Matching,
    root: Vertex,
) -> std::collections::BTreeSet<Vertex> {
    let mut reach: std::collections::BTreeSet<Vertex> =
        alternating_tree(g, edges, matching, root, &[])
            .vertices()
            .collect();
    if let Some(mate) = matching.mate(root) {
        if root.edge_to(mate).is_some_and(|e| edges.contains(e)) {
            reach.insert(mate);
            reach.extend(alternating_tree(g, edges, matching, mate, &[root]).vertices());
        }
    }
    reach
}
