use std::cmp::Ordering;

use super::agent::{AgentLocalState, PassResult};
use super::comm::CommGraph;
use super::network::{max_order, Network, Payload, RoundMetrics};
use crate::error::{BapError, Result};
use crate::graph::{check_mcm, weight_cmp, Edge, Matching, Vertex, WeightedBipartiteGraph};
use crate::pruner::{IterationRecord, PruneTrace, Strategy};
use crate::search::SearchOutcome;

fn explore_greedy_order(a: &Payload, b: &Payload) -> Ordering {
    match (a, b) {
        (
            Payload::ExploreNotify {
                agent: ia,
                weight: wa,
                ..
            },
            Payload::ExploreNotify {
                agent: ib,
                weight: wb,
                ..
            },
        ) => weight_cmp(*wa, *wb).then(ia.cmp(ib)),
        _ => Ordering::Equal,
    }
}

fn explore_index_order(a: &Payload, b: &Payload) -> Ordering {
    match (a, b) {
        (Payload::ExploreNotify { agent: ia, .. }, Payload::ExploreNotify { agent: ib, .. }) => {
            ia.cmp(ib)
        }
        _ => Ordering::Equal,
    }
}

/// The matching currently held across all agents.
pub fn collective_matching(states: &[AgentLocalState]) -> Result<Matching> {
    Matching::from_assignment(states.iter().map(|s| s.matched_task).collect())
}

/// Local pruning after every agent has learned the removed edge and its weight.
pub fn distributed_prune(states: &mut [AgentLocalState], removed: Edge, weight: f64) {
    for s in states {
        s.prune(removed, weight);
    }
}

/// Runs one augmenting-path search from the free task `root` with every
/// agent acting on its own state and the messages it receives.
pub fn run_distributed_search(
    states: &mut [AgentLocalState],
    comm: &CommGraph,
    root: usize,
    strategy: Strategy,
) -> Result<(SearchOutcome, RoundMetrics)> {
    let mut net = Network::new(comm);
    let outcome = search(states, &mut net, root, strategy)?;
    Ok((outcome, net.metrics))
}

fn search(
    states: &mut [AgentLocalState],
    net: &mut Network<'_>,
    root: usize,
    strategy: Strategy,
) -> Result<SearchOutcome> {
    if states.is_empty() || net.comm().agent_count() != states.len() {
        return Err(BapError::invalid(
            "communication graph and agents differ in size",
        ));
    }
    let before = collective_matching(states)?;
    let n = states[0].task_count();
    let free_tasks: Vec<usize> = (0..n)
        .filter(|&t| before.is_free(Vertex::Task(t)))
        .collect();
    if free_tasks != [root] {
        return Err(BapError::Precondition(format!(
            "the search root must be the only free task, free tasks are {free_tasks:?}"
        )));
    }
    for s in states.iter_mut() {
        s.begin_search(root);
    }

    let mut explored = Vec::new();
    let mut per_iteration = Vec::new();
    let result = loop {
        if per_iteration.len() > 2 * states.len() + 1 {
            return Err(BapError::Precondition(
                "distributed search did not terminate".into(),
            ));
        }
        let results: Vec<PassResult> = if strategy.is_dfs() {
            let order = if strategy == Strategy::DfsGreedy {
                explore_greedy_order
            } else {
                explore_index_order
            };
            let bids = states.iter().map(AgentLocalState::dfs_bid).collect();
            let (winner, received) = net.consensus(bids, order);
            let mut level = Vec::new();
            if let Some(Payload::ExploreNotify { agent, .. }) = winner {
                level.push(agent);
            }
            net.record_search_pass(level.len(), &received);
            per_iteration.push(level.len());
            explored.extend(level);
            states
                .iter_mut()
                .map(|s| s.dfs_apply(winner.as_ref()))
                .collect()
        } else {
            let records = states
                .iter_mut()
                .map(|s| s.bfs_record().into_iter().collect())
                .collect();
            let (known, received) = net.flood(records);
            let mut level: Vec<(usize, usize)> = known[0]
                .iter()
                .filter_map(|p| match *p {
                    Payload::ParentPair { agent, parent, .. } => Some((parent, agent)),
                    _ => None,
                })
                .collect();
            level.sort_unstable();
            net.record_search_pass(level.len(), &received);
            per_iteration.push(level.len());
            explored.extend(level.iter().map(|&(_, a)| a));
            states
                .iter_mut()
                .zip(&known)
                .map(|(s, k)| s.bfs_apply(k))
                .collect()
        };
        if results.windows(2).any(|w| w[0] != w[1]) {
            return Err(BapError::Precondition(
                "agents disagree on the search state".into(),
            ));
        }
        match results[0] {
            PassResult::Continue => continue,
            other => break other,
        }
    };

    let outcome = match result {
        PassResult::Found(free_agent) => {
            let mut path = Vec::new();
            let mut agent = free_agent;
            loop {
                let task = states[agent]
                    .parent_task
                    .ok_or_else(|| BapError::Precondition("path agent has no parent".into()))?;
                path.push(Edge::new(agent, task));
                if task == root {
                    break;
                }
                agent = before
                    .agent_of(task)
                    .ok_or_else(|| BapError::Precondition("path task is unmatched".into()))?;
                path.push(Edge::new(agent, task));
            }
            path.reverse();
            SearchOutcome {
                new_matching: collective_matching(states)?,
                found: true,
                path,
                free_agent: Some(free_agent),
                iterations: per_iteration.len(),
                explored_per_iteration: per_iteration,
                explored,
            }
        }
        _ => SearchOutcome {
            new_matching: before,
            found: false,
            path: Vec::new(),
            free_agent: None,
            iterations: per_iteration.len(),
            explored_per_iteration: per_iteration,
            explored,
        },
    };
    for s in states.iter_mut() {
        s.end_search();
    }
    Ok(outcome)
}

/// Distributed pruning loop: max-consensus on the heaviest matched edge,
/// local pruning, then a distributed search, until a search fails.
///
/// `m0` must match every task so that the removed edge frees exactly one.
pub fn run_distributed_prune_bap(
    g: &WeightedBipartiteGraph,
    comm: &CommGraph,
    m0: &Matching,
    strategy: Strategy,
) -> Result<(Matching, PruneTrace, RoundMetrics)> {
    check_mcm(g, m0)?;
    if m0.len() != g.task_count() {
        return Err(BapError::Precondition(
            "the initial matching must assign every task".into(),
        ));
    }
    if comm.agent_count() != g.agent_count() {
        return Err(BapError::invalid(format!(
            "topology has {} agents, instance has {}",
            comm.agent_count(),
            g.agent_count()
        )));
    }
    let mut states = AgentLocalState::from_graph(g, m0);
    let mut net = Network::new(comm);
    let mut records = Vec::new();
    loop {
        let candidates = states.iter().map(AgentLocalState::max_candidate).collect();
        let (best, _) = net.consensus(candidates, max_order);
        let (removed, weight) = match best {
            Some(Payload::MaxCandidate { edge, weight }) => (edge, weight),
            _ => return Err(BapError::EmptyMatching),
        };
        distributed_prune(&mut states, removed, weight);
        let surviving = states.iter().map(|s| s.pruned_local.len()).sum();
        let outcome = search(&mut states, &mut net, removed.task, strategy)?;
        if outcome.found {
            states.iter_mut().for_each(AgentLocalState::accept_release);
        } else {
            states.iter_mut().for_each(AgentLocalState::restore);
        }
        let matching = collective_matching(&states)?;
        records.push(IterationRecord {
            iteration: records.len() + 1,
            removed_edge: removed,
            bottleneck_weight: weight,
            surviving_edge_count: surviving,
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
            return Ok((matching, trace, net.metrics));
        }
    }
}
