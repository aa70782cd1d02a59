use std::cmp::Ordering;
use std::io::Write;

use serde::Serialize;

use super::comm::CommGraph;
use crate::error::Result;
use crate::graph::{weight_cmp, Edge};

/// Records exchanged between agents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Payload {
    /// A proposal for the heaviest matched edge.
    MaxCandidate { edge: Edge, weight: f64 },
    /// A proposal for the cheapest edge.
    MinCandidate { edge: Edge, weight: f64 },
    /// A depth-first exploration bid: `agent` can be reached from `task`
    /// over an edge of `weight` and is matched to `matched_task`.
    ExploreNotify {
        agent: usize,
        task: usize,
        weight: f64,
        matched_task: Option<usize>,
    },
    /// A breadth-first exploration: `agent` was reached from `parent` and
    /// leads on to `child`, its matched task.
    ParentPair {
        agent: usize,
        parent: usize,
        child: Option<usize>,
    },
}

/// Heavier first, then lower `(agent, task)`.
pub fn max_order(a: &Payload, b: &Payload) -> Ordering {
    match (a, b) {
        (
            Payload::MaxCandidate {
                edge: ea,
                weight: wa,
            },
            Payload::MaxCandidate {
                edge: eb,
                weight: wb,
            },
        ) => weight_cmp(*wb, *wa).then(ea.cmp(eb)),
        _ => Ordering::Equal,
    }
}

/// Lighter first, then lower `(agent, task)`.
pub fn min_order(a: &Payload, b: &Payload) -> Ordering {
    match (a, b) {
        (
            Payload::MinCandidate {
                edge: ea,
                weight: wa,
            },
            Payload::MinCandidate {
                edge: eb,
                weight: wb,
            },
        ) => weight_cmp(*wa, *wb).then(ea.cmp(eb)),
        _ => Ordering::Equal,
    }
}

/// Per-tick log line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TickLog {
    pub tick: usize,
    pub msgs: usize,
    /// Agents explored by the search pass that ended on this tick.
    pub explored: usize,
    pub payload_items: usize,
}

/// Time and message accounting of a simulation.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RoundMetrics {
    pub time_steps: usize,
    pub messages_sent: usize,
    /// Agents explored in each search pass, each of which lasts one diameter.
    pub explored_per_d_steps: Vec<usize>,
    /// Most distinct records any agent received during a single search pass.
    pub max_payload_items: usize,
    pub ticks: Vec<TickLog>,
}

impl RoundMetrics {
    pub fn merge(&mut self, other: RoundMetrics) {
        let offset = self.time_steps;
        self.time_steps += other.time_steps;
        self.messages_sent += other.messages_sent;
        self.explored_per_d_steps.extend(other.explored_per_d_steps);
        self.max_payload_items = self.max_payload_items.max(other.max_payload_items);
        self.ticks.extend(other.ticks.into_iter().map(|mut t| {
            t.tick += offset;
            t
        }));
    }

    /// CSV with columns `tick,msgs,explored,payload_items`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for t in &self.ticks {
            w.serialize(t)?;
        }
        if self.ticks.is_empty() {
            w.write_record(["tick", "msgs", "explored", "payload_items"])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// One synchronous tick: every agent broadcasts its outbox to all of its
/// neighbours, then each agent folds its inbox into its knowledge and
/// produces its next outbox. Agents only see their own knowledge and inbox.
pub fn tick<K: Clone>(
    comm: &CommGraph,
    knowledge: &[K],
    outboxes: &[Vec<Payload>],
    step: impl Fn(&K, &[Payload]) -> (K, Vec<Payload>),
) -> (Vec<K>, Vec<Vec<Payload>>) {
    let mut next_knowledge = Vec::with_capacity(knowledge.len());
    let mut next_outboxes = Vec::with_capacity(knowledge.len());
    for (agent, k) in knowledge.iter().enumerate() {
        let inbox = inbox_of(comm, agent, outboxes);
        let (k, out) = step(k, &inbox);
        next_knowledge.push(k);
        next_outboxes.push(out);
    }
    (next_knowledge, next_outboxes)
}

fn inbox_of(comm: &CommGraph, agent: usize, outboxes: &[Vec<Payload>]) -> Vec<Payload> {
    comm.neighbours(agent)
        .iter()
        .flat_map(|&n| outboxes[n].iter().cloned())
        .collect()
}

/// Drives phases of exactly `diameter` ticks and keeps the accounting.
#[derive(Debug)]
pub struct Network<'a> {
    comm: &'a CommGraph,
    pub metrics: RoundMetrics,
}

impl<'a> Network<'a> {
    pub fn new(comm: &'a CommGraph) -> Self {
        Network {
            comm,
            metrics: RoundMetrics::default(),
        }
    }

    pub fn comm(&self) -> &CommGraph {
        self.comm
    }

    /// Runs `ticks` ticks from the given knowledge and outboxes and returns
    /// the final knowledge and, per agent, the distinct records it received.
    fn run<K: Clone>(
        &mut self,
        ticks: usize,
        mut knowledge: Vec<K>,
        mut outboxes: Vec<Vec<Payload>>,
        step: impl Fn(&K, &[Payload]) -> (K, Vec<Payload>),
    ) -> (Vec<K>, Vec<Vec<Payload>>) {
        let n = knowledge.len();
        let mut received: Vec<Vec<Payload>> = vec![Vec::new(); n];
        for _ in 0..ticks {
            let mut msgs = 0;
            let mut items = 0;
            for agent in 0..n {
                if !outboxes[agent].is_empty() {
                    let fanout = self.comm.neighbours(agent).len();
                    msgs += fanout;
                    items += fanout * outboxes[agent].len();
                }
                for p in inbox_of(self.comm, agent, &outboxes) {
                    if !received[agent].contains(&p) {
                        received[agent].push(p);
                    }
                }
            }
            (knowledge, outboxes) = tick(self.comm, &knowledge, &outboxes, &step);
            self.metrics.time_steps += 1;
            self.metrics.messages_sent += msgs;
            self.metrics.ticks.push(TickLog {
                tick: self.metrics.time_steps,
                msgs,
                explored: 0,
                payload_items: items,
            });
        }
        (knowledge, received)
    }

    /// Flooding consensus on the best candidate under `order` (`Less` is
    /// better). Agents forward their belief only when it changes. Returns
    /// every agent's belief after `ticks` ticks and the records each received.
    pub fn consensus_for(
        &mut self,
        ticks: usize,
        candidates: Vec<Option<Payload>>,
        order: fn(&Payload, &Payload) -> Ordering,
    ) -> (Vec<Option<Payload>>, Vec<Vec<Payload>>) {
        let outboxes = candidates
            .iter()
            .map(|c| c.iter().cloned().collect())
            .collect();
        self.run(
            ticks,
            candidates,
            outboxes,
            |belief: &Option<Payload>, inbox| {
                let best = inbox
                    .iter()
                    .chain(belief.iter())
                    .min_by(|a, b| order(a, b))
                    .cloned();
                let changed = best != *belief;
                let out = if changed {
                    best.iter().cloned().collect()
                } else {
                    Vec::new()
                };
                (best, out)
            },
        )
    }

    /// Consensus over one full diameter; every agent then holds the same value.
    pub fn consensus(
        &mut self,
        candidates: Vec<Option<Payload>>,
        order: fn(&Payload, &Payload) -> Ordering,
    ) -> (Option<Payload>, Vec<Vec<Payload>>) {
        let d = self.comm.diameter();
        let (beliefs, received) = self.consensus_for(d, candidates, order);
        debug_assert!(beliefs.windows(2).all(|w| w[0] == w[1]));
        (beliefs.into_iter().next().flatten(), received)
    }

    /// Floods every agent's records for one diameter; afterwards each agent
    /// knows all records, in ascending origin order.
    pub fn flood(&mut self, records: Vec<Vec<Payload>>) -> (Vec<Vec<Payload>>, Vec<Vec<Payload>>) {
        let d = self.comm.diameter();
        let outboxes = records.clone();
        let own = records.clone();
        let (known, mut received) =
            self.run(d, records, outboxes, |known: &Vec<Payload>, inbox| {
                let mut known = known.clone();
                let mut fresh = Vec::new();
                for p in inbox {
                    if !known.contains(p) {
                        known.push(p.clone());
                        fresh.push(p.clone());
                    }
                }
                (known, fresh)
            });
        for (r, mine) in received.iter_mut().zip(&own) {
            r.retain(|p| !mine.contains(p));
        }
        (known, received)
    }

    /// Marks the last tick with the number of agents explored in the pass.
    pub fn record_search_pass(&mut self, explored: usize, received: &[Vec<Payload>]) {
        self.metrics.explored_per_d_steps.push(explored);
        let most = received.iter().map(Vec::len).max().unwrap_or(0);
        self.metrics.max_payload_items = self.metrics.max_payload_items.max(most);
        if let Some(last) = self.metrics.ticks.last_mut() {
            last.explored = explored;
        }
    }
}

/// Network-wide maximum of the candidates after one diameter of flooding.
pub fn max_consensus(comm: &CommGraph, candidates: &[Option<(Edge, f64)>]) -> Option<(Edge, f64)> {
    let mut net = Network::new(comm);
    let (best, _) = net.consensus(
        candidates
            .iter()
            .map(|c| c.map(|(edge, weight)| Payload::MaxCandidate { edge, weight }))
            .collect(),
        max_order,
    );
    best.and_then(unpack)
}

/// Network-wide minimum of the candidates after one diameter of flooding.
pub fn min_consensus(comm: &CommGraph, candidates: &[Option<(Edge, f64)>]) -> Option<(Edge, f64)> {
    let mut net = Network::new(comm);
    let (best, _) = net.consensus(
        candidates
            .iter()
            .map(|c| c.map(|(edge, weight)| Payload::MinCandidate { edge, weight }))
            .collect(),
        min_order,
    );
    best.and_then(unpack)
}

/// Each agent's max-consensus belief after only `ticks` ticks.
pub fn max_consensus_beliefs(
    comm: &CommGraph,
    candidates: &[Option<(Edge, f64)>],
    ticks: usize,
) -> Vec<Option<(Edge, f64)>> {
    let mut net = Network::new(comm);
    let (beliefs, _) = net.consensus_for(
        ticks,
        candidates
            .iter()
            .map(|c| c.map(|(edge, weight)| Payload::MaxCandidate { edge, weight }))
            .collect(),
        max_order,
    );
    beliefs.into_iter().map(|b| b.and_then(unpack)).collect()
}

fn unpack(p: Payload) -> Option<(Edge, f64)> {
    match p {
        Payload::MaxCandidate { edge, weight } | Payload::MinCandidate { edge, weight } => {
            Some((edge, weight))
        }
        _ => None,
    }
}
