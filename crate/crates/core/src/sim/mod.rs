//! Synchronous message-passing simulation of the distributed algorithm.
//!
//! Every agent holds only its own row of the weight matrix. Time advances in
//! ticks of a global clock; in each tick an agent broadcasts to its
//! neighbours in the communication graph and reacts to what it received in
//! the previous tick. Network-wide agreement takes exactly one diameter of
//! ticks, which is also the cost of each search pass.

mod agent;
mod comm;
mod network;
mod protocol;

pub use agent::{AgentLocalState, PassResult};
pub use comm::CommGraph;
pub use network::{
    max_consensus, max_consensus_beliefs, max_order, min_consensus, min_order, tick, Network,
    Payload, RoundMetrics, TickLog,
};
pub use protocol::{
    collective_matching, distributed_prune, run_distributed_prune_bap, run_distributed_search,
};
