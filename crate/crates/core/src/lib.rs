//! Discrete-event simulation of relay-optimized broadcast flooding in a
//! wireless mesh network.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`] places nodes, builds the unit-disk connectivity graph and
//!   answers 1-hop / 2-hop neighborhood queries.
//! * [`relay`] selects the relay set that covers every 2-hop neighbor pair,
//!   and ships an exhaustive minimum-cover oracle for small instances.
//! * [`protocol`] is the per-node forwarding state machine (duplicate cache,
//!   relay hold buffer, emitter eligibility) plus the blind-flooding baseline.
//! * [`engine`] drives everything from a deterministic event queue.
//! * [`metrics`] holds the per-second counters, CSV export and summaries.
//! * [`fixtures`] contains the named topologies used by tests, the CLI and the
//!   browser demo.

pub mod engine;
pub mod fixtures;
pub mod metrics;
pub mod protocol;
pub mod relay;
pub mod time;
pub mod topology;

pub use engine::{run, run_with_topology, InflightPolicy, Mode, RunOutput, SimConfig, SimError};
pub use metrics::{compare, Counter, MetricsError, MetricsSeries, Reduction, Summary};
pub use protocol::{Action, NodeProtocolState, Packet, PacketKey, ProtocolConfig};
pub use relay::{
    brute_force_min_relays, cardinality_report, coverage_check, select_relays, select_relays_with,
    CandidateOrder, CardinalityReport, RelayAssignment, RelayError,
};
pub use time::SimTime;
pub use topology::{
    build_topology, place_nodes, Node, NodeId, NodeSet, Placement, Position, Role, Topology,
    TopologyError,
};
