//! Per-node flood forwarding.
//!
//! A relay forwards a flood packet only on first reception and only when the
//! copy came directly from a node it serves (one of its selectors) or from the
//! packet's origin. Forwarded copies sit in a hold buffer for `hold_time` and
//! leave with an extra relay header. Blind flooding, the baseline, forwards
//! every first-seen packet from every node.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::relay::RelayAssignment;
use crate::time::SimTime;
use crate::topology::{NodeId, Topology};

pub const DEFAULT_PAYLOAD_BITS: u64 = 2000;
pub const DEFAULT_HEADER_BITS_PER_RELAY: u64 = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("node {node} received a copy from {emitter}, which is not a neighbor")]
    NotANeighbor { node: NodeId, emitter: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketKey {
    pub origin: NodeId,
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub origin: NodeId,
    pub seq: u64,
    pub payload_bits: u64,
    /// Accumulated relay headers.
    pub header_bits: u64,
    /// Sender of the transmission currently on the air.
    pub emitter: NodeId,
    pub created_at: SimTime,
}

impl Packet {
    pub fn new(origin: NodeId, seq: u64, payload_bits: u64, created_at: SimTime) -> Self {
        Packet {
            origin,
            seq,
            payload_bits,
            header_bits: 0,
            emitter: origin,
            created_at,
        }
    }

    pub fn key(&self) -> PacketKey {
        PacketKey {
            origin: self.origin,
            seq: self.seq,
        }
    }

    pub fn wire_bits(&self) -> u64 {
        self.payload_bits + self.header_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    DeliverAndRelay,
    DeliverOnly,
    DropDuplicate,
}

impl Action {
    pub fn delivers(self) -> bool {
        !matches!(self, Action::DropDuplicate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolConfig {
    pub hold_time: SimTime,
    pub duplicate_ttl: SimTime,
    pub header_bits_per_relay: u64,
    /// Emitter-eligibility check; when off, relays forward every first-seen
    /// packet.
    pub rule2: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            hold_time: SimTime::from_secs(6),
            duplicate_ttl: SimTime::from_secs(30),
            header_bits_per_relay: DEFAULT_HEADER_BITS_PER_RELAY,
            rule2: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeldPacket {
    pub received_at: SimTime,
    pub packet: Packet,
}

/// What [`NodeProtocolState::expire_caches`] removed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evicted {
    pub seen: Vec<PacketKey>,
    /// Held packets whose hold time elapsed, already stamped for
    /// retransmission (relay header added, emitter set to this node).
    pub flushed: Vec<Packet>,
}

#[derive(Debug, Clone)]
pub struct NodeProtocolState {
    pub node: NodeId,
    pub is_relay: bool,
    seen: BTreeMap<PacketKey, SimTime>,
    hold_buffer: Vec<HeldPacket>,
    cfg: ProtocolConfig,
}

impl NodeProtocolState {
    pub fn new(node: NodeId, is_relay: bool, cfg: ProtocolConfig) -> Self {
        NodeProtocolState {
            node,
            is_relay,
            seen: BTreeMap::new(),
            hold_buffer: Vec::new(),
            cfg,
        }
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn has_seen(&self, key: PacketKey) -> bool {
        self.seen.contains_key(&key)
    }

    pub fn held(&self) -> &[HeldPacket] {
        &self.hold_buffer
    }

    /// Records a packet this node originates so echoes count as duplicates.
    pub fn originate(&mut self, pkt: &Packet, now: SimTime) {
        self.evict_stale(now);
        self.seen.entry(pkt.key()).or_insert(now);
    }

    pub fn on_receive(
        &mut self,
        pkt: &Packet,
        relays: &RelayAssignment,
        topo_at_tx: &Topology,
        now: SimTime,
    ) -> Result<Action, ProtocolError> {
        let forward = |state: &Self| {
            state.is_relay && (!state.cfg.rule2 || state.emitter_eligible(pkt, relays))
        };
        self.receive(pkt, topo_at_tx, now, forward)
    }

    /// Classic flooding: any node forwards any first-seen packet once.
    pub fn blind_flood_on_receive(
        &mut self,
        pkt: &Packet,
        topo_at_tx: &Topology,
        now: SimTime,
    ) -> Result<Action, ProtocolError> {
        self.receive(pkt, topo_at_tx, now, |_| true)
    }

    fn receive(
        &mut self,
        pkt: &Packet,
        topo_at_tx: &Topology,
        now: SimTime,
        forward: impl Fn(&Self) -> bool,
    ) -> Result<Action, ProtocolError> {
        if !topo_at_tx.adjacent(self.node, pkt.emitter) {
            return Err(ProtocolError::NotANeighbor {
                node: self.node,
                emitter: pkt.emitter,
            });
        }
        self.evict_stale(now);
        if self.seen.contains_key(&pkt.key()) {
            return Ok(Action::DropDuplicate);
        }
        self.seen.insert(pkt.key(), now);
        if forward(self) {
            self.hold_buffer.push(HeldPacket {
                received_at: now,
                packet: pkt.clone(),
            });
            Ok(Action::DeliverAndRelay)
        } else {
            Ok(Action::DeliverOnly)
        }
    }

    /// True when the copy was sent by a node this relay serves, or by the
    /// packet's origin itself.
    pub fn emitter_eligible(&self, pkt: &Packet, relays: &RelayAssignment) -> bool {
        pkt.emitter == pkt.origin
            || relays
                .selectors_of(self.node)
                .is_some_and(|s| s.contains(&pkt.emitter))
    }

    /// Earliest instant at which a held packet becomes due.
    pub fn next_hold_deadline(&self) -> Option<SimTime> {
        self.hold_buffer
            .iter()
            .map(|h| h.received_at + self.cfg.hold_time)
            .min()
    }

    /// Drops seen-entries older than the duplicate TTL and flushes held
    /// packets that have waited at least the hold time.
    pub fn expire_caches(&mut self, now: SimTime) -> Evicted {
        let seen = self.evict_stale(now);
        let hold = self.cfg.hold_time;
        let (due, keep): (Vec<_>, Vec<_>) = self
            .hold_buffer
            .drain(..)
            .partition(|h| now.saturating_sub(h.received_at) >= hold);
        self.hold_buffer = keep;
        let flushed = due
            .into_iter()
            .map(|h| Packet {
                header_bits: h.packet.header_bits + self.cfg.header_bits_per_relay,
                emitter: self.node,
                ..h.packet
            })
            .collect();
        Evicted { seen, flushed }
    }

    fn evict_stale(&mut self, now: SimTime) -> Vec<PacketKey> {
        let ttl = self.cfg.duplicate_ttl;
        let stale: Vec<PacketKey> = self
            .seen
            .iter()
            .filter(|(_, &at)| now.saturating_sub(at) > ttl)
            .map(|(k, _)| *k)
            .collect();
        for k in &stale {
            self.seen.remove(k);
        }
        stale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::relay::select_relays;
    use crate::topology::{build_topology, Node, NodeSet, Position, Role};

    fn secs(s: u64) -> SimTime {
        SimTime::from_secs(s)
    }

    fn state_for(t: &Topology, node: NodeId) -> (NodeProtocolState, RelayAssignment) {
        let a = select_relays(t);
        let st = NodeProtocolState::new(node, a.is_relay(node), ProtocolConfig::default());
        (st, a)
    }

    #[test]
    fn client_only_delivers() {
        let t = fixtures::fig3();
        let (mut st, a) = state_for(&t, NodeId(4));
        let mut pkt = Packet::new(NodeId(0), 0, 2000, SimTime::ZERO);
        pkt.emitter = NodeId(1);
        assert_eq!(
            st.on_receive(&pkt, &a, &t, secs(1)).unwrap(),
            Action::DeliverOnly
        );
        assert!(st.held().is_empty());
    }

    #[test]
    fn relay_forwards_from_source_and_drops_duplicates() {
        let t = fixtures::fig3();
        let (mut st, a) = state_for(&t, NodeId(1));
        assert!(st.is_relay);
        let pkt = Packet::new(NodeId(0), 0, 2000, SimTime::ZERO);
        assert!(st.emitter_eligible(&pkt, &a));
        assert_eq!(
            st.on_receive(&pkt, &a, &t, SimTime::ZERO).unwrap(),
            Action::DeliverAndRelay
        );
        let mut echo = pkt.clone();
        echo.emitter = NodeId(2);
        echo.header_bits = 200;
        assert_eq!(
            st.on_receive(&echo, &a, &t, secs(6)).unwrap(),
            Action::DropDuplicate
        );
        assert_eq!(st.held().len(), 1);
    }

    #[test]
    fn relay_ignores_peer_it_does_not_serve() {
        // 0 - 1 - 2 - 3 with 1 and 2 both relays. Add node 4 next to 1 and 2
        // only: then every neighbor of 2 other than 4 is also a neighbor of 4,
        // so 2 bridges nothing for 4.
        let pos = [
            (0.0, 0.0),
            (100.0, 0.0),
            (200.0, 0.0),
            (300.0, 0.0),
            (150.0, 60.0),
        ];
        let nodes = pos
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Node {
                id: NodeId::from(i),
                role: if i == 0 { Role::Source } else { Role::Client },
                pos: Position::new(x, y),
            })
            .collect();
        let t = build_topology(NodeSet::new(nodes, 500.0).unwrap(), 110.0).unwrap();
        assert!(t.adjacent(NodeId(4), NodeId(1)) && t.adjacent(NodeId(4), NodeId(2)));
        assert!(!t.adjacent(NodeId(4), NodeId(3)) && !t.adjacent(NodeId(4), NodeId(0)));

        // Make 4 a relay; it bridges no pair, so it serves nobody.
        let mut a = select_relays(&t);
        a.relays.insert(NodeId(4));
        a.selectors
            .insert(NodeId(4), std::collections::BTreeSet::new());
        let mut st = NodeProtocolState::new(NodeId(4), true, ProtocolConfig::default());
        let mut copy = Packet::new(NodeId(0), 3, 2000, SimTime::ZERO);
        copy.emitter = NodeId(1);
        assert!(!st.emitter_eligible(&copy, &a));
        assert_eq!(
            st.on_receive(&copy, &a, &t, secs(1)).unwrap(),
            Action::DeliverOnly
        );

        // with rule 2 disabled the same copy is forwarded
        let cfg = ProtocolConfig {
            rule2: false,
            ..ProtocolConfig::default()
        };
        let mut st = NodeProtocolState::new(NodeId(4), true, cfg);
        assert_eq!(
            st.on_receive(&copy, &a, &t, secs(1)).unwrap(),
            Action::DeliverAndRelay
        );
    }

    #[test]
    fn non_neighbor_is_a_protocol_violation() {
        let t = fixtures::fig3();
        let (mut st, a) = state_for(&t, NodeId(4));
        let pkt = Packet::new(NodeId(0), 0, 2000, SimTime::ZERO);
        assert_eq!(
            st.on_receive(&pkt, &a, &t, SimTime::ZERO),
            Err(ProtocolError::NotANeighbor {
                node: NodeId(4),
                emitter: NodeId(0)
            })
        );
    }

    #[test]
    fn seen_cache_ttl() {
        let t = fixtures::path(2);
        let mut st = NodeProtocolState::new(NodeId(1), false, ProtocolConfig::default());
        let pkt = Packet::new(NodeId(0), 0, 2000, SimTime::ZERO);
        st.blind_flood_on_receive(&pkt, &t, SimTime::ZERO).unwrap();

        assert!(st.expire_caches(secs(29)).seen.is_empty());
        assert!(st.has_seen(pkt.key()));
        // exactly at the TTL the entry is still fresh
        assert!(st.expire_caches(secs(30)).seen.is_empty());
        assert_eq!(st.expire_caches(secs(31)).seen, vec![pkt.key()]);
        assert!(!st.has_seen(pkt.key()));
    }

    #[test]
    fn expired_entry_no_longer_suppresses() {
        let t = fixtures::path(2);
        let mut st = NodeProtocolState::new(NodeId(1), false, ProtocolConfig::default());
        let pkt = Packet::new(NodeId(0), 0, 2000, SimTime::ZERO);
        assert!(st
            .blind_flood_on_receive(&pkt, &t, SimTime::ZERO)
            .unwrap()
            .delivers());
        assert_eq!(
            st.blind_flood_on_receive(&pkt, &t, secs(30)).unwrap(),
            Action::DropDuplicate
        );
        assert_eq!(
            st.blind_flood_on_receive(&pkt, &t, secs(61)).unwrap(),
            Action::DeliverAndRelay
        );
    }

    #[test]
    fn hold_buffer_flushes_once_with_header() {
        let t = fixtures::path(3);
        let (mut st, a) = state_for(&t, NodeId(1));
        let pkt = Packet::new(NodeId(0), 9, 2000, SimTime::ZERO);
        st.on_receive(&pkt, &a, &t, secs(1)).unwrap();
        assert_eq!(st.next_hold_deadline(), Some(secs(7)));

        assert!(st
            .expire_caches(SimTime::from_micros(6_999_999))
            .flushed
            .is_empty());
        let out = st.expire_caches(secs(7)).flushed;
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].header_bits, 200);
        assert_eq!(out[0].wire_bits(), 2200);
        assert_eq!(out[0].emitter, NodeId(1));
        assert_eq!(out[0].origin, NodeId(0));
        assert!(st.expire_caches(secs(8)).flushed.is_empty());
        assert_eq!(st.next_hold_deadline(), None);
    }

    #[test]
    fn originated_packets_echo_as_duplicates() {
        let t = fixtures::path(2);
        let mut st = NodeProtocolState::new(NodeId(0), false, ProtocolConfig::default());
        let mut pkt = Packet::new(NodeId(0), 0, 2000, SimTime::ZERO);
        st.originate(&pkt, SimTime::ZERO);
        pkt.emitter = NodeId(1);
        assert_eq!(
            st.blind_flood_on_receive(&pkt, &t, secs(6)).unwrap(),
            Action::DropDuplicate
        );
    }
}
