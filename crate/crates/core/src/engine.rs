//! Deterministic discrete-event loop.
//!
//! Time is integer microseconds. Events at the same instant run in a fixed
//! kind order (topology first, traffic next, metrics last), then by subject
//! node, then by insertion order, so a run is a pure function of its config.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::rc::Rc;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fixtures::DEFAULT_RANGE;
use crate::metrics::{Counter, MetricsError, MetricsSeries, ScenarioInfo, Summary};
use crate::protocol::{
    Action, NodeProtocolState, Packet, PacketKey, ProtocolConfig, ProtocolError,
    DEFAULT_HEADER_BITS_PER_RELAY, DEFAULT_PAYLOAD_BITS,
};
use crate::relay::{cardinality_report, select_relays_with, CandidateOrder, RelayAssignment};
use crate::time::SimTime;
use crate::topology::{
    build_topology, place_nodes, NodeId, Placement, Topology, TopologyError, DEFAULT_AREA_SIDE,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    RelayFlood,
    BlindFlood,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::RelayFlood => "relay",
            Mode::BlindFlood => "blind",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relay" => Ok(Mode::RelayFlood),
            "blind" => Ok(Mode::BlindFlood),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// What happens to a copy whose receiver moved out of range while it was on
/// the air.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum InflightPolicy {
    #[default]
    Deliver,
    Drop,
}

impl InflightPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            InflightPolicy::Deliver => "deliver",
            InflightPolicy::Drop => "drop",
        }
    }
}

impl FromStr for InflightPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deliver" => Ok(InflightPolicy::Deliver),
            "drop" => Ok(InflightPolicy::Drop),
            other => Err(format!("unknown inflight policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub node_count: usize,
    pub placement: Placement,
    pub area_side: f64,
    pub radio_range: f64,
    pub channel_bps: u64,
    /// Recorded only; the unit-disk model does not use it.
    pub tx_power_mw: f64,
    pub payload_bits: u64,
    pub header_bits_per_relay: u64,
    pub packet_interval_s: f64,
    pub topo_control_interval_s: f64,
    pub hold_time_s: f64,
    pub topo_stability_s: f64,
    pub duplicate_ttl_s: f64,
    pub sim_duration_s: f64,
    /// Extra time after `sim_duration_s` for in-flight relays to finish. No
    /// new source packets are emitted during the drain.
    pub drain_s: f64,
    pub mode: Mode,
    pub rule2: bool,
    pub inflight: InflightPolicy,
    /// Re-emit the same sequence number every interval instead of fresh ones.
    pub repeat_seq: bool,
    pub candidate_order: CandidateOrder,
    /// Maximum displacement per reconfiguration, meters. Zero means static.
    pub mobility_m: f64,
    pub seed: u64,
    pub source: NodeId,
    /// `(from_s, payload_bits)` steps overriding `payload_bits`, ascending.
    pub rate_schedule: Vec<(f64, u64)>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            node_count: 25,
            placement: Placement::Grid,
            area_side: DEFAULT_AREA_SIDE,
            radio_range: DEFAULT_RANGE,
            channel_bps: 11_000_000,
            tx_power_mw: 5.0,
            payload_bits: DEFAULT_PAYLOAD_BITS,
            header_bits_per_relay: DEFAULT_HEADER_BITS_PER_RELAY,
            packet_interval_s: 2.0,
            topo_control_interval_s: 5.0,
            hold_time_s: 6.0,
            topo_stability_s: 15.0,
            duplicate_ttl_s: 30.0,
            sim_duration_s: 300.0,
            drain_s: 120.0,
            mode: Mode::RelayFlood,
            rule2: true,
            inflight: InflightPolicy::Deliver,
            repeat_seq: false,
            candidate_order: CandidateOrder::Ascending,
            mobility_m: 0.0,
            seed: 0,
            source: NodeId(0),
            rate_schedule: Vec::new(),
        }
    }
}

fn secs(name: &str, v: f64, allow_zero: bool) -> Result<SimTime, SimError> {
    let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
    let t = SimTime::from_secs_f64(v).filter(|_| ok);
    let t = t.ok_or_else(|| SimError::InvalidConfig(format!("{name} must be > 0, got {v}")))?;
    if !allow_zero && t == SimTime::ZERO {
        return Err(SimError::InvalidConfig(format!("{name} rounds to zero")));
    }
    Ok(t)
}

/// Durations converted to simulation time, after validation.
#[derive(Debug, Clone, Copy)]
struct Timers {
    interval: SimTime,
    control: SimTime,
    hold: SimTime,
    stability: SimTime,
    ttl: SimTime,
    duration: SimTime,
    horizon: SimTime,
}

impl SimConfig {
    fn timers(&self) -> Result<Timers, SimError> {
        let interval = secs("packet_interval_s", self.packet_interval_s, false)?;
        let duration = secs("sim_duration_s", self.sim_duration_s, false)?;
        if duration < interval {
            return Err(SimError::InvalidConfig(
                "sim_duration_s must be at least packet_interval_s".into(),
            ));
        }
        let drain = secs("drain_s", self.drain_s, true)?;
        let horizon_s = (duration + drain).as_micros().div_ceil(1_000_000);
        Ok(Timers {
            interval,
            control: secs(
                "topo_control_interval_s",
                self.topo_control_interval_s,
                false,
            )?,
            hold: secs("hold_time_s", self.hold_time_s, false)?,
            stability: secs("topo_stability_s", self.topo_stability_s, false)?,
            ttl: secs("duplicate_ttl_s", self.duplicate_ttl_s, false)?,
            duration,
            horizon: SimTime::from_secs(horizon_s),
        })
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.timers()?;
        if self.channel_bps == 0 {
            return Err(SimError::InvalidConfig("channel_bps must be > 0".into()));
        }
        if !(self.mobility_m.is_finite() && self.mobility_m >= 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "mobility_m must be >= 0, got {}",
                self.mobility_m
            )));
        }
        let mut prev = f64::NEG_INFINITY;
        for &(at, _) in &self.rate_schedule {
            if !(at.is_finite() && at >= 0.0 && at >= prev) {
                return Err(SimError::InvalidConfig(
                    "rate_schedule times must be finite, non-negative and ascending".into(),
                ));
            }
            prev = at;
        }
        Ok(())
    }

    pub fn protocol(&self) -> Result<ProtocolConfig, SimError> {
        let t = self.timers()?;
        Ok(ProtocolConfig {
            hold_time: t.hold,
            duplicate_ttl: t.ttl,
            header_bits_per_relay: self.header_bits_per_relay,
            rule2: self.rule2,
        })
    }

    fn payload_at(&self, t: SimTime) -> u64 {
        let now = t.as_secs_f64();
        self.rate_schedule
            .iter()
            .take_while(|(at, _)| *at <= now)
            .last()
            .map_or(self.payload_bits, |&(_, bits)| bits)
    }

    /// Every field as `config.<name>` keys, for self-describing outputs.
    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let schedule = self
            .rate_schedule
            .iter()
            .map(|(t, b)| format!("{t}:{b}"))
            .collect::<Vec<_>>()
            .join(",");
        let placement = match self.placement {
            Placement::Grid => "grid",
            Placement::UniformRandom => "random",
        };
        [
            ("area_side", self.area_side.to_string()),
            ("candidate_order", self.candidate_order.as_str().to_string()),
            ("channel_bps", self.channel_bps.to_string()),
            ("drain_s", self.drain_s.to_string()),
            ("duplicate_ttl_s", self.duplicate_ttl_s.to_string()),
            (
                "header_bits_per_relay",
                self.header_bits_per_relay.to_string(),
            ),
            ("hold_time_s", self.hold_time_s.to_string()),
            ("inflight", self.inflight.as_str().to_string()),
            ("mobility_m", self.mobility_m.to_string()),
            ("mode", self.mode.as_str().to_string()),
            ("node_count", self.node_count.to_string()),
            ("packet_interval_s", self.packet_interval_s.to_string()),
            ("payload_bits", self.payload_bits.to_string()),
            ("placement", placement.to_string()),
            ("radio_range", self.radio_range.to_string()),
            ("rate_schedule", schedule),
            ("repeat_seq", self.repeat_seq.to_string()),
            ("rule2", self.rule2.to_string()),
            ("seed", self.seed.to_string()),
            ("sim_duration_s", self.sim_duration_s.to_string()),
            ("source", self.source.to_string()),
            (
                "topo_control_interval_s",
                self.topo_control_interval_s.to_string(),
            ),
            ("topo_stability_s", self.topo_stability_s.to_string()),
            ("tx_power_mw", self.tx_power_mw.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (format!("config.{k}"), v))
        .collect()
    }

    /// Identifies the scenario independently of mode and forwarding flags,
    /// so optimized and blind runs of the same scenario compare equal.
    pub fn fingerprint(&self, topology: &Topology) -> String {
        let mut h = Sha256::new();
        h.update(topology.to_text().as_bytes());
        let schedule: Vec<String> = self
            .rate_schedule
            .iter()
            .map(|(t, b)| format!("{t}:{b}"))
            .collect();
        let fields = format!(
            "seed={} dur={} interval={} payload={} header={} schedule={} mobility={} \
             hold={} ttl={} control={} stability={} drain={} bps={} repeat={}",
            self.seed,
            self.sim_duration_s,
            self.packet_interval_s,
            self.payload_bits,
            self.header_bits_per_relay,
            schedule.join(","),
            self.mobility_m,
            self.hold_time_s,
            self.duplicate_ttl_s,
            self.topo_control_interval_s,
            self.topo_stability_s,
            self.drain_s,
            self.channel_bps,
            self.repeat_seq,
        );
        h.update(fields.as_bytes());
        h.finalize()[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    TopoReconfigure,
    TopoControl,
    CacheExpiry,
    EmitFromSource,
    RelayEmit,
    Deliver,
    MetricsTick,
}

#[derive(Debug, Clone)]
pub enum Payload {
    None,
    Emission { index: u64 },
    Delivery { packet: Packet, topo: Rc<Topology> },
}

#[derive(Debug, Clone)]
pub struct Event {
    pub time: SimTime,
    pub kind: EventKind,
    pub subject: NodeId,
    insertion: u64,
    pub payload: Payload,
}

impl Event {
    fn order_key(&self) -> (SimTime, EventKind, NodeId, u64) {
        (self.time, self.kind, self.subject, self.insertion)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.order_key() == other.order_key()
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

/// Min-queue of events under `(time, kind, subject, insertion)`.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    inserted: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: SimTime, kind: EventKind, subject: NodeId, payload: Payload) {
        let insertion = self.inserted;
        self.inserted += 1;
        self.heap.push(Reverse(Event {
            time,
            kind,
            subject,
            insertion,
            payload,
        }));
    }

    /// `None` once the queue is exhausted.
    pub fn next_event(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reception {
    pub receiver: NodeId,
    pub at: SimTime,
}

/// Broadcast on the shared channel: every current neighbor of `emitter`
/// gets a copy once the packet has been serialized.
pub fn transmit(
    t: &Topology,
    emitter: NodeId,
    pkt: &Packet,
    now: SimTime,
    channel_bps: u64,
) -> Result<Vec<Reception>, TopologyError> {
    let at = now + SimTime::serialization(pkt.wire_bits(), channel_bps);
    Ok(t.one_hop(emitter)?
        .iter()
        .map(|&receiver| Reception { receiver, at })
        .collect())
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: MetricsSeries,
    pub info: ScenarioInfo,
    pub initial_topology: Topology,
    pub initial_assignment: RelayAssignment,
    pub final_topology: Topology,
}

impl RunOutput {
    pub fn summary(&self) -> Summary {
        Summary::from_run(&self.series, &self.info)
    }
}

/// Places nodes per `cfg`, builds the disk graph and runs it.
pub fn run(cfg: &SimConfig) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    let nodes = place_nodes(cfg.node_count, cfg.placement, cfg.area_side, cfg.seed)?
        .with_source(cfg.source)?;
    let topology = build_topology(nodes, cfg.radio_range)?;
    run_with_topology(cfg, topology)
}

/// Runs `cfg` on a prepared topology; its source node originates the flood.
/// Placement fields of `cfg` are ignored.
pub fn run_with_topology(cfg: &SimConfig, topology: Topology) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    let timers = cfg.timers()?;
    Sim::new(cfg, timers, topology)?.run()
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    timers: Timers,
    source: NodeId,
    topo: Rc<Topology>,
    assigned_on: Rc<Topology>,
    assignment: RelayAssignment,
    initial_topology: Topology,
    initial_assignment: RelayAssignment,
    states: Vec<NodeProtocolState>,
    queue: EventQueue,
    series: MetricsSeries,
    relayed: HashSet<(NodeId, PacketKey)>,
    delivered: HashSet<(NodeId, PacketKey)>,
    sent_bits: u64,
    relay_loop_violations: u64,
    repeat_deliveries: u64,
    relay_recomputations: u64,
    cancelled: u64,
    out_of_order: u64,
    channel_warned: bool,
    warnings: Vec<String>,
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a SimConfig, timers: Timers, topology: Topology) -> Result<Self, SimError> {
        let proto = cfg.protocol()?;
        let source = topology.source();
        let assignment = select_relays_with(&topology, cfg.candidate_order);
        let states = topology
            .ids()
            .map(|id| NodeProtocolState::new(id, assignment.is_relay(id), proto))
            .collect();
        let mut warnings = Vec::new();
        if !topology.is_connected() {
            warnings.push("topology disconnected at t=0".to_string());
        }
        let topo = Rc::new(topology);
        Ok(Sim {
            cfg,
            timers,
            source,
            initial_topology: (*topo).clone(),
            initial_assignment: assignment.clone(),
            assigned_on: Rc::clone(&topo),
            topo,
            assignment,
            states,
            queue: EventQueue::new(),
            series: MetricsSeries::new(timers.horizon.bucket()),
            relayed: HashSet::new(),
            delivered: HashSet::new(),
            sent_bits: 0,
            relay_loop_violations: 0,
            repeat_deliveries: 0,
            relay_recomputations: 1,
            cancelled: 0,
            out_of_order: 0,
            channel_warned: false,
            warnings,
        })
    }

    fn schedule_periodic(&mut self, every: SimTime, until: SimTime, kind: EventKind) {
        let mut t = every;
        while t < until {
            self.queue.schedule(t, kind, NodeId(0), Payload::None);
            t = t + every;
        }
    }

    fn run(mut self) -> Result<RunOutput, SimError> {
        let Timers {
            interval,
            control,
            stability,
            duration,
            horizon,
            ..
        } = self.timers;

        let mut t = SimTime::ZERO;
        let mut index = 0;
        while t < duration {
            let payload = Payload::Emission { index };
            self.queue
                .schedule(t, EventKind::EmitFromSource, self.source, payload);
            index += 1;
            t = t + interval;
        }
        self.schedule_periodic(control, duration, EventKind::TopoControl);
        if self.cfg.mobility_m > 0.0 {
            self.schedule_periodic(stability, duration, EventKind::TopoReconfigure);
        }
        let second = SimTime::from_secs(1);
        self.schedule_periodic(second, horizon, EventKind::CacheExpiry);
        self.schedule_periodic(second, horizon, EventKind::MetricsTick);

        let mut last = SimTime::ZERO;
        while let Some(ev) = self.queue.next_event() {
            if ev.time >= horizon {
                break;
            }
            if ev.time < last {
                self.out_of_order += 1;
            }
            last = ev.time;
            self.handle(ev)?;
        }

        Ok(self.finish())
    }

    fn handle(&mut self, ev: Event) -> Result<(), SimError> {
        let now = ev.time;
        match (ev.kind, ev.payload) {
            (EventKind::EmitFromSource, Payload::Emission { index }) => {
                let seq = if self.cfg.repeat_seq { 0 } else { index };
                let pkt = Packet::new(self.source, seq, self.cfg.payload_at(now), now);
                self.states[self.source.index()].originate(&pkt, now);
                self.emit(self.source, pkt, now, false)?;
            }
            (EventKind::RelayEmit, _) => {
                let flushed = self.states[ev.subject.index()].expire_caches(now).flushed;
                for pkt in flushed {
                    self.emit(ev.subject, pkt, now, true)?;
                }
            }
            (EventKind::CacheExpiry, _) => {
                for i in 0..self.states.len() {
                    let flushed = self.states[i].expire_caches(now).flushed;
                    for pkt in flushed {
                        self.emit(NodeId::from(i), pkt, now, true)?;
                    }
                }
            }
            (EventKind::Deliver, Payload::Delivery { packet, topo }) => {
                self.deliver(ev.subject, &packet, &topo, now)?;
            }
            (EventKind::TopoControl, _) => self.topology_control(),
            (EventKind::TopoReconfigure, _) => {
                let epoch = self.topo.epoch() + 1;
                let seed = self.cfg.seed ^ epoch.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                self.topo = Rc::new(self.topo.reconfigure(self.cfg.mobility_m, seed));
            }
            (EventKind::MetricsTick, _) => self.check_channel(now),
            (kind, _) => unreachable!("{kind:?} event scheduled without its payload"),
        }
        Ok(())
    }

    fn emit(
        &mut self,
        node: NodeId,
        pkt: Packet,
        now: SimTime,
        relay: bool,
    ) -> Result<(), SimError> {
        let pkt = Packet {
            emitter: node,
            ..pkt
        };
        let receptions = transmit(&self.topo, node, &pkt, now, self.cfg.channel_bps)?;
        let arrival = now + SimTime::serialization(pkt.wire_bits(), self.cfg.channel_bps);
        if arrival >= self.timers.horizon {
            self.cancelled += 1;
            return Ok(());
        }
        let wire = pkt.wire_bits() as i64;
        let (bits, packets) = if relay {
            if !self.relayed.insert((node, pkt.key())) {
                self.relay_loop_violations += 1;
            }
            (Counter::BitsRelayed, Counter::PacketsRelayed)
        } else {
            (Counter::BitsSent, Counter::PacketsSent)
        };
        self.series.record(now, node, bits, wire)?;
        self.series.record(now, node, packets, 1)?;
        self.sent_bits += pkt.wire_bits() * receptions.len() as u64;
        for r in receptions {
            let payload = Payload::Delivery {
                packet: pkt.clone(),
                topo: Rc::clone(&self.topo),
            };
            self.queue
                .schedule(r.at, EventKind::Deliver, r.receiver, payload);
        }
        Ok(())
    }

    fn deliver(
        &mut self,
        receiver: NodeId,
        pkt: &Packet,
        topo_at_tx: &Topology,
        now: SimTime,
    ) -> Result<(), SimError> {
        let wire = pkt.wire_bits() as i64;
        if self.cfg.inflight == InflightPolicy::Drop && !self.topo.adjacent(pkt.emitter, receiver) {
            self.series.record(now, receiver, Counter::BitsLost, wire)?;
            self.series.record(now, receiver, Counter::PacketsLost, 1)?;
            return Ok(());
        }
        let state = &mut self.states[receiver.index()];
        let action = match self.cfg.mode {
            Mode::RelayFlood => state.on_receive(pkt, &self.assignment, topo_at_tx, now)?,
            Mode::BlindFlood => state.blind_flood_on_receive(pkt, topo_at_tx, now)?,
        };
        if action == Action::DropDuplicate {
            self.series
                .record(now, receiver, Counter::BitsReceivedDup, wire)?;
            self.series
                .record(now, receiver, Counter::PacketsReceivedDup, 1)?;
            return Ok(());
        }
        self.series
            .record(now, receiver, Counter::BitsReceivedFirst, wire)?;
        self.series
            .record(now, receiver, Counter::PacketsReceivedFirst, 1)?;
        if !self.delivered.insert((receiver, pkt.key())) {
            self.repeat_deliveries += 1;
        }
        if action == Action::DeliverAndRelay {
            self.queue.schedule(
                now + self.timers.hold,
                EventKind::RelayEmit,
                receiver,
                Payload::None,
            );
        }
        Ok(())
    }

    fn topology_control(&mut self) {
        if self.topo.epoch() == self.assignment.epoch {
            return;
        }
        if self.topo.same_adjacency(&self.assigned_on) {
            self.assignment = self.assignment.restamped(self.topo.epoch());
            return;
        }
        self.assignment = select_relays_with(&self.topo, self.cfg.candidate_order);
        self.assigned_on = Rc::clone(&self.topo);
        self.relay_recomputations += 1;
        for s in &mut self.states {
            s.is_relay = self.assignment.is_relay(s.node);
        }
    }

    fn check_channel(&mut self, now: SimTime) {
        if self.channel_warned || now.bucket() == 0 {
            return;
        }
        let bucket = now.bucket() - 1;
        for id in self.topo.ids() {
            let bits = self.series.bucket(bucket, id, Counter::BitsSent)
                + self.series.bucket(bucket, id, Counter::BitsRelayed);
            if bits > self.cfg.channel_bps {
                self.warnings.push(format!(
                    "node {id} emitted {bits} bits in second {bucket}, above channel capacity"
                ));
                self.channel_warned = true;
                return;
            }
        }
    }

    fn finish(self) -> RunOutput {
        let reachable = self
            .initial_topology
            .component(self.source)
            .expect("source is a topology node")
            .into_iter()
            .filter(|n| *n != self.source)
            .collect();
        let cardinality = cardinality_report(&self.initial_topology, &self.initial_assignment)
            .expect("initial assignment matches initial epoch");
        let info = ScenarioInfo {
            mode: self.cfg.mode.as_str().to_string(),
            fingerprint: self.cfg.fingerprint(&self.initial_topology),
            node_count: self.initial_topology.len(),
            source: self.source,
            connected_at_start: self.initial_topology.is_connected(),
            reachable,
            relay_set_size: self.initial_assignment.relays.len(),
            cardinality,
            relay_recomputations: self.relay_recomputations,
            relay_loop_violations: self.relay_loop_violations,
            repeat_deliveries: self.repeat_deliveries,
            sent_bits: self.sent_bits,
            held_at_end: self.states.iter().map(|s| s.held().len() as u64).sum(),
            cancelled_relays: self.cancelled,
            channel_bps: self.cfg.channel_bps,
            out_of_order_events: self.out_of_order,
            warnings: self.warnings,
        };
        RunOutput {
            series: self.series,
            info,
            initial_topology: self.initial_topology,
            initial_assignment: self.initial_assignment,
            final_topology: (*self.topo).clone(),
        }
    }
}
