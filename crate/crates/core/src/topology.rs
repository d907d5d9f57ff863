//! Node placement, unit-disk connectivity and neighborhood queries.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_AREA_SIDE: f64 = 500.0;

/// Relative slack applied to the range comparison so lattice placements with
/// spacing equal to the radio range stay connected despite rounding.
const RANGE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("scenario has no nodes")]
    EmptyScenario,
    #[error("area side must be positive and finite, got {0}")]
    InvalidArea(f64),
    #[error("radio range must be positive and finite, got {0}")]
    InvalidRange(f64),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node ids must be 0..n in order, found {found} at index {index}")]
    NonContiguousIds { index: usize, found: NodeId },
    #[error("expected exactly one source node, found {0}")]
    SourceCount(usize),
    #[error("node {id} at ({x}, {y}) lies outside the {side} m area")]
    OutOfArea {
        id: NodeId,
        x: f64,
        y: f64,
        side: f64,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("listed edges do not match the unit-disk graph for the given positions and range")]
    InconsistentEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Source,
    Client,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Source => "source",
            Role::Client => "client",
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "source" => Ok(Role::Source),
            "client" => Ok(Role::Client),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(self, other: Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub role: Role,
    pub pos: Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    Grid,
    UniformRandom,
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid" => Ok(Placement::Grid),
            "random" | "uniform" | "uniform_random" => Ok(Placement::UniformRandom),
            other => Err(format!("unknown placement `{other}`")),
        }
    }
}

/// A validated set of nodes: ids are `0..n`, exactly one source, every
/// position inside the square area.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    nodes: Vec<Node>,
    area_side: f64,
}

impl NodeSet {
    pub fn new(nodes: Vec<Node>, area_side: f64) -> Result<Self, TopologyError> {
        if !(area_side.is_finite() && area_side > 0.0) {
            return Err(TopologyError::InvalidArea(area_side));
        }
        if nodes.is_empty() {
            return Err(TopologyError::EmptyScenario);
        }
        for (index, n) in nodes.iter().enumerate() {
            if n.id.index() != index {
                return Err(TopologyError::NonContiguousIds { index, found: n.id });
            }
            let inside = |c: f64| c.is_finite() && (0.0..=area_side).contains(&c);
            if !inside(n.pos.x) || !inside(n.pos.y) {
                return Err(TopologyError::OutOfArea {
                    id: n.id,
                    x: n.pos.x,
                    y: n.pos.y,
                    side: area_side,
                });
            }
        }
        let sources = nodes.iter().filter(|n| n.role == Role::Source).count();
        if sources != 1 {
            return Err(TopologyError::SourceCount(sources));
        }
        Ok(NodeSet { nodes, area_side })
    }

    /// Moves the source role to `id`.
    pub fn with_source(mut self, id: NodeId) -> Result<Self, TopologyError> {
        if id.index() >= self.nodes.len() {
            return Err(TopologyError::UnknownNode(id));
        }
        for n in &mut self.nodes {
            n.role = if n.id == id {
                Role::Source
            } else {
                Role::Client
            };
        }
        Ok(self)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn area_side(&self) -> f64 {
        self.area_side
    }

    pub fn source(&self) -> NodeId {
        self.nodes
            .iter()
            .find(|n| n.role == Role::Source)
            .map(|n| n.id)
            .expect("validated node set has a source")
    }
}

/// Places `count` nodes in the square `[0, area_side]²`. Node 0 is the source.
///
/// Grid mode fills a `⌈√count⌉ × ⌈√count⌉` lattice spanning the whole area in
/// row-major order and drops the trailing cells. Random mode draws i.i.d.
/// uniform coordinates from a ChaCha8 stream seeded with `seed`.
pub fn place_nodes(
    count: usize,
    placement: Placement,
    area_side: f64,
    seed: u64,
) -> Result<NodeSet, TopologyError> {
    if count == 0 {
        return Err(TopologyError::EmptyScenario);
    }
    if !(area_side.is_finite() && area_side > 0.0) {
        return Err(TopologyError::InvalidArea(area_side));
    }
    let positions: Vec<Position> = match placement {
        Placement::Grid => {
            let side = grid_side(count);
            let spacing = grid_spacing(count, area_side);
            (0..count)
                .map(|i| {
                    let (row, col) = (i / side, i % side);
                    Position::new(col as f64 * spacing, row as f64 * spacing)
                })
                .collect()
        }
        Placement::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let x = rng.random_range(0.0..=area_side);
                    let y = rng.random_range(0.0..=area_side);
                    Position::new(x, y)
                })
                .collect()
        }
    };
    let nodes = positions
        .into_iter()
        .enumerate()
        .map(|(i, pos)| Node {
            id: NodeId::from(i),
            role: if i == 0 { Role::Source } else { Role::Client },
            pos,
        })
        .collect();
    NodeSet::new(nodes, area_side)
}

/// Lattice side length used by grid placement.
pub fn grid_side(count: usize) -> usize {
    let mut side = (count as f64).sqrt().ceil() as usize;
    while side * side < count {
        side += 1;
    }
    while side > 1 && (side - 1) * (side - 1) >= count {
        side -= 1;
    }
    side
}

/// Distance between adjacent lattice points; zero for a single-point lattice.
pub fn grid_spacing(count: usize, area_side: f64) -> f64 {
    let side = grid_side(count);
    if side <= 1 {
        0.0
    } else {
        area_side / (side - 1) as f64
    }
}

/// Unit-disk connectivity over a node set, plus the reconfiguration epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: NodeSet,
    radio_range: f64,
    adjacency: Vec<Vec<NodeId>>,
    epoch: u64,
}

pub fn build_topology(nodes: NodeSet, radio_range: f64) -> Result<Topology, TopologyError> {
    if !(radio_range.is_finite() && radio_range > 0.0) {
        return Err(TopologyError::InvalidRange(radio_range));
    }
    let adjacency = disk_adjacency(nodes.nodes(), radio_range);
    Ok(Topology {
        nodes,
        radio_range,
        adjacency,
        epoch: 0,
    })
}

pub fn within_range(a: Position, b: Position, radio_range: f64) -> bool {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    dx * dx + dy * dy <= radio_range * radio_range * (1.0 + RANGE_EPSILON)
}

fn disk_adjacency(nodes: &[Node], radio_range: f64) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); nodes.len()];
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if within_range(a.pos, b.pos, radio_range) {
                adj[i].push(b.id);
                adj[b.id.index()].push(a.id);
            }
        }
    }
    // pushes happen in ascending order of the other endpoint already
    debug_assert!(adj.iter().all(|l| l.windows(2).all(|w| w[0] < w[1])));
    adj
}

impl Topology {
    pub fn node_set(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn nodes(&self) -> &[Node] {
        self.nodes.nodes()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().iter().map(|n| n.id)
    }

    pub fn radio_range(&self) -> f64 {
        self.radio_range
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn source(&self) -> NodeId {
        self.nodes.source()
    }

    pub fn position(&self, u: NodeId) -> Result<Position, TopologyError> {
        self.check(u)?;
        Ok(self.nodes()[u.index()].pos)
    }

    fn check(&self, u: NodeId) -> Result<(), TopologyError> {
        if u.index() < self.len() {
            Ok(())
        } else {
            Err(TopologyError::UnknownNode(u))
        }
    }

    /// Direct neighbors of `u`, ascending.
    pub fn one_hop(&self, u: NodeId) -> Result<&[NodeId], TopologyError> {
        self.check(u)?;
        Ok(&self.adjacency[u.index()])
    }

    /// Nodes reachable in exactly two hops: neighbors of neighbors, minus the
    /// 1-hop set and `u` itself.
    pub fn two_hop(&self, u: NodeId) -> Result<BTreeSet<NodeId>, TopologyError> {
        let direct = self.one_hop(u)?;
        let mut out = BTreeSet::new();
        for &m in direct {
            for &w in &self.adjacency[m.index()] {
                if w != u && !self.adjacent(u, w) {
                    out.insert(w);
                }
            }
        }
        Ok(out)
    }

    /// Adjacency test; unknown ids are simply not adjacent.
    pub fn adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u.index())
            .is_some_and(|l| l.binary_search(&v).is_ok())
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency.get(u.index()).map_or(0, Vec::len)
    }

    /// Undirected edges `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, l)| {
            let u = NodeId::from(i);
            l.iter().filter(move |&&v| u < v).map(move |&v| (u, v))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Nodes reachable from `start`, including `start`.
    pub fn component(&self, start: NodeId) -> Result<BTreeSet<NodeId>, TopologyError> {
        self.check(start)?;
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([start]);
        seen[start.index()] = true;
        let mut out = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            out.insert(u);
            for &v in &self.adjacency[u.index()] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    queue.push_back(v);
                }
            }
        }
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        if self.len() <= 1 {
            return true;
        }
        self.component(NodeId(0))
            .map(|c| c.len() == self.len())
            .unwrap_or(true)
    }

    /// True when both topologies have the same node count and edge set.
    pub fn same_adjacency(&self, other: &Topology) -> bool {
        self.adjacency == other.adjacency
    }

    /// Moves every non-source node by a seeded uniform displacement of at most
    /// `max_displacement` meters (clamped to the area), rebuilds adjacency and
    /// bumps the epoch.
    pub fn reconfigure(&self, max_displacement: f64, seed: u64) -> Topology {
        let mut next = self.clone();
        next.epoch += 1;
        if max_displacement.is_nan() || max_displacement <= 0.0 {
            return next;
        }
        let side = self.nodes.area_side();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for n in &mut next.nodes.nodes {
            if n.role == Role::Source {
                continue;
            }
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let r = max_displacement * rng.random_range(0.0f64..=1.0).sqrt();
            n.pos.x = (n.pos.x + r * theta.cos()).clamp(0.0, side);
            n.pos.y = (n.pos.y + r * theta.sin()).clamp(0.0, side);
        }
        next.adjacency = disk_adjacency(next.nodes.nodes(), next.radio_range);
        next
    }

    /// Plain-text export: `n <count> range <m>`, then `node` and `edge` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("n {} range {}\n", self.len(), self.radio_range);
        for n in self.nodes() {
            out.push_str(&format!(
                "node {} {} {} {}\n",
                n.id,
                n.pos.x,
                n.pos.y,
                n.role.as_str()
            ));
        }
        for (u, v) in self.edges() {
            out.push_str(&format!("edge {u} {v}\n"));
        }
        out
    }

    /// Parses the format written by [`Topology::to_text`]. Positions and range
    /// determine the adjacency; the listed edges must agree with it. The area
    /// is the default 500 m square, widened to fit any larger coordinate.
    pub fn from_text(text: &str) -> Result<Topology, TopologyError> {
        let mut header: Option<(usize, f64)> = None;
        let mut nodes = Vec::new();
        let mut edges = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: &str| TopologyError::Parse {
                line,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = raw.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                ["n", count, "range", range] => {
                    if header.is_some() {
                        return Err(err("duplicate header"));
                    }
                    let count = count.parse().map_err(|_| err("bad node count"))?;
                    let range = range.parse().map_err(|_| err("bad range"))?;
                    header = Some((count, range));
                }
                ["node", id, x, y, role] => {
                    let id: u32 = id.parse().map_err(|_| err("bad node id"))?;
                    let x: f64 = x.parse().map_err(|_| err("bad x"))?;
                    let y: f64 = y.parse().map_err(|_| err("bad y"))?;
                    let role: Role = role.parse().map_err(|e: String| err(&e))?;
                    nodes.push(Node {
                        id: NodeId(id),
                        role,
                        pos: Position::new(x, y),
                    });
                }
                ["edge", u, v] => {
                    let u: u32 = u.parse().map_err(|_| err("bad edge endpoint"))?;
                    let v: u32 = v.parse().map_err(|_| err("bad edge endpoint"))?;
                    if u == v {
                        return Err(err("self-loop"));
                    }
                    edges.insert((NodeId(u.min(v)), NodeId(u.max(v))));
                }
                _ => return Err(err("unrecognised line")),
            }
            if header.is_none() {
                return Err(err("missing `n <count> range <m>` header"));
            }
        }
        let (count, range) = header.ok_or(TopologyError::EmptyScenario)?;
        if nodes.len() != count {
            return Err(TopologyError::Parse {
                line: 1,
                msg: format!("header says {count} nodes, found {}", nodes.len()),
            });
        }
        nodes.sort_by_key(|n| n.id);
        let area = nodes
            .iter()
            .flat_map(|n| [n.pos.x, n.pos.y])
            .fold(DEFAULT_AREA_SIDE, f64::max);
        let topo = build_topology(NodeSet::new(nodes, area)?, range)?;
        if topo.edges().collect::<BTreeSet<_>>() != edges {
            return Err(TopologyError::InconsistentEdges);
        }
        Ok(topo)
    }
}
