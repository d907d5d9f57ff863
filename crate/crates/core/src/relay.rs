//! Relay-set selection over 2-hop neighbor pairs.
//!
//! A *2-hop pair* is an unordered pair `{u, w}` with `w` exactly two hops from
//! `u`. A node `r` *bridges* the pair when it is adjacent to both ends. A relay
//! set is a valid cover when every 2-hop pair has at least one bridging relay.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::topology::{NodeId, Topology};

pub const DEFAULT_ORACLE_MAX_N: usize = 12;

pub type Pair = (NodeId, NodeId);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelayError {
    #[error("topology has {nodes} nodes, exhaustive search is limited to {max_n}")]
    SizeLimit { nodes: usize, max_n: usize },
    #[error("relay assignment is for epoch {assignment}, topology is at epoch {topology}")]
    StaleAssignment { assignment: u64, topology: u64 },
}

/// Order in which candidates are offered to the greedy pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum CandidateOrder {
    #[default]
    Ascending,
    Descending,
    /// Highest degree first, ties by ascending id.
    DegreeDescending,
}

impl CandidateOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateOrder::Ascending => "ascending",
            CandidateOrder::Descending => "descending",
            CandidateOrder::DegreeDescending => "degree",
        }
    }
}

impl FromStr for CandidateOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascending" => Ok(CandidateOrder::Ascending),
            "descending" => Ok(CandidateOrder::Descending),
            "degree" | "degree_descending" => Ok(CandidateOrder::DegreeDescending),
            other => Err(format!("unknown candidate order `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayAssignment {
    pub relays: BTreeSet<NodeId>,
    /// For each relay, the neighbors `u` for which it bridges at least one
    /// 2-hop pair `{u, w}`.
    pub selectors: BTreeMap<NodeId, BTreeSet<NodeId>>,
    /// Pairs `(u, w)` with `w` two hops from `u`, marked covered during
    /// selection. Both orientations of every pair are present.
    pub covered_pairs: BTreeSet<Pair>,
    pub epoch: u64,
    /// Bridge tests performed by the greedy pass: one per (candidate, neighbor
    /// pair) examined.
    pub bridge_tests: u64,
}

impl RelayAssignment {
    pub fn is_relay(&self, u: NodeId) -> bool {
        self.relays.contains(&u)
    }

    pub fn selectors_of(&self, r: NodeId) -> Option<&BTreeSet<NodeId>> {
        self.selectors.get(&r)
    }

    /// Same assignment re-stamped for a later epoch with identical adjacency.
    pub fn restamped(&self, epoch: u64) -> RelayAssignment {
        RelayAssignment {
            epoch,
            ..self.clone()
        }
    }

    /// `relay <id> selectors <id list>` per relay, ascending.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.relays {
            write!(out, "relay {r} selectors").unwrap();
            for s in self.selectors.get(r).into_iter().flatten() {
                write!(out, " {s}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// All pairs `(u, w)` with `w` in the strict 2-hop neighborhood of `u`.
pub fn two_hop_pairs(t: &Topology) -> BTreeSet<Pair> {
    t.ids()
        .flat_map(|u| {
            t.two_hop(u)
                .expect("id from topology")
                .into_iter()
                .map(move |w| (u, w))
        })
        .collect()
}

/// Greedy relay selection with ascending candidate order.
pub fn select_relays(t: &Topology) -> RelayAssignment {
    select_relays_with(t, CandidateOrder::Ascending)
}

/// Walks candidates in `order`; a candidate becomes a relay iff it bridges a
/// pair that is still uncovered, and then every pair it bridges is marked
/// covered. Stops once nothing is left uncovered.
pub fn select_relays_with(t: &Topology, order: CandidateOrder) -> RelayAssignment {
    let total = two_hop_pairs(t).len();
    let mut covered: BTreeSet<Pair> = BTreeSet::new();
    let mut relays = BTreeSet::new();
    let mut bridge_tests = 0u64;

    let mut candidates: Vec<NodeId> = t.ids().collect();
    match order {
        CandidateOrder::Ascending => {}
        CandidateOrder::Descending => candidates.reverse(),
        CandidateOrder::DegreeDescending => {
            candidates.sort_by(|a, b| t.degree(*b).cmp(&t.degree(*a)).then(a.cmp(b)))
        }
    }

    for v in candidates {
        if covered.len() == total {
            break;
        }
        let mut bridged = Vec::new();
        let nbrs = t.one_hop(v).expect("id from topology");
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                bridge_tests += 1;
                if !t.adjacent(a, b) {
                    bridged.push((a, b));
                    bridged.push((b, a));
                }
            }
        }
        if bridged.iter().any(|p| !covered.contains(p)) {
            relays.insert(v);
            covered.extend(bridged);
        }
    }
    debug_assert_eq!(covered.len(), total);

    let selectors = relays
        .iter()
        .map(|&r| (r, bridged_neighbors(t, r)))
        .collect();

    RelayAssignment {
        relays,
        selectors,
        covered_pairs: covered,
        epoch: t.epoch(),
        bridge_tests,
    }
}

fn bridged_neighbors(t: &Topology, r: NodeId) -> BTreeSet<NodeId> {
    let nbrs = t.one_hop(r).expect("id from topology");
    nbrs.iter()
        .copied()
        .filter(|&u| nbrs.iter().any(|&w| w != u && !t.adjacent(u, w)))
        .collect()
}

/// Every pair `(u, w)`, `w` two hops from `u`, with no bridging node in
/// `relays`. Both orientations are listed.
///
/// Enumerates pairs straight from the neighborhood definitions; it shares no
/// code with the greedy pass.
pub fn coverage_check(t: &Topology, relays: &BTreeSet<NodeId>) -> Vec<Pair> {
    let mut missing = Vec::new();
    for u in t.ids() {
        for w in t.two_hop(u).expect("id from topology") {
            if !relays.iter().any(|&r| t.adjacent(u, r) && t.adjacent(w, r)) {
                missing.push((u, w));
            }
        }
    }
    missing
}

/// Smallest valid relay set, searching subsets by increasing size in
/// lexicographic order. Exponential; refuses topologies above `max_n` nodes.
pub fn brute_force_min_relays(t: &Topology, max_n: usize) -> Result<BTreeSet<NodeId>, RelayError> {
    let n = t.len();
    if n > max_n {
        return Err(RelayError::SizeLimit { nodes: n, max_n });
    }
    for k in 0..=n {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let set: BTreeSet<NodeId> = idx.iter().map(|&i| NodeId::from(i)).collect();
            if coverage_check(t, &set).is_empty() {
                return Ok(set);
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    unreachable!("the full node set always covers every 2-hop pair")
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
        return false;
    };
    idx[i] += 1;
    for j in i + 1..k {
        idx[j] = idx[j - 1] + 1;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CardinalityReport {
    pub card_r: usize,
    pub card_v: usize,
    /// `|R| < |V|`
    pub cond1: bool,
    /// `|R| < |V - R|`
    pub cond2: bool,
}

pub fn cardinality_report(
    t: &Topology,
    a: &RelayAssignment,
) -> Result<CardinalityReport, RelayError> {
    if a.epoch != t.epoch() {
        return Err(RelayError::StaleAssignment {
            assignment: a.epoch,
            topology: t.epoch(),
        });
    }
    let card_r = a.relays.len();
    let card_v = t.len();
    Ok(CardinalityReport {
        card_r,
        card_v,
        cond1: card_r < card_v,
        cond2: card_r < card_v - card_r,
    })
}
