//! Per-second traffic counters, CSV export and run summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::relay::CardinalityReport;
use crate::time::SimTime;
use crate::topology::NodeId;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("negative amount {amount} recorded for {counter} at node {node}")]
    NegativeAmount {
        counter: Counter,
        node: NodeId,
        amount: i64,
    },
    #[error("time {t} s is outside the series horizon of {horizon_s} s")]
    OutOfRange { t: SimTime, horizon_s: u64 },
    #[error("summaries come from different scenarios ({optimized} vs {blind})")]
    ScenarioMismatch { optimized: String, blind: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {msg}")]
    BadRow { row: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Counters tracked per node and per one-second bucket. Variant order is the
/// alphabetical order of the CSV names, which is the CSV row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Counter {
    BitsLost,
    BitsReceivedDup,
    BitsReceivedFirst,
    BitsRelayed,
    BitsSent,
    PacketsLost,
    PacketsReceivedDup,
    PacketsReceivedFirst,
    PacketsRelayed,
    PacketsSent,
}

impl Counter {
    pub const ALL: [Counter; 10] = [
        Counter::BitsLost,
        Counter::BitsReceivedDup,
        Counter::BitsReceivedFirst,
        Counter::BitsRelayed,
        Counter::BitsSent,
        Counter::PacketsLost,
        Counter::PacketsReceivedDup,
        Counter::PacketsReceivedFirst,
        Counter::PacketsRelayed,
        Counter::PacketsSent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Counter::BitsLost => "bits_lost",
            Counter::BitsReceivedDup => "bits_received_dup",
            Counter::BitsReceivedFirst => "bits_received_first",
            Counter::BitsRelayed => "bits_relayed",
            Counter::BitsSent => "bits_sent",
            Counter::PacketsLost => "packets_lost",
            Counter::PacketsReceivedDup => "packets_received_dup",
            Counter::PacketsReceivedFirst => "packets_received_first",
            Counter::PacketsRelayed => "packets_relayed",
            Counter::PacketsSent => "packets_sent",
        }
    }
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Counter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Counter::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown counter `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsSeries {
    horizon_s: u64,
    buckets: BTreeMap<(u64, NodeId, Counter), u64>,
    totals: BTreeMap<Counter, u64>,
}

impl MetricsSeries {
    /// Empty series accepting records in `[0, horizon_s)` seconds.
    pub fn new(horizon_s: u64) -> Self {
        MetricsSeries {
            horizon_s,
            buckets: BTreeMap::new(),
            totals: BTreeMap::new(),
        }
    }

    pub fn horizon_s(&self) -> u64 {
        self.horizon_s
    }

    /// Adds `amount` to the bucket `⌊t⌋` of `node`'s `counter`.
    pub fn record(
        &mut self,
        t: SimTime,
        node: NodeId,
        counter: Counter,
        amount: i64,
    ) -> Result<(), MetricsError> {
        if amount < 0 {
            return Err(MetricsError::NegativeAmount {
                counter,
                node,
                amount,
            });
        }
        let bucket = t.bucket();
        if bucket >= self.horizon_s {
            return Err(MetricsError::OutOfRange {
                t,
                horizon_s: self.horizon_s,
            });
        }
        if amount > 0 {
            self.add(bucket, node, counter, amount as u64);
        }
        Ok(())
    }

    fn add(&mut self, bucket: u64, node: NodeId, counter: Counter, amount: u64) {
        *self.buckets.entry((bucket, node, counter)).or_default() += amount;
        *self.totals.entry(counter).or_default() += amount;
    }

    pub fn bucket(&self, second: u64, node: NodeId, counter: Counter) -> u64 {
        self.buckets
            .get(&(second, node, counter))
            .copied()
            .unwrap_or(0)
    }

    /// Running total of `counter` over all nodes and buckets.
    pub fn total(&self, counter: Counter) -> u64 {
        self.totals.get(&counter).copied().unwrap_or(0)
    }

    pub fn node_total(&self, node: NodeId, counter: Counter) -> u64 {
        self.buckets
            .iter()
            .filter(|((_, n, c), _)| *n == node && *c == counter)
            .map(|(_, v)| v)
            .sum()
    }

    /// Per-second values of one node's counter, `horizon_s` entries long.
    pub fn per_second(&self, node: NodeId, counter: Counter) -> Vec<u64> {
        let mut out = vec![0; self.horizon_s as usize];
        for (&(t, n, c), &v) in &self.buckets {
            if n == node && c == counter {
                out[t as usize] += v;
            }
        }
        out
    }

    /// Non-zero entries as `(second, node, counter, value)`, in CSV order.
    pub fn entries(&self) -> impl Iterator<Item = (u64, NodeId, Counter, u64)> + '_ {
        self.buckets.iter().map(|(&(t, n, c), &v)| (t, n, c, v))
    }

    pub fn nodes_with(&self, counter: Counter) -> BTreeSet<NodeId> {
        self.buckets
            .keys()
            .filter(|(_, _, c)| *c == counter)
            .map(|(_, n, _)| *n)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MetricsError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["t", "node_id", "counter", "value"])?;
        for (t, n, c, v) in self.entries() {
            w.write_record([
                t.to_string(),
                n.to_string(),
                c.name().to_string(),
                v.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<(), MetricsError> {
        let file = File::create(path)?;
        let mut out = BufWriter::new(file);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`MetricsSeries::write_csv`].
    pub fn parse_csv<R: Read>(input: R, horizon_s: u64) -> Result<MetricsSeries, MetricsError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "node_id", "counter", "value"] {
            return Err(MetricsError::BadRow {
                row: 0,
                msg: "expected header t,node_id,counter,value".into(),
            });
        }
        let mut series = MetricsSeries::new(horizon_s);
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec?;
            let bad = |msg: &str| MetricsError::BadRow {
                row,
                msg: msg.to_string(),
            };
            let t: u64 = rec[0].parse().map_err(|_| bad("bad t"))?;
            let node: u32 = rec[1].parse().map_err(|_| bad("bad node_id"))?;
            let counter: Counter = rec[2].parse().map_err(|e: String| bad(&e))?;
            let value: u64 = rec[3].parse().map_err(|_| bad("bad value"))?;
            if t >= horizon_s {
                return Err(bad("t beyond horizon"));
            }
            series.add(t, NodeId(node), counter, value);
        }
        Ok(series)
    }
}

/// Run-level facts the engine knows that the counters alone do not carry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInfo {
    pub mode: String,
    pub fingerprint: String,
    pub node_count: usize,
    pub source: NodeId,
    pub connected_at_start: bool,
    /// Non-source nodes in the source's component at t = 0.
    pub reachable: BTreeSet<NodeId>,
    pub relay_set_size: usize,
    pub cardinality: CardinalityReport,
    pub relay_recomputations: u64,
    pub relay_loop_violations: u64,
    /// First-receptions of a packet a node had already delivered once, which
    /// only happens after its duplicate-cache entry expired.
    pub repeat_deliveries: u64,
    /// Σ over transmissions of wire bits × receivers at emission time.
    pub sent_bits: u64,
    pub held_at_end: u64,
    pub cancelled_relays: u64,
    pub channel_bps: u64,
    pub out_of_order_events: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mode: String,
    pub fingerprint: String,
    pub source_emissions: u64,
    pub relay_emissions: u64,
    pub total_transmissions: u64,
    pub deliveries_first: u64,
    pub deliveries_dup: u64,
    pub received_bits_first: u64,
    pub received_bits_dup: u64,
    pub sent_bits: u64,
    pub lost_in_transit: u64,
    pub lost_in_transit_bits: u64,
    /// Non-source nodes that delivered at least one packet, over all
    /// non-source nodes.
    pub coverage_fraction: f64,
    pub reachable_at_start: usize,
    pub redundancy_ratio: f64,
    pub relay_set_size: usize,
    pub cardinality: CardinalityReport,
    pub accounting_ok: bool,
    pub channel_peak_bps: u64,
    pub channel_ok: bool,
    pub connected_at_start: bool,
    pub relay_loop_violations: u64,
    pub repeat_deliveries: u64,
    pub relay_recomputations: u64,
    pub held_at_end: u64,
    pub cancelled_relays: u64,
    pub out_of_order_events: u64,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn from_run(series: &MetricsSeries, info: &ScenarioInfo) -> Summary {
        use Counter::*;
        let received_bits_first = series.total(BitsReceivedFirst);
        let received_bits_dup = series.total(BitsReceivedDup);
        let lost_in_transit_bits = series.total(BitsLost);
        let deliveries_first = series.total(PacketsReceivedFirst);
        let deliveries_dup = series.total(PacketsReceivedDup);

        let delivered: BTreeSet<NodeId> = series
            .nodes_with(PacketsReceivedFirst)
            .into_iter()
            .filter(|n| *n != info.source)
            .collect();
        let targets = info.node_count.saturating_sub(1);
        let coverage_fraction = if targets == 0 {
            1.0
        } else {
            delivered.len() as f64 / targets as f64
        };
        let redundancy_ratio = if deliveries_first == 0 {
            0.0
        } else {
            deliveries_dup as f64 / deliveries_first as f64
        };

        let mut emitted: BTreeMap<(u64, NodeId), u64> = BTreeMap::new();
        for (t, n, c, v) in series.entries() {
            if matches!(c, BitsSent | BitsRelayed) {
                *emitted.entry((t, n)).or_default() += v;
            }
        }
        let channel_peak_bps = emitted.values().copied().max().unwrap_or(0);

        let source_emissions = series.total(PacketsSent);
        let relay_emissions = series.total(PacketsRelayed);
        Summary {
            mode: info.mode.clone(),
            fingerprint: info.fingerprint.clone(),
            source_emissions,
            relay_emissions,
            reachable_at_start: info.reachable.len(),
            total_transmissions: source_emissions + relay_emissions,
            deliveries_first,
            deliveries_dup,
            received_bits_first,
            received_bits_dup,
            sent_bits: info.sent_bits,
            lost_in_transit: series.total(PacketsLost),
            lost_in_transit_bits,
            coverage_fraction,
            redundancy_ratio,
            relay_set_size: info.relay_set_size,
            cardinality: info.cardinality,
            accounting_ok: info.sent_bits
                == received_bits_first + received_bits_dup + lost_in_transit_bits,
            channel_peak_bps,
            channel_ok: channel_peak_bps <= info.channel_bps,
            connected_at_start: info.connected_at_start,
            relay_loop_violations: info.relay_loop_violations,
            repeat_deliveries: info.repeat_deliveries,
            relay_recomputations: info.relay_recomputations,
            held_at_end: info.held_at_end,
            cancelled_relays: info.cancelled_relays,
            out_of_order_events: info.out_of_order_events,
            warnings: info.warnings.clone(),
        }
    }

    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let c = &self.cardinality;
        let warnings = if self.warnings.is_empty() {
            "none".to_string()
        } else {
            self.warnings.join("; ")
        };
        [
            ("accounting_ok", self.accounting_ok.to_string()),
            ("cancelled_relays", self.cancelled_relays.to_string()),
            ("card_r", c.card_r.to_string()),
            ("card_v", c.card_v.to_string()),
            ("channel_ok", self.channel_ok.to_string()),
            ("channel_peak_bps", self.channel_peak_bps.to_string()),
            ("cond1", c.cond1.to_string()),
            ("cond2", c.cond2.to_string()),
            ("connected_at_start", self.connected_at_start.to_string()),
            (
                "coverage_fraction",
                format!("{:.6}", self.coverage_fraction),
            ),
            ("deliveries_dup", self.deliveries_dup.to_string()),
            ("deliveries_first", self.deliveries_first.to_string()),
            ("fingerprint", self.fingerprint.clone()),
            ("held_at_end", self.held_at_end.to_string()),
            ("lost_in_transit", self.lost_in_transit.to_string()),
            (
                "lost_in_transit_bits",
                self.lost_in_transit_bits.to_string(),
            ),
            ("mode", self.mode.clone()),
            ("out_of_order_events", self.out_of_order_events.to_string()),
            ("reachable_at_start", self.reachable_at_start.to_string()),
            ("received_bits_dup", self.received_bits_dup.to_string()),
            ("received_bits_first", self.received_bits_first.to_string()),
            ("redundancy_ratio", format!("{:.6}", self.redundancy_ratio)),
            ("relay_emissions", self.relay_emissions.to_string()),
            (
                "relay_loop_violations",
                self.relay_loop_violations.to_string(),
            ),
            (
                "relay_recomputations",
                self.relay_recomputations.to_string(),
            ),
            ("relay_set_size", self.relay_set_size.to_string()),
            ("repeat_deliveries", self.repeat_deliveries.to_string()),
            ("sent_bits", self.sent_bits.to_string()),
            ("source_emissions", self.source_emissions.to_string()),
            ("total_transmissions", self.total_transmissions.to_string()),
            ("warnings", warnings),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// `key=value` lines, keys sorted.
    pub fn to_text(&self) -> String {
        kv_text(&self.to_kv())
    }
}

pub fn kv_text(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    pub transmission_reduction_pct: f64,
    pub redundancy_reduction_pct: f64,
    pub optimized_transmissions: u64,
    pub blind_transmissions: u64,
}

impl Reduction {
    pub fn to_text(&self) -> String {
        format!(
            "blind_transmissions={}\noptimized_transmissions={}\nredundancy_reduction_pct={:.4}\ntransmission_reduction_pct={:.4}\n",
            self.blind_transmissions,
            self.optimized_transmissions,
            self.redundancy_reduction_pct,
            self.transmission_reduction_pct
        )
    }
}

fn reduction_pct(blind: u64, optimized: u64) -> f64 {
    if blind == 0 {
        0.0
    } else {
        100.0 * (blind as f64 - optimized as f64) / blind as f64
    }
}

/// Traffic saved by the optimized run relative to blind flooding on the same
/// scenario. Redundancy is measured in duplicate receptions.
pub fn compare(optimized: &Summary, blind: &Summary) -> Result<Reduction, MetricsError> {
    if optimized.fingerprint != blind.fingerprint {
        return Err(MetricsError::ScenarioMismatch {
            optimized: optimized.fingerprint.clone(),
            blind: blind.fingerprint.clone(),
        });
    }
    Ok(Reduction {
        transmission_reduction_pct: reduction_pct(
            blind.total_transmissions,
            optimized.total_transmissions,
        ),
        redundancy_reduction_pct: reduction_pct(blind.deliveries_dup, optimized.deliveries_dup),
        optimized_transmissions: optimized.total_transmissions,
        blind_transmissions: blind.total_transmissions,
    })
}
