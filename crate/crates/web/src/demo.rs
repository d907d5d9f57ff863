use meshflood::fixtures;
use meshflood::relay::DEFAULT_ORACLE_MAX_N;
use meshflood::topology::DEFAULT_AREA_SIDE;
use meshflood::{
    brute_force_min_relays, build_topology, compare, place_nodes, run_with_topology, select_relays,
    Counter, MetricsSeries, Mode, Placement, RunOutput, SimConfig, Topology,
};
use serde_json::{json, Value};

const MAX_NODES: u32 = 400;

pub fn build(fixture: &str, node_count: u32, seed: u32, range: f64) -> Result<Topology, String> {
    if !fixture.trim().is_empty() {
        return fixtures::by_name(fixture.trim());
    }
    if node_count == 0 || node_count > MAX_NODES {
        return Err(format!("node count must be in 1..={MAX_NODES}"));
    }
    let nodes = place_nodes(
        node_count as usize,
        Placement::UniformRandom,
        DEFAULT_AREA_SIDE,
        seed as u64,
    )
    .map_err(|e| e.to_string())?;
    build_topology(nodes, range).map_err(|e| e.to_string())
}

pub fn topology(fixture: &str, node_count: u32, seed: u32, range: f64) -> Result<Value, String> {
    let t = build(fixture, node_count, seed, range)?;
    let a = select_relays(&t);
    let nodes: Vec<Value> = t
        .nodes()
        .iter()
        .map(|n| {
            json!({
                "id": n.id.0,
                "x": n.pos.x,
                "y": n.pos.y,
                "role": n.role.as_str(),
                "relay": a.is_relay(n.id),
            })
        })
        .collect();
    let edges: Vec<[u32; 2]> = t.edges().map(|(u, v)| [u.0, v.0]).collect();
    let selectors: Vec<Value> = a
        .selectors
        .iter()
        .map(|(r, s)| json!({ "relay": r.0, "selectors": s.iter().map(|u| u.0).collect::<Vec<_>>() }))
        .collect();
    let side = t
        .nodes()
        .iter()
        .map(|n| n.pos.x.max(n.pos.y))
        .fold(DEFAULT_AREA_SIDE, f64::max);
    Ok(json!({
        "side": side,
        "range": t.radio_range(),
        "connected": t.is_connected(),
        "nodes": nodes,
        "edges": edges,
        "relays": a.relays.iter().map(|r| r.0).collect::<Vec<_>>(),
        "selectors": selectors,
        "two_hop_pairs": a.covered_pairs.len(),
    }))
}

fn network_series(series: &MetricsSeries, counter: Counter) -> Vec<u64> {
    let mut out = vec![0; series.horizon_s() as usize];
    for (t, _, c, v) in series.entries() {
        if c == counter {
            if let Some(slot) = out.get_mut(t as usize) {
                *slot += v;
            }
        }
    }
    out
}

fn run_json(out: &RunOutput) -> Value {
    let s = out.summary();
    let series = &out.series;
    json!({
        "transmissions": s.total_transmissions,
        "coverage": s.coverage_fraction,
        "redundancy_ratio": s.redundancy_ratio,
        "deliveries": s.deliveries_first,
        "duplicates": s.deliveries_dup,
        "relay_set_size": s.relay_set_size,
        "bits_sent": network_series(series, Counter::BitsSent),
        "bits_relayed": network_series(series, Counter::BitsRelayed),
        "bits_received_first": network_series(series, Counter::BitsReceivedFirst),
        "bits_received_dup": network_series(series, Counter::BitsReceivedDup),
    })
}

pub fn simulate(
    fixture: &str,
    node_count: u32,
    seed: u32,
    range: f64,
    duration_s: f64,
) -> Result<Value, String> {
    let t = build(fixture, node_count, seed, range)?;
    let cfg = |mode| SimConfig {
        mode,
        node_count: t.len(),
        radio_range: t.radio_range(),
        sim_duration_s: duration_s,
        seed: seed as u64,
        ..SimConfig::default()
    };
    let relay = run_with_topology(&cfg(Mode::RelayFlood), t.clone()).map_err(|e| e.to_string())?;
    let blind = run_with_topology(&cfg(Mode::BlindFlood), t).map_err(|e| e.to_string())?;
    let red = compare(&relay.summary(), &blind.summary()).map_err(|e| e.to_string())?;
    Ok(json!({
        "relay": run_json(&relay),
        "blind": run_json(&blind),
        "transmission_reduction_pct": red.transmission_reduction_pct,
        "redundancy_reduction_pct": red.redundancy_reduction_pct,
    }))
}

pub fn oracle_gap(trials: u32, node_count: u32, seed: u32) -> Result<Value, String> {
    let n = node_count as usize;
    if !(2..=DEFAULT_ORACLE_MAX_N).contains(&n) {
        return Err(format!("node count must be in 2..={DEFAULT_ORACLE_MAX_N}"));
    }
    if trials == 0 || trials > 200 {
        return Err("trials must be in 1..=200".into());
    }
    let mut rows = Vec::new();
    let mut sum = 0.0;
    for i in 0..trials as u64 {
        let t = fixtures::random_connected(n, 3.0, seed as u64 * 1000 + i)
            .ok_or("no connected sample found")?;
        let heuristic = select_relays(&t).relays.len();
        let optimal = brute_force_min_relays(&t, DEFAULT_ORACLE_MAX_N)
            .map_err(|e| e.to_string())?
            .len();
        let ratio = if optimal == 0 {
            1.0
        } else {
            heuristic as f64 / optimal as f64
        };
        sum += ratio;
        rows.push(json!({ "heuristic": heuristic, "optimal": optimal, "ratio": ratio }));
    }
    Ok(json!({ "trials": rows, "mean_ratio": sum / trials as f64 }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_topology_marks_three_relays() {
        let v = topology("fig3", 0, 0, 0.0).unwrap();
        assert_eq!(v["relays"], json!([1, 2, 3]));
        assert_eq!(v["nodes"].as_array().unwrap().len(), 10);
        assert_eq!(v["nodes"][0]["role"], "source");
    }

    #[test]
    fn random_layout_respects_bounds() {
        assert!(topology("", 0, 1, 130.0).is_err());
        assert!(topology("", MAX_NODES + 1, 1, 130.0).is_err());
        let v = topology("", 30, 4, 130.0).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 30);
    }

    #[test]
    fn k4_simulation_shows_full_reduction() {
        let v = simulate("k:4", 0, 0, 0.0, 20.0).unwrap();
        assert_eq!(v["transmission_reduction_pct"], 75.0);
        let sent = v["relay"]["bits_sent"].as_array().unwrap();
        assert_eq!(sent.len(), 140);
        assert_eq!(sent[0], 2000);
        assert_eq!(v["relay"]["coverage"], 1.0);
    }

    #[test]
    fn oracle_gap_ratios_at_least_one() {
        let v = oracle_gap(5, 8, 2).unwrap();
        for row in v["trials"].as_array().unwrap() {
            assert!(row["ratio"].as_f64().unwrap() >= 1.0);
        }
        assert!(oracle_gap(5, 13, 2).is_err());
    }
}
