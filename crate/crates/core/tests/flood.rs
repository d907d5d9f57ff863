use meshflood::fixtures;
use meshflood::{
    run, run_with_topology, Counter, InflightPolicy, Mode, NodeId, Placement, SimConfig, Topology,
};
use proptest::prelude::*;

fn cfg(mode: Mode) -> SimConfig {
    SimConfig {
        mode,
        ..SimConfig::default()
    }
}

fn assert_complete(t: &Topology, mode: Mode) {
    let out = run_with_topology(&cfg(mode), t.clone()).unwrap();
    let s = out.summary();
    for id in t.ids().filter(|&id| id != t.source()) {
        assert_eq!(
            out.series.node_total(id, Counter::PacketsReceivedFirst),
            150,
            "{mode:?}: node {id} deliveries"
        );
    }
    assert_eq!(s.repeat_deliveries, 0);
    assert_eq!(s.relay_loop_violations, 0);
    assert_eq!(s.held_at_end, 0);
    assert_eq!(s.cancelled_relays, 0);
    assert!(s.accounting_ok);
    assert_eq!(s.coverage_fraction, 1.0);
}

#[test]
fn fixtures_flood_completely() {
    for name in ["fig3", "path:6", "grid:25", "k:4", "star:5", "grid:9"] {
        let t = fixtures::by_name(name).unwrap();
        assert_complete(&t, Mode::RelayFlood);
        assert_complete(&t, Mode::BlindFlood);
    }
}

#[test]
fn fig3_trace() {
    let t = fixtures::fig3();
    let out = run_with_topology(&cfg(Mode::RelayFlood), t).unwrap();
    let s = &out.series;
    // relays forward every packet once, clients never transmit
    for r in fixtures::FIG3_RELAYS {
        assert_eq!(s.node_total(r, Counter::PacketsRelayed), 150);
        assert_eq!(s.node_total(r, Counter::BitsRelayed), 150 * 2200);
    }
    for c in 4..10 {
        let c = NodeId(c);
        assert_eq!(s.node_total(c, Counter::PacketsRelayed), 0);
        assert_eq!(s.node_total(c, Counter::BitsReceivedFirst), 150 * 2200);
    }
    // first packet: source at t=0, relay copies at t=6, clients hear them at t=6
    assert_eq!(s.bucket(0, NodeId(0), Counter::BitsSent), 2000);
    assert_eq!(s.bucket(6, NodeId(1), Counter::BitsRelayed), 2200);
    assert_eq!(s.bucket(6, NodeId(4), Counter::PacketsReceivedFirst), 1);
    assert_eq!(out.summary().total_transmissions, 600);
}

#[test]
fn rule2_off_still_complete_but_not_cheaper() {
    let t = fixtures::random_connected(40, 8.0, 5).unwrap();
    let on = run_with_topology(&cfg(Mode::RelayFlood), t.clone())
        .unwrap()
        .summary();
    let off = run_with_topology(
        &SimConfig {
            rule2: false,
            ..cfg(Mode::RelayFlood)
        },
        t,
    )
    .unwrap()
    .summary();
    assert_eq!(on.coverage_fraction, 1.0);
    assert_eq!(off.coverage_fraction, 1.0);
    assert!(on.total_transmissions <= off.total_transmissions);
}

#[test]
fn mobility_keeps_accounts_balanced() {
    for inflight in [InflightPolicy::Deliver, InflightPolicy::Drop] {
        let c = SimConfig {
            node_count: 40,
            placement: Placement::UniformRandom,
            mobility_m: 80.0,
            topo_stability_s: 1.0,
            inflight,
            seed: 13,
            ..SimConfig::default()
        };
        let out = run(&c).unwrap();
        let s = out.summary();
        assert!(s.accounting_ok, "{inflight:?}");
        assert!(out.final_topology.epoch() > 200);
        assert!(s.relay_recomputations > 1);
        assert_eq!(s.out_of_order_events, 0);
    }
}

#[test]
fn inflight_drop_loses_copies_when_nodes_move_mid_air() {
    // a slow channel keeps copies on the air long enough for reconfigurations
    // to land between emission and arrival
    let c = SimConfig {
        node_count: 30,
        placement: Placement::UniformRandom,
        mobility_m: 150.0,
        topo_stability_s: 0.05,
        channel_bps: 4000,
        payload_bits: 1000,
        sim_duration_s: 60.0,
        inflight: InflightPolicy::Drop,
        seed: 2,
        ..SimConfig::default()
    };
    let s = run(&c).unwrap().summary();
    assert!(s.lost_in_transit > 0);
    assert!(s.accounting_ok);
    assert_eq!(
        s.sent_bits,
        s.received_bits_first + s.received_bits_dup + s.lost_in_transit_bits
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relay_never_exceeds_blind(n in 2usize..30, degree in 3.0f64..10.0, seed in any::<u64>()) {
        let t = fixtures::random_connected(n, degree, seed).unwrap();
        let short = |mode| SimConfig { sim_duration_s: 20.0, ..cfg(mode) };
        let relay = run_with_topology(&short(Mode::RelayFlood), t.clone()).unwrap().summary();
        let blind = run_with_topology(&short(Mode::BlindFlood), t.clone()).unwrap().summary();
        prop_assert!(relay.total_transmissions <= blind.total_transmissions);
        prop_assert_eq!(relay.coverage_fraction, 1.0);
        prop_assert_eq!(relay.repeat_deliveries, 0);
        prop_assert!(relay.accounting_ok && blind.accounting_ok);
        let has_quiet_node = t.ids().any(|u| !relay_set(&t).contains(&u) && t.degree(u) >= 1 && u != t.source());
        if has_quiet_node {
            prop_assert!(relay.total_transmissions < blind.total_transmissions);
        }
    }
}

fn relay_set(t: &Topology) -> std::collections::BTreeSet<NodeId> {
    meshflood::select_relays(t).relays
}
