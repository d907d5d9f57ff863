use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use meshflood::{fixtures, select_relays};

fn meshflood(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshflood"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn meshflood")
}

fn scenario(dir: &Path, name: &str, body: &str) -> String {
    let file = format!("{name}.scn");
    fs::write(dir.join(&file), body).unwrap();
    file
}

fn kv(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .to_string()
}

#[test]
fn fig3_dump_relays_lists_the_three_routers() {
    let d = tempfile::tempdir().unwrap();
    let f = scenario(d.path(), "fig3", "fixture = \"fig3\"\n");
    let out = meshflood(
        d.path(),
        &[
            "run",
            &f,
            "--mode=relay",
            "--dump-relays",
            "--dump-topology",
            "--out",
            "o",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let relays = fs::read_to_string(d.path().join("o/relays.txt")).unwrap();
    let ids: Vec<u32> = relays
        .lines()
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    let expect: Vec<u32> = select_relays(&fixtures::fig3())
        .relays
        .iter()
        .map(|r| r.0)
        .collect();
    assert_eq!(ids, expect);
    assert_eq!(ids, vec![1, 2, 3]);

    let topo = fs::read_to_string(d.path().join("o/topology.txt")).unwrap();
    assert_eq!(
        meshflood::Topology::from_text(&topo).unwrap().to_text(),
        topo
    );
    let summary = fs::read_to_string(d.path().join("o/summary.txt")).unwrap();
    assert_eq!(kv(&summary, "config.fixture"), "fig3");
    assert_eq!(kv(&summary, "config.mode"), "relay");
    assert_eq!(kv(&summary, "accounting_ok"), "true");
}

#[test]
fn missing_or_bad_scenario_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        meshflood(d.path(), &["run", "nope.scn"]).status.code(),
        Some(2)
    );
    let f = scenario(d.path(), "bad", "node_count = 10\nwobble = true\n");
    assert_eq!(meshflood(d.path(), &["run", &f]).status.code(), Some(2));
    assert_eq!(meshflood(d.path(), &["compare", &f]).status.code(), Some(2));
    assert_eq!(meshflood(d.path(), &["oracle", &f]).status.code(), Some(2));
    assert_eq!(
        meshflood(d.path(), &["run", "x.scn", "--mode", "loud"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn seeded_runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let f = scenario(
        d.path(),
        "grid25",
        "node_count = 25\nplacement = \"grid\"\nmobility_m = 40\n",
    );
    for out in ["a", "b"] {
        let o = meshflood(
            d.path(),
            &["run", &f, "--seed", "7", "--out", out, "--dump-relays"],
        );
        assert_eq!(o.status.code(), Some(0));
    }
    for file in ["series.csv", "summary.txt", "relays.txt"] {
        let a = fs::read(d.path().join("a").join(file)).unwrap();
        let b = fs::read(d.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let summary = fs::read_to_string(d.path().join("a/summary.txt")).unwrap();
    assert_eq!(kv(&summary, "config.seed"), "7");
}

#[test]
fn flags_override_file_values() {
    let d = tempfile::tempdir().unwrap();
    let f = scenario(
        d.path(),
        "s",
        "fixture = \"path:4\"\nmode = \"relay\"\nrule2 = true\nseed = 1\n",
    );
    let o = meshflood(
        d.path(),
        &[
            "run",
            &f,
            "--mode",
            "blind",
            "--rule2",
            "off",
            "--inflight",
            "drop",
            "--seed",
            "5",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let summary = fs::read_to_string(d.path().join("out/summary.txt")).unwrap();
    assert_eq!(kv(&summary, "config.mode"), "blind");
    assert_eq!(kv(&summary, "config.rule2"), "false");
    assert_eq!(kv(&summary, "config.inflight"), "drop");
    assert_eq!(kv(&summary, "config.seed"), "5");
}

#[test]
fn batch_runs_write_one_directory_per_seed() {
    let d = tempfile::tempdir().unwrap();
    let f = scenario(
        d.path(),
        "r",
        "node_count = 20\nplacement = \"random\"\nseed = 3\nsim_duration_s = 30\n",
    );
    let o = meshflood(
        d.path(),
        &["run", &f, "--runs", "4", "--jobs", "3", "--out", "b"],
    );
    assert_eq!(o.status.code(), Some(0));
    for seed in 3..7 {
        let batch = fs::read(d.path().join(format!("b/seed-{seed}/series.csv"))).unwrap();
        let single_dir = format!("s{seed}");
        let seed = seed.to_string();
        let s = meshflood(
            d.path(),
            &["run", &f, "--seed", &seed, "--out", &single_dir],
        );
        assert_eq!(s.status.code(), Some(0));
        let single = fs::read(d.path().join(single_dir).join("series.csv")).unwrap();
        assert_eq!(batch, single);
    }
}

fn compare_text(body: &str) -> String {
    let d = tempfile::tempdir().unwrap();
    let f = scenario(d.path(), "c", body);
    let o = meshflood(d.path(), &["compare", &f, "--out", "c"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(d.path().join("c/relay/series.csv").exists());
    assert!(d.path().join("c/blind/series.csv").exists());
    fs::read_to_string(d.path().join("c/compare.txt")).unwrap()
}

#[test]
fn compare_reports_reduction() {
    // K4: blind sends 4 copies per packet, relay flooding only the source's
    let k4 = compare_text("fixture = \"k:4\"\n");
    assert_eq!(kv(&k4, "transmission_reduction_pct"), "75.0000");
    assert_eq!(kv(&k4, "blind_transmissions"), "600");

    let single = compare_text("fixture = \"k:1\"\n");
    assert_eq!(kv(&single, "transmission_reduction_pct"), "0.0000");

    let grid = compare_text("node_count = 25\n");
    let pct: f64 = kv(&grid, "transmission_reduction_pct").parse().unwrap();
    assert!(pct > 0.0, "{grid}");
}

fn oracle(body: &str, extra: &[&str]) -> (Option<i32>, String) {
    let d = tempfile::tempdir().unwrap();
    let f = scenario(d.path(), "o", body);
    let mut args = vec!["oracle", f.as_str()];
    args.extend_from_slice(extra);
    let o = meshflood(d.path(), &args);
    (o.status.code(), String::from_utf8(o.stdout).unwrap())
}

#[test]
fn oracle_reports_sizes_and_ratio() {
    let (code, out) = oracle("fixture = \"path:3\"\n", &[]);
    assert_eq!(code, Some(0));
    assert_eq!(out, "heuristic=1\noptimal=1\nratio=1.0000\n");

    let (code, out) = oracle("fixture = \"k:4\"\n", &[]);
    assert_eq!(code, Some(0));
    assert_eq!(out, "heuristic=0\noptimal=0\nratio=1.0000\n");

    let (code, out) = oracle("node_count = 10\nplacement = \"random\"\nseed = 11\n", &[]);
    assert_eq!(code, Some(0));
    let ratio: f64 = kv(&out, "ratio").parse().unwrap();
    assert!(ratio >= 1.0);

    let (code, _) = oracle("fixture = \"grid:25\"\n", &[]);
    assert_eq!(code, Some(2));
    let (code, _) = oracle("fixture = \"path:5\"\n", &["--max-n", "4"]);
    assert_eq!(code, Some(2));
}
