//! Scenario files: TOML key/value pairs layered over `SimConfig` defaults.

use std::path::Path;

use meshflood::{
    fixtures, run, run_with_topology, NodeId, RunOutput, SimConfig, SimError, Topology,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub fixture: Option<String>,
    pub node_count: Option<usize>,
    pub placement: Option<String>,
    pub area_side: Option<f64>,
    pub radio_range: Option<f64>,
    pub channel_bps: Option<u64>,
    pub tx_power_mw: Option<f64>,
    pub payload_bits: Option<u64>,
    pub header_bits_per_relay: Option<u64>,
    pub packet_interval_s: Option<f64>,
    pub topo_control_interval_s: Option<f64>,
    pub hold_time_s: Option<f64>,
    pub topo_stability_s: Option<f64>,
    pub duplicate_ttl_s: Option<f64>,
    pub sim_duration_s: Option<f64>,
    pub drain_s: Option<f64>,
    pub mode: Option<String>,
    pub rule2: Option<bool>,
    pub inflight: Option<String>,
    pub repeat_seq: Option<bool>,
    pub candidate_order: Option<String>,
    pub mobility_m: Option<f64>,
    pub seed: Option<u64>,
    pub source: Option<u32>,
    pub rate_schedule: Option<Vec<(f64, u64)>>,
}

fn parse<T: std::str::FromStr<Err = String>>(
    v: &Option<String>,
    into: &mut T,
) -> Result<(), CliError> {
    if let Some(s) = v {
        *into = s.parse().map_err(CliError::Config)?;
    }
    Ok(())
}

macro_rules! copy_fields {
    ($file:expr, $cfg:expr, $($f:ident),*) => {
        $(if let Some(v) = $file.$f.clone() { $cfg.$f = v; })*
    };
}

/// A loaded scenario: effective config plus an optional fixed topology.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: SimConfig,
    pub fixture: Option<String>,
    topology: Option<Topology>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Scenario::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Scenario, CliError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        let mut cfg = SimConfig::default();
        copy_fields!(
            file,
            cfg,
            node_count,
            area_side,
            radio_range,
            channel_bps,
            tx_power_mw,
            payload_bits,
            header_bits_per_relay,
            packet_interval_s,
            topo_control_interval_s,
            hold_time_s,
            topo_stability_s,
            duplicate_ttl_s,
            sim_duration_s,
            drain_s,
            rule2,
            repeat_seq,
            mobility_m,
            seed,
            rate_schedule
        );
        parse(&file.placement, &mut cfg.placement)?;
        parse(&file.mode, &mut cfg.mode)?;
        parse(&file.inflight, &mut cfg.inflight)?;
        parse(&file.candidate_order, &mut cfg.candidate_order)?;
        if let Some(s) = file.source {
            cfg.source = NodeId(s);
        }
        let topology = match &file.fixture {
            Some(name) => {
                let t = fixtures::by_name(name).map_err(CliError::Config)?;
                if file.node_count.is_some_and(|n| n != t.len()) {
                    return Err(CliError::Config(format!(
                        "node_count conflicts with fixture `{name}` ({} nodes)",
                        t.len()
                    )));
                }
                cfg.node_count = t.len();
                cfg.source = t.source();
                cfg.radio_range = t.radio_range();
                Some(t)
            }
            None => None,
        };
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let scenario = Scenario {
            config: cfg,
            fixture: file.fixture,
            topology,
        };
        scenario.topology()?;
        Ok(scenario)
    }

    /// The topology the run starts from.
    pub fn topology(&self) -> Result<Topology, CliError> {
        match &self.topology {
            Some(t) => Ok(t.clone()),
            None => {
                let cfg = &self.config;
                let nodes =
                    meshflood::place_nodes(cfg.node_count, cfg.placement, cfg.area_side, cfg.seed)
                        .and_then(|n| n.with_source(cfg.source))
                        .map_err(|e| CliError::Config(e.to_string()))?;
                meshflood::build_topology(nodes, cfg.radio_range)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    pub fn run(&self) -> Result<RunOutput, CliError> {
        let out = match &self.topology {
            Some(t) => run_with_topology(&self.config, t.clone()),
            None => run(&self.config),
        };
        out.map_err(|e| match e {
            SimError::InvalidConfig(_) | SimError::Topology(_) => CliError::Config(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use meshflood::{InflightPolicy, Mode, Placement};

    #[test]
    fn empty_file_is_defaults() {
        let s = Scenario::from_toml("").unwrap();
        assert_eq!(s.config, SimConfig::default());
        assert!(s.fixture.is_none());
    }

    #[test]
    fn fields_map_onto_config() {
        let s = Scenario::from_toml(
            "node_count = 40\nplacement = \"random\"\nmode = \"blind\"\ninflight = \"drop\"\n\
             seed = 9\nrate_schedule = [[0.0, 2000], [60.0, 500]]\n",
        )
        .unwrap();
        assert_eq!(s.config.node_count, 40);
        assert_eq!(s.config.placement, Placement::UniformRandom);
        assert_eq!(s.config.mode, Mode::BlindFlood);
        assert_eq!(s.config.inflight, InflightPolicy::Drop);
        assert_eq!(s.config.rate_schedule, vec![(0.0, 2000), (60.0, 500)]);
    }

    #[test]
    fn fixture_sets_shape() {
        let s = Scenario::from_toml("fixture = \"fig3\"").unwrap();
        assert_eq!(s.config.node_count, 10);
        assert_eq!(s.topology().unwrap().len(), 10);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "colour = 3",
            "mode = \"loud\"",
            "fixture = \"moebius:4\"",
            "packet_interval_s = 0",
            "node_count = 0",
            "fixture = \"k:4\"\nnode_count = 5",
            "node_count = \"many\"",
        ] {
            assert!(
                matches!(Scenario::from_toml(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }
}
