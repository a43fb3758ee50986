//! Command implementations behind the `emsim` binary.
//!
//! Exit codes: 0 success, 1 usage or malformed config, 2 I/O, 3 scenario
//! error (including config constraint violations).

pub mod config;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::scenario::{self, ClusterHeadChoice, RelayPolicy, ScenarioError, SweepResult};
use crate::topology::{CanonicalTopology, NodeId};
pub use config::{load_config, parse_config, ScenarioConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("config constraint violated at {key}: {constraint}")]
    Constraint { key: String, constraint: String },
    #[error("scenario error: {0}")]
    Scenario(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 1,
            CliError::Io(_) => 2,
            CliError::Constraint { .. } | CliError::Scenario(_) => 3,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Scenario(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopSelector {
    Hop(u8),
    Chain,
}

impl FromStr for HopSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(HopSelector::Hop(1)),
            "2" => Ok(HopSelector::Hop(2)),
            "3" => Ok(HopSelector::Hop(3)),
            "chain" => Ok(HopSelector::Chain),
            other => Err(format!("expected 1, 2, 3 or chain (got {other:?})")),
        }
    }
}

impl fmt::Display for HopSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HopSelector::Hop(i) => write!(f, "{i}"),
            HopSelector::Chain => f.write_str("chain"),
        }
    }
}

/// Sweep table for one hop, or the full chain with the optimal relay.
pub fn sweep(config: &ScenarioConfig, hop: HopSelector, seed: u64) -> Result<SweepResult, CliError> {
    let models = config.channel_models();
    match hop {
        HopSelector::Hop(i) => Ok(scenario::run_hop_sweep(
            &config.hop_spec(i),
            &models,
            config.channel.bandwidth_hz,
            config.sweep.hop_count,
            seed,
        )?),
        HopSelector::Chain => {
            let topology = config.build_topology(seed)?;
            let params = config.chain_params();
            let mut rows = Vec::new();
            for model in &models {
                let (_, r) = scenario::run_proposed_chain(&topology, &config.d2d_range(), model, &params, seed)?;
                rows.extend(r.rows);
            }
            rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.distance_m.total_cmp(&b.distance_m)));
            Ok(SweepResult { rows })
        }
    }
}

pub fn sweep_csv(config: &ScenarioConfig, hop: HopSelector, seed: u64) -> Result<String, CliError> {
    Ok(sweep(config, hop, seed)?.to_csv())
}

pub fn compare_csv(config: &ScenarioConfig, seed: u64) -> Result<String, CliError> {
    let topology = config.build_topology(seed)?;
    let cmp = scenario::compare_chains(
        &topology,
        &config.d2d_range(),
        &config.channel_models(),
        &config.chain_params(),
        seed,
    )?;
    Ok(cmp.to_csv())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum HeadEntry {
    Id(NodeId),
    Isolated(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterHeadReport {
    pub cluster: usize,
    pub id: HeadEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    /// Path-loss exponent the election was run under (the first configured).
    pub alpha: f64,
    pub relay: NodeId,
    pub cluster_heads: Vec<ClusterHeadReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyReport {
    #[serde(flatten)]
    pub topology: CanonicalTopology,
    pub selection: SelectionReport,
}

pub fn topology_report(config: &ScenarioConfig, seed: u64) -> Result<TopologyReport, CliError> {
    let topology = config.build_topology(seed)?;
    let model = config
        .channel_models()
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Usage("no path-loss exponent configured".into()))?;
    let (relay, heads) = scenario::elect(&topology, &model, &config.chain_params(), RelayPolicy::Optimal)?;
    let cluster_heads = heads
        .into_iter()
        .enumerate()
        .map(|(cluster, h)| ClusterHeadReport {
            cluster,
            id: match h {
                ClusterHeadChoice::Elected(id) => HeadEntry::Id(id),
                ClusterHeadChoice::Isolated => HeadEntry::Isolated("isolated"),
            },
        })
        .collect();
    Ok(TopologyReport {
        topology: topology.to_canonical(),
        selection: SelectionReport {
            alpha: model.path_loss_exponent,
            relay,
            cluster_heads,
        },
    })
}

pub fn topology_json(config: &ScenarioConfig, seed: u64) -> Result<String, CliError> {
    let report = topology_report(config, seed)?;
    let mut s = serde_json::to_string_pretty(&report).map_err(|e| CliError::Scenario(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Replaces `path` with `contents` via a sibling temp file and rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn default_sweep_path(config: &ScenarioConfig, hop: HopSelector) -> PathBuf {
    config.output.dir.join(format!("sweep_hop{hop}.csv"))
}

pub fn default_compare_path(config: &ScenarioConfig) -> PathBuf {
    config.output.dir.join("compare.csv")
}

pub fn default_topology_path(config: &ScenarioConfig) -> PathBuf {
    config.output.dir.join("topology.json")
}
