//! JSON scenario configuration. Every field is optional; omitted fields take
//! the reference defaults (5 W / 2.5 W / 1.5 W, 10 MHz at 700 MHz, H = 3,
//! α ∈ {2, 2.5, 3}). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::channel::{ChannelModel, Fading};
use crate::scenario::{ChainParams, DistanceRange, HopSpec};
use crate::selection::{SelectionWeights, DEFAULT_SNR_REF};
use crate::topology::{
    build_scenario_topology, place_poisson_cluster, sample_edge_devices, Point, PoissonClusterParams, Rect, RoleMap,
    Topology,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub channel: ChannelConfig,
    pub topology: TopologyConfig,
    pub selection: SelectionConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 42,
            channel: ChannelConfig::default(),
            topology: TopologyConfig::default(),
            selection: SelectionConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub path_loss_exponents: Vec<f64>,
    pub carrier_frequency_hz: f64,
    pub reference_distance_m: f64,
    pub noise_temperature_k: f64,
    pub noise_figure_db: f64,
    pub fading: Fading,
    pub bandwidth_hz: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            path_loss_exponents: vec![2.0, 2.5, 3.0],
            carrier_frequency_hz: 700e6,
            reference_distance_m: 1.0,
            noise_temperature_k: 290.0,
            noise_figure_db: 0.0,
            fading: Fading::None,
            bandwidth_hz: 10e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterProcessConfig {
    pub parent_intensity: f64,
    pub mean_cluster_size: f64,
    pub cluster_radius_m: f64,
    pub region: Rect,
}

impl Default for ClusterProcessConfig {
    fn default() -> Self {
        // A 500 m × 500 m disaster area just beyond the coverage edge, ~6 clusters.
        ClusterProcessConfig {
            parent_intensity: 2.4e-5,
            mean_cluster_size: 8.0,
            cluster_radius_m: 50.0,
            region: Rect {
                x_min: 1050.0,
                y_min: -250.0,
                x_max: 1550.0,
                y_max: 250.0,
            },
        }
    }
}

impl From<ClusterProcessConfig> for PoissonClusterParams {
    fn from(c: ClusterProcessConfig) -> Self {
        PoissonClusterParams {
            parent_intensity: c.parent_intensity,
            mean_cluster_size: c.mean_cluster_size,
            cluster_radius_m: c.cluster_radius_m,
            region: c.region,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelayCandidateConfig {
    /// Devices sampled uniformly in the edge band.
    pub count: u32,
    /// Angular sector (degrees, counter-clockwise from +x) they are drawn from.
    pub sector_deg: [f64; 2],
}

impl Default for RelayCandidateConfig {
    fn default() -> Self {
        RelayCandidateConfig {
            count: 5,
            sector_deg: [-15.0, 15.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerTable {
    pub base_station: f64,
    pub relay: f64,
    pub cluster_head: f64,
    pub cluster_member: f64,
}

impl Default for PowerTable {
    fn default() -> Self {
        PowerTable {
            base_station: 5.0,
            relay: 2.5,
            cluster_head: 1.5,
            cluster_member: 1.5,
        }
    }
}

/// Initial residual energy per role; `null` means unlimited (mains power).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyTable {
    pub base_station: Option<f64>,
    pub relay: Option<f64>,
    pub cluster_head: Option<f64>,
    pub cluster_member: Option<f64>,
}

impl Default for EnergyTable {
    fn default() -> Self {
        EnergyTable {
            base_station: None,
            relay: Some(100.0),
            cluster_head: Some(50.0),
            cluster_member: Some(50.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub bs_position: Point,
    pub coverage_radius_m: f64,
    pub cluster_process: ClusterProcessConfig,
    pub relay_candidates: RelayCandidateConfig,
    /// Extra in-coverage devices; those in the edge band become relay candidates.
    pub extra_devices: Vec<Point>,
    pub tx_power_w: PowerTable,
    pub initial_energy_j: EnergyTable,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            bs_position: Point::new(0.0, 0.0),
            coverage_radius_m: 1000.0,
            cluster_process: ClusterProcessConfig::default(),
            relay_candidates: RelayCandidateConfig::default(),
            extra_devices: Vec::new(),
            tx_power_w: PowerTable::default(),
            initial_energy_j: EnergyTable::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub energy_weight: f64,
    pub quality_weight: f64,
    pub snr_ref_linear: f64,
    pub ch_energy_threshold_j: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            energy_weight: 0.5,
            quality_weight: 0.5,
            snr_ref_linear: DEFAULT_SNR_REF,
            ch_energy_threshold_j: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopRangeConfig {
    pub min_m: f64,
    pub max_m: f64,
    pub steps: u32,
    #[serde(default)]
    pub interferers: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// H used for single-hop EE.
    pub hop_count: u32,
    pub hop1: HopRangeConfig,
    pub hop2: HopRangeConfig,
    pub hop3: HopRangeConfig,
    pub interferer_distance_factor: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            hop_count: 3,
            hop1: HopRangeConfig {
                min_m: 100.0,
                max_m: 1000.0,
                steps: 10,
                interferers: 0,
            },
            hop2: HopRangeConfig {
                min_m: 5.0,
                max_m: 250.0,
                steps: 50,
                interferers: 0,
            },
            hop3: HopRangeConfig {
                min_m: 5.0,
                max_m: 50.0,
                steps: 10,
                interferers: 2,
            },
            interferer_distance_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for default output file names.
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from(".") }
    }
}

fn constraint(key: impl Into<String>, constraint: impl Into<String>) -> CliError {
    CliError::Constraint {
        key: key.into(),
        constraint: constraint.into(),
    }
}

fn require(ok: bool, key: &str, what: &str, value: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(constraint(key, format!("{what} (got {value})")))
    }
}

impl ScenarioConfig {
    /// Checks every nested invariant, naming the first offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        let ch = &self.channel;
        require(!ch.path_loss_exponents.is_empty(), "channel.path_loss_exponents", "non-empty", "[]")?;
        for (i, &a) in ch.path_loss_exponents.iter().enumerate() {
            let key = format!("channel.path_loss_exponents[{i}]");
            require(a >= 1.0 && a.is_finite(), &key, "path_loss_exponent ≥ 1", a)?;
            require(
                !ch.path_loss_exponents[..i].contains(&a),
                &key,
                "path_loss_exponent values distinct",
                a,
            )?;
        }
        for (i, model) in self.channel_models_unchecked().iter().enumerate() {
            model
                .validate()
                .map_err(|e| constraint(format!("channel (α index {i})"), e.to_string()))?;
        }
        require(
            ch.bandwidth_hz > 0.0 && ch.bandwidth_hz.is_finite(),
            "channel.bandwidth_hz",
            "bandwidth_hz > 0",
            ch.bandwidth_hz,
        )?;

        let t = &self.topology;
        require(
            t.coverage_radius_m > 0.0 && t.coverage_radius_m.is_finite(),
            "topology.coverage_radius_m",
            "coverage_radius_m > 0",
            t.coverage_radius_m,
        )?;
        PoissonClusterParams::from(t.cluster_process)
            .validate()
            .map_err(|e| constraint("topology.cluster_process", e.to_string()))?;
        let [lo, hi] = t.relay_candidates.sector_deg;
        require(
            lo.is_finite() && hi.is_finite() && lo <= hi,
            "topology.relay_candidates.sector_deg",
            "finite with start ≤ end",
            format!("[{lo}, {hi}]"),
        )?;
        let powers = [
            ("base_station", t.tx_power_w.base_station),
            ("relay", t.tx_power_w.relay),
            ("cluster_head", t.tx_power_w.cluster_head),
            ("cluster_member", t.tx_power_w.cluster_member),
        ];
        for (role, p) in powers {
            require(p > 0.0 && p.is_finite(), &format!("topology.tx_power_w.{role}"), "tx_power_w > 0", p)?;
        }
        let energies = [
            ("base_station", t.initial_energy_j.base_station),
            ("relay", t.initial_energy_j.relay),
            ("cluster_head", t.initial_energy_j.cluster_head),
            ("cluster_member", t.initial_energy_j.cluster_member),
        ];
        for (role, e) in energies {
            if let Some(e) = e {
                require(
                    e >= 0.0 && e.is_finite(),
                    &format!("topology.initial_energy_j.{role}"),
                    "residual_energy_j ≥ 0 (or null for unlimited)",
                    e,
                )?;
            }
        }
        require(
            t.initial_energy_j.relay.is_some(),
            "topology.initial_energy_j.relay",
            "relay energy must be finite",
            "null",
        )?;

        let s = &self.selection;
        SelectionWeights::new(s.energy_weight, s.quality_weight)
            .map_err(|e| constraint("selection.energy_weight", e.to_string()))?;
        require(
            s.snr_ref_linear > 0.0 && s.snr_ref_linear.is_finite(),
            "selection.snr_ref_linear",
            "snr_ref_linear > 0",
            s.snr_ref_linear,
        )?;
        require(
            s.ch_energy_threshold_j >= 0.0 && s.ch_energy_threshold_j.is_finite(),
            "selection.ch_energy_threshold_j",
            "ch_energy_threshold_j ≥ 0",
            s.ch_energy_threshold_j,
        )?;

        let sw = &self.sweep;
        require(sw.hop_count >= 1, "sweep.hop_count", "hop_count ≥ 1", sw.hop_count)?;
        require(
            sw.interferer_distance_factor > 0.0 && sw.interferer_distance_factor.is_finite(),
            "sweep.interferer_distance_factor",
            "interferer_distance_factor > 0",
            sw.interferer_distance_factor,
        )?;
        for (name, h) in [("hop1", sw.hop1), ("hop2", sw.hop2), ("hop3", sw.hop3)] {
            DistanceRange::new(h.min_m, h.max_m, h.steps)
                .map_err(|e| constraint(format!("sweep.{name}"), e.to_string()))?;
        }
        Ok(())
    }

    fn channel_models_unchecked(&self) -> Vec<ChannelModel> {
        let ch = &self.channel;
        ch.path_loss_exponents
            .iter()
            .map(|&a| ChannelModel {
                path_loss_exponent: a,
                carrier_frequency_hz: ch.carrier_frequency_hz,
                reference_distance_m: ch.reference_distance_m,
                noise_temperature_k: ch.noise_temperature_k,
                noise_figure_db: ch.noise_figure_db,
                fading: ch.fading,
            })
            .collect()
    }

    /// One channel model per configured α, in configuration order.
    pub fn channel_models(&self) -> Vec<ChannelModel> {
        self.channel_models_unchecked()
    }

    pub fn hop_spec(&self, hop_index: u8) -> HopSpec {
        let t = &self.topology.tx_power_w;
        let (range, power) = match hop_index {
            1 => (self.sweep.hop1, t.base_station),
            2 => (self.sweep.hop2, t.relay),
            _ => (self.sweep.hop3, t.cluster_head),
        };
        HopSpec {
            hop_index,
            tx_power_w: power,
            range: DistanceRange {
                min_m: range.min_m,
                max_m: range.max_m,
                steps: range.steps,
            },
            interferer_count: range.interferers,
            interferer_distance_factor: self.sweep.interferer_distance_factor,
        }
    }

    pub fn d2d_range(&self) -> DistanceRange {
        let h = self.sweep.hop3;
        DistanceRange {
            min_m: h.min_m,
            max_m: h.max_m,
            steps: h.steps,
        }
    }

    pub fn chain_params(&self) -> ChainParams {
        ChainParams {
            bandwidth_hz: self.channel.bandwidth_hz,
            weights: SelectionWeights {
                energy_weight: self.selection.energy_weight,
                quality_weight: self.selection.quality_weight,
            },
            snr_ref: self.selection.snr_ref_linear,
            ch_energy_threshold_j: self.selection.ch_energy_threshold_j,
            d2d_interferer_count: self.sweep.hop3.interferers,
            interferer_distance_factor: self.sweep.interferer_distance_factor,
        }
    }

    /// Cluster layout, edge-band relay candidates and the assembled topology
    /// for `seed`.
    pub fn build_topology(&self, seed: u64) -> Result<Topology, CliError> {
        let t = &self.topology;
        let layout = place_poisson_cluster(&t.cluster_process.into(), seed);
        let [lo, hi] = t.relay_candidates.sector_deg;
        let mut devices = sample_edge_devices(
            t.bs_position,
            t.coverage_radius_m,
            t.relay_candidates.count as usize,
            (lo, hi),
            seed,
        );
        devices.extend_from_slice(&t.extra_devices);
        let powers = RoleMap {
            base_station: t.tx_power_w.base_station,
            relay: t.tx_power_w.relay,
            cluster_head: t.tx_power_w.cluster_head,
            cluster_member: t.tx_power_w.cluster_member,
        };
        let unlimited = |e: Option<f64>| e.unwrap_or(f64::INFINITY);
        let energies = RoleMap {
            base_station: unlimited(t.initial_energy_j.base_station),
            relay: unlimited(t.initial_energy_j.relay),
            cluster_head: unlimited(t.initial_energy_j.cluster_head),
            cluster_member: unlimited(t.initial_energy_j.cluster_member),
        };
        build_scenario_topology(&layout, &devices, t.bs_position, t.coverage_radius_m, &powers, &energies)
            .map_err(|e| CliError::Scenario(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
