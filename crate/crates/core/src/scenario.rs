//! Three-hop chain assembly (BS → relay → cluster head → member) and the
//! distance / path-loss-exponent sweeps run over it.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{self, ChannelError, ChannelModel, Fading, LinkMetrics, Transmitter};
use crate::selection::{self, QualityContext, SelectionError, SelectionWeights};
use crate::topology::{NodeId, Topology, TopologyError};

/// CSV header for sweep output. Column order is a stability contract.
pub const SWEEP_CSV_HEADER: &str =
    "hop,distance_m,alpha,bandwidth_hz,tx_power_w,sinr_linear,capacity_bps,ee_bits_per_joule";

/// CSV header for proposed-vs-baseline comparisons.
pub const COMPARE_CSV_HEADER: &str = "distance_m,alpha,ee_proposed,ee_baseline,ee_ratio";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error("no cluster head available: every cluster is isolated or the layout is empty")]
    NoClusterHead,
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Which hop (or the whole chain) a sweep row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HopLabel {
    Hop(u8),
    Chain,
}

impl fmt::Display for HopLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HopLabel::Hop(i) => write!(f, "{i}"),
            HopLabel::Chain => f.write_str("chain"),
        }
    }
}

/// Linearly spaced distances, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceRange {
    pub min_m: f64,
    pub max_m: f64,
    pub steps: u32,
}

impl DistanceRange {
    pub fn new(min_m: f64, max_m: f64, steps: u32) -> Result<Self, ScenarioError> {
        let r = DistanceRange { min_m, max_m, steps };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.min_m > 0.0 && self.min_m.is_finite() && self.max_m.is_finite()) {
            return Err(ScenarioError::Invalid(format!(
                "distance range needs finite min_m > 0 (got {})",
                self.min_m
            )));
        }
        if self.min_m > self.max_m {
            return Err(ScenarioError::Invalid(format!(
                "distance range needs min_m ≤ max_m (got {} > {})",
                self.min_m, self.max_m
            )));
        }
        if self.steps == 0 {
            return Err(ScenarioError::Invalid("distance range needs steps ≥ 1".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min_m];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.max_m
                } else {
                    self.min_m + (self.max_m - self.min_m) * (i as f64) / last
                }
            })
            .collect()
    }
}

/// One hop of the chain as swept over distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopSpec {
    pub hop_index: u8,
    pub tx_power_w: f64,
    pub range: DistanceRange,
    /// Co-channel transmitters active during this hop.
    pub interferer_count: u32,
    /// Interferer distance as a multiple of the signal distance.
    pub interferer_distance_factor: f64,
}

impl HopSpec {
    fn validate(&self) -> Result<(), ScenarioError> {
        if !(1..=3).contains(&self.hop_index) {
            return Err(ScenarioError::Invalid(format!("hop_index must be 1, 2 or 3 (got {})", self.hop_index)));
        }
        self.range.validate()?;
        check_interferer_factor(self.interferer_count, self.interferer_distance_factor)
    }
}

fn check_interferer_factor(count: u32, factor: f64) -> Result<(), ScenarioError> {
    if count > 0 && !(factor > 0.0 && factor.is_finite()) {
        return Err(ScenarioError::Invalid(format!(
            "interferer_distance_factor must be > 0 (got {factor})"
        )));
    }
    Ok(())
}

/// A co-channel transmitter at `distance_m` from the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interferer {
    pub power_w: f64,
    pub distance_m: f64,
}

fn identical_interferers(count: u32, power_w: f64, distance_m: f64, factor: f64) -> Vec<Interferer> {
    (0..count)
        .map(|_| Interferer {
            power_w,
            distance_m: distance_m * factor,
        })
        .collect()
}

/// Gain, SINR, capacity and EE of one link without fading.
pub fn evaluate_link(
    model: &ChannelModel,
    tx_power_w: f64,
    distance_m: f64,
    bandwidth_hz: f64,
    interferers: &[Interferer],
    hop_count: u32,
) -> Result<LinkMetrics, ScenarioError> {
    let noise = model.noise_power(bandwidth_hz)?;
    let gain = model.path_gain(distance_m)?;
    let signal = Transmitter::new(tx_power_w, gain)?;
    let others = interferers
        .iter()
        .map(|i| Transmitter::new(i.power_w, model.path_gain(i.distance_m)?))
        .collect::<Result<Vec<_>, _>>()?;
    let sinr = channel::sinr(&signal, &others, noise)?;
    let capacity_bps = channel::capacity(bandwidth_hz, &[sinr])?;
    let ee_bits_per_joule = channel::energy_efficiency(capacity_bps, hop_count, tx_power_w)?;
    Ok(LinkMetrics {
        gain,
        sinr,
        capacity_bps,
        ee_bits_per_joule,
    })
}

/// [`evaluate_link`] under the model's fading setting.
///
/// With Rayleigh fading the capacity is averaged over the configured number
/// of independent draws (signal and every interferer faded separately).
/// The reported SINR is the effective value `2^(C/B) − 1` so that the
/// capacity can still be recovered from it; `gain` is the mean faded gain.
pub fn evaluate_link_faded<R: Rng + ?Sized>(
    model: &ChannelModel,
    tx_power_w: f64,
    distance_m: f64,
    bandwidth_hz: f64,
    interferers: &[Interferer],
    hop_count: u32,
    rng: &mut R,
) -> Result<LinkMetrics, ScenarioError> {
    let trials = match model.fading {
        Fading::None => {
            return evaluate_link(model, tx_power_w, distance_m, bandwidth_hz, interferers, hop_count);
        }
        Fading::Rayleigh { trials } => trials.max(1),
    };
    let noise = model.noise_power(bandwidth_hz)?;
    let gain = model.path_gain(distance_m)?;
    let interferer_gains = interferers
        .iter()
        .map(|i| Ok((i.power_w, model.path_gain(i.distance_m)?)))
        .collect::<Result<Vec<_>, ChannelError>>()?;

    let mut gain_sum = 0.0;
    let mut capacity_sum = 0.0;
    for _ in 0..trials {
        let faded = channel::apply_fading(gain, model.fading, rng).min(1.0);
        gain_sum += faded;
        let signal = Transmitter::new(tx_power_w, faded.max(f64::MIN_POSITIVE))?;
        let others = interferer_gains
            .iter()
            .map(|&(p, g)| Transmitter::new(p, channel::apply_fading(g, model.fading, rng).clamp(f64::MIN_POSITIVE, 1.0)))
            .collect::<Result<Vec<_>, _>>()?;
        let s = channel::sinr(&signal, &others, noise)?;
        capacity_sum += channel::capacity(bandwidth_hz, &[s])?;
    }
    let n = trials as f64;
    let capacity_bps = capacity_sum / n;
    let sinr = (capacity_bps / bandwidth_hz).exp2() - 1.0;
    let ee_bits_per_joule = channel::energy_efficiency(capacity_bps, hop_count, tx_power_w)?;
    Ok(LinkMetrics {
        gain: gain_sum / n,
        sinr: sinr.max(0.0),
        capacity_bps,
        ee_bits_per_joule,
    })
}

fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub hop: HopLabel,
    pub distance_m: f64,
    pub alpha: f64,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub sinr_linear: f64,
    pub capacity_bps: f64,
    pub ee_bits_per_joule: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    fn sorted(mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by(|a, b| {
            a.hop
                .cmp(&b.hop)
                .then(a.alpha.total_cmp(&b.alpha))
                .then(a.distance_m.total_cmp(&b.distance_m))
        });
        SweepResult { rows }
    }

    /// CSV with [`SWEEP_CSV_HEADER`], shortest round-trip float formatting
    /// and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.hop,
                r.distance_m,
                r.alpha,
                r.bandwidth_hz,
                r.tx_power_w,
                r.sinr_linear,
                r.capacity_bps,
                r.ee_bits_per_joule
            ));
        }
        out
    }
}

fn sorted_models(models: &[ChannelModel]) -> Result<Vec<&ChannelModel>, ScenarioError> {
    if models.is_empty() {
        return Err(ScenarioError::Invalid("at least one channel model is required".into()));
    }
    let mut sorted: Vec<&ChannelModel> = models.iter().collect();
    sorted.sort_by(|a, b| a.path_loss_exponent.total_cmp(&b.path_loss_exponent));
    if sorted.windows(2).any(|w| w[0].path_loss_exponent == w[1].path_loss_exponent) {
        return Err(ScenarioError::Invalid("path-loss exponents must be distinct".into()));
    }
    for m in &sorted {
        m.validate()?;
    }
    Ok(sorted)
}

/// EE versus distance for one hop, one row per (α, distance).
///
/// `seed` only matters when a model has fading enabled; every sweep point
/// then draws from its own stream so rows are independent of evaluation order.
pub fn run_hop_sweep(
    hop: &HopSpec,
    models: &[ChannelModel],
    bandwidth_hz: f64,
    hop_count_for_ee: u32,
    seed: u64,
) -> Result<SweepResult, ScenarioError> {
    hop.validate()?;
    let models = sorted_models(models)?;
    let distances = hop.range.points();
    let mut rows = Vec::with_capacity(models.len() * distances.len());
    for model in models {
        for &d in &distances {
            let interferers = identical_interferers(hop.interferer_count, hop.tx_power_w, d, hop.interferer_distance_factor);
            let mut rng = point_rng(seed, rows.len() as u64);
            let m = evaluate_link_faded(model, hop.tx_power_w, d, bandwidth_hz, &interferers, hop_count_for_ee, &mut rng)?;
            rows.push(SweepRow {
                hop: HopLabel::Hop(hop.hop_index),
                distance_m: d,
                alpha: model.path_loss_exponent,
                bandwidth_hz,
                tx_power_w: hop.tx_power_w,
                sinr_linear: m.sinr,
                capacity_bps: m.capacity_bps,
                ee_bits_per_joule: m.ee_bits_per_joule,
            });
        }
    }
    Ok(SweepResult::sorted(rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainLink {
    pub tx_power_w: f64,
    pub distance_m: f64,
    pub interferer_count: u32,
    pub interferer_distance_factor: f64,
}

impl ChainLink {
    fn interferers(&self) -> Vec<Interferer> {
        identical_interferers(
            self.interferer_count,
            self.tx_power_w,
            self.distance_m,
            self.interferer_distance_factor,
        )
    }
}

/// Decode-and-forward chain; the last link is the D2D hop.
#[derive(Debug, Clone, PartialEq)]
pub struct HopChain {
    pub links: Vec<ChainLink>,
}

impl HopChain {
    pub fn hop_count(&self) -> u32 {
        self.links.len() as u32
    }

    pub fn max_tx_power_w(&self) -> f64 {
        self.links.iter().map(|l| l.tx_power_w).fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.links.is_empty() {
            return Err(ScenarioError::Invalid("a hop chain needs at least one link".into()));
        }
        for l in &self.links {
            check_interferer_factor(l.interferer_count, l.interferer_distance_factor)?;
        }
        Ok(())
    }
}

/// End-to-end metrics of a chain: the bottleneck link's SINR and capacity,
/// with EE = C_min / (H · p_max).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMetrics {
    pub links: Vec<LinkMetrics>,
    pub bottleneck: usize,
    pub capacity_bps: f64,
    pub ee_bits_per_joule: f64,
}

pub fn evaluate_chain<R: Rng + ?Sized>(
    chain: &HopChain,
    model: &ChannelModel,
    bandwidth_hz: f64,
    rng: &mut R,
) -> Result<ChainMetrics, ScenarioError> {
    chain.validate()?;
    let h = chain.hop_count();
    let links = chain
        .links
        .iter()
        .map(|l| evaluate_link_faded(model, l.tx_power_w, l.distance_m, bandwidth_hz, &l.interferers(), h, rng))
        .collect::<Result<Vec<_>, _>>()?;
    let bottleneck = links
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.capacity_bps.total_cmp(&b.1.capacity_bps))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let capacity_bps = links[bottleneck].capacity_bps;
    let ee_bits_per_joule = channel::energy_efficiency(capacity_bps, h, chain.max_tx_power_w())?;
    Ok(ChainMetrics {
        links,
        bottleneck,
        capacity_bps,
        ee_bits_per_joule,
    })
}

/// Sweeps the last (D2D) link's distance with all other links held fixed.
pub fn run_chain_sweep(
    chain: &HopChain,
    d2d_range: &DistanceRange,
    model: &ChannelModel,
    bandwidth_hz: f64,
    seed: u64,
) -> Result<SweepResult, ScenarioError> {
    chain.validate()?;
    d2d_range.validate()?;
    model.validate()?;
    let mut chain = chain.clone();
    let last = chain.links.len() - 1;
    let mut rows = Vec::new();
    for (i, d) in d2d_range.points().into_iter().enumerate() {
        chain.links[last].distance_m = d;
        let mut rng = point_rng(seed, i as u64);
        let m = evaluate_chain(&chain, model, bandwidth_hz, &mut rng)?;
        rows.push(SweepRow {
            hop: HopLabel::Chain,
            distance_m: d,
            alpha: model.path_loss_exponent,
            bandwidth_hz,
            tx_power_w: chain.max_tx_power_w(),
            sinr_linear: m.links[m.bottleneck].sinr,
            capacity_bps: m.capacity_bps,
            ee_bits_per_joule: m.ee_bits_per_joule,
        });
    }
    Ok(SweepResult::sorted(rows))
}

/// How the relay of a chain is picked from the candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayPolicy {
    /// Highest relay score.
    Optimal,
    /// Lowest relay score; the benchmark without relay optimisation.
    Baseline,
}

/// Everything needed to turn a topology into a chain, besides the channel model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub bandwidth_hz: f64,
    pub weights: SelectionWeights,
    pub snr_ref: f64,
    pub ch_energy_threshold_j: f64,
    pub d2d_interferer_count: u32,
    pub interferer_distance_factor: f64,
}

/// Per-cluster head election outcome relative to one relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterHeadChoice {
    Elected(NodeId),
    Isolated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainPlan {
    pub relay: NodeId,
    pub cluster_heads: Vec<ClusterHeadChoice>,
    /// The elected head nearest to the relay; it terminates hop 2.
    pub served_cluster_head: NodeId,
    pub chain: HopChain,
}

/// Elects a relay under `policy` and the heads of every cluster relative to
/// that relay.
pub fn elect(
    topology: &Topology,
    model: &ChannelModel,
    params: &ChainParams,
    policy: RelayPolicy,
) -> Result<(NodeId, Vec<ClusterHeadChoice>), ScenarioError> {
    let ctx = QualityContext {
        model,
        bandwidth_hz: params.bandwidth_hz,
        snr_ref: params.snr_ref,
    };
    let bs = topology.base_station();
    let candidates = topology.relay_candidates();
    let relay = match policy {
        RelayPolicy::Optimal => selection::select_relay(&candidates, bs, &ctx, &params.weights)?.chosen,
        RelayPolicy::Baseline => selection::relay_scores(&candidates, bs, &ctx, &params.weights)?
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(id, _)| id)
            .ok_or(SelectionError::NoRelayCandidate)?,
    };
    let relay_node = topology.node(relay).expect("relay id from topology");
    let mut heads = Vec::with_capacity(topology.clusters().len());
    for c in 0..topology.clusters().len() {
        let nodes = topology.cluster_nodes(c);
        match selection::select_cluster_head(&nodes, relay_node, &ctx, params.ch_energy_threshold_j) {
            Ok(out) => heads.push(ClusterHeadChoice::Elected(out.chosen)),
            Err(SelectionError::ClusterIsolated { .. }) | Err(SelectionError::EmptyCluster) => {
                heads.push(ClusterHeadChoice::Isolated)
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((relay, heads))
}

/// Builds the BS → relay → CH → member chain for one relay policy. The D2D
/// link starts at `d2d_distance_m`; sweeps overwrite it.
pub fn plan_chain(
    topology: &Topology,
    model: &ChannelModel,
    params: &ChainParams,
    policy: RelayPolicy,
    d2d_distance_m: f64,
) -> Result<ChainPlan, ScenarioError> {
    let (relay, cluster_heads) = elect(topology, model, params, policy)?;
    let bs = topology.base_station();
    let relay_node = topology.node(relay).expect("relay id from topology");
    let served = cluster_heads
        .iter()
        .filter_map(|c| match c {
            ClusterHeadChoice::Elected(id) => topology.node(*id),
            ClusterHeadChoice::Isolated => None,
        })
        .min_by(|a, b| {
            relay_node
                .position
                .distance_to(&a.position)
                .total_cmp(&relay_node.position.distance_to(&b.position))
                .then(a.id.cmp(&b.id))
        })
        .ok_or(ScenarioError::NoClusterHead)?;

    let link = |tx_power_w: f64, distance_m: f64, interferer_count: u32| ChainLink {
        tx_power_w,
        distance_m,
        interferer_count,
        interferer_distance_factor: params.interferer_distance_factor,
    };
    let chain = HopChain {
        links: vec![
            link(bs.tx_power_w, bs.position.distance_to(&relay_node.position), 0),
            link(relay_node.tx_power_w, relay_node.position.distance_to(&served.position), 0),
            link(served.tx_power_w, d2d_distance_m, params.d2d_interferer_count),
        ],
    };
    Ok(ChainPlan {
        relay,
        cluster_heads,
        served_cluster_head: served.id,
        chain,
    })
}

fn run_policy_chain(
    topology: &Topology,
    d2d_range: &DistanceRange,
    model: &ChannelModel,
    params: &ChainParams,
    seed: u64,
    policy: RelayPolicy,
) -> Result<(ChainPlan, SweepResult), ScenarioError> {
    d2d_range.validate()?;
    let plan = plan_chain(topology, model, params, policy, d2d_range.min_m)?;
    let sweep = run_chain_sweep(&plan.chain, d2d_range, model, params.bandwidth_hz, seed)?;
    Ok((plan, sweep))
}

/// Chain sweep with the optimally selected relay.
pub fn run_proposed_chain(
    topology: &Topology,
    d2d_range: &DistanceRange,
    model: &ChannelModel,
    params: &ChainParams,
    seed: u64,
) -> Result<(ChainPlan, SweepResult), ScenarioError> {
    run_policy_chain(topology, d2d_range, model, params, seed, RelayPolicy::Optimal)
}

/// The same chain and channel, but relayed through the lowest-scoring candidate.
pub fn run_baseline_chain(
    topology: &Topology,
    d2d_range: &DistanceRange,
    model: &ChannelModel,
    params: &ChainParams,
    seed: u64,
) -> Result<(ChainPlan, SweepResult), ScenarioError> {
    run_policy_chain(topology, d2d_range, model, params, seed, RelayPolicy::Baseline)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub distance_m: f64,
    pub alpha: f64,
    pub ee_proposed: f64,
    pub ee_baseline: f64,
    pub ee_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(COMPARE_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.distance_m, r.alpha, r.ee_proposed, r.ee_baseline, r.ee_ratio
            ));
        }
        out
    }
}

/// Proposed versus baseline chain EE for every α, rows sorted by (α, distance).
pub fn compare_chains(
    topology: &Topology,
    d2d_range: &DistanceRange,
    models: &[ChannelModel],
    params: &ChainParams,
    seed: u64,
) -> Result<Comparison, ScenarioError> {
    let mut rows = Vec::new();
    for model in sorted_models(models)? {
        let (_, proposed) = run_proposed_chain(topology, d2d_range, model, params, seed)?;
        let (_, baseline) = run_baseline_chain(topology, d2d_range, model, params, seed)?;
        for (p, b) in proposed.rows.iter().zip(&baseline.rows) {
            let ee_ratio = if b.ee_bits_per_joule > 0.0 {
                p.ee_bits_per_joule / b.ee_bits_per_joule
            } else if p.ee_bits_per_joule == 0.0 {
                1.0
            } else {
                f64::INFINITY
            };
            rows.push(ComparisonRow {
                distance_m: p.distance_m,
                alpha: p.alpha,
                ee_proposed: p.ee_bits_per_joule,
                ee_baseline: b.ee_bits_per_joule,
                ee_ratio,
            });
        }
    }
    Ok(Comparison { rows })
}
