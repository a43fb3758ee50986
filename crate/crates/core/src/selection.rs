//! Relay and cluster-head election.
//!
//! The BS ranks edge-band relay candidates by a convex blend of normalized
//! residual energy and BS→candidate link quality. Cluster heads must clear a
//! residual-energy threshold; the richest eligible node wins, ties going to
//! the better link from the relay and then to the lower id.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ChannelModel, Transmitter};
use crate::topology::{Node, NodeId, Point};

/// 30 dB: links at or above this SNR count as fully reliable.
pub const DEFAULT_SNR_REF: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("no relay candidate")]
    NoRelayCandidate,
    #[error("cluster isolated: no member has residual energy above {threshold_j} J")]
    ClusterIsolated { threshold_j: f64 },
    #[error("empty cluster")]
    EmptyCluster,
    #[error("invalid selection input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionWeights {
    pub energy_weight: f64,
    pub quality_weight: f64,
}

impl SelectionWeights {
    pub fn new(energy_weight: f64, quality_weight: f64) -> Result<Self, SelectionError> {
        let w = SelectionWeights {
            energy_weight,
            quality_weight,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.energy_weight) || !unit.contains(&self.quality_weight) {
            return Err(SelectionError::Invalid(format!(
                "weights must lie in [0, 1] (got energy {}, quality {})",
                self.energy_weight, self.quality_weight
            )));
        }
        if (self.energy_weight + self.quality_weight - 1.0).abs() > 1e-9 {
            return Err(SelectionError::Invalid(format!(
                "energy_weight + quality_weight must equal 1 (got {})",
                self.energy_weight + self.quality_weight
            )));
        }
        Ok(())
    }
}

impl Default for SelectionWeights {
    fn default() -> Self {
        SelectionWeights {
            energy_weight: 0.5,
            quality_weight: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub chosen: NodeId,
    pub score: f64,
    /// Best first.
    pub ranking: Vec<(NodeId, f64)>,
}

/// Channel, bandwidth and saturation point shared by every quality probe.
#[derive(Debug, Clone, Copy)]
pub struct QualityContext<'a> {
    pub model: &'a ChannelModel,
    pub bandwidth_hz: f64,
    pub snr_ref: f64,
}

pub fn quality_from_snr(snr_linear: f64, snr_ref: f64) -> f64 {
    (snr_linear / snr_ref).min(1.0)
}

/// Interference-free received SNR from `tx` at `rx_position`, normalized by
/// `snr_ref` and saturated at 1.
pub fn link_quality(ctx: &QualityContext<'_>, tx: &Node, rx_position: Point) -> Result<f64, SelectionError> {
    if !(ctx.snr_ref > 0.0 && ctx.snr_ref.is_finite()) {
        return Err(SelectionError::Invalid(format!("snr_ref must be > 0 (got {})", ctx.snr_ref)));
    }
    let d = tx.position.distance_to(&rx_position);
    // Co-located nodes get the near-field clamp.
    let gain = ctx.model.path_gain(d.max(f64::MIN_POSITIVE))?;
    let noise = ctx.model.noise_power(ctx.bandwidth_hz)?;
    let snr = Transmitter::new(tx.tx_power_w, gain)?.received_power_w() / noise;
    Ok(quality_from_snr(snr, ctx.snr_ref))
}

fn by_score_then_id(a: &(NodeId, f64), b: &(NodeId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Relay score for each candidate, in candidate order.
pub fn relay_scores(
    candidates: &[Node],
    bs: &Node,
    ctx: &QualityContext<'_>,
    weights: &SelectionWeights,
) -> Result<Vec<(NodeId, f64)>, SelectionError> {
    weights.validate()?;
    if candidates.is_empty() {
        return Err(SelectionError::NoRelayCandidate);
    }
    let mut max_energy: f64 = 0.0;
    for c in candidates {
        if !(c.residual_energy_j >= 0.0 && c.residual_energy_j.is_finite()) {
            return Err(SelectionError::Invalid(format!(
                "relay candidate {} needs finite residual energy (got {})",
                c.id, c.residual_energy_j
            )));
        }
        max_energy = max_energy.max(c.residual_energy_j);
    }
    candidates
        .iter()
        .map(|c| {
            let energy = if max_energy > 0.0 {
                c.residual_energy_j / max_energy
            } else {
                0.0
            };
            let quality = link_quality(ctx, bs, c.position)?;
            let score = weights.energy_weight * energy + weights.quality_weight * quality;
            Ok((c.id, score))
        })
        .collect()
}

/// BS-centralized relay election: highest score wins, lowest id on ties.
pub fn select_relay(
    candidates: &[Node],
    bs: &Node,
    ctx: &QualityContext<'_>,
    weights: &SelectionWeights,
) -> Result<SelectionOutcome, SelectionError> {
    let mut ranking = relay_scores(candidates, bs, ctx, weights)?;
    ranking.sort_by(by_score_then_id);
    let (chosen, score) = ranking[0];
    Ok(SelectionOutcome { chosen, score, ranking })
}

/// Cluster-head election among `cluster_nodes`.
///
/// Only nodes with `residual_energy_j > energy_threshold_j` are eligible and
/// only they appear in the ranking. A node's score is its energy relative to
/// the richest eligible node; the ranking is ordered by (score desc,
/// quality from `relay` desc, id asc).
pub fn select_cluster_head(
    cluster_nodes: &[Node],
    relay: &Node,
    ctx: &QualityContext<'_>,
    energy_threshold_j: f64,
) -> Result<SelectionOutcome, SelectionError> {
    if cluster_nodes.is_empty() {
        return Err(SelectionError::EmptyCluster);
    }
    let eligible: Vec<&Node> = cluster_nodes
        .iter()
        .filter(|n| n.residual_energy_j > energy_threshold_j)
        .collect();
    if eligible.is_empty() {
        return Err(SelectionError::ClusterIsolated {
            threshold_j: energy_threshold_j,
        });
    }
    let max_energy = eligible.iter().map(|n| n.residual_energy_j).fold(0.0, f64::max);
    let mut scored = Vec::with_capacity(eligible.len());
    for n in eligible {
        let score = if max_energy.is_infinite() {
            if n.residual_energy_j.is_infinite() { 1.0 } else { 0.0 }
        } else if max_energy > 0.0 {
            n.residual_energy_j / max_energy
        } else {
            0.0
        };
        let quality = link_quality(ctx, relay, n.position)?;
        scored.push((n.id, score, n.residual_energy_j, quality));
    }
    scored.sort_by(|a, b| {
        b.2.total_cmp(&a.2)
            .then(b.3.total_cmp(&a.3))
            .then(a.0.cmp(&b.0))
    });
    let ranking: Vec<(NodeId, f64)> = scored.iter().map(|s| (s.0, s.1)).collect();
    let (chosen, score) = ranking[0];
    Ok(SelectionOutcome { chosen, score, ranking })
}
