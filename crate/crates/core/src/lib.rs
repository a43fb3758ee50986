//! Deterministic simulator for a three-hop post-disaster coverage chain:
//! base station → edge relay → cluster head → D2D cluster member.
//!
//! The [`channel`] module holds the link math (path gain, noise, SINR,
//! Shannon capacity, bits per joule). [`topology`] places devices with a
//! Matérn cluster process, [`selection`] elects relays and cluster heads,
//! and [`scenario`] assembles chains and runs the distance / α sweeps that
//! the [`cli`] layer writes out as CSV and JSON.

pub mod channel;
pub mod cli;
pub mod scenario;
pub mod selection;
pub mod topology;

pub use channel::{ChannelError, ChannelModel, Fading, LinkMetrics, Transmitter};
pub use scenario::{HopChain, HopSpec, ScenarioError, SweepResult, SweepRow};
pub use selection::{SelectionOutcome, SelectionWeights};
pub use topology::{Node, NodeId, Point, Role, Topology};
