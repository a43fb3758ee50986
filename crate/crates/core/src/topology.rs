//! Planar node model and Poisson-cluster placement of disaster-area devices.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relays must sit at least this fraction of the coverage radius away from the BS.
pub const EDGE_BAND_INNER: f64 = 0.9;
// Slack for points sampled right on the band boundary.
const BAND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("no relay candidate in the coverage edge band [{inner_m} m, {outer_m} m]")]
    NoRelayCandidate { inner_m: f64, outer_m: f64 },
    #[error("{name} {constraint} required (got {value})")]
    Invalid {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    BaseStation,
    Relay,
    ClusterHead,
    ClusterMember,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance_to(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub role: Role,
    pub position: Point,
    pub tx_power_w: f64,
    /// `f64::INFINITY` for mains-powered nodes.
    pub residual_energy_j: f64,
}

pub fn distance(a: &Node, b: &Node) -> f64 {
    a.position.distance_to(&b.position)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: &Point) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max))
    }
}

/// Matérn cluster process: Poisson parents in `region`, each with a
/// Poisson(`mean_cluster_size`) number of daughters uniform in a disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonClusterParams {
    /// Parents per m².
    pub parent_intensity: f64,
    pub mean_cluster_size: f64,
    pub cluster_radius_m: f64,
    pub region: Rect,
}

impl PoissonClusterParams {
    pub fn validate(&self) -> Result<(), TopologyError> {
        let fields = [
            ("parent_intensity", self.parent_intensity),
            ("mean_cluster_size", self.mean_cluster_size),
            ("cluster_radius_m", self.cluster_radius_m),
        ];
        for (name, value) in fields {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(TopologyError::Invalid {
                    name,
                    constraint: "finite and ≥ 0",
                    value,
                });
            }
        }
        let r = &self.region;
        if !(r.x_max > r.x_min) {
            return Err(TopologyError::Invalid {
                name: "region.x_max",
                constraint: "> region.x_min",
                value: r.x_max,
            });
        }
        if !(r.y_max > r.y_min) {
            return Err(TopologyError::Invalid {
                name: "region.y_max",
                constraint: "> region.y_min",
                value: r.y_max,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedCluster {
    pub parent: Point,
    pub members: Vec<Point>,
}

fn poisson_count<R: Rng>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as usize
}

fn uniform_in_disc<R: Rng>(center: Point, radius: f64, rng: &mut R) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

/// Samples a cluster layout. Members that land outside the region are
/// clamped onto its boundary so counts stay unbiased.
pub fn place_poisson_cluster(params: &PoissonClusterParams, seed: u64) -> Vec<PlacedCluster> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = params.region;
    let parents = poisson_count(params.parent_intensity * region.area(), &mut rng);
    (0..parents)
        .map(|_| {
            let parent = Point::new(
                region.x_min + region.width() * rng.random::<f64>(),
                region.y_min + region.height() * rng.random::<f64>(),
            );
            let count = poisson_count(params.mean_cluster_size, &mut rng);
            let members = (0..count)
                .map(|_| region.clamp(uniform_in_disc(parent, params.cluster_radius_m, &mut rng)))
                .collect();
            PlacedCluster { parent, members }
        })
        .collect()
}

/// Samples `count` devices uniformly (by area) in the coverage edge band,
/// restricted to the angular sector `[sector_deg.0, sector_deg.1]`.
pub fn sample_edge_devices(
    bs_position: Point,
    coverage_radius_m: f64,
    count: usize,
    sector_deg: (f64, f64),
    seed: u64,
) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Separate stream from the cluster placement that shares the seed.
    rng.set_stream(1);
    let inner = EDGE_BAND_INNER * coverage_radius_m;
    let (lo, hi) = (sector_deg.0.to_radians(), sector_deg.1.to_radians());
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let r = (inner * inner + u * (coverage_radius_m * coverage_radius_m - inner * inner)).sqrt();
            let theta = lo + (hi - lo) * rng.random::<f64>();
            Point::new(bs_position.x + r * theta.cos(), bs_position.y + r * theta.sin())
        })
        .collect()
}

/// Per-role value table (transmit powers, initial energies).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleMap<T> {
    pub base_station: T,
    pub relay: T,
    pub cluster_head: T,
    pub cluster_member: T,
}

impl<T: Copy> RoleMap<T> {
    pub fn get(&self, role: Role) -> T {
        match role {
            Role::BaseStation => self.base_station,
            Role::Relay => self.relay,
            Role::ClusterHead => self.cluster_head,
            Role::ClusterMember => self.cluster_member,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    coverage_radius_m: f64,
    /// Node ids per cluster, parent first.
    clusters: Vec<Vec<NodeId>>,
}

impl Topology {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn coverage_radius_m(&self) -> f64 {
        self.coverage_radius_m
    }

    pub fn clusters(&self) -> &[Vec<NodeId>] {
        &self.clusters
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        // Ids are dense from zero.
        self.nodes.get(id.0 as usize)
    }

    pub fn base_station(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn relay_candidates(&self) -> Vec<Node> {
        self.nodes.iter().filter(|n| n.role == Role::Relay).cloned().collect()
    }

    pub fn cluster_nodes(&self, cluster: usize) -> Vec<Node> {
        self.clusters[cluster]
            .iter()
            .map(|&id| self.nodes[id.0 as usize].clone())
            .collect()
    }

    pub fn to_canonical(&self) -> CanonicalTopology {
        CanonicalTopology {
            nodes: self
                .nodes
                .iter()
                .map(|n| CanonicalNode {
                    id: n.id,
                    role: n.role,
                    x_m: n.position.x,
                    y_m: n.position.y,
                    tx_power_w: n.tx_power_w,
                    residual_energy_j: n.residual_energy_j.is_finite().then_some(n.residual_energy_j),
                })
                .collect(),
            coverage_radius_m: self.coverage_radius_m,
            clusters: self.clusters.clone(),
        }
    }
}

/// Serialized node. Unlimited (mains) energy is written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalNode {
    pub id: NodeId,
    pub role: Role,
    pub x_m: f64,
    pub y_m: f64,
    pub tx_power_w: f64,
    pub residual_energy_j: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalTopology {
    pub nodes: Vec<CanonicalNode>,
    pub coverage_radius_m: f64,
    pub clusters: Vec<Vec<NodeId>>,
}

pub fn in_edge_band(bs_position: Point, coverage_radius_m: f64, p: &Point) -> bool {
    let d = bs_position.distance_to(p);
    let slack = BAND_SLACK * coverage_radius_m;
    d >= EDGE_BAND_INNER * coverage_radius_m - slack && d <= coverage_radius_m + slack
}

/// Assembles the BS, the edge-band relay candidates drawn from `devices`,
/// and the cluster layout into one topology with dense ids.
///
/// Devices outside the edge band are not part of the relay chain and are
/// dropped. Cluster parents become cluster heads, daughters members.
pub fn build_scenario_topology(
    layout: &[PlacedCluster],
    devices: &[Point],
    bs_position: Point,
    coverage_radius_m: f64,
    powers: &RoleMap<f64>,
    initial_energy_j: &RoleMap<f64>,
) -> Result<Topology, TopologyError> {
    if !(coverage_radius_m > 0.0 && coverage_radius_m.is_finite()) {
        return Err(TopologyError::Invalid {
            name: "coverage_radius_m",
            constraint: "> 0",
            value: coverage_radius_m,
        });
    }
    for role in [Role::BaseStation, Role::Relay, Role::ClusterHead, Role::ClusterMember] {
        let p = powers.get(role);
        if !(p >= 0.0 && p.is_finite()) {
            return Err(TopologyError::Invalid {
                name: "tx_power_w",
                constraint: "finite and ≥ 0",
                value: p,
            });
        }
        let e = initial_energy_j.get(role);
        if !(e >= 0.0) {
            return Err(TopologyError::Invalid {
                name: "residual_energy_j",
                constraint: "≥ 0",
                value: e,
            });
        }
    }

    let mut nodes = Vec::with_capacity(1 + devices.len() + layout.iter().map(|c| 1 + c.members.len()).sum::<usize>());
    let mut push = |role: Role, position: Point| -> NodeId {
        let id = NodeId(nodes.len() as u32);
        nodes.push(Node {
            id,
            role,
            position,
            tx_power_w: powers.get(role),
            residual_energy_j: initial_energy_j.get(role),
        });
        id
    };

    push(Role::BaseStation, bs_position);
    let mut relays = 0;
    for p in devices.iter().filter(|p| in_edge_band(bs_position, coverage_radius_m, p)) {
        push(Role::Relay, *p);
        relays += 1;
    }
    if relays == 0 {
        return Err(TopologyError::NoRelayCandidate {
            inner_m: EDGE_BAND_INNER * coverage_radius_m,
            outer_m: coverage_radius_m,
        });
    }

    let mut clusters = Vec::with_capacity(layout.len());
    for cluster in layout {
        let mut ids = vec![push(Role::ClusterHead, cluster.parent)];
        ids.extend(cluster.members.iter().map(|&m| push(Role::ClusterMember, m)));
        clusters.push(ids);
    }

    Ok(Topology {
        nodes,
        coverage_radius_m,
        clusters,
    })
}
