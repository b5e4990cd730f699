use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Horizontal and vertical spacing between neighbouring grid nodes.
pub const GRID_SPACING_M: f64 = 0.6;
/// Nominal diagonal spacing. The exact Euclidean value is 0.6·√2 ≈ 0.849 m.
pub const DIAGONAL_SPACING_M: f64 = 0.86;

const RANGE_EPS: f64 = 1e-9;

/// Node identity. `index` is stable across de-tangled variants of a topology.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub index: usize,
    pub label: String,
}

impl NodeId {
    pub fn new(index: usize, label: impl Into<String>) -> Self {
        NodeId { index, label: label.into() }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Client,
    Server,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshNode {
    pub id: NodeId,
    pub position: Position,
    pub role: Role,
    pub tx_power_dbm: f64,
    pub vicinity_range_m: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagonalMode {
    Connected,
    Intermittent,
    Disconnected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioName {
    #[serde(rename = "S1_4dBm")]
    S1FourDbm,
    #[serde(rename = "S2_0dBm")]
    S2ZeroDbm,
    #[serde(rename = "S3_neg4dBm")]
    S3NegFourDbm,
    #[serde(rename = "custom")]
    Custom,
}

/// Transmit-power scenario. A link exists when the node distance is within
/// `vicinity_max_m`; links longer than `vicinity_min_m` are intermittent and
/// present with probability `intermittent_presence` in each trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: ScenarioName,
    pub tx_power_dbm: f64,
    pub vicinity_min_m: f64,
    pub vicinity_max_m: f64,
    /// Mean per-hop latency; edge weights are uniform on ±`hop_latency_spread`.
    pub hop_latency_ms: f64,
    #[serde(default = "default_spread")]
    pub hop_latency_spread: f64,
    #[serde(default = "default_presence")]
    pub intermittent_presence: f64,
}

fn default_spread() -> f64 {
    0.2
}

fn default_presence() -> f64 {
    0.5
}

// Per-hop latency calibration. Scenario 1 is tuned so that S1→C averages
// ~6.25 ms on the default grid; scenarios 2 and 3 target 6.96 and 8.07 ms.
const HOP_MS_S1: f64 = 2.20;
const HOP_MS_S2: f64 = 2.04;
const HOP_MS_S3: f64 = 1.73;

impl Scenario {
    pub fn scenario1() -> Self {
        Scenario {
            name: ScenarioName::S1FourDbm,
            tx_power_dbm: 4.0,
            vicinity_min_m: 0.86,
            vicinity_max_m: 0.86,
            hop_latency_ms: HOP_MS_S1,
            hop_latency_spread: default_spread(),
            intermittent_presence: default_presence(),
        }
    }

    pub fn scenario2() -> Self {
        Scenario {
            name: ScenarioName::S2ZeroDbm,
            tx_power_dbm: 0.0,
            vicinity_min_m: 0.6,
            vicinity_max_m: 0.86,
            hop_latency_ms: HOP_MS_S2,
            hop_latency_spread: default_spread(),
            intermittent_presence: default_presence(),
        }
    }

    pub fn scenario3() -> Self {
        Scenario {
            name: ScenarioName::S3NegFourDbm,
            tx_power_dbm: -4.0,
            vicinity_min_m: 0.6,
            vicinity_max_m: 0.6,
            hop_latency_ms: HOP_MS_S3,
            hop_latency_spread: default_spread(),
            intermittent_presence: default_presence(),
        }
    }

    /// Preset by number (1, 2 or 3).
    pub fn preset(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Self::scenario1()),
            2 => Ok(Self::scenario2()),
            3 => Ok(Self::scenario3()),
            _ => invalid(format!("unknown scenario preset {n}; expected 1, 2 or 3")),
        }
    }

    pub fn presets() -> [Scenario; 3] {
        [Self::scenario1(), Self::scenario2(), Self::scenario3()]
    }

    pub fn with_hop_latency(mut self, ms: f64) -> Self {
        self.hop_latency_ms = ms;
        self
    }

    pub fn diagonal_mode(&self) -> DiagonalMode {
        let diag = GRID_SPACING_M * std::f64::consts::SQRT_2;
        if diag > self.vicinity_max_m + RANGE_EPS {
            DiagonalMode::Disconnected
        } else if diag > self.vicinity_min_m + RANGE_EPS {
            DiagonalMode::Intermittent
        } else {
            DiagonalMode::Connected
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.vicinity_min_m > 0.0 && self.vicinity_max_m >= self.vicinity_min_m) {
            return invalid(format!(
                "vicinity range must satisfy 0 < min <= max, got [{}, {}]",
                self.vicinity_min_m, self.vicinity_max_m
            ));
        }
        if !(self.hop_latency_ms > 0.0 && self.hop_latency_ms.is_finite()) {
            return invalid("hop_latency_ms must be positive and finite");
        }
        if !(0.0..1.0).contains(&self.hop_latency_spread) {
            return invalid("hop_latency_spread must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.intermittent_presence) {
            return invalid("intermittent_presence must lie in [0, 1]");
        }
        Ok(())
    }

    fn classify(&self, distance: f64) -> Option<LinkKind> {
        if distance > self.vicinity_max_m + RANGE_EPS {
            None
        } else if distance > self.vicinity_min_m + RANGE_EPS {
            Some(LinkKind::Intermittent)
        } else {
            Some(LinkKind::Stable)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkKind {
    Stable,
    Intermittent,
}

/// Directed link between two nodes, addressed by their stable indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub distance_m: f64,
    pub kind: LinkKind,
}

/// Node layout used for the default 3 × 4 grid, row 0 first. The client sits
/// in a corner and S1 in the opposite one; {S3, S4, S5, S6} is the cut set
/// that isolates S1 and S2, and S10 is the vertical relay between S7 and C.
pub const DEFAULT_LAYOUT: [[&str; 4]; 3] = [
    ["C", "S11", "S4", "S3"],
    ["S10", "S8", "S5", "S2"],
    ["S7", "S9", "S6", "S1"],
];

/// Mesh of a client and servers with scenario-dependent connectivity.
/// Immutable once built; de-tangling returns a new value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshTopology {
    pub rows: usize,
    pub cols: usize,
    pub scenario: Scenario,
    /// Sorted by `id.index`.
    pub nodes: Vec<MeshNode>,
    /// Sorted by `(from, to)`.
    pub links: Vec<Link>,
    /// Number of node indices in the undamaged grid.
    pub capacity: usize,
}

/// Builds a `rows × cols` grid with spacing 0.6 m. The 3 × 4 grid uses
/// [`DEFAULT_LAYOUT`]; other sizes put C at the origin and number servers in
/// column-serpentine order from the far corner.
pub fn build_grid_mesh(rows: usize, cols: usize, scenario: &Scenario) -> Result<MeshTopology> {
    if rows == 0 || cols == 0 {
        return invalid(format!("grid dimensions must be positive, got {rows}x{cols}"));
    }
    if rows * cols < 2 {
        return invalid("grid needs at least two nodes");
    }
    let layout = if (rows, cols) == (3, 4) {
        DEFAULT_LAYOUT
            .iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect()
    } else {
        serpentine_layout(rows, cols)
    };
    from_layout(&layout, scenario)
}

fn serpentine_layout(rows: usize, cols: usize) -> Vec<Vec<String>> {
    let mut grid = vec![vec![String::new(); cols]; rows];
    grid[0][0] = "C".to_string();
    let mut n = 1;
    for (k, c) in (0..cols).rev().enumerate() {
        let order: Vec<usize> = if k % 2 == 0 {
            (0..rows).rev().collect()
        } else {
            (0..rows).collect()
        };
        for r in order {
            if (r, c) != (0, 0) {
                grid[r][c] = format!("S{n}");
                n += 1;
            }
        }
    }
    grid
}

/// Builds a grid from an explicit label layout (row-major). Exactly one cell
/// must be labelled `C`; empty strings leave a hole.
pub fn from_layout(layout: &[Vec<String>], scenario: &Scenario) -> Result<MeshTopology> {
    scenario.validate()?;
    let rows = layout.len();
    let cols = layout.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || layout.iter().any(|r| r.len() != cols) {
        return invalid("layout must be a non-empty rectangular grid");
    }
    let mut nodes = Vec::new();
    let mut seen = BTreeSet::new();
    for (r, row) in layout.iter().enumerate() {
        for (c, label) in row.iter().enumerate() {
            if label.is_empty() {
                continue;
            }
            if !seen.insert(label.clone()) {
                return invalid(format!("duplicate node label {label}"));
            }
            let role = if label == "C" { Role::Client } else { Role::Server };
            nodes.push(MeshNode {
                id: NodeId { index: 0, label: label.clone() },
                position: Position {
                    x: c as f64 * GRID_SPACING_M,
                    y: r as f64 * GRID_SPACING_M,
                },
                role,
                tx_power_dbm: scenario.tx_power_dbm,
                vicinity_range_m: scenario.vicinity_max_m,
            });
        }
    }
    let clients = nodes.iter().filter(|n| n.role == Role::Client).count();
    if clients != 1 {
        return invalid(format!("layout must contain exactly one client C, found {clients}"));
    }
    if nodes.len() < 2 {
        return invalid("mesh needs at least two nodes");
    }
    // Client first, then servers by their number.
    nodes.sort_by_key(|n| (n.role != Role::Client, server_number(&n.id.label), n.id.label.clone()));
    for (i, n) in nodes.iter_mut().enumerate() {
        n.id.index = i;
    }
    let mut links = Vec::new();
    for a in &nodes {
        for b in &nodes {
            if a.id.index == b.id.index {
                continue;
            }
            let d = a.position.distance(&b.position);
            if let Some(kind) = scenario.classify(d) {
                links.push(Link { from: a.id.index, to: b.id.index, distance_m: d, kind });
            }
        }
    }
    links.sort_by_key(|l| (l.from, l.to));
    let capacity = nodes.len();
    Ok(MeshTopology { rows, cols, scenario: scenario.clone(), nodes, links, capacity })
}

/// Numeric part of a server label (`S7` → 7).
pub fn server_number(label: &str) -> Option<u32> {
    label.strip_prefix('S').and_then(|s| s.parse().ok())
}

impl MeshTopology {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node_by_index(&self, index: usize) -> Option<&MeshNode> {
        self.nodes
            .binary_search_by_key(&index, |n| n.id.index)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn contains(&self, index: usize) -> bool {
        self.node_by_index(index).is_some()
    }

    pub fn node(&self, label: &str) -> Result<&MeshNode> {
        self.nodes
            .iter()
            .find(|n| n.id.label == label)
            .ok_or_else(|| Error::NotFound(format!("node {label}")))
    }

    pub fn id(&self, label: &str) -> Result<NodeId> {
        self.node(label).map(|n| n.id.clone())
    }

    pub fn label(&self, index: usize) -> String {
        self.node_by_index(index)
            .map(|n| n.id.label.clone())
            .unwrap_or_else(|| format!("#{index}"))
    }

    pub fn client(&self) -> &MeshNode {
        self.nodes
            .iter()
            .find(|n| n.role == Role::Client)
            .expect("topology invariant: exactly one client")
    }

    pub fn servers(&self) -> impl Iterator<Item = &MeshNode> {
        self.nodes.iter().filter(|n| n.role == Role::Server)
    }

    pub fn link(&self, from: usize, to: usize) -> Option<&Link> {
        self.links
            .binary_search_by_key(&(from, to), |l| (l.from, l.to))
            .ok()
            .map(|i| &self.links[i])
    }

    pub fn has_link(&self, from: usize, to: usize) -> bool {
        self.link(from, to).is_some()
    }

    /// Outgoing links of `from`.
    pub fn out_links(&self, from: usize) -> &[Link] {
        let start = self.links.partition_point(|l| l.from < from);
        let end = self.links.partition_point(|l| l.from <= from);
        &self.links[start..end]
    }

    /// Row-major label grid of the present nodes; removed nodes leave "".
    pub fn layout(&self) -> Vec<Vec<String>> {
        let mut grid = vec![vec![String::new(); self.cols]; self.rows];
        for n in &self.nodes {
            let r = (n.position.y / GRID_SPACING_M).round() as usize;
            let c = (n.position.x / GRID_SPACING_M).round() as usize;
            grid[r][c] = n.id.label.clone();
        }
        grid
    }

    /// Removes `removed` and every incident link. The client cannot be removed.
    pub fn detangle(&self, removed: &[NodeId]) -> Result<MeshTopology> {
        let mut drop = BTreeSet::new();
        for id in removed {
            let node = self
                .node_by_index(id.index)
                .filter(|n| n.id.label == id.label)
                .ok_or_else(|| Error::NotFound(format!("node {id}")))?;
            if node.role == Role::Client {
                return invalid("the client node cannot be de-tangled");
            }
            drop.insert(id.index);
        }
        let mut out = self.clone();
        out.nodes.retain(|n| !drop.contains(&n.id.index));
        out.links.retain(|l| !drop.contains(&l.from) && !drop.contains(&l.to));
        Ok(out)
    }

    /// Convenience wrapper over [`detangle`](Self::detangle) taking labels.
    pub fn detangle_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<MeshTopology> {
        let ids = labels
            .iter()
            .map(|l| self.id(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.detangle(&ids)
    }

    /// Servers split by the parity of their number: (odd, even).
    pub fn parity_groups(&self) -> (Vec<NodeId>, Vec<NodeId>) {
        self.servers()
            .map(|n| n.id.clone())
            .partition(|id| server_number(&id.label).map_or(id.index as u32, |k| k) % 2 == 1)
    }

    /// Undirected hop distance from every node to `dst` (`None` if unreachable),
    /// indexed by node index.
    pub fn hop_distances_to(&self, dst: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.capacity];
        if !self.contains(dst) {
            return dist;
        }
        dist[dst] = Some(0);
        let mut frontier = vec![dst];
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for l in self.out_links(u) {
                    if dist[l.to].is_none() {
                        dist[l.to] = Some(d);
                        next.push(l.to);
                    }
                }
            }
            frontier = next;
        }
        dist
    }
}
