use serde::Serialize;

use super::grid::{MeshTopology, NodeId};
use crate::error::{invalid, Error, Result};

/// All simple paths of exactly `hop_count` links between two nodes. Paths are
/// node-index sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathGroup {
    pub src: usize,
    pub dst: usize,
    pub hop_count: usize,
    pub paths: Vec<Vec<usize>>,
}

impl PathGroup {
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }
}

/// Depth-bounded DFS for every simple `i`-link path from `src` to `dst`.
/// Paths come out in lexicographic order of node index.
pub fn enumerate_ihop_paths(
    topology: &MeshTopology,
    src: &NodeId,
    dst: &NodeId,
    i: usize,
) -> Result<PathGroup> {
    if src.index == dst.index {
        return invalid("source and destination must differ");
    }
    if i == 0 {
        return invalid("hop count must be at least 1");
    }
    for id in [src, dst] {
        if !topology.contains(id.index) {
            return Err(Error::NotFound(format!("node {id}")));
        }
    }
    let mut paths = Vec::new();
    let mut on_path = vec![false; topology.capacity];
    let mut stack = vec![src.index];
    on_path[src.index] = true;
    extend(topology, dst.index, i, &mut stack, &mut on_path, &mut paths);
    Ok(PathGroup { src: src.index, dst: dst.index, hop_count: i, paths })
}

fn extend(
    t: &MeshTopology,
    dst: usize,
    hops: usize,
    stack: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let u = *stack.last().unwrap();
    let remaining = hops + 1 - stack.len();
    for l in t.out_links(u) {
        let v = l.to;
        if on_path[v] {
            continue;
        }
        if v == dst {
            if remaining == 1 {
                let mut p = stack.clone();
                p.push(v);
                out.push(p);
            }
            continue;
        }
        if remaining > 1 {
            on_path[v] = true;
            stack.push(v);
            extend(t, dst, hops, stack, on_path, out);
            stack.pop();
            on_path[v] = false;
        }
    }
}

/// Canonical orientation of the mesh toward a destination: nodes ranked by
/// decreasing hop distance to `dst`, ties by increasing index. Every edge of
/// the directed acyclic views points forward in this rank.
pub fn orientation_rank(topology: &MeshTopology, dst: usize) -> Vec<Option<(usize, usize)>> {
    let dist = topology.hop_distances_to(dst);
    (0..topology.capacity)
        .map(|v| dist[v].map(|d| (usize::MAX - d, v)))
        .collect()
}

/// Directed acyclic view of the mesh between a source and a destination,
/// restricted to nodes that lie on some `src → dst` path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DagTopology {
    pub src: usize,
    pub dst: usize,
    /// Topologically ordered; `src` first and `dst` last when connected.
    pub nodes: Vec<usize>,
    /// Directed edges `(from, to)`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Number of distinct `src → dst` paths.
    pub path_count: u128,
}

impl DagTopology {
    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.1 == v).map(|e| e.0).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.0 == v).map(|e| e.1).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.path_count == 0
    }

    /// Kahn-style check that the edge set has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg: std::collections::BTreeMap<usize, usize> =
            self.nodes.iter().map(|&v| (v, 0)).collect();
        for &(_, b) in &self.edges {
            *indeg.entry(b).or_default() += 1;
        }
        let mut ready: Vec<usize> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for c in self.children(v) {
                let d = indeg.get_mut(&c).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(c);
                }
            }
        }
        seen == indeg.len()
    }
}

/// Orients every mesh adjacency from the endpoint farther (in hops) from
/// `dst` toward the nearer one; equal distances point from the lower to the
/// higher node index. Nodes not on any `src → dst` path are dropped. An
/// isolated source or destination yields an empty DAG with zero paths.
pub fn build_dag(topology: &MeshTopology, src: &NodeId, dst: &NodeId) -> Result<DagTopology> {
    if src.index == dst.index {
        return invalid("source and destination must differ");
    }
    for id in [src, dst] {
        if !topology.contains(id.index) {
            return Err(Error::NotFound(format!("node {id}")));
        }
    }
    let rank = orientation_rank(topology, dst.index);
    let empty = DagTopology {
        src: src.index,
        dst: dst.index,
        nodes: Vec::new(),
        edges: Vec::new(),
        path_count: 0,
    };
    if rank[src.index].is_none() {
        return Ok(empty);
    }
    let mut edges: Vec<(usize, usize)> = topology
        .links
        .iter()
        .filter(|l| match (rank[l.from], rank[l.to]) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        })
        .map(|l| (l.from, l.to))
        .collect();

    // Forward reachability from src, backward from dst.
    let n = topology.capacity;
    let mut fwd = vec![false; n];
    fwd[src.index] = true;
    let mut order: Vec<usize> = (0..n).filter(|&v| rank[v].is_some()).collect();
    order.sort_by_key(|&v| rank[v]);
    for &v in &order {
        if fwd[v] {
            for e in edges.iter().filter(|e| e.0 == v) {
                fwd[e.1] = true;
            }
        }
    }
    let mut bwd = vec![false; n];
    bwd[dst.index] = true;
    for &v in order.iter().rev() {
        if edges.iter().any(|e| e.0 == v && bwd[e.1]) {
            bwd[v] = true;
        }
    }
    let keep: Vec<bool> = (0..n).map(|v| fwd[v] && bwd[v]).collect();
    edges.retain(|e| keep[e.0] && keep[e.1]);
    edges.sort();
    let nodes: Vec<usize> = order.into_iter().filter(|&v| keep[v]).collect();
    if nodes.is_empty() {
        return Ok(empty);
    }

    let mut count = vec![0u128; n];
    count[src.index] = 1;
    for &v in &nodes {
        if v == src.index {
            continue;
        }
        count[v] = edges.iter().filter(|e| e.1 == v).map(|e| count[e.0]).sum();
    }
    Ok(DagTopology { src: src.index, dst: dst.index, nodes, edges, path_count: count[dst.index] })
}
