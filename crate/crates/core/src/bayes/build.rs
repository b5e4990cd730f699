use std::collections::{BTreeSet, VecDeque};

use super::cpd::{Cpd, StateSpace};
use super::infer::infer_with;
use super::net::{BayesNet, BayesNode};
use super::InferenceOptions;
use crate::error::{Error, Result};
use crate::topology::{DagTopology, LinkSample, MeshTopology, NodeId, PathGroup};

fn inhibition(sample: &LinkSample, from: usize, to: usize) -> f64 {
    sample.get(from, to).map_or(1.0, |s| s.inhibition())
}

fn node_id(topology: &MeshTopology, index: usize) -> NodeId {
    NodeId::new(index, topology.label(index))
}

/// Acyclic edge set of an i-hop path group.
///
/// Each node's parents are its predecessors across the group's paths. When
/// two paths traverse relays in opposite orders the union has cycles; inside
/// each strongly connected component only edges that move toward the
/// destination (union hop distance, then node index) are kept. Nodes cut off
/// from the source or destination by that are dropped.
pub fn group_dag(group: &PathGroup) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut nodes: Vec<usize> = group.paths.iter().flatten().copied().collect();
    nodes.sort_unstable();
    nodes.dedup();
    let m = nodes.len();
    let at = |v: usize| nodes.binary_search(&v).unwrap();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for p in &group.paths {
        for w in p.windows(2) {
            edges.insert((at(w[0]), at(w[1])));
        }
    }
    if m == 0 {
        return (Vec::new(), Vec::new());
    }

    // Undirected hop distance to dst within the union.
    let mut dist = vec![usize::MAX; m];
    let d0 = at(group.dst);
    dist[d0] = 0;
    let mut queue = VecDeque::from([d0]);
    while let Some(v) = queue.pop_front() {
        for &(a, b) in &edges {
            let u = if a == v { b } else if b == v { a } else { continue };
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let rank = |v: usize| (usize::MAX - dist[v], nodes[v]);

    let mut reach = vec![vec![false; m]; m];
    for &(a, b) in &edges {
        reach[a][b] = true;
    }
    for k in 0..m {
        for i in 0..m {
            if reach[i][k] {
                for j in 0..m {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let kept: Vec<(usize, usize)> = edges
        .into_iter()
        .filter(|&(a, b)| !(reach[b][a]) || rank(a) < rank(b))
        .collect();

    let s0 = at(group.src);
    let mut fwd = vec![false; m];
    fwd[s0] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in &kept {
            if fwd[a] && !fwd[b] {
                fwd[b] = true;
                changed = true;
            }
        }
    }
    let mut bwd = vec![false; m];
    bwd[d0] = true;
    changed = true;
    while changed {
        changed = false;
        for &(a, b) in &kept {
            if bwd[b] && !bwd[a] {
                bwd[a] = true;
                changed = true;
            }
        }
    }
    let live: Vec<bool> = (0..m).map(|v| fwd[v] && bwd[v]).collect();
    let kept: Vec<(usize, usize)> = kept.into_iter().filter(|&(a, b)| live[a] && live[b]).collect();

    // Kahn order, ready nodes taken by rank.
    let mut indeg = vec![0usize; m];
    for &(_, b) in &kept {
        indeg[b] += 1;
    }
    let mut ready: BTreeSet<((usize, usize), usize)> =
        (0..m).filter(|&v| live[v] && indeg[v] == 0).map(|v| (rank(v), v)).collect();
    let mut order = Vec::new();
    while let Some(first) = ready.pop_first() {
        let v = first.1;
        order.push(v);
        for &(a, b) in &kept {
            if a == v {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.insert((rank(b), b));
                }
            }
        }
    }
    let order: Vec<usize> = order.into_iter().map(|v| nodes[v]).collect();
    let edges = kept.into_iter().map(|(a, b)| (nodes[a], nodes[b])).collect();
    (order, edges)
}

fn assemble(
    topology: &MeshTopology,
    order: &[usize],
    edges: &[(usize, usize)],
    sample: &LinkSample,
    integer: bool,
) -> Result<BayesNet> {
    let mut out: Vec<BayesNode> = Vec::with_capacity(order.len());
    for (pos, &v) in order.iter().enumerate() {
        let parents: Vec<usize> = edges
            .iter()
            .filter(|e| e.1 == v)
            .map(|e| order.iter().position(|&u| u == e.0).unwrap())
            .collect();
        let id = node_id(topology, v);
        let node = if pos == 0 {
            let states = if integer { StateSpace::Integer { max: 1 } } else { StateSpace::Binary };
            BayesNode { id, states, parents: vec![], cpd: Cpd::RootPrior { p_active: 1.0 } }
        } else {
            let inhibitions: Vec<f64> =
                parents.iter().map(|&p| inhibition(sample, order[p], v)).collect();
            if integer {
                let max = parents.iter().map(|&p| out[p].states.max_state()).sum();
                BayesNode {
                    id,
                    states: StateSpace::Integer { max },
                    parents,
                    cpd: Cpd::NoisyIntAdd { inhibitions },
                }
            } else {
                BayesNode { id, states: StateSpace::Binary, parents, cpd: Cpd::NoisyOr { inhibitions } }
            }
        };
        out.push(node);
    }
    BayesNet::new(out)
}

/// Binary Noisy-OR equivalent of one i-hop path group under one link sample.
/// The source is a root that is always active; every other node fires if a
/// parent fires and the link from it does not fail.
pub fn build_delivery_bn(
    topology: &MeshTopology,
    group: &PathGroup,
    sample: &LinkSample,
) -> Result<BayesNet> {
    let no_paths = || Error::NoPaths { src: topology.label(group.src), dst: topology.label(group.dst) };
    if group.is_empty() {
        return Err(no_paths());
    }
    let (order, edges) = group_dag(group);
    if order.first() != Some(&group.src) || order.last() != Some(&group.dst) {
        return Err(no_paths());
    }
    assemble(topology, &order, &edges, sample, false)
}

/// Integer Noisy-Add equivalent of a destination-oriented DAG: each node's
/// state is the number of intact source-to-node paths through it. With no
/// failures the destination's state equals `dag.path_count`.
pub fn build_pathcount_bn(
    topology: &MeshTopology,
    dag: &DagTopology,
    sample: &LinkSample,
) -> Result<BayesNet> {
    if dag.is_empty() {
        return Err(Error::NoPaths { src: topology.label(dag.src), dst: topology.label(dag.dst) });
    }
    assemble(topology, &dag.nodes, &dag.edges, sample, true)
}

/// P(dst active | src active). A destination outside the net has zero
/// delivery belief. Integer nets are answered on their binary projection,
/// which gives the same P(dst = 0) with far smaller factors.
pub fn delivery_belief(net: &BayesNet, src: &NodeId, dst: &NodeId) -> Result<f64> {
    delivery_belief_with(net, src, dst, &InferenceOptions::default())
}

pub fn delivery_belief_with(
    net: &BayesNet,
    src: &NodeId,
    dst: &NodeId,
    opts: &InferenceOptions,
) -> Result<f64> {
    if net.position_of(dst).is_none() {
        return Ok(0.0);
    }
    if net.position_of(src).is_none() {
        return Err(Error::NotFound(format!("source {src} not in net")));
    }
    if net.is_binary() {
        Ok(infer_with(net, &[(src.clone(), 1)], dst, opts)?.p_active())
    } else {
        let bin = net.binary_projection();
        Ok(infer_with(&bin, &[(src.clone(), 1)], dst, opts)?.p_active())
    }
}

/// Delivery belief of an i-hop group; zero for a group without paths.
pub fn group_delivery(topology: &MeshTopology, group: &PathGroup, sample: &LinkSample) -> Result<f64> {
    if group.is_empty() {
        return Ok(0.0);
    }
    match build_delivery_bn(topology, group, sample) {
        Ok(net) => delivery_belief(&net, &node_id(topology, group.src), &node_id(topology, group.dst)),
        Err(Error::NoPaths { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_dag, enumerate_ihop_paths, from_layout, sample_trial, Scenario};

    fn layout(rows: &[&[&str]]) -> Vec<Vec<String>> {
        rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
    }

    #[test]
    fn two_relay_group() {
        // S1 reaches C in two hops through S2 or S3.
        let t = from_layout(&layout(&[&["C", "S2"], &["S3", "S1"]]), &Scenario::scenario3()).unwrap();
        let (s1, c) = (t.id("S1").unwrap(), t.id("C").unwrap());
        let g = enumerate_ihop_paths(&t, &s1, &c, 2).unwrap();
        assert_eq!(g.len(), 2);
        let sample = sample_trial(&t, 1, 0).with_constant_failure(0.5);
        let net = build_delivery_bn(&t, &g, &sample).unwrap();
        assert_eq!(net.len(), 4);
        let b = delivery_belief(&net, &s1, &c).unwrap();
        assert!((b - (1.0 - 0.75f64 * 0.75)).abs() < 1e-12);
    }

    #[test]
    fn empty_group_is_zero() {
        let t = from_layout(&layout(&[&["C", "S2"], &["S3", "S1"]]), &Scenario::scenario3()).unwrap();
        let (s1, c) = (t.id("S1").unwrap(), t.id("C").unwrap());
        let g = enumerate_ihop_paths(&t, &s1, &c, 1).unwrap();
        let sample = sample_trial(&t, 1, 0);
        assert!(matches!(build_delivery_bn(&t, &g, &sample), Err(Error::NoPaths { .. })));
        assert_eq!(group_delivery(&t, &g, &sample).unwrap(), 0.0);
    }

    #[test]
    fn pathcount_without_failures_counts_paths() {
        let t = crate::topology::build_grid_mesh(3, 4, &Scenario::scenario1()).unwrap();
        let (s, c) = (t.id("S5").unwrap(), t.id("C").unwrap());
        let dag = build_dag(&t, &s, &c).unwrap();
        let sample = sample_trial(&t, 3, 0).with_constant_failure(0.0);
        let net = build_pathcount_bn(&t, &dag, &sample).unwrap();
        let b = super::super::infer(&net, &[(s.clone(), 1)], &c).unwrap();
        let count = dag.path_count as usize;
        assert!((b.distribution[count] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cyclic_union_becomes_acyclic() {
        let t = crate::topology::build_grid_mesh(3, 4, &Scenario::scenario1()).unwrap();
        for s in t.servers() {
            let c = t.client().id.clone();
            for i in 1..=5 {
                let g = enumerate_ihop_paths(&t, &s.id, &c, i).unwrap();
                if g.is_empty() {
                    continue;
                }
                let (order, edges) = group_dag(&g);
                for (a, b) in &edges {
                    let pa = order.iter().position(|v| v == a).unwrap();
                    let pb = order.iter().position(|v| v == b).unwrap();
                    assert!(pa < pb);
                }
                assert_eq!(order[0], s.id.index);
                assert_eq!(*order.last().unwrap(), c.index);
            }
        }
    }
}
