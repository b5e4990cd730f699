use serde::{Deserialize, Serialize};

use super::cpd::{Cpd, StateSpace};
use crate::error::{invalid, Result};
use crate::topology::NodeId;

#[derive(Clone, Debug, PartialEq)]
pub struct BayesNode {
    pub id: NodeId,
    pub states: StateSpace,
    /// Positions of the parents in [`BayesNet::nodes`]; always smaller than
    /// the node's own position.
    pub parents: Vec<usize>,
    pub cpd: Cpd,
}

/// A Bayesian network whose nodes are stored in topological order.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesNet {
    nodes: Vec<BayesNode>,
}

impl BayesNet {
    /// Validates the structure: parents precede children, gate length matches
    /// the parent count, probabilities lie in [0,1], roots carry a prior and
    /// integer nodes can hold the sum of their parents' maxima.
    pub fn new(nodes: Vec<BayesNode>) -> Result<Self> {
        for (pos, n) in nodes.iter().enumerate() {
            if nodes[..pos].iter().any(|m| m.id.index == n.id.index) {
                return invalid(format!("duplicate node {}", n.id));
            }
            if let Some(&p) = n.parents.iter().find(|&&p| p >= pos) {
                return invalid(format!("parent #{p} of {} does not precede it", n.id));
            }
            let mut sorted = n.parents.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != n.parents.len() {
                return invalid(format!("repeated parent of {}", n.id));
            }
            let probs: Vec<f64> = match &n.cpd {
                Cpd::RootPrior { p_active } => {
                    if !n.parents.is_empty() {
                        return invalid(format!("{} has parents but a root prior", n.id));
                    }
                    vec![*p_active]
                }
                Cpd::NoisyOr { inhibitions } | Cpd::NoisyIntAdd { inhibitions } => {
                    if n.parents.is_empty() {
                        return invalid(format!("{} is a root without a prior", n.id));
                    }
                    if inhibitions.len() != n.parents.len() {
                        return invalid(format!(
                            "{} has {} parents but {} inhibitions",
                            n.id,
                            n.parents.len(),
                            inhibitions.len()
                        ));
                    }
                    inhibitions.clone()
                }
            };
            if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return invalid(format!("probability {p} at {} outside [0,1]", n.id));
            }
            match (&n.cpd, n.states) {
                (Cpd::NoisyOr { .. }, StateSpace::Binary) => {}
                (Cpd::NoisyOr { .. }, _) => {
                    return invalid(format!("noisy-or node {} must be binary", n.id))
                }
                (Cpd::NoisyIntAdd { .. }, states) => {
                    let need: usize = n.parents.iter().map(|&p| nodes[p].states.max_state()).sum();
                    if states.max_state() != need {
                        return invalid(format!(
                            "{} holds states up to {} but its parents sum to {need}",
                            n.id,
                            states.max_state()
                        ));
                    }
                }
                (Cpd::RootPrior { .. }, _) => {}
            }
        }
        Ok(BayesNet { nodes })
    }

    pub fn nodes(&self) -> &[BayesNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of the node with mesh index `index`.
    pub fn position(&self, index: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.id.index == index)
    }

    pub fn position_of(&self, id: &NodeId) -> Option<usize> {
        self.position(id.index)
    }

    /// Noisy-OR net on the same structure and inhibitions. A Noisy-Add node
    /// is zero exactly when every nonzero parent is blocked, so P(node = 0)
    /// is the same in both nets.
    pub fn binary_projection(&self) -> BayesNet {
        let nodes = self
            .nodes
            .iter()
            .map(|n| BayesNode {
                id: n.id.clone(),
                states: StateSpace::Binary,
                parents: n.parents.clone(),
                cpd: match &n.cpd {
                    Cpd::NoisyIntAdd { inhibitions } => {
                        Cpd::NoisyOr { inhibitions: inhibitions.clone() }
                    }
                    other => other.clone(),
                },
            })
            .collect();
        BayesNet { nodes }
    }

    pub fn is_binary(&self) -> bool {
        self.nodes.iter().all(|n| n.states == StateSpace::Binary)
    }

    pub fn to_dump(&self) -> NetDump {
        NetDump {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDump {
                    label: n.id.label.clone(),
                    index: n.id.index,
                    states: n.states,
                    parents: n.parents.iter().map(|&p| self.nodes[p].id.label.clone()).collect(),
                    cpd: n.cpd.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("net dump serializes")
    }

    pub fn from_dump(dump: &NetDump) -> Result<Self> {
        let mut nodes = Vec::with_capacity(dump.nodes.len());
        for n in &dump.nodes {
            let mut parents = Vec::with_capacity(n.parents.len());
            for p in &n.parents {
                match dump.nodes.iter().position(|m| &m.label == p) {
                    Some(pos) => parents.push(pos),
                    None => return invalid(format!("unknown parent {p} of {}", n.label)),
                }
            }
            nodes.push(BayesNode {
                id: NodeId::new(n.index, n.label.clone()),
                states: n.states,
                parents,
                cpd: n.cpd.clone(),
            });
        }
        BayesNet::new(nodes)
    }
}

/// Label-addressed form of a [`BayesNet`] for JSON inspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetDump {
    pub nodes: Vec<NodeDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDump {
    pub label: String,
    pub index: usize,
    pub states: StateSpace,
    pub parents: Vec<String>,
    pub cpd: Cpd,
}
