use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::detect::{AnomalyReport, Severity};
use crate::error::Result;
use crate::latency::trial_latencies;
use crate::topology::{LinkSample, MeshTopology, NodeId};

/// Effect of removing one relay on one source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelayShift {
    pub relay: String,
    /// Paired mean latency change over trials that stay reachable; `None`
    /// when no trial does.
    pub delta_mean_ms: Option<f64>,
    pub unreachable_fraction: f64,
    pub critical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub source: String,
    pub destination: String,
    /// Critical relays, by node index.
    pub critical: Vec<String>,
    pub shifts: Vec<RelayShift>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalNodeMap {
    pub sensitivity_delta_ms: f64,
    pub pairs: Vec<CriticalPair>,
}

impl CriticalNodeMap {
    pub fn critical_for(&self, source: &str) -> &[String] {
        self.pairs
            .iter()
            .find(|p| p.source == source)
            .map_or(&[], |p| p.critical.as_slice())
    }
}

/// For every source and every other relay, removes the relay and compares
/// per-trial latency with the baseline on the same samples. A relay is
/// critical when the mean shifts by at least `sensitivity_delta_ms` or the
/// pair becomes unreachable in every trial.
pub fn build_critical_node_map(
    topology: &MeshTopology,
    sources: &[NodeId],
    dst: &NodeId,
    samples: &[LinkSample],
    sensitivity_delta_ms: f64,
) -> Result<CriticalNodeMap> {
    let relays: Vec<NodeId> = topology
        .nodes
        .iter()
        .map(|n| n.id.clone())
        .filter(|id| id.index != dst.index)
        .collect();
    let base: Vec<Vec<f64>> = sources
        .iter()
        .map(|s| trial_latencies(topology, samples, s, dst))
        .collect();
    let mut pairs: Vec<CriticalPair> = sources
        .iter()
        .map(|s| CriticalPair {
            source: s.label.clone(),
            destination: dst.label.clone(),
            critical: Vec::new(),
            shifts: Vec::new(),
        })
        .collect();
    for r in &relays {
        let cut = topology.detangle(std::slice::from_ref(r))?;
        for (j, s) in sources.iter().enumerate() {
            if s.index == r.index {
                continue;
            }
            let after = trial_latencies(&cut, samples, s, dst);
            let mut diff = 0.0;
            let mut reachable = 0usize;
            for (a, b) in after.iter().zip(&base[j]) {
                if a.is_finite() && b.is_finite() {
                    diff += a - b;
                    reachable += 1;
                }
            }
            let unreachable_fraction = 1.0 - reachable as f64 / samples.len() as f64;
            let delta = (reachable > 0).then(|| diff / reachable as f64);
            let critical = delta.is_none_or(|d| d.abs() >= sensitivity_delta_ms);
            if critical {
                pairs[j].critical.push(r.label.clone());
            }
            pairs[j].shifts.push(RelayShift {
                relay: r.label.clone(),
                delta_mean_ms: delta,
                unreachable_fraction,
                critical,
            });
        }
    }
    Ok(CriticalNodeMap { sensitivity_delta_ms, pairs })
}

/// Relays critical to some anomalous pair and to no normal pair, plus every
/// source observed as disconnected. Never contains the destination.
pub fn localize(report: &AnomalyReport, cmap: &CriticalNodeMap) -> Vec<String> {
    let mut accused = BTreeSet::new();
    let mut cleared = BTreeSet::new();
    for v in &report.verdicts {
        let set = if v.anom { &mut accused } else { &mut cleared };
        set.extend(cmap.critical_for(&v.source).iter().cloned());
    }
    let mut suspects: BTreeSet<String> = accused.difference(&cleared).cloned().collect();
    for v in report.verdicts.iter().filter(|v| v.severity == Severity::Disconnected) {
        suspects.insert(v.source.clone());
    }
    if let Some(d) = cmap.pairs.first().map(|p| &p.destination) {
        suspects.remove(d);
    }
    // Order by server number, then label.
    let mut out: Vec<String> = suspects.into_iter().collect();
    out.sort_by_key(|l| (crate::topology::server_number(l), l.clone()));
    out
}
