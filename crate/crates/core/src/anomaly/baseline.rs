use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::critical::{build_critical_node_map, CriticalNodeMap};
use super::pdr::{resolve_fractions, trial_pdr, KFractions};
use crate::error::{invalid, Error, Result};
use crate::latency::shortest_path_latency;
use crate::topology::{
    sample_link_uncertainty, LinkSample, MeshTopology, NodeId, Scenario, ScenarioSpec,
    TopologyConfig,
};

pub const DEFAULT_K_SIGMA: f64 = 3.0;
pub const DEFAULT_MAX_HOPS: usize = 4;
/// Mean latency shift, in ms, that makes a relay critical for a pair.
pub const DEFAULT_SENSITIVITY_MS: f64 = 2.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    pub trials: usize,
    pub seed: u64,
    pub k_sigma: f64,
    pub max_hops: usize,
    pub k_fractions: KFractions,
    /// `None` skips the critical-node map.
    pub sensitivity_delta_ms: Option<f64>,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions {
            trials: 1000,
            seed: 0,
            k_sigma: DEFAULT_K_SIGMA,
            max_hops: DEFAULT_MAX_HOPS,
            k_fractions: KFractions::PathShare,
            sensitivity_delta_ms: Some(DEFAULT_SENSITIVITY_MS),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceBaseline {
    pub source: String,
    pub index: usize,
    pub latency_mean: f64,
    pub latency_std: f64,
    pub pdr_mean: f64,
    pub pdr_std: f64,
    /// Latency threshold `mean + kσ`.
    pub b_thl: f64,
    /// PDR threshold `mean − kσ`, clamped to [0, 1].
    pub b_thp: f64,
    /// Hop count → mixing fraction used for this source's PDR.
    pub k_fractions: BTreeMap<usize, f64>,
}

impl SourceBaseline {
    pub fn id(&self) -> NodeId {
        NodeId::new(self.index, self.source.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineProfile {
    pub topology: TopologyConfig,
    pub scenario: Scenario,
    pub destination: String,
    pub trials: usize,
    pub seed: u64,
    pub k_sigma: f64,
    pub max_hops: usize,
    pub sources: Vec<SourceBaseline>,
    /// Mean PDR of the odd- and even-numbered source groups.
    pub parity_pdr: (f64, f64),
    /// Average of the two parity groups.
    pub network_pdr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<CriticalNodeMap>,
}

impl BaselineProfile {
    pub fn source(&self, label: &str) -> Option<&SourceBaseline> {
        self.sources.iter().find(|s| s.source == label)
    }

    pub fn build_topology(&self) -> Result<MeshTopology> {
        self.topology.build()
    }

    pub fn destination_id(&self, topology: &MeshTopology) -> Result<NodeId> {
        topology.id(&self.destination)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: BaselineProfile = serde_json::from_str(s)?;
        if p.sources.is_empty() {
            return Err(Error::Config("profile has no sources".into()));
        }
        Ok(p)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-trial (latency, pdr) of every source, in source order.
pub(crate) fn observe_trial(
    topology: &MeshTopology,
    sources: &[(NodeId, BTreeMap<usize, f64>)],
    dst: &NodeId,
    sample: &LinkSample,
) -> Result<Vec<(f64, f64)>> {
    sources
        .iter()
        .map(|(s, k)| {
            if !topology.contains(s.index) {
                return Ok((f64::INFINITY, 0.0));
            }
            let lat = shortest_path_latency(topology, sample, s, dst);
            Ok((lat, trial_pdr(topology, s, dst, sample, k)?))
        })
        .collect()
}

/// Characterizes every server of `topology` against the client over
/// `opts.trials` link-uncertainty draws.
pub fn characterize_baseline(topology: &MeshTopology, opts: &BaselineOptions) -> Result<BaselineProfile> {
    let dst = topology.client().id.clone();
    let sources: Vec<NodeId> = topology.servers().map(|n| n.id.clone()).collect();
    characterize_sources(topology, &sources, &dst, opts)
}

pub fn characterize_sources(
    topology: &MeshTopology,
    sources: &[NodeId],
    dst: &NodeId,
    opts: &BaselineOptions,
) -> Result<BaselineProfile> {
    if sources.is_empty() {
        return invalid("no sources to characterize");
    }
    if !(opts.k_sigma >= 0.0) || !opts.k_sigma.is_finite() {
        return invalid(format!("k_sigma must be a non-negative number, got {}", opts.k_sigma));
    }
    let hops = topology.hop_distances_to(dst.index);
    if let Some(s) = sources.iter().find(|s| hops[s.index].is_none()) {
        return Err(Error::Config(format!("baseline is disconnected: {s} cannot reach {dst}")));
    }
    let with_k: Vec<(NodeId, BTreeMap<usize, f64>)> = sources
        .iter()
        .map(|s| Ok((s.clone(), resolve_fractions(topology, s, dst, opts.max_hops, &opts.k_fractions)?)))
        .collect::<Result<_>>()?;

    let samples = sample_link_uncertainty(topology, opts.trials, opts.seed)?;
    let per_trial = samples
        .par_iter()
        .map(|s| observe_trial(topology, &with_k, dst, s))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(sources.len());
    for (j, (s, k)) in with_k.iter().enumerate() {
        let lat: Vec<f64> = per_trial.iter().map(|t| t[j].0).collect();
        let pdr: Vec<f64> = per_trial.iter().map(|t| t[j].1).collect();
        if lat.iter().any(|l| !l.is_finite()) {
            return Err(Error::Config(format!(
                "baseline is disconnected: {s} cannot reach {dst} in some trials"
            )));
        }
        let (lm, ls) = mean_std(&lat);
        let (pm, ps) = mean_std(&pdr);
        rows.push(SourceBaseline {
            source: s.label.clone(),
            index: s.index,
            latency_mean: lm,
            latency_std: ls,
            pdr_mean: pm,
            pdr_std: ps,
            b_thl: lm + opts.k_sigma * ls,
            b_thp: (pm - opts.k_sigma * ps).clamp(0.0, 1.0),
            k_fractions: k.clone(),
        });
    }

    let (odd, even) = topology.parity_groups();
    let group_mean = |ids: &[NodeId]| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| ids.iter().any(|i| i.index == r.index))
            .map(|r| r.pdr_mean)
            .collect();
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };
    let (po, pe) = (group_mean(&odd), group_mean(&even));
    let network_pdr = match (po, pe) {
        (Some(a), Some(b)) => (a + b) / 2.0,
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0.0,
    };

    let critical = match opts.sensitivity_delta_ms {
        Some(delta) => Some(build_critical_node_map(topology, sources, dst, &samples, delta)?),
        None => None,
    };

    Ok(BaselineProfile {
        topology: TopologyConfig {
            rows: topology.rows,
            cols: topology.cols,
            scenario: ScenarioSpec::Custom { custom: topology.scenario.clone() },
            layout: Some(topology.layout()),
        },
        scenario: topology.scenario.clone(),
        destination: dst.label.clone(),
        trials: opts.trials,
        seed: opts.seed,
        k_sigma: opts.k_sigma,
        max_hops: opts.max_hops,
        sources: rows,
        parity_pdr: (po.unwrap_or(0.0), pe.unwrap_or(0.0)),
        network_pdr,
        critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::build_grid_mesh;

    fn quick(trials: usize, k_sigma: f64) -> BaselineOptions {
        BaselineOptions { trials, seed: 11, k_sigma, sensitivity_delta_ms: None, ..Default::default() }
    }

    #[test]
    fn thresholds_bracket_means() {
        let t = build_grid_mesh(3, 4, &Scenario::scenario2()).unwrap();
        let p = characterize_baseline(&t, &quick(40, 3.0)).unwrap();
        assert_eq!(p.sources.len(), 11);
        for s in &p.sources {
            assert!(s.b_thl >= s.latency_mean);
            assert!(s.b_thp <= s.pdr_mean);
            assert!((0.0..=1.0).contains(&s.b_thp));
            assert!((s.k_fractions.values().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let back = BaselineProfile::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.build_topology().unwrap().links, t.links);
    }

    #[test]
    fn single_trial_has_zero_spread() {
        let t = build_grid_mesh(3, 4, &Scenario::scenario1()).unwrap();
        let p = characterize_baseline(&t, &quick(1, 3.0)).unwrap();
        for s in &p.sources {
            assert_eq!(s.latency_std, 0.0);
            assert_eq!(s.b_thl, s.latency_mean);
        }
    }

    #[test]
    fn disconnected_baseline_rejected() {
        let t = build_grid_mesh(3, 4, &Scenario::scenario1()).unwrap();
        let cut = t.detangle_labels(&["S3", "S4", "S5", "S6"]).unwrap();
        let srcs = vec![t.id("S1").unwrap()];
        let err = characterize_sources(&cut, &srcs, &t.id("C").unwrap(), &quick(5, 3.0));
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
