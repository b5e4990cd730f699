use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::group_delivery;
use crate::error::{invalid, Error, Result};
use crate::topology::{enumerate_ihop_paths, LinkSample, MeshTopology, NodeId};

/// How the per-hop PDRs are mixed into one PDR.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KFractions {
    /// `k_i` proportional to the number of i-hop paths of the pair, for
    /// `i ≤ max_hops`. A pair with no path that short puts all weight on its
    /// shortest hop count.
    PathShare,
    /// Explicit `hop count → fraction`, summing to one.
    Fixed(BTreeMap<usize, f64>),
}

impl Default for KFractions {
    fn default() -> Self {
        KFractions::PathShare
    }
}

pub fn validate_fractions(k: &BTreeMap<usize, f64>) -> Result<()> {
    if k.is_empty() {
        return invalid("k fractions are empty");
    }
    if let Some((i, f)) = k.iter().find(|(i, f)| **i == 0 || !(0.0..=1.0).contains(*f)) {
        return invalid(format!("bad k fraction {f} for hop count {i}"));
    }
    let sum: f64 = k.values().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return invalid(format!("k fractions sum to {sum}, not 1"));
    }
    Ok(())
}

/// Concrete `hop count → k_i` for one pair on the baseline topology.
pub fn resolve_fractions(
    topology: &MeshTopology,
    src: &NodeId,
    dst: &NodeId,
    max_hops: usize,
    k: &KFractions,
) -> Result<BTreeMap<usize, f64>> {
    match k {
        KFractions::Fixed(map) => {
            validate_fractions(map)?;
            Ok(map.clone())
        }
        KFractions::PathShare => {
            if max_hops == 0 {
                return invalid("max_hops must be at least 1");
            }
            let mut counts = BTreeMap::new();
            for i in 1..=max_hops {
                let n = enumerate_ihop_paths(topology, src, dst, i)?.len();
                if n > 0 {
                    counts.insert(i, n as f64);
                }
            }
            if counts.is_empty() {
                let shortest = topology.hop_distances_to(dst.index)[src.index].ok_or_else(|| {
                    Error::NoPaths { src: src.label.clone(), dst: dst.label.clone() }
                })?;
                return Ok(BTreeMap::from([(shortest, 1.0)]));
            }
            let total: f64 = counts.values().sum();
            Ok(counts.into_iter().map(|(i, n)| (i, n / total)).collect())
        }
    }
}

/// `Σ k_i · PDR_i` for one trial; groups without paths contribute zero.
pub fn trial_pdr(
    topology: &MeshTopology,
    src: &NodeId,
    dst: &NodeId,
    sample: &LinkSample,
    k: &BTreeMap<usize, f64>,
) -> Result<f64> {
    if !topology.contains(src.index) || !topology.contains(dst.index) {
        return Ok(0.0);
    }
    let mut pdr = 0.0;
    for (&i, &w) in k.iter().filter(|(_, w)| **w > 0.0) {
        let g = enumerate_ihop_paths(topology, src, dst, i)?;
        pdr += w * group_delivery(topology, &g, sample)?;
    }
    Ok(pdr)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopPdr {
    pub hops: usize,
    pub k: f64,
    pub paths: usize,
    pub pdr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdrEstimate {
    pub pdr: f64,
    pub per_hop: Vec<HopPdr>,
}

/// Mean delivery belief of every i-hop group `i ≤ max_hops` over `samples`,
/// mixed by `k`.
pub fn compute_pdr(
    topology: &MeshTopology,
    src: &NodeId,
    dst: &NodeId,
    samples: &[LinkSample],
    max_hops: usize,
    k: &KFractions,
) -> Result<PdrEstimate> {
    if samples.is_empty() {
        return invalid("no link samples");
    }
    let fractions = resolve_fractions(topology, src, dst, max_hops, k)?;
    let top = fractions.keys().copied().max().unwrap_or(0).max(max_hops);
    let mut per_hop = Vec::new();
    for i in 1..=top {
        let g = enumerate_ihop_paths(topology, src, dst, i)?;
        let beliefs = samples
            .par_iter()
            .map(|s| group_delivery(topology, &g, s))
            .collect::<Result<Vec<f64>>>()?;
        let pdr = beliefs.iter().sum::<f64>() / samples.len() as f64;
        per_hop.push(HopPdr { hops: i, k: fractions.get(&i).copied().unwrap_or(0.0), paths: g.len(), pdr });
    }
    let pdr = per_hop.iter().map(|h| h.k * h.pdr).sum();
    Ok(PdrEstimate { pdr, per_hop })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_grid_mesh, sample_link_uncertainty, Scenario};

    #[test]
    fn single_link_perfect() {
        let t = build_grid_mesh(1, 2, &Scenario::scenario1()).unwrap();
        let samples: Vec<_> = sample_link_uncertainty(&t, 5, 1)
            .unwrap()
            .into_iter()
            .map(|s| s.with_constant_failure(0.0))
            .collect();
        let k = KFractions::Fixed(BTreeMap::from([(1, 1.0)]));
        let est = compute_pdr(&t, &t.id("S1").unwrap(), &t.id("C").unwrap(), &samples, 1, &k).unwrap();
        assert_eq!(est.pdr, 1.0);
    }

    #[test]
    fn degenerate_mixture_is_the_group_pdr() {
        let t = build_grid_mesh(3, 4, &Scenario::scenario1()).unwrap();
        let samples = sample_link_uncertainty(&t, 50, 2).unwrap();
        let (s, c) = (t.id("S9").unwrap(), t.id("C").unwrap());
        let k = KFractions::Fixed(BTreeMap::from([(2, 1.0)]));
        let est = compute_pdr(&t, &s, &c, &samples, 4, &k).unwrap();
        assert_eq!(est.pdr, est.per_hop[1].pdr);
    }

    #[test]
    fn fractions_validated() {
        assert!(validate_fractions(&BTreeMap::from([(1, 0.5), (2, 0.4)])).is_err());
        assert!(validate_fractions(&BTreeMap::from([(0, 1.0)])).is_err());
        assert!(validate_fractions(&BTreeMap::from([(1, 0.5), (2, 0.5)])).is_ok());
    }

    #[test]
    fn path_share_falls_back_to_shortest() {
        let t = build_grid_mesh(3, 4, &Scenario::scenario3()).unwrap();
        let (s, c) = (t.id("S1").unwrap(), t.id("C").unwrap());
        let k = resolve_fractions(&t, &s, &c, 4, &KFractions::PathShare).unwrap();
        assert_eq!(k, BTreeMap::from([(5, 1.0)]));
        let k = resolve_fractions(&t, &t.id("S8").unwrap(), &c, 4, &KFractions::PathShare).unwrap();
        assert!((k.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
