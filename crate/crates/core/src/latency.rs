//! Minimum source-to-client latency per trial and its aggregates.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::topology::{LinkSample, MeshTopology, NodeId};
use crate::units::fmt_ms;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub src: NodeId,
    pub dst: NodeId,
    /// Mean over reachable trials; infinite when no trial reached `dst`.
    pub mean: f64,
    /// Population standard deviation over reachable trials.
    pub std: f64,
    pub unreachable_fraction: f64,
    pub trials: usize,
}

impl LatencyStats {
    /// Builds stats from per-trial latencies, infinities marking unreachable trials.
    pub fn from_trials(src: NodeId, dst: NodeId, latencies: &[f64]) -> Self {
        let finite: Vec<f64> = latencies.iter().copied().filter(|l| l.is_finite()).collect();
        let trials = latencies.len();
        let unreachable_fraction = if trials == 0 {
            1.0
        } else {
            (trials - finite.len()) as f64 / trials as f64
        };
        let (mean, std) = if finite.is_empty() {
            (f64::INFINITY, 0.0)
        } else {
            let n = finite.len() as f64;
            let mean = finite.iter().sum::<f64>() / n;
            let var = finite.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        LatencyStats { src, dst, mean, std, unreachable_fraction, trials }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Dijkstra over the trial's directed link weights. Links that are absent in
/// the trial or touch removed nodes are skipped; no path gives infinity.
pub fn shortest_path_latency(
    topology: &MeshTopology,
    sample: &LinkSample,
    src: &NodeId,
    dst: &NodeId,
) -> f64 {
    if !topology.contains(src.index) || !topology.contains(dst.index) {
        return f64::INFINITY;
    }
    if src.index == dst.index {
        return 0.0;
    }
    let mut dist = vec![f64::INFINITY; topology.capacity];
    let mut heap = BinaryHeap::new();
    dist[src.index] = 0.0;
    heap.push(Reverse(Entry(0.0, src.index)));
    while let Some(Reverse(Entry(d, v))) = heap.pop() {
        if v == dst.index {
            return d;
        }
        if d > dist[v] {
            continue;
        }
        for l in topology.out_links(v) {
            let Some(state) = sample.get(l.from, l.to) else { continue };
            if !state.present {
                continue;
            }
            let nd = d + state.latency_ms;
            if nd < dist[l.to] {
                dist[l.to] = nd;
                heap.push(Reverse(Entry(nd, l.to)));
            }
        }
    }
    f64::INFINITY
}

/// Per-trial latencies, in trial order.
pub fn trial_latencies(
    topology: &MeshTopology,
    samples: &[LinkSample],
    src: &NodeId,
    dst: &NodeId,
) -> Vec<f64> {
    samples.par_iter().map(|s| shortest_path_latency(topology, s, src, dst)).collect()
}

pub fn average_latency(
    topology: &MeshTopology,
    samples: &[LinkSample],
    src: &NodeId,
    dst: &NodeId,
) -> Result<LatencyStats> {
    if samples.is_empty() {
        return invalid("no link samples");
    }
    if src.index == dst.index {
        return invalid("source and destination must differ");
    }
    let lat = trial_latencies(topology, samples, src, dst);
    Ok(LatencyStats::from_trials(src.clone(), dst.clone(), &lat))
}

/// One row per source. Sources removed from `topology` report every trial
/// as unreachable.
pub fn latency_table(
    topology: &MeshTopology,
    samples: &[LinkSample],
    sources: &[NodeId],
    dst: &NodeId,
) -> Result<Vec<LatencyStats>> {
    if sources.is_empty() {
        return invalid("no sources");
    }
    if !topology.contains(dst.index) {
        return Err(Error::NotFound(format!("destination {dst}")));
    }
    sources.iter().map(|s| average_latency(topology, samples, s, dst)).collect()
}

/// Writes `source,mean_ms,std_ms,unreachable_fraction` rows.
pub fn write_latency_csv<W: Write>(rows: &[LatencyStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "mean_ms", "std_ms", "unreachable_fraction"])?;
    for r in rows {
        w.write_record([
            r.src.label.clone(),
            fmt_ms(r.mean),
            fmt_ms(r.std),
            format!("{:.6}", r.unreachable_fraction),
        ])?;
    }
    w.flush()?;
    Ok(())
}
