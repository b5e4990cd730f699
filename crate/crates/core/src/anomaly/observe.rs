use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Deserialize;

use super::baseline::{observe_trial, BaselineProfile};
use super::detect::{Observation, SourceObservation};
use crate::error::{Error, Result};
use crate::topology::{sample_trial, MeshTopology, NodeId};
use crate::units::{fmt_ms, ms_or_inf};

/// One observation epoch drawn from the profile's mesh with `removed`
/// de-tangled. Epoch `e` uses trial `e` of the `seed` stream, so equal seeds
/// pair a baseline replay with any de-tangled run. Removed sources report
/// infinite latency and zero PDR.
pub fn simulate_observation(
    profile: &BaselineProfile,
    topology: &MeshTopology,
    removed: &[NodeId],
    seed: u64,
    epoch: u64,
) -> Result<Observation> {
    let dst = profile.destination_id(topology)?;
    let cut = topology.detangle(removed)?;
    let sample = sample_trial(topology, seed, epoch as usize);
    let sources: Vec<(NodeId, BTreeMap<usize, f64>)> =
        profile.sources.iter().map(|s| (s.id(), s.k_fractions.clone())).collect();
    let values = observe_trial(&cut, &sources, &dst, &sample)?;
    Ok(Observation {
        epoch,
        sources: sources
            .iter()
            .zip(values)
            .map(|((id, _), (latency_ms, pdr))| SourceObservation {
                source: id.label.clone(),
                latency_ms,
                pdr,
            })
            .collect(),
    })
}

#[derive(Deserialize)]
struct Row {
    epoch: u64,
    source: String,
    latency_ms: String,
    pdr: f64,
}

/// Reads `epoch,source,latency_ms,pdr` rows (comment lines start with `#`),
/// grouped by epoch in ascending order. Latency accepts `inf`.
pub fn read_observations_csv<R: Read>(input: R) -> Result<Vec<Observation>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    for need in ["epoch", "source", "latency_ms", "pdr"] {
        if !headers.iter().any(|h| h == need) {
            return Err(Error::Config(format!("observation CSV lacks column `{need}`")));
        }
    }
    let mut by_epoch: BTreeMap<u64, Vec<SourceObservation>> = BTreeMap::new();
    for (line, rec) in rdr.deserialize::<Row>().enumerate() {
        let row = rec.map_err(|e| Error::Config(format!("observation row {}: {e}", line + 1)))?;
        let latency_ms = ms_or_inf::parse(&row.latency_ms).map_err(Error::Config)?;
        by_epoch.entry(row.epoch).or_default().push(SourceObservation {
            source: row.source,
            latency_ms,
            pdr: row.pdr,
        });
    }
    Ok(by_epoch.into_iter().map(|(epoch, sources)| Observation { epoch, sources }).collect())
}

pub fn write_observations_csv<W: Write>(obs: &[Observation], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "source", "latency_ms", "pdr"])?;
    for o in obs {
        for s in &o.sources {
            w.write_record([o.epoch.to_string(), s.source.clone(), fmt_ms(s.latency_ms), format!("{:.6}", s.pdr)])?;
        }
    }
    w.flush()?;
    Ok(())
}
