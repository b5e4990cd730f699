use serde::{Deserialize, Serialize};

use super::baseline::{BaselineProfile, SourceBaseline};
use super::critical::localize;
use crate::error::{Error, Result};
use crate::units::ms_or_inf;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceObservation {
    pub source: String,
    #[serde(with = "ms_or_inf")]
    pub latency_ms: f64,
    pub pdr: f64,
}

/// Latency and PDR of every monitored source during one epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub epoch: u64,
    pub sources: Vec<SourceObservation>,
}

impl Observation {
    pub fn get(&self, source: &str) -> Option<&SourceObservation> {
        self.sources.iter().find(|s| s.source == source)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trigger {
    None,
    Latency,
    Pdr,
    /// Part of the report schema; the latency-first rule never emits it.
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    None,
    Mild,
    Severe,
    Disconnected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceVerdict {
    pub source: String,
    pub anom: bool,
    pub triggered_by: Trigger,
    pub severity: Severity,
    #[serde(with = "ms_or_inf")]
    pub latency_ms: f64,
    pub pdr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub epoch: u64,
    pub verdicts: Vec<SourceVerdict>,
    pub suspects: Vec<String>,
}

impl AnomalyReport {
    pub fn any_anomaly(&self) -> bool {
        self.verdicts.iter().any(|v| v.anom)
    }

    pub fn verdict(&self, source: &str) -> Option<&SourceVerdict> {
        self.verdicts.iter().find(|v| v.source == source)
    }
}

/// Latency check first; the PDR check only runs when latency is in bounds.
pub fn classify(base: &SourceBaseline, latency_ms: f64, pdr: f64) -> Trigger {
    if latency_ms >= base.b_thl {
        Trigger::Latency
    } else if pdr <= base.b_thp {
        Trigger::Pdr
    } else {
        Trigger::None
    }
}

/// Grade of one source's observation. Past threshold is Mild; a latency
/// excess of at least twice the threshold margin, or a PDR at least two
/// standard deviations under its threshold, is Severe.
pub fn severity_grade(base: &SourceBaseline, trigger: Trigger, latency_ms: f64, pdr: f64) -> Severity {
    if latency_ms.is_infinite() {
        return Severity::Disconnected;
    }
    if trigger == Trigger::None {
        return Severity::None;
    }
    let margin = base.b_thl - base.latency_mean;
    let severe_latency = latency_ms - base.latency_mean >= 2.0 * margin;
    let severe_pdr = pdr <= base.b_thp - 2.0 * base.pdr_std;
    if severe_latency || severe_pdr {
        Severity::Severe
    } else {
        Severity::Mild
    }
}

/// Per-source verdicts for one observation, localized with the profile's
/// critical-node map when it has one.
pub fn detect(profile: &BaselineProfile, obs: &Observation) -> Result<AnomalyReport> {
    let mut verdicts = Vec::with_capacity(profile.sources.len());
    for base in &profile.sources {
        let o = obs.get(&base.source).ok_or_else(|| {
            Error::IncompleteObservation(format!("epoch {} has no entry for {}", obs.epoch, base.source))
        })?;
        if !(0.0..=1.0).contains(&o.pdr) {
            return Err(Error::InvalidArgument(format!(
                "pdr {} of {} outside [0,1]",
                o.pdr, base.source
            )));
        }
        if o.latency_ms.is_nan() || o.latency_ms < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "latency {} of {} is not a duration",
                o.latency_ms, base.source
            )));
        }
        let trigger = classify(base, o.latency_ms, o.pdr);
        verdicts.push(SourceVerdict {
            source: base.source.clone(),
            anom: trigger != Trigger::None,
            triggered_by: trigger,
            severity: severity_grade(base, trigger, o.latency_ms, o.pdr),
            latency_ms: o.latency_ms,
            pdr: o.pdr,
        });
    }
    let mut report = AnomalyReport { epoch: obs.epoch, verdicts, suspects: Vec::new() };
    if let Some(cmap) = &profile.critical {
        report.suspects = localize(&report, cmap);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn base(mean: f64, std: f64) -> SourceBaseline {
        SourceBaseline {
            source: "S7".into(),
            index: 7,
            latency_mean: mean,
            latency_std: std,
            pdr_mean: 0.8,
            pdr_std: 0.05,
            b_thl: mean + 3.0 * std,
            b_thp: 0.65,
            k_fractions: BTreeMap::from([(1, 1.0)]),
        }
    }

    #[test]
    fn latency_branch_wins() {
        let b = base(6.13, 0.2);
        assert_eq!(classify(&b, 7.28, 0.1), Trigger::Latency);
        assert_eq!(classify(&b, 6.13, 0.1), Trigger::Pdr);
        assert_eq!(classify(&b, 6.13, 0.8), Trigger::None);
    }

    #[test]
    fn grades() {
        let b = base(6.13, 0.2);
        assert_eq!(severity_grade(&b, Trigger::None, 6.2, 0.8), Severity::None);
        assert_eq!(severity_grade(&b, Trigger::Latency, 6.8, 0.8), Severity::Mild);
        assert_eq!(severity_grade(&b, Trigger::Latency, 7.4, 0.8), Severity::Severe);
        assert_eq!(severity_grade(&b, Trigger::Pdr, 6.2, 0.5), Severity::Severe);
        assert_eq!(severity_grade(&b, Trigger::Latency, f64::INFINITY, 0.0), Severity::Disconnected);
    }
}
