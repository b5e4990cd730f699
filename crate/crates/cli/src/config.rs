use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use motsim::anomaly::{KFractions, DEFAULT_K_SIGMA, DEFAULT_MAX_HOPS, DEFAULT_SENSITIVITY_MS};
use motsim::hybrid::{pdr_presets, PdrPreset};
use motsim::plc::PlcParams;
use motsim::topology::{ScenarioSpec, TopologyConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything a run depends on. Command-line flags are folded in before the
/// run starts, so the serialized form fully determines the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub topology: TopologyConfig,
    /// Node sets removed for the de-tangled tables, one entry per case.
    pub detangle: Vec<Vec<String>>,
    pub trials: usize,
    pub k_sigma: f64,
    pub max_hops: usize,
    pub k_fractions: KFractions,
    /// Latency shift that marks a relay critical; `null` disables the map.
    pub sensitivity_delta_ms: Option<f64>,
    /// Epochs per simulated detection run.
    pub epochs: u64,
    pub belief_source: String,
    pub belief_trials: usize,
    pub belief_samples: usize,
    pub plc: PlcSection,
    pub hybrid: HybridSection,
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlcSection {
    pub fixtures: Vec<PathBuf>,
    pub params: PlcParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HybridSection {
    pub presets: Vec<PdrPreset>,
    pub l_gw: f64,
    /// When set, every preset's PLC PDR is computed from this CFR file.
    pub plc_fixture: Option<PathBuf>,
}

impl Default for HybridSection {
    fn default() -> Self {
        HybridSection { presets: pdr_presets(), l_gw: 0.0, plc_fixture: None }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: None,
            topology: TopologyConfig::default(),
            detangle: Vec::new(),
            trials: 1000,
            k_sigma: DEFAULT_K_SIGMA,
            max_hops: DEFAULT_MAX_HOPS,
            k_fractions: KFractions::PathShare,
            sensitivity_delta_ms: Some(DEFAULT_SENSITIVITY_MS),
            epochs: 1,
            belief_source: "S1".into(),
            belief_trials: 20,
            belief_samples: 100_000,
            plc: PlcSection::default(),
            hybrid: HybridSection::default(),
            out: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn set_scenario(&mut self, n: u8) {
        let hop = match &self.topology.scenario {
            ScenarioSpec::Preset { hop_latency_ms, .. } => *hop_latency_ms,
            ScenarioSpec::Custom { .. } => None,
        };
        self.topology.scenario = ScenarioSpec::Preset { preset: n, hop_latency_ms: hop };
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.context("a seed is required: pass --seed or set \"seed\" in the config")
    }

    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.epochs == 0 {
            bail!("epochs must be at least 1");
        }
        if !(self.k_sigma >= 0.0) {
            bail!("k_sigma must be non-negative, got {}", self.k_sigma);
        }
        if self.belief_trials == 0 || self.belief_samples == 0 {
            bail!("belief_trials and belief_samples must be at least 1");
        }
        if self.detangle.iter().any(|s| s.is_empty()) {
            bail!("a de-tangle case lists no nodes");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Parses `S3,S5` into labels.
pub fn node_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}
