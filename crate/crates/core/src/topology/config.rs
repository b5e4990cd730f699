//! JSON description of a mesh: grid size, scenario and optional layout.
//!
//! ```json
//! { "rows": 3, "cols": 4, "scenario": { "preset": 1 } }
//! { "rows": 3, "cols": 4, "scenario": { "preset": 3, "hop_latency_ms": 2.0 } }
//! { "layout": [["C", "S1"], ["S2", "S3"]],
//!   "scenario": { "custom": { "name": "custom", "tx_power_dbm": 2.0,
//!                 "vicinity_min_m": 0.6, "vicinity_max_m": 0.9,
//!                 "hop_latency_ms": 2.0 } } }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::{build_grid_mesh, from_layout, MeshTopology, Scenario};
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSpec {
    /// One of the three built-in presets, optionally with a different
    /// per-hop latency calibration.
    Preset {
        preset: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hop_latency_ms: Option<f64>,
    },
    Custom { custom: Scenario },
}

impl ScenarioSpec {
    pub fn preset(n: u8) -> Self {
        ScenarioSpec::Preset { preset: n, hop_latency_ms: None }
    }

    pub fn resolve(&self) -> Result<Scenario> {
        match self {
            ScenarioSpec::Preset { preset, hop_latency_ms } => {
                let s = Scenario::preset(*preset)?;
                Ok(match hop_latency_ms {
                    Some(ms) => s.with_hop_latency(*ms),
                    None => s,
                })
            }
            ScenarioSpec::Custom { custom: s } => {
                s.validate()?;
                Ok(s.clone())
            }
        }
    }
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::preset(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default = "default_cols")]
    pub cols: usize,
    #[serde(default)]
    pub scenario: ScenarioSpec,
    /// Explicit row-major label layout; overrides `rows`/`cols`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<Vec<String>>>,
}

fn default_rows() -> usize {
    3
}

fn default_cols() -> usize {
    4
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig { rows: 3, cols: 4, scenario: ScenarioSpec::default(), layout: None }
    }
}

impl TopologyConfig {
    pub fn build(&self) -> Result<MeshTopology> {
        let scenario = self.scenario.resolve()?;
        match &self.layout {
            Some(layout) => from_layout(layout, &scenario),
            None => build_grid_mesh(self.rows, self.cols, &scenario),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: TopologyConfig = serde_json::from_str(s)?;
        if cfg.layout.is_none() && (cfg.rows == 0 || cfg.cols == 0) {
            return invalid("rows and cols must be positive");
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::DiagonalMode;

    #[test]
    fn preset_roundtrip() {
        let cfg = TopologyConfig::from_json(r#"{"rows":3,"cols":4,"scenario":{"preset":2}}"#).unwrap();
        let t = cfg.build().unwrap();
        assert_eq!(t.scenario.diagonal_mode(), DiagonalMode::Intermittent);
        let back = serde_json::to_string(&cfg).unwrap();
        assert_eq!(TopologyConfig::from_json(&back).unwrap(), cfg);
    }

    #[test]
    fn preset_with_calibration() {
        let cfg = TopologyConfig::from_json(r#"{"scenario":{"preset":3,"hop_latency_ms":2.5}}"#).unwrap();
        assert_eq!(cfg.build().unwrap().scenario.hop_latency_ms, 2.5);
    }

    #[test]
    fn custom_layout() {
        let json = r#"{"layout":[["C","S1"],["S2","S3"]],
            "scenario":{"custom":{"name":"custom","tx_power_dbm":2.0,
            "vicinity_min_m":0.6,"vicinity_max_m":0.9,"hop_latency_ms":2.0}}}"#;
        let t = TopologyConfig::from_json(json).unwrap().build().unwrap();
        assert_eq!(t.node_count(), 4);
        assert_eq!(t.link_count(), 12);
    }

    #[test]
    fn unknown_preset_rejected() {
        let cfg = TopologyConfig::from_json(r#"{"scenario":{"preset":7}}"#).unwrap();
        assert!(cfg.build().is_err());
    }
}
