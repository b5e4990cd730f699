//! End-to-end PDR and latency of mesh units joined by a PLC backbone.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::anomaly::validate_fractions;
use crate::error::{invalid, Result};

/// Reference mesh unit, 2.4 m × 1.8 m.
pub const GRID_SIZE_M2: f64 = 2.4 * 1.8;
pub const GRID_LENGTH_M: f64 = 2.4;
/// Per-hop PLC latency of a 100 m reference link.
pub const RESISTIVE_HOP_MS: f64 = 1.78;
pub const SWITCHING_HOP_MS: f64 = 5.66;

/// `Σ k_i · PDR_i`.
pub fn mesh_pdr(pdr_by_hop: &BTreeMap<usize, f64>, k: &BTreeMap<usize, f64>) -> Result<f64> {
    validate_fractions(k)?;
    let mut sum = 0.0;
    for (i, ki) in k {
        let p = pdr_by_hop.get(i).ok_or_else(|| {
            crate::Error::InvalidArgument(format!("no PDR given for {i}-hop paths"))
        })?;
        if !(0.0..=1.0).contains(p) {
            return invalid(format!("PDR {p} of {i}-hop paths outside [0,1]"));
        }
        sum += ki * p;
    }
    Ok(sum)
}

pub fn hybrid_pdr(pdr_ble: f64, pdr_plc: f64, alpha: u32, beta: u32) -> f64 {
    pdr_ble.powi(alpha as i32) * pdr_plc.powi(beta as i32)
}

/// `α·l_ble + l_gw + β·(τ_rms + l_relay)`, all in ms.
pub fn hybrid_latency(l_ble: f64, l_gw: f64, tau_rms: f64, l_relay: f64, alpha: u32, beta: u32) -> f64 {
    alpha as f64 * l_ble + l_gw + beta as f64 * (tau_rms + l_relay)
}

/// Mesh units `α` and PLC hops `β` for a coverage area. The area must be a
/// whole number of grid cells to within 1%.
pub fn scale_units(mesh_area: f64, grid_size: f64, plc_nodes: u32) -> Result<(u32, u32)> {
    if !(mesh_area > 0.0) || !(grid_size > 0.0) {
        return invalid("mesh area and grid size must be positive");
    }
    if plc_nodes < 2 {
        return invalid(format!("a PLC backbone needs at least 2 nodes, got {plc_nodes}"));
    }
    let ratio = mesh_area / grid_size;
    let alpha = ratio.round();
    if alpha < 1.0 || (ratio - alpha).abs() > 0.01 * alpha {
        return invalid(format!("mesh area / grid size = {ratio} is not a whole number of units"));
    }
    Ok((alpha as u32, plc_nodes - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub mesh_area: f64,
    #[serde(default = "default_grid")]
    pub grid_size: f64,
    pub plc_nodes: u32,
    #[serde(default)]
    pub l_gw: f64,
    #[serde(default)]
    pub l_relay: f64,
    pub tau_rms: f64,
    pub k_fractions: BTreeMap<usize, f64>,
}

fn default_grid() -> f64 {
    GRID_SIZE_M2
}

impl HybridConfig {
    pub fn units(&self) -> Result<(u32, u32)> {
        scale_units(self.mesh_area, self.grid_size, self.plc_nodes)
    }

    pub fn pdr(&self, pdr_by_hop: &BTreeMap<usize, f64>, pdr_plc: f64) -> Result<f64> {
        let (a, b) = self.units()?;
        Ok(hybrid_pdr(mesh_pdr(pdr_by_hop, &self.k_fractions)?, pdr_plc, a, b))
    }

    pub fn latency(&self, l_ble: f64) -> Result<f64> {
        let (a, b) = self.units()?;
        if [l_ble, self.l_gw, self.tau_rms, self.l_relay].iter().any(|x| !(*x >= 0.0)) {
            return invalid("latencies must be non-negative");
        }
        Ok(hybrid_latency(l_ble, self.l_gw, self.tau_rms, self.l_relay, a, b))
    }
}

/// Inputs of one scenario block of the hybrid PDR table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdrPreset {
    pub scenario: String,
    /// PDR of a single mesh unit.
    pub pdr_ble: f64,
    pub pdr_plc: f64,
}

pub fn pdr_presets() -> Vec<PdrPreset> {
    [("Scenario 1", 0.9738), ("Scenario 2", 0.9695), ("Scenario 3", 0.932)]
        .into_iter()
        .map(|(s, p)| PdrPreset { scenario: s.into(), pdr_ble: p, pdr_plc: 0.938 })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdrRow {
    pub scenario: String,
    pub alpha: u32,
    pub mesh_length_m: f64,
    /// `PDR_ble^α`.
    pub pdr_ble: f64,
    pub beta: Option<u32>,
    pub pdr_plc: f64,
    /// One mesh unit plus `β` PLC hops.
    pub pdr_hybrid: Option<f64>,
}

/// Mesh scaled to α ∈ {1, 2, 3, 10} units; rows 1–3 pair with β = α PLC
/// hops behind a single unit.
pub fn pdr_table(presets: &[PdrPreset]) -> Vec<PdrRow> {
    let mut rows = Vec::new();
    for p in presets {
        for alpha in [1u32, 2, 3, 10] {
            let beta = (alpha <= 3).then_some(alpha);
            rows.push(PdrRow {
                scenario: p.scenario.clone(),
                alpha,
                mesh_length_m: alpha as f64 * GRID_LENGTH_M,
                pdr_ble: p.pdr_ble.powi(alpha as i32),
                beta,
                pdr_plc: p.pdr_plc,
                pdr_hybrid: beta.map(|b| hybrid_pdr(p.pdr_ble, p.pdr_plc, 1, b)),
            });
        }
    }
    rows
}

/// One row of the hybrid latency table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub mesh_state: String,
    pub plc_loads: String,
    pub alpha: u32,
    /// Latency of one mesh unit.
    pub l_ble_unit: f64,
    pub beta: u32,
    /// Total PLC latency over `β` hops.
    pub l_plc: f64,
}

impl LatencyRow {
    pub fn l_ble(&self) -> f64 {
        self.alpha as f64 * self.l_ble_unit
    }

    /// A single mesh unit followed by the `β`-hop PLC path.
    pub fn l_hybrid(&self, l_gw: f64) -> f64 {
        hybrid_latency(self.l_ble_unit, l_gw, self.l_plc / self.beta as f64, 0.0, 1, self.beta)
    }
}

/// Mesh latency 8.4 ms (dense) and 13.5 ms (sparse) per unit, with PLC
/// latencies measured per hop count for each load type.
pub fn latency_presets() -> Vec<LatencyRow> {
    let plc = |state: &str, loads: &str| -> [f64; 3] {
        match (state, loads) {
            (_, "Resistive") => [1.78, 3.77, 5.34],
            ("Dense", _) => [5.66, 11.57, 16.98],
            _ => [5.66, 11.57, 17.25],
        }
    };
    let mut rows = Vec::new();
    for (state, unit) in [("Dense", 8.4), ("Sparse", 13.5)] {
        for loads in ["Resistive", "Switching"] {
            let l = plc(state, loads);
            for (alpha, beta) in [(1u32, 1u32), (2, 2), (3, 3), (10, 1)] {
                rows.push(LatencyRow {
                    mesh_state: state.into(),
                    plc_loads: loads.into(),
                    alpha,
                    l_ble_unit: unit,
                    beta,
                    l_plc: l[beta as usize - 1],
                });
            }
        }
    }
    rows
}

/// Latency of ten dense mesh units over that of one unit plus one
/// resistive PLC hop.
pub fn scalability_ratio(rows: &[LatencyRow], l_gw: f64) -> Option<f64> {
    let find = |alpha| {
        rows.iter().find(|r| r.mesh_state == "Dense" && r.plc_loads == "Resistive" && r.alpha == alpha)
    };
    let (ten, one) = (find(10)?, find(1)?);
    Some(ten.l_ble() / one.l_hybrid(l_gw))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_pdr_table<W: Write>(rows: &[PdrRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "alpha", "mesh_length_m", "pdr_ble", "beta", "pdr_plc", "pdr_hybrid"])?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.alpha.to_string(),
            format!("{:.1}", r.mesh_length_m),
            format!("{:.6}", r.pdr_ble),
            opt(r.beta),
            format!("{:.6}", r.pdr_plc),
            opt(r.pdr_hybrid.map(|p| format!("{p:.6}"))),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_latency_table<W: Write>(rows: &[LatencyRow], l_gw: f64, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mesh_state", "plc_loads", "alpha", "l_ble_ms", "beta", "l_plc_ms", "l_hybrid_ms"])?;
    for r in rows {
        w.write_record([
            r.mesh_state.clone(),
            r.plc_loads.clone(),
            r.alpha.to_string(),
            format!("{:.3}", r.l_ble()),
            r.beta.to_string(),
            format!("{:.3}", r.l_plc),
            format!("{:.3}", r.l_hybrid(l_gw)),
        ])?;
    }
    w.flush()?;
    Ok(())
}
