use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::channel::{channel_gain, cir_from_cfr, power_delay_profile, rms_delay_spread, to_db, Cfr};
use crate::error::{invalid, Result};

pub const DEFAULT_PACKET_BITS: u32 = 136;
/// −55 dBm/Hz.
pub const DEFAULT_TX_PSD_W_PER_HZ: f64 = 3.162e-12;
pub const DEFAULT_NOISE_W_PER_HZ: f64 = 0.13;

/// Receiver noise PSD in dBm/Hz at `f = m·δf`, from the `10^−15.5 / f²`
/// colored-noise law.
pub fn noise_psd(f_hz: f64, delta_f_hz: f64) -> Result<f64> {
    if !(delta_f_hz > 0.0) {
        return invalid(format!("frequency step must be positive, got {delta_f_hz}"));
    }
    let m = f_hz / delta_f_hz;
    let mr = m.round();
    if !m.is_finite() || (m - mr).abs() > 1e-6 * mr.max(1.0) {
        return invalid(format!("{f_hz} Hz is not a multiple of {delta_f_hz} Hz"));
    }
    if mr < 1.0 {
        return invalid("noise PSD is singular at DC (m = 0)");
    }
    Ok(10.0 * (15.5 - 2.0 * f_hz.log10()))
}

pub fn sinr(gain: f64, p_s: f64, interference: f64, p_n: f64) -> Result<f64> {
    if gain < 0.0 || p_s < 0.0 || interference < 0.0 || p_n < 0.0 {
        return invalid("gain and powers must be non-negative");
    }
    let den = interference + p_n;
    if !(den > 0.0) {
        return invalid("interference plus noise power is zero");
    }
    Ok(gain * p_s / den)
}

/// Reading of the `Q(·)` in `BER = Q(2√SINR)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QMode {
    /// Standard normal tail, `½·erfc(x/√2)`.
    #[default]
    GaussianTail,
    /// `erfc(x)` taken literally.
    Erfc,
}

pub fn q_function(x: f64, mode: QMode) -> f64 {
    match mode {
        QMode::GaussianTail => 0.5 * erfc(x / std::f64::consts::SQRT_2),
        QMode::Erfc => erfc(x),
    }
}

pub fn ber_bpsk(sinr: f64, mode: QMode) -> Result<f64> {
    if !(sinr >= 0.0) {
        return invalid(format!("SINR must be non-negative, got {sinr}"));
    }
    Ok(q_function(2.0 * sinr.sqrt(), mode))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdrMode {
    /// `1 − BER^n`: only a packet with every bit corrupted is lost.
    AllBitsLost,
    /// `(1 − BER)^n`: every bit must survive.
    #[default]
    PerBitIndependent,
}

pub fn pdr_plc(ber: f64, n_bits: u32, mode: PdrMode) -> Result<f64> {
    if !(0.0..=1.0).contains(&ber) {
        return invalid(format!("BER {ber} outside [0,1]"));
    }
    if n_bits == 0 {
        return invalid("a packet needs at least one bit");
    }
    let n = n_bits as i32;
    Ok(match mode {
        PdrMode::AllBitsLost => 1.0 - ber.powi(n),
        PdrMode::PerBitIndependent => (1.0 - ber).powi(n),
    })
}

/// Lognormal parameters of delay-spread samples, in log-seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
}

/// Maximum-likelihood fit: mean and population std of the logs.
pub fn fit_lognormal(samples: &[f64]) -> Result<LognormalFit> {
    if samples.len() < 2 {
        return invalid(format!("lognormal fit needs at least 2 samples, got {}", samples.len()));
    }
    if let Some(x) = samples.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return invalid(format!("lognormal sample {x} is not positive"));
    }
    let n = samples.len() as f64;
    let logs: Vec<f64> = samples.iter().map(|x| x.ln()).collect();
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n;
    Ok(LognormalFit { mu, sigma: var.sqrt() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlcParams {
    pub tx_psd_w_per_hz: f64,
    pub noise_w_per_hz: f64,
    pub interference_w_per_hz: f64,
    pub packet_bits: u32,
    pub q_mode: QMode,
    pub pdr_mode: PdrMode,
}

impl Default for PlcParams {
    fn default() -> Self {
        PlcParams {
            tx_psd_w_per_hz: DEFAULT_TX_PSD_W_PER_HZ,
            noise_w_per_hz: DEFAULT_NOISE_W_PER_HZ,
            interference_w_per_hz: 0.0,
            packet_bits: DEFAULT_PACKET_BITS,
            q_mode: QMode::default(),
            pdr_mode: PdrMode::default(),
        }
    }
}

/// Metrics of one PLC link derived from its CFR.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlcLink {
    pub gain: f64,
    pub gain_db: f64,
    /// Delay spread with taps `1/(N·δf)` apart.
    pub tau_rms_s: f64,
    /// Delay spread with taps `1/δf` apart.
    pub tau_rms_bin_s: f64,
    pub sinr: f64,
    pub ber: f64,
    pub pdr: f64,
    pub packet_bits: u32,
    pub q_mode: QMode,
    pub pdr_mode: PdrMode,
}

pub fn analyze_link(cfr: &Cfr, params: &PlcParams) -> Result<PlcLink> {
    let cir = cir_from_cfr(cfr)?;
    let pdp = power_delay_profile(&cir)?;
    let df = cfr.delta_f()?;
    let gain = channel_gain(cfr)?;
    let s = sinr(gain, params.tx_psd_w_per_hz, params.interference_w_per_hz, params.noise_w_per_hz)?;
    let ber = ber_bpsk(s, params.q_mode)?;
    Ok(PlcLink {
        gain,
        gain_db: to_db(gain),
        tau_rms_s: rms_delay_spread(&pdp, cir.tap_spacing),
        tau_rms_bin_s: rms_delay_spread(&pdp, 1.0 / df),
        sinr: s,
        ber,
        pdr: pdr_plc(ber, params.packet_bits, params.pdr_mode)?,
        packet_bits: params.packet_bits,
        q_mode: params.q_mode,
        pdr_mode: params.pdr_mode,
    })
}
