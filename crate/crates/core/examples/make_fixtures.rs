//! Regenerates the reference CFR files under `data/cfr/`.
//!
//! `cargo run -p motsim --example make_fixtures`

use std::fs::File;
use std::path::PathBuf;

use motsim::plc::*;

const GAIN_DB: f64 = -34.36;
const SWITCHING_TAU_US: f64 = 10.8;
const RESISTIVE_TAU_US: f64 = 6.0;

/// Delay spread in tap indices.
fn spread_in_bins(cfr: &Cfr) -> f64 {
    let cir = cir_from_cfr(cfr).unwrap();
    rms_delay_spread(&power_delay_profile(&cir).unwrap(), 1.0)
}

/// Exponentially decaying multipath whose spread hits `target_bins`.
fn calibrated(n_paths: usize, max_delay_s: f64, seed: u64, target_bins: f64) -> Cfr {
    let make = |tc: f64| synth_cfr(n_paths, max_delay_s, Attenuation::Exponential { time_constant_s: tc }, seed).unwrap();
    let (mut lo, mut hi) = (1e-10_f64.ln(), 1e-3_f64.ln());
    assert!(spread_in_bins(&make(lo.exp())) < target_bins && spread_in_bins(&make(hi.exp())) > target_bins);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spread_in_bins(&make(mid.exp())) < target_bins {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    make((0.5 * (lo + hi)).exp())
}

fn write(dir: &PathBuf, name: &str, cfr: &Cfr, notes: &[String]) {
    let path = dir.join(name);
    write_cfr_csv(cfr, notes, File::create(&path).unwrap()).unwrap();
    println!("wrote {}", path.display());
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/cfr");
    std::fs::create_dir_all(&dir).unwrap();

    let raw = synth_cfr(10, 2e-6, Attenuation::Exponential { time_constant_s: 5e-7 }, 1).unwrap();
    let g = channel_gain(&raw).unwrap();
    let measured = raw.scaled((10f64.powf(GAIN_DB / 10.0) / g).sqrt());
    write(&dir, "measured_gain.csv", &measured, &[
        "measured-channel reference, 100 m cable section".into(),
        format!("gain_ref_db: {GAIN_DB} (mean |H|^2 over the band below)"),
    ]);

    let bins = |tau_us: f64| tau_us * 1e-6 * DEFAULT_DELTA_F_HZ;
    let t = 1.0 / (DEFAULT_POINTS as f64 * DEFAULT_DELTA_F_HZ);
    for (name, label, tau_us, seed) in [
        ("switching_load.csv", "switching-load", SWITCHING_TAU_US, 2),
        ("resistive_load.csv", "resistive-load", RESISTIVE_TAU_US, 3),
    ] {
        let cfr = calibrated(12, 1e-6, seed, bins(tau_us));
        write(&dir, name, &cfr, &[
            format!("{label} reference channel"),
            format!(
                "tau_rms_ref: {tau_us} (microseconds with taps 1/delta_f apart; {:.4} microseconds at the 1/(N*delta_f) tap spacing)",
                bins(tau_us) * t * 1e6
            ),
        ]);
    }
}
