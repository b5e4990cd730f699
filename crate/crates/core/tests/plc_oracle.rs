use std::f64::consts::PI;
use std::fs::File;
use std::path::PathBuf;

use motsim::plc::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

fn fixture(name: &str) -> Cfr {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/cfr").join(name);
    read_cfr_csv(File::open(p).unwrap()).unwrap()
}

/// O(N²) inverse DFT.
fn naive_idft(h: &[Complex64]) -> Vec<Complex64> {
    let n = h.len();
    (0..n)
        .map(|m| {
            h.iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, 2.0 * PI * (k * m) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Standard normal upper tail by composite Simpson on [x, x + 12].
fn q_simpson(x: f64) -> f64 {
    let n = 200_000;
    let h = 12.0 / n as f64;
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
    let mut s = pdf(x) + pdf(x + 12.0);
    for i in 1..n {
        s += pdf(x + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn cfr_strategy() -> impl Strategy<Value = Cfr> {
    (2usize..64, 1e3f64..1e6)
        .prop_flat_map(|(n, df)| {
            (Just(df), prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n))
        })
        .prop_filter("nonzero", |(_, v)| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|(df, v)| {
            let freqs: Vec<f64> = (0..v.len()).map(|k| k as f64 * df).collect();
            let band = (0.0, freqs[freqs.len() - 1]);
            Cfr::new(freqs, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(), band).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ifft_matches_naive_dft(cfr in cfr_strategy()) {
        let cir = cir_from_cfr(&cfr).unwrap();
        let oracle = naive_idft(&cfr.values);
        for (a, b) in cir.taps.iter().zip(&oracle) {
            prop_assert!((a - b).norm() < 1e-9);
        }
        let df = cfr.freqs[1] - cfr.freqs[0];
        prop_assert!((cir.tap_spacing * cfr.len() as f64 * df - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval(cfr in cfr_strategy()) {
        let cir = cir_from_cfr(&cfr).unwrap();
        let back = cir.to_cfr_values();
        let scale = cfr.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in back.iter().zip(&cfr.values) {
            prop_assert!((a - b).norm() <= 1e-9 * scale);
        }
        let freq_energy: f64 = cfr.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / cfr.len() as f64;
        prop_assert!((cir.energy() - freq_energy).abs() <= 1e-9 * freq_energy);
    }

    #[test]
    fn spread_ignores_scale_and_shift(cfr in cfr_strategy(), c in 1e-3f64..1e3, shift in 0usize..20) {
        let cir = cir_from_cfr(&cfr).unwrap();
        let p = power_delay_profile(&cir).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let tau = rms_delay_spread(&p, cir.tap_spacing);
        let scaled = Cir { taps: cir.taps.iter().map(|t| t * c).collect(), tap_spacing: cir.tap_spacing };
        let tau_s = rms_delay_spread(&power_delay_profile(&scaled).unwrap(), cir.tap_spacing);
        prop_assert!((tau - tau_s).abs() <= 1e-9 * tau.max(cir.tap_spacing));
        let mut shifted = vec![0.0; shift];
        shifted.extend(&p);
        let tau_d = rms_delay_spread(&shifted, cir.tap_spacing);
        prop_assert!((tau - tau_d).abs() <= 1e-7 * cir.tap_spacing * (1.0 + shift as f64));
    }

    #[test]
    fn gain_is_quadratic(cfr in cfr_strategy(), c in 1e-3f64..1e3) {
        let g = channel_gain(&cfr).unwrap();
        let gc = channel_gain(&cfr.scaled(c)).unwrap();
        prop_assert!((gc - c * c * g).abs() <= 1e-12 * gc.max(1e-300));
    }

    #[test]
    fn per_bit_pdr_monotone(b1 in 0.0f64..1.0, b2 in 0.0f64..1.0, n1 in 1u32..400, n2 in 1u32..400) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let (nl, nh) = if n1 <= n2 { (n1, n2) } else { (n2, n1) };
        let f = |b, n| pdr_plc(b, n, PdrMode::PerBitIndependent).unwrap();
        prop_assert!(f(lo, nl) >= f(hi, nl));
        prop_assert!(f(lo, nl) >= f(lo, nh));
    }

    #[test]
    fn ber_monotone(s1 in 0.0f64..20.0, s2 in 0.0f64..20.0) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let b = |s| ber_bpsk(s, QMode::GaussianTail).unwrap();
        prop_assert!(b(lo) >= b(hi));
        prop_assert!((0.0..=0.5).contains(&b(lo)));
    }

    #[test]
    fn sinr_linear_in_power(g in 1e-6f64..1.0, ps in 1e-12f64..1.0, k in 1e-3f64..1e3) {
        let a = sinr(g, ps, 0.1, 0.2).unwrap();
        let b = sinr(g, k * ps, 0.1, 0.2).unwrap();
        prop_assert!((b - k * a).abs() <= 1e-12 * b);
    }
}

#[test]
fn q_of_two_against_integration() {
    let oracle = q_simpson(2.0);
    assert!((oracle - 0.022750).abs() < 1e-6);
    assert!((ber_bpsk(1.0, QMode::GaussianTail).unwrap() - oracle).abs() < 1e-9);
    for s in [0.01, 0.3, 2.5] {
        assert!((ber_bpsk(s, QMode::GaussianTail).unwrap() - q_simpson(2.0 * f64::sqrt(s))).abs() < 1e-9);
    }
}

#[test]
fn ber_for_table_pdr_by_bisection() {
    let (mut lo, mut hi) = (0.0, 0.01);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pdr_plc(mid, 136, PdrMode::PerBitIndependent).unwrap() > 0.938 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 4.70e-4).abs() < 0.01e-4, "{lo}");
}

#[test]
fn lognormal_mle_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = LogNormal::new(0.0, 1.0).unwrap();
    let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
    let f = fit_lognormal(&xs).unwrap();
    assert!(f.mu.abs() < 0.02 && (f.sigma - 1.0).abs() < 0.02, "{f:?}");
}

#[test]
fn reference_channel_gain() {
    let g = to_db(channel_gain(&fixture("measured_gain.csv")).unwrap());
    assert!((g + 34.36).abs() < 0.05, "{g}");
}

#[test]
fn reference_load_spreads() {
    for (name, us) in [("switching_load.csv", 10.8), ("resistive_load.csv", 6.0)] {
        let link = analyze_link(&fixture(name), &PlcParams::default()).unwrap();
        assert!((link.tau_rms_bin_s * 1e6 - us).abs() < 1e-6, "{name}: {}", link.tau_rms_bin_s);
        assert!((link.tau_rms_s * DEFAULT_POINTS as f64 - link.tau_rms_bin_s).abs() < 1e-15);
    }
}

#[test]
fn operating_point_is_noise_limited() {
    let link = analyze_link(&fixture("measured_gain.csv"), &PlcParams::default()).unwrap();
    assert!(link.sinr < 1e-13);
    assert!((link.ber - 0.5).abs() < 1e-6);
    let literal = PlcParams { pdr_mode: PdrMode::AllBitsLost, ..PlcParams::default() };
    let l2 = analyze_link(&fixture("measured_gain.csv"), &literal).unwrap();
    assert!(l2.pdr > 0.999_999);
    assert!(link.pdr < 1e-30);
}
