use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_DELTA_F_HZ: f64 = 200e3;
pub const DEFAULT_POINTS: usize = 200;
/// Lower edge of the usable band; the grid itself starts at DC.
pub const USABLE_MIN_HZ: f64 = 2e6;
pub const USABLE_MAX_HZ: f64 = 40e6;

/// Channel frequency response sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Cfr {
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Inclusive band, in Hz, over which gain is averaged.
    pub band: (f64, f64),
}

impl Cfr {
    pub fn new(freqs: Vec<f64>, values: Vec<Complex64>, band: (f64, f64)) -> Result<Self> {
        if freqs.len() != values.len() {
            return invalid(format!("{} frequencies but {} values", freqs.len(), values.len()));
        }
        if freqs.len() < 2 {
            return invalid("a CFR needs at least two frequency points");
        }
        if freqs.iter().any(|f| !f.is_finite()) || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return invalid("CFR contains non-finite samples");
        }
        if !(band.0 <= band.1) {
            return invalid(format!("empty band {:?}", band));
        }
        Ok(Cfr { freqs, values, band })
    }

    /// The `0 .. 40 MHz` grid at 200 kHz with the 2–40 MHz usable band.
    pub fn standard_grid(values: Vec<Complex64>) -> Result<Self> {
        if values.len() != DEFAULT_POINTS {
            return invalid(format!("standard grid has {DEFAULT_POINTS} points, got {}", values.len()));
        }
        let freqs = (0..DEFAULT_POINTS).map(|m| m as f64 * DEFAULT_DELTA_F_HZ).collect();
        Cfr::new(freqs, values, (USABLE_MIN_HZ, USABLE_MAX_HZ))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing δf; fails on a non-uniform or non-increasing grid.
    pub fn delta_f(&self) -> Result<f64> {
        let df = self.freqs[1] - self.freqs[0];
        if !(df > 0.0) {
            return invalid("CFR frequencies must increase");
        }
        for (m, w) in self.freqs.windows(2).enumerate() {
            if ((w[1] - w[0]) - df).abs() > 1e-6 * df {
                return invalid(format!(
                    "non-uniform frequency grid: step {} Hz at point {} differs from {} Hz",
                    w[1] - w[0],
                    m + 1,
                    df
                ));
            }
        }
        Ok(df)
    }

    /// Samples whose frequency lies in `band`.
    pub fn in_band(&self) -> impl Iterator<Item = &Complex64> + '_ {
        let (lo, hi) = self.band;
        let tol = 1e-9 * hi.abs().max(1.0);
        self.freqs
            .iter()
            .zip(&self.values)
            .filter(move |(f, _)| **f >= lo - tol && **f <= hi + tol)
            .map(|(_, v)| v)
    }

    pub fn scaled(&self, c: f64) -> Cfr {
        Cfr { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }
}

/// Channel impulse response, one complex tap every `tap_spacing` seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct Cir {
    pub taps: Vec<Complex64>,
    pub tap_spacing: f64,
}

impl Cir {
    /// Forward DFT of the taps, the inverse of [`cir_from_cfr`].
    pub fn to_cfr_values(&self) -> Vec<Complex64> {
        let mut buf = self.taps.clone();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        buf
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// N-point inverse DFT with `1/N` scaling; taps are `T = 1/(N·δf)` apart.
pub fn cir_from_cfr(cfr: &Cfr) -> Result<Cir> {
    let df = cfr.delta_f()?;
    let n = cfr.len();
    let mut buf = cfr.values.clone();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Ok(Cir { taps: buf, tap_spacing: 1.0 / (n as f64 * df) })
}

/// `|h_m|² / Σ|h|²` per tap.
pub fn power_delay_profile(cir: &Cir) -> Result<Vec<f64>> {
    let e = cir.energy();
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::DegenerateChannel(format!("impulse response energy is {e}")));
    }
    Ok(cir.taps.iter().map(|t| t.norm_sqr() / e).collect())
}

/// Standard deviation of the delay `m·tap_spacing` under `profile`.
pub fn rms_delay_spread(profile: &[f64], tap_spacing: f64) -> f64 {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (m, p) in profile.iter().enumerate() {
        let m = m as f64;
        m1 += m * p;
        m2 += m * m * p;
    }
    (m2 - m1 * m1).max(0.0).sqrt() * tap_spacing
}

/// Mean `|H|²` over the in-band points.
pub fn channel_gain(cfr: &Cfr) -> Result<f64> {
    let (n, sum) = cfr.in_band().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v.norm_sqr()));
    if n == 0 {
        return invalid(format!("no frequency points inside band {:?}", cfr.band));
    }
    Ok(sum / n as f64)
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Power decay of the synthetic multipath taps with delay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attenuation {
    Flat,
    /// Tap power falls as `exp(−τ / time_constant_s)`.
    Exponential { time_constant_s: f64 },
}

/// Multipath CFR `Σ g_k·e^{−j2πfτ_k}` on the standard grid. The first path
/// sits at τ = 0 with unit gain and zero phase; the others take distinct
/// delays on the tap grid up to `max_delay_s` and uniform random phases.
pub fn synth_cfr(n_paths: usize, max_delay_s: f64, attenuation: Attenuation, seed: u64) -> Result<Cfr> {
    if n_paths == 0 {
        return invalid("n_paths must be at least 1");
    }
    let t = 1.0 / (DEFAULT_POINTS as f64 * DEFAULT_DELTA_F_HZ);
    let max_tap = ((max_delay_s / t) + 1e-9).floor();
    if !(max_tap >= 0.0) || max_tap >= DEFAULT_POINTS as f64 {
        return invalid(format!("max delay {max_delay_s} s outside the {} s impulse response span", t * DEFAULT_POINTS as f64));
    }
    let max_tap = max_tap as usize;
    if n_paths - 1 > max_tap {
        return invalid(format!("{n_paths} paths do not fit in {} delay taps", max_tap + 1));
    }
    if let Attenuation::Exponential { time_constant_s } = attenuation {
        if !(time_constant_s > 0.0) {
            return invalid("attenuation time constant must be positive");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taps: Vec<usize> = sample(&mut rng, max_tap, n_paths - 1).into_iter().map(|m| m + 1).collect();
    taps.sort_unstable();
    let mut paths = vec![(0.0, Complex64::new(1.0, 0.0))];
    for m in taps {
        let tau = m as f64 * t;
        let amp = match attenuation {
            Attenuation::Flat => 1.0,
            Attenuation::Exponential { time_constant_s } => (-tau / (2.0 * time_constant_s)).exp(),
        };
        let phase = rng.random_range(0.0..2.0 * PI);
        paths.push((tau, Complex64::from_polar(amp, phase)));
    }
    let values = (0..DEFAULT_POINTS)
        .map(|k| {
            let f = k as f64 * DEFAULT_DELTA_F_HZ;
            paths.iter().map(|(tau, g)| g * Complex64::from_polar(1.0, -2.0 * PI * f * tau)).sum()
        })
        .collect();
    Cfr::standard_grid(values)
}

/// Reads `freq_hz,re,im` rows. Lines starting with `#` are comments; a
/// `# band_hz: lo,hi` comment sets the gain band, which otherwise spans the
/// whole grid.
pub fn read_cfr_csv<R: Read>(mut input: R) -> Result<Cfr> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut band = None;
    for line in text.lines().filter_map(|l| l.trim().strip_prefix('#')) {
        if let Some(v) = line.trim().strip_prefix("band_hz:") {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            let parsed: Option<Vec<f64>> = parts.iter().map(|p| p.parse().ok()).collect();
            match parsed.as_deref() {
                Some([lo, hi]) => band = Some((*lo, *hi)),
                _ => return Err(Error::Config(format!("band_hz must be `lo,hi`, got `{}`", v.trim()))),
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("CFR file is missing column `{name}`")))
    };
    let (fc, rc, ic) = (col("freq_hz")?, col("re")?, col("im")?);
    let (mut freqs, mut values) = (Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |c: usize, name: &str| -> Result<f64> {
            rec.get(c)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("row {}: `{name}` is not a number", row + 1)))
        };
        freqs.push(field(fc, "freq_hz")?);
        values.push(Complex64::new(field(rc, "re")?, field(ic, "im")?));
    }
    let band = match band {
        Some(b) => b,
        None if !freqs.is_empty() => (freqs[0], freqs[freqs.len() - 1]),
        None => (0.0, 0.0),
    };
    Cfr::new(freqs, values, band)
}

/// Writes the layout [`read_cfr_csv`] accepts, `notes` as leading comments.
pub fn write_cfr_csv<W: Write>(cfr: &Cfr, notes: &[String], mut out: W) -> Result<()> {
    for n in notes {
        writeln!(out, "# {n}")?;
    }
    writeln!(out, "# band_hz: {},{}", cfr.band.0, cfr.band.1)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["freq_hz", "re", "im"])?;
    for (f, v) in cfr.freqs.iter().zip(&cfr.values) {
        w.write_record([f.to_string(), v.re.to_string(), v.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
