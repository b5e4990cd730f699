use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use motsim::anomaly::*;
use motsim::bayes::{build_pathcount_bn, delivery_belief_with, infer_with, Fallback, InferenceOptions};
use motsim::hybrid::*;
use motsim::latency::{average_latency, latency_table, LatencyStats};
use motsim::plc::{analyze_link, fit_lognormal, read_cfr_csv, LognormalFit, PlcLink};
use motsim::topology::*;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{ms, OutDir, Provenance};

pub const EXIT_ANOMALY: u8 = 2;

fn out_dir(cfg: &ExperimentConfig) -> Result<OutDir> {
    OutDir::create(&cfg.out, Provenance::new(cfg)?)
}

fn ids(topo: &MeshTopology, labels: &[String]) -> Result<Vec<NodeId>> {
    labels.iter().map(|l| topo.id(l).map_err(Into::into)).collect()
}

/// Configured de-tangle cases, or the three reference cases when the mesh
/// has those labels.
fn detangle_cases(cfg: &ExperimentConfig, topo: &MeshTopology) -> Vec<Vec<String>> {
    if !cfg.detangle.is_empty() {
        return cfg.detangle.clone();
    }
    [&["S10"][..], &["S3", "S5"], &["S3", "S4", "S5", "S6"]]
        .iter()
        .filter(|c| c.iter().all(|l| topo.id(l).is_ok()))
        .map(|c| c.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn write_baseline_csv(p: &BaselineProfile, out: &mut Vec<u8>) -> motsim::Result<()> {
    writeln!(out, "source,latency_mean_ms,latency_std_ms,b_thl_ms,pdr_mean,pdr_std,b_thp")?;
    for s in &p.sources {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            s.source,
            ms(s.latency_mean),
            ms(s.latency_std),
            ms(s.b_thl),
            s.pdr_mean,
            s.pdr_std,
            s.b_thp
        )?;
    }
    Ok(())
}

fn write_case_table(
    base: &[LatencyStats],
    cases: &[(Vec<String>, Vec<LatencyStats>)],
    out: &mut Vec<u8>,
) -> motsim::Result<()> {
    write!(out, "source,baseline_ms")?;
    for (c, _) in cases {
        write!(out, ",without_{}", c.join("_"))?;
    }
    writeln!(out)?;
    for (i, b) in base.iter().enumerate() {
        write!(out, "{},{}", b.src.label, ms(b.mean))?;
        for (c, rows) in cases {
            if c.contains(&b.src.label) {
                write!(out, ",removed")?;
            } else {
                write!(out, ",{}", ms(rows[i].mean))?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn characterize(cfg: &ExperimentConfig) -> Result<u8> {
    let seed = cfg.seed()?;
    let topo = cfg.topology.build()?;
    let opts = BaselineOptions {
        trials: cfg.trials,
        seed,
        k_sigma: cfg.k_sigma,
        max_hops: cfg.max_hops,
        k_fractions: cfg.k_fractions.clone(),
        sensitivity_delta_ms: cfg.sensitivity_delta_ms,
    };
    let profile = characterize_baseline(&topo, &opts)?;
    let out = out_dir(cfg)?;
    out.json("profile.json", &profile)?;
    out.csv("baseline.csv", |w| write_baseline_csv(&profile, w))?;

    let cases = detangle_cases(cfg, &topo);
    let dst = topo.client().id.clone();
    let servers: Vec<NodeId> = topo.servers().map(|s| s.id.clone()).collect();
    let samples = sample_link_uncertainty(&topo, cfg.trials, seed)?;
    let base = latency_table(&topo, &samples, &servers, &dst)?;
    let mut case_rows = Vec::new();
    for c in &cases {
        let cut = topo.detangle_labels(c)?;
        case_rows.push((c.clone(), latency_table(&cut, &samples, &servers, &dst)?));
    }
    out.csv("latency_table.csv", |w| write_case_table(&base, &case_rows, w))?;

    let mut scen = Vec::new();
    writeln!(scen, "scenario,source,baseline_ms,detangled_ms,detangled_nodes")?;
    for n in 1..=3u8 {
        let tc = TopologyConfig { scenario: ScenarioSpec::preset(n), ..cfg.topology.clone() };
        let t = tc.build()?;
        let src = t.id("S1").unwrap_or_else(|_| t.servers().next().expect("mesh has servers").id.clone());
        let s = sample_link_uncertainty(&t, cfg.trials, seed)?;
        let b = average_latency(&t, &s, &src, &dst)?;
        let (d, nodes) = match cases.first() {
            Some(c) => (ms(average_latency(&t.detangle_labels(c)?, &s, &src, &dst)?.mean), c.join(" ")),
            None => (String::new(), String::new()),
        };
        let name = serde_json::to_value(t.scenario.name)?;
        writeln!(scen, "{},{},{},{},{}", name.as_str().unwrap_or("custom"), src.label, ms(b.mean), d, nodes)?;
    }
    out.csv("scenario_latency.csv", |w| {
        w.extend_from_slice(&scen);
        Ok(())
    })?;

    println!("characterized {} sources over {} trials", profile.sources.len(), cfg.trials);
    for s in &profile.sources {
        println!(
            "  {:>4}  latency {:>8.3} ± {:.3} ms  pdr {:.4} ± {:.4}",
            s.source, s.latency_mean, s.latency_std, s.pdr_mean, s.pdr_std
        );
    }
    println!("network PDR {:.4}; outputs in {}", profile.network_pdr, cfg.out.display());
    Ok(0)
}

pub enum DetectInput {
    Observations(PathBuf),
    Simulate(Vec<String>),
}

#[derive(Serialize)]
struct ReportFile<'a> {
    profile: String,
    reports: &'a [AnomalyReport],
}

pub fn detect_cmd(cfg: &ExperimentConfig, profile_path: &Path, input: DetectInput) -> Result<u8> {
    let text = std::fs::read_to_string(profile_path)
        .with_context(|| format!("reading profile {}", profile_path.display()))?;
    let profile = BaselineProfile::from_json(&text).with_context(|| format!("profile {}", profile_path.display()))?;
    let topo = profile.build_topology()?;
    let simulated = matches!(input, DetectInput::Simulate(_));
    let observations = match input {
        DetectInput::Observations(path) => {
            let f = File::open(&path).with_context(|| format!("opening observations {}", path.display()))?;
            read_observations_csv(f).with_context(|| format!("observations {}", path.display()))?
        }
        DetectInput::Simulate(nodes) => {
            let removed = ids(&topo, &nodes)?;
            let seed = cfg.seed()?;
            (0..cfg.epochs)
                .into_par_iter()
                .map(|e| simulate_observation(&profile, &topo, &removed, seed, e))
                .collect::<motsim::Result<Vec<_>>>()?
        }
    };
    if observations.is_empty() {
        bail!("no observations to check");
    }
    let reports = observations.iter().map(|o| detect(&profile, o)).collect::<motsim::Result<Vec<_>>>()?;

    let out = out_dir(cfg)?;
    out.json("report.json", &ReportFile { profile: profile_path.display().to_string(), reports: &reports })?;
    if simulated {
        out.csv("observations.csv", |w| write_observations_csv(&observations, w))?;
    }
    let mut anomalous = false;
    for r in &reports {
        let flagged: Vec<String> = r
            .verdicts
            .iter()
            .filter(|v| v.anom)
            .map(|v| format!("{} ({:?}, {:?})", v.source, v.triggered_by, v.severity))
            .collect();
        if flagged.is_empty() {
            println!("epoch {}: clean", r.epoch);
        } else {
            anomalous = true;
            println!("epoch {}: {}; suspects [{}]", r.epoch, flagged.join(", "), r.suspects.join(", "));
        }
    }
    Ok(if anomalous { EXIT_ANOMALY } else { 0 })
}

#[derive(Serialize)]
struct PlcEntry {
    file: String,
    #[serde(flatten)]
    link: PlcLink,
}

#[derive(Serialize)]
struct PlcFile {
    links: Vec<PlcEntry>,
    /// Fit over the files' delay spreads (seconds), when there are several.
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_rms_lognormal: Option<LognormalFit>,
}

pub fn plc(cfg: &ExperimentConfig, files: &[PathBuf]) -> Result<u8> {
    let files = if files.is_empty() { &cfg.plc.fixtures[..] } else { files };
    if files.is_empty() {
        bail!("no CFR file given: pass --cfr or list plc.fixtures in the config");
    }
    let links = files
        .par_iter()
        .map(|p| {
            let f = File::open(p).with_context(|| format!("opening CFR file {}", p.display()))?;
            let cfr = read_cfr_csv(f).with_context(|| format!("CFR file {}", p.display()))?;
            let link = analyze_link(&cfr, &cfg.plc.params).with_context(|| format!("CFR file {}", p.display()))?;
            Ok(PlcEntry { file: p.display().to_string(), link })
        })
        .collect::<Result<Vec<_>>>()?;
    let taus: Vec<f64> = links.iter().map(|l| l.link.tau_rms_s).collect();
    let fit = if taus.len() >= 2 { Some(fit_lognormal(&taus)?) } else { None };
    for l in &links {
        println!(
            "{}: gain {:.2} dB, tau_rms {:.4e} s, sinr {:.3e}, ber {:.4e}, pdr {:.4}",
            l.file, l.link.gain_db, l.link.tau_rms_s, l.link.sinr, l.link.ber, l.link.pdr
        );
    }
    out_dir(cfg)?.json("plc.json", &PlcFile { links, tau_rms_lognormal: fit })?;
    Ok(0)
}

#[derive(Serialize)]
struct HybridSummary {
    l_gw_ms: f64,
    scalability_ratio: Option<f64>,
    pdr_plc_fixture: Option<String>,
}

pub fn hybrid(cfg: &ExperimentConfig) -> Result<u8> {
    let mut presets = cfg.hybrid.presets.clone();
    if presets.is_empty() {
        bail!("hybrid.presets is empty");
    }
    if let Some(p) = &cfg.hybrid.plc_fixture {
        let f = File::open(p).with_context(|| format!("opening CFR file {}", p.display()))?;
        let link = analyze_link(&read_cfr_csv(f)?, &cfg.plc.params)?;
        for pr in &mut presets {
            pr.pdr_plc = link.pdr;
        }
    }
    let pdr_rows = pdr_table(&presets);
    let lat_rows = latency_presets();
    let ratio = scalability_ratio(&lat_rows, cfg.hybrid.l_gw);
    let out = out_dir(cfg)?;
    out.csv("hybrid_pdr.csv", |w| write_pdr_table(&pdr_rows, w))?;
    out.csv("hybrid_latency.csv", |w| write_latency_table(&lat_rows, cfg.hybrid.l_gw, w))?;
    out.json(
        "hybrid_summary.json",
        &HybridSummary {
            l_gw_ms: cfg.hybrid.l_gw,
            scalability_ratio: ratio,
            pdr_plc_fixture: cfg.hybrid.plc_fixture.as_ref().map(|p| p.display().to_string()),
        },
    )?;
    for r in pdr_rows.iter().filter(|r| r.pdr_hybrid.is_some()) {
        println!(
            "{} alpha=1 beta={}: PDR_hybrid {:.4}",
            r.scenario,
            r.beta.unwrap_or_default(),
            r.pdr_hybrid.unwrap_or_default()
        );
    }
    if let Some(x) = ratio {
        println!("scalability ratio (10 mesh units vs 1 unit + 1 PLC hop): {x:.2}");
    }
    Ok(0)
}

/// Per-trial path-count belief of the client, `[1.0]` when the source is
/// cut off.
fn pathcount_beliefs(
    topo: &MeshTopology,
    src: &NodeId,
    dst: &NodeId,
    samples: &[LinkSample],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    let dag = match build_dag(topo, src, dst) {
        Ok(d) if !d.is_empty() => d,
        _ => return Ok((vec![1.0], 1.0)),
    };
    let per_trial = samples
        .par_iter()
        .map(|s| {
            let opts = InferenceOptions {
                fallback: Fallback::LikelihoodWeighting { samples: cfg.belief_samples, seed: seed ^ s.trial_index as u64 },
                ..InferenceOptions::default()
            };
            let net = build_pathcount_bn(topo, &dag, s)?;
            let dist = infer_with(&net, &[(src.clone(), 1)], dst, &opts)?.distribution;
            let zero = 1.0 - delivery_belief_with(&net, src, dst, &opts)?;
            Ok((dist, zero))
        })
        .collect::<motsim::Result<Vec<_>>>()?;
    let len = per_trial.iter().map(|(d, _)| d.len()).max().unwrap_or(1);
    let n = per_trial.len() as f64;
    let mut mean = vec![0.0; len];
    for (d, _) in &per_trial {
        for (m, p) in mean.iter_mut().zip(d) {
            *m += p / n;
        }
    }
    let zero = per_trial.iter().map(|(_, z)| z).sum::<f64>() / n;
    Ok((mean, zero))
}

#[derive(Serialize)]
struct BeliefSummary {
    source: String,
    removed: Vec<String>,
    trials: usize,
    /// Exact mean P(C = 0 | source = 1).
    bel_zero_baseline: f64,
    bel_zero_detangled: f64,
}

pub fn beliefs(cfg: &ExperimentConfig, trials: usize) -> Result<u8> {
    let seed = cfg.seed()?;
    let topo = cfg.topology.build()?;
    let src = topo.id(&cfg.belief_source)?;
    let dst = topo.client().id.clone();
    let removed = detangle_cases(cfg, &topo).into_iter().next().unwrap_or_default();
    if removed.contains(&src.label) {
        bail!("belief source {} is in the removed set", src.label);
    }
    let cut = topo.detangle_labels(&removed)?;
    let samples = sample_link_uncertainty(&topo, trials, seed)?;
    let (base, z_base) = pathcount_beliefs(&topo, &src, &dst, &samples, cfg, seed)?;
    let (det, z_det) = pathcount_beliefs(&cut, &src, &dst, &samples, cfg, seed)?;

    let mut buf = Vec::new();
    writeln!(buf, "state,baseline,detangled")?;
    for s in 0..base.len().max(det.len()) {
        let cell = |v: &[f64]| v.get(s).map(|p| format!("{p:.6}")).unwrap_or_else(|| "---".into());
        writeln!(buf, "{s},{},{}", cell(&base), cell(&det))?;
    }
    let out = out_dir(cfg)?;
    out.csv("beliefs.csv", |w| {
        w.extend_from_slice(&buf);
        Ok(())
    })?;
    out.json(
        "beliefs_summary.json",
        &BeliefSummary {
            source: src.label.clone(),
            removed: removed.clone(),
            trials,
            bel_zero_baseline: z_base,
            bel_zero_detangled: z_det,
        },
    )?;
    println!(
        "BEL(C=0 | {}=1): baseline {:.4}, without [{}] {:.4}",
        src.label,
        z_base,
        removed.join(", "),
        z_det
    );
    Ok(0)
}
