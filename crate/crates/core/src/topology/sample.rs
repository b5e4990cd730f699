use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grid::{LinkKind, MeshTopology};
use crate::error::{invalid, Result};

/// State of one directed link in one Monte-Carlo trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkState {
    pub failure_prob: f64,
    pub latency_ms: f64,
    /// False when an intermittent link dropped out of this trial.
    pub present: bool,
}

impl LinkState {
    /// Inhibition seen by a Bayesian gate: an absent link always fails.
    pub fn inhibition(&self) -> f64 {
        if self.present {
            self.failure_prob
        } else {
            1.0
        }
    }
}

/// One draw of per-link failure probabilities and latency weights, addressed
/// by node index pair so it applies to any de-tangled variant of the grid it
/// was drawn on.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSample {
    pub trial_index: usize,
    capacity: usize,
    states: Vec<Option<LinkState>>,
}

impl LinkSample {
    pub fn new(trial_index: usize, capacity: usize) -> Self {
        LinkSample { trial_index, capacity, states: vec![None; capacity * capacity] }
    }

    pub fn get(&self, from: usize, to: usize) -> Option<&LinkState> {
        if from >= self.capacity || to >= self.capacity {
            return None;
        }
        self.states[from * self.capacity + to].as_ref()
    }

    pub fn set(&mut self, from: usize, to: usize, state: LinkState) {
        assert!(from < self.capacity && to < self.capacity, "link index out of range");
        self.states[from * self.capacity + to] = Some(state);
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &LinkState)> {
        let n = self.capacity;
        self.states
            .iter()
            .enumerate()
            .filter_map(move |(k, s)| s.as_ref().map(|s| ((k / n, k % n), s)))
    }

    /// Same failure probabilities with every link weight replaced by `ms`.
    pub fn with_constant_latency(mut self, ms: f64) -> Self {
        for s in self.states.iter_mut().flatten() {
            s.latency_ms = ms;
        }
        self
    }

    /// Same latencies with every failure probability replaced by `q`.
    pub fn with_constant_failure(mut self, q: f64) -> Self {
        for s in self.states.iter_mut().flatten() {
            s.failure_prob = q;
        }
        self
    }
}

/// Draws trial `trial` of the stream identified by `seed`. Each trial owns a
/// ChaCha stream, so trials can be generated in any order or in parallel.
///
/// Failure probabilities are U(0,1) per directed link; latency weights are
/// U[(1-s)·μ, (1+s)·μ] per direction; intermittent links are present with
/// the scenario's presence probability, drawn once per node pair.
pub fn sample_trial(topology: &MeshTopology, seed: u64, trial: usize) -> LinkSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let sc = &topology.scenario;
    let lo = sc.hop_latency_ms * (1.0 - sc.hop_latency_spread);
    let hi = sc.hop_latency_ms * (1.0 + sc.hop_latency_spread);
    let mut sample = LinkSample::new(trial, topology.capacity);
    for l in topology.links.iter().filter(|l| l.from < l.to) {
        let present = match l.kind {
            LinkKind::Stable => true,
            LinkKind::Intermittent => rng.random::<f64>() < sc.intermittent_presence,
        };
        for (a, b) in [(l.from, l.to), (l.to, l.from)] {
            let failure_prob = rng.random::<f64>();
            let latency_ms = if hi > lo { rng.random_range(lo..hi) } else { lo };
            sample.set(a, b, LinkState { failure_prob, latency_ms, present });
        }
    }
    sample
}

/// `trials` independent link-uncertainty states, deterministic in `seed`.
pub fn sample_link_uncertainty(
    topology: &MeshTopology,
    trials: usize,
    seed: u64,
) -> Result<Vec<LinkSample>> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    Ok((0..trials)
        .into_par_iter()
        .map(|t| sample_trial(topology, seed, t))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_grid_mesh, Scenario};

    #[test]
    fn probabilities_in_range_and_latencies_positive() {
        let t = build_grid_mesh(3, 4, &Scenario::scenario1()).unwrap();
        let samples = sample_link_uncertainty(&t, 1000, 7).unwrap();
        assert_eq!(samples.len(), 1000);
        for s in &samples {
            assert_eq!(s.iter().count(), t.link_count());
            for (_, st) in s.iter() {
                assert!((0.0..=1.0).contains(&st.failure_prob));
                assert!(st.latency_ms > 0.0 && st.latency_ms.is_finite());
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let t = build_grid_mesh(3, 4, &Scenario::scenario2()).unwrap();
        let a = sample_link_uncertainty(&t, 2, 99).unwrap();
        let b = sample_link_uncertainty(&t, 2, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_link_uncertainty(&t, 2, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn failure_mean_is_one_half() {
        let t = build_grid_mesh(1, 2, &Scenario::scenario1()).unwrap();
        let samples = sample_link_uncertainty(&t, 10_000, 3).unwrap();
        let mean = samples.iter().map(|s| s.get(0, 1).unwrap().failure_prob).sum::<f64>() / 1e4;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn latency_within_spread() {
        let sc = Scenario::scenario1().with_hop_latency(2.0);
        let t = build_grid_mesh(3, 4, &sc).unwrap();
        for s in sample_link_uncertainty(&t, 50, 1).unwrap() {
            for (_, st) in s.iter() {
                assert!((1.6..2.4).contains(&st.latency_ms));
            }
        }
    }

    #[test]
    fn intermittent_links_share_presence_per_pair() {
        let t = build_grid_mesh(3, 4, &Scenario::scenario2()).unwrap();
        let samples = sample_link_uncertainty(&t, 400, 5).unwrap();
        let mut present = 0;
        let mut total = 0;
        for s in &samples {
            for ((a, b), st) in s.iter() {
                assert_eq!(st.present, s.get(b, a).unwrap().present);
                if t.link(a, b).unwrap().kind == LinkKind::Intermittent {
                    total += 1;
                    present += st.present as usize;
                } else {
                    assert!(st.present);
                }
            }
        }
        let frac = present as f64 / total as f64;
        assert!((frac - 0.5).abs() < 0.05, "presence {frac}");
    }

    #[test]
    fn zero_trials_rejected() {
        let t = build_grid_mesh(1, 2, &Scenario::scenario1()).unwrap();
        assert!(sample_link_uncertainty(&t, 0, 1).is_err());
    }
}
