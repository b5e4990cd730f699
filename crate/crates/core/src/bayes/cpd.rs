use serde::{Deserialize, Serialize};

/// State space of a Bayesian node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpace {
    Binary,
    /// States `0..=max`.
    Integer { max: usize },
}

impl StateSpace {
    pub fn max_state(&self) -> usize {
        match self {
            StateSpace::Binary => 1,
            StateSpace::Integer { max } => *max,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.max_state() + 1
    }
}

/// Conditional distribution of a node given its parents. Gates carry one
/// inhibition per parent: the probability that the parent's influence is
/// blocked, i.e. the failure probability of the link from that parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cpd {
    RootPrior { p_active: f64 },
    NoisyOr { inhibitions: Vec<f64> },
    NoisyIntAdd { inhibitions: Vec<f64> },
}

impl Cpd {
    pub fn inhibitions(&self) -> &[f64] {
        match self {
            Cpd::RootPrior { .. } => &[],
            Cpd::NoisyOr { inhibitions } | Cpd::NoisyIntAdd { inhibitions } => inhibitions,
        }
    }

    /// Distribution over `0..card` given parent states.
    pub fn distribution(&self, parent_states: &[usize], card: usize) -> Vec<f64> {
        let mut out = vec![0.0; card];
        match self {
            Cpd::RootPrior { p_active } => {
                out[0] = 1.0 - p_active;
                if card > 1 {
                    out[1] = *p_active;
                }
            }
            Cpd::NoisyOr { inhibitions } => {
                let active: Vec<bool> = parent_states.iter().map(|&s| s > 0).collect();
                let p = noisy_or(&active, inhibitions);
                out[0] = 1.0 - p;
                out[1] = p;
            }
            Cpd::NoisyIntAdd { inhibitions } => {
                let d = noisy_int_add(parent_states, inhibitions);
                out[..d.len()].copy_from_slice(&d);
            }
        }
        out
    }
}

/// P(child active) for a leak-free Noisy-OR: `1 − Π q_i` over active parents.
/// No active parent means the child stays inactive.
pub fn noisy_or(active: &[bool], inhibitions: &[f64]) -> f64 {
    debug_assert_eq!(active.len(), inhibitions.len());
    let blocked: f64 = active
        .iter()
        .zip(inhibitions)
        .filter(|(a, _)| **a)
        .map(|(_, q)| *q)
        .product();
    if active.iter().any(|a| *a) {
        1.0 - blocked
    } else {
        0.0
    }
}

/// Distribution of `Σ b_i·s_i` with independent pass indicators
/// `b_i ~ Bernoulli(1 − q_i)`, by sequential convolution. Index = child state.
pub fn noisy_int_add(parent_states: &[usize], inhibitions: &[f64]) -> Vec<f64> {
    debug_assert_eq!(parent_states.len(), inhibitions.len());
    let total: usize = parent_states.iter().sum();
    let mut dist = vec![0.0; total + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for (&s, &q) in parent_states.iter().zip(inhibitions) {
        if s == 0 {
            continue;
        }
        for v in (0..=reach).rev() {
            let p = dist[v];
            if p != 0.0 {
                dist[v + s] += (1.0 - q) * p;
                dist[v] = q * p;
            }
        }
        reach += s;
    }
    dist
}
