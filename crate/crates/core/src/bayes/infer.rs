use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cpd::Cpd;
use super::factor::Factor;
use super::net::BayesNet;
use crate::error::{invalid, Error, Result};
use crate::topology::NodeId;

/// What to do when exact elimination would build a factor larger than
/// [`InferenceOptions::max_factor_entries`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    LikelihoodWeighting { samples: usize, seed: u64 },
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceOptions {
    pub max_factor_entries: usize,
    pub fallback: Fallback,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            max_factor_entries: 1 << 22,
            fallback: Fallback::LikelihoodWeighting { samples: 100_000, seed: 0 },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMethod {
    Exact,
    LikelihoodWeighting { samples: usize },
}

/// Posterior distribution of one node; `distribution[s]` is P(node = s | evidence).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub node: NodeId,
    pub distribution: Vec<f64>,
    pub method: InferenceMethod,
}

impl Belief {
    /// P(node > 0).
    pub fn p_active(&self) -> f64 {
        1.0 - self.distribution[0]
    }
}

/// Posterior of `query` given `evidence` with default options.
pub fn infer(net: &BayesNet, evidence: &[(NodeId, usize)], query: &NodeId) -> Result<Belief> {
    infer_with(net, evidence, query, &InferenceOptions::default())
}

pub fn infer_with(
    net: &BayesNet,
    evidence: &[(NodeId, usize)],
    query: &NodeId,
    opts: &InferenceOptions,
) -> Result<Belief> {
    let q = net
        .position_of(query)
        .ok_or_else(|| Error::NotFound(format!("query node {query} not in net")))?;
    let ev = resolve_evidence(net, evidence)?;
    match eliminate(net, &ev, q, opts.max_factor_entries)? {
        Some(distribution) => Ok(Belief {
            node: net.nodes()[q].id.clone(),
            distribution,
            method: InferenceMethod::Exact,
        }),
        None => match opts.fallback {
            Fallback::Fail => Err(Error::WidthExceeded {
                width: required_width(net, &ev, q),
                cap: opts.max_factor_entries,
            }),
            Fallback::LikelihoodWeighting { samples, seed } => Ok(Belief {
                node: net.nodes()[q].id.clone(),
                distribution: likelihood_weighting(net, &ev, q, samples, seed)?,
                method: InferenceMethod::LikelihoodWeighting { samples },
            }),
        },
    }
}

/// Evidence as (position, state) pairs, one per node.
fn resolve_evidence(net: &BayesNet, evidence: &[(NodeId, usize)]) -> Result<Vec<(usize, usize)>> {
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(evidence.len());
    for (id, state) in evidence {
        let pos = net
            .position_of(id)
            .ok_or_else(|| Error::NotFound(format!("evidence node {id} not in net")))?;
        if *state >= net.nodes()[pos].states.cardinality() {
            return invalid(format!("state {state} out of range for {id}"));
        }
        match out.iter().find(|(p, _)| *p == pos) {
            Some((_, s)) if s != state => return Err(Error::InconsistentEvidence),
            Some(_) => {}
            None => out.push((pos, *state)),
        }
    }
    Ok(out)
}

/// Nodes that are ancestors of the query or of an evidence node (inclusive).
/// Everything else is barren and sums out to one.
fn relevant(net: &BayesNet, ev: &[(usize, usize)], q: usize) -> Vec<bool> {
    let mut keep = vec![false; net.len()];
    keep[q] = true;
    for &(p, _) in ev {
        keep[p] = true;
    }
    for pos in (0..net.len()).rev() {
        if keep[pos] {
            for &p in &net.nodes()[pos].parents {
                keep[p] = true;
            }
        }
    }
    keep
}

/// Factors of the relevant nodes, with causal-independence gates split into
/// chains of auxiliary variables so no factor has more than three variables.
fn build_factors(net: &BayesNet, keep: &[bool]) -> Vec<Factor> {
    let nodes = net.nodes();
    let mut next_aux = net.len();
    let mut factors = Vec::new();
    for (pos, n) in nodes.iter().enumerate().filter(|(p, _)| keep[*p]) {
        let card = n.states.cardinality();
        let additive = match &n.cpd {
            Cpd::RootPrior { .. } => {
                factors.push(Factor::new(vec![pos], vec![card], n.cpd.distribution(&[], card)));
                continue;
            }
            Cpd::NoisyOr { .. } => false,
            Cpd::NoisyIntAdd { .. } => true,
        };
        let inh = n.cpd.inhibitions();
        let k = n.parents.len();
        // (variable, cardinality) of the running partial result.
        let mut prev: Option<(usize, usize)> = None;
        let mut reach = 0;
        for (j, (&par, &q)) in n.parents.iter().zip(inh).enumerate() {
            let pcard = nodes[par].states.cardinality();
            reach += pcard - 1;
            let (var, vcard) = if j + 1 == k {
                (pos, card)
            } else {
                let v = next_aux;
                next_aux += 1;
                (v, if additive { reach + 1 } else { 2 })
            };
            let combine = |y: usize, s: usize| {
                if additive {
                    y + s
                } else {
                    usize::from(y > 0 || s > 0)
                }
            };
            let (pvar, pc) = prev.unwrap_or((usize::MAX, 1));
            let mut values = vec![0.0; pc * pcard * vcard];
            for y in 0..pc {
                for s in 0..pcard {
                    let base = (y * pcard + s) * vcard;
                    let on = combine(y, s);
                    if on < vcard {
                        values[base + on] += 1.0 - q;
                    }
                    if y < vcard {
                        values[base + y] += q;
                    }
                }
            }
            let f = match prev {
                Some(_) => Factor::new(vec![pvar, par, var], vec![pc, pcard, vcard], values),
                None => Factor::new(vec![par, var], vec![pcard, vcard], values),
            };
            factors.push(f);
            prev = Some((var, vcard));
        }
    }
    factors
}

struct Plan {
    order: Vec<usize>,
    max_entries: usize,
}

/// Greedy min-degree order (ties broken by clique weight, then variable id)
/// over the interaction graph of `factors`, eliminating all but `keep`.
fn plan(factors: &[Factor], keep: Option<usize>) -> Plan {
    let mut vars: Vec<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
    vars.sort_unstable();
    vars.dedup();
    let idx = |v: usize| vars.binary_search(&v).unwrap();
    let mut card = vec![0usize; vars.len()];
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); vars.len()];
    let mut max_entries = 1usize;
    for f in factors {
        max_entries = max_entries.max(f.values.len());
        for (a, c) in f.vars.iter().zip(&f.cards) {
            card[idx(*a)] = *c;
            for b in &f.vars {
                if a != b {
                    adj[idx(*a)].insert(idx(*b));
                }
            }
        }
    }
    let mut alive: BTreeSet<usize> = (0..vars.len()).filter(|&i| Some(vars[i]) != keep).collect();
    let mut order = Vec::with_capacity(alive.len());
    while !alive.is_empty() {
        let best = *alive
            .iter()
            .min_by_key(|&&v| {
                let w = adj[v]
                    .iter()
                    .fold(card[v], |acc, &u| acc.saturating_mul(card[u]));
                (adj[v].len(), w, vars[v])
            })
            .unwrap();
        let clique = adj[best].iter().fold(card[best], |acc, &u| acc.saturating_mul(card[u]));
        max_entries = max_entries.max(clique);
        let nbrs: Vec<usize> = adj[best].iter().copied().collect();
        for &a in &nbrs {
            adj[a].remove(&best);
            for &b in &nbrs {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[best].clear();
        alive.remove(&best);
        order.push(vars[best]);
    }
    Plan { order, max_entries }
}

fn prepared(net: &BayesNet, ev: &[(usize, usize)], q: usize) -> (Vec<Factor>, Option<usize>) {
    let keep = relevant(net, ev, q);
    let mut factors = build_factors(net, &keep);
    for &(var, state) in ev {
        for f in factors.iter_mut() {
            if f.card_of(var).is_some() {
                *f = f.restrict(var, state);
            }
        }
    }
    let q_free = !ev.iter().any(|(p, _)| *p == q);
    (factors, q_free.then_some(q))
}

fn required_width(net: &BayesNet, ev: &[(usize, usize)], q: usize) -> usize {
    let (factors, keep) = prepared(net, ev, q);
    plan(&factors, keep).max_entries
}

/// Exact variable elimination. `Ok(None)` when the plan exceeds `cap`.
fn eliminate(
    net: &BayesNet,
    ev: &[(usize, usize)],
    q: usize,
    cap: usize,
) -> Result<Option<Vec<f64>>> {
    let (mut factors, keep) = prepared(net, ev, q);
    let p = plan(&factors, keep);
    if p.max_entries > cap {
        return Ok(None);
    }
    for v in p.order {
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.card_of(v).is_some());
        factors = without;
        if let Some(joint) = with.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(joint.sum_out(v));
        }
    }
    let joint = factors.into_iter().fold(Factor::scalar(1.0), |a, b| a.product(&b));
    let z: f64 = joint.values.iter().sum();
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InconsistentEvidence);
    }
    let card = net.nodes()[q].states.cardinality();
    Ok(Some(match keep {
        Some(_) => joint.values.iter().map(|v| v / z).collect(),
        None => {
            let s = ev.iter().find(|(p, _)| *p == q).unwrap().1;
            let mut d = vec![0.0; card];
            d[s] = 1.0;
            d
        }
    }))
}

/// Likelihood-weighting estimate of P(query | evidence).
pub(crate) fn likelihood_weighting(
    net: &BayesNet,
    ev: &[(usize, usize)],
    q: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if samples == 0 {
        return invalid("likelihood weighting needs at least one sample");
    }
    let nodes = net.nodes();
    let mut fixed = vec![None; nodes.len()];
    for &(p, s) in ev {
        fixed[p] = Some(s);
    }
    let keep = relevant(net, ev, q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0.0; nodes[q].states.cardinality()];
    let mut state = vec![0usize; nodes.len()];
    let mut parent_states = Vec::new();
    for _ in 0..samples {
        let mut w = 1.0;
        for (pos, n) in nodes.iter().enumerate() {
            if !keep[pos] {
                continue;
            }
            parent_states.clear();
            parent_states.extend(n.parents.iter().map(|&p| state[p]));
            let dist = n.cpd.distribution(&parent_states, n.states.cardinality());
            state[pos] = match fixed[pos] {
                Some(s) => {
                    w *= dist[s];
                    s
                }
                None => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = dist.len() - 1;
                    for (s, p) in dist.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            pick = s;
                            break;
                        }
                    }
                    pick
                }
            };
            if w == 0.0 {
                break;
            }
        }
        if w > 0.0 {
            hist[state[q]] += w;
        }
    }
    let z: f64 = hist.iter().sum();
    if !(z > 0.0) {
        return Err(Error::InconsistentEvidence);
    }
    Ok(hist.into_iter().map(|h| h / z).collect())
}
