use motsim::bayes::{infer, noisy_int_add, noisy_or, BayesNet, BayesNode, Cpd, StateSpace};
use motsim::topology::NodeId;
use motsim::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// P(child = c | parents) by enumerating every pass/block pattern of the
/// parent inhibitors.
fn oracle_cpd(states: &[usize], q: &[f64], additive: bool, c: usize) -> f64 {
    let k = states.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << k) {
        let mut p = 1.0;
        let mut value = 0;
        for j in 0..k {
            if mask & (1 << j) != 0 {
                p *= 1.0 - q[j];
                value = if additive { value + states[j] } else { value.max(states[j].min(1)) };
            } else {
                p *= q[j];
            }
        }
        if value == c {
            total += p;
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn noisy_or_matches_enumeration(
        parents in prop::collection::vec((any::<bool>(), 0.0f64..=1.0), 0..=5)
    ) {
        let active: Vec<bool> = parents.iter().map(|p| p.0).collect();
        let q: Vec<f64> = parents.iter().map(|p| p.1).collect();
        let states: Vec<usize> = active.iter().map(|&a| a as usize).collect();
        let got = noisy_or(&active, &q);
        prop_assert!((got - oracle_cpd(&states, &q, false, 1)).abs() <= 1e-12);
    }

    #[test]
    fn noisy_int_add_matches_enumeration(
        parents in prop::collection::vec((0usize..=4, 0.0f64..=1.0), 0..=5)
    ) {
        let states: Vec<usize> = parents.iter().map(|p| p.0).collect();
        let q: Vec<f64> = parents.iter().map(|p| p.1).collect();
        let got = noisy_int_add(&states, &q);
        prop_assert_eq!(got.len(), states.iter().sum::<usize>() + 1);
        for (c, p) in got.iter().enumerate() {
            prop_assert!((p - oracle_cpd(&states, &q, true, c)).abs() <= 1e-12);
        }
        prop_assert!((got.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn noisy_or_monotone_in_inhibition(
        q in prop::collection::vec(0.0f64..=1.0, 1..=5),
        j in 0usize..5,
        bump in 0.0f64..=1.0,
    ) {
        let j = j % q.len();
        let active = vec![true; q.len()];
        let mut q2 = q.clone();
        q2[j] = (q[j] + bump).min(1.0);
        prop_assert!(noisy_or(&active, &q2) <= noisy_or(&active, &q) + 1e-15);
    }
}

fn random_net(rng: &mut ChaCha8Rng, integer: bool) -> BayesNet {
    let n = if integer { rng.random_range(2..=6) } else { rng.random_range(2..=10) };
    let mut nodes: Vec<BayesNode> = Vec::new();
    for i in 0..n {
        let id = NodeId::new(i, format!("V{i}"));
        let mut parents: Vec<usize> = Vec::new();
        if i > 0 && (nodes.len() < 2 || rng.random::<f64>() < 0.8) {
            let want = rng.random_range(1..=3.min(i));
            for _ in 0..want {
                let p = rng.random_range(0..i);
                let budget: usize =
                    parents.iter().map(|&x| nodes[x].states.max_state()).sum::<usize>()
                        + nodes[p].states.max_state();
                if !parents.contains(&p) && (!integer || budget <= 5) {
                    parents.push(p);
                }
            }
        }
        let node = if parents.is_empty() {
            let states = if integer { StateSpace::Integer { max: 1 } } else { StateSpace::Binary };
            BayesNode { id, states, parents, cpd: Cpd::RootPrior { p_active: rng.random() } }
        } else {
            let inhibitions: Vec<f64> = parents.iter().map(|_| rng.random()).collect();
            if integer {
                let max = parents.iter().map(|&p| nodes[p].states.max_state()).sum();
                BayesNode { id, states: StateSpace::Integer { max }, parents, cpd: Cpd::NoisyIntAdd { inhibitions } }
            } else {
                BayesNode { id, states: StateSpace::Binary, parents, cpd: Cpd::NoisyOr { inhibitions } }
            }
        };
        nodes.push(node);
    }
    BayesNet::new(nodes).unwrap()
}

/// Joint enumeration with CPDs computed by inhibitor enumeration.
fn oracle_posterior(net: &BayesNet, evidence: &[(usize, usize)], q: usize) -> Option<Vec<f64>> {
    let nodes = net.nodes();
    let cards: Vec<usize> = nodes.iter().map(|n| n.states.cardinality()).collect();
    let total: usize = cards.iter().product();
    let mut post = vec![0.0; cards[q]];
    let mut asg = vec![0usize; nodes.len()];
    for code in 0..total {
        let mut c = code;
        for (i, card) in cards.iter().enumerate() {
            asg[i] = c % card;
            c /= card;
        }
        if evidence.iter().any(|&(v, s)| asg[v] != s) {
            continue;
        }
        let mut p = 1.0;
        for (i, n) in nodes.iter().enumerate() {
            p *= match &n.cpd {
                Cpd::RootPrior { p_active } => {
                    if asg[i] == 1 { *p_active } else if asg[i] == 0 { 1.0 - p_active } else { 0.0 }
                }
                Cpd::NoisyOr { inhibitions } | Cpd::NoisyIntAdd { inhibitions } => {
                    let states: Vec<usize> = n.parents.iter().map(|&x| asg[x]).collect();
                    let additive = matches!(n.cpd, Cpd::NoisyIntAdd { .. });
                    oracle_cpd(&states, inhibitions, additive, asg[i])
                }
            };
        }
        post[asg[q]] += p;
    }
    let z: f64 = post.iter().sum();
    (z > 0.0).then(|| post.into_iter().map(|x| x / z).collect())
}

fn check_random_nets(integer: bool, count: u64) {
    let mut worst: f64 = 0.0;
    for seed in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + if integer { 10_000 } else { 0 });
        let net = random_net(&mut rng, integer);
        let n = net.len();
        let q = rng.random_range(0..n);
        let mut evidence: Vec<(usize, usize)> = Vec::new();
        for v in 0..n {
            if v != q && rng.random::<f64>() < 0.3 {
                let card = net.nodes()[v].states.cardinality();
                evidence.push((v, rng.random_range(0..card)));
            }
        }
        let ev_ids: Vec<(NodeId, usize)> =
            evidence.iter().map(|&(v, s)| (net.nodes()[v].id.clone(), s)).collect();
        let got = infer(&net, &ev_ids, &net.nodes()[q].id);
        match (oracle_posterior(&net, &evidence, q), got) {
            (Some(want), Ok(b)) => {
                for (a, w) in b.distribution.iter().zip(&want) {
                    worst = worst.max((a - w).abs());
                }
            }
            (None, Err(Error::InconsistentEvidence)) => {}
            (want, got) => panic!("seed {seed}: oracle {want:?} vs {got:?}"),
        }
    }
    assert!(worst <= 1e-9, "max abs error {worst}");
}

#[test]
fn exact_inference_matches_enumeration_binary() {
    check_random_nets(false, 100);
}

#[test]
fn exact_inference_matches_enumeration_integer() {
    check_random_nets(true, 100);
}

#[test]
fn binary_projection_preserves_zero_probability() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(20_000 + seed);
        let net = random_net(&mut rng, true);
        let root = net.nodes()[0].id.clone();
        let last = net.len() - 1;
        let Some(want) = oracle_posterior(&net, &[(0, 1)], last) else { continue };
        let got = motsim::bayes::delivery_belief(&net, &root, &net.nodes()[last].id).unwrap();
        assert!((got - (1.0 - want[0])).abs() <= 1e-12, "seed {seed}: {got} vs {}", 1.0 - want[0]);
    }
}
