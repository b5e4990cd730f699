use motsim::latency::*;
use motsim::topology::*;
use proptest::prelude::*;

const CASES: [&[&str]; 3] = [&["S10"], &["S3", "S5"], &["S3", "S4", "S5", "S6"]];

/// Relaxes every present link `n − 1` times.
fn bellman_ford(t: &MeshTopology, s: &LinkSample, src: usize, dst: usize) -> f64 {
    if !t.contains(src) || !t.contains(dst) {
        return f64::INFINITY;
    }
    let mut d = vec![f64::INFINITY; t.capacity];
    d[src] = 0.0;
    for _ in 1..t.capacity {
        for l in &t.links {
            if let Some(st) = s.get(l.from, l.to) {
                if st.present && d[l.from] + st.latency_ms < d[l.to] {
                    d[l.to] = d[l.from] + st.latency_ms;
                }
            }
        }
    }
    d[dst]
}

fn mesh(n: u8) -> MeshTopology {
    build_grid_mesh(3, 4, &Scenario::preset(n).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dijkstra_equals_bellman_ford(n in 1u8..=3, seed in any::<u64>(), trial in 0usize..1000, mask in 0u32..(1 << 11)) {
        let t = mesh(n);
        let removed: Vec<String> = (1..=11).filter(|i| mask & (1 << (i - 1)) != 0 && mask.count_ones() <= 4)
            .map(|i| format!("S{i}")).collect();
        let cut = t.detangle_labels(&removed).unwrap();
        let s = sample_trial(&t, seed, trial);
        let c = t.id("C").unwrap();
        for node in t.servers() {
            let got = shortest_path_latency(&cut, &s, &node.id, &c);
            let want = bellman_ford(&cut, &s, node.id.index, c.index);
            prop_assert!(got == want || (got - want).abs() <= 1e-12 * want, "{} {got} {want}", node.id);
        }
    }

    #[test]
    fn removal_never_shortens(n in 1u8..=3, seed in any::<u64>(), trial in 0usize..1000, case in 0usize..3) {
        let t = mesh(n);
        let cut = t.detangle_labels(CASES[case]).unwrap();
        let s = sample_trial(&t, seed, trial);
        let c = t.id("C").unwrap();
        for node in t.servers() {
            prop_assert!(shortest_path_latency(&cut, &s, &node.id, &c) >= shortest_path_latency(&t, &s, &node.id, &c));
        }
    }
}

#[test]
fn cut_set_isolates_far_servers() {
    for n in 1..=3 {
        let t = mesh(n);
        let cut = t.detangle_labels(CASES[2]).unwrap();
        let samples = sample_link_uncertainty(&t, 200, 3).unwrap();
        let c = t.id("C").unwrap();
        let servers: Vec<NodeId> = t.servers().map(|s| s.id.clone()).collect();
        let table = latency_table(&cut, &samples, &servers, &c).unwrap();
        for row in &table {
            let far = row.src.label == "S1" || row.src.label == "S2";
            assert_eq!(row.mean.is_infinite(), far || CASES[2].contains(&row.src.label.as_str()), "{}", row.src);
        }
    }
}

#[test]
fn paired_means_never_decrease() {
    for n in 1..=3 {
        let t = mesh(n);
        let samples = sample_link_uncertainty(&t, 1000, 21).unwrap();
        let c = t.id("C").unwrap();
        let servers: Vec<NodeId> = t.servers().map(|s| s.id.clone()).collect();
        let base = latency_table(&t, &samples, &servers, &c).unwrap();
        for case in CASES {
            let cut = t.detangle_labels(case).unwrap();
            let rows = latency_table(&cut, &samples, &servers, &c).unwrap();
            for (b, r) in base.iter().zip(&rows) {
                assert!(r.mean >= b.mean, "scenario {n} {case:?} {}: {} < {}", b.src, r.mean, b.mean);
            }
        }
    }
}

#[test]
fn scenario_means_ordered() {
    let means: Vec<f64> = (1..=3)
        .map(|n| {
            let t = mesh(n);
            let s = sample_link_uncertainty(&t, 1000, 7).unwrap();
            average_latency(&t, &s, &t.id("S1").unwrap(), &t.id("C").unwrap()).unwrap().mean
        })
        .collect();
    assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
    assert!((means[0] - 6.25).abs() <= 0.625, "{means:?}");
}

#[test]
fn s10_sits_between_s7_and_client() {
    let t = mesh(3);
    let samples = sample_link_uncertainty(&t, 500, 5).unwrap();
    let (s7, c) = (t.id("S7").unwrap(), t.id("C").unwrap());
    let base = average_latency(&t, &samples, &s7, &c).unwrap();
    let a = average_latency(&t.detangle_labels(&["S10"]).unwrap(), &samples, &s7, &c).unwrap();
    let b = average_latency(&t.detangle_labels(&["S3", "S5"]).unwrap(), &samples, &s7, &c).unwrap();
    assert!(a.mean > base.mean + 1.0);
    assert_eq!(b.mean, base.mean);
}
