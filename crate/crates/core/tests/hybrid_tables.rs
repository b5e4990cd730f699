use motsim::hybrid::*;
use proptest::prelude::*;

/// Reference hybrid PDRs (%) for β = 1, 2, 3 behind one mesh unit.
const PDR_HYBRID: [(&str, [f64; 3]); 3] = [
    ("Scenario 1", [91.3, 85.7, 80.4]),
    ("Scenario 2", [91.0, 85.2, 80.0]),
    ("Scenario 3", [87.4, 82.0, 76.9]),
];

/// Reference L_hybrid (ms) in preset row order.
const L_HYBRID: [f64; 16] = [
    10.15, 12.17, 13.74, 10.15, 14.07, 19.97, 25.38, 14.07, 15.28, 17.27, 18.84, 15.28, 19.32, 25.07, 30.76, 19.32,
];

#[test]
fn hybrid_pdr_cells() {
    let rows = pdr_table(&pdr_presets());
    let mut checked = 0;
    for (scenario, cells) in PDR_HYBRID {
        for (b, want) in cells.iter().enumerate() {
            let r = rows.iter().find(|r| r.scenario == scenario && r.beta == Some(b as u32 + 1)).unwrap();
            let got = r.pdr_hybrid.unwrap() * 100.0;
            assert!((got - want).abs() <= 0.2, "{scenario} β={} {got} vs {want}", b + 1);
            checked += 1;
        }
    }
    assert_eq!(checked, 9);
    assert_eq!(rows.iter().filter(|r| r.pdr_hybrid.is_none()).count(), 3);
}

#[test]
fn scaled_mesh_pdr() {
    let rows = pdr_table(&pdr_presets());
    let get = |s: &str, a: u32| rows.iter().find(|r| r.scenario == s && r.alpha == a).unwrap().pdr_ble * 100.0;
    for (s, a, want) in [("Scenario 1", 2, 94.8), ("Scenario 1", 3, 92.3), ("Scenario 1", 10, 76.7), ("Scenario 3", 3, 80.9)] {
        assert!((get(s, a) - want).abs() <= 0.1, "{s} α={a}");
    }
    assert_eq!(rows.iter().find(|r| r.alpha == 10).unwrap().mesh_length_m, 24.0);
}

#[test]
fn hybrid_latency_cells() {
    let rows = latency_presets();
    assert_eq!(rows.len(), L_HYBRID.len());
    for (r, want) in rows.iter().zip(L_HYBRID) {
        let got = r.l_hybrid(0.0);
        assert!((got - want).abs() <= 0.3, "{r:?}: {got} vs {want}");
    }
    let ratio = scalability_ratio(&rows, 0.0).unwrap();
    assert!(84.0 / 10.15 >= 8.0);
    assert!(ratio >= 8.0, "{ratio}");
}

#[test]
fn per_hop_presets_differ_from_measured_two_hop() {
    let two_hop = hybrid_latency(8.4, 0.0, RESISTIVE_HOP_MS, 0.0, 1, 2);
    assert!((two_hop - 11.96).abs() < 1e-9);
    let row = latency_presets().into_iter().find(|r| r.plc_loads == "Resistive" && r.beta == 2).unwrap();
    assert!((row.l_hybrid(0.0) - 12.17).abs() < 1e-9);
}

#[test]
fn csv_shapes() {
    let mut buf = Vec::new();
    write_pdr_table(&pdr_table(&pdr_presets()), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.contains("Scenario 1,10,24.0,"));
    let mut buf = Vec::new();
    write_latency_table(&latency_presets(), 0.0, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 17);
}

proptest! {
    #[test]
    fn pdr_non_increasing(p in 0.0f64..1.0, q in 0.0f64..1.0, a in 0u32..12, b in 0u32..12) {
        let h = hybrid_pdr(p, q, a, b);
        prop_assert!(hybrid_pdr(p, q, a + 1, b) <= h);
        prop_assert!(hybrid_pdr(p, q, a, b + 1) <= h);
        prop_assert_eq!(hybrid_pdr(p, q, 1, 0), p);
    }

    #[test]
    fn latency_affine(l in 0.0f64..100.0, gw in 0.0f64..5.0, tau in 0.0f64..20.0, relay in 0.0f64..5.0,
                      a in 0u32..12, b in 0u32..12) {
        let f = |a, b| hybrid_latency(l, gw, tau, relay, a, b);
        prop_assert!((f(a + 1, b) - f(a, b) - l).abs() < 1e-9);
        prop_assert!((f(a, b + 1) - f(a, b) - (tau + relay)).abs() < 1e-9);
        prop_assert!((f(0, 0) - gw).abs() < 1e-12);
    }

    #[test]
    fn whole_units_accepted(alpha in 1u32..50, nodes in 2u32..20, jitter in -0.009f64..0.009) {
        let area = alpha as f64 * GRID_SIZE_M2 * (1.0 + jitter);
        prop_assert_eq!(scale_units(area, GRID_SIZE_M2, nodes).unwrap(), (alpha, nodes - 1));
    }
}
