use proptest::prelude::*;
use qaco::error_model::{estimate_circuit_error, qaco_circuit_layers, GateCount, LayerSpec};

fn gate(rate: f64, count: u64) -> GateCount {
    GateCount { kind: "g".into(), count, error_rate: rate }
}

fn s_of(layers: &[LayerSpec]) -> f64 {
    estimate_circuit_error(layers).unwrap().s
}

#[test]
fn two_layer_hand_computation() {
    // 1 − 0.975⁴ · 0.998⁵, evaluated in exact rational arithmetic.
    let layers = vec![
        LayerSpec { gates: vec![gate(0.01, 1), gate(0.03, 3)], m: Some(4) },
        LayerSpec { gates: vec![gate(0.002, 5)], m: None },
    ];
    let r = estimate_circuit_error(&layers).unwrap();
    assert!((r.s - 0.10531291298839014).abs() < 1e-12);
    assert_eq!(r.depth, 2);
    assert!((r.layer_average_rates[0] - 0.025).abs() < 1e-15);
}

#[test]
fn register_qubit_counts() {
    assert_eq!(qaco_circuit_layers(4, true, 0.0003, 0.0).unwrap()[0].gate_total(), 9);
    assert_eq!(qaco_circuit_layers(10, true, 0.0003, 0.0).unwrap()[0].gate_total(), 21);
}

fn layer_strategy() -> impl Strategy<Value = LayerSpec> {
    (prop::collection::vec((0.0..0.2f64, 1u64..50), 1..4), prop::option::of(1u64..100))
        .prop_map(|(gates, m)| LayerSpec { gates: gates.into_iter().map(|(e, n)| gate(e, n)).collect(), m })
}

fn circuit() -> impl Strategy<Value = Vec<LayerSpec>> {
    prop::collection::vec(layer_strategy(), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn s_is_a_probability(layers in circuit()) {
        let r = estimate_circuit_error(&layers).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.s));
        for (avg, layer) in r.layer_average_rates.iter().zip(&layers) {
            let lo = layer.gates.iter().map(|g| g.error_rate).fold(f64::INFINITY, f64::min);
            let hi = layer.gates.iter().map(|g| g.error_rate).fold(0.0, f64::max);
            prop_assert!(*avg >= lo - 1e-15 && *avg <= hi + 1e-15);
        }
    }

    #[test]
    fn raising_a_rate_never_lowers_s(layers in circuit(), j in any::<prop::sample::Index>(), g in any::<prop::sample::Index>(), bump in 0.0..0.5f64) {
        let mut more = layers.clone();
        let layer = &mut more[j.index(layers.len())];
        let i = g.index(layer.gates.len());
        layer.gates[i].error_rate = (layer.gates[i].error_rate + bump).min(1.0);
        prop_assert!(s_of(&more) >= s_of(&layers) - 1e-15);
    }

    #[test]
    fn more_gates_in_a_layer_never_lower_s(layers in circuit(), j in any::<prop::sample::Index>(), extra in 1u64..50) {
        let mut more = layers.clone();
        let layer = &mut more[j.index(layers.len())];
        layer.m = Some(layer.m() + extra);
        prop_assert!(s_of(&more) >= s_of(&layers) - 1e-15);
    }

    #[test]
    fn deeper_circuits_never_lower_s(layers in circuit(), extra in layer_strategy()) {
        let mut more = layers.clone();
        more.push(extra);
        prop_assert!(s_of(&more) >= s_of(&layers) - 1e-15);
        prop_assert_eq!(estimate_circuit_error(&more).unwrap().depth, layers.len() + 1);
    }

    #[test]
    fn more_of_an_above_average_gate_never_lowers_s(layers in circuit(), j in any::<prop::sample::Index>(), extra in 1u64..50) {
        // With m_j held fixed, extra copies of a gate kind raise avg_j only
        // when that kind's rate is at least the current layer average.
        let j = j.index(layers.len());
        let mut fixed = layers.clone();
        fixed[j].m = Some(layers[j].m());
        let avg = estimate_circuit_error(&fixed).unwrap().layer_average_rates[j];
        let i = (0..fixed[j].gates.len()).max_by(|&a, &b| fixed[j].gates[a].error_rate.total_cmp(&fixed[j].gates[b].error_rate)).unwrap();
        prop_assume!(fixed[j].gates[i].error_rate >= avg);
        let mut more = fixed.clone();
        more[j].gates[i].count += extra;
        prop_assert!(s_of(&more) >= s_of(&fixed) - 1e-15);
    }

    #[test]
    fn zero_rates_give_zero(counts in prop::collection::vec(1u64..20, 1..6)) {
        let layers: Vec<LayerSpec> = counts.iter().map(|&n| LayerSpec { gates: vec![gate(0.0, n)], m: None }).collect();
        prop_assert_eq!(s_of(&layers), 0.0);
    }
}
