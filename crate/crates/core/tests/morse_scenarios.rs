use sphere_degree::morse::{bundled_scenario, bundled_scenarios, morse_check, Flow, MorseOptions};

// (name, Ind V, Ind ∂₋V, doubled sum)
const EXPECTED: [(&str, i64, i64, i64); 8] = [
    ("disk_source", 1, 0, 2),
    ("disk_saddle", -1, 2, 2),
    ("disk_constant", 0, 1, 2),
    ("disk_power2", 2, -1, 2),
    ("annulus_constant", 0, 0, 0),
    ("ball_source", 1, 0, 0),
    ("ball_constant", 0, 1, 0),
    ("ball_saddle", -1, 2, 0),
];

#[test]
fn bundled_scenarios_satisfy_both_identities() {
    for (name, ind_v, ind_dminus, doubled) in EXPECTED {
        let s = bundled_scenario(name).unwrap();
        let r = morse_check(&s, &MorseOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!((r.ind_v, r.ind_dminus_v), (ind_v, ind_dminus), "{name}");
        assert!(r.formula_holds, "{name}");
        let d = r.doubling_check.unwrap();
        assert_eq!((d.doubled_sum, d.target), (doubled, doubled), "{name}");
        assert!(d.holds, "{name}");
        for c in &d.spot_checks {
            assert_eq!(c.measured, c.predicted, "{name}");
        }
    }
}

#[test]
fn every_bundled_scenario_is_listed() {
    assert_eq!(bundled_scenarios().len(), EXPECTED.len());
}

#[test]
fn ball_saddle_boundary_structure() {
    let s = bundled_scenario("ball_saddle").unwrap();
    let r = morse_check(&s, &MorseOptions::default()).unwrap();
    // Near ±e1 the tangential part is (a, −4b) in (x2, x3): index −1, outward.
    // Near ±e2 it is (−c, −5b) in (x1, x3): index +1, outward.
    // Near ±e3 it is (4c, 5d) in (x1, x2): index +1, inward.
    assert_eq!(r.boundary_zeros.len(), 6);
    for z in &r.boundary_zeros {
        let axis = (0..3).max_by(|&a, &b| z.unit[a].abs().total_cmp(&z.unit[b].abs())).unwrap();
        assert!((z.unit[axis].abs() - 1.0).abs() < 1e-8);
        let flow = if axis == 2 { Flow::Inward } else { Flow::Outward };
        assert_eq!(z.flow, flow);
        assert_eq!(z.index, if axis == 0 { -1 } else { 1 });
    }
    let d = r.doubling_check.unwrap();
    assert_eq!(d.spot_checks.len(), 2);
}

#[test]
fn reports_are_deterministic() {
    let s = bundled_scenario("disk_power2").unwrap();
    let a = serde_json::to_string(&morse_check(&s, &MorseOptions::default()).unwrap()).unwrap();
    let b = serde_json::to_string(&morse_check(&s, &MorseOptions::default()).unwrap()).unwrap();
    assert_eq!(a, b);
}

mod random_linear {
    use proptest::prelude::*;
    use sphere_degree::fields::PolyField;
    use sphere_degree::morse::{morse_check, BoundarySphere, MorseOptions, MorseScenario, Side};

    fn ball(a: &[Vec<f64>]) -> MorseScenario {
        let dim = a.len();
        MorseScenario {
            name: None,
            dim,
            boundaries: vec![BoundarySphere { center: vec![0.0; dim], radius: 1.0, side: Side::Encloses }],
            field: PolyField::linear(a).unwrap(),
            zeros: vec![vec![0.0; dim]],
            chi_m: 1,
            chi_boundary: if dim == 3 { 2 } else { 0 },
        }
    }

    fn well_conditioned(d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), d).prop_filter("conditioning", |m| {
            let d = m.len();
            let sv = nalgebra::DMatrix::from_fn(d, d, |i, j| m[i][j]).singular_values();
            sv.min() > 0.3 && sv.max() / sv.min() < 2.0
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn linear_fields_satisfy_both_identities(a in (2usize..=3).prop_flat_map(well_conditioned)) {
            let r = morse_check(&ball(&a), &MorseOptions::default()).unwrap();
            let det = nalgebra::DMatrix::from_fn(a.len(), a.len(), |i, j| a[i][j]).determinant();
            prop_assert_eq!(r.ind_v, det.signum() as i64);
            prop_assert!(r.formula_holds, "{:?}", r);
            prop_assert!(r.doubling_check.unwrap().holds);
        }
    }
}
