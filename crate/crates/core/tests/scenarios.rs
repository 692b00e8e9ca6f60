use kll_core::scenario::{
    classify, dim_lx_degenerate_case, generic_surface_envelope, pi1_extension_ranks, rational_envelope_dim,
    ConstructionScenario, Pi1Case, RationalEnvelopeInput,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[test]
fn generic_kernel_rank_equals_generic_envelope() {
    let env = rational_envelope_dim(&generic_surface_envelope()).unwrap() as u64;
    assert_eq!(pi1_extension_ranks(Pi1Case::Generic, 0).unwrap().0, env);
}

#[test]
fn wedge_square_count_matches_pair_enumeration() {
    for h0 in 0..=10u64 {
        let pairs = (0..h0).flat_map(|i| (i + 1..h0).map(move |j| (i, j))).count() as u64;
        assert_eq!(dim_lx_degenerate_case(h0) - 1, pairs);
    }
}

fn scenario() -> impl Strategy<Value = ConstructionScenario> {
    (any::<[bool; 5]>(), 0u64..6, prop::option::of(1u64..6), 0u64..5).prop_map(|(b, h0, g, i)| ConstructionScenario {
        g1_is_iso: b[0],
        g2_is_iso: b[1],
        composition_lifts_to_cxc: b[2],
        h0_y12: h0,
        wedge_nondegenerate: b[3],
        intersection_graph_connected: b[4],
        genus_c: g,
        picard_defect: i,
    })
}

proptest! {
    #[test]
    fn envelope_rank_is_invariant_under_row_operations(
        rows in prop::collection::vec(prop::collection::vec(-5i64..=5, 4), 1..5),
        a in 1i64..=5,
        b in -5i64..=5,
    ) {
        let rows: Vec<Vec<BigRational>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        let before = rational_envelope_dim(&RationalEnvelopeInput::new(4, rows.clone()).unwrap()).unwrap();
        let mut changed = rows.clone();
        changed[0] = changed[0].iter().map(|x| x * BigRational::new(a.into(), 7.into())).collect();
        if changed.len() > 1 {
            let r1 = changed[1].clone();
            changed[0] = changed[0].iter().zip(&r1).map(|(x, y)| x + y * q(b)).collect();
            changed.swap(0, 1);
        }
        let after = rational_envelope_dim(&RationalEnvelopeInput::new(4, changed).unwrap()).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn classify_is_pure_and_round_trips(s in scenario()) {
        let a = classify(&s);
        prop_assert_eq!(&a, &classify(&s.clone()));
        if let Ok(v) = a {
            prop_assert_eq!(v.rules_fired.len(), 1);
            let json = serde_json::to_string(&v).unwrap();
            prop_assert_eq!(serde_json::from_str::<kll_core::scenario::Verdict>(&json).unwrap(), v);
        }
    }
}
