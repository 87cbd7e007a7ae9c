mod common;

use algent_core::builders::{example_non_fc, example_non_fc_truncation, iwasawa_finite, iwasawa_instances};
use algent_core::structure::{
    classify, classify_structural, dedekind_baer_decompose, fc_by_commutator, iwasawa_derived, DedekindBaer,
    SUBGROUP_ENUMERATION_CAP,
};
use algent_core::subgroup::{closure, commutator_subgroup, product_set};
use algent_core::Elem;
use common::{group, Table};
use serde_json::{json, Value};

/// Finite fixtures paired with an isomorphic table built independently.
fn finite_fixtures() -> Vec<(&'static str, Value, Table)> {
    let q8 = Table::quaternion();
    let z = Table::cyclic;
    vec![
        ("Q8", json!("q8"), q8.clone()),
        ("Q8 x Z2", json!({"product": ["q8", {"cyclic": 2}]}), q8.product(&z(2))),
        ("Q8 x Z2 x Z3", json!({"product": ["q8", {"cyclic": 2}, {"cyclic": 3}]}), q8.product(&z(2)).product(&z(3))),
        ("Q8 x Z3", json!({"product": ["q8", {"cyclic": 3}]}), q8.product(&z(3))),
        ("Q8 x Z2 x Z2", json!({"product": ["q8", {"cyclic": 2}, {"cyclic": 2}]}), q8.product(&z(2)).product(&z(2))),
        ("Q8 x Z4", json!({"product": ["q8", {"cyclic": 4}]}), q8.product(&z(4))),
        ("Q8 x Q8", json!({"product": ["q8", "q8"]}), q8.product(&q8)),
        (
            "S3",
            json!({"semidirect": {"base": {"cyclic": 3}, "order": 2, "action": {"table": [[1, 2]]}}}),
            Table::sym3(),
        ),
        (
            "D4",
            json!({"semidirect": {"base": {"cyclic": 4}, "order": 2, "action": {"power": 3}}}),
            Table::semidirect(4, 2, 3),
        ),
        ("Z2^3", json!({"product": [{"cyclic": 2}, {"cyclic": 2}, {"cyclic": 2}]}), z(2).product(&z(2)).product(&z(2))),
        ("Z12", json!({"cyclic": 12}), z(12)),
        (
            "Z9 x| Z3",
            json!({"iwasawa": {"p": 3, "n": 2, "m": 1, "s": 1, "base": {"cyclic": 9}}}),
            Table::semidirect(9, 3, 4),
        ),
        (
            "Z8 x| Z2 (a^5)",
            json!({"iwasawa": {"p": 2, "n": 3, "m": 1, "s": 2, "base": {"cyclic": 8}}}),
            Table::semidirect(8, 2, 5),
        ),
        (
            "Z7 x| Z3",
            json!({"semidirect": {"base": {"cyclic": 7}, "order": 3, "action": {"power": 2}}}),
            Table::semidirect(7, 3, 2),
        ),
    ]
}

#[test]
fn classification_matches_table_oracle() {
    for (name, desc, t) in finite_fixtures() {
        let g = group(desc);
        let r = classify(&g, 4096).unwrap();
        assert_eq!(r.order, Some(t.order() as u64), "{name}");
        assert_eq!(r.abelian, t.is_abelian(), "{name}");
        assert_eq!(r.quasihamiltonian.value, t.is_quasihamiltonian(), "{name}");
        if t.order() <= SUBGROUP_ENUMERATION_CAP {
            assert_eq!(r.hamiltonian, Some(t.is_hamiltonian()), "{name}");
        }
        let all = closure(&g, &g.block_generators(1), 4096).unwrap();
        assert_eq!(commutator_subgroup(&all, 4096).unwrap().order(), t.derived_subgroup().len(), "{name}");
    }
}

#[test]
fn dedekind_baer_agrees_with_exhaustive_normality() {
    for (name, desc, t) in finite_fixtures() {
        if t.order() > SUBGROUP_ENUMERATION_CAP {
            continue;
        }
        let g = group(desc);
        let r = dedekind_baer_decompose(&g, 4096).unwrap();
        assert_eq!(r.agrees, Some(true), "{name}");
        assert_eq!(r.exhaustive_hamiltonian, Some(t.is_hamiltonian()), "{name}");
        match r.decomposition {
            DedekindBaer::Hamiltonian { b_order, d_order, .. } => {
                assert!(t.is_hamiltonian(), "{name}");
                let two_part = 1usize << t.order().trailing_zeros();
                assert_eq!(8 * b_order as usize, two_part, "{name}");
                assert_eq!(d_order as usize, t.order() / two_part, "{name}");
            }
            _ => assert!(!t.is_hamiltonian(), "{name}"),
        }
    }
}

#[test]
fn named_positives_and_negatives() {
    let verdict = |v: Value| dedekind_baer_decompose(&group(v), 4096).unwrap();
    assert!(matches!(verdict(json!("q8")).decomposition, DedekindBaer::Hamiltonian { .. }));
    assert!(matches!(
        verdict(json!({"product": ["q8", {"cyclic": 2}, {"cyclic": 3}]})).decomposition,
        DedekindBaer::Hamiltonian { b_order: 2, d_order: 3, .. }
    ));
    assert!(matches!(
        verdict(json!({"product": ["q8", {"cyclic": 4}]})).decomposition,
        DedekindBaer::NotHamiltonian { .. }
    ));
    assert!(matches!(
        verdict(json!({"semidirect": {"base": {"cyclic": 3}, "order": 2, "action": {"table": [[1, 2]]}}}))
            .decomposition,
        DedekindBaer::NotHamiltonian { .. }
    ));
}

#[test]
fn iwasawa_derived_subgroup_is_a_power_of_the_base() {
    let mut checked = 0;
    for p in [2u64, 3, 5, 7] {
        for (params, r) in iwasawa_instances(p, 243) {
            let rep = iwasawa_derived(params, r).unwrap();
            assert!(rep.equal, "{rep:?}");
            assert!(rep.group_order <= 243);

            // independent of the report: close all commutators by hand and
            // compare with the p^s-th powers of base elements
            let g = iwasawa_finite(params, r).unwrap();
            let all = g.elements(1024).unwrap();
            let comms: Vec<Elem> =
                all.iter().flat_map(|x| all.iter().map(move |y| (x, y))).map(|(x, y)| g.commutator(x, y)).collect();
            let derived = closure(&g, &comms, 1024).unwrap();
            let ps = params.p.pow(params.s);
            let mut powers: Vec<Elem> = all
                .iter()
                .filter(|x| matches!(x, Elem::Tuple(parts) if parts[1] == Elem::Res(0)))
                .map(|a| g.pow(a, ps))
                .collect();
            powers.sort();
            powers.dedup();
            assert_eq!(derived.elements(), &powers[..], "{params:?} r={r}");
            checked += 1;
        }
    }
    assert!(checked >= 10, "only {checked} instances");
}

#[test]
fn non_fc_example_truncations_are_quasihamiltonian() {
    for (p, n) in [(3u64, 2u32), (2, 3)] {
        for k in 1..=2 {
            let t = example_non_fc_truncation(p, n, k).unwrap();
            let r = classify(&t, 4096).unwrap();
            assert!(r.quasihamiltonian.value, "p={p} n={n} k={k}");
            assert!(!r.abelian);
        }
        let g = example_non_fc(p, n).unwrap();
        assert!(!fc_by_commutator(&g).unwrap());
        let r = classify_structural(&g, 1, 64, 0).unwrap();
        assert!(r.quasihamiltonian.value);
        assert_eq!(r.fc, Some(false));
    }
}

#[test]
fn cyclic_subgroups_permute_exactly_when_the_oracle_says_so() {
    // S3 has a pair of cyclic subgroups whose product is not a subgroup
    let (_, desc, t) = finite_fixtures().into_iter().find(|f| f.0 == "S3").unwrap();
    assert!(!t.is_quasihamiltonian());
    let g = group(desc);
    let elems = g.elements(16).unwrap();
    let mut found = false;
    for x in &elems {
        for y in &elems {
            let a = closure(&g, std::slice::from_ref(x), 16).unwrap();
            let b = closure(&g, std::slice::from_ref(y), 16).unwrap();
            let ab = product_set(&g, a.elements(), b.elements(), true, 64).unwrap();
            let ba = product_set(&g, b.elements(), a.elements(), true, 64).unwrap();
            found |= ab != ba;
        }
    }
    assert!(found);
}
