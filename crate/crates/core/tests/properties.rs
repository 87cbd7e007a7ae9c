mod common;

use algent_core::documents::EndoDescriptor;
use algent_core::entropy::{
    entropy_along, entropy_along_traced, inverse_entropy_check, limit_free_entropy, modulus, trajectory, EntropyConfig, EstimateStatus,
};
use algent_core::numtheory::factorize;
use algent_core::structure::p_decompose_element;
use algent_core::subgroup::{closure, product_set};
use algent_core::{Endomorphism, FiniteSubgroup, Group, ProductSet};
use common::group;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

struct Case {
    group: Value,
    endo: Value,
    /// The prime when the ambient group is a p-group.
    prime: Option<u64>,
    automorphism: bool,
}

fn case(group: Value, endo: Value, prime: Option<u64>, automorphism: bool) -> Case {
    Case { group, endo, prime, automorphism }
}

fn sum(m: u64, index: &str) -> Value {
    json!({"sum": {"component": {"cyclic": m}, "index": index}})
}

fn iwasawa_27() -> Value {
    json!({"iwasawa": {"p": 3, "n": 2, "m": 1, "s": 1, "base": {"cyclic": 9}}})
}

fn non_fc() -> Value {
    json!({"iwasawa": {"p": 3, "n": 2, "m": 1, "s": 1, "base": {"sum": {"component": {"cyclic": 9}, "index": "N"}}}})
}

/// Endomorphisms of torsion quasihamiltonian groups.
fn cases() -> Vec<Case> {
    vec![
        case(sum(2, "N"), json!({"shift": 1}), Some(2), false),
        case(sum(3, "N"), json!({"shift": 2}), Some(3), false),
        case(sum(4, "N"), json!({"compose": [{"shift": 1}, {"power": 3}]}), Some(2), false),
        case(sum(4, "N"), json!({"compose": [{"shift": 1}, {"power": 2}]}), Some(2), false),
        case(sum(9, "N"), json!({"power": 3}), Some(3), false),
        case(sum(6, "N"), json!({"shift": 1}), None, false),
        case(sum(2, "Z"), json!({"shift": 1}), Some(2), true),
        case(sum(3, "Z"), json!({"shift": -1}), Some(3), true),
        case(sum(5, "Z"), json!({"compose": [{"shift": 1}, {"power": 2}]}), Some(5), true),
        case(sum(2, "Z"), json!({"permute": [[0, 1], [1, 2], [2, 0]]}), Some(2), true),
        case(sum(3, "N"), json!({"permute": [[0, 3], [3, 0]]}), Some(3), true),
        case(json!("q8"), json!({"conjugation": "i"}), Some(2), true),
        case(json!({"product": ["q8", {"cyclic": 2}]}), json!({"diagonal": [{"conjugation": "j"}, "identity"]}), Some(2), true),
        case(
            json!({"product": ["q8", sum(3, "N")]}),
            json!({"diagonal": [{"conjugation": "k"}, {"shift": 1}]}),
            None,
            false,
        ),
        case(iwasawa_27(), json!({"power": 2}), Some(3), true),
        case(iwasawa_27(), json!({"conjugation": [1, 1]}), Some(3), true),
        case(iwasawa_27(), json!({"power": 3}), Some(3), false),
        case(non_fc(), json!({"shift": 1}), Some(3), false),
        case(non_fc(), json!({"conjugation": [{"0": 1}, 1]}), Some(3), true),
    ]
}

fn built(c: &Case) -> (Group, Endomorphism) {
    let g = group(c.group.clone());
    let phi = EndoDescriptor::from_json(&c.endo).unwrap().build(&g).unwrap();
    (g, phi)
}

/// A coordinate block, or the subgroup generated by a few sampled elements.
fn random_base(g: &Group, seed: u64, choice: u8) -> FiniteSubgroup {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match choice % 3 {
        0 => closure(g, &g.block_generators(1 + (seed % 2) as usize), 1 << 12).unwrap(),
        k => {
            let gens: Vec<_> = (0..k).map(|_| g.sample(&mut rng, 2)).collect();
            closure(g, &gens, 1 << 12).unwrap()
        }
    }
}

fn config() -> EntropyConfig {
    EntropyConfig { size_budget: 1 << 15, ..EntropyConfig::default() }
}

fn is_power_of(p: u64, mut x: u64) -> bool {
    while x > 1 && x % p == 0 {
        x /= p;
    }
    x == 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn subgroup_trajectories_have_weakly_decreasing_integer_ratios(i in 0usize..19, seed in any::<u64>(), choice in any::<u8>()) {
        let c = &cases()[i];
        let (g, phi) = built(c);
        let base = random_base(&g, seed, choice);
        let (_, t) = entropy_along_traced(&phi, &base, &config()).unwrap();
        prop_assert!(t.subgroup_mode(), "{} on {}", phi.label(), g);
        prop_assert!(t.weakly_decreasing(), "{:?}", t.sizes());
        for b in t.betas() {
            prop_assert!(b.is_integer());
        }
    }

    #[test]
    fn entropy_on_p_groups_is_a_power_of_p(i in 0usize..19, seed in any::<u64>(), choice in any::<u8>()) {
        let c = &cases()[i];
        if let Some(p) = c.prime {
            let (g, phi) = built(c);
            let e = entropy_along(&phi, &random_base(&g, seed, choice), &config()).unwrap();
            prop_assert!(is_power_of(p, e.beta), "beta {} for p = {}", e.beta, p);
        }
    }

    #[test]
    fn cyclic_subgroups_permute_in_quasihamiltonian_groups(i in 0usize..19, seed in any::<u64>()) {
        let (g, _) = built(&cases()[i]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = closure(&g, &[g.sample(&mut rng, 3)], 1 << 12).unwrap();
        let b = closure(&g, &[g.sample(&mut rng, 3)], 1 << 12).unwrap();
        let ab = product_set(&g, a.elements(), b.elements(), true, 1 << 14).unwrap();
        let ba = product_set(&g, b.elements(), a.elements(), true, 1 << 14).unwrap();
        prop_assert_eq!(&ab, &ba);
        prop_assert!(ProductSet::from_elements(&g, ab).is_subgroup());
    }

    #[test]
    fn discrete_automorphisms_have_unit_modulus(i in 0usize..19, seed in any::<u64>(), choice in any::<u8>()) {
        let c = &cases()[i];
        if c.automorphism {
            let (g, phi) = built(c);
            let phi = match phi.inverse() {
                Some(_) => phi,
                None => {
                    // declared automorphisms carry their inverse; everything
                    // listed here must have one
                    return Err(TestCaseError::fail(format!("{} has no inverse", phi.label())));
                }
            };
            let base = random_base(&g, seed, choice);
            prop_assert_eq!(modulus(&phi, &base, 1 << 15).unwrap(), num_rational::Ratio::from_integer(1));
            let check = inverse_entropy_check(&phi, &base, &config()).unwrap();
            prop_assert_ne!(check.holds, Some(false), "{:?}", check);
        }
    }

    #[test]
    fn limit_free_formula_agrees_with_trajectories(i in 0usize..19, seed in any::<u64>(), choice in any::<u8>()) {
        let c = &cases()[i];
        if c.automorphism {
            let (g, phi) = built(c);
            let base = random_base(&g, seed, choice);
            let a = entropy_along(&phi, &base, &config()).unwrap();
            let b = limit_free_entropy(&phi, &base, &config()).unwrap();
            if a.is_reliable() && b.is_reliable() {
                prop_assert_eq!(a.beta, b.beta, "{} on {}", phi.label(), g);
            }
        }
    }

    #[test]
    fn primary_parts_multiply_back(i in 0usize..19, seed in any::<u64>()) {
        let (g, _) = built(&cases()[i]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = g.sample(&mut rng, 4);
        let d = p_decompose_element(&g, &x).unwrap();
        let mut acc = g.identity();
        for part in &d.parts {
            let y = g.parse_element(&json!(part.part)).unwrap();
            let order = g.order_of(&y).unwrap();
            prop_assert_eq!(order, part.prime.pow(part.exponent));
            prop_assert_eq!(factorize(order).len(), 1);
            acc = g.mul(&acc, &y);
        }
        prop_assert_eq!(acc, x);
        if d.order > 1 {
            prop_assert_eq!(d.bezout_sum(), 1);
        }
    }

    #[test]
    fn endomorphisms_respect_products(i in 0usize..19, seed in any::<u64>()) {
        let (_, phi) = built(&cases()[i]);
        let r = phi.verify_homomorphism(seed);
        prop_assert!(r.holds(), "{:?}", r);
    }

    #[test]
    fn element_codes_round_trip(i in 0usize..19, seed in any::<u64>()) {
        let (g, _) = built(&cases()[i]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = g.sample(&mut rng, 5);
        let code = g.encode(&x);
        prop_assert_eq!(g.decode(&code).unwrap(), x.clone());
        prop_assert_eq!(g.parse_element(&json!(code.to_string())).unwrap(), x);
    }

    #[test]
    fn endomorphism_descriptors_round_trip(i in 0usize..19) {
        let c = &cases()[i];
        let d = EndoDescriptor::from_json(&c.endo).unwrap();
        prop_assert_eq!(EndoDescriptor::from_json(&d.to_json()).unwrap(), d);
    }
}

#[test]
fn certified_zero_means_the_trajectory_is_invariant() {
    for c in cases() {
        let (g, phi) = built(&c);
        for seed in 0..6 {
            let base = random_base(&g, seed, seed as u8);
            let e = entropy_along(&phi, &base, &config()).unwrap();
            if e.status == EstimateStatus::CertifiedZero {
                let t = trajectory(&phi, &base, e.reached_at.max(1), 1 << 15).unwrap();
                let last = t.last();
                assert!(last.elements().iter().all(|x| last.contains(&phi.apply(x))), "{} on {g}", phi.label());
            }
        }
    }
}
