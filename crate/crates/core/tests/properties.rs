mod common;

use common::*;
use mvcorr::correlations::{assemble_numeric, cyclic_w23_model, cyclic_w32_model, WitnessId};
use mvcorr::optimizer::ModelParams;
use mvcorr::words::{enumerate_reduced_words, membership_h, Presentation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn field_laws(a in arb_field(), b in arb_field(), c in arb_field()) {
        field_axioms(&a, &b, &c)?;
    }

    #[test]
    fn z2z3_word_laws(u in arb_z2z3(8), v in arb_z2z3(8)) {
        word_laws(&u, &v)?;
    }

    #[test]
    fn z2z_word_laws(u in arb_z2z(6), v in arb_z2z(6)) {
        word_laws(&u, &v)?;
    }

    #[test]
    fn embedding_is_a_homomorphism(u in arb_z2z(6), v in arb_z2z(6)) {
        iota_laws(&u, &v)?;
    }

    #[test]
    fn cosets_resolve(w in arb_z2z3(10)) {
        coset_laws(&w)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn sigma_is_multiplicative(u in arb_z2z3(8), v in arb_z2z3(8)) {
        sigma_multiplicative(&u, &v)?;
    }

    #[test]
    fn pi_is_unitary(w in arb_z2z(6)) {
        pi_unitary(&w)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn inner_products(v in arb_vector(3), w in arb_vector(3), x in arb_z2z3(4), y in arb_z2z3(4)) {
        inner_product_laws(&v, &w, &x, &y)?;
    }

    #[test]
    fn random_model_tables_satisfy_invariants(seed in any::<u64>(), da in 2usize..5, db in 2usize..5, w32 in any::<bool>()) {
        let witness = if w32 { WitnessId::W32 } else { WitnessId::W23 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ModelParams::random(witness, da, db, &mut rng);
        let table = assemble_numeric(&p.to_numeric_model()).unwrap();
        let v = table.invariant_violations(1e-10);
        prop_assert!(v.is_empty(), "{v:?}");
    }
}

#[test]
fn membership_matches_bfs() {
    let members = bfs_subgroup(9, 14);
    let words = enumerate_reduced_words(&Presentation::z2_z3(), 9, 2, 1_000_000).unwrap();
    assert!(words.len() > 100, "{}", words.len());
    let mut hits = 0;
    for w in &words {
        let fast = membership_h(w).is_some();
        assert_eq!(fast, members.contains(w), "{w}");
        hits += fast as usize;
    }
    assert!(hits > 10);
}

#[test]
fn cyclic_tables_satisfy_invariants() {
    for m in 2..=8 {
        for table in [
            assemble_numeric(&cyclic_w32_model(m).unwrap()).unwrap(),
            assemble_numeric(&cyclic_w23_model(m).unwrap()).unwrap(),
        ] {
            assert!(table.invariant_violations(1e-10).is_empty(), "M = {m}");
        }
    }
}
