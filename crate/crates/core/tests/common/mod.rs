//! Strategies and property bodies shared by the property suites and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::HashSet;

use mvcorr::engine::{apply, induced_sigma, plain_pi, AffineIndexMap, GeometricString, SiteTag, StructuredVector};
use mvcorr::words::{coset_resolve, iota_embed, membership_h, schreier_table, GroupWord, Presentation};
use mvcorr::{FieldElement, Rational};
use num_traits::One;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn arb_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

pub fn arb_field() -> impl Strategy<Value = FieldElement> {
    (arb_rational(), arb_rational(), arb_rational(), arb_rational()).prop_map(|(a, b, c, d)| FieldElement::new(a, b, c, d))
}

fn arb_syllables(gens: usize, max_exp: i64, max_len: usize) -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0..gens, -max_exp..=max_exp), 0..=max_len)
}

pub fn arb_z2z3(max_len: usize) -> impl Strategy<Value = GroupWord> {
    arb_syllables(2, 2, max_len).prop_map(|s| GroupWord::from_syllables(&Presentation::z2_z3(), s).unwrap())
}

pub fn arb_z2z(max_len: usize) -> impl Strategy<Value = GroupWord> {
    arb_syllables(2, 4, max_len).prop_map(|s| GroupWord::from_syllables(&Presentation::z2_z(), s).unwrap())
}

fn arb_map() -> impl Strategy<Value = AffineIndexMap> {
    (prop::bool::ANY, -4i64..=4).prop_map(|(s, k)| AffineIndexMap::new(if s { 1 } else { -1 }, k))
}

fn convergent_ratio() -> impl Strategy<Value = FieldElement> {
    prop_oneof![
        Just(FieldElement::ratio(1, 2)),
        Just(FieldElement::inv_sqrt2()),
        Just(FieldElement::omega() * FieldElement::ratio(1, 2)),
        Just(-FieldElement::ratio(1, 3)),
    ]
}

fn arb_string(cosets: usize) -> impl Strategy<Value = GeometricString> {
    (
        (0..cosets, arb_map(), 0..cosets, arb_map()),
        (-4i64..=4, prop::bool::ANY),
        prop::option::of(1u64..=5),
        arb_field(),
        arb_field(),
        convergent_ratio(),
    )
        .prop_map(move |((cl, ml, cr, mr), (start, up), count, head, finite_ratio, inf_ratio)| {
            let ratio = if count.is_some() { finite_ratio } else { inf_ratio };
            GeometricString::new(
                SiteTag::new(cl, ml),
                SiteTag::new(cr, mr),
                start,
                if up { 1 } else { -1 },
                count,
                head,
                ratio,
            )
            .expect("convergent by construction")
        })
}

pub fn arb_vector(cosets: usize) -> impl Strategy<Value = StructuredVector> {
    prop::collection::vec(arb_string(cosets), 1..=3).prop_map(StructuredVector::from_strings)
}

fn ensure(ok: bool, what: &str) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(what.to_string()))
    }
}

#[allow(clippy::eq_op)]
pub fn field_axioms(a: &FieldElement, b: &FieldElement, c: &FieldElement) -> Result<(), TestCaseError> {
    ensure(a + b == b + a, "a+b = b+a")?;
    ensure(a * b == b * a, "ab = ba")?;
    ensure((a + b) + c == a + (b + c), "additive associativity")?;
    ensure((a * b) * c == a * (b * c), "multiplicative associativity")?;
    ensure(a * (b + c) == a * b + a * c, "distributivity")?;
    ensure((a - a).is_zero(), "a − a = 0")?;
    ensure(a * FieldElement::one() == *a, "a·1 = a")?;
    ensure(a.conj().conj() == *a, "conj is an involution")?;
    ensure((a * b).conj() == a.conj() * b.conj(), "conj is multiplicative")?;
    ensure(a.norm_sqr().is_real(), "|a|² is real")?;
    if !a.is_zero() {
        let inv = a.inv().map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure((a * &inv).is_one(), "a·a⁻¹ = 1")?;
        ensure(((b * a) * inv) == *b, "(ba)a⁻¹ = b")?;
    }
    let z = (a * b).to_c64() - a.to_c64() * b.to_c64();
    ensure(z.norm() < 1e-9, "embedding into ℂ is multiplicative")?;
    Ok(())
}

fn reduced(w: &GroupWord) -> bool {
    let orders = w.presentation().orders();
    let syl = w.syllables();
    syl.windows(2).all(|p| p[0].0 != p[1].0)
        && syl.iter().all(|&(g, e)| e != 0 && (orders[g] == 0 || (1..orders[g] as i64).contains(&e)))
}

pub fn word_laws(u: &GroupWord, v: &GroupWord) -> Result<(), TestCaseError> {
    let e = GroupWord::identity(u.presentation());
    let uv = u * v;
    ensure(reduced(&uv), "products are reduced")?;
    ensure((u * &u.inverse()).is_identity(), "u·u⁻¹ = e")?;
    ensure(&e * u == *u && u * &e == *u, "identity law")?;
    ensure(uv.inverse() == &v.inverse() * &u.inverse(), "(uv)⁻¹ = v⁻¹u⁻¹")?;
    ensure(&(&uv * u) * v == u * &(v * &(u * v)), "associativity")?;
    ensure(u.pow(3) == &(u * u) * u, "u³ = u·u·u")?;
    Ok(())
}

pub fn iota_laws(u: &GroupWord, v: &GroupWord) -> Result<(), TestCaseError> {
    let iu = iota_embed(u).unwrap();
    let iv = iota_embed(v).unwrap();
    ensure(iota_embed(&(u * v)).unwrap() == &iu * &iv, "ι(uv) = ι(u)ι(v)")?;
    ensure(membership_h(&iu).as_ref() == Some(u), "membership recovers the preimage")?;
    ensure(iu.len() >= u.len(), "ι does not shorten reduced words")?;
    Ok(())
}

pub fn coset_laws(w: &GroupWord) -> Result<(), TestCaseError> {
    let (i, c) = coset_resolve(w);
    let r = &schreier_table().representatives[i];
    ensure(*w == r * &iota_embed(&c).unwrap(), "w = rᵢ·ι(c)")
}

pub fn sigma_multiplicative(u: &GroupWord, v: &GroupWord) -> Result<(), TestCaseError> {
    let su = induced_sigma(u);
    let sv = induced_sigma(v);
    ensure(induced_sigma(&(u * v)) == su.compose(&sv), "σ(uv) = σ(u)σ(v)")?;
    ensure(induced_sigma(&u.inverse()) == su.adjoint(), "σ(u⁻¹) = σ(u)*")?;
    ensure(su.is_unitary(), "σ(u) unitary")
}

pub fn pi_unitary(w: &GroupWord) -> Result<(), TestCaseError> {
    let p = plain_pi(w);
    ensure(p.is_unitary(), "π(w) unitary")?;
    ensure(p.compose(&p.adjoint()) == plain_pi(&GroupWord::identity(&Presentation::z2_z())), "π(w)π(w)* = I")
}

/// `⟨v,w⟩ = conj⟨w,v⟩` and `⟨(X⊗Y)v, (X⊗Y)w⟩ = ⟨v,w⟩` for unitary `X, Y`.
pub fn inner_product_laws(
    v: &StructuredVector,
    w: &StructuredVector,
    x: &GroupWord,
    y: &GroupWord,
) -> Result<(), TestCaseError> {
    let fail = |e: mvcorr::EngineError| TestCaseError::fail(e.to_string());
    let vw = v.inner(w).map_err(fail)?;
    let wv = w.inner(v).map_err(fail)?;
    ensure(vw == wv.conj(), "⟨v,w⟩ = conj⟨w,v⟩")?;
    ensure(v.norm_sqr().map_err(fail)?.is_real(), "‖v‖² real")?;
    let sx = induced_sigma(x);
    let sy = induced_sigma(y);
    let xv = apply(Some(&sx), Some(&sy), v).map_err(fail)?;
    let xw = apply(Some(&sx), Some(&sy), w).map_err(fail)?;
    ensure(xv.inner(&xw).map_err(fail)? == vw, "unitaries preserve inner products")?;
    Ok(())
}

/// Elements of `H = ⟨g, hgh⟩` with at most `max_len` syllables among all
/// products of up to `depth` generators `g, hgh, (hgh)⁻¹`, multiplied
/// inside `ℤ₂*ℤ₃`.
pub fn bfs_subgroup(max_len: usize, depth: usize) -> HashSet<GroupWord> {
    let p = Presentation::z2_z3();
    let g = GroupWord::parse(&p, "g").unwrap();
    let u = GroupWord::parse(&p, "h g h").unwrap();
    let gens = [g.clone(), u.clone(), u.inverse()];
    let mut seen: HashSet<GroupWord> = HashSet::new();
    let id = GroupWord::identity(&p);
    seen.insert(id.clone());
    let mut frontier = vec![id];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for s in &gens {
                let ws = w * s;
                if seen.insert(ws.clone()) {
                    next.push(ws);
                }
            }
        }
        frontier = next;
    }
    seen.retain(|w| w.len() <= max_len);
    seen
}
