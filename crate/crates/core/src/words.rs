//! Reduced words in free products of cyclic groups.
//!
//! The three groups used throughout the crate are
//!
//! * `ℤ₂ * ℤ` with generators `g` (order 2) and `u` (infinite order),
//! * `ℤ₂ * ℤ₃` with generators `g` (order 2) and `h` (order 3),
//! * `*₃ ℤ₂` with three involutions `g1, g2, g3`.
//!
//! The embedding `ι: ℤ₂*ℤ → ℤ₂*ℤ₃` sends `g ↦ g`, `u ↦ hgh`. Its image
//! `H = ⟨g, hgh⟩` has index 3 with coset representatives `e, h, gh`; the
//! Schreier table recording how `g` and `h` permute those cosets (and the
//! `H`-valued corrections) drives the induced representation in
//! [`crate::engine`].

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::WordError;

#[derive(Clone, PartialEq, Eq, Hash)]
struct PresentationInner {
    orders: Vec<u32>,
    names: Vec<String>,
}

/// Free product of cyclic groups; `orders[i] == 0` marks an infinite cyclic factor.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Presentation(Arc<PresentationInner>);

impl Presentation {
    pub fn new(orders: Vec<u32>, names: Vec<String>) -> Result<Self, WordError> {
        if orders.is_empty() {
            return Err(WordError::InvalidPresentation("no factors".into()));
        }
        if orders.contains(&1) {
            return Err(WordError::InvalidPresentation(
                "trivial factor of order 1".into(),
            ));
        }
        if names.len() != orders.len() {
            return Err(WordError::InvalidPresentation(
                "one name per factor expected".into(),
            ));
        }
        Ok(Presentation(Arc::new(PresentationInner { orders, names })))
    }

    /// `ℤ₂ * ℤ₃` with generators `g`, `h`.
    pub fn z2_z3() -> Self {
        static P: OnceLock<Presentation> = OnceLock::new();
        P.get_or_init(|| Presentation::new(vec![2, 3], vec!["g".into(), "h".into()]).unwrap())
            .clone()
    }

    /// `ℤ₂ * ℤ` with generators `g`, `u`.
    pub fn z2_z() -> Self {
        static P: OnceLock<Presentation> = OnceLock::new();
        P.get_or_init(|| Presentation::new(vec![2, 0], vec!["g".into(), "u".into()]).unwrap())
            .clone()
    }

    /// `*ₙ ℤ₂` with generators `g1 … gn`.
    pub fn free_involutions(n: usize) -> Self {
        Presentation::new(vec![2; n], (1..=n).map(|i| format!("g{i}")).collect())
            .expect("valid presentation")
    }

    pub fn orders(&self) -> &[u32] {
        &self.0.orders
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn generators(&self) -> usize {
        self.0.orders.len()
    }

    fn normalize_exp(&self, gen: usize, e: i64) -> i64 {
        match self.0.orders[gen] {
            0 => e,
            o => e.rem_euclid(o as i64),
        }
    }
}

impl fmt::Debug for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .orders
            .iter()
            .map(|o| if *o == 0 { "Z".to_string() } else { format!("Z{o}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Reduced word: adjacent syllables use distinct generators, exponents are
/// nonzero and, for a factor of order `o`, lie in `1..o`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupWord {
    pres: Presentation,
    syllables: Vec<(usize, i64)>,
}

impl GroupWord {
    pub fn identity(pres: &Presentation) -> Self {
        GroupWord {
            pres: pres.clone(),
            syllables: Vec::new(),
        }
    }

    pub fn generator(pres: &Presentation, gen: usize) -> Self {
        GroupWord::from_syllables(pres, [(gen, 1)]).expect("generator index in range")
    }

    /// Builds and reduces a word from arbitrary syllables.
    pub fn from_syllables<I>(pres: &Presentation, syllables: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = (usize, i64)>,
    {
        let mut w = GroupWord::identity(pres);
        for (gen, e) in syllables {
            if gen >= pres.generators() {
                return Err(WordError::UnknownGenerator(gen));
            }
            w.push(gen, e);
        }
        Ok(w)
    }

    fn push(&mut self, gen: usize, e: i64) {
        let e = self.pres.normalize_exp(gen, e);
        if e == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some((g, x)) if *g == gen => {
                let merged = self.pres.normalize_exp(gen, *x + e);
                if merged == 0 {
                    self.syllables.pop();
                } else {
                    *x = merged;
                }
            }
            _ => self.syllables.push((gen, e)),
        }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn syllables(&self) -> &[(usize, i64)] {
        &self.syllables
    }

    /// Number of syllables of the reduced form.
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn multiply(&self, other: &GroupWord) -> Result<GroupWord, WordError> {
        if self.pres != other.pres {
            return Err(WordError::PresentationMismatch);
        }
        let mut out = self.clone();
        for &(g, e) in &other.syllables {
            out.push(g, e);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> GroupWord {
        let mut out = GroupWord::identity(&self.pres);
        for &(g, e) in self.syllables.iter().rev() {
            out.push(g, -e);
        }
        out
    }

    pub fn pow(&self, n: i64) -> GroupWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = GroupWord::identity(&self.pres);
        for _ in 0..n.unsigned_abs() {
            out = out.multiply(&base).expect("same presentation");
        }
        out
    }

    /// Expands syllables into single generator letters (positive exponents
    /// for finite factors, `±1` steps for infinite ones).
    pub fn letters(&self) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        for &(g, e) in &self.syllables {
            let step = if e < 0 { -1 } else { 1 };
            for _ in 0..e.abs() {
                out.push((g, step));
            }
        }
        out
    }

    /// Parses `"g h^2 g h"`; `"e"` or the empty string is the identity.
    pub fn parse(pres: &Presentation, s: &str) -> Result<GroupWord, WordError> {
        let mut syl = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>()
                        .map_err(|_| WordError::Parse(tok.to_string()))?,
                ),
                None => (tok, 1),
            };
            let gen = pres
                .names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| WordError::Parse(tok.to_string()))?;
            syl.push((gen, exp));
        }
        GroupWord::from_syllables(pres, syl)
    }
}

impl std::ops::Mul for &GroupWord {
    type Output = GroupWord;
    /// Panics on presentation mismatch; use [`GroupWord::multiply`] to handle it.
    fn mul(self, rhs: &GroupWord) -> GroupWord {
        self.multiply(rhs).expect("presentation mismatch")
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "e");
        }
        let names = self.pres.names();
        let parts: Vec<String> = self
            .syllables
            .iter()
            .map(|&(g, e)| {
                if e == 1 {
                    names[g].clone()
                } else {
                    format!("{}^{}", names[g], e)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Debug for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for GroupWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub const G: usize = 0;
pub const H: usize = 1;
pub const U: usize = 1;

pub fn g() -> GroupWord {
    GroupWord::generator(&Presentation::z2_z3(), G)
}

pub fn h() -> GroupWord {
    GroupWord::generator(&Presentation::z2_z3(), H)
}

/// `hgh`, the image of `u`.
pub fn hgh() -> GroupWord {
    GroupWord::parse(&Presentation::z2_z3(), "h g h").unwrap()
}

/// The embedding `ι: ℤ₂*ℤ → ℤ₂*ℤ₃`, `g ↦ g`, `u ↦ hgh`.
pub fn iota_embed(w: &GroupWord) -> Result<GroupWord, WordError> {
    if w.presentation() != &Presentation::z2_z() {
        return Err(WordError::PresentationMismatch);
    }
    let target = Presentation::z2_z3();
    let image_u = hgh();
    let image_u_inv = image_u.inverse();
    let mut out = GroupWord::identity(&target);
    for &(gen, e) in w.syllables() {
        let piece = if gen == G {
            GroupWord::generator(&target, G)
        } else if e > 0 {
            image_u.pow(e)
        } else {
            image_u_inv.pow(-e)
        };
        out = out.multiply(&piece)?;
    }
    Ok(out)
}

/// All reduced words with at most `max_syllables` syllables; syllables on an
/// infinite factor take exponents in `±1..=±max_exponent`.
pub fn enumerate_reduced_words(
    pres: &Presentation,
    max_syllables: usize,
    max_exponent: i64,
    cap: usize,
) -> Result<Vec<GroupWord>, WordError> {
    let mut choices: Vec<Vec<i64>> = Vec::new();
    for &o in pres.orders() {
        if o == 0 {
            choices.push((1..=max_exponent).flat_map(|e| [e, -e]).collect());
        } else {
            choices.push((1..o as i64).collect());
        }
    }
    let mut out = vec![GroupWord::identity(pres)];
    let mut frontier = vec![GroupWord::identity(pres)];
    for _ in 0..max_syllables {
        let mut next = Vec::new();
        for w in &frontier {
            let last = w.syllables.last().map(|s| s.0);
            for (gen, exps) in choices.iter().enumerate() {
                if Some(gen) == last {
                    continue;
                }
                for &e in exps {
                    let mut nw = w.clone();
                    nw.syllables.push((gen, e));
                    next.push(nw);
                    if out.len() + next.len() > cap {
                        return Err(WordError::ResourceLimit(cap));
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PingPongReport {
    pub max_syllables: usize,
    pub max_exponent: i64,
    pub words_checked: usize,
    pub distinct_images: usize,
    pub collisions: usize,
    /// Syllable length of `(hgh)ⁿ` for `n = 1..=50`.
    pub power_lengths: Vec<usize>,
    pub powers_strictly_increasing: bool,
    pub passed: bool,
}

pub const DEFAULT_ENUMERATION_CAP: usize = 5_000_000;

/// Checks injectivity of `ι` on every reduced word of `ℤ₂*ℤ` within the
/// bounds, plus the growth of `(hgh)ⁿ`.
pub fn ping_pong_injectivity_check(
    max_syllables: usize,
    max_exponent: i64,
    cap: usize,
) -> Result<PingPongReport, WordError> {
    let words = enumerate_reduced_words(&Presentation::z2_z(), max_syllables, max_exponent, cap)?;
    let mut images = HashSet::with_capacity(words.len());
    let mut collisions = 0;
    for w in &words {
        let img = iota_embed(w)?;
        if !images.insert(img) {
            collisions += 1;
        }
    }
    let base = hgh();
    let mut acc = GroupWord::identity(&Presentation::z2_z3());
    let mut power_lengths = Vec::with_capacity(50);
    for _ in 0..50 {
        acc = acc.multiply(&base)?;
        power_lengths.push(acc.len());
    }
    let increasing = power_lengths.windows(2).all(|p| p[0] < p[1]) && power_lengths[0] > 0;
    Ok(PingPongReport {
        max_syllables,
        max_exponent,
        words_checked: words.len(),
        distinct_images: images.len(),
        collisions,
        power_lengths,
        powers_strictly_increasing: increasing,
        passed: collisions == 0 && increasing,
    })
}

/// Membership in `H = ⟨g, hgh⟩ ⊂ ℤ₂*ℤ₃`; returns the unique preimage under `ι`.
///
/// In reduced form `ι(uⁿ)` reads `h g (h² g)ⁿ⁻¹ h` for `n > 0` and
/// `h² g (h g)^{|n|−1} h²` for `n < 0`, and the images of the syllables of
/// a reduced `ℤ₂*ℤ` word concatenate without cancellation, so a single
/// left-to-right scan decides membership.
pub fn membership_h(w: &GroupWord) -> Option<GroupWord> {
    if w.presentation() != &Presentation::z2_z3() {
        return None;
    }
    let syl = w.syllables();
    let mut out: Vec<(usize, i64)> = Vec::new();
    let mut i = 0;
    while i < syl.len() {
        match syl[i] {
            (G, _) => {
                out.push((G, 1));
                i += 1;
            }
            (_, e) => {
                // block opened by h^e; middle syllables use 3 − e until closed by h^e
                let close = e;
                let middle = 3 - e;
                let mut n = 0i64;
                let mut j = i + 1;
                loop {
                    if syl.get(j) != Some(&(G, 1)) {
                        return None;
                    }
                    n += 1;
                    match syl.get(j + 1) {
                        Some(&(H, x)) if x == close => {
                            j += 2;
                            break;
                        }
                        Some(&(H, x)) if x == middle => j += 2,
                        _ => return None,
                    }
                }
                out.push((U, if close == 1 { n } else { -n }));
                i = j;
            }
        }
    }
    GroupWord::from_syllables(&Presentation::z2_z(), out).ok()
}

/// Action of `g` and `h` on the cosets `{H, hH, ghH}` together with the
/// cocycle words: `s · rᵢ = r_target · ι(cocycle)`.
#[derive(Clone, Debug, Serialize)]
pub struct SchreierData {
    /// Representatives `r₁ = e`, `r₂ = h`, `r₃ = gh` (index 0, 1, 2).
    pub representatives: Vec<GroupWord>,
    /// `entries[generator][coset] = (target coset, cocycle in ℤ₂*ℤ)`; generator 0 is `g`, 1 is `h`.
    pub entries: Vec<Vec<(usize, GroupWord)>>,
}

impl SchreierData {
    pub fn target(&self, gen: usize, coset: usize) -> usize {
        self.entries[gen][coset].0
    }

    pub fn cocycle(&self, gen: usize, coset: usize) -> &GroupWord {
        &self.entries[gen][coset].1
    }

    /// Checks that each generator permutes the three cosets and that every
    /// entry satisfies `s · rᵢ = r_target · ι(cocycle)` exactly.
    pub fn verify_closure(&self) -> Result<(), String> {
        let p = Presentation::z2_z3();
        for (gen, row) in self.entries.iter().enumerate() {
            let mut seen = [false; 3];
            for (i, (j, c)) in row.iter().enumerate() {
                if *j >= 3 || seen[*j] {
                    return Err(format!("generator {gen} is not a permutation of cosets"));
                }
                seen[*j] = true;
                let lhs = &GroupWord::generator(&p, gen) * &self.representatives[i];
                let rhs = &self.representatives[*j] * &iota_embed(c).map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err(format!("entry ({gen}, {i}) inconsistent: {lhs} vs {rhs}"));
                }
            }
        }
        Ok(())
    }

    /// Plain-text table with 1-based coset labels.
    pub fn render(&self) -> String {
        let names = ["g", "h"];
        let mut s = String::from("gen | coset 1        | coset 2        | coset 3\n");
        for (gen, row) in self.entries.iter().enumerate() {
            s.push_str(names[gen]);
            s.push_str("   ");
            for (j, c) in row {
                s.push_str(&format!("| -> {} ({:<7}) ", j + 1, c.to_string()));
            }
            s.push('\n');
        }
        s
    }
}

fn compute_schreier() -> SchreierData {
    let p = Presentation::z2_z3();
    let reps = vec![
        GroupWord::identity(&p),
        h(),
        GroupWord::parse(&p, "g h").unwrap(),
    ];
    let mut entries = Vec::new();
    for gen in [G, H] {
        let s = GroupWord::generator(&p, gen);
        let mut row = Vec::new();
        for r in &reps {
            let sr = &s * r;
            let found: Vec<(usize, GroupWord)> = reps
                .iter()
                .enumerate()
                .filter_map(|(j, rj)| membership_h(&(&rj.inverse() * &sr)).map(|c| (j, c)))
                .collect();
            assert_eq!(found.len(), 1, "coset of {sr} not uniquely determined");
            row.push(found.into_iter().next().unwrap());
        }
        entries.push(row);
    }
    SchreierData {
        representatives: reps,
        entries,
    }
}

/// The Schreier table of `H` in `ℤ₂*ℤ₃`, computed once from [`membership_h`].
pub fn schreier_table() -> &'static SchreierData {
    static T: OnceLock<SchreierData> = OnceLock::new();
    T.get_or_init(compute_schreier)
}

/// Writes `w = rᵢ · ι(c)`; returns the 0-based coset index `i` and `c`.
pub fn coset_resolve(w: &GroupWord) -> (usize, GroupWord) {
    let table = schreier_table();
    let mut coset = 0;
    let mut cocycle = GroupWord::identity(&Presentation::z2_z());
    for (gen, _) in w.letters().into_iter().rev() {
        let (j, c) = &table.entries[gen][coset];
        cocycle = c * &cocycle;
        coset = *j;
    }
    (coset, cocycle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z23(s: &str) -> GroupWord {
        GroupWord::parse(&Presentation::z2_z3(), s).unwrap()
    }

    fn z2z(s: &str) -> GroupWord {
        GroupWord::parse(&Presentation::z2_z(), s).unwrap()
    }

    #[test]
    fn multiply_examples() {
        assert!((&h() * &z23("h^2")).is_identity());
        let sq = &hgh() * &hgh();
        assert_eq!(sq, z23("h g h^2 g h"));
        assert_eq!(sq.len(), 5);
        assert!((&g() * &g()).is_identity());
    }

    #[test]
    fn exponents_normalized() {
        assert_eq!(z23("h^-1"), z23("h^2"));
        assert_eq!(z23("h^4 g^3"), z23("h g"));
        assert_eq!(z2z("u^2 u^-5").syllables(), &[(U, -3)]);
    }

    #[test]
    fn presentation_mismatch() {
        assert_eq!(
            g().multiply(&z2z("u")),
            Err(WordError::PresentationMismatch)
        );
        assert!(Presentation::new(vec![], vec![]).is_err());
        assert!(Presentation::new(vec![1], vec!["x".into()]).is_err());
    }

    #[test]
    fn iota_examples() {
        assert_eq!(iota_embed(&z2z("u")).unwrap(), hgh());
        assert!(iota_embed(&z2z("e")).unwrap().is_identity());
        assert_eq!(iota_embed(&z2z("u^-1")).unwrap(), z23("h^2 g h^2"));
    }

    #[test]
    fn ping_pong_small() {
        let r = ping_pong_injectivity_check(1, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(r.passed);
        assert_eq!(r.words_checked, 4);
        assert_eq!(r.distinct_images, 4);
        assert_eq!(&r.power_lengths[..3], &[3, 5, 7]);
    }

    #[test]
    fn ping_pong_cap() {
        assert_eq!(
            ping_pong_injectivity_check(8, 4, 100).unwrap_err(),
            WordError::ResourceLimit(100)
        );
    }

    #[test]
    fn membership_examples() {
        let w = iota_embed(&z2z("u g u^-1")).unwrap();
        assert_eq!(w, z23("h g h g h^2 g h^2"));
        assert_eq!(membership_h(&w), Some(z2z("u g u^-1")));
        assert_eq!(membership_h(&h()), None);
        assert_eq!(membership_h(&z23("e")), Some(z2z("e")));
    }

    #[test]
    fn coset_examples() {
        assert_eq!(coset_resolve(&z23("h^2")), (2, z2z("u^-1")));
        assert_eq!(coset_resolve(&g()), (0, z2z("g")));
        assert_eq!(coset_resolve(&hgh()), (0, z2z("u")));
    }

    #[test]
    fn schreier_entries() {
        let t = schreier_table();
        t.verify_closure().unwrap();
        let expect = [
            [(0, "g"), (2, "e"), (1, "e")],
            [(1, "e"), (2, "u^-1"), (0, "u")],
        ];
        for gen in 0..2 {
            for i in 0..3 {
                assert_eq!(t.target(gen, i), expect[gen][i].0);
                assert_eq!(t.cocycle(gen, i), &z2z(expect[gen][i].1));
            }
        }
        // h applied three times from coset 1 returns with trivial cocycle
        let mut coset = 0;
        let mut total = z2z("e");
        for _ in 0..3 {
            let (j, c) = &t.entries[H][coset];
            total = c * &total;
            coset = *j;
        }
        assert_eq!(coset, 0);
        assert!(total.is_identity());
    }

    #[test]
    fn display_round_trip() {
        let w = z23("g h^2 g h");
        assert_eq!(w.to_string(), "g h^2 g h");
        assert_eq!(z23(&w.to_string()), w);
        assert_eq!(z2z("u^-2 g").to_string(), "u^-2 g");
        assert!(GroupWord::parse(&Presentation::z2_z3(), "x").is_err());
    }
}
