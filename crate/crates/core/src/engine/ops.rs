//! Weighted-permutation operators on `ℓ²(ℤ)` and on `ℂᶜ⊗ℓ²(ℤ)`.

use num_traits::One;
use serde::Serialize;

use crate::error::EngineError;
use crate::field::FieldElement;
use crate::words::{coset_resolve, schreier_table, GroupWord, Presentation, G, U};

/// `j ↦ sign·j + offset` with `sign = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AffineIndexMap {
    pub sign: i64,
    pub offset: i64,
}

impl AffineIndexMap {
    pub const IDENTITY: AffineIndexMap = AffineIndexMap { sign: 1, offset: 0 };

    pub fn new(sign: i64, offset: i64) -> Self {
        assert!(sign == 1 || sign == -1, "affine index map needs sign ±1");
        AffineIndexMap { sign, offset }
    }

    pub fn shift(offset: i64) -> Self {
        AffineIndexMap::new(1, offset)
    }

    #[inline]
    pub fn apply(&self, j: i64) -> i64 {
        self.sign * j + self.offset
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineIndexMap) -> AffineIndexMap {
        AffineIndexMap::new(
            self.sign * inner.sign,
            self.sign * inner.offset + self.offset,
        )
    }

    pub fn inverse(&self) -> AffineIndexMap {
        AffineIndexMap::new(self.sign, -self.sign * self.offset)
    }
}

/// Piecewise-constant function on ℤ. With breakpoints `b₁ < … < bₙ` the
/// regions are `(−∞, b₁), [b₁, b₂), …, [bₙ, ∞)`; `values[i]` belongs to
/// region `i`. Adjacent regions always carry distinct values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PiecewiseScalar {
    breaks: Vec<i64>,
    values: Vec<FieldElement>,
}

impl PiecewiseScalar {
    pub fn constant(v: FieldElement) -> Self {
        PiecewiseScalar {
            breaks: Vec::new(),
            values: vec![v],
        }
    }

    /// `below` on `j < at`, `above` on `j ≥ at`.
    pub fn step(at: i64, below: FieldElement, above: FieldElement) -> Self {
        PiecewiseScalar::sample(vec![at], |j| {
            if j < at {
                below.clone()
            } else {
                above.clone()
            }
        })
    }

    /// Builds the function from candidate breakpoints and a sampler that is
    /// constant on every region they delimit.
    fn sample(mut breaks: Vec<i64>, f: impl Fn(i64) -> FieldElement) -> Self {
        breaks.sort_unstable();
        breaks.dedup();
        let mut out_breaks = Vec::with_capacity(breaks.len());
        let first = breaks.first().map_or(0, |b| b - 1);
        let mut values = vec![f(first)];
        for &b in &breaks {
            let v = f(b);
            if &v != values.last().unwrap() {
                out_breaks.push(b);
                values.push(v);
            }
        }
        PiecewiseScalar {
            breaks: out_breaks,
            values,
        }
    }

    pub fn breaks(&self) -> &[i64] {
        &self.breaks
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    pub fn eval(&self, j: i64) -> &FieldElement {
        &self.values[self.breaks.partition_point(|&b| b <= j)]
    }

    /// `j ↦ self(α(j))`.
    pub fn pullback(&self, alpha: &AffineIndexMap) -> Self {
        let breaks = self
            .breaks
            .iter()
            .map(|&b| {
                if alpha.sign == 1 {
                    b - alpha.offset
                } else {
                    alpha.offset - b + 1
                }
            })
            .collect();
        PiecewiseScalar::sample(breaks, |j| self.eval(alpha.apply(j)).clone())
    }

    pub fn mul(&self, other: &PiecewiseScalar) -> Self {
        let breaks = self.breaks.iter().chain(&other.breaks).copied().collect();
        PiecewiseScalar::sample(breaks, |j| self.eval(j) * other.eval(j))
    }

    pub fn map(&self, f: impl Fn(&FieldElement) -> FieldElement) -> Self {
        PiecewiseScalar::sample(self.breaks.clone(), |j| f(self.eval(j)))
    }
}

/// `e_j ↦ s(j)·e_{α(j)}` on `ℓ²(ℤ)`, with `|s| = 1` for the unitaries used here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PrimitiveOp {
    pub map: AffineIndexMap,
    pub signs: PiecewiseScalar,
}

impl PrimitiveOp {
    pub fn identity() -> Self {
        PrimitiveOp {
            map: AffineIndexMap::IDENTITY,
            signs: PiecewiseScalar::constant(FieldElement::one()),
        }
    }

    pub fn from_map(map: AffineIndexMap) -> Self {
        PrimitiveOp {
            map,
            signs: PiecewiseScalar::constant(FieldElement::one()),
        }
    }

    /// `Te_j = e_j` for `j < 0`, `−e_j` for `j ≥ 0`.
    pub fn t() -> Self {
        PrimitiveOp {
            map: AffineIndexMap::IDENTITY,
            signs: PiecewiseScalar::step(0, FieldElement::one(), FieldElement::from_int(-1)),
        }
    }

    /// `Ue_j = e_{j+1}`.
    pub fn u() -> Self {
        PrimitiveOp::from_map(AffineIndexMap::shift(1))
    }

    pub fn apply_basis(&self, j: i64) -> (FieldElement, i64) {
        (self.signs.eval(j).clone(), self.map.apply(j))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PrimitiveOp) -> PrimitiveOp {
        PrimitiveOp {
            map: self.map.compose(&inner.map),
            signs: inner.signs.mul(&self.signs.pullback(&inner.map)),
        }
    }

    pub fn adjoint(&self) -> PrimitiveOp {
        let inv = self.map.inverse();
        PrimitiveOp {
            map: inv,
            signs: self.signs.map(|v| v.conj()).pullback(&inv),
        }
    }

    pub fn pow(&self, n: i64) -> PrimitiveOp {
        let base = if n < 0 { self.adjoint() } else { self.clone() };
        (0..n.unsigned_abs()).fold(PrimitiveOp::identity(), |acc, _| acc.compose(&base))
    }

    pub fn is_unitary(&self) -> bool {
        self.signs.values().iter().all(|v| v.norm_sqr().is_one())
    }
}

/// Names accepted by [`builtin_operator`].
pub const BUILTIN_NAMES: [&str; 5] = ["T", "U", "S1", "S2", "S3"];

/// The operators `T, U` on `ℓ²(ℤ)` and the three involutions `S₁ = T`,
/// `S₂: e_j ↦ e_{1−j}`, `S₃: e_j ↦ e_{−j}`.
pub fn builtin_operator(name: &str) -> Result<PrimitiveOp, EngineError> {
    match name {
        "T" | "S1" => Ok(PrimitiveOp::t()),
        "U" => Ok(PrimitiveOp::u()),
        "S2" => Ok(PrimitiveOp::from_map(AffineIndexMap::new(-1, 1))),
        "S3" => Ok(PrimitiveOp::from_map(AffineIndexMap::new(-1, 0))),
        other => Err(EngineError::UnknownOperator(other.to_string())),
    }
}

/// `δ_c ⊗ e_j ↦ δ_{perm[c]} ⊗ blocks[c]·e_j` on `ℂᶜ⊗ℓ²(ℤ)`. A single
/// coset (`c = 1`) is plain `ℓ²(ℤ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BlockOp {
    pub perm: Vec<usize>,
    pub blocks: Vec<PrimitiveOp>,
}

impl BlockOp {
    pub fn identity(cosets: usize) -> Self {
        BlockOp {
            perm: (0..cosets).collect(),
            blocks: vec![PrimitiveOp::identity(); cosets],
        }
    }

    pub fn plain(op: PrimitiveOp) -> Self {
        BlockOp {
            perm: vec![0],
            blocks: vec![op],
        }
    }

    pub fn cosets(&self) -> usize {
        self.perm.len()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &BlockOp) -> BlockOp {
        assert_eq!(self.cosets(), inner.cosets(), "coset count mismatch");
        let n = self.cosets();
        let mut perm = vec![0; n];
        let mut blocks = Vec::with_capacity(n);
        for c in 0..n {
            let mid = inner.perm[c];
            perm[c] = self.perm[mid];
            blocks.push(self.blocks[mid].compose(&inner.blocks[c]));
        }
        BlockOp { perm, blocks }
    }

    pub fn adjoint(&self) -> BlockOp {
        let n = self.cosets();
        let mut perm = vec![0; n];
        let mut blocks = vec![PrimitiveOp::identity(); n];
        for c in 0..n {
            let t = self.perm[c];
            perm[t] = c;
            blocks[t] = self.blocks[c].adjoint();
        }
        BlockOp { perm, blocks }
    }

    pub fn pow(&self, n: i64) -> BlockOp {
        let base = if n < 0 { self.adjoint() } else { self.clone() };
        (0..n.unsigned_abs()).fold(BlockOp::identity(self.cosets()), |acc, _| acc.compose(&base))
    }

    pub fn is_identity(&self) -> bool {
        *self == BlockOp::identity(self.cosets())
    }

    pub fn is_unitary(&self) -> bool {
        let mut seen = vec![false; self.cosets()];
        for &p in &self.perm {
            if p >= seen.len() || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        self.blocks.iter().all(PrimitiveOp::is_unitary)
    }
}

/// `π: ℤ₂*ℤ → U(ℓ²(ℤ))`, `g ↦ T`, `u ↦ U`.
pub fn plain_pi(w: &GroupWord) -> PrimitiveOp {
    assert_eq!(w.presentation(), &Presentation::z2_z(), "π takes words of ℤ₂*ℤ");
    w.syllables()
        .iter()
        .fold(PrimitiveOp::identity(), |acc, &(gen, e)| {
            let piece = if gen == G {
                PrimitiveOp::t()
            } else {
                debug_assert_eq!(gen, U);
                PrimitiveOp::u().pow(e)
            };
            acc.compose(&piece)
        })
}

/// `σ(s)` for a generator `s` of `ℤ₂*ℤ₃` (0 = g, 1 = h) from the Schreier table.
pub fn sigma_generator(gen: usize) -> BlockOp {
    let table = schreier_table();
    let mut perm = Vec::with_capacity(3);
    let mut blocks = Vec::with_capacity(3);
    for coset in 0..3 {
        perm.push(table.target(gen, coset));
        blocks.push(plain_pi(table.cocycle(gen, coset)));
    }
    BlockOp { perm, blocks }
}

/// The induced representation `σ = Ind_H^{ℤ₂*ℤ₃} π` on `ℂ³⊗ℓ²(ℤ)`, built as
/// the ordered product of generator images.
pub fn induced_sigma(w: &GroupWord) -> BlockOp {
    assert_eq!(w.presentation(), &Presentation::z2_z3(), "σ takes words of ℤ₂*ℤ₃");
    let gens = [sigma_generator(0), sigma_generator(1)];
    w.letters()
        .into_iter()
        .fold(BlockOp::identity(3), |acc, (gen, _)| acc.compose(&gens[gen]))
}

/// Same operator as [`induced_sigma`], read directly off the coset
/// decomposition `w·rᵢ = r_j·ι(c)` of each representative.
pub fn induced_sigma_by_cosets(w: &GroupWord) -> BlockOp {
    let table = schreier_table();
    let mut perm = Vec::with_capacity(3);
    let mut blocks = Vec::with_capacity(3);
    for r in &table.representatives {
        let (j, c) = coset_resolve(&(w * r));
        perm.push(j);
        blocks.push(plain_pi(&c));
    }
    BlockOp { perm, blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{g, h, hgh};

    #[test]
    fn builtins_act_on_basis() {
        let s2 = builtin_operator("S2").unwrap();
        assert_eq!(s2.apply_basis(0), (FieldElement::one(), 1));
        let s3 = builtin_operator("S3").unwrap();
        assert_eq!(s3.apply_basis(5), (FieldElement::one(), -5));
        let t = builtin_operator("T").unwrap();
        assert_eq!(t.apply_basis(0).0, FieldElement::from_int(-1));
        assert_eq!(t.apply_basis(-1).0, FieldElement::one());
        assert!(matches!(
            builtin_operator("V"),
            Err(EngineError::UnknownOperator(_))
        ));
    }

    #[test]
    fn involutions_square_to_identity() {
        for name in ["T", "S1", "S2", "S3"] {
            let op = builtin_operator(name).unwrap();
            assert_eq!(op.compose(&op), PrimitiveOp::identity(), "{name}");
        }
        let u = PrimitiveOp::u();
        assert_eq!(u.compose(&u.adjoint()), PrimitiveOp::identity());
    }

    #[test]
    fn composition_pulls_back_breakpoints() {
        // U T U* flips the sign on j ≥ 1
        let u = PrimitiveOp::u();
        let conj = u.compose(&PrimitiveOp::t()).compose(&u.adjoint());
        assert_eq!(conj.signs.breaks(), &[1]);
        assert_eq!(conj.apply_basis(0).0, FieldElement::one());
        assert_eq!(conj.apply_basis(1).0, FieldElement::from_int(-1));
        // S3 T S3 flips the sign on j ≤ 0
        let s3 = builtin_operator("S3").unwrap();
        let r = s3.compose(&PrimitiveOp::t()).compose(&s3);
        assert_eq!(r.apply_basis(0).0, FieldElement::from_int(-1));
        assert_eq!(r.apply_basis(1).0, FieldElement::one());
    }

    #[test]
    fn sigma_relations() {
        let sg = induced_sigma(&g());
        let sh = induced_sigma(&h());
        assert!(sg.pow(2).is_identity());
        assert!(sh.pow(3).is_identity());
        assert!(!sh.is_identity());
        assert!(sg.is_unitary() && sh.is_unitary());
    }

    #[test]
    fn sigma_restricted_to_first_coset() {
        let s = induced_sigma(&hgh());
        assert_eq!(s.perm[0], 0);
        assert_eq!(s.blocks[0], PrimitiveOp::u());
        let sg = induced_sigma(&g());
        assert_eq!(sg.perm[0], 0);
        assert_eq!(sg.blocks[0], PrimitiveOp::t());
        // σ(g) swaps cosets 2 and 3 with trivial cocycle
        assert_eq!(sg.perm[1], 2);
        assert_eq!(sg.blocks[1], PrimitiveOp::identity());
    }

    #[test]
    fn two_sigma_routes_agree() {
        for s in ["h g h", "h^2 g h^2 g", "g h g h^2 g h", "h", "e"] {
            let w = GroupWord::parse(&Presentation::z2_z3(), s).unwrap();
            assert_eq!(induced_sigma(&w), induced_sigma_by_cosets(&w), "{s}");
        }
    }
}
