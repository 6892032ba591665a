//! Exact vectors on `(ℂᶜ⊗ℓ²(ℤ)) ⊗ (ℂᶜ⊗ℓ²(ℤ))` built from geometric
//! diagonal strings, with closed-form inner products.

use std::cmp::{max, min};

use num_traits::{One, Zero};
use serde::Serialize;

use super::ops::{AffineIndexMap, BlockOp, PiecewiseScalar};
use crate::error::EngineError;
use crate::field::FieldElement;

/// Coset label and index map of one tensor factor of a string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SiteTag {
    pub coset: usize,
    pub map: AffineIndexMap,
}

impl SiteTag {
    pub fn new(coset: usize, map: AffineIndexMap) -> Self {
        SiteTag { coset, map }
    }
}

/// `Σ_t head·ratioᵗ · (δ_{cL} ⊗ e_{α(j₀+dir·t)}) ⊗ (δ_{cR} ⊗ e_{β(j₀+dir·t)})`
/// over `t = 0..count` (`count = None` is an infinite string, which needs `|ratio| < 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeometricString {
    pub left: SiteTag,
    pub right: SiteTag,
    pub start: i64,
    pub dir: i64,
    pub count: Option<u64>,
    pub head: FieldElement,
    pub ratio: FieldElement,
}

fn below_one(r: &FieldElement) -> bool {
    let n = r.norm_sqr();
    if let Ok(c) = n.to_complex() {
        if c.re < 0.999_999 {
            return true;
        }
        if c.re > 1.000_001 {
            return false;
        }
    }
    n.real_cmp(&FieldElement::one()) == Some(std::cmp::Ordering::Less)
}

impl GeometricString {
    pub fn new(
        left: SiteTag,
        right: SiteTag,
        start: i64,
        dir: i64,
        count: Option<u64>,
        head: FieldElement,
        ratio: FieldElement,
    ) -> Result<Self, EngineError> {
        assert!(dir == 1 || dir == -1, "direction must be ±1");
        if count.is_none() && !below_one(&ratio) {
            return Err(EngineError::DivergentString);
        }
        Ok(GeometricString {
            left,
            right,
            start,
            dir,
            count,
            head,
            ratio,
        })
    }

    /// Single elementary tensor `coef · (δ_{cl}⊗e_{jl}) ⊗ (δ_{cr}⊗e_{jr})`.
    pub fn point(cl: usize, jl: i64, cr: usize, jr: i64, coef: FieldElement) -> Self {
        GeometricString {
            left: SiteTag::new(cl, AffineIndexMap::shift(jl)),
            right: SiteTag::new(cr, AffineIndexMap::shift(jr)),
            start: 0,
            dir: 1,
            count: Some(1),
            head: coef,
            ratio: FieldElement::one(),
        }
    }

    /// Diagonal string `Σ_t head·ratioᵗ e_j ⊗ e_j`, `j = start + dir·t`, on coset `c` of both sides.
    pub fn diagonal(
        coset: usize,
        start: i64,
        dir: i64,
        count: Option<u64>,
        head: FieldElement,
        ratio: FieldElement,
    ) -> Result<Self, EngineError> {
        let tag = SiteTag::new(coset, AffineIndexMap::IDENTITY);
        GeometricString::new(tag, tag, start, dir, count, head, ratio)
    }

    fn param(&self) -> AffineIndexMap {
        AffineIndexMap::new(self.dir, self.start)
    }

    /// Index maps from the string parameter `t` straight to site indices.
    pub fn effective_maps(&self) -> (AffineIndexMap, AffineIndexMap) {
        let p = self.param();
        (self.left.map.compose(&p), self.right.map.compose(&p))
    }

    /// Site indices carried by step `t`.
    pub fn sites(&self, t: u64) -> (i64, i64) {
        let (l, r) = self.effective_maps();
        (l.apply(t as i64), r.apply(t as i64))
    }

    /// Same string reparametrized with `start = 0`, `dir = 1`.
    pub fn canonical(&self) -> GeometricString {
        let (l, r) = self.effective_maps();
        GeometricString {
            left: SiteTag::new(self.left.coset, l),
            right: SiteTag::new(self.right.coset, r),
            start: 0,
            dir: 1,
            count: self.count,
            head: self.head.clone(),
            ratio: self.ratio.clone(),
        }
    }

    /// The part `t ∈ [from, to)` (canonical form), re-based to start at zero.
    fn slice(&self, from: u64, to: Option<u64>) -> GeometricString {
        let c = self.canonical();
        let shift = AffineIndexMap::shift(from as i64);
        GeometricString {
            left: SiteTag::new(c.left.coset, c.left.map.compose(&shift)),
            right: SiteTag::new(c.right.coset, c.right.map.compose(&shift)),
            start: 0,
            dir: 1,
            count: to.map(|t| t - from),
            head: &c.head * &c.ratio.pow(from as i64).expect("nonnegative power"),
            ratio: c.ratio,
        }
    }
}

/// Finite sum of geometric strings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StructuredVector {
    pub strings: Vec<GeometricString>,
}

impl StructuredVector {
    pub fn zero() -> Self {
        StructuredVector::default()
    }

    pub fn from_strings(strings: Vec<GeometricString>) -> Self {
        StructuredVector { strings }.merged()
    }

    pub fn add(&self, other: &StructuredVector) -> StructuredVector {
        let mut s = self.strings.clone();
        s.extend(other.strings.iter().cloned());
        StructuredVector::from_strings(s)
    }

    pub fn scale(&self, k: &FieldElement) -> StructuredVector {
        StructuredVector::from_strings(
            self.strings
                .iter()
                .map(|s| GeometricString {
                    head: &s.head * k,
                    ..s.clone()
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &StructuredVector) -> StructuredVector {
        self.add(&other.scale(&FieldElement::from_int(-1)))
    }

    /// Canonical form: zero strings dropped, identical strings summed, and
    /// finite strings continued by a string with the same ratio joined.
    pub fn merged(self) -> StructuredVector {
        let mut out: Vec<GeometricString> = Vec::new();
        'next: for s in self.strings.into_iter().map(|s| s.canonical()) {
            if s.head.is_zero() || s.count == Some(0) {
                continue;
            }
            for o in out.iter_mut() {
                if o.left == s.left && o.right == s.right && o.count == s.count && o.ratio == s.ratio {
                    o.head = &o.head + &s.head;
                    continue 'next;
                }
            }
            out.push(s);
        }
        out.retain(|s| !s.head.is_zero());
        // join continuations
        let mut changed = true;
        while changed {
            changed = false;
            'outer: for i in 0..out.len() {
                for j in 0..out.len() {
                    if i == j {
                        continue;
                    }
                    if let Some(joined) = join(&out[i], &out[j]) {
                        let (a, b) = (min(i, j), max(i, j));
                        out.remove(b);
                        out.remove(a);
                        out.push(joined);
                        changed = true;
                        break 'outer;
                    }
                }
            }
        }
        StructuredVector { strings: out }
    }

    pub fn inner(&self, other: &StructuredVector) -> Result<FieldElement, EngineError> {
        inner(self, other)
    }

    pub fn norm_sqr(&self) -> Result<FieldElement, EngineError> {
        inner(self, self)
    }

    /// Exact equality as vectors (not as representations).
    pub fn same_vector(&self, other: &StructuredVector) -> Result<bool, EngineError> {
        Ok(self.sub(other).norm_sqr()?.is_zero())
    }
}

/// `b` continues `a` when `a` is finite and `b` starts where `a` stops
/// with the expected head.
fn join(a: &GeometricString, b: &GeometricString) -> Option<GeometricString> {
    let n = a.count?;
    if a.left.coset != b.left.coset || a.right.coset != b.right.coset || a.ratio != b.ratio {
        return None;
    }
    let shift = AffineIndexMap::shift(n as i64);
    if a.left.map.compose(&shift) != b.left.map || a.right.map.compose(&shift) != b.right.map {
        return None;
    }
    if &a.head * &a.ratio.pow(n as i64).ok()? != b.head {
        return None;
    }
    Some(GeometricString {
        count: b.count.map(|m| m + n),
        ..a.clone()
    })
}

/// One tensor factor of an operator pair; `None` is the identity.
fn factor_action(
    op: Option<&BlockOp>,
    tag: &SiteTag,
    eff: &AffineIndexMap,
) -> Result<(usize, AffineIndexMap, PiecewiseScalar), EngineError> {
    match op {
        None => Ok((
            tag.coset,
            *eff,
            PiecewiseScalar::constant(FieldElement::one()),
        )),
        Some(b) => {
            if tag.coset >= b.cosets() {
                return Err(EngineError::CosetMismatch {
                    op: b.cosets(),
                    coset: tag.coset,
                });
            }
            let block = &b.blocks[tag.coset];
            Ok((
                b.perm[tag.coset],
                block.map.compose(eff),
                block.signs.pullback(eff),
            ))
        }
    }
}

/// `(X ⊗ Y)·v`; strings are split wherever a sign region of `X` or `Y` changes.
pub fn apply(
    left: Option<&BlockOp>,
    right: Option<&BlockOp>,
    v: &StructuredVector,
) -> Result<StructuredVector, EngineError> {
    let mut out = Vec::new();
    for s in &v.strings {
        let s = s.canonical();
        let (el, er) = s.effective_maps();
        let (cl, ml, sl) = factor_action(left, &s.left, &el)?;
        let (cr, mr, sr) = factor_action(right, &s.right, &er)?;
        let signs = sl.mul(&sr);
        let mut cuts: Vec<u64> = signs
            .breaks()
            .iter()
            .filter(|&&b| b > 0 && s.count.is_none_or(|n| (b as u64) < n))
            .map(|&b| b as u64)
            .collect();
        cuts.insert(0, 0);
        for (k, &from) in cuts.iter().enumerate() {
            let to = cuts.get(k + 1).copied().or(s.count);
            let piece = s.slice(from, to);
            let scalar = signs.eval(from as i64);
            out.push(GeometricString {
                left: SiteTag::new(cl, ml.compose(&AffineIndexMap::shift(from as i64))),
                right: SiteTag::new(cr, mr.compose(&AffineIndexMap::shift(from as i64))),
                head: &piece.head * scalar,
                ..piece
            });
        }
    }
    Ok(StructuredVector::from_strings(out))
}

fn geometric_sum(r: &FieldElement, len: Option<u64>) -> Result<FieldElement, EngineError> {
    match len {
        Some(0) => Ok(FieldElement::zero()),
        Some(n) => {
            if r.is_one() {
                Ok(FieldElement::from_int(n as i64))
            } else {
                let num = FieldElement::one() - r.pow(n as i64)?;
                let den = (FieldElement::one() - r).inv()?;
                Ok(num * den)
            }
        }
        None => {
            if !below_one(r) {
                return Err(EngineError::NonConvergent);
            }
            Ok((FieldElement::one() - r).inv()?)
        }
    }
}

fn in_range(t: i64, count: Option<u64>) -> bool {
    t >= 0 && count.is_none_or(|n| (t as u64) < n)
}

/// `⟨a, b⟩` for two strings, linear in `a`, conjugate-linear in `b`.
fn string_inner(a: &GeometricString, b: &GeometricString) -> Result<FieldElement, EngineError> {
    if a.left.coset != b.left.coset || a.right.coset != b.right.coset {
        return Ok(FieldElement::zero());
    }
    let (la, ra) = a.effective_maps();
    let (lb, rb) = b.effective_maps();
    // Step t of `a` meets step t' of `b` iff la(t) = lb(t') and ra(t) = rb(t');
    // each condition reads t' = σ·t + δ.
    let sig_l = la.sign * lb.sign;
    let del_l = lb.sign * (la.offset - lb.offset);
    let sig_r = ra.sign * rb.sign;
    let del_r = rb.sign * (ra.offset - rb.offset);
    let term = |t: i64, tp: i64| -> Result<FieldElement, EngineError> {
        let x = &a.head * &a.ratio.pow(t)?;
        let y = &b.head * &b.ratio.pow(tp)?;
        Ok(&x * &y.conj())
    };
    if sig_l != sig_r {
        // at most one meeting point: (σl − σr)·t = δr − δl
        let num = del_r - del_l;
        let den = sig_l - sig_r;
        if num % den != 0 {
            return Ok(FieldElement::zero());
        }
        let t = num / den;
        let tp = sig_l * t + del_l;
        if in_range(t, a.count) && in_range(tp, b.count) {
            return term(t, tp);
        }
        return Ok(FieldElement::zero());
    }
    if del_l != del_r {
        return Ok(FieldElement::zero());
    }
    let (sigma, delta) = (sig_l, del_l);
    if sigma == 1 {
        // t ∈ [max(0, −δ), min(Na, Nb − δ))
        let lo = max(0, -delta);
        let hi_a = a.count.map(|n| n as i64);
        let hi_b = b.count.map(|n| n as i64 - delta);
        let hi = match (hi_a, hi_b) {
            (Some(x), Some(y)) => Some(min(x, y)),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        };
        let len = match hi {
            Some(h) if h <= lo => return Ok(FieldElement::zero()),
            Some(h) => Some((h - lo) as u64),
            None => None,
        };
        let r = &a.ratio * &b.ratio.conj();
        let first = term(lo, lo + delta)?;
        Ok(&first * &geometric_sum(&r, len)?)
    } else {
        // t' = δ − t: finite overlap t ∈ [max(0, δ − Nb + 1), min(Na − 1, δ)]
        let lo = b.count.map_or(0, |n| max(0, delta - n as i64 + 1));
        let hi = a.count.map_or(delta, |n| min(n as i64 - 1, delta));
        let mut acc = FieldElement::zero();
        for t in lo..=hi {
            acc += term(t, delta - t)?;
        }
        Ok(acc)
    }
}

/// Exact inner product, linear in the first argument.
pub fn inner(v: &StructuredVector, w: &StructuredVector) -> Result<FieldElement, EngineError> {
    let mut acc = FieldElement::zero();
    for a in &v.strings {
        for b in &w.strings {
            acc += string_inner(a, b)?;
        }
    }
    Ok(acc)
}

/// Outcome of exact Gram–Schmidt.
#[derive(Clone, Debug)]
pub struct GramSchmidt {
    pub basis: Vec<StructuredVector>,
    pub rank: usize,
    /// `coefficients[i][k] = ⟨v_k, q_i⟩`, so `v_k = Σᵢ coefficients[i][k]·q_i`.
    pub coefficients: Vec<Vec<FieldElement>>,
}

pub fn gram_schmidt(vs: &[StructuredVector]) -> Result<GramSchmidt, EngineError> {
    let mut basis: Vec<StructuredVector> = Vec::new();
    let mut coefficients: Vec<Vec<FieldElement>> = Vec::new();
    for (k, v) in vs.iter().enumerate() {
        let mut residual = v.clone();
        let mut proj = Vec::with_capacity(basis.len());
        for q in &basis {
            let c = inner(v, q)?;
            residual = residual.sub(&q.scale(&c));
            proj.push(c);
        }
        for (i, c) in proj.into_iter().enumerate() {
            coefficients[i][k] = c;
        }
        let nsq = residual.norm_sqr()?;
        if nsq.is_zero() {
            continue;
        }
        let norm = nsq
            .sqrt()
            .ok_or_else(|| EngineError::NeedsNumericFallback(nsq.symbolic()))?;
        basis.push(residual.scale(&norm.inv()?));
        let mut row = vec![FieldElement::zero(); vs.len()];
        row[k] = norm;
        coefficients.push(row);
    }
    Ok(GramSchmidt {
        rank: basis.len(),
        basis,
        coefficients,
    })
}

/// `ζ₁ = Σ_{j<0} (√2)ʲ e_j⊗e_j` on the given coset of both factors.
pub fn zeta1(coset: usize) -> StructuredVector {
    let r = FieldElement::inv_sqrt2();
    StructuredVector::from_strings(vec![
        GeometricString::diagonal(coset, -1, -1, None, r.clone(), r).expect("|ratio| < 1"),
    ])
}

/// `ζ₂ = e₀⊗e₀`.
pub fn zeta2(coset: usize) -> StructuredVector {
    StructuredVector::from_strings(vec![GeometricString::point(
        coset,
        0,
        coset,
        0,
        FieldElement::one(),
    )])
}

/// `ζ₃ = Σ_{j>0} (√2)^{−j} e_j⊗e_j`.
pub fn zeta3(coset: usize) -> StructuredVector {
    let r = FieldElement::inv_sqrt2();
    StructuredVector::from_strings(vec![
        GeometricString::diagonal(coset, 1, 1, None, r.clone(), r).expect("|ratio| < 1"),
    ])
}
