//! Cyclic truncation: `ℤ` is replaced by `ℤ_{2M}` (residues `−M..M−1`)
//! with wraparound index maps, so every operator stays a signed permutation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{builtin_operator, induced_sigma, BlockOp, BUILTIN_NAMES};
use super::vector::{apply, zeta1, zeta2, zeta3, StructuredVector};
use crate::error::EngineError;
use crate::linalg::CMatrix;
use crate::words::{g, h};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// `ℓ²(ℤ_{2M})` with `T, U, S₁, S₂, S₃` and `ζ₁, ζ₂, ζ₃`.
    Plain,
    /// `ℂ³⊗ℓ²(ℤ_{2M})` with `σ(g), σ(h)` and `ζ₁, ζ₂, ξ₃, ξ₄`.
    Induced,
}

impl ModelKind {
    pub fn cosets(self) -> usize {
        match self {
            ModelKind::Plain => 1,
            ModelKind::Induced => 3,
        }
    }
}

/// Finite model produced by [`truncate_cyclic`]. Vectors of
/// `ℂ^d ⊗ ℂ^d` are stored as `d×d` matrices `V` with `v = Σ V[(p,q)] e_p⊗e_q`.
#[derive(Clone, Debug)]
pub struct DenseModel {
    pub kind: ModelKind,
    pub window: i64,
    pub dim: usize,
    pub operators: BTreeMap<String, CMatrix>,
    pub vectors: BTreeMap<String, CMatrix>,
    /// Squared norm of each vector's in-window part before renormalization.
    pub raw_norm_sqr: BTreeMap<String, f64>,
}

impl DenseModel {
    pub fn operator(&self, name: &str) -> Result<&CMatrix, EngineError> {
        self.operators
            .get(name)
            .ok_or_else(|| EngineError::UnknownOperator(name.to_string()))
    }

    pub fn vector(&self, name: &str) -> Result<&CMatrix, EngineError> {
        self.vectors
            .get(name)
            .ok_or_else(|| EngineError::UnknownOperator(name.to_string()))
    }

    /// Vector names in the order used for the isometry columns.
    pub fn vector_order(&self) -> Vec<&'static str> {
        match self.kind {
            ModelKind::Plain => vec!["zeta1", "zeta2", "zeta3"],
            ModelKind::Induced => vec!["zeta1", "zeta2", "xi3", "xi4"],
        }
    }
}

fn wrap(j: i64, m: i64) -> i64 {
    (j + m).rem_euclid(2 * m) - m
}

fn position(coset: usize, j: i64, m: i64) -> usize {
    coset * (2 * m) as usize + (wrap(j, m) + m) as usize
}

/// Dense matrix of a block operator with its index maps reduced mod `2M`.
pub fn dense_operator(op: &BlockOp, m: i64) -> Result<CMatrix, EngineError> {
    if m < 2 {
        return Err(EngineError::Window(m));
    }
    let d = op.cosets() * (2 * m) as usize;
    let mut out = CMatrix::zeros(d, d);
    for (c, block) in op.blocks.iter().enumerate() {
        for j in -m..m {
            let (s, k) = block.apply_basis(j);
            out[(position(op.perm[c], k, m), position(c, j, m))] = s.to_c64();
        }
    }
    Ok(out)
}

/// In-window part of a structured vector, before renormalization.
pub fn dense_vector(v: &StructuredVector, m: i64, cosets: usize) -> Result<CMatrix, EngineError> {
    if m < 2 {
        return Err(EngineError::Window(m));
    }
    let d = cosets * (2 * m) as usize;
    let mut out = CMatrix::zeros(d, d);
    for s in &v.strings {
        if s.left.coset >= cosets || s.right.coset >= cosets {
            return Err(EngineError::CosetMismatch {
                op: cosets,
                coset: s.left.coset.max(s.right.coset),
            });
        }
        let (l, r) = s.effective_maps();
        // parameters t with both sites in −M..M−1
        let range = |map: &super::ops::AffineIndexMap| {
            if map.sign == 1 {
                (-m - map.offset, m - 1 - map.offset)
            } else {
                (map.offset - m + 1, map.offset + m)
            }
        };
        let (la, lb) = range(&l);
        let (ra, rb) = range(&r);
        let lo = la.max(ra).max(0);
        let mut hi = lb.min(rb);
        if let Some(n) = s.count {
            hi = hi.min(n as i64 - 1);
        }
        if hi < lo {
            continue;
        }
        let ratio = s.ratio.to_c64();
        let mut coef = s.head.to_c64() * ratio.powi(lo as i32);
        for t in lo..=hi {
            let p = position(s.left.coset, l.apply(t), m);
            let q = position(s.right.coset, r.apply(t), m);
            out[(p, q)] += coef;
            coef *= ratio;
        }
    }
    Ok(out)
}

/// Cyclic model at window `M` (`M ≥ 2`).
pub fn truncate_cyclic(m: i64, kind: ModelKind) -> Result<DenseModel, EngineError> {
    if m < 2 {
        return Err(EngineError::Window(m));
    }
    let mut operators = BTreeMap::new();
    let exact_vectors: Vec<(&str, StructuredVector)> = match kind {
        ModelKind::Plain => {
            for name in BUILTIN_NAMES {
                let op = BlockOp::plain(builtin_operator(name)?);
                operators.insert(name.to_string(), dense_operator(&op, m)?);
            }
            vec![("zeta1", zeta1(0)), ("zeta2", zeta2(0)), ("zeta3", zeta3(0))]
        }
        ModelKind::Induced => {
            let sg = induced_sigma(&g());
            let sh = induced_sigma(&h());
            operators.insert("sigma_g".to_string(), dense_operator(&sg, m)?);
            operators.insert("sigma_h".to_string(), dense_operator(&sh, m)?);
            let z1 = zeta1(0);
            let xi3 = apply(Some(&sh), Some(&sh), &z1)?;
            let xi4 = apply(Some(&sg), Some(&sg), &xi3)?;
            vec![("zeta1", z1), ("zeta2", zeta2(0)), ("xi3", xi3), ("xi4", xi4)]
        }
    };
    let mut vectors = BTreeMap::new();
    let mut raw_norm_sqr = BTreeMap::new();
    for (name, v) in exact_vectors {
        let dv = dense_vector(&v, m, kind.cosets())?;
        let nsq = dv.norm_squared();
        raw_norm_sqr.insert(name.to_string(), nsq);
        vectors.insert(name.to_string(), dv.unscale(nsq.sqrt()));
    }
    Ok(DenseModel {
        kind,
        window: m,
        dim: kind.cosets() * (2 * m) as usize,
        operators,
        vectors,
        raw_norm_sqr,
    })
}

/// Row-major complex matrix as pairs of doubles:
/// `{"rows": r, "cols": c, "data": [[re, im], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for DenseMatrix {
    fn from(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        DenseMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl DenseMatrix {
    pub fn to_matrix(&self) -> Option<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return None;
        }
        Some(CMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|&[re, im]| Complex64::new(re, im)),
        ))
    }
}

/// JSON form of a [`DenseModel`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseModelJson {
    pub kind: ModelKind,
    pub window: i64,
    pub dim: usize,
    pub operators: BTreeMap<String, DenseMatrix>,
    pub vectors: BTreeMap<String, DenseMatrix>,
    pub raw_norm_sqr: BTreeMap<String, f64>,
}

impl From<&DenseModel> for DenseModelJson {
    fn from(m: &DenseModel) -> Self {
        DenseModelJson {
            kind: m.kind,
            window: m.window,
            dim: m.dim,
            operators: m.operators.iter().map(|(k, v)| (k.clone(), v.into())).collect(),
            vectors: m.vectors.iter().map(|(k, v)| (k.clone(), v.into())).collect(),
            raw_norm_sqr: m.raw_norm_sqr.clone(),
        }
    }
}
