//! Tensor-product models and their assembly into correlation tables.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::pvm::{
    dense_pvm_from_involution, dense_pvm_from_order3, pvm_from_involution, pvm_from_order3,
    ExactPvm, NumericPvm,
};
use super::table::{all_keys, CorrelationTable};
use crate::engine::{
    apply, builtin_operator, gram_schmidt, induced_sigma, inner, truncate_cyclic, zeta1, zeta2,
    zeta3, BlockOp, GramSchmidt, ModelKind, StructuredVector,
};
use crate::error::CorrelationError;
use crate::field::FieldElement;
use crate::linalg::{CMatrix, ExactMatrix};
use crate::words::{g, h};

/// Exact model: PVMs per input on each side and orthonormal vectors `ζ_1..ζ_n`
/// (the columns of the isometry `W`).
#[derive(Clone, Debug)]
pub struct ExactModel {
    pub alice: Vec<ExactPvm>,
    pub bob: Vec<ExactPvm>,
    pub vectors: Vec<StructuredVector>,
}

impl ExactModel {
    /// `W*(X⊗Y)W` with entry `(i, j) = ⟨(X⊗Y)ζ_j, ζ_i⟩`.
    pub fn compress(
        &self,
        left: Option<&BlockOp>,
        right: Option<&BlockOp>,
    ) -> Result<ExactMatrix, CorrelationError> {
        compress_vectors(&self.vectors, left, right)
    }
}

pub(crate) fn compress_vectors(
    vs: &[StructuredVector],
    left: Option<&BlockOp>,
    right: Option<&BlockOp>,
) -> Result<ExactMatrix, CorrelationError> {
    let n = vs.len();
    let mut out = ExactMatrix::zeros(n, n);
    for j in 0..n {
        let img = apply(left, right, &vs[j])?;
        for i in 0..n {
            out[(i, j)] = inner(&img, &vs[i])?;
        }
    }
    Ok(out)
}

fn check_orthonormal(vs: &[StructuredVector]) -> Result<(), CorrelationError> {
    for (i, v) in vs.iter().enumerate() {
        for (j, w) in vs.iter().enumerate() {
            let ip = inner(v, w)?;
            let ok = if i == j { ip.is_one() } else { ip.is_zero() };
            if !ok {
                return Err(CorrelationError::NotOrthonormal);
            }
        }
    }
    Ok(())
}

fn check_outcomes(k_a: &[usize], k_b: &[usize]) -> Result<usize, CorrelationError> {
    let k = k_a.first().copied().unwrap_or(0);
    if k_a.is_empty() || k_a.len() != k_b.len() || k_a.iter().chain(k_b).any(|&x| x != k) {
        return Err(CorrelationError::Shape(
            "both parties need the same number of inputs and outcomes".into(),
        ));
    }
    Ok(k)
}

/// Exact table. Each `⟨(Vˢ⊗Wᵗ)ζ_j, ζ_i⟩` is evaluated once and reused by
/// every outcome pair.
pub fn assemble_exact(model: &ExactModel) -> Result<CorrelationTable<FieldElement>, CorrelationError> {
    let ka: Vec<usize> = model.alice.iter().map(ExactPvm::outcomes).collect();
    let kb: Vec<usize> = model.bob.iter().map(ExactPvm::outcomes).collect();
    let k = check_outcomes(&ka, &kb)?;
    let m = model.alice.len();
    for p in model.alice.iter().chain(&model.bob) {
        p.validate()?;
    }
    check_orthonormal(&model.vectors)?;
    let n = model.vectors.len();
    let mut gram: BTreeMap<(usize, usize, usize, usize), ExactMatrix> = BTreeMap::new();
    for (x, pa) in model.alice.iter().enumerate() {
        for (y, pb) in model.bob.iter().enumerate() {
            for s in 0..pa.order {
                for t in 0..pb.order {
                    let g = compress_vectors(&model.vectors, Some(pa.power(s)), Some(pb.power(t)))?;
                    gram.insert((x, y, s, t), g);
                }
            }
        }
    }
    let mut entries = BTreeMap::new();
    for (a, b, x, y) in all_keys(m, k) {
        let pa = &model.alice[x - 1];
        let pb = &model.bob[y - 1];
        let mut p = ExactMatrix::zeros(n, n);
        for (s, cs) in pa.coeffs[a - 1].iter().enumerate() {
            if cs.is_zero() {
                continue;
            }
            for (t, ct) in pb.coeffs[b - 1].iter().enumerate() {
                if ct.is_zero() {
                    continue;
                }
                let c = cs * ct;
                p += gram[&(x - 1, y - 1, s, t)].map(|z| &z * &c);
            }
        }
        entries.insert((a, b, x, y), p);
    }
    CorrelationTable::new(n, m, k, entries)
}

/// Numeric model on `ℂ^{d_A} ⊗ ℂ^{d_B}`. Vector `j` is stored as the
/// `d_A×d_B` matrix `V_j` with `ζ_j = Σ V_j[(p,q)] e_p⊗e_q`.
#[derive(Clone, Debug)]
pub struct NumericModel {
    pub alice: Vec<NumericPvm>,
    pub bob: Vec<NumericPvm>,
    pub vectors: Vec<CMatrix>,
}

pub const NUMERIC_TOL: f64 = 1e-10;

impl NumericModel {
    /// Columns of `w` (`d_A·d_B × n`) reshaped with the left index major.
    pub fn from_isometry(
        alice: Vec<NumericPvm>,
        bob: Vec<NumericPvm>,
        w: &CMatrix,
    ) -> Result<Self, CorrelationError> {
        let da = alice.first().map_or(0, NumericPvm::dim);
        let db = bob.first().map_or(0, NumericPvm::dim);
        if w.nrows() != da * db {
            return Err(CorrelationError::Shape(format!(
                "isometry has {} rows, expected {}",
                w.nrows(),
                da * db
            )));
        }
        let vectors = (0..w.ncols())
            .map(|j| CMatrix::from_fn(da, db, |p, q| w[(p * db + q, j)]))
            .collect();
        Ok(NumericModel { alice, bob, vectors })
    }

    pub fn dims(&self) -> (usize, usize) {
        (
            self.alice.first().map_or(0, NumericPvm::dim),
            self.bob.first().map_or(0, NumericPvm::dim),
        )
    }

    /// `‖W*W − I‖_F`.
    pub fn isometry_deviation(&self) -> f64 {
        let n = self.vectors.len();
        let gram = CMatrix::from_fn(n, n, |i, j| self.vectors[i].dotc(&self.vectors[j]));
        (gram - CMatrix::identity(n, n)).norm()
    }
}

/// Numeric table via `P_ij = Σ (E V_j) ⊙ (conj(V_i) F)`, which is
/// `⟨(E⊗F)ζ_j, ζ_i⟩` without forming `E⊗F`.
pub fn assemble_numeric(model: &NumericModel) -> Result<CorrelationTable<Complex64>, CorrelationError> {
    let ka: Vec<usize> = model.alice.iter().map(NumericPvm::outcomes).collect();
    let kb: Vec<usize> = model.bob.iter().map(NumericPvm::outcomes).collect();
    let k = check_outcomes(&ka, &kb)?;
    let m = model.alice.len();
    let (da, db) = model.dims();
    for p in model.alice.iter().chain(&model.bob) {
        p.validate(NUMERIC_TOL)?;
    }
    if model.alice.iter().any(|p| p.dim() != da) || model.bob.iter().any(|p| p.dim() != db) {
        return Err(CorrelationError::Shape("PVM sizes differ between inputs".into()));
    }
    if model.vectors.iter().any(|v| v.nrows() != da || v.ncols() != db) {
        return Err(CorrelationError::Shape("vector shape does not match the PVMs".into()));
    }
    let dev = model.isometry_deviation();
    if dev > NUMERIC_TOL {
        return Err(CorrelationError::NotIsometry(dev));
    }
    let n = model.vectors.len();
    let left: Vec<((usize, usize), Vec<CMatrix>)> = (1..=m)
        .flat_map(|x| (1..=k).map(move |a| (a, x)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(a, x)| {
            let e = &model.alice[x - 1].0[a - 1];
            ((a, x), model.vectors.iter().map(|v| e * v).collect())
        })
        .collect();
    let right: Vec<((usize, usize), Vec<CMatrix>)> = (1..=m)
        .flat_map(|y| (1..=k).map(move |b| (b, y)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(b, y)| {
            let f = &model.bob[y - 1].0[b - 1];
            ((b, y), model.vectors.iter().map(|v| v.conjugate() * f).collect())
        })
        .collect();
    let left: BTreeMap<_, _> = left.into_iter().collect();
    let right: BTreeMap<_, _> = right.into_iter().collect();
    let entries: BTreeMap<_, _> = all_keys(m, k)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(a, b, x, y)| {
            let ev = &left[&(a, x)];
            let vf = &right[&(b, y)];
            let p = DMatrix::from_fn(n, n, |i, j| {
                ev[j].iter().zip(vf[i].iter()).map(|(u, w)| u * w).sum::<Complex64>()
            });
            ((a, b, x, y), p)
        })
        .collect();
    CorrelationTable::new(n, m, k, entries)
}

/// Exact model behind the three-input witness: `S₁, S₂, S₃` on both sides,
/// vectors `ζ₁, ζ₂, ζ₃`.
pub fn w32_exact_model() -> Result<ExactModel, CorrelationError> {
    let pvms = ["S1", "S2", "S3"]
        .iter()
        .map(|name| pvm_from_involution(&BlockOp::plain(builtin_operator(name)?)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExactModel {
        alice: pvms.clone(),
        bob: pvms,
        vectors: vec![zeta1(0), zeta2(0), zeta3(0)],
    })
}

/// `[ζ₁, ζ₂, ξ₃, ξ₄]` with `ξ₃ = (σ(h)⊗σ(h))ζ₁`, `ξ₄ = (σ(g)⊗σ(g))ξ₃`.
pub fn w23_raw_vectors() -> Result<Vec<StructuredVector>, CorrelationError> {
    let sg = induced_sigma(&g());
    let sh = induced_sigma(&h());
    let z1 = zeta1(0);
    let xi3 = apply(Some(&sh), Some(&sh), &z1)?;
    let xi4 = apply(Some(&sg), Some(&sg), &xi3)?;
    Ok(vec![z1, zeta2(0), xi3, xi4])
}

/// Exact model behind the three-outcome witness: input 1 measures `σ(g)`
/// (third outcome zero), input 2 the order-three `σ(h)`; the vectors are the
/// Gram–Schmidt basis of `ζ₁, ζ₂, ξ₃, ξ₄`.
pub fn w23_exact_model() -> Result<(ExactModel, GramSchmidt), CorrelationError> {
    let sg = induced_sigma(&g());
    let sh = induced_sigma(&h());
    let pvms = vec![pvm_from_involution(&sg)?.zero_extended(3), pvm_from_order3(&sh)?];
    let gs = gram_schmidt(&w23_raw_vectors()?)?;
    Ok((
        ExactModel {
            alice: pvms.clone(),
            bob: pvms,
            vectors: gs.basis.clone(),
        },
        gs,
    ))
}

/// Cyclic truncation of [`w32_exact_model`] at window `M`.
pub fn cyclic_w32_model(m: i64) -> Result<NumericModel, CorrelationError> {
    let model = truncate_cyclic(m, ModelKind::Plain)?;
    let pvms = ["S1", "S2", "S3"]
        .iter()
        .map(|name| dense_pvm_from_involution(model.operator(name)?))
        .collect::<Result<Vec<_>, _>>()?;
    let vectors = model
        .vector_order()
        .iter()
        .map(|v| model.vector(v).cloned())
        .collect::<Result<_, _>>()?;
    Ok(NumericModel {
        alice: pvms.clone(),
        bob: pvms,
        vectors,
    })
}

/// Cyclic truncation of [`w23_exact_model`] at window `M` (per-side dimension `6M`).
pub fn cyclic_w23_model(m: i64) -> Result<NumericModel, CorrelationError> {
    let model = truncate_cyclic(m, ModelKind::Induced)?;
    let pvms = vec![
        dense_pvm_from_involution(model.operator("sigma_g")?)?.zero_extended(3),
        dense_pvm_from_order3(model.operator("sigma_h")?)?,
    ];
    let vectors = model
        .vector_order()
        .iter()
        .map(|v| model.vector(v).cloned())
        .collect::<Result<_, _>>()?;
    Ok(NumericModel {
        alice: pvms.clone(),
        bob: pvms,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn w32_table_combination_is_observable_product() {
        let model = w32_exact_model().unwrap();
        let table = assemble_exact(&model).unwrap();
        table.check_invariants(0.0).unwrap();
        let s1 = BlockOp::plain(builtin_operator("S1").unwrap());
        assert_eq!(table.combination(1, 1), model.compress(Some(&s1), Some(&s1)).unwrap());
    }

    #[test]
    fn w23_third_outcome_vanishes() {
        let (model, gs) = w23_exact_model().unwrap();
        assert_eq!(gs.rank, 4);
        let table = assemble_exact(&model).unwrap();
        table.check_invariants(0.0).unwrap();
        for b in 1..=3 {
            for y in 1..=2 {
                assert!(table.get(3, b, 1, y).iter().all(|z| z.is_zero()));
                assert!(table.get(b, 3, y, 1).iter().all(|z| z.is_zero()));
            }
        }
    }

    #[test]
    fn numeric_matches_exact_shape() {
        let t = assemble_numeric(&cyclic_w32_model(4).unwrap()).unwrap();
        t.check_invariants(1e-10).unwrap();
        assert_eq!((t.n, t.m, t.k), (3, 3, 2));
        let exact = assemble_exact(&w32_exact_model().unwrap()).unwrap();
        let dist = (t.combination(3, 3) - exact.combination(3, 3).map(|z| z.to_c64())).norm();
        assert!(dist < 0.5);
    }

    #[test]
    fn non_isometry_rejected() {
        let mut model = cyclic_w32_model(2).unwrap();
        model.vectors[1] = model.vectors[0].clone();
        assert!(matches!(
            assemble_numeric(&model),
            Err(CorrelationError::NotIsometry(_))
        ));
        let mut exact = w32_exact_model().unwrap();
        exact.vectors[2] = exact.vectors[0].clone();
        assert_eq!(
            assemble_exact(&exact).unwrap_err(),
            CorrelationError::NotOrthonormal
        );
    }

    #[test]
    fn from_isometry_reshapes_row_major() {
        let p = NumericPvm(vec![CMatrix::identity(2, 2), CMatrix::zeros(2, 2)]);
        let mut w = CMatrix::zeros(4, 1);
        w[(1, 0)] = Complex64::one();
        let m = NumericModel::from_isometry(vec![p.clone()], vec![p], &w).unwrap();
        // row 1 = e_0 ⊗ e_1
        assert_eq!(m.vectors[0][(0, 1)], Complex64::one());
    }
}
