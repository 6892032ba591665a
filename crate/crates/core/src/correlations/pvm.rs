//! Projection-valued measures: exact ones as spectral combinations of a
//! structured unitary, numeric ones as explicit matrices.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::engine::BlockOp;
use crate::error::CorrelationError;
use crate::field::FieldElement;
use crate::linalg::CMatrix;

/// `E_b = Σ_t coeffs[b][t]·Vᵗ` for a unitary `V` with `V^order = I`.
///
/// Because `V^order = I`, the projections live in the group algebra of
/// `ℤ_order`, where idempotence, self-adjointness and completeness are
/// checked exactly on the coefficient vectors.
#[derive(Clone, Debug)]
pub struct ExactPvm {
    pub generator: BlockOp,
    pub order: usize,
    pub coeffs: Vec<Vec<FieldElement>>,
    powers: Vec<BlockOp>,
}

impl ExactPvm {
    fn new(generator: BlockOp, order: usize, coeffs: Vec<Vec<FieldElement>>) -> Self {
        let powers = (0..order as i64).map(|t| generator.pow(t)).collect();
        ExactPvm {
            generator,
            order,
            coeffs,
            powers,
        }
    }

    pub fn outcomes(&self) -> usize {
        self.coeffs.len()
    }

    /// `Vᵗ` for `t < order`.
    pub fn power(&self, t: usize) -> &BlockOp {
        &self.powers[t]
    }

    /// Appends zero projections until there are `k` outcomes.
    pub fn zero_extended(mut self, k: usize) -> Self {
        while self.coeffs.len() < k {
            self.coeffs.push(vec![FieldElement::zero(); self.order]);
        }
        self
    }

    fn convolve(&self, x: &[FieldElement], y: &[FieldElement]) -> Vec<FieldElement> {
        let n = self.order;
        let mut out = vec![FieldElement::zero(); n];
        for (s, xs) in x.iter().enumerate() {
            if xs.is_zero() {
                continue;
            }
            for (t, yt) in y.iter().enumerate() {
                out[(s + t) % n] += xs * yt;
            }
        }
        out
    }

    /// `V* = V⁻¹`, so `(Σ c_t Vᵗ)* = Σ conj(c_{−t}) Vᵗ`.
    fn adjoint_coeffs(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        let n = self.order;
        (0..n).map(|t| x[(n - t) % n].conj()).collect()
    }

    /// Exact PVM check: `V^order = I`, each `E_b` a self-adjoint idempotent,
    /// pairwise orthogonal, summing to the identity.
    pub fn validate(&self) -> Result<(), CorrelationError> {
        if !self.generator.is_unitary() || !self.generator.pow(self.order as i64).is_identity() {
            return Err(CorrelationError::InvalidPvm(format!(
                "generator does not satisfy V^{} = I",
                self.order
            )));
        }
        let mut sum = vec![FieldElement::zero(); self.order];
        for (b, e) in self.coeffs.iter().enumerate() {
            if e.len() != self.order {
                return Err(CorrelationError::InvalidPvm(format!("outcome {} has wrong length", b + 1)));
            }
            if &self.adjoint_coeffs(e) != e {
                return Err(CorrelationError::InvalidPvm(format!("E_{} not self-adjoint", b + 1)));
            }
            for (c, f) in self.coeffs.iter().enumerate() {
                let prod = self.convolve(e, f);
                let ok = if b == c {
                    &prod == e
                } else {
                    prod.iter().all(Zero::is_zero)
                };
                if !ok {
                    return Err(CorrelationError::InvalidPvm(format!(
                        "E_{} E_{} has the wrong value",
                        b + 1,
                        c + 1
                    )));
                }
            }
            for (s, x) in sum.iter_mut().zip(e) {
                *s += x;
            }
        }
        let mut id = vec![FieldElement::zero(); self.order];
        id[0] = FieldElement::one();
        if sum != id {
            return Err(CorrelationError::InvalidPvm("projections do not sum to I".into()));
        }
        Ok(())
    }
}

/// `E₂ = (I+S)/2`, `E₁ = (I−S)/2` for a self-adjoint unitary `S`.
pub fn pvm_from_involution(s: &BlockOp) -> Result<ExactPvm, CorrelationError> {
    if !s.is_unitary() || !s.pow(2).is_identity() {
        return Err(CorrelationError::NotInvolution);
    }
    let half = FieldElement::ratio(1, 2);
    let coeffs = vec![vec![half.clone(), -half.clone()], vec![half.clone(), half]];
    Ok(ExactPvm::new(s.clone(), 2, coeffs))
}

/// `E_b = (1/3)Σ_{t=0}^{2} ω^{−bt} Vᵗ`, `b = 1, 2, 3`, for a unitary with `V³ = I`.
pub fn pvm_from_order3(v: &BlockOp) -> Result<ExactPvm, CorrelationError> {
    if !v.is_unitary() || !v.pow(3).is_identity() {
        return Err(CorrelationError::NotOrder3);
    }
    let third = FieldElement::ratio(1, 3);
    let coeffs = (1..=3i64)
        .map(|b| (0..3i64).map(|t| &third * &FieldElement::omega_pow(-b * t)).collect())
        .collect();
    Ok(ExactPvm::new(v.clone(), 3, coeffs))
}

/// Explicit projection matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericPvm(pub Vec<CMatrix>);

impl NumericPvm {
    pub fn outcomes(&self) -> usize {
        self.0.len()
    }

    pub fn dim(&self) -> usize {
        self.0.first().map_or(0, |e| e.nrows())
    }

    pub fn zero_extended(mut self, k: usize) -> Self {
        let d = self.dim();
        while self.0.len() < k {
            self.0.push(CMatrix::zeros(d, d));
        }
        self
    }

    /// Largest violation among `‖E − E*‖, ‖E² − E‖, ‖E E′‖, ‖ΣE − I‖` (Frobenius).
    pub fn deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        let mut sum = CMatrix::zeros(d, d);
        for (b, e) in self.0.iter().enumerate() {
            worst = worst.max((e - e.adjoint()).norm());
            for (c, f) in self.0.iter().enumerate() {
                let prod = e * f;
                let dev = if b == c { (prod - e).norm() } else { prod.norm() };
                worst = worst.max(dev);
            }
            sum += e;
        }
        worst.max((sum - CMatrix::identity(d, d)).norm())
    }

    pub fn validate(&self, tol: f64) -> Result<(), CorrelationError> {
        if self.0.iter().any(|e| !e.is_square() || e.nrows() != self.dim()) {
            return Err(CorrelationError::Shape("PVM elements differ in size".into()));
        }
        let dev = self.deviation();
        if dev > tol {
            return Err(CorrelationError::InvalidPvm(format!("deviation {dev:.3e}")));
        }
        Ok(())
    }
}

const DENSE_TOL: f64 = 1e-10;

pub fn dense_pvm_from_involution(s: &CMatrix) -> Result<NumericPvm, CorrelationError> {
    let d = s.nrows();
    let id = CMatrix::identity(d, d);
    if !s.is_square() || (s * s - &id).norm() > DENSE_TOL || (s - s.adjoint()).norm() > DENSE_TOL {
        return Err(CorrelationError::NotInvolution);
    }
    let half = Complex64::new(0.5, 0.0);
    Ok(NumericPvm(vec![(&id - s) * half, (&id + s) * half]))
}

pub fn dense_pvm_from_order3(v: &CMatrix) -> Result<NumericPvm, CorrelationError> {
    let d = v.nrows();
    let id = CMatrix::identity(d, d);
    let v2 = v * v;
    if !v.is_square() || (&v2 * v - &id).norm() > DENSE_TOL || (v.adjoint() * v - &id).norm() > DENSE_TOL {
        return Err(CorrelationError::NotOrder3);
    }
    let powers = [id, v.clone(), v2];
    let third = 1.0 / 3.0;
    let out = (1..=3i64)
        .map(|b| {
            let mut e = CMatrix::zeros(d, d);
            for (t, p) in powers.iter().enumerate() {
                e += p * (FieldElement::omega_pow(-b * t as i64).to_c64() * third);
            }
            e
        })
        .collect();
    Ok(NumericPvm(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{builtin_operator, induced_sigma, BlockOp};
    use crate::words::{g, h};

    #[test]
    fn exact_pvms_validate() {
        let t = BlockOp::plain(builtin_operator("T").unwrap());
        let p = pvm_from_involution(&t).unwrap();
        p.validate().unwrap();
        p.clone().zero_extended(3).validate().unwrap();
        let v = induced_sigma(&h());
        pvm_from_order3(&v).unwrap().validate().unwrap();
        assert_eq!(
            pvm_from_involution(&v).unwrap_err(),
            CorrelationError::NotInvolution
        );
        assert_eq!(
            pvm_from_order3(&induced_sigma(&g())).unwrap_err(),
            CorrelationError::NotOrder3
        );
    }

    #[test]
    fn identity_involution() {
        let p = pvm_from_involution(&BlockOp::identity(1)).unwrap();
        // E₂ = I, E₁ = 0 once V = I is substituted
        let e1: FieldElement = p.coeffs[0].iter().cloned().fold(FieldElement::zero(), |a, b| a + b);
        let e2: FieldElement = p.coeffs[1].iter().cloned().fold(FieldElement::zero(), |a, b| a + b);
        assert!(e1.is_zero() && e2.is_one());
    }

    #[test]
    fn order3_reconstruction() {
        // Σ_b ω^b E_b = V: coefficient of V¹ is 1, the others 0
        let p = pvm_from_order3(&induced_sigma(&h())).unwrap();
        let mut rec = [FieldElement::zero(), FieldElement::zero(), FieldElement::zero()];
        for (b, e) in p.coeffs.iter().enumerate() {
            let w = FieldElement::omega_pow(b as i64 + 1);
            for (r, c) in rec.iter_mut().zip(e) {
                *r += &w * c;
            }
        }
        assert_eq!(rec, [FieldElement::zero(), FieldElement::one(), FieldElement::zero()]);
        // V = I: E₃ = I
        let id = pvm_from_order3(&BlockOp::identity(3)).unwrap();
        let total = |b: usize| id.coeffs[b].iter().cloned().fold(FieldElement::zero(), |a, x| a + x);
        assert!(total(0).is_zero() && total(1).is_zero() && total(2).is_one());
    }

    #[test]
    fn dense_order3_spectral() {
        let w = FieldElement::omega().to_c64();
        let v = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            w,
            w * w,
            Complex64::new(1.0, 0.0),
        ]));
        let p = dense_pvm_from_order3(&v).unwrap();
        p.validate(1e-12).unwrap();
        let mut e1 = CMatrix::zeros(3, 3);
        e1[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!((&p.0[0] - e1).norm() < 1e-14);
    }

    #[test]
    fn dense_involution_of_t() {
        let t = crate::engine::dense_operator(&BlockOp::plain(builtin_operator("T").unwrap()), 2).unwrap();
        let p = dense_pvm_from_involution(&t).unwrap();
        // E₂ projects onto j < 0, the first two sites
        for i in 0..4 {
            let expect = if i < 2 { 1.0 } else { 0.0 };
            assert_eq!(p.0[1][(i, i)].re, expect);
        }
        assert!(p.zero_extended(3).deviation() < 1e-15);
    }
}
