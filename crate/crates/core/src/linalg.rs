//! Small dense helpers shared by the exact and the double-precision paths.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::field::FieldElement;

pub type ExactMatrix = DMatrix<FieldElement>;
pub type CMatrix = DMatrix<Complex64>;

/// Scalar type of a correlation table: exact field elements or complex doubles.
pub trait TableScalar:
    nalgebra::Scalar
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
{
    /// `true` for exact arithmetic; tolerances are ignored then.
    const EXACT: bool;
    const FIELD_NAME: &'static str;

    fn conj(&self) -> Self;
    fn from_field(x: &FieldElement) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Zero test: exact, or `|x| ≤ tol`.
    fn negligible(&self, tol: f64) -> bool;
    fn is_psd(m: &DMatrix<Self>, tol: f64) -> bool;
}

impl TableScalar for FieldElement {
    const EXACT: bool = true;
    const FIELD_NAME: &'static str = "exact";

    fn conj(&self) -> Self {
        FieldElement::conj(self)
    }
    fn from_field(x: &FieldElement) -> Self {
        x.clone()
    }
    fn to_c64(&self) -> Complex64 {
        FieldElement::to_c64(self)
    }
    fn negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn is_psd(m: &DMatrix<Self>, _tol: f64) -> bool {
        exact_psd(m)
    }
}

impl TableScalar for Complex64 {
    const EXACT: bool = false;
    const FIELD_NAME: &'static str = "complex128";

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_field(x: &FieldElement) -> Self {
        x.to_c64()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn is_psd(m: &DMatrix<Self>, tol: f64) -> bool {
        if !is_hermitian(m, tol) {
            return false;
        }
        let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::new(herm);
        eig.eigenvalues.iter().all(|&l| l >= -tol)
    }
}

pub fn adjoint<T: TableScalar>(m: &DMatrix<T>) -> DMatrix<T> {
    DMatrix::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

/// `Σ |mᵢⱼ|²`, returned in the scalar type so that exact zero stays exact.
pub fn frobenius_sqr<T: TableScalar>(m: &DMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, x| acc + x.clone() * x.conj())
}

pub fn is_hermitian<T: TableScalar>(m: &DMatrix<T>, tol: f64) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| {
            (0..m.ncols()).all(|j| (m[(i, j)].clone() - m[(j, i)].conj()).negligible(tol))
        })
}

pub fn all_negligible<T: TableScalar>(m: &DMatrix<T>, tol: f64) -> bool {
    m.iter().all(|x| x.negligible(tol))
}

pub fn max_abs<T: TableScalar>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|x| x.to_c64().norm()).fold(0.0, f64::max)
}

/// `‖m‖ ≤ 1`, decided through positivity of `I − m*m`.
pub fn is_contraction<T: TableScalar>(m: &DMatrix<T>, tol: f64) -> bool {
    let gram = adjoint(m) * m;
    let id = DMatrix::<T>::identity(gram.nrows(), gram.ncols());
    T::is_psd(&(id - gram), tol)
}

pub fn to_complex_matrix<T: TableScalar>(m: &DMatrix<T>) -> CMatrix {
    m.map(|x| x.to_c64())
}

/// Exact positive-semidefiniteness of a Hermitian matrix over ℚ(√2, ω)
/// via symmetric Gaussian elimination with exact pivot signs.
pub fn exact_psd(m: &ExactMatrix) -> bool {
    if !is_hermitian(m, 0.0) {
        return false;
    }
    let n = m.nrows();
    let mut a = m.clone();
    for k in 0..n {
        let d = a[(k, k)].clone();
        match d.real_sign() {
            None | Some(Ordering::Less) => return false,
            Some(Ordering::Equal) => {
                if ((k + 1)..n).any(|j| !a[(k, j)].is_zero()) {
                    return false;
                }
            }
            Some(Ordering::Greater) => {
                let inv = d.inv().expect("pivot nonzero");
                for i in (k + 1)..n {
                    if a[(i, k)].is_zero() {
                        continue;
                    }
                    let f = &a[(i, k)] * &inv;
                    for j in (k + 1)..n {
                        let t = &f * &a[(k, j)];
                        a[(i, j)] = &a[(i, j)] - &t;
                    }
                }
            }
        }
    }
    true
}

/// Exact `n×2` isometry onto the first two coordinates.
pub fn leading_isometry<T: TableScalar>(n: usize) -> DMatrix<T> {
    DMatrix::from_fn(n, 2, |i, j| if i == j { T::one() } else { T::zero() })
}

/// `Q* m Q` for the leading-corner isometry `Q: ℂ² → ℂⁿ`.
pub fn compress2<T: TableScalar>(m: &DMatrix<T>) -> DMatrix<T> {
    m.view((0, 0), (2, 2)).into_owned()
}
