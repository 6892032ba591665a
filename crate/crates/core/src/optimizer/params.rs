//! Finite-dimensional model parameters: observables as labelled unitary
//! frames, plus the isometry whose columns are the vectors `η_i`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::correlations::{NumericModel, NumericPvm, WitnessId};
use crate::engine::DenseMatrix;
use crate::error::OptimizerError;
use crate::linalg::CMatrix;

/// `E_a = Q·diag(labels == a)·Q*` for a unitary frame `Q`.
///
/// The frame moves by `Q ← Q·exp(K)` with `K` skew-Hermitian, which keeps
/// the eigenvalue profile (the labels) fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub frame: CMatrix,
    /// Outcome (0-based) of each frame column.
    pub labels: Vec<usize>,
    pub outcomes: usize,
}

impl Observable {
    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn projection(&self, a: usize) -> CMatrix {
        let d = self.dim();
        let mut e = CMatrix::zeros(d, d);
        for (c, &l) in self.labels.iter().enumerate() {
            if l == a {
                let q = self.frame.column(c);
                e += q * q.adjoint();
            }
        }
        e
    }

    pub fn projections(&self) -> Vec<CMatrix> {
        (0..self.outcomes).map(|a| self.projection(a)).collect()
    }

    pub fn pvm(&self) -> NumericPvm {
        NumericPvm(self.projections())
    }

    /// `diag(labels == a)` as a 0/1 vector.
    pub fn indicator(&self, a: usize) -> Vec<f64> {
        self.labels.iter().map(|&l| if l == a { 1.0 } else { 0.0 }).collect()
    }

    /// Frame and labels from explicit projections (eigenvectors with eigenvalue > 1/2).
    pub fn from_projections(pvm: &NumericPvm) -> Result<Observable, OptimizerError> {
        let d = pvm.dim();
        let mut cols = Vec::with_capacity(d);
        let mut labels = Vec::with_capacity(d);
        for (a, e) in pvm.0.iter().enumerate() {
            let herm = (e + e.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = herm.symmetric_eigen();
            for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
                if lambda > 0.5 {
                    cols.push(eig.eigenvectors.column(c).into_owned());
                    labels.push(a);
                }
            }
        }
        if cols.len() != d {
            return Err(OptimizerError::Dimension(format!(
                "projections have total rank {} on a space of dimension {d}",
                cols.len()
            )));
        }
        let frame = polar(&CMatrix::from_columns(&cols));
        Ok(Observable {
            frame,
            labels,
            outcomes: pvm.outcomes(),
        })
    }

    /// Haar-random frame with the given labels.
    pub fn random<R: Rng + ?Sized>(labels: Vec<usize>, outcomes: usize, rng: &mut R) -> Observable {
        let d = labels.len();
        Observable {
            frame: polar(&gaussian(d, d, rng)),
            labels,
            outcomes,
        }
    }

    /// Block `diag(Q, I)` on `ℂ^{d'}`; the new coordinates get outcome 0.
    pub fn padded(&self, d: usize) -> Observable {
        let old = self.dim();
        let mut frame = CMatrix::identity(d, d);
        frame.view_mut((0, 0), (old, old)).copy_from(&self.frame);
        let mut labels = self.labels.clone();
        labels.resize(d, 0);
        Observable {
            frame,
            labels,
            outcomes: self.outcomes,
        }
    }
}

/// Parameters of a `d_A × d_B` model for one witness.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub witness: WitnessId,
    pub da: usize,
    pub db: usize,
    pub alice: Vec<Observable>,
    pub bob: Vec<Observable>,
    /// `d_A·d_B × n`, row `p·d_B + q` ↔ `e_p⊗e_q`. An isometry when
    /// `d_A·d_B ≥ n`, otherwise a co-isometry (`WW* = I`).
    pub w: CMatrix,
}

pub(crate) fn gaussian<R: Rng + ?Sized>(r: usize, c: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Nearest partial isometry `UV*` from the SVD `A = UΣV*`.
pub fn polar(a: &CMatrix) -> CMatrix {
    let svd = a.clone().svd(true, true);
    svd.u.expect("left vectors") * svd.v_t.expect("right vectors")
}

/// `exp(K)` for skew-Hermitian `K` via the eigenvectors of the Hermitian `−iK`.
pub fn exp_skew(k: &CMatrix) -> CMatrix {
    let h = k * Complex64::new(0.0, -1.0);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(0.0, l).exp()),
    );
    let u = &eig.eigenvectors;
    u * CMatrix::from_diagonal(&phases) * u.adjoint()
}

impl ModelParams {
    pub fn n(&self) -> usize {
        self.w.ncols()
    }

    /// `(n, inputs, outcomes)` of the witness.
    fn witness_shape(witness: WitnessId) -> (usize, usize, usize) {
        witness.shape()
    }

    /// Random frames and isometry. Labels are drawn uniformly; for the
    /// three-outcome witness, input 1 uses only outcomes 1 and 2 (its third
    /// outcome is constrained to vanish).
    pub fn random<R: Rng + ?Sized>(witness: WitnessId, da: usize, db: usize, rng: &mut R) -> Self {
        let (n, m, k) = Self::witness_shape(witness);
        let side = |d: usize, rng: &mut R| -> Vec<Observable> {
            (0..m)
                .map(|x| {
                    let allowed = if witness == WitnessId::W23 && x == 0 { 2 } else { k };
                    let labels = (0..d).map(|_| rng.random_range(0..allowed)).collect();
                    Observable::random(labels, k, rng)
                })
                .collect()
        };
        let alice = side(da, rng);
        let bob = side(db, rng);
        let w = polar(&gaussian(da * db, n, rng));
        ModelParams {
            witness,
            da,
            db,
            alice,
            bob,
            w,
        }
    }

    /// Frames from the projections of a numeric model, `W` from its vectors.
    pub fn from_numeric_model(witness: WitnessId, model: &NumericModel) -> Result<Self, OptimizerError> {
        let (n, m, k) = Self::witness_shape(witness);
        let (da, db) = model.dims();
        if model.alice.len() != m || model.bob.len() != m || model.vectors.len() != n {
            return Err(OptimizerError::Dimension(format!(
                "{witness} needs {m} inputs per side and {n} vectors"
            )));
        }
        let conv = |ps: &[NumericPvm]| -> Result<Vec<Observable>, OptimizerError> {
            ps.iter()
                .map(|p| {
                    if p.outcomes() != k {
                        return Err(OptimizerError::Dimension(format!("{witness} needs {k} outcomes")));
                    }
                    Observable::from_projections(p)
                })
                .collect()
        };
        let mut w = CMatrix::zeros(da * db, n);
        for (j, v) in model.vectors.iter().enumerate() {
            for p in 0..da {
                for q in 0..db {
                    w[(p * db + q, j)] = v[(p, q)];
                }
            }
        }
        Ok(ModelParams {
            witness,
            da,
            db,
            alice: conv(&model.alice)?,
            bob: conv(&model.bob)?,
            w,
        })
    }

    /// Vectors `V_j` as `d_A × d_B` matrices.
    pub fn vectors(&self) -> Vec<CMatrix> {
        (0..self.n())
            .map(|j| CMatrix::from_fn(self.da, self.db, |p, q| self.w[(p * self.db + q, j)]))
            .collect()
    }

    pub fn to_numeric_model(&self) -> NumericModel {
        NumericModel {
            alice: self.alice.iter().map(Observable::pvm).collect(),
            bob: self.bob.iter().map(Observable::pvm).collect(),
            vectors: self.vectors(),
        }
    }

    /// Embedding into `d_A' × d_B'`: frames extended by the identity, `W`
    /// extended by zero rows. The correlation table is unchanged.
    pub fn padded(&self, da: usize, db: usize) -> Result<ModelParams, OptimizerError> {
        if da < self.da || db < self.db {
            return Err(OptimizerError::Dimension(format!(
                "cannot pad {}x{} down to {da}x{db}",
                self.da, self.db
            )));
        }
        let mut w = CMatrix::zeros(da * db, self.n());
        for p in 0..self.da {
            for q in 0..self.db {
                w.row_mut(p * db + q).copy_from(&self.w.row(p * self.db + q));
            }
        }
        Ok(ModelParams {
            witness: self.witness,
            da,
            db,
            alice: self.alice.iter().map(|o| o.padded(da)).collect(),
            bob: self.bob.iter().map(|o| o.padded(db)).collect(),
            w,
        })
    }

    /// Worst PVM deviation over all observables.
    pub fn pvm_deviation(&self) -> f64 {
        self.alice
            .iter()
            .chain(&self.bob)
            .map(|o| o.pvm().deviation())
            .fold(0.0, f64::max)
    }

    /// `‖W*W − I‖` (isometry) or `‖WW* − I‖` (co-isometry).
    pub fn isometry_deviation(&self) -> f64 {
        let (r, c) = self.w.shape();
        if r >= c {
            (self.w.adjoint() * &self.w - CMatrix::identity(c, c)).norm()
        } else {
            (&self.w * self.w.adjoint() - CMatrix::identity(r, r)).norm()
        }
    }
}

/// JSON checkpoint of a [`ModelParams`], matrices in the dense container.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCheckpoint {
    pub witness: WitnessId,
    pub da: usize,
    pub db: usize,
    pub alice: Vec<ObservableJson>,
    pub bob: Vec<ObservableJson>,
    pub w: DenseMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableJson {
    pub frame: DenseMatrix,
    pub labels: Vec<usize>,
    pub outcomes: usize,
}

impl From<&ModelParams> for ModelCheckpoint {
    fn from(p: &ModelParams) -> Self {
        let obs = |o: &Observable| ObservableJson {
            frame: (&o.frame).into(),
            labels: o.labels.clone(),
            outcomes: o.outcomes,
        };
        ModelCheckpoint {
            witness: p.witness,
            da: p.da,
            db: p.db,
            alice: p.alice.iter().map(obs).collect(),
            bob: p.bob.iter().map(obs).collect(),
            w: (&p.w).into(),
        }
    }
}

impl ModelCheckpoint {
    pub fn to_params(&self) -> Result<ModelParams, OptimizerError> {
        let bad = || OptimizerError::Dimension("malformed checkpoint matrix".into());
        let obs = |o: &ObservableJson| -> Result<Observable, OptimizerError> {
            Ok(Observable {
                frame: o.frame.to_matrix().ok_or_else(bad)?,
                labels: o.labels.clone(),
                outcomes: o.outcomes,
            })
        };
        Ok(ModelParams {
            witness: self.witness,
            da: self.da,
            db: self.db,
            alice: self.alice.iter().map(obs).collect::<Result<_, _>>()?,
            bob: self.bob.iter().map(obs).collect::<Result<_, _>>()?,
            w: self.w.to_matrix().ok_or_else(bad)?,
        })
    }
}
