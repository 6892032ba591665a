//! Witness defect of a [`ModelParams`] and its analytic gradient.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use super::params::{exp_skew, gaussian, ModelParams, Observable};
use crate::correlations::{Key, WitnessId, WitnessSpec};
use crate::error::OptimizerError;
use crate::linalg::CMatrix;

struct CompiledTerm {
    coeffs: Vec<(usize, Complex64)>,
    target: CMatrix,
    compress: bool,
}

/// A witness compiled to the table entries it reads. The defect is
/// `Σ_terms ‖Q*(Σ c·P)Q − target‖²` with `P_ij = tr(V_i* E V_j Fᵀ)`.
pub struct Objective {
    pub witness: WitnessId,
    n: usize,
    inputs: usize,
    outcomes: usize,
    keys: Vec<Key>,
    terms: Vec<CompiledTerm>,
}

/// Gradient on the product of frame tangents and the (co-)isometry manifold.
#[derive(Clone, Debug)]
pub struct Gradient {
    /// Skew-Hermitian generators, one per input.
    pub alice: Vec<CMatrix>,
    pub bob: Vec<CMatrix>,
    /// Euclidean gradient in `W`.
    pub w_euclid: CMatrix,
    /// Projection of `w_euclid` to the tangent space at `W`.
    pub w: CMatrix,
}

impl Gradient {
    pub fn norm_sqr(&self) -> f64 {
        self.alice
            .iter()
            .chain(&self.bob)
            .chain(std::iter::once(&self.w))
            .map(|m| m.norm_squared())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// Intermediate products reused by the gradient.
struct State {
    vectors: Vec<CMatrix>,
    /// `E_{a,x} V_j` per `(a, x)`.
    ev: BTreeMap<(usize, usize), Vec<CMatrix>>,
    /// `V_j F_{b,y}ᵀ` per `(b, y)`.
    vf: BTreeMap<(usize, usize), Vec<CMatrix>>,
    /// `E V_j Fᵀ` per key.
    evf: Vec<Vec<CMatrix>>,
    residuals: Vec<CMatrix>,
    defect: f64,
}

fn herm(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

impl Objective {
    pub fn new(witness: WitnessId) -> Result<Objective, OptimizerError> {
        let spec = WitnessSpec::for_id(witness)
            .map_err(|e| OptimizerError::Dimension(format!("witness construction failed: {e}")))?;
        Ok(Objective::from_spec(&spec))
    }

    pub fn from_spec(spec: &WitnessSpec) -> Objective {
        let mut index: BTreeMap<Key, usize> = BTreeMap::new();
        let mut keys = Vec::new();
        let terms = spec
            .terms
            .iter()
            .map(|t| CompiledTerm {
                coeffs: t
                    .coeffs
                    .iter()
                    .map(|(key, c)| {
                        let i = *index.entry(*key).or_insert_with(|| {
                            keys.push(*key);
                            keys.len() - 1
                        });
                        (i, c.to_c64())
                    })
                    .collect(),
                target: t.target.map(|z| z.to_c64()),
                compress: t.compress,
            })
            .collect();
        Objective {
            witness: spec.id,
            n: spec.n,
            inputs: spec.m,
            outcomes: spec.k,
            keys,
            terms,
        }
    }

    fn check(&self, p: &ModelParams) -> Result<(), OptimizerError> {
        let ok_side = |obs: &[Observable], d: usize| {
            obs.len() == self.inputs
                && obs
                    .iter()
                    .all(|o| o.outcomes == self.outcomes && o.dim() == d && o.labels.len() == d)
        };
        if p.witness != self.witness
            || p.n() != self.n
            || p.w.nrows() != p.da * p.db
            || !ok_side(&p.alice, p.da)
            || !ok_side(&p.bob, p.db)
        {
            return Err(OptimizerError::Dimension(format!(
                "{}x{} model does not fit witness {} (n = {}, {} inputs, {} outcomes)",
                p.da, p.db, self.witness, self.n, self.inputs, self.outcomes
            )));
        }
        Ok(())
    }

    fn evaluate(&self, p: &ModelParams) -> State {
        let vectors = p.vectors();
        let n = self.n;
        let mut ev = BTreeMap::new();
        let mut vf = BTreeMap::new();
        for &(a, b, x, y) in &self.keys {
            ev.entry((a, x)).or_insert_with(|| {
                let e = p.alice[x - 1].projection(a - 1);
                vectors.iter().map(|v| &e * v).collect::<Vec<_>>()
            });
            vf.entry((b, y)).or_insert_with(|| {
                let ft = p.bob[y - 1].projection(b - 1).transpose();
                vectors.iter().map(|v| v * &ft).collect::<Vec<_>>()
            });
        }
        let mut evf = Vec::with_capacity(self.keys.len());
        let mut tables = Vec::with_capacity(self.keys.len());
        for &(a, b, x, y) in &self.keys {
            let ft = p.bob[y - 1].projection(b - 1).transpose();
            let prods: Vec<CMatrix> = ev[&(a, x)].iter().map(|m| m * &ft).collect();
            tables.push(CMatrix::from_fn(n, n, |i, j| vectors[i].dotc(&prods[j])));
            evf.push(prods);
        }
        let mut defect = 0.0;
        let residuals = self
            .terms
            .iter()
            .map(|t| {
                let mut acc = CMatrix::zeros(n, n);
                for &(i, c) in &t.coeffs {
                    acc += &tables[i] * c;
                }
                let acc = if t.compress {
                    acc.view((0, 0), (2, 2)).into_owned()
                } else {
                    acc
                };
                let r = acc - &t.target;
                defect += r.norm_squared();
                r
            })
            .collect();
        State {
            vectors,
            ev,
            vf,
            evf,
            residuals,
            defect,
        }
    }

    pub fn defect(&self, p: &ModelParams) -> Result<f64, OptimizerError> {
        self.check(p)?;
        Ok(self.evaluate(p).defect)
    }

    /// Defect and gradient. With `dD = 2 Re Σ tr(G* dP)` and
    /// `G = Σ_terms conj(c)·QRQ*`, the frame generator gradient is `Z* − Z`
    /// with `Z = Σ_a [D_a, Q*YQ]`, and the Euclidean `W` gradient is
    /// `2 Σ (E⊗F) W (G + G*)`.
    pub fn gradient(&self, p: &ModelParams) -> Result<(f64, Gradient), OptimizerError> {
        self.check(p)?;
        let st = self.evaluate(p);
        let n = self.n;
        // G per key
        let mut g = vec![CMatrix::zeros(n, n); self.keys.len()];
        for (t, r) in self.terms.iter().zip(&st.residuals) {
            let embedded = if t.compress {
                let mut m = CMatrix::zeros(n, n);
                m.view_mut((0, 0), (2, 2)).copy_from(r);
                m
            } else {
                r.clone()
            };
            for &(i, c) in &t.coeffs {
                g[i] += &embedded * c.conj();
            }
        }
        let (da, db) = (p.da, p.db);
        let mut ya = vec![vec![CMatrix::zeros(da, da); self.outcomes]; self.inputs];
        let mut yb = vec![vec![CMatrix::zeros(db, db); self.outcomes]; self.inputs];
        let mut omega = vec![CMatrix::zeros(da, db); n];
        for (ki, &(a, b, x, y)) in self.keys.iter().enumerate() {
            let gk = &g[ki];
            if gk.norm_squared() == 0.0 {
                continue;
            }
            let sym = gk + gk.adjoint();
            for j in 0..n {
                for l in 0..n {
                    omega[j] += &st.evf[ki][l] * sym[(l, j)];
                }
            }
            let vf = &st.vf[&(b, y)];
            let ev = &st.ev[&(a, x)];
            let mut y_a = CMatrix::zeros(da, da);
            let mut y_b = CMatrix::zeros(db, db);
            for i in 0..n {
                let mut s = CMatrix::zeros(da, db);
                for j in 0..n {
                    s += &vf[j] * gk[(i, j)].conj();
                }
                y_a += s * st.vectors[i].adjoint();
            }
            for j in 0..n {
                let mut u = CMatrix::zeros(db, da);
                for i in 0..n {
                    u += st.vectors[i].adjoint() * gk[(i, j)].conj();
                }
                y_b += u * &ev[j];
            }
            ya[x - 1][a - 1] += y_a;
            yb[y - 1][b - 1] += y_b.transpose();
        }
        let frame_grad = |obs: &Observable, ys: &[CMatrix]| -> CMatrix {
            let d = obs.dim();
            let mut z = CMatrix::zeros(d, d);
            for (a, y) in ys.iter().enumerate() {
                let yt = obs.frame.adjoint() * y * &obs.frame;
                let ind = obs.indicator(a);
                for r in 0..d {
                    for c in 0..d {
                        z[(r, c)] += yt[(r, c)] * (ind[r] - ind[c]);
                    }
                }
            }
            z.adjoint() - z
        };
        let alice = p.alice.iter().zip(&ya).map(|(o, y)| frame_grad(o, y)).collect();
        let bob = p.bob.iter().zip(&yb).map(|(o, y)| frame_grad(o, y)).collect();
        let mut w_euclid = CMatrix::zeros(da * db, n);
        for (j, om) in omega.iter().enumerate() {
            for pp in 0..da {
                for q in 0..db {
                    w_euclid[(pp * db + q, j)] = om[(pp, q)] * 2.0;
                }
            }
        }
        let w = if p.w.nrows() >= n {
            &w_euclid - &p.w * herm(&(p.w.adjoint() * &w_euclid))
        } else {
            &w_euclid - herm(&(&w_euclid * p.w.adjoint())) * &p.w
        };
        Ok((
            st.defect,
            Gradient {
                alice,
                bob,
                w_euclid,
                w,
            },
        ))
    }
}

/// `Q ← Q·exp(K_x)` on every frame and `W ← W + ΔW` (no retraction).
pub fn perturb(p: &ModelParams, alice: &[CMatrix], bob: &[CMatrix], dw: &CMatrix) -> ModelParams {
    let mv = |obs: &[Observable], ks: &[CMatrix]| -> Vec<Observable> {
        obs.iter()
            .zip(ks)
            .map(|(o, k)| Observable {
                frame: &o.frame * exp_skew(k),
                ..o.clone()
            })
            .collect()
    };
    ModelParams {
        alice: mv(&p.alice, alice),
        bob: mv(&p.bob, bob),
        w: &p.w + dw,
        ..p.clone()
    }
}

fn random_skew<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let a = gaussian(d, d, rng);
    (&a - a.adjoint()) * Complex64::new(0.5, 0.0)
}

fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Outcome of a directional finite-difference check.
#[derive(Clone, Copy, Debug)]
pub struct GradientCheck {
    pub analytic: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

/// Analytic directional derivative along a random direction against the
/// central difference with step `h`.
pub fn gradient_check<R: Rng + ?Sized>(
    obj: &Objective,
    p: &ModelParams,
    h: f64,
    rng: &mut R,
) -> Result<GradientCheck, OptimizerError> {
    let (_, grad) = obj.gradient(p)?;
    let ka: Vec<CMatrix> = p.alice.iter().map(|o| random_skew(o.dim(), rng)).collect();
    let kb: Vec<CMatrix> = p.bob.iter().map(|o| random_skew(o.dim(), rng)).collect();
    let dw = gaussian(p.w.nrows(), p.w.ncols(), rng);
    let analytic = grad.alice.iter().zip(&ka).map(|(g, k)| real_inner(g, k)).sum::<f64>()
        + grad.bob.iter().zip(&kb).map(|(g, k)| real_inner(g, k)).sum::<f64>()
        + real_inner(&grad.w_euclid, &dw);
    let scale = |ms: &[CMatrix], s: f64| -> Vec<CMatrix> { ms.iter().map(|m| m * Complex64::new(s, 0.0)).collect() };
    let plus = perturb(p, &scale(&ka, h), &scale(&kb, h), &(&dw * Complex64::new(h, 0.0)));
    let minus = perturb(p, &scale(&ka, -h), &scale(&kb, -h), &(&dw * Complex64::new(-h, 0.0)));
    let fd = (obj.defect(&plus)? - obj.defect(&minus)?) / (2.0 * h);
    let denom = analytic.abs().max(fd.abs()).max(f64::MIN_POSITIVE);
    Ok(GradientCheck {
        analytic,
        finite_difference: fd,
        relative_error: (analytic - fd).abs() / denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{assemble_numeric, residual_w32, WitnessW32};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_table_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = ModelParams::random(WitnessId::W32, 2, 3, &mut rng);
        let obj = Objective::new(WitnessId::W32).unwrap();
        let table = assemble_numeric(&p.to_numeric_model()).unwrap();
        let oracle = residual_w32(&table, &WitnessW32::default()).unwrap().total_f64();
        assert!((obj.defect(&p).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for witness in [WitnessId::W32, WitnessId::W23] {
            let obj = Objective::new(witness).unwrap();
            for (da, db) in [(2, 2), (2, 3), (1, 1)] {
                let p = ModelParams::random(witness, da, db, &mut rng);
                let c = gradient_check(&obj, &p, 1e-5, &mut rng).unwrap();
                assert!(c.relative_error <= 1e-5, "{witness} {da}x{db}: {c:?}");
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = ModelParams::random(WitnessId::W32, 2, 2, &mut rng);
        let obj = Objective::new(WitnessId::W23).unwrap();
        assert!(obj.defect(&p).is_err());
    }
}
