//! The two witnesses, their exact constructions and the residual defects.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::model::{assemble_exact, w23_exact_model, w32_exact_model};
use super::table::{AnyTable, CorrelationTable, Key};
use crate::engine::induced_sigma;
use crate::error::CorrelationError;
use crate::field::FieldElement;
use crate::linalg::{compress2, frobenius_sqr, is_contraction, ExactMatrix, TableScalar};
use crate::words::{g, h};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WitnessId {
    /// Three inputs, two outcomes, `n = 3`.
    W32,
    /// Two inputs, three outcomes, `n = 4`.
    W23,
}

impl WitnessId {
    /// `(n, m, k)` of the tables the witness constrains.
    pub fn shape(self) -> (usize, usize, usize) {
        match self {
            WitnessId::W32 => (3, 3, 2),
            WitnessId::W23 => (4, 2, 3),
        }
    }
}

impl fmt::Display for WitnessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessId::W32 => "W32",
            WitnessId::W23 => "W23",
        })
    }
}

impl FromStr for WitnessId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim_start_matches(['W', 'w']) {
            "32" => Ok(WitnessId::W32),
            "23" => Ok(WitnessId::W23),
            _ => Err(format!("unknown witness `{s}` (expected 32 or 23)")),
        }
    }
}

fn fe(n: i64) -> FieldElement {
    FieldElement::from_int(n)
}

fn matrix(n: usize, entries: &[(usize, usize, FieldElement)]) -> ExactMatrix {
    let mut m = ExactMatrix::zeros(n, n);
    for (i, j, v) in entries {
        m[(i - 1, j - 1)] = v.clone();
    }
    m
}

/// Targets of the three-input witness.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessW32 {
    pub m2: ExactMatrix,
    pub m3: ExactMatrix,
    pub j: ExactMatrix,
}

impl Default for WitnessW32 {
    fn default() -> Self {
        let r = FieldElement::inv_sqrt2();
        WitnessW32 {
            m2: matrix(
                3,
                &[(1, 3, r.clone()), (2, 3, r.clone()), (3, 1, r.clone()), (3, 2, r)],
            ),
            m3: matrix(3, &[(1, 3, fe(1)), (2, 2, fe(1)), (3, 1, fe(1))]),
            j: matrix(3, &[(1, 1, fe(1)), (2, 2, fe(-1)), (3, 3, fe(-1))]),
        }
    }
}

/// Targets of the three-outcome witness, fixed by the induced construction.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessW23 {
    pub n: usize,
    pub a: ExactMatrix,
    pub b: ExactMatrix,
    pub c: ExactMatrix,
    pub d: ExactMatrix,
}

/// `diag(1, −1)`.
pub fn compression_target() -> ExactMatrix {
    matrix(2, &[(1, 1, fe(1)), (2, 2, fe(-1))])
}

impl WitnessW23 {
    /// `A = W*(σ(g)⊗σ(g))W`, `B = W*(σ(h)⊗σ(h))W`, `C = W*(σ(g)⊗I)W`,
    /// `D = W*(I⊗σ(g))W` for the Gram–Schmidt basis of `ζ₁, ζ₂, ξ₃, ξ₄`.
    pub fn derive() -> Result<WitnessW23, CorrelationError> {
        let (model, gs) = w23_exact_model()?;
        let sg = induced_sigma(&g());
        let sh = induced_sigma(&h());
        Ok(WitnessW23 {
            n: gs.rank,
            a: model.compress(Some(&sg), Some(&sg))?,
            b: model.compress(Some(&sh), Some(&sh))?,
            c: model.compress(Some(&sg), None)?,
            d: model.compress(None, Some(&sg))?,
        })
    }

    /// Cached [`WitnessW23::derive`].
    pub fn derived() -> Result<&'static WitnessW23, CorrelationError> {
        static CELL: OnceLock<Result<WitnessW23, CorrelationError>> = OnceLock::new();
        CELL.get_or_init(WitnessW23::derive).as_ref().map_err(Clone::clone)
    }

    /// The constraint set the finite-dimensional argument rules out:
    /// contractions; unit first columns of `B` and `AB`;
    /// `(BAB)₁₁ = (BAB)₂₁ = 1/√2`; `Q*CQ = Q*DQ = diag(1, −1)`.
    pub fn check_equations(&self) -> Result<(), CorrelationError> {
        let fail = |s: &str| Err(CorrelationError::SelfTest(s.to_string()));
        for (name, m) in [("A", &self.a), ("B", &self.b), ("C", &self.c), ("D", &self.d)] {
            if !is_contraction(m, 0.0) {
                return fail(&format!("{name} is not a contraction"));
            }
        }
        let col_norm = |m: &ExactMatrix| {
            (0..m.nrows()).fold(FieldElement::zero(), |acc, i| acc + m[(i, 0)].norm_sqr())
        };
        if !col_norm(&self.b).is_one() {
            return fail("first column of B is not a unit vector");
        }
        let ab = &self.a * &self.b;
        if !col_norm(&ab).is_one() {
            return fail("first column of AB is not a unit vector");
        }
        let bab = &self.b * &ab;
        let r = FieldElement::inv_sqrt2();
        if bab[(0, 0)] != r || bab[(1, 0)] != r {
            return fail("(BAB)₁₁ = (BAB)₂₁ = 1/√2 fails");
        }
        let target = compression_target();
        if compress2(&self.c) != target || compress2(&self.d) != target {
            return fail("compressions of C, D differ from diag(1, −1)");
        }
        Ok(())
    }
}

/// Named squared-Frobenius components and their sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual<T> {
    pub components: Vec<(String, T)>,
    pub total: T,
}

impl<T: TableScalar> Residual<T> {
    fn from_components(components: Vec<(String, T)>) -> Self {
        let total = components.iter().fold(T::zero(), |acc, (_, v)| acc + v.clone());
        Residual { components, total }
    }

    pub fn total_f64(&self) -> f64 {
        self.total.to_c64().re
    }
}

fn check_shape<T: TableScalar>(table: &CorrelationTable<T>, id: WitnessId) -> Result<(), CorrelationError> {
    let (n, m, k) = id.shape();
    if (table.n, table.m, table.k) != (n, m, k) {
        return Err(CorrelationError::Shape(format!(
            "{id} needs n={n}, m={m}, k={k}; table has n={}, m={}, k={}",
            table.n, table.m, table.k
        )));
    }
    Ok(())
}

fn lift<T: TableScalar>(m: &ExactMatrix) -> DMatrix<T> {
    m.map(|x| T::from_field(&x))
}

/// `‖comb(2,2) − M₂‖² + ‖comb(3,3) − M₃‖² + ‖P_A(2|1) − P_A(1|1) − J‖² + ‖P_B(2|1) − P_B(1|1) − J‖²`.
/// Marginals are read at the other party's input 1.
pub fn residual_w32<T: TableScalar>(
    table: &CorrelationTable<T>,
    w: &WitnessW32,
) -> Result<Residual<T>, CorrelationError> {
    check_shape(table, WitnessId::W32)?;
    let j = lift::<T>(&w.j);
    let pa = table.alice_marginal(2, 1, 1) - table.alice_marginal(1, 1, 1);
    let pb = table.bob_marginal(2, 1, 1) - table.bob_marginal(1, 1, 1);
    Ok(Residual::from_components(vec![
        ("M2".into(), frobenius_sqr(&(table.combination(2, 2) - lift::<T>(&w.m2)))),
        ("M3".into(), frobenius_sqr(&(table.combination(3, 3) - lift::<T>(&w.m3)))),
        ("marginal_A".into(), frobenius_sqr(&(pa - &j))),
        ("marginal_B".into(), frobenius_sqr(&(pb - &j))),
    ]))
}

/// Deviations of `comb(1,1)` from `A`, of `Σ ω^{a+b} P(a,b|2,2)` from `B`,
/// of the two marginal compressions from `diag(1, −1)`, plus the mass on
/// the forbidden third outcomes.
pub fn residual_w23<T: TableScalar>(
    table: &CorrelationTable<T>,
    w: &WitnessW23,
) -> Result<Residual<T>, CorrelationError> {
    check_shape(table, WitnessId::W23)?;
    let mut bsum = DMatrix::<T>::zeros(4, 4);
    for a in 1..=3 {
        for b in 1..=3 {
            let wt = T::from_field(&FieldElement::omega_pow((a + b) as i64));
            bsum += table.get(a, b, 2, 2).map(|z| z * wt.clone());
        }
    }
    let target = lift::<T>(&compression_target());
    let pa = table.alice_marginal(2, 1, 1) - table.alice_marginal(1, 1, 1);
    let pb = table.bob_marginal(2, 1, 1) - table.bob_marginal(1, 1, 1);
    let mut third_a = T::zero();
    let mut third_b = T::zero();
    for c in 1..=3 {
        for i in 1..=2 {
            third_a += frobenius_sqr(table.get(3, c, 1, i));
            third_b += frobenius_sqr(table.get(c, 3, i, 1));
        }
    }
    Ok(Residual::from_components(vec![
        ("A".into(), frobenius_sqr(&(table.combination(1, 1) - lift::<T>(&w.a)))),
        ("B".into(), frobenius_sqr(&(bsum - lift::<T>(&w.b)))),
        ("compress_A".into(), frobenius_sqr(&(compress2(&pa) - &target))),
        ("compress_B".into(), frobenius_sqr(&(compress2(&pb) - &target))),
        ("third_A".into(), third_a),
        ("third_B".into(), third_b),
    ]))
}

/// `‖Q*(Σ c·P)Q − target‖²` (`Q` the leading 2-isometry when `compress`,
/// identity otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearTerm {
    pub label: String,
    pub coeffs: Vec<(Key, FieldElement)>,
    pub target: ExactMatrix,
    pub compress: bool,
}

/// A witness as a list of linear terms; its defect is the sum of the terms.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSpec {
    pub id: WitnessId,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub terms: Vec<LinearTerm>,
}

fn signed_pair(x: usize, y: usize) -> Vec<(Key, FieldElement)> {
    vec![
        ((2, 2, x, y), fe(1)),
        ((1, 2, x, y), fe(-1)),
        ((2, 1, x, y), fe(-1)),
        ((1, 1, x, y), fe(1)),
    ]
}

fn alice_difference(k: usize) -> Vec<(Key, FieldElement)> {
    (1..=k)
        .flat_map(|b| [((2, b, 1, 1), fe(1)), ((1, b, 1, 1), fe(-1))])
        .collect()
}

fn bob_difference(k: usize) -> Vec<(Key, FieldElement)> {
    (1..=k)
        .flat_map(|a| [((a, 2, 1, 1), fe(1)), ((a, 1, 1, 1), fe(-1))])
        .collect()
}

impl WitnessSpec {
    pub fn w32() -> WitnessSpec {
        let w = WitnessW32::default();
        let term = |label: &str, coeffs, target: &ExactMatrix| LinearTerm {
            label: label.into(),
            coeffs,
            target: target.clone(),
            compress: false,
        };
        WitnessSpec {
            id: WitnessId::W32,
            n: 3,
            m: 3,
            k: 2,
            terms: vec![
                term("M2", signed_pair(2, 2), &w.m2),
                term("M3", signed_pair(3, 3), &w.m3),
                term("marginal_A", alice_difference(2), &w.j),
                term("marginal_B", bob_difference(2), &w.j),
            ],
        }
    }

    pub fn w23() -> Result<WitnessSpec, CorrelationError> {
        let w = WitnessW23::derived()?;
        let mut terms = vec![
            LinearTerm {
                label: "A".into(),
                coeffs: signed_pair(1, 1),
                target: w.a.clone(),
                compress: false,
            },
            LinearTerm {
                label: "B".into(),
                coeffs: (1..=3)
                    .flat_map(|a| (1..=3).map(move |b| ((a, b, 2, 2), FieldElement::omega_pow((a + b) as i64))))
                    .collect(),
                target: w.b.clone(),
                compress: false,
            },
            LinearTerm {
                label: "compress_A".into(),
                coeffs: alice_difference(3),
                target: compression_target(),
                compress: true,
            },
            LinearTerm {
                label: "compress_B".into(),
                coeffs: bob_difference(3),
                target: compression_target(),
                compress: true,
            },
        ];
        let zero = ExactMatrix::zeros(4, 4);
        for c in 1..=3 {
            for i in 1..=2 {
                terms.push(LinearTerm {
                    label: format!("third_A({c},{i})"),
                    coeffs: vec![((3, c, 1, i), fe(1))],
                    target: zero.clone(),
                    compress: false,
                });
            }
        }
        for c in 1..=3 {
            for i in 1..=2 {
                terms.push(LinearTerm {
                    label: format!("third_B({c},{i})"),
                    coeffs: vec![((c, 3, i, 1), fe(1))],
                    target: zero.clone(),
                    compress: false,
                });
            }
        }
        Ok(WitnessSpec {
            id: WitnessId::W23,
            n: 4,
            m: 2,
            k: 3,
            terms,
        })
    }

    pub fn for_id(id: WitnessId) -> Result<WitnessSpec, CorrelationError> {
        match id {
            WitnessId::W32 => Ok(WitnessSpec::w32()),
            WitnessId::W23 => WitnessSpec::w23(),
        }
    }

    /// `Q*(Σ c·P)Q − target` for one term.
    pub fn term_residual<T: TableScalar>(
        term: &LinearTerm,
        table: &CorrelationTable<T>,
    ) -> DMatrix<T> {
        let mut acc = DMatrix::<T>::zeros(table.n, table.n);
        for ((a, b, x, y), c) in &term.coeffs {
            let c = T::from_field(c);
            acc += table.get(*a, *b, *x, *y).map(|z| z * c.clone());
        }
        let acc = if term.compress { compress2(&acc) } else { acc };
        acc - lift::<T>(&term.target)
    }
}

/// Defect of a table against a linear specification.
pub fn residual<T: TableScalar>(
    table: &CorrelationTable<T>,
    spec: &WitnessSpec,
) -> Result<Residual<T>, CorrelationError> {
    check_shape(table, spec.id)?;
    Ok(Residual::from_components(
        spec.terms
            .iter()
            .map(|t| (t.label.clone(), frobenius_sqr(&WitnessSpec::term_residual(t, table))))
            .collect(),
    ))
}

/// Exact three-input model and its table; every target is checked for
/// exact equality.
pub fn build_witness_w32() -> Result<(WitnessW32, CorrelationTable<FieldElement>), CorrelationError> {
    let w = WitnessW32::default();
    let table = assemble_exact(&w32_exact_model()?)?;
    table.check_invariants(0.0)?;
    let r = residual_w32(&table, &w)?;
    if let Some((name, _)) = r.components.iter().find(|(_, v)| !v.is_zero()) {
        return Err(CorrelationError::SelfTest(format!("W32 component {name} is nonzero")));
    }
    Ok((w, table))
}

/// Exact three-outcome model, its targets `A, B, C, D` and its table.
pub fn build_witness_w23() -> Result<(WitnessW23, CorrelationTable<FieldElement>), CorrelationError> {
    let w = WitnessW23::derive()?;
    if w.n != 4 {
        return Err(CorrelationError::SelfTest(format!("Gram–Schmidt rank {} ≠ 4", w.n)));
    }
    w.check_equations()?;
    let (model, _) = w23_exact_model()?;
    let table = assemble_exact(&model)?;
    table.check_invariants(0.0)?;
    let r = residual_w23(&table, &w)?;
    if let Some((name, _)) = r.components.iter().find(|(_, v)| !v.is_zero()) {
        return Err(CorrelationError::SelfTest(format!("W23 component {name} is nonzero")));
    }
    Ok((w, table))
}

/// Residual report for an external table.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub witness: WitnessId,
    pub field: &'static str,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub invariant_violations: Vec<String>,
    /// `(name, value, exact symbolic value when available)`.
    pub components: Vec<(String, f64, Option<String>)>,
    pub total: f64,
    pub total_symbolic: Option<String>,
}

impl CertificateReport {
    pub fn valid(&self) -> bool {
        self.invariant_violations.is_empty()
    }
}

/// Invariant check plus the witness residuals (numeric tolerance `1e−10`).
pub fn certificate_check(table: &AnyTable, id: WitnessId) -> Result<CertificateReport, CorrelationError> {
    fn eval<T: TableScalar>(
        t: &CorrelationTable<T>,
        id: WitnessId,
    ) -> Result<Residual<T>, CorrelationError> {
        match id {
            WitnessId::W32 => residual_w32(t, &WitnessW32::default()),
            WitnessId::W23 => residual_w23(t, WitnessW23::derived()?),
        }
    }
    let (n, m, k) = table.shape();
    let violations = table.invariant_violations(1e-10);
    let (field, components, total, total_symbolic) = match table {
        AnyTable::Exact(t) => {
            let r = eval(t, id)?;
            let comps = r
                .components
                .iter()
                .map(|(s, v)| (s.clone(), v.to_c64().re, Some(v.symbolic())))
                .collect();
            ("exact", comps, r.total.to_c64().re, Some(r.total.symbolic()))
        }
        AnyTable::Numeric(t) => {
            let r: Residual<Complex64> = eval(t, id)?;
            let comps = r.components.iter().map(|(s, v)| (s.clone(), v.re, None)).collect();
            ("complex128", comps, r.total.re, None)
        }
    };
    Ok(CertificateReport {
        witness: id,
        field,
        n,
        m,
        k,
        invariant_violations: violations,
        components,
        total,
        total_symbolic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w32_targets() {
        let w = WitnessW32::default();
        assert_eq!(w.m2[(2, 1)], FieldElement::inv_sqrt2());
        assert!(w.m2[(0, 0)].is_zero());
        assert!(w.m3[(1, 1)].is_one());
        assert!(is_contraction(&w.m2, 0.0));
    }

    #[test]
    fn exact_witnesses_have_zero_defect() {
        let (w, table) = build_witness_w32().unwrap();
        assert!(residual_w32(&table, &w).unwrap().total.is_zero());
        assert!(residual(&table, &WitnessSpec::w32()).unwrap().total.is_zero());
        let (w, table) = build_witness_w23().unwrap();
        assert!(residual_w23(&table, &w).unwrap().total.is_zero());
        assert!(residual(&table, &WitnessSpec::w23().unwrap()).unwrap().total.is_zero());
    }

    #[test]
    fn shape_mismatch() {
        let (_, table) = build_witness_w32().unwrap();
        assert!(matches!(
            residual_w23(&table, WitnessW23::derived().unwrap()),
            Err(CorrelationError::Shape(_))
        ));
    }

    #[test]
    fn witness_id_parsing() {
        assert_eq!("32".parse::<WitnessId>(), Ok(WitnessId::W32));
        assert_eq!("W23".parse::<WitnessId>(), Ok(WitnessId::W23));
        assert!("33".parse::<WitnessId>().is_err());
    }
}
