//! `CorrelationTable`: the family `P(a,b|x,y)` of `n×n` matrices, its
//! invariants, marginals and JSON form.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::CorrelationError;
use crate::field::FieldElement;
use crate::linalg::{all_negligible, TableScalar};

/// `(a, b, x, y)`, all 1-based.
pub type Key = (usize, usize, usize, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTable<T: TableScalar> {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    entries: BTreeMap<Key, DMatrix<T>>,
}

/// `alice[x−1][a−1] = P_A(a|x)`, `bob[y−1][b−1] = P_B(b|y)`.
#[derive(Clone, Debug)]
pub struct Marginals<T: TableScalar> {
    pub alice: Vec<Vec<DMatrix<T>>>,
    pub bob: Vec<Vec<DMatrix<T>>>,
}

/// Every key of an `m`-input, `k`-outcome table in lexicographic order.
pub fn all_keys(m: usize, k: usize) -> impl Iterator<Item = Key> {
    (1..=k).flat_map(move |a| {
        (1..=k).flat_map(move |b| (1..=m).flat_map(move |x| (1..=m).map(move |y| (a, b, x, y))))
    })
}

impl<T: TableScalar> CorrelationTable<T> {
    pub fn new(
        n: usize,
        m: usize,
        k: usize,
        entries: BTreeMap<Key, DMatrix<T>>,
    ) -> Result<Self, CorrelationError> {
        if entries.len() != m * m * k * k {
            return Err(CorrelationError::Shape(format!(
                "expected {} entries, found {}",
                m * m * k * k,
                entries.len()
            )));
        }
        for key in all_keys(m, k) {
            match entries.get(&key) {
                None => return Err(CorrelationError::Shape(format!("missing entry {key:?}"))),
                Some(p) if p.nrows() != n || p.ncols() != n => {
                    return Err(CorrelationError::Shape(format!("entry {key:?} is not {n}×{n}")))
                }
                _ => {}
            }
        }
        Ok(CorrelationTable { n, m, k, entries })
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> &DMatrix<T> {
        &self.entries[&(a, b, x, y)]
    }

    pub fn entries(&self) -> &BTreeMap<Key, DMatrix<T>> {
        &self.entries
    }

    /// Mutable access, mainly for fault injection in tests.
    pub fn entry_mut(&mut self, key: Key) -> Option<&mut DMatrix<T>> {
        self.entries.get_mut(&key)
    }

    /// `P(2,2|x,y) − P(1,2|x,y) − P(2,1|x,y) + P(1,1|x,y)`.
    pub fn combination(&self, x: usize, y: usize) -> DMatrix<T> {
        self.get(2, 2, x, y) - self.get(1, 2, x, y) - self.get(2, 1, x, y) + self.get(1, 1, x, y)
    }

    /// `Σ_b P(a,b|x,y)`.
    pub fn alice_marginal(&self, a: usize, x: usize, y: usize) -> DMatrix<T> {
        (1..=self.k).fold(self.zero(), |acc, b| acc + self.get(a, b, x, y))
    }

    /// `Σ_a P(a,b|x,y)`.
    pub fn bob_marginal(&self, b: usize, x: usize, y: usize) -> DMatrix<T> {
        (1..=self.k).fold(self.zero(), |acc, a| acc + self.get(a, b, x, y))
    }

    fn zero(&self) -> DMatrix<T> {
        DMatrix::zeros(self.n, self.n)
    }

    /// All invariant violations: positivity, completeness, marginal consistency.
    /// Numeric tables use `tol` entrywise; exact tables ignore it.
    pub fn invariant_violations(&self, tol: f64) -> Vec<String> {
        self.violations(tol)
            .into_iter()
            .map(|v| v.to_string())
            .collect()
    }

    fn violations(&self, tol: f64) -> Vec<CorrelationError> {
        let mut out = Vec::new();
        for (key, p) in &self.entries {
            if !T::is_psd(p, tol) {
                out.push(CorrelationError::InvalidPvm(format!(
                    "P{key:?} is not positive semidefinite"
                )));
            }
        }
        let id = DMatrix::<T>::identity(self.n, self.n);
        for x in 1..=self.m {
            for y in 1..=self.m {
                let sum = (1..=self.k).fold(self.zero(), |acc, a| acc + self.alice_marginal(a, x, y));
                if !all_negligible(&(sum - &id), tol) {
                    out.push(CorrelationError::InvalidPvm(format!(
                        "Σ_ab P(a,b|{x},{y}) ≠ I"
                    )));
                }
            }
        }
        for x in 1..=self.m {
            for a in 1..=self.k {
                let base = self.alice_marginal(a, x, 1);
                for y in 2..=self.m {
                    if !all_negligible(&(self.alice_marginal(a, x, y) - &base), tol) {
                        out.push(CorrelationError::Marginal(format!(
                            "P_A({a}|{x}) differs between y=1 and y={y}"
                        )));
                    }
                }
            }
        }
        for y in 1..=self.m {
            for b in 1..=self.k {
                let base = self.bob_marginal(b, 1, y);
                for x in 2..=self.m {
                    if !all_negligible(&(self.bob_marginal(b, x, y) - &base), tol) {
                        out.push(CorrelationError::Marginal(format!(
                            "P_B({b}|{y}) differs between x=1 and x={x}"
                        )));
                    }
                }
            }
        }
        out
    }

    pub fn check_invariants(&self, tol: f64) -> Result<(), CorrelationError> {
        match self.violations(tol).into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Marginal families; fails if a marginal depends on the other party's input.
    pub fn marginals(&self, tol: f64) -> Result<Marginals<T>, CorrelationError> {
        if let Some(e) = self
            .violations(tol)
            .into_iter()
            .find(|e| matches!(e, CorrelationError::Marginal(_)))
        {
            return Err(e);
        }
        let alice = (1..=self.m)
            .map(|x| (1..=self.k).map(|a| self.alice_marginal(a, x, 1)).collect())
            .collect();
        let bob = (1..=self.m)
            .map(|y| (1..=self.k).map(|b| self.bob_marginal(b, 1, y)).collect())
            .collect();
        Ok(Marginals { alice, bob })
    }

    pub fn to_numeric(&self) -> CorrelationTable<Complex64> {
        CorrelationTable {
            n: self.n,
            m: self.m,
            k: self.k,
            entries: self
                .entries
                .iter()
                .map(|(k, p)| (*k, p.map(|x| x.to_c64())))
                .collect(),
        }
    }
}

/// Scalars with a JSON form inside a table file.
pub trait JsonScalar: TableScalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self, String>;
}

impl JsonScalar for FieldElement {
    fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("field element serializes")
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        FieldElement::deserialize(v).map_err(|e| e.to_string())
    }
}

impl JsonScalar for Complex64 {
    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }
    fn from_json(v: &Value) -> Result<Self, String> {
        match v.as_array().map(|a| a.as_slice()) {
            Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err("expected [re, im] with numeric parts".into()),
            },
            _ => Err("expected [re, im]".into()),
        }
    }
}

impl<T: JsonScalar> CorrelationTable<T> {
    /// `{"n", "m", "k", "field", "entries": {"a,b,x,y": [[scalar, …], …]}}`.
    pub fn to_json(&self) -> Value {
        let entries: serde_json::Map<String, Value> = self
            .entries
            .iter()
            .map(|(&(a, b, x, y), p)| {
                let rows: Vec<Value> = (0..self.n)
                    .map(|i| Value::Array((0..self.n).map(|j| p[(i, j)].to_json()).collect()))
                    .collect();
                (format!("{a},{b},{x},{y}"), Value::Array(rows))
            })
            .collect();
        json!({
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "field": T::FIELD_NAME,
            "entries": entries,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("table serializes")
    }

    fn from_raw(raw: RawTable) -> Result<Self, CorrelationError> {
        let perr = |at: String, msg: String| CorrelationError::Parse(format!("{at}: {msg}"));
        let mut entries = BTreeMap::new();
        for (key, rows) in raw.entries {
            let at = format!("entries.\"{key}\"");
            let parts: Vec<usize> = key
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| perr(at.clone(), "key must be \"a,b,x,y\"".into()))?;
            let [a, b, x, y] = parts[..] else {
                return Err(perr(at, "key must have four labels".into()));
            };
            if a == 0 || b == 0 || a > raw.k || b > raw.k || x == 0 || y == 0 || x > raw.m || y > raw.m {
                return Err(perr(at, "label out of range".into()));
            }
            if rows.len() != raw.n {
                return Err(perr(at, format!("expected {} rows, found {}", raw.n, rows.len())));
            }
            let mut p = DMatrix::zeros(raw.n, raw.n);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != raw.n {
                    return Err(perr(format!("{at}[{i}]"), format!("expected {} columns", raw.n)));
                }
                for (j, v) in row.iter().enumerate() {
                    p[(i, j)] = T::from_json(v).map_err(|m| perr(format!("{at}[{i}][{j}]"), m))?;
                }
            }
            if entries.insert((a, b, x, y), p).is_some() {
                return Err(perr(at, "duplicate key".into()));
            }
        }
        CorrelationTable::new(raw.n, raw.m, raw.k, entries)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    n: usize,
    m: usize,
    k: usize,
    field: String,
    entries: BTreeMap<String, Vec<Vec<Value>>>,
}

/// A table read from JSON, with either scalar type.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTable {
    Exact(CorrelationTable<FieldElement>),
    Numeric(CorrelationTable<Complex64>),
}

impl AnyTable {
    /// Parse errors carry a line/column (syntax) or a key path (content).
    pub fn from_json_str(s: &str) -> Result<AnyTable, CorrelationError> {
        let raw: RawTable =
            serde_json::from_str(s).map_err(|e| CorrelationError::Parse(e.to_string()))?;
        match raw.field.as_str() {
            "exact" => Ok(AnyTable::Exact(CorrelationTable::from_raw(raw)?)),
            "complex128" => Ok(AnyTable::Numeric(CorrelationTable::from_raw(raw)?)),
            other => Err(CorrelationError::Parse(format!(
                "field: expected \"exact\" or \"complex128\", found \"{other}\""
            ))),
        }
    }

    pub fn to_json_string(&self) -> String {
        match self {
            AnyTable::Exact(t) => t.to_json_string(),
            AnyTable::Numeric(t) => t.to_json_string(),
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        match self {
            AnyTable::Exact(t) => (t.n, t.m, t.k),
            AnyTable::Numeric(t) => (t.n, t.m, t.k),
        }
    }

    pub fn invariant_violations(&self, tol: f64) -> Vec<String> {
        match self {
            AnyTable::Exact(t) => t.invariant_violations(tol),
            AnyTable::Numeric(t) => t.invariant_violations(tol),
        }
    }
}
