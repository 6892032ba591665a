//! Exact arithmetic in the biquadratic field ℚ(√2, ω), ω = exp(2πi/3).
//!
//! Every element is stored on the fixed basis {1, √2, ω, √2·ω} with
//! arbitrary-precision rational coordinates. Internally an element is
//! handled as `p + q·ω` with `p, q ∈ ℚ(√2)`, which keeps the product and
//! conjugation rules short:
//!
//! * `ω² = −1 − ω`, so `(p₁ + q₁ω)(p₂ + q₂ω) = (p₁p₂ − q₁q₂) + (p₁q₂ + q₁p₂ − q₁q₂)ω`
//! * `conj(p + qω) = (p − q) − qω`
//!
//! Zero tests compare coordinates exactly; nothing in this module uses a
//! tolerance.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::FieldError;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub const SQRT2_F64: f64 = std::f64::consts::SQRT_2;
pub const OMEGA_RE: f64 = -0.5;
pub const OMEGA_IM: f64 = 0.866_025_403_784_438_6;

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Element of ℚ(√2): `a + b√2`. Private helper for the `p + qω` view.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Quad {
    a: Rational,
    b: Rational,
}

impl Quad {
    fn add(&self, o: &Quad) -> Quad {
        Quad {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
        }
    }

    fn sub(&self, o: &Quad) -> Quad {
        Quad {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
        }
    }

    fn mul(&self, o: &Quad) -> Quad {
        let two = rat(2);
        Quad {
            a: &self.a * &o.a + two * (&self.b * &o.b),
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    fn neg(&self) -> Quad {
        Quad {
            a: -self.a.clone(),
            b: -self.b.clone(),
        }
    }
}

/// Exact scalar `a + b·√2 + c·ω + d·√2·ω`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl FieldElement {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        FieldElement { a, b, c, d }
    }

    pub fn from_rational(r: Rational) -> Self {
        FieldElement::new(r, Rational::zero(), Rational::zero(), Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        FieldElement::from_rational(rat(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        FieldElement::from_rational(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn sqrt2() -> Self {
        FieldElement::new(Rational::zero(), rat(1), Rational::zero(), Rational::zero())
    }

    /// `1/√2`, stored as `(1/2)·√2`.
    pub fn inv_sqrt2() -> Self {
        FieldElement::new(
            Rational::zero(),
            Rational::new(BigInt::from(1), BigInt::from(2)),
            Rational::zero(),
            Rational::zero(),
        )
    }

    pub fn omega() -> Self {
        FieldElement::new(Rational::zero(), Rational::zero(), rat(1), Rational::zero())
    }

    /// `ωⁿ` for any integer `n`.
    pub fn omega_pow(n: i64) -> Self {
        match n.rem_euclid(3) {
            0 => FieldElement::one(),
            1 => FieldElement::omega(),
            _ => FieldElement::new(rat(-1), Rational::zero(), rat(-1), Rational::zero()),
        }
    }

    fn split(&self) -> (Quad, Quad) {
        (
            Quad {
                a: self.a.clone(),
                b: self.b.clone(),
            },
            Quad {
                a: self.c.clone(),
                b: self.d.clone(),
            },
        )
    }

    fn join(p: Quad, q: Quad) -> Self {
        FieldElement::new(p.a, p.b, q.a, q.b)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    /// True when the element is fixed by complex conjugation (lies in ℚ(√2)).
    pub fn is_real(&self) -> bool {
        self.c.is_zero() && self.d.is_zero()
    }

    pub fn conj(&self) -> Self {
        let (p, q) = self.split();
        FieldElement::join(p.sub(&q), q.neg())
    }

    /// `x·conj(x)`, a real element of ℚ(√2).
    pub fn norm_sqr(&self) -> Self {
        self * &self.conj()
    }

    /// Multiplicative inverse, by solving the 4×4 rational system
    /// `L_x · y = e₁` where `L_x` is multiplication by `x` on the basis.
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let basis = [
            FieldElement::one(),
            FieldElement::sqrt2(),
            FieldElement::omega(),
            &FieldElement::sqrt2() * &FieldElement::omega(),
        ];
        // Column j of the matrix is x·basis[j] in coordinates.
        let mut m: Vec<Vec<Rational>> = vec![vec![Rational::zero(); 5]; 4];
        for (j, e) in basis.iter().enumerate() {
            let col = self * e;
            for (i, v) in col.coords().into_iter().enumerate() {
                m[i][j] = v;
            }
        }
        m[0][4] = Rational::one();
        for col in 0..4 {
            let pivot = (col..4)
                .find(|&r| !m[r][col].is_zero())
                .ok_or(FieldError::DivisionByZero)?;
            m.swap(col, pivot);
            let p = m[col][col].clone();
            for v in m[col].iter_mut() {
                *v = &*v / &p;
            }
            for r in 0..4 {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for k in 0..5 {
                        let t = &f * &m[col][k];
                        m[r][k] -= t;
                    }
                }
            }
        }
        Ok(FieldElement::new(
            m[0][4].clone(),
            m[1][4].clone(),
            m[2][4].clone(),
            m[3][4].clone(),
        ))
    }

    pub fn coords(&self) -> [Rational; 4] {
        [self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone()]
    }

    /// Integer power; negative exponents go through [`FieldElement::inv`].
    pub fn pow(&self, n: i64) -> Result<Self, FieldError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = FieldElement::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Sign of a real element, exact. `None` if the element is not real.
    pub fn real_sign(&self) -> Option<Ordering> {
        if !self.is_real() {
            return None;
        }
        Some(quad_sign(&self.a, &self.b))
    }

    /// Exact comparison of two real elements.
    pub fn real_cmp(&self, other: &Self) -> Option<Ordering> {
        (self - other).real_sign()
    }

    /// Square root inside ℚ(√2) for nonnegative real elements, when it exists there.
    ///
    /// Solves `(s + t√2)² = a + b√2`, i.e. `s² + 2t² = a`, `2st = b`.
    pub fn sqrt(&self) -> Option<Self> {
        if self.real_sign()? == Ordering::Less {
            return None;
        }
        if self.is_zero() {
            return Some(FieldElement::zero());
        }
        let (a, b) = (&self.a, &self.b);
        if b.is_zero() {
            if let Some(s) = rational_sqrt(a) {
                return Some(FieldElement::from_rational(s));
            }
            // a = 2t²
            let half = a / rat(2);
            return rational_sqrt(&half).map(|t| {
                FieldElement::new(Rational::zero(), t, Rational::zero(), Rational::zero())
            });
        }
        // s² = (a ± √(a² − 2b²)) / 2
        let disc = a * a - rat(2) * b * b;
        let root = rational_sqrt(&disc)?;
        for cand in [(a + &root) / rat(2), (a - &root) / rat(2)] {
            if cand.is_positive() {
                if let Some(s) = rational_sqrt(&cand) {
                    let t = b / (rat(2) * &s);
                    let out =
                        FieldElement::new(s.clone(), t, Rational::zero(), Rational::zero());
                    if &(&out * &out) == self {
                        return Some(out);
                    }
                }
            }
        }
        None
    }

    /// Numerical embedding into ℂ.
    pub fn to_complex(&self) -> Result<Complex64, FieldError> {
        let f = |r: &Rational| -> Result<f64, FieldError> {
            let v = rational_to_f64(r);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(FieldError::Range)
            }
        };
        let (a, b, c, d) = (f(&self.a)?, f(&self.b)?, f(&self.c)?, f(&self.d)?);
        let re_p = a + b * SQRT2_F64;
        let re_q = c + d * SQRT2_F64;
        Ok(Complex64::new(re_p + re_q * OMEGA_RE, re_q * OMEGA_IM))
    }

    /// Infallible variant of [`FieldElement::to_complex`] for values known to be in range.
    pub fn to_c64(&self) -> Complex64 {
        self.to_complex()
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    /// Symbolic rendering `a + b√2 + cω + d√2ω`, omitting zero terms.
    pub fn symbolic(&self) -> String {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (coef, unit) in [
            (&self.a, ""),
            (&self.b, "√2"),
            (&self.c, "ω"),
            (&self.d, "√2ω"),
        ] {
            if coef.is_zero() {
                continue;
            }
            let neg = coef.is_negative();
            let mag = coef.abs();
            let body = if unit.is_empty() {
                fmt_rational(&mag)
            } else {
                let num = mag.numer();
                let head = if num.is_one() { String::new() } else { num.to_string() };
                if mag.denom().is_one() {
                    format!("{head}{unit}")
                } else {
                    format!("{head}{unit}/{}", mag.denom())
                }
            };
            parts.push((neg, body));
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (neg, body)) in parts.into_iter().enumerate() {
            match (i, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            s.push_str(&body);
        }
        s
    }
}

fn quad_sign(a: &Rational, b: &Rational) -> Ordering {
    // sign of a + b√2
    let sa = a.cmp(&Rational::zero());
    let sb = b.cmp(&Rational::zero());
    match (sa, sb) {
        (Ordering::Equal, s) => s,
        (s, Ordering::Equal) => s,
        (x, y) if x == y => x,
        _ => {
            // opposite signs: compare a² with 2b²
            let lhs = a * a;
            let rhs = rat(2) * b * b;
            match lhs.cmp(&rhs) {
                Ordering::Greater => sa,
                Ordering::Less => sb,
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both parts down to the representable range.
            let nb = r.numer().bits() as i64;
            let db = r.denom().bits() as i64;
            let shift_n = (nb - 900).max(0) as usize;
            let shift_d = (db - 900).max(0) as usize;
            let n = (r.numer() >> shift_n).to_f64().unwrap_or(f64::INFINITY);
            let d = (r.denom() >> shift_d).to_f64().unwrap_or(f64::INFINITY);
            n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
        }
    }
}

pub(crate) fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rational(s: &str) -> Result<Rational, FieldError> {
    let s = s.trim();
    let bad = || FieldError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbolic())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbolic())
    }
}

impl Zero for FieldElement {
    fn zero() -> Self {
        FieldElement::from_rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        FieldElement::is_zero(self)
    }
}

impl One for FieldElement {
    fn one() -> Self {
        FieldElement::from_int(1)
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        FieldElement::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c, &self.d + &o.d)
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        FieldElement::new(&self.a - &o.a, &self.b - &o.b, &self.c - &o.c, &self.d - &o.d)
    }
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        let (p1, q1) = self.split();
        let (p2, q2) = o.split();
        let q1q2 = q1.mul(&q2);
        let p = p1.mul(&p2).sub(&q1q2);
        let q = p1.mul(&q2).add(&q1.mul(&p2)).sub(&q1q2);
        FieldElement::join(p, q)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::new(
            -self.a.clone(),
            -self.b.clone(),
            -self.c.clone(),
            -self.d.clone(),
        )
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: &FieldElement) -> FieldElement {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

/// Division panics on a zero divisor; use [`FieldElement::inv`] to handle that case.
impl Div<FieldElement> for FieldElement {
    type Output = FieldElement;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: FieldElement) -> FieldElement {
        &self * &o.inv().expect("division by zero in FieldElement")
    }
}

impl AddAssign<&FieldElement> for FieldElement {
    fn add_assign(&mut self, o: &FieldElement) {
        *self = &*self + o;
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, o: FieldElement) {
        *self = &*self + &o;
    }
}

impl SubAssign for FieldElement {
    fn sub_assign(&mut self, o: FieldElement) {
        *self = &*self - &o;
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, o: FieldElement) {
        *self = &*self * &o;
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldElementJson {
    a: String,
    b: String,
    c: String,
    d: String,
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = |x: &Rational| format!("{}/{}", x.numer(), x.denom());
        FieldElementJson {
            a: r(&self.a),
            b: r(&self.b),
            c: r(&self.c),
            d: r(&self.d),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = FieldElementJson::deserialize(d)?;
        let p = |s: &str| parse_rational(s).map_err(D::Error::custom);
        Ok(FieldElement::new(p(&j.a)?, p(&j.b)?, p(&j.c)?, p(&j.d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(a: i64, b: i64, c: i64, d: i64) -> FieldElement {
        FieldElement::new(rat(a), rat(b), rat(c), rat(d))
    }

    #[test]
    fn addition_examples() {
        assert!((FieldElement::one() + FieldElement::from_int(-1)).is_zero());
        let omega2 = fe(-1, 0, -1, 0);
        assert_eq!(FieldElement::omega() + omega2, FieldElement::from_int(-1));
        let half_sqrt2 = FieldElement::inv_sqrt2();
        assert_eq!(&half_sqrt2 + &half_sqrt2, FieldElement::sqrt2());
    }

    #[test]
    fn multiplication_examples() {
        let s = FieldElement::sqrt2();
        assert_eq!(&s * &s, FieldElement::from_int(2));
        let h = FieldElement::inv_sqrt2();
        assert_eq!(&h * &h, FieldElement::ratio(1, 2));
        let w = FieldElement::omega();
        assert_eq!(&(&w * &w) * &w, FieldElement::one());
        assert_eq!(&w * &w, FieldElement::omega_pow(2));
        assert_eq!(FieldElement::omega_pow(-1), FieldElement::omega_pow(2));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(FieldElement::from_int(2).inv().unwrap(), FieldElement::ratio(1, 2));
        assert_eq!(FieldElement::sqrt2().inv().unwrap(), FieldElement::inv_sqrt2());
        let x = FieldElement::one() - FieldElement::ratio(1, 2);
        assert_eq!(x.inv().unwrap(), FieldElement::from_int(2));
        assert_eq!(FieldElement::zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn inverse_agrees_with_norm_route() {
        // Independent route: 1/x = conj(x) / N(x), N(x) ∈ ℚ(√2) inverted by (s − t√2)/(s² − 2t²).
        let x = fe(3, -1, 2, 5);
        let n = x.norm_sqr();
        assert!(n.is_real());
        let den = &n.a * &n.a - rat(2) * &n.b * &n.b;
        let n_inv = FieldElement::new(&n.a / &den, -&n.b / &den, rat(0), rat(0));
        assert_eq!(x.inv().unwrap(), &x.conj() * &n_inv);
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(FieldElement::omega().conj(), fe(-1, 0, -1, 0));
        assert_eq!(FieldElement::sqrt2().conj(), FieldElement::sqrt2());
        assert!((&FieldElement::omega() * &FieldElement::omega().conj()).is_one());
    }

    #[test]
    fn complex_embedding_examples() {
        let v = FieldElement::inv_sqrt2().to_complex().unwrap();
        assert!((v.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16 && v.im == 0.0);
        let w = FieldElement::omega().to_complex().unwrap();
        assert_eq!(w.re, -0.5);
        assert!((w.im - 0.8660254037844386).abs() < 1e-16);
        let z = FieldElement::one() + FieldElement::omega() + fe(-1, 0, -1, 0);
        assert_eq!(z.to_complex().unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sqrt_in_field() {
        assert_eq!(FieldElement::ratio(1, 4).sqrt(), Some(FieldElement::ratio(1, 2)));
        assert_eq!(FieldElement::from_int(2).sqrt(), Some(FieldElement::sqrt2()));
        // (1 + √2)² = 3 + 2√2
        assert_eq!(fe(3, 2, 0, 0).sqrt(), Some(fe(1, 1, 0, 0)));
        assert_eq!(FieldElement::from_int(3).sqrt(), None);
        assert_eq!(FieldElement::from_int(-1).sqrt(), None);
    }

    #[test]
    fn real_sign_is_exact() {
        assert_eq!(fe(-1, 1, 0, 0).real_sign(), Some(Ordering::Greater)); // √2 − 1
        assert_eq!(fe(3, -2, 0, 0).real_sign(), Some(Ordering::Greater)); // 3 − 2√2
        assert_eq!(fe(1, -1, 0, 0).real_sign(), Some(Ordering::Less));
        assert_eq!(FieldElement::omega().real_sign(), None);
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&FieldElement::inv_sqrt2()).unwrap();
        assert_eq!(s, r#"{"a":"0/1","b":"1/2","c":"0/1","d":"0/1"}"#);
        let back: FieldElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, FieldElement::inv_sqrt2());
        let loose: FieldElement =
            serde_json::from_str(r#"{"a":"-3","b":"0","c":"2/4","d":"0"}"#).unwrap();
        assert_eq!(loose, fe(-3, 0, 0, 0) + FieldElement::ratio(1, 2) * FieldElement::omega());
    }

    #[test]
    fn symbolic_rendering() {
        assert_eq!(fe(1, -2, 0, 1).symbolic(), "1 - 2√2 + √2ω");
        assert_eq!(FieldElement::inv_sqrt2().symbolic(), "√2/2");
        assert_eq!(fe(0, 0, 0, 3).symbolic(), "3√2ω");
        assert_eq!(FieldElement::zero().symbolic(), "0");
    }
}
