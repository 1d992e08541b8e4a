//! Exact arithmetic in small finite fields GF(p^k).
//!
//! A [`Field`] is an interned handle to a validated [`FieldSpec`] together with
//! its precomputed arithmetic tables. Elements carry their field and refuse to
//! combine with elements of a different field.
//!
//! Elements are identified by a canonical index: the coefficient vector
//! `(c_0, .., c_{k-1})` of the polynomial representative maps to
//! `c_0 + c_1 p + .. + c_{k-1} p^{k-1}`. Ordering elements by index is the
//! lexicographic order on the coefficient vector read from the highest degree
//! down, so GF(4) enumerates as `0, 1, x, x+1`.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order. Inverses are found by exhaustive search.
pub const MAX_ORDER: u32 = 4096;

/// Fields up to this order get full addition and multiplication tables.
const TABLE_ORDER: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be 1, 2 or 3 (got {0})")]
    UnsupportedDegree(u32),
    #[error("invalid reduction polynomial: {0}")]
    BadPolynomial(String),
    #[error("reduction polynomial {0:?} is reducible over Z_{1}")]
    Reducible(Vec<u32>, u32),
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge(u64),
    #[error("{0} is not a prime power of supported size")]
    NotPrimePower(u32),
    #[error("operands belong to different fields ({0} vs {1})")]
    Mismatch(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{value} is not an element of {field}")]
    OutOfRange { value: u64, field: String },
}

/// Description of a finite field: characteristic, extension degree and (for
/// `k > 1`) a monic reduction polynomial given low-to-high, length `k + 1`.
/// Without one, [`Field::new`] uses the default for the order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    #[serde(default = "one_u32")]
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction_poly: Option<Vec<u32>>,
}

fn one_u32() -> u32 {
    1
}

impl FieldSpec {
    pub fn prime(p: u32) -> Self {
        FieldSpec { p, k: 1, reduction_poly: None }
    }

    pub fn extension(p: u32, k: u32, reduction_poly: Vec<u32>) -> Self {
        FieldSpec { p, k, reduction_poly: Some(reduction_poly) }
    }

    /// The shipped default description for a field of the given order.
    ///
    /// GF(4), GF(8) and GF(9) use `x^2+x+1`, `x^3+x+1` and `x^2+1`; other
    /// prime squares and cubes use the first irreducible monic polynomial in
    /// lexicographic order of their low-to-high coefficients.
    pub fn for_order(order: u32) -> Result<Self, FieldError> {
        let (p, k) = prime_power(order).ok_or(FieldError::NotPrimePower(order))?;
        Ok(match (p, k) {
            (_, 1) => FieldSpec::prime(p),
            (2, 2) => FieldSpec::extension(2, 2, vec![1, 1, 1]),
            (2, 3) => FieldSpec::extension(2, 3, vec![1, 1, 0, 1]),
            (3, 2) => FieldSpec::extension(3, 2, vec![1, 0, 1]),
            (p, k) if k <= 3 => FieldSpec::extension(p, k, first_irreducible(p, k)),
            _ => return Err(FieldError::UnsupportedDegree(k)),
        })
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reduction_poly {
            Some(poly) if self.k > 1 => {
                write!(f, "GF({}^{})[{}]", self.p, self.k, format_poly(poly))
            }
            _ => write!(f, "GF({})", self.p),
        }
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_power(order: u32) -> Option<(u32, u32)> {
    if order < 2 {
        return None;
    }
    let p = (2..=order).find(|&d| order.is_multiple_of(d))?;
    let mut rest = order;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Whether the polynomial (low-to-high coefficients) vanishes somewhere in Z_p.
fn has_root(poly: &[u32], p: u32) -> bool {
    (0..p).any(|t| {
        let mut acc = 0u64;
        for &c in poly.iter().rev() {
            acc = (acc * t as u64 + c as u64) % p as u64;
        }
        acc == 0
    })
}

fn first_irreducible(p: u32, k: u32) -> Vec<u32> {
    let free = k as usize;
    let count = (p as u64).pow(k);
    for code in 0..count {
        let mut poly = Vec::with_capacity(free + 1);
        let mut c = code;
        for _ in 0..free {
            poly.push((c % p as u64) as u32);
            c /= p as u64;
        }
        poly.push(1);
        if !has_root(&poly, p) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials of degree {k} exist over every prime field")
}

fn format_poly(poly: &[u32]) -> String {
    let mut terms = Vec::new();
    for (deg, &c) in poly.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coeff = if c == 1 && deg > 0 { String::new() } else { c.to_string() };
        terms.push(match deg {
            0 => coeff,
            1 => format!("{coeff}x"),
            _ => format!("{coeff}x^{deg}"),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

struct FieldData {
    spec: FieldSpec,
    order: u32,
    /// Low-order coefficients of `x^k` after reduction: `x^k = -sum r_i x^i`.
    reduction: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

impl FieldData {
    fn build(spec: FieldSpec) -> Result<Self, FieldError> {
        let FieldSpec { p, k, ref reduction_poly } = spec;
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if !(1..=3).contains(&k) {
            return Err(FieldError::UnsupportedDegree(k));
        }
        let order = (p as u64).pow(k);
        if order > MAX_ORDER as u64 {
            return Err(FieldError::TooLarge(order));
        }
        let reduction = match (k, reduction_poly) {
            (1, None) => Vec::new(),
            (1, Some(_)) => return Err(FieldError::BadPolynomial("prime fields take no reduction polynomial".into())),
            (_, None) => {
                return Err(FieldError::BadPolynomial(format!("degree-{k} extension needs a reduction polynomial")))
            }
            (_, Some(poly)) => {
                if poly.len() != k as usize + 1 {
                    return Err(FieldError::BadPolynomial(format!(
                        "expected {} coefficients, got {}",
                        k + 1,
                        poly.len()
                    )));
                }
                if poly.iter().any(|&c| c >= p) {
                    return Err(FieldError::BadPolynomial(format!("coefficients must lie in [0, {p})")));
                }
                if poly[k as usize] != 1 {
                    return Err(FieldError::BadPolynomial("polynomial must be monic".into()));
                }
                // Degree 2 and 3 polynomials are reducible exactly when they have a root.
                if has_root(poly, p) {
                    return Err(FieldError::Reducible(poly.clone(), p));
                }
                poly[..k as usize].to_vec()
            }
        };
        let mut data = FieldData {
            spec,
            order: order as u32,
            reduction,
            add: Vec::new(),
            mul: Vec::new(),
            neg: Vec::new(),
            inv: Vec::new(),
        };
        let q = data.order;
        data.neg = (0..q).map(|a| data.raw_neg(a) as u16).collect();
        if q <= TABLE_ORDER {
            let mut add = Vec::with_capacity((q * q) as usize);
            let mut mul = Vec::with_capacity((q * q) as usize);
            for a in 0..q {
                for b in 0..q {
                    add.push(data.raw_add(a, b) as u16);
                    mul.push(data.raw_mul(a, b) as u16);
                }
            }
            data.add = add;
            data.mul = mul;
        }
        // Exhaustive inverse search; index 0 keeps the placeholder 0.
        let mut inv = vec![0u16; q as usize];
        for a in 1..q {
            inv[a as usize] = (1..q)
                .find(|&b| data.mul_idx(a, b) == 1)
                .expect("every nonzero element of a field is invertible") as u16;
        }
        data.inv = inv;
        Ok(data)
    }

    fn digits(&self, mut a: u32) -> Vec<u32> {
        let p = self.spec.p;
        (0..self.spec.k)
            .map(|_| {
                let d = a % p;
                a /= p;
                d
            })
            .collect()
    }

    fn undigits(&self, digits: &[u32]) -> u32 {
        let p = self.spec.p;
        digits.iter().rev().fold(0, |acc, &d| acc * p + d)
    }

    fn raw_add(&self, a: u32, b: u32) -> u32 {
        let p = self.spec.p;
        if self.spec.k == 1 {
            return (a + b) % p;
        }
        let da = self.digits(a);
        let db = self.digits(b);
        let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
        self.undigits(&sum)
    }

    fn raw_neg(&self, a: u32) -> u32 {
        let p = self.spec.p;
        let d: Vec<u32> = self.digits(a).iter().map(|&x| (p - x) % p).collect();
        self.undigits(&d)
    }

    fn raw_mul(&self, a: u32, b: u32) -> u32 {
        let p = self.spec.p as u64;
        let k = self.spec.k as usize;
        if k == 1 {
            return ((a as u64 * b as u64) % p) as u32;
        }
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // Reduce from the top: x^k == -sum r_i x^i.
        for deg in (k..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for (i, &r) in self.reduction.iter().enumerate() {
                let t = deg - k + i;
                prod[t] = (prod[t] + (p - r as u64) * c) % p;
            }
        }
        let low: Vec<u32> = prod[..k].iter().map(|&c| c as u32).collect();
        self.undigits(&low)
    }

    #[inline]
    fn add_idx(&self, a: u32, b: u32) -> u32 {
        if self.add.is_empty() {
            self.raw_add(a, b)
        } else {
            self.add[(a * self.order + b) as usize] as u32
        }
    }

    #[inline]
    fn mul_idx(&self, a: u32, b: u32) -> u32 {
        if self.mul.is_empty() {
            self.raw_mul(a, b)
        } else {
            self.mul[(a * self.order + b) as usize] as u32
        }
    }
}

fn registry() -> &'static Mutex<HashMap<FieldSpec, &'static FieldData>> {
    static REGISTRY: OnceLock<Mutex<HashMap<FieldSpec, &'static FieldData>>> = OnceLock::new();
    REGISTRY.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Handle to a validated finite field. Cheap to copy; two handles compare
/// equal exactly when they were built from the same [`FieldSpec`].
#[derive(Clone, Copy)]
pub struct Field(&'static FieldData);

impl Field {
    /// An extension without a reduction polynomial gets the default one.
    pub fn new(mut spec: FieldSpec) -> Result<Field, FieldError> {
        if spec.k > 1 && spec.reduction_poly.is_none() && is_prime(spec.p) && (1..=3).contains(&spec.k) {
            if let Some(order) = spec.p.checked_pow(spec.k) {
                spec.reduction_poly = FieldSpec::for_order(order)?.reduction_poly;
            }
        }
        let mut reg = registry().lock().unwrap_or_else(|e| e.into_inner());
        if let Some(data) = reg.get(&spec) {
            return Ok(Field(data));
        }
        // Fields are few and tiny; interned tables live for the whole process.
        let data: &'static FieldData = Box::leak(Box::new(FieldData::build(spec.clone())?));
        reg.insert(spec, data);
        Ok(Field(data))
    }

    pub fn prime(p: u32) -> Result<Field, FieldError> {
        Field::new(FieldSpec::prime(p))
    }

    /// The field of the given order with its default reduction polynomial.
    pub fn of_order(order: u32) -> Result<Field, FieldError> {
        Field::new(FieldSpec::for_order(order)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn characteristic(&self) -> u32 {
        self.0.spec.p
    }

    pub fn degree(&self) -> u32 {
        self.0.spec.k
    }

    pub fn order(&self) -> u32 {
        self.0.order
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { field: *self, idx: 0 }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { field: *self, idx: 1 }
    }

    /// Element with the given canonical index.
    pub fn element(&self, idx: u64) -> Result<FieldElement, FieldError> {
        if idx >= self.order() as u64 {
            return Err(FieldError::OutOfRange { value: idx, field: self.to_string() });
        }
        Ok(FieldElement { field: *self, idx: idx as u16 })
    }

    /// Element from its low-to-high coefficient vector (length `k`).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        let p = self.characteristic();
        if coeffs.len() != self.degree() as usize || coeffs.iter().any(|&c| c >= p) {
            return Err(FieldError::OutOfRange { value: self.0.undigits(coeffs) as u64, field: self.to_string() });
        }
        Ok(FieldElement { field: *self, idx: self.0.undigits(coeffs) as u16 })
    }

    /// Embeds an integer by reduction mod p. Only meaningful for prime fields.
    pub fn from_int(&self, value: i64) -> FieldElement {
        debug_assert_eq!(self.degree(), 1);
        let p = self.characteristic() as i64;
        FieldElement { field: *self, idx: value.rem_euclid(p) as u16 }
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> Vec<FieldElement> {
        (0..self.order()).map(|i| FieldElement { field: *self, idx: i as u16 }).collect()
    }

    pub fn nonzero_elements(&self) -> Vec<FieldElement> {
        (1..self.order()).map(|i| FieldElement { field: *self, idx: i as u16 }).collect()
    }

    fn ensure_same(&self, other: &Field) -> Result<(), FieldError> {
        if self == other {
            Ok(())
        } else {
            Err(FieldError::Mismatch(self.to_string(), other.to_string()))
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Field {}

impl Hash for Field {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (self.0 as *const FieldData as usize).hash(state);
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.0.spec)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.spec.fmt(f)
    }
}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.spec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let spec = FieldSpec::deserialize(d)?;
        Field::new(spec).map_err(serde::de::Error::custom)
    }
}

/// An element of a [`Field`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    idx: u16,
}

impl FieldElement {
    pub fn field(&self) -> Field {
        self.field
    }

    /// Canonical index; equals the residue for prime fields.
    pub fn index(&self) -> u32 {
        self.idx as u32
    }

    pub fn coeffs(&self) -> Vec<u32> {
        self.field.0.digits(self.idx as u32)
    }

    pub fn is_zero(&self) -> bool {
        self.idx == 0
    }

    pub fn checked_add(&self, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        self.field.ensure_same(&rhs.field)?;
        Ok(self.with(self.field.0.add_idx(self.idx as u32, rhs.idx as u32)))
    }

    pub fn checked_sub(&self, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        self.field.ensure_same(&rhs.field)?;
        let neg = self.field.0.neg[rhs.idx as usize] as u32;
        Ok(self.with(self.field.0.add_idx(self.idx as u32, neg)))
    }

    pub fn checked_mul(&self, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        self.field.ensure_same(&rhs.field)?;
        Ok(self.with(self.field.0.mul_idx(self.idx as u32, rhs.idx as u32)))
    }

    pub fn checked_div(&self, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        self.field.ensure_same(&rhs.field)?;
        let inv = rhs.inv()?;
        self.checked_mul(&inv)
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.with(self.field.0.inv[self.idx as usize] as u32))
    }

    pub fn pow(&self, mut e: u64) -> FieldElement {
        let mut base = *self;
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    #[inline]
    fn with(&self, idx: u32) -> FieldElement {
        FieldElement { field: self.field, idx: idx as u16 }
    }
}

#[cold]
#[inline(never)]
fn mismatch(a: Field, b: Field) -> ! {
    panic!("{}", FieldError::Mismatch(a.to_string(), b.to_string()))
}

// Operator forms panic on mismatched fields; use the `checked_*` methods where
// operands may come from different fields.
impl Add for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn add(self, rhs: FieldElement) -> FieldElement {
        if self.field != rhs.field {
            mismatch(self.field, rhs.field);
        }
        self.with(self.field.0.add_idx(self.idx as u32, rhs.idx as u32))
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn sub(self, rhs: FieldElement) -> FieldElement {
        if self.field != rhs.field {
            mismatch(self.field, rhs.field);
        }
        self.with(self.field.0.add_idx(self.idx as u32, self.field.0.neg[rhs.idx as usize] as u32))
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn mul(self, rhs: FieldElement) -> FieldElement {
        if self.field != rhs.field {
            mismatch(self.field, rhs.field);
        }
        self.with(self.field.0.mul_idx(self.idx as u32, rhs.idx as u32))
    }
}

impl Div for FieldElement {
    type Output = FieldElement;
    fn div(self, rhs: FieldElement) -> FieldElement {
        self.checked_div(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.with(self.field.0.neg[self.idx as usize] as u32)
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.idx.cmp(&other.idx)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.degree() == 1 {
            write!(f, "{}", self.idx)
        } else {
            let mut coeffs = self.coeffs();
            coeffs.push(0);
            f.write_str(&format_poly(&coeffs))
        }
    }
}

impl Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.idx as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(order: u32) -> Field {
        Field::of_order(order).unwrap()
    }

    fn el(f: Field, i: u64) -> FieldElement {
        f.element(i).unwrap()
    }

    #[test]
    fn small_prime_field_examples() {
        let f2 = gf(2);
        assert_eq!(el(f2, 1) + el(f2, 1), el(f2, 0));
        let f3 = gf(3);
        assert_eq!(el(f3, 2) + el(f3, 2), el(f3, 1));
        assert_eq!(el(f3, 0) - el(f3, 2), el(f3, 1));
        assert_eq!(el(f3, 2) * el(f3, 2), el(f3, 1));
        let f5 = gf(5);
        assert_eq!(el(f5, 1) - el(f5, 3), el(f5, 3));
        assert_eq!(el(f5, 3).inv().unwrap(), el(f5, 2));
    }

    #[test]
    fn gf4_examples() {
        let f4 = gf(4);
        let x = f4.from_coeffs(&[0, 1]).unwrap();
        let x1 = f4.from_coeffs(&[1, 1]).unwrap();
        assert_eq!(x + x1, f4.one());
        assert_eq!(x * x, x1);
        assert_eq!(x.inv().unwrap(), x1);
        assert_eq!(x1.to_string(), "x+1");
    }

    #[test]
    fn gf4_table_matches_hand_reduction() {
        // Products of a0 + a1 x and b0 + b1 x reduced with x^2 = x + 1 over Z_2.
        let f4 = gf(4);
        for a in f4.elements() {
            for b in f4.elements() {
                let (a0, a1) = (a.coeffs()[0], a.coeffs()[1]);
                let (b0, b1) = (b.coeffs()[0], b.coeffs()[1]);
                let c0 = a0 * b0;
                let c1 = a0 * b1 + a1 * b0;
                let c2 = a1 * b1;
                let expect = [(c0 + c2) % 2, (c1 + c2) % 2];
                assert_eq!((a * b).coeffs(), expect, "{a} * {b}");
            }
        }
    }

    #[test]
    fn enumerate_is_canonical() {
        let idx = |f: Field| f.elements().iter().map(|e| e.index()).collect::<Vec<_>>();
        assert_eq!(idx(gf(2)), vec![0, 1]);
        assert_eq!(idx(gf(3)), vec![0, 1, 2]);
        let names: Vec<String> = gf(4).elements().iter().map(|e| e.to_string()).collect();
        assert_eq!(names, ["0", "1", "x", "x+1"]);
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = gf(3).one();
        let b = gf(5).one();
        assert!(matches!(a.checked_add(&b), Err(FieldError::Mismatch(..))));
        assert!(matches!(a.checked_mul(&b), Err(FieldError::Mismatch(..))));
    }

    #[test]
    #[should_panic(expected = "different fields")]
    fn mismatch_panics_in_operator_form() {
        let _ = gf(3).one() + gf(5).one();
    }

    #[test]
    fn division_by_zero() {
        let f = gf(7);
        assert_eq!(f.zero().inv(), Err(FieldError::DivisionByZero));
        assert_eq!(f.one().checked_div(&f.zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn construction_rejects_bad_specs() {
        assert_eq!(Field::prime(9).unwrap_err(), FieldError::NotPrime(9));
        assert!(matches!(Field::new(FieldSpec::extension(2, 2, vec![1, 0, 1])), Err(FieldError::Reducible(..))));
        assert!(matches!(Field::new(FieldSpec::extension(2, 2, vec![1, 1, 0])), Err(FieldError::BadPolynomial(_))));
        assert!(matches!(
            Field::new(FieldSpec::extension(2, 4, vec![1, 1, 0, 0, 1])),
            Err(FieldError::UnsupportedDegree(4))
        ));
        assert!(matches!(Field::prime(4099), Err(FieldError::TooLarge(_))));
        assert!(matches!(FieldSpec::for_order(6), Err(FieldError::NotPrimePower(6))));
    }

    #[test]
    fn interning_gives_equal_handles() {
        let a = Field::new(FieldSpec::extension(3, 2, vec![1, 0, 1])).unwrap();
        let b = gf(9);
        assert_eq!(a, b);
        let other = Field::new(FieldSpec::extension(3, 2, vec![2, 2, 1])).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn spec_roundtrips_through_toml_shape() {
        let spec: FieldSpec = serde_json::from_str(r#"{"p":2,"k":3,"reduction_poly":[1,1,0,1]}"#).unwrap();
        assert_eq!(Field::new(spec).unwrap(), gf(8));
        let prime: FieldSpec = serde_json::from_str(r#"{"p":5}"#).unwrap();
        assert_eq!(prime, FieldSpec::prime(5));
    }

    #[test]
    fn missing_polynomial_means_default() {
        let spec = FieldSpec { p: 3, k: 2, reduction_poly: None };
        assert_eq!(Field::new(spec).unwrap(), Field::of_order(9).unwrap());
    }

    #[test]
    fn default_polynomials() {
        assert_eq!(FieldSpec::for_order(4).unwrap().reduction_poly, Some(vec![1, 1, 1]));
        assert_eq!(FieldSpec::for_order(8).unwrap().reduction_poly, Some(vec![1, 1, 0, 1]));
        assert_eq!(FieldSpec::for_order(9).unwrap().reduction_poly, Some(vec![1, 0, 1]));
        // 25 = 5^2: x^2 + 2 is the first rootless monic quadratic over Z_5.
        assert_eq!(FieldSpec::for_order(25).unwrap().reduction_poly, Some(vec![2, 0, 1]));
    }

    #[test]
    fn large_prime_field_without_tables() {
        let f = Field::prime(1031).unwrap();
        let a = f.from_int(1000);
        let b = f.from_int(500);
        assert_eq!((a + b).index(), 469);
        assert_eq!((a * b).index(), (1000u64 * 500 % 1031) as u32);
        assert_eq!(a * a.inv().unwrap(), f.one());
    }
}
