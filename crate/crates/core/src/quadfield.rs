//! Arithmetic of a quadratic field K = ℚ(√d).
//!
//! Elements of the ring of integers ℤ_K are pairs (a, b) in the integral
//! basis {1, ω}, where ω = (1+√d)/2 when d ≡ 1 mod 4 and ω = √d otherwise.
//! All arithmetic is exact over arbitrary-precision integers; the only
//! real-embedding comparisons (element signs, search boxes) are done with
//! integer square roots, never floating point.
//!
//! The field object carries the discriminant, signature, torsion order of
//! the unit group, the fundamental unit ε_K for real fields (computed by the
//! continued-fraction expansion of ω, which terminates at the first
//! convergent of unit norm and yields the minimal unit > 1), and a lazily
//! computed class number.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::ideals::{self, IntegralIdeal};

/// Default cap on search loop iterations (continued fractions, principal
/// ideal boxes, class-group closure).
pub const DEFAULT_SEARCH_BOUND: u64 = 50_000_000;

/// An element a + b·ω of ℤ_K, tagged with the field parameter d.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadInt {
    d: i64,
    a: BigInt,
    b: BigInt,
}

impl QuadInt {
    pub(crate) fn raw(d: i64, a: BigInt, b: BigInt) -> QuadInt {
        QuadInt { d, a, b }
    }

    pub(crate) fn one_for(d: i64) -> QuadInt {
        QuadInt {
            d,
            a: BigInt::one(),
            b: BigInt::zero(),
        }
    }

    /// True when d ≡ 1 mod 4 for this element's field, i.e. ω = (1+√d)/2.
    fn half_basis(&self) -> bool {
        self.d.rem_euclid(4) == 1
    }

    pub fn field_d(&self) -> i64 {
        self.d
    }

    pub fn coeffs(&self) -> (&BigInt, &BigInt) {
        (&self.a, &self.b)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// N_{K/ℚ}(a + bω), an exact integer.
    pub fn norm(&self) -> BigInt {
        if self.half_basis() {
            // N = a² + ab + b²(1-d)/4
            let q = BigInt::from((1 - self.d) / 4);
            &self.a * &self.a + &self.a * &self.b + &self.b * &self.b * q
        } else {
            &self.a * &self.a - BigInt::from(self.d) * &self.b * &self.b
        }
    }

    /// Tr_{K/ℚ}(a + bω).
    pub fn trace(&self) -> BigInt {
        if self.half_basis() {
            2 * &self.a + &self.b
        } else {
            2 * &self.a
        }
    }

    /// Image under the nontrivial automorphism √d ↦ −√d.
    pub fn conj(&self) -> QuadInt {
        if self.half_basis() {
            // conj(ω) = 1 - ω
            QuadInt {
                d: self.d,
                a: &self.a + &self.b,
                b: -&self.b,
            }
        } else {
            QuadInt {
                d: self.d,
                a: self.a.clone(),
                b: -&self.b,
            }
        }
    }

    pub fn checked_add(&self, rhs: &QuadInt) -> Result<QuadInt> {
        self.same_field(rhs)?;
        Ok(QuadInt {
            d: self.d,
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        })
    }

    pub fn checked_sub(&self, rhs: &QuadInt) -> Result<QuadInt> {
        self.same_field(rhs)?;
        Ok(QuadInt {
            d: self.d,
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        })
    }

    pub fn checked_mul(&self, rhs: &QuadInt) -> Result<QuadInt> {
        self.same_field(rhs)?;
        let cross = &self.a * &rhs.b + &self.b * &rhs.a;
        let bb = &self.b * &rhs.b;
        Ok(if self.half_basis() {
            // ω² = (d-1)/4 + ω
            let t = BigInt::from((self.d - 1) / 4);
            QuadInt {
                d: self.d,
                a: &self.a * &rhs.a + &bb * t,
                b: cross + bb,
            }
        } else {
            QuadInt {
                d: self.d,
                a: &self.a * &rhs.a + bb * BigInt::from(self.d),
                b: cross,
            }
        })
    }

    fn same_field(&self, rhs: &QuadInt) -> Result<()> {
        if self.d == rhs.d {
            Ok(())
        } else {
            Err(Error::MixedFields(self.d, rhs.d))
        }
    }

    pub fn pow(&self, mut e: u64) -> QuadInt {
        let mut base = self.clone();
        let mut acc = QuadInt {
            d: self.d,
            a: BigInt::one(),
            b: BigInt::zero(),
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base).expect("same field");
            }
            base = base.checked_mul(&base).expect("same field");
            e >>= 1;
        }
        acc
    }

    /// Reduce both coordinates into [0, m).
    pub fn reduce_mod(&self, m: &BigInt) -> QuadInt {
        QuadInt {
            d: self.d,
            a: self.a.mod_floor(m),
            b: self.b.mod_floor(m),
        }
    }

    /// |N(self)| = 1.
    pub fn is_unit(&self) -> bool {
        self.norm().abs().is_one()
    }

    /// Exact sign of the image under the real embedding sending √d to the
    /// positive (embedding 0) or negative (embedding 1) square root.
    /// Requires d > 0 and self ≠ 0.
    pub fn embedding_sign(&self, embedding: usize) -> i8 {
        assert!(self.d > 0, "embedding_sign requires a real field");
        // Write 2·σ(self) or σ(self) as s + t√d.
        let (s, t) = if self.half_basis() {
            (2 * &self.a + &self.b, self.b.clone())
        } else {
            (self.a.clone(), self.b.clone())
        };
        let t = if embedding == 0 { t } else { -t };
        sign_of_s_plus_t_sqrt_d(&s, &t, self.d)
    }
}

/// Exact sign of s + t√d for d > 0 (not both s, t zero).
fn sign_of_s_plus_t_sqrt_d(s: &BigInt, t: &BigInt, d: i64) -> i8 {
    use std::cmp::Ordering;
    let zero = BigInt::zero();
    match (s.cmp(&zero), t.cmp(&zero)) {
        (Ordering::Equal, Ordering::Equal) => panic!("sign of zero"),
        (s_ord, Ordering::Equal) => {
            if s_ord == Ordering::Greater {
                1
            } else {
                -1
            }
        }
        (Ordering::Equal, t_ord) | (Ordering::Greater, t_ord @ Ordering::Greater) => {
            if t_ord == Ordering::Greater {
                1
            } else {
                -1
            }
        }
        (Ordering::Less, Ordering::Less) => -1,
        // Mixed signs: compare s² with t²d.
        (Ordering::Greater, Ordering::Less) => {
            let lhs = s * s;
            let rhs = t * t * BigInt::from(d);
            if lhs > rhs {
                1
            } else {
                -1
            }
        }
        (Ordering::Less, Ordering::Greater) => {
            let lhs = s * s;
            let rhs = t * t * BigInt::from(d);
            if lhs < rhs {
                1
            } else {
                -1
            }
        }
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}*w", self.a, self.b)
    }
}

impl fmt::Debug for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadInt({}, d={})", self, self.d)
    }
}

impl FromStr for QuadIntRaw {
    type Err = Error;

    /// Parse the "a+b*w" form into a bare coefficient pair.
    fn from_str(s: &str) -> Result<QuadIntRaw> {
        let s = s.trim();
        let body = s
            .strip_suffix("*w")
            .ok_or_else(|| Error::Parse(format!("expected `a+b*w`, got `{s}`")))?;
        // Split at the last '+' or '-' that is not a leading sign (ASCII input).
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| {
                (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'+' | b'-')
            })
            .ok_or_else(|| Error::Parse(format!("expected `a+b*w`, got `{s}`")))?;
        let a = BigInt::from_str(&body[..split])
            .map_err(|e| Error::Parse(format!("bad integer in `{s}`: {e}")))?;
        let bstr = &body[split..];
        let bstr = bstr.strip_prefix('+').unwrap_or(bstr);
        let b = BigInt::from_str(bstr)
            .map_err(|e| Error::Parse(format!("bad integer in `{s}`: {e}")))?;
        Ok(QuadIntRaw { a, b })
    }
}

/// A coefficient pair before attachment to a field.
pub struct QuadIntRaw {
    pub a: BigInt,
    pub b: BigInt,
}

macro_rules! binop {
    ($trait:ident, $meth:ident, $checked:ident) => {
        impl std::ops::$trait for &QuadInt {
            type Output = QuadInt;
            fn $meth(self, rhs: &QuadInt) -> QuadInt {
                self.$checked(rhs).expect("mixed-field operands")
            }
        }
    };
}
binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt {
            d: self.d,
            a: -&self.a,
            b: -&self.b,
        }
    }
}

/// The quadratic field ℚ(√d) for squarefree d ∉ {0, 1}.
#[derive(Debug)]
pub struct QuadField {
    d: i64,
    disc: i64,
    fundamental_unit: Option<QuadInt>,
    class_number: OnceLock<std::result::Result<u64, Error>>,
    search_bound: u64,
}

impl QuadField {
    pub fn new(d: i64) -> Result<Arc<QuadField>> {
        Self::with_search_bound(d, DEFAULT_SEARCH_BOUND)
    }

    pub fn with_search_bound(d: i64, search_bound: u64) -> Result<Arc<QuadField>> {
        if d == 0 || d == 1 {
            return Err(Error::InvalidField(format!("d = {d} is degenerate")));
        }
        if d.unsigned_abs() > 1_000_000_000_000 {
            return Err(Error::InvalidField("|d| too large".into()));
        }
        if !arith::is_squarefree(d) {
            return Err(Error::InvalidField(format!("d = {d} is not squarefree")));
        }
        let disc = if d.rem_euclid(4) == 1 { d } else { 4 * d };
        let mut field = QuadField {
            d,
            disc,
            fundamental_unit: None,
            class_number: OnceLock::new(),
            search_bound,
        };
        if d > 0 {
            field.fundamental_unit = Some(fundamental_unit_by_cf(d, search_bound)?);
        }
        Ok(Arc::new(field))
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    /// ω = (1+√d)/2 when d ≡ 1 mod 4, else ω = √d.
    pub fn half_basis(&self) -> bool {
        self.d.rem_euclid(4) == 1
    }

    pub fn is_real(&self) -> bool {
        self.d > 0
    }

    /// (r1, r2): number of real embeddings and of complex places.
    pub fn signature(&self) -> (u8, u8) {
        if self.d > 0 {
            (2, 0)
        } else {
            (0, 1)
        }
    }

    /// Order w of the torsion subgroup of the units: 4 for ℚ(i), 6 for
    /// ℚ(√−3), else 2.
    pub fn torsion_order(&self) -> u8 {
        match self.d {
            -1 => 4,
            -3 => 6,
            _ => 2,
        }
    }

    /// A generator of the torsion subgroup: i for d = −1, a primitive sixth
    /// root of unity for d = −3, else −1.
    pub fn torsion_generator(&self) -> QuadInt {
        match self.d {
            -1 => self.elem(0, 1),
            // ω = (1+√−3)/2 has ω⁶ = 1 and ω³ = −1.
            -3 => self.elem(0, 1),
            _ => self.elem(-1, 0),
        }
    }

    pub fn elem(&self, a: i64, b: i64) -> QuadInt {
        QuadInt {
            d: self.d,
            a: BigInt::from(a),
            b: BigInt::from(b),
        }
    }

    pub fn elem_big(&self, a: BigInt, b: BigInt) -> QuadInt {
        QuadInt { d: self.d, a, b }
    }

    pub fn zero(&self) -> QuadInt {
        self.elem(0, 0)
    }

    pub fn one(&self) -> QuadInt {
        self.elem(1, 0)
    }

    /// ε_K for real fields (norm ±1, minimal > 1 under the positive-root
    /// embedding); `None` for imaginary fields.
    pub fn fundamental_unit(&self) -> Option<&QuadInt> {
        self.fundamental_unit.as_ref()
    }

    /// N(ε_K) ∈ {±1} for real fields.
    pub fn unit_norm(&self) -> Option<i8> {
        self.fundamental_unit
            .as_ref()
            .map(|u| if u.norm().is_one() { 1 } else { -1 })
    }

    pub fn search_bound(&self) -> u64 {
        self.search_bound
    }

    /// h(K), computed once by enumerating prime ideals below the Minkowski
    /// bound and closing the group they generate under multiplication, with
    /// class equality decided by principality of I·Jᶜ.
    pub fn class_number(&self) -> Result<u64> {
        self.class_number
            .get_or_init(|| compute_class_number(self))
            .clone()
    }

    /// Searches for a generator of the ideal I. Returns `None` when I is not
    /// principal. The search is exhaustive over a box containing, for every
    /// generator candidate norm, a full set of unit-orbit representatives.
    pub fn is_principal(&self, ideal: &IntegralIdeal) -> Result<Option<QuadInt>> {
        if ideal.field_d() != self.d {
            return Err(Error::MixedFields(ideal.field_d(), self.d));
        }
        let n = ideal.norm();
        if n.is_one() {
            return Ok(Some(self.one()));
        }
        for cand in self.elements_of_norm(&n)? {
            if ideals::ideal_contains(ideal, &cand) {
                return Ok(Some(cand));
            }
        }
        Ok(None)
    }

    /// All elements with |N| = n, up to multiplication by units. The real
    /// case enumerates one box of a unit fundamental domain; the imaginary
    /// case is finite outright.
    pub fn elements_of_norm(&self, n: &BigInt) -> Result<Vec<QuadInt>> {
        assert!(n.is_positive());
        let mut out = Vec::new();
        let half = self.half_basis();
        let d_big = BigInt::from(self.d);
        // y-range: for d < 0 the norm form is definite; for d > 0 use the
        // fundamental-domain bound |σᵢ| ≤ √(n·ε) + √n and |y|·√d ≤ |σ₁ − σ₂|.
        let y_max: BigInt = if self.d < 0 {
            let bound = if half { 4 * n } else { n.clone() };
            (bound / (-&d_big)).sqrt() + 1
        } else {
            let eps_bound = self.unit_upper_bound();
            let s_bound = (n * eps_bound).sqrt() + n.sqrt() + 2;
            let scale = if half { 1 } else { 2 };
            s_bound / (scale * BigInt::from(self.d).sqrt()) + 2
        };
        let y_max_u = u64::try_from(&y_max)
            .map_err(|_| Error::ResourceBound("norm-equation box too large".into()))?;
        if y_max_u > self.search_bound {
            return Err(Error::ResourceBound(format!(
                "norm-equation box {y_max_u} exceeds search bound"
            )));
        }
        let norm_signs: &[i64] = if self.d < 0 { &[1] } else { &[1, -1] };
        let mut y = BigInt::zero();
        while y <= y_max {
            for &sgn in norm_signs {
                let target: BigInt = BigInt::from(sgn) * n;
                if half {
                    // (2a + b)² = 4·target + d·b², with b = y
                    let rhs: BigInt = BigInt::from(4) * &target + &d_big * &y * &y;
                    if rhs.is_negative() {
                        continue;
                    }
                    let t = rhs.sqrt();
                    if &t * &t == rhs {
                        for tt in [t.clone(), -t] {
                            let num = &tt - &y;
                            if (&num % 2u8).is_zero() {
                                let a = num / 2;
                                push_candidate(&mut out, self.elem_big(a, y.clone()));
                            }
                            if tt.is_zero() {
                                break;
                            }
                        }
                    }
                } else {
                    // a² = target + d·b²
                    let rhs: BigInt = &target + &d_big * &y * &y;
                    if rhs.is_negative() {
                        continue;
                    }
                    let a = rhs.sqrt();
                    if &a * &a == rhs {
                        push_candidate(&mut out, self.elem_big(a.clone(), y.clone()));
                        if !a.is_zero() {
                            push_candidate(&mut out, self.elem_big(-a, y.clone()));
                        }
                    }
                }
            }
            y += 1;
        }
        Ok(out)
    }

    /// Integer upper bound for the real value of ε_K under the positive
    /// embedding.
    fn unit_upper_bound(&self) -> BigInt {
        let eps = self
            .fundamental_unit
            .as_ref()
            .expect("real field has a fundamental unit");
        let (a, b) = eps.coeffs();
        let sqrt_d_up: BigInt = BigInt::from(self.d).sqrt() + 1;
        if self.half_basis() {
            // ε = ((2a+b) + b√d)/2
            let s: BigInt = BigInt::from(2) * a + b;
            (s.abs() + b.abs() * sqrt_d_up) / 2 + 1
        } else {
            a.abs() + b.abs() * sqrt_d_up + 1
        }
    }
}

fn push_candidate(out: &mut Vec<QuadInt>, v: QuadInt) {
    if !v.is_zero() && !out.contains(&v) {
        out.push(v);
    }
}

/// Fundamental unit of ℤ_K (d > 0) from the continued fraction of ω.
///
/// The convergents p_k/q_k of ω give elements θ_k = p_k − q_k·conj(ω); the
/// first θ_k of norm ±1 is the fundamental unit. With P/Q state kept as
/// exact integers, a_k = ⌊(P_k + √d)/Q_k⌋ is computed from ⌊√d⌋ directly.
fn fundamental_unit_by_cf(d: i64, search_bound: u64) -> Result<QuadInt> {
    let half = d.rem_euclid(4) == 1;
    let d_big = BigInt::from(d);
    let sqrt_d = d_big.sqrt();
    let (mut p_num, mut q_num) = (BigInt::one(), BigInt::zero()); // p_{-1}, q_{-1}
    let (mut p_prev, mut q_prev) = (BigInt::zero(), BigInt::one()); // p_{-2}, q_{-2}
    let (mut pp, mut qq) = if half {
        (BigInt::one(), BigInt::from(2))
    } else {
        (BigInt::zero(), BigInt::one())
    };
    for _ in 0..search_bound {
        debug_assert!(qq.is_positive());
        let a = (&pp + &sqrt_d).div_floor(&qq);
        let p_new = &a * &p_num + &p_prev;
        let q_new = &a * &q_num + &q_prev;
        (p_prev, p_num) = (p_num, p_new);
        (q_prev, q_num) = (q_num, q_new);
        // θ = p − q·conj(ω): (p − q) + qω in the half basis, p + qω otherwise.
        let theta = if half {
            QuadInt {
                d,
                a: &p_num - &q_num,
                b: q_num.clone(),
            }
        } else {
            QuadInt {
                d,
                a: p_num.clone(),
                b: q_num.clone(),
            }
        };
        if theta.norm().abs().is_one() && !q_num.is_zero() {
            return Ok(theta);
        }
        let p_next = &a * &qq - &pp;
        let q_next = (&d_big - &p_next * &p_next) / &qq;
        pp = p_next;
        qq = q_next;
    }
    Err(Error::ResourceBound(
        "continued fraction did not close within the search bound".into(),
    ))
}

/// Minkowski bound for the field: every ideal class contains an integral
/// ideal of norm below it. Integer overshoot is harmless.
fn minkowski_bound(disc: i64) -> u64 {
    let root = BigInt::from(disc.abs()).sqrt() + 1;
    let root = u64::try_from(&root).expect("desk-scale discriminant");
    if disc < 0 {
        // (2/π)√|disc| < 0.6367·√|disc|
        (2 * root).div_ceil(3) + 1
    } else {
        root / 2 + 1
    }
}

fn compute_class_number(field: &QuadField) -> Result<u64> {
    let bound = minkowski_bound(field.disc);
    let mut generators: Vec<IntegralIdeal> = Vec::new();
    for p in arith::primes_up_to(bound) {
        for place in ideals::primes_above(field, p)? {
            if place.norm_u64() > bound {
                continue;
            }
            let ideal = IntegralIdeal::from_place(&place, 1);
            if field.is_principal(&ideal)?.is_none() {
                generators.push(ideal);
            }
        }
    }
    // Close the subgroup generated by the non-principal primes, comparing
    // classes via principality of I·Jᶜ.
    let mut classes: Vec<IntegralIdeal> = vec![IntegralIdeal::unit_ideal(field.d)];
    let mut frontier = classes.clone();
    while let Some(current) = frontier.pop() {
        for g in &generators {
            let product = current.mul(g)?;
            let mut known = false;
            for rep in &classes {
                let test = product.mul(&rep.conjugate())?;
                if field.is_principal(&test)?.is_some() {
                    known = true;
                    break;
                }
            }
            if !known {
                classes.push(product.clone());
                frontier.push(product);
                if classes.len() as u64 > field.search_bound {
                    return Err(Error::ResourceBound("class group closure".into()));
                }
            }
        }
    }
    Ok(classes.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(d: i64) -> Arc<QuadField> {
        QuadField::new(d).unwrap()
    }

    #[test]
    fn make_field_basic_invariants() {
        let k5 = field(5);
        assert_eq!(k5.disc(), 5);
        assert!(k5.half_basis());
        // ε = ω = (1+√5)/2, norm −1
        let eps = k5.fundamental_unit().unwrap();
        assert_eq!(eps, &k5.elem(0, 1));
        assert_eq!(k5.unit_norm(), Some(-1));

        let ki = field(-1);
        assert_eq!(ki.disc(), -4);
        assert_eq!(ki.torsion_order(), 4);
        assert_eq!(ki.signature(), (0, 1));
        let i = ki.torsion_generator();
        assert_eq!(i.pow(4), ki.one());
        assert_eq!(i.pow(2), -&ki.one());

        let k2 = field(2);
        assert_eq!(k2.disc(), 8);
        // ε = 1 + √2, norm −1; (1+√2)(−1+√2) = 1
        let eps = k2.fundamental_unit().unwrap();
        assert_eq!(eps, &k2.elem(1, 1));
        assert_eq!(eps.norm(), BigInt::from(-1));
        let inv = k2.elem(-1, 1);
        assert_eq!(eps * &inv, k2.one());
    }

    #[test]
    fn make_field_rejects_degenerate_d() {
        assert!(QuadField::new(0).is_err());
        assert!(QuadField::new(1).is_err());
        assert!(QuadField::new(12).is_err());
        assert!(QuadField::new(-4).is_err());
    }

    #[test]
    fn fundamental_units_known_values() {
        // d = 13: (3+√13)/2 = 1 + ω
        assert_eq!(field(13).fundamental_unit().unwrap(), &field(13).elem(1, 1));
        // d = 29: (5+√29)/2 = 2 + ω
        assert_eq!(field(29).fundamental_unit().unwrap(), &field(29).elem(2, 1));
        // d = 41: 32 + 5√41 = 27 + 10ω
        assert_eq!(
            field(41).fundamental_unit().unwrap(),
            &field(41).elem(27, 10)
        );
        // d = 229: (15+√229)/2 = 7 + ω, norm −1
        let k = field(229);
        assert_eq!(k.fundamental_unit().unwrap(), &k.elem(7, 1));
        assert_eq!(k.unit_norm(), Some(-1));
        // All norms are ±1.
        for d in [2, 3, 5, 6, 7, 10, 13, 17, 29, 41, 97, 229] {
            let k = field(d);
            assert!(k.fundamental_unit().unwrap().is_unit(), "d = {d}");
        }
    }

    #[test]
    fn element_arithmetic_examples() {
        let k = field(5);
        // 7 + 2√5 = 5 + 4ω has norm 29
        let q = k.elem(5, 4);
        assert_eq!(q.norm(), BigInt::from(29));
        // ε^14 ≡ 1 mod Q: ε^14 − 1 divisible by 7+2√5
        let eps = k.fundamental_unit().unwrap().clone();
        let x = eps.pow(14);
        let diff = &x - &k.one();
        // (7+2√5) | diff ⟺ N(q) | N(diff) and the quotient is integral:
        // check by multiplying by the conjugate.
        let prod = &diff * &q.conj();
        let n = q.norm();
        let (qa, qb) = prod.coeffs();
        assert!(qa.mod_floor(&n).is_zero() && qb.mod_floor(&n).is_zero());
    }

    #[test]
    fn conj_trace_norm_properties() {
        let k = field(-7);
        for a in -5i64..5 {
            for b in -5i64..5 {
                let x = k.elem(a, b);
                assert_eq!(x.conj().conj(), x);
                let t = &x + &x.conj();
                assert_eq!(t.coeffs().1, &BigInt::zero());
                assert_eq!(t.coeffs().0, &x.trace());
                assert_eq!(x.norm(), (&x * &x.conj()).coeffs().0.clone());
            }
        }
    }

    #[test]
    fn mixed_field_operands_rejected() {
        let x = field(5).elem(1, 1);
        let y = field(13).elem(1, 1);
        assert_eq!(x.checked_add(&y), Err(Error::MixedFields(5, 13)));
        assert_eq!(x.checked_mul(&y), Err(Error::MixedFields(5, 13)));
    }

    #[test]
    fn norm_multiplicative_random_pairs() {
        // Cheap LCG; no need for a crate here.
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as i64 % 1000) - 500
        };
        for &d in &[-7, -1, 2, 5, 229] {
            let k = field(d);
            for _ in 0..2500 {
                let x = k.elem(next(), next());
                let y = k.elem(next(), next());
                assert_eq!((&x * &y).norm(), x.norm() * y.norm());
            }
        }
    }

    #[test]
    fn class_numbers() {
        assert_eq!(field(-1).class_number().unwrap(), 1);
        assert_eq!(field(-7).class_number().unwrap(), 1);
        assert_eq!(field(-2).class_number().unwrap(), 1);
        assert_eq!(field(-3).class_number().unwrap(), 1);
        assert_eq!(field(2).class_number().unwrap(), 1);
        assert_eq!(field(5).class_number().unwrap(), 1);
        assert_eq!(field(229).class_number().unwrap(), 3);
        // Not in the admitted families, but good stress tests:
        assert_eq!(field(-5).class_number().unwrap(), 2);
        assert_eq!(field(-23).class_number().unwrap(), 3);
    }

    #[test]
    fn class_number_odd_for_admitted_fields() {
        for d in [-1i64, -2, -3, -7, -11, 2, 5, 13, 29, 41] {
            let h = field(d).class_number().unwrap();
            assert_eq!(h % 2, 1, "h(ℚ(√{d})) = {h} should be odd");
        }
    }

    #[test]
    fn embedding_signs() {
        let k = field(5);
        let eps = k.fundamental_unit().unwrap();
        assert_eq!(eps.embedding_sign(0), 1);
        assert_eq!(eps.embedding_sign(1), -1); // norm −1
        let m = k.elem(-3, 0);
        assert_eq!(m.embedding_sign(0), -1);
        assert_eq!(m.embedding_sign(1), -1);
        // 2 − ω: σ₁ = 2 − 1.618 > 0, σ₂ = 2 − (1−√5)/2 > 0
        let x = k.elem(2, -1);
        assert_eq!(x.embedding_sign(0), 1);
        assert_eq!(x.embedding_sign(1), 1);
    }

    #[test]
    fn element_string_roundtrip() {
        let k = field(-7);
        for (a, b) in [(0, 0), (7, 2), (-3, 11), (5, -9)] {
            let x = k.elem(a, b);
            let raw: QuadIntRaw = x.to_string().parse().unwrap();
            assert_eq!(k.elem_big(raw.a, raw.b), x);
        }
    }
}
