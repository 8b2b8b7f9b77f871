//! Prime places, factored integral ideals, valuations, and the local unit
//! groups 𝒰_v/(1 + ℳ_v^m) with their explicit generator systems.
//!
//! A rational prime p behaves in ℤ_K according to the Kronecker symbol
//! (disc/p): split (+1, two conjugate places), inert (−1), or ramified (0).
//! Ideals are kept in factored form as finite multisets of prime places; all
//! ideals arising here are built from factored data, so the two-generator
//! representation is never needed.
//!
//! Local computations at a place v are carried out inside ℤ_K/(p^k) with k
//! chosen so that (p^k) ⊆ v^m — k = m at split/inert places, k = ⌈m/2⌉ at
//! ramified ones — and equality mod v^m is decided by exact valuations of
//! lifted representatives.
//!
//! At places over 2 the unit filtration has the following generator systems
//! (m is the precision, V the 1-unit part):
//! - 2 split: V = ⟨−1⟩ for m = 2, ⟨−1⟩ × ⟨1+4⟩ ≅ ℤ/2 × ℤ/2^{m−2} for m = 3;
//! - 2 inert: V = ⟨−1⟩ × ⟨1+2μ₃⟩ for m = 2, ⟨−1⟩ × ⟨1+2μ₃⟩ × ⟨1−4μ₃⟩
//!   ≅ ℤ/2 × ℤ/2^{m−1} × ℤ/2^{m−2} for m = 3, where μ₃ is the cube root of
//!   unity obtained by lifting ω from the residue field;
//! - 2 ramified: ⟨1+π⟩ cyclic for m ≤ 3, ⟨1+π⟩ × ⟨1+π³⟩ ≅ ℤ/4 × ℤ/2 for
//!   m = 4, and ⟨1+π⟩ × ⟨1+π³⟩ × ⟨1+π⁴⟩ for m = 5.
//!
//! Higher m at 2 (m > 3 split/inert, m > 5 ramified) is outside the range
//! needed for 2-power conductors here and is rejected rather than guessed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::quadfield::{QuadField, QuadInt};

/// Largest local unit quotient we will enumerate for discrete logs.
const MAX_ENUMERATION: u64 = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Split,
    Inert,
    #[serde(rename = "ram")]
    Ramified,
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitKind::Split => write!(f, "split"),
            SplitKind::Inert => write!(f, "inert"),
            SplitKind::Ramified => write!(f, "ram"),
        }
    }
}

/// A maximal ideal of ℤ_K, identified by the prime below it and (for split
/// primes) a label choosing one of the two conjugate places. Label 1 is the
/// place whose root r (ω ≡ r mod v) is the smaller nonnegative residue; it
/// is the designated S_K representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimePlace {
    d: i64,
    p: u64,
    kind: SplitKind,
    label: u8,
    /// Residue of ω mod v when the residue degree is 1; unused for inert.
    root: u64,
}

impl PartialOrd for PrimePlace {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PrimePlace {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.p, self.label).cmp(&(other.p, other.label))
    }
}

impl fmt::Display for PrimePlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SplitKind::Split => write!(f, "{}:split:{}", self.p, self.label),
            SplitKind::Inert => write!(f, "{}:inert", self.p),
            SplitKind::Ramified => write!(f, "{}:ram", self.p),
        }
    }
}

impl PrimePlace {
    pub fn field_d(&self) -> i64 {
        self.d
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> SplitKind {
        self.kind
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    /// Residue degree f.
    pub fn residue_degree(&self) -> u8 {
        if self.kind == SplitKind::Inert {
            2
        } else {
            1
        }
    }

    /// Ramification index e.
    pub fn ramification_index(&self) -> u8 {
        if self.kind == SplitKind::Ramified {
            2
        } else {
            1
        }
    }

    /// N(v) = p^f.
    pub fn norm_u64(&self) -> u64 {
        match self.kind {
            SplitKind::Inert => self.p * self.p,
            _ => self.p,
        }
    }

    pub fn norm(&self) -> BigInt {
        BigInt::from(self.norm_u64())
    }

    /// Residue of ω mod v for places of residue degree one.
    pub fn omega_root(&self) -> Option<u64> {
        (self.kind != SplitKind::Inert).then_some(self.root)
    }

    /// The conjugate place v^c: swaps the two places over a split prime,
    /// fixes inert and ramified places.
    pub fn conjugate(&self) -> PrimePlace {
        if self.kind != SplitKind::Split {
            return self.clone();
        }
        let other_root = conjugate_root(self.d, self.p, self.root);
        PrimePlace {
            d: self.d,
            p: self.p,
            kind: SplitKind::Split,
            label: 3 - self.label,
            root: other_root,
        }
    }

    /// val_v(x) for x ≠ 0.
    pub fn valuation(&self, x: &QuadInt) -> u32 {
        assert!(!x.is_zero(), "valuation of zero");
        assert_eq!(x.field_d(), self.d, "mixed-field valuation");
        let p_big = BigInt::from(self.p);
        match self.kind {
            SplitKind::Inert => {
                let (a, b) = x.coeffs();
                match (a.is_zero(), b.is_zero()) {
                    (true, _) => val_p(b, &p_big),
                    (_, true) => val_p(a, &p_big),
                    _ => val_p(a, &p_big).min(val_p(b, &p_big)),
                }
            }
            SplitKind::Ramified => val_p(&x.norm(), &p_big),
            SplitKind::Split => {
                let s = val_p(&x.norm(), &p_big);
                let modulus = p_big.pow(s + 1);
                let r = self.lifted_root(s + 1);
                let (a, b) = x.coeffs();
                let t = (a + b * r).mod_floor(&modulus);
                debug_assert!(!t.is_zero(), "split valuation exceeded its own norm bound");
                val_p(&t, &p_big)
            }
        }
    }

    /// val_v(x) ≥ m, with val(0) = ∞.
    pub fn valuation_at_least(&self, x: &QuadInt, m: u32) -> bool {
        x.is_zero() || self.valuation(x) >= m
    }

    /// Root of the minimal polynomial of ω mod p^k lifting this place's
    /// root, for places of residue degree one over a split prime.
    fn lifted_root(&self, k: u32) -> BigInt {
        assert_eq!(self.kind, SplitKind::Split);
        let p = BigInt::from(self.p);
        let mut modulus = p.clone();
        let mut r = BigInt::from(self.root);
        let half = self.d.rem_euclid(4) == 1;
        let target = p.pow(k);
        while modulus < target {
            modulus = (&modulus * &modulus).min(target.clone());
            // Newton step for f(x) = x² − d or x² − x − (d−1)/4.
            let (f, fp) = if half {
                let c = BigInt::from((self.d - 1) / 4);
                (&r * &r - &r - c, 2 * &r - 1)
            } else {
                (&r * &r - self.d, 2 * &r)
            };
            let inv = mod_inverse_big(&fp, &modulus).expect("Hensel derivative is a unit");
            r = (&r - f * inv).mod_floor(&modulus);
        }
        r.mod_floor(&target)
    }

    /// Residue of x in κ_v ≅ 𝔽_p for places of residue degree one.
    pub fn residue_fp(&self, x: &QuadInt) -> u64 {
        assert_ne!(self.kind, SplitKind::Inert);
        let p = BigInt::from(self.p);
        let (a, b) = x.coeffs();
        (a + b * BigInt::from(self.root))
            .mod_floor(&p)
            .to_u64()
            .expect("residue fits")
    }

    /// Parse "p:split:1", "p:inert", "p:ram" against a field (the kind is
    /// validated against the actual splitting of p).
    pub fn parse(field: &QuadField, s: &str) -> Result<PrimePlace> {
        let parts: Vec<&str> = s.split(':').collect();
        let err = || Error::Parse(format!("bad place spec `{s}`"));
        let p: u64 = parts.first().ok_or_else(err)?.parse().map_err(|_| err())?;
        let places = primes_above(field, p)?;
        match parts.get(1) {
            Some(&"split") => {
                let label: u8 = parts.get(2).ok_or_else(err)?.parse().map_err(|_| err())?;
                if parts.len() != 3 || !(label == 1 || label == 2) {
                    return Err(err());
                }
                places
                    .into_iter()
                    .find(|v| v.kind == SplitKind::Split && v.label == label)
                    .ok_or_else(|| Error::Parse(format!("{p} is not split in this field")))
            }
            Some(&"inert") if parts.len() == 2 => {
                places
                    .into_iter()
                    .find(|v| v.kind == SplitKind::Inert)
                    .ok_or_else(|| Error::Parse(format!("{p} is not inert in this field")))
            }
            Some(&"ram") if parts.len() == 2 => {
                places
                    .into_iter()
                    .find(|v| v.kind == SplitKind::Ramified)
                    .ok_or_else(|| Error::Parse(format!("{p} is not ramified in this field")))
            }
            _ => Err(err()),
        }
    }
}

/// The other root of the minimal polynomial of ω mod p.
fn conjugate_root(d: i64, p: u64, root: u64) -> u64 {
    if d.rem_euclid(4) == 1 {
        // roots sum to 1
        (1 + p - root % p) % p
    } else {
        (p - root % p) % p
    }
}

fn val_p(x: &BigInt, p: &BigInt) -> u32 {
    assert!(!x.is_zero());
    let mut v = 0;
    let mut x = x.clone();
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        x = q;
    }
}

fn mod_inverse_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if g.gcd.is_one() {
        Some(g.x.mod_floor(m))
    } else {
        None
    }
}

/// The places of K above a rational prime p, in label order (one place for
/// inert/ramified p, two conjugate places for split p).
pub fn primes_above(field: &QuadField, p: u64) -> Result<Vec<PrimePlace>> {
    if !arith::is_prime(p) {
        return Err(Error::Unsupported(format!("{p} is not prime")));
    }
    let d = field.d();
    let disc = field.disc();
    let sym = arith::kronecker(disc, p as i64);
    match sym {
        -1 => Ok(vec![PrimePlace {
            d,
            p,
            kind: SplitKind::Inert,
            label: 1,
            root: 0,
        }]),
        0 => {
            let root = if p == 2 {
                // ω = √d ≡ 0 mod v for even d, ≡ 1 for d ≡ 3 mod 4.
                if d.rem_euclid(4) == 2 {
                    0
                } else {
                    1
                }
            } else if d.rem_euclid(4) == 1 {
                // double root of x² − x − (d−1)/4 is 1/2 mod p
                (p + 1) / 2
            } else {
                0
            };
            Ok(vec![PrimePlace {
                d,
                p,
                kind: SplitKind::Ramified,
                label: 1,
                root,
            }])
        }
        _ => {
            let (r1, r2) = split_roots(d, p);
            Ok(vec![
                PrimePlace {
                    d,
                    p,
                    kind: SplitKind::Split,
                    label: 1,
                    root: r1,
                },
                PrimePlace {
                    d,
                    p,
                    kind: SplitKind::Split,
                    label: 2,
                    root: r2,
                },
            ])
        }
    }
}

/// Both roots of the minimal polynomial of ω mod a split prime p, smaller
/// first.
fn split_roots(d: i64, p: u64) -> (u64, u64) {
    if p == 2 {
        // d ≡ 1 mod 8: x² − x − (d−1)/4 ≡ x(x−1) mod 2
        return (0, 1);
    }
    let dp = (d.rem_euclid(p as i64)) as u64;
    let s = arith::sqrt_mod_prime(dp, p).expect("split prime has a square root of d");
    let (r1, r2) = if d.rem_euclid(4) == 1 {
        let inv2 = arith::mod_inverse(2, p).expect("odd p");
        let a = (1 + s) % p * inv2 % p;
        let b = (1 + p - s) % p * inv2 % p;
        (a, b)
    } else {
        (s, p - s)
    };
    (r1.min(r2), r1.max(r2))
}

/// A nonzero integral ideal in factored form: a finite map from prime
/// places to positive exponents. The empty map is the unit ideal ℤ_K.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralIdeal {
    d: i64,
    factors: BTreeMap<PrimePlace, u32>,
}

impl IntegralIdeal {
    pub fn unit_ideal(d: i64) -> IntegralIdeal {
        IntegralIdeal {
            d,
            factors: BTreeMap::new(),
        }
    }

    pub fn from_place(place: &PrimePlace, exp: u32) -> IntegralIdeal {
        let mut factors = BTreeMap::new();
        if exp > 0 {
            factors.insert(place.clone(), exp);
        }
        IntegralIdeal {
            d: place.d,
            factors,
        }
    }

    pub fn from_factors(d: i64, list: impl IntoIterator<Item = (PrimePlace, u32)>) -> Result<Self> {
        let mut factors = BTreeMap::new();
        for (place, exp) in list {
            if place.d != d {
                return Err(Error::MixedFields(place.d, d));
            }
            if exp > 0 {
                *factors.entry(place).or_insert(0) += exp;
            }
        }
        Ok(IntegralIdeal { d, factors })
    }

    pub fn field_d(&self) -> i64 {
        self.d
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&PrimePlace, u32)> {
        self.factors.iter().map(|(v, &m)| (v, m))
    }

    pub fn exponent_at(&self, place: &PrimePlace) -> u32 {
        self.factors.get(place).copied().unwrap_or(0)
    }

    pub fn norm(&self) -> BigInt {
        let mut n = BigInt::one();
        for (v, m) in &self.factors {
            n *= v.norm().pow(*m);
        }
        n
    }

    pub fn mul(&self, other: &IntegralIdeal) -> Result<IntegralIdeal> {
        if self.d != other.d {
            return Err(Error::MixedFields(self.d, other.d));
        }
        let mut factors = self.factors.clone();
        for (v, m) in &other.factors {
            *factors.entry(v.clone()).or_insert(0) += m;
        }
        Ok(IntegralIdeal {
            d: self.d,
            factors,
        })
    }

    pub fn pow(&self, k: u32) -> IntegralIdeal {
        let mut factors = BTreeMap::new();
        if k > 0 {
            for (v, m) in &self.factors {
                factors.insert(v.clone(), m * k);
            }
        }
        IntegralIdeal {
            d: self.d,
            factors,
        }
    }

    /// Image under the nontrivial automorphism: swaps conjugate split
    /// places, fixes inert and ramified ones.
    pub fn conjugate(&self) -> IntegralIdeal {
        let factors = self
            .factors
            .iter()
            .map(|(v, &m)| (v.conjugate(), m))
            .collect();
        IntegralIdeal {
            d: self.d,
            factors,
        }
    }

    pub fn divides(&self, other: &IntegralIdeal) -> bool {
        self.factors
            .iter()
            .all(|(v, &m)| other.exponent_at(v) >= m)
    }

    pub fn is_coprime_to(&self, other: &IntegralIdeal) -> bool {
        self.factors.keys().all(|v| other.exponent_at(v) == 0)
    }

    /// gcd(α, this) = 1, i.e. val_v(α) = 0 at every place of the ideal.
    pub fn is_coprime_to_element(&self, x: &QuadInt) -> bool {
        !x.is_zero() && self.factors.keys().all(|v| v.valuation(x) == 0)
    }
}

impl fmt::Display for IntegralIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "(1)");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(v, m)| {
                if *m == 1 {
                    format!("{v}")
                } else {
                    format!("{v}^{m}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Serialization form of one prime-power factor.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PlacePowerDto {
    pub p: u64,
    pub kind: SplitKind,
    pub label: u8,
    pub exponent: u32,
}

impl IntegralIdeal {
    pub fn to_dto(&self) -> Vec<PlacePowerDto> {
        self.factors
            .iter()
            .map(|(v, &m)| PlacePowerDto {
                p: v.p,
                kind: v.kind,
                label: v.label,
                exponent: m,
            })
            .collect()
    }

    pub fn from_dto(field: &QuadField, dto: &[PlacePowerDto]) -> Result<IntegralIdeal> {
        let mut list = Vec::new();
        for f in dto {
            let places = primes_above(field, f.p)?;
            let place = places
                .into_iter()
                .find(|v| v.kind == f.kind && v.label == f.label)
                .ok_or_else(|| {
                    Error::Parse(format!("no place {}:{}:{} in this field", f.p, f.kind, f.label))
                })?;
            list.push((place, f.exponent));
        }
        IntegralIdeal::from_factors(field.d(), list)
    }
}

/// Parse "p:kind[:label]:exponent" as one prime-power factor.
pub fn parse_place_power(field: &QuadField, s: &str) -> Result<(PrimePlace, u32)> {
    let (place_str, exp_str) = s
        .rsplit_once(':')
        .ok_or_else(|| Error::Parse(format!("bad conductor factor `{s}`")))?;
    let exp: u32 = exp_str
        .parse()
        .map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?;
    if exp == 0 {
        return Err(Error::Parse(format!("zero exponent in `{s}`")));
    }
    let place = PrimePlace::parse(field, place_str)?;
    Ok((place, exp))
}

/// α ∈ I, tested by valuations.
pub fn ideal_contains(ideal: &IntegralIdeal, x: &QuadInt) -> bool {
    ideal
        .factors
        .iter()
        .all(|(v, &m)| v.valuation_at_least(x, m))
}

/// Factorization of the principal ideal (α) into prime places.
pub fn factor_principal(field: &QuadField, x: &QuadInt) -> Result<IntegralIdeal> {
    if x.is_zero() {
        return Err(Error::Unsupported("cannot factor the zero ideal".into()));
    }
    let n = x.norm().abs();
    let n64 = n
        .to_u64()
        .ok_or_else(|| Error::ResourceBound("norm too large to factor".into()))?;
    let mut list = Vec::new();
    for (p, e) in arith::factor(n64) {
        let places = primes_above(field, p)?;
        match places[0].kind {
            SplitKind::Inert => {
                debug_assert_eq!(e % 2, 0, "inert prime enters a norm evenly");
                list.push((places[0].clone(), e / 2));
            }
            SplitKind::Ramified => {
                list.push((places[0].clone(), e));
            }
            SplitKind::Split => {
                let e1 = places[0].valuation(x);
                let e2 = places[1].valuation(x);
                debug_assert_eq!(e1 + e2, e, "split valuations sum to the norm valuation");
                list.push((places[0].clone(), e1));
                list.push((places[1].clone(), e2));
            }
        }
    }
    IntegralIdeal::from_factors(field.d(), list)
}

/// The unit group 𝒰_v/(1 + ℳ_v^m) presented by explicit generators with
/// verified orders. For inert 2 the generators present the 1-unit part V_v;
/// the residue-field component ⟨μ₃⟩ (order 3, killed by every 2-power-order
/// character) is carried separately.
#[derive(Debug)]
pub struct LocalUnitGroup {
    place: PrimePlace,
    precision: u32,
    modulus: BigInt,
    generators: Vec<QuadInt>,
    orders: Vec<u64>,
    mu3: Option<QuadInt>,
    table: OnceLock<Vec<(QuadInt, Vec<u64>)>>,
}

impl LocalUnitGroup {
    pub fn place(&self) -> &PrimePlace {
        &self.place
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn generators(&self) -> &[QuadInt] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn mu3(&self) -> Option<&QuadInt> {
        self.mu3.as_ref()
    }

    /// Size of the group presented by the generators.
    pub fn presented_order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Reduce an element to its canonical representative mod p^k.
    pub fn reduce(&self, x: &QuadInt) -> QuadInt {
        x.reduce_mod(&self.modulus)
    }

    /// Equality mod v^m.
    pub fn residue_equal(&self, x: &QuadInt, y: &QuadInt) -> bool {
        let diff = x.checked_sub(y).expect("same field");
        self.place.valuation_at_least(&diff, self.precision)
    }

    fn mul(&self, x: &QuadInt, y: &QuadInt) -> QuadInt {
        self.reduce(&x.checked_mul(y).expect("same field"))
    }

    fn pow(&self, x: &QuadInt, mut e: u64) -> QuadInt {
        let field_one = QuadInt::one_for(self.place.d);
        let mut base = self.reduce(x);
        let mut acc = field_one;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn is_one(&self, x: &QuadInt) -> bool {
        self.residue_equal(x, &QuadInt::one_for(self.place.d))
    }

    /// All ∏ gᵢ^{eᵢ} with their exponent vectors, in lexicographic order of
    /// the exponents.
    fn element_table(&self) -> &Vec<(QuadInt, Vec<u64>)> {
        self.table.get_or_init(|| {
            let mut table = vec![(QuadInt::one_for(self.place.d), vec![0u64; self.orders.len()])];
            for (i, (g, &ord)) in self.generators.iter().zip(&self.orders).enumerate() {
                let mut next = Vec::with_capacity(table.len() * ord as usize);
                for (elem, exps) in &table {
                    let mut acc = elem.clone();
                    for e in 0..ord {
                        let mut exps = exps.clone();
                        exps[i] = e;
                        next.push((acc.clone(), exps));
                        if e + 1 < ord {
                            acc = self.mul(&acc, g);
                        }
                    }
                }
                table = next;
            }
            table
        })
    }

    /// Exponent vector of u over the generators: u ≡ ∏ gᵢ^{eᵢ} mod v^m.
    /// At an inert place over 2 the μ₃-component of u is projected away
    /// first (every 2-power-order character kills it).
    pub fn decompose(&self, u: &QuadInt) -> Result<Vec<u64>> {
        if u.is_zero() || self.place.valuation(u) != 0 {
            return Err(Error::NotCoprime(format!(
                "element is not a unit at {}",
                self.place
            )));
        }
        let target = if let Some(mu3) = &self.mu3 {
            // Match the residue-field component in 𝔽₄ and strip it:
            // u ≡ μ₃^j mod v ⟺ u·μ₃^{3−j} ∈ 1 + ℳ_v.
            let mut w = None;
            for j in 0..3u64 {
                let cand = self.mul(u, &self.pow(mu3, (3 - j) % 3));
                let diff = cand
                    .checked_sub(&QuadInt::one_for(self.place.d))
                    .expect("same field");
                if self.place.valuation_at_least(&diff, 1) {
                    w = Some(cand);
                    break;
                }
            }
            w.ok_or_else(|| {
                Error::ConstraintViolation("unit does not reduce into ⟨μ₃⟩·(1+ℳ)".into())
            })?
        } else {
            self.reduce(u)
        };
        if self.presented_order() > MAX_ENUMERATION {
            return Err(Error::ResourceBound(
                "local unit group too large to enumerate".into(),
            ));
        }
        for (elem, exps) in self.element_table() {
            if self.residue_equal(elem, &target) {
                return Ok(exps.clone());
            }
        }
        Err(Error::ConstraintViolation(format!(
            "unit is outside the generated subgroup at {}",
            self.place
        )))
    }

    /// Verify the presentation: generator orders are exact and the listed
    /// products are pairwise distinct, so the group is the stated direct
    /// product; its size equals the full quotient (the 1-unit part at
    /// inert 2).
    fn verify(&self) -> Result<()> {
        for (g, &ord) in self.generators.iter().zip(&self.orders) {
            if !self.is_one(&self.pow(g, ord)) {
                return Err(Error::ConstraintViolation(format!(
                    "generator order {ord} does not annihilate at {}",
                    self.place
                )));
            }
            for (q, _) in arith::factor(ord) {
                if self.is_one(&self.pow(g, ord / q)) {
                    return Err(Error::ConstraintViolation(format!(
                        "generator order at {} is smaller than {ord}",
                        self.place
                    )));
                }
            }
        }
        let expected = self.expected_quotient_order();
        if self.presented_order() != expected {
            return Err(Error::ConstraintViolation(format!(
                "presented order {} differs from the quotient order {expected} at {}",
                self.presented_order(),
                self.place
            )));
        }
        if expected <= 4096 {
            let table = self.element_table();
            let distinct = match self.canonical_keys(table) {
                Some(keys) => {
                    let set: std::collections::HashSet<_> = keys.into_iter().collect();
                    set.len() == table.len()
                }
                None => {
                    let mut ok = true;
                    'outer: for i in 0..table.len() {
                        for j in i + 1..table.len() {
                            if self.residue_equal(&table[i].0, &table[j].0) {
                                ok = false;
                                break 'outer;
                            }
                        }
                    }
                    ok
                }
            };
            if !distinct {
                return Err(Error::ConstraintViolation(format!(
                    "generator products collide at {}",
                    self.place
                )));
            }
        }
        if let Some(mu3) = &self.mu3 {
            if !self.is_one(&self.pow(mu3, 3)) || self.is_one(mu3) {
                return Err(Error::ConstraintViolation(
                    "μ₃ is not a primitive cube root of unity".into(),
                ));
            }
        }
        Ok(())
    }

    /// Injective coordinates mod v^m where a closed form exists: the lifted
    /// root collapses split places onto ℤ/p^m, inert places have (p^m) = v^m.
    /// Ramified 2 returns `None` (valuation-based comparison is used there).
    fn canonical_keys(&self, table: &[(QuadInt, Vec<u64>)]) -> Option<Vec<(BigInt, BigInt)>> {
        let m = self.precision;
        let pm = BigInt::from(self.place.p).pow(m);
        match self.place.kind {
            SplitKind::Ramified if self.place.p == 2 => None,
            SplitKind::Split => {
                let r = self.place.lifted_root(m);
                Some(
                    table
                        .iter()
                        .map(|(x, _)| {
                            let (a, b) = x.coeffs();
                            ((a + b * &r).mod_floor(&pm), BigInt::zero())
                        })
                        .collect(),
                )
            }
            SplitKind::Inert => Some(
                table
                    .iter()
                    .map(|(x, _)| {
                        let (a, b) = x.coeffs();
                        (a.mod_floor(&pm), b.mod_floor(&pm))
                    })
                    .collect(),
            ),
            SplitKind::Ramified => Some(
                table
                    .iter()
                    .map(|(x, _)| (BigInt::from(self.place.residue_fp(x)), BigInt::zero()))
                    .collect(),
            ),
        }
    }

    /// |𝒰_v/(1 + ℳ_v^m)| for odd p and 2 split/ramified; |V_v| at inert 2.
    fn expected_quotient_order(&self) -> u64 {
        let m = self.precision;
        match (self.place.p, self.place.kind) {
            (2, SplitKind::Split) => 1 << (m - 1).min(63),
            (2, SplitKind::Inert) => 1 << (2 * (m - 1)).min(63),
            (2, SplitKind::Ramified) => 1 << (m - 1).min(63),
            (_, _) => {
                debug_assert_eq!(m, 1);
                self.place.norm_u64() - 1
            }
        }
    }
}

/// The generator system of 𝒰_v/(1 + ℳ_v^m).
///
/// Odd p requires m = 1 (higher exponents cannot carry 2-power-order
/// primitive characters); m beyond the quadratic range at 2 is rejected.
pub fn local_unit_generators(field: &QuadField, place: &PrimePlace, m: u32) -> Result<LocalUnitGroup> {
    if m < 1 {
        return Err(Error::Unsupported("precision m must be ≥ 1".into()));
    }
    if place.field_d() != field.d() {
        return Err(Error::MixedFields(place.field_d(), field.d()));
    }
    let p = place.p;
    let group = if p != 2 {
        if m != 1 {
            return Err(Error::Unsupported(
                "odd places support precision m = 1 only".into(),
            ));
        }
        let modulus = BigInt::from(p);
        let (generators, orders): (Vec<QuadInt>, Vec<u64>) = match place.kind {
            SplitKind::Split | SplitKind::Ramified => {
                let g = arith::primitive_root(p);
                (vec![field.elem_big(g.into(), BigInt::zero())], vec![p - 1])
            }
            SplitKind::Inert => {
                let g = inert_residue_generator(field, p)?;
                (vec![g], vec![p * p - 1])
            }
        };
        LocalUnitGroup {
            place: place.clone(),
            precision: m,
            modulus,
            generators,
            orders,
            mu3: None,
            table: OnceLock::new(),
        }
    } else {
        match place.kind {
            SplitKind::Split => {
                if m > 3 {
                    return Err(Error::Unsupported(
                        "split 2 supports precision m ≤ 3 here".into(),
                    ));
                }
                let modulus = BigInt::from(2u64).pow(m);
                let (generators, orders) = match m {
                    1 => (vec![], vec![]),
                    2 => (vec![field.elem(-1, 0)], vec![2]),
                    _ => (vec![field.elem(-1, 0), field.elem(5, 0)], vec![2, 1 << (m - 2)]),
                };
                LocalUnitGroup {
                    place: place.clone(),
                    precision: m,
                    modulus,
                    generators,
                    orders,
                    mu3: None,
                    table: OnceLock::new(),
                }
            }
            SplitKind::Inert => {
                if m > 3 {
                    return Err(Error::Unsupported(
                        "inert 2 supports precision m ≤ 3 here".into(),
                    ));
                }
                let modulus = BigInt::from(2u64).pow(m);
                let mu3 = lift_mu3(field, &modulus);
                let two_mu3 = field.elem(1, 0).checked_add(&mu3.checked_mul(&field.elem(2, 0))?)?;
                let minus_four_mu3 =
                    field.elem(1, 0).checked_sub(&mu3.checked_mul(&field.elem(4, 0))?)?;
                let (generators, orders) = match m {
                    1 => (vec![], vec![]),
                    2 => (vec![field.elem(-1, 0), two_mu3], vec![2, 2]),
                    _ => (
                        vec![field.elem(-1, 0), two_mu3, minus_four_mu3],
                        vec![2, 1 << (m - 1), 1 << (m - 2)],
                    ),
                };
                LocalUnitGroup {
                    place: place.clone(),
                    precision: m,
                    modulus: modulus.clone(),
                    generators: generators.iter().map(|g| g.reduce_mod(&modulus)).collect(),
                    orders,
                    mu3: Some(mu3),
                    table: OnceLock::new(),
                }
            }
            SplitKind::Ramified => {
                if m > 5 {
                    return Err(Error::Unsupported(
                        "ramified 2 supports precision m ≤ 5 here".into(),
                    ));
                }
                let k = m.div_ceil(2);
                let modulus = BigInt::from(2u64).pow(k);
                let pi = ramified_two_uniformizer(field);
                let one = field.one();
                let gen1 = one.checked_add(&pi)?;
                let gen3 = one.checked_add(&pi.pow(3))?;
                let gen4 = one.checked_add(&pi.pow(4))?;
                let (generators, orders): (Vec<QuadInt>, Vec<u64>) = match m {
                    1 => (vec![], vec![]),
                    2 => (vec![gen1], vec![2]),
                    3 => (vec![gen1], vec![4]),
                    4 => (vec![gen1, gen3], vec![4, 2]),
                    _ => (vec![gen1, gen3, gen4], vec![4, 2, 2]),
                };
                LocalUnitGroup {
                    place: place.clone(),
                    precision: m,
                    modulus: modulus.clone(),
                    generators: generators.iter().map(|g| g.reduce_mod(&modulus)).collect(),
                    orders,
                    mu3: None,
                    table: OnceLock::new(),
                }
            }
        }
    };
    group.verify()?;
    Ok(group)
}

/// The uniformizer fixed for the place over a ramified 2: μ₄ − 1 in ℚ(i),
/// √d for even d, 1 + √d for d ≡ 3 mod 4.
pub fn ramified_two_uniformizer(field: &QuadField) -> QuadInt {
    let d = field.d();
    assert_eq!(
        arith::kronecker(field.disc(), 2),
        0,
        "2 must ramify for a 2-adic uniformizer"
    );
    if d == -1 {
        field.elem(-1, 1)
    } else if d.rem_euclid(2) == 0 {
        field.elem(0, 1)
    } else {
        field.elem(1, 1)
    }
}

/// A generator of κ_v^× ≅ 𝔽_{p²}^× for an inert odd prime.
fn inert_residue_generator(field: &QuadField, p: u64) -> Result<QuadInt> {
    let order = p * p - 1;
    let fac = arith::factor(order);
    let modulus = BigInt::from(p);
    let one = field.one();
    for b in 1..p {
        for a in 0..p {
            let g = field.elem(a as i64, b as i64);
            if g.norm().mod_floor(&modulus).is_zero() {
                continue;
            }
            let mut ok = true;
            for &(q, _) in &fac {
                if pow_mod(&g, order / q, &modulus) == one.reduce_mod(&modulus) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(g);
            }
        }
    }
    Err(Error::ConstraintViolation(format!(
        "no generator of the residue field at inert {p}"
    )))
}

pub(crate) fn pow_mod(x: &QuadInt, mut e: u64, modulus: &BigInt) -> QuadInt {
    let mut base = x.reduce_mod(modulus);
    let mut acc = QuadInt::one_for(x.field_d());
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.checked_mul(&base).expect("same field").reduce_mod(modulus);
        }
        base = base.checked_mul(&base).expect("same field").reduce_mod(modulus);
        e >>= 1;
    }
    acc
}

/// μ₃ in ℤ_K/(2^k) at an inert 2: the root of x² + x + 1 lifting ω
/// (ω² ≡ ω + 1 mod 2 when d ≡ 5 mod 8), by Newton iteration.
fn lift_mu3(field: &QuadField, modulus: &BigInt) -> QuadInt {
    debug_assert_eq!(field.d().rem_euclid(8), 5, "2 is inert iff d ≡ 5 mod 8");
    let mut x = field.elem(0, 1);
    let mut m = BigInt::from(2);
    while &m < modulus {
        m = (&m * &m).min(modulus.clone());
        // f(x) = x² + x + 1, f'(x) = 2x + 1
        let f = x
            .checked_mul(&x)
            .and_then(|x2| x2.checked_add(&x))
            .and_then(|s| s.checked_add(&field.one()))
            .expect("same field");
        let fp = x
            .checked_mul(&field.elem(2, 0))
            .and_then(|t| t.checked_add(&field.one()))
            .expect("same field");
        let fp_inv = invert_unit_mod(&fp, &m);
        x = x
            .checked_sub(&f.checked_mul(&fp_inv).expect("same field"))
            .expect("same field")
            .reduce_mod(&m);
    }
    x.reduce_mod(modulus)
}

/// Inverse of a unit (odd norm) in ℤ_K/(2^k): conj(x)·N(x)^{−1}.
fn invert_unit_mod(x: &QuadInt, modulus: &BigInt) -> QuadInt {
    let n = x.norm();
    let n_inv = mod_inverse_big(&n, modulus).expect("odd norm is invertible mod 2^k");
    let conj = x.conj();
    let (a, b) = conj.coeffs();
    QuadInt::raw(
        x.field_d(),
        (a * &n_inv).mod_floor(modulus),
        (b * &n_inv).mod_floor(modulus),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::QuadField;
    use std::sync::Arc;

    fn field(d: i64) -> Arc<QuadField> {
        QuadField::new(d).unwrap()
    }

    #[test]
    fn splitting_matches_kronecker_for_small_primes() {
        for &d in &[-7i64, -2, -1, -3, 2, 5, 13, 229] {
            let k = field(d);
            for p in arith::primes_up_to(10_000) {
                let places = primes_above(&k, p).unwrap();
                let sym = arith::kronecker(k.disc(), p as i64);
                match sym {
                    1 => {
                        assert_eq!(places.len(), 2);
                        assert!(places.iter().all(|v| v.kind() == SplitKind::Split));
                        assert!(places[0].omega_root() < places[1].omega_root());
                    }
                    -1 => assert_eq!(places[0].kind(), SplitKind::Inert),
                    _ => assert_eq!(places[0].kind(), SplitKind::Ramified),
                }
            }
        }
    }

    #[test]
    fn split_roots_satisfy_min_poly() {
        for &d in &[-7i64, 5, 229, -1] {
            let k = field(d);
            for p in arith::primes_up_to(500) {
                for v in primes_above(&k, p).unwrap() {
                    if v.kind() != SplitKind::Split {
                        continue;
                    }
                    let r = v.omega_root().unwrap();
                    let val = if d.rem_euclid(4) == 1 {
                        // r² − r − (d−1)/4 ≡ 0
                        (r as i128 * r as i128 - r as i128 - ((d - 1) / 4) as i128)
                            .rem_euclid(p as i128)
                    } else {
                        (r as i128 * r as i128 - d as i128).rem_euclid(p as i128)
                    };
                    assert_eq!(val, 0, "d={d}, p={p}, r={r}");
                }
            }
        }
    }

    #[test]
    fn known_splittings() {
        // q ≡ 1 mod 8 splits in ℚ(i)
        let ki = field(-1);
        assert_eq!(primes_above(&ki, 17).unwrap().len(), 2);
        assert_eq!(primes_above(&ki, 97).unwrap().len(), 2);
        // 2 ramifies in ℚ(i)
        let v2 = &primes_above(&ki, 2).unwrap()[0];
        assert_eq!(v2.kind(), SplitKind::Ramified);
        assert_eq!(v2.ramification_index(), 2);
        // 29 splits in ℚ(√5), roots 6 and 24
        let k5 = field(5);
        let places = primes_above(&k5, 29).unwrap();
        assert_eq!(places[0].omega_root(), Some(6));
        assert_eq!(places[1].omega_root(), Some(24));
        // 7 + 2√5 = 5 + 4ω lies in the designated (label 1) place over 29
        let q = k5.elem(5, 4);
        assert_eq!(places[0].valuation(&q), 1);
        assert_eq!(places[1].valuation(&q), 0);
    }

    #[test]
    fn factor_principal_examples() {
        let k5 = field(5);
        let q = k5.elem(5, 4); // 7 + 2√5
        let f = factor_principal(&k5, &q).unwrap();
        assert_eq!(f.norm(), BigInt::from(29));
        assert_eq!(f.to_dto().len(), 1);
        assert_eq!(f.to_dto()[0].label, 1);

        // (1) is the empty ideal
        let one = factor_principal(&k5, &k5.one()).unwrap();
        assert!(one.is_unit_ideal());

        // (2) = v² in ℚ(i)
        let ki = field(-1);
        let two = factor_principal(&ki, &ki.elem(2, 0)).unwrap();
        let v2 = &primes_above(&ki, 2).unwrap()[0];
        assert_eq!(two.exponent_at(v2), 2);
    }

    #[test]
    fn factor_principal_norm_identity_random() {
        let mut state = 0xDEADBEEFu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 34) as i64 % 60) - 30
        };
        for &d in &[-7, -1, 5, 2] {
            let k = field(d);
            let mut count = 0;
            while count < 250 {
                let x = k.elem(next(), next());
                if x.is_zero() {
                    continue;
                }
                count += 1;
                let f = factor_principal(&k, &x).unwrap();
                assert_eq!(f.norm(), x.norm().abs());
                assert!(ideal_contains(&f, &x));
            }
        }
    }

    #[test]
    fn conjugate_ideal_involution() {
        let k = field(5);
        let places = primes_above(&k, 29).unwrap();
        let q = IntegralIdeal::from_place(&places[0], 1);
        let qc = q.conjugate();
        assert_ne!(q, qc);
        assert_eq!(qc.conjugate(), q);
        // inert-supported ideals are fixed
        let v3 = &primes_above(&k, 3).unwrap()[0];
        assert_eq!(v3.kind(), SplitKind::Inert);
        let i3 = IntegralIdeal::from_place(v3, 2);
        assert_eq!(i3.conjugate(), i3);
    }

    #[test]
    fn local_units_odd_split() {
        let k = field(5);
        let v = primes_above(&k, 29).unwrap().remove(0);
        let g = local_unit_generators(&k, &v, 1).unwrap();
        assert_eq!(g.orders(), &[28]);
        // ε_K = ω ↦ root 6 mod 29; 6 has even discrete log iff ε is a QR,
        // matching ε^14 ≡ +1 mod Q.
        let eps = k.fundamental_unit().unwrap().clone();
        let exps = g.decompose(&eps).unwrap();
        assert_eq!(exps.len(), 1);
        assert_eq!(exps[0] % 2, 0);
    }

    #[test]
    fn local_units_inert_two_orders() {
        // d ≡ 5 mod 8: 2 inert. m = 3 has orders (2, 4, 2).
        for &d in &[5i64, 13, -11, -3] {
            let k = field(d);
            let v = primes_above(&k, 2).unwrap().remove(0);
            assert_eq!(v.kind(), SplitKind::Inert);
            let g = local_unit_generators(&k, &v, 3).unwrap();
            assert_eq!(g.orders(), &[2, 4, 2], "d = {d}");
            let g2 = local_unit_generators(&k, &v, 2).unwrap();
            assert_eq!(g2.orders(), &[2, 2]);
        }
    }

    #[test]
    fn local_units_ramified_two() {
        let k = field(-2);
        let v = primes_above(&k, 2).unwrap().remove(0);
        let g2 = local_unit_generators(&k, &v, 2).unwrap();
        assert_eq!(g2.orders(), &[2]);
        let g5 = local_unit_generators(&k, &v, 5).unwrap();
        assert_eq!(g5.orders(), &[4, 2, 2]);
        // −1 = (1+π)²(1+π³) mod ℳ⁵ with π = √−2
        let exps = g5.decompose(&k.elem(-1, 0)).unwrap();
        assert_eq!(exps, vec![2, 1, 0]);
        // range limits
        assert!(local_unit_generators(&k, &v, 6).is_err());
    }

    #[test]
    fn local_units_split_two() {
        let k = field(17);
        let v = primes_above(&k, 2).unwrap().remove(0);
        assert_eq!(v.kind(), SplitKind::Split);
        let g = local_unit_generators(&k, &v, 3).unwrap();
        assert_eq!(g.orders(), &[2, 2]);
        assert!(local_unit_generators(&k, &v, 4).is_err());
    }

    #[test]
    fn decompose_round_trips() {
        // Reassembling ∏ gᵢ^{eᵢ} reproduces every unit in the quotient.
        let k = field(-2);
        let v = primes_above(&k, 2).unwrap().remove(0);
        for m in [2u32, 3, 4, 5] {
            let g = local_unit_generators(&k, &v, m).unwrap();
            // Walk units u = a + bω with odd valuation-0 norm.
            for a in 0..8i64 {
                for b in 0..8i64 {
                    let u = k.elem(a, b);
                    if u.is_zero() || v.valuation(&u) != 0 {
                        continue;
                    }
                    let exps = g.decompose(&u).unwrap();
                    let mut acc = k.one();
                    for (gi, &e) in g.generators().iter().zip(&exps) {
                        acc = g.mul(&acc, &g.pow(gi, e));
                    }
                    assert!(g.residue_equal(&acc, &u), "m={m}, u={u}");
                }
            }
        }
    }

    #[test]
    fn decompose_unit_trivial_and_errors() {
        let k = field(5);
        let v = primes_above(&k, 29).unwrap().remove(0);
        let g = local_unit_generators(&k, &v, 1).unwrap();
        assert_eq!(g.decompose(&k.one()).unwrap(), vec![0]);
        // 29 itself is not a unit at v
        assert!(g.decompose(&k.elem(29, 0)).is_err());
    }

    #[test]
    fn place_parse_and_display() {
        let k = field(5);
        let v = PrimePlace::parse(&k, "29:split:1").unwrap();
        assert_eq!(v.to_string(), "29:split:1");
        assert_eq!(v.omega_root(), Some(6));
        assert!(PrimePlace::parse(&k, "29:inert").is_err());
        let (v2, e) = parse_place_power(&k, "2:inert:2").unwrap();
        assert_eq!(v2.kind(), SplitKind::Inert);
        assert_eq!(e, 2);
    }

    #[test]
    fn ideal_dto_roundtrip() {
        let k = field(-1);
        let q = primes_above(&k, 17).unwrap().remove(1);
        let v2 = primes_above(&k, 2).unwrap().remove(0);
        let ideal = IntegralIdeal::from_factors(k.d(), [(q, 1), (v2, 5)]).unwrap();
        let dto = ideal.to_dto();
        let back = IntegralIdeal::from_dto(&k, &dto).unwrap();
        assert_eq!(back, ideal);
    }
}
