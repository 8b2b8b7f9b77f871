//! Finite-order idele class characters of a quadratic field.
//!
//! A character χ of 2-power order n is stored as exact data: its conductor
//! 𝔣 = ∏ v^{m(v)}, for each v | 𝔣 the exponent vector of the primitive local
//! character ξ_v on the generators of 𝒰_v/(1 + ℳ_v^{m(v)}), and the
//! infinity type (a sign per real embedding). Values are roots of unity
//! ζ_n^k represented by the integer exponent k.
//!
//! Construction extends a unit-group character to the full idele class
//! group: when the order is coprime to the (odd) class number and the data
//! is trivial on the global units, the extension exists and is unique, so a
//! character is faithfully represented by (𝔣, ξ, χ_∞) alone. Unramified
//! values χ_v(π_v) are derived on demand: with k the order of [v] in the
//! class group and β_v a generator of v^k,
//! χ_v(π_v)^k = (χ_∞(β_v)·ξ(β_v))^{−1}, and k odd makes the k-th root
//! unambiguous in a group of 2-power order.
//!
//! Local evaluation of ξ_v: at places over 2 by decomposition over the
//! stored generators; at odd places by a power-residue computation in the
//! residue field (the quadratic case is exactly Euler's criterion
//! α^{(N(v)−1)/2} mod v), with discrete logs matched only inside the
//! 2-Sylow image, which is never larger than the character order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::ideals::{self, IntegralIdeal, LocalUnitGroup, PlacePowerDto, PrimePlace, SplitKind};
use crate::quadfield::{QuadField, QuadInt};

/// Default prime-norm bound for the evaluation sweep confirming structural
/// self-conjugacy decisions.
pub const BASE_CHANGE_CONFIRM_BOUND: u64 = 100;

/// A root of unity ζ_order^num with exact exponent arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootOfUnity {
    num: u32,
    order: u32,
}

impl RootOfUnity {
    pub fn new(num: u32, order: u32) -> RootOfUnity {
        assert!(order >= 1);
        RootOfUnity {
            num: num % order,
            order,
        }
    }

    pub fn one(order: u32) -> RootOfUnity {
        RootOfUnity { num: 0, order }
    }

    pub fn minus_one(order: u32) -> RootOfUnity {
        assert!(order % 2 == 0);
        RootOfUnity {
            num: order / 2,
            order,
        }
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    /// Multiplicative order of the value itself.
    pub fn exact_order(&self) -> u32 {
        self.order / self.num.gcd(&self.order)
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        assert_eq!(self.order, other.order, "mismatched value orders");
        RootOfUnity::new(self.num + other.num, self.order)
    }

    pub fn pow(&self, e: u64) -> RootOfUnity {
        let e = (e % self.order as u64) as u32;
        RootOfUnity::new(((self.num as u64 * e as u64) % self.order as u64) as u32, self.order)
    }

    pub fn inverse(&self) -> RootOfUnity {
        RootOfUnity::new(self.order - self.num, self.order)
    }

    /// Rewrite to a larger order divisible by the current one.
    pub fn lift_to(&self, order: u32) -> RootOfUnity {
        assert_eq!(order % self.order, 0);
        RootOfUnity::new(self.num * (order / self.order), order)
    }

    /// ±1 when the value is real, else `None`.
    pub fn sign(&self) -> Option<i8> {
        if self.num == 0 {
            Some(1)
        } else if 2 * self.num == self.order {
            Some(-1)
        } else {
            None
        }
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign() {
            Some(1) => write!(f, "+1"),
            Some(-1) => write!(f, "-1"),
            _ => write!(f, "zeta_{}^{}", self.order, self.num),
        }
    }
}

/// The primitive local character ξ_v: exponents of its values on the
/// generators of the local unit group.
#[derive(Debug)]
pub struct LocalCharData {
    group: LocalUnitGroup,
    values: Vec<u32>,
}

impl LocalCharData {
    pub fn group(&self) -> &LocalUnitGroup {
        &self.group
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }
}

/// A finite-order (2-power) idele class character of a quadratic field.
pub struct HeckeCharacter {
    field: Arc<QuadField>,
    order: u32,
    conductor: IntegralIdeal,
    local: BTreeMap<PrimePlace, LocalCharData>,
    infinity: Vec<i8>,
    unramified_cache: Mutex<BTreeMap<(u64, u8), RootOfUnity>>,
}

impl fmt::Debug for HeckeCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Clone for HeckeCharacter {
    fn clone(&self) -> Self {
        let local = self
            .local
            .iter()
            .map(|(v, data)| {
                let group = ideals::local_unit_generators(&self.field, v, data.group.precision())
                    .expect("rebuilding a verified group");
                (
                    v.clone(),
                    LocalCharData {
                        group,
                        values: data.values.clone(),
                    },
                )
            })
            .collect();
        HeckeCharacter {
            field: self.field.clone(),
            order: self.order,
            conductor: self.conductor.clone(),
            local,
            infinity: self.infinity.clone(),
            unramified_cache: Mutex::new(self.unramified_cache.lock().unwrap().clone()),
        }
    }
}

impl PartialEq for HeckeCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.field.d() == other.field.d()
            && self.order == other.order
            && self.conductor == other.conductor
            && self.infinity == other.infinity
            && self.local.len() == other.local.len()
            && self
                .local
                .iter()
                .zip(other.local.iter())
                .all(|((v1, d1), (v2, d2))| v1 == v2 && d1.values == d2.values)
    }
}

impl Eq for HeckeCharacter {}

impl fmt::Display for HeckeCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inf: String = self
            .infinity
            .iter()
            .map(|s| if *s > 0 { '+' } else { '-' })
            .collect();
        write!(
            f,
            "chi[d={}, order={}, f={}, inf={}]",
            self.field.d(),
            self.order,
            self.conductor,
            if inf.is_empty() { "()".into() } else { inf }
        )
    }
}

impl HeckeCharacter {
    pub fn field(&self) -> &Arc<QuadField> {
        &self.field
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn conductor(&self) -> &IntegralIdeal {
        &self.conductor
    }

    pub fn local_data(&self) -> impl Iterator<Item = (&PrimePlace, &LocalCharData)> {
        self.local.iter()
    }

    pub fn infinity_type(&self) -> &[i8] {
        &self.infinity
    }

    /// The trivial character.
    pub fn trivial(field: Arc<QuadField>) -> HeckeCharacter {
        let infinity = vec![1i8; field.signature().0 as usize];
        let d = field.d();
        HeckeCharacter {
            field,
            order: 1,
            conductor: IntegralIdeal::unit_ideal(d),
            local: BTreeMap::new(),
            infinity,
            unramified_cache: Mutex::new(BTreeMap::new()),
        }
    }

    /// χ_∞(α): the product of the chosen signs over the real embeddings
    /// where α is negative.
    pub fn infinity_value(&self, x: &QuadInt) -> RootOfUnity {
        if !self.field.is_real() || self.order == 1 {
            return RootOfUnity::one(self.order);
        }
        let mut value = RootOfUnity::one(self.order);
        for (i, s) in self.infinity.iter().enumerate() {
            if *s < 0 && x.embedding_sign(i) < 0 {
                value = value.mul(&RootOfUnity::minus_one(self.order));
            }
        }
        value
    }

    /// ξ_v(x) for one place v | 𝔣 and x coprime to v.
    pub fn local_value(&self, place: &PrimePlace, x: &QuadInt) -> Result<RootOfUnity> {
        let data = self
            .local
            .get(place)
            .ok_or_else(|| Error::Unsupported(format!("character is unramified at {place}")))?;
        local_value_of(&data.group, &data.values, self.order, x)
    }

    /// ξ(x) = ∏_{v | 𝔣} ξ_v(x) for x coprime to 𝔣.
    pub fn xi_value(&self, x: &QuadInt) -> Result<RootOfUnity> {
        if !self.conductor.is_unit_ideal() && !self.conductor.is_coprime_to_element(x) {
            return Err(Error::NotCoprime(format!(
                "{x} is not coprime to the conductor"
            )));
        }
        let mut value = RootOfUnity::one(self.order);
        for data in self.local.values() {
            value = value.mul(&local_value_of(&data.group, &data.values, self.order, x)?);
        }
        Ok(value)
    }

    /// χ_v(π_v) as an ideal value for an unramified place, derived through a
    /// generator of v^k with k the order of [v] in the class group.
    pub fn unramified_value(&self, place: &PrimePlace) -> Result<RootOfUnity> {
        if self.order == 1 {
            return Ok(RootOfUnity::one(1));
        }
        if self.conductor.exponent_at(place) > 0 {
            return Err(Error::NotCoprime(format!("{place} divides the conductor")));
        }
        let key = (place.p(), place.label());
        if let Some(v) = self.unramified_cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let h = self.field.class_number()?;
        let mut found = None;
        for k in 1..=h {
            if h % k != 0 {
                continue;
            }
            let power = IntegralIdeal::from_place(place, k as u32);
            if let Some(g) = self.field.is_principal(&power)? {
                found = Some((g, k));
                break;
            }
        }
        let (beta, class_order) = found.ok_or_else(|| {
            Error::ConstraintViolation(format!("no power of {place} up to h is principal"))
        })?;
        let total = self.infinity_value(&beta).mul(&self.xi_value(&beta)?);
        // χ_v(π_v)^k = total^{−1}; k odd is invertible mod the 2-power order.
        let k_inv = arith::mod_inverse(class_order % self.order as u64, self.order as u64)
            .ok_or_else(|| {
                Error::ConstraintViolation(
                    "class order is not invertible mod the character order".into(),
                )
            })?;
        let value = total.inverse().pow(k_inv);
        self.unramified_cache.lock().unwrap().insert(key, value);
        Ok(value)
    }

    /// χ(𝔞) for an ideal coprime to the conductor.
    pub fn eval_ideal(&self, ideal: &IntegralIdeal) -> Result<RootOfUnity> {
        if ideal.field_d() != self.field.d() {
            return Err(Error::MixedFields(ideal.field_d(), self.field.d()));
        }
        if !ideal.is_coprime_to(&self.conductor) {
            return Err(Error::NotCoprime(
                "ideal is not coprime to the conductor".into(),
            ));
        }
        let mut value = RootOfUnity::one(self.order);
        for (v, m) in ideal.factors() {
            value = value.mul(&self.unramified_value(v)?.pow(m as u64));
        }
        Ok(value)
    }

    /// Full idele value of a principal idele: χ_∞(α)·ξ(α)·∏_{v∤𝔣} χ_v(α).
    /// Triviality on K^× says this is 1 for every α coprime to 𝔣.
    pub fn principal_idele_value(&self, x: &QuadInt) -> Result<RootOfUnity> {
        let finite = ideals::factor_principal(&self.field, x)?;
        let unram = self.eval_ideal(&finite)?;
        Ok(self.infinity_value(x).mul(&self.xi_value(x)?).mul(&unram))
    }

    /// The conjugate character χ^c: conductor 𝔣^c, local data transported by
    /// ξ'_w = ξ_{wᶜ} ∘ c, infinity type with the two real embeddings swapped.
    pub fn conjugate(&self) -> Result<HeckeCharacter> {
        if self.order == 1 {
            return Ok(self.clone());
        }
        let mut local_values = BTreeMap::new();
        for (v, data) in &self.local {
            let w = v.conjugate();
            let m = data.group.precision();
            let group_w = ideals::local_unit_generators(&self.field, &w, m)?;
            let mut values = Vec::with_capacity(group_w.generators().len());
            for g in group_w.generators() {
                let val = local_value_of(&data.group, &data.values, self.order, &g.conj())?;
                values.push(val.num());
            }
            local_values.insert(w, values);
        }
        let mut infinity = self.infinity.clone();
        infinity.reverse();
        let conductor = self.conductor.conjugate();
        assemble(
            self.field.clone(),
            self.order,
            &conductor,
            &local_values,
            infinity,
        )
    }

    /// Structural test for χ = χ^c (self-conjugacy ⟺ arising from base
    /// change), confirmed by an evaluation sweep over primes of norm up to
    /// `bound`.
    pub fn is_base_change_with_bound(&self, bound: u64) -> Result<bool> {
        if self.order == 1 {
            return Ok(true);
        }
        let conj = self.conjugate()?;
        let structural = *self == conj;
        // Confirmation sweep; by uniqueness of the extension the two
        // decisions can never disagree when the structural answer is yes.
        if structural {
            for p in arith::primes_up_to(bound) {
                for v in ideals::primes_above(&self.field, p)? {
                    if v.norm_u64() > bound || self.conductor.exponent_at(&v) > 0 {
                        continue;
                    }
                    let ideal = IntegralIdeal::from_place(&v, 1);
                    if self.eval_ideal(&ideal)? != conj.eval_ideal(&ideal)? {
                        return Err(Error::ConstraintViolation(format!(
                            "structural self-conjugacy contradicted at {v}"
                        )));
                    }
                }
            }
        }
        Ok(structural)
    }

    /// `is_base_change_with_bound` at the default confirmation bound.
    pub fn is_base_change(&self) -> Result<bool> {
        self.is_base_change_with_bound(BASE_CHANGE_CONFIRM_BOUND)
    }

    /// Pointwise product χ₁·χ₂ with the conductor recomputed exactly
    /// (primitivity restored by dropping places where the product becomes
    /// imprimitive or unramified).
    pub fn product(&self, other: &HeckeCharacter) -> Result<HeckeCharacter> {
        if self.field.d() != other.field.d() {
            return Err(Error::MixedFields(self.field.d(), other.field.d()));
        }
        let big_order = self.order.lcm(&other.order);
        let infinity: Vec<i8> = if !self.field.is_real() {
            Vec::new()
        } else {
            self.infinity
                .iter()
                .zip(&other.infinity)
                .map(|(a, b)| a * b)
                .collect()
        };
        // Union of ramified places; product values at joint precision.
        let mut places: BTreeMap<PrimePlace, u32> = BTreeMap::new();
        for (v, m) in self.conductor.factors() {
            places.insert(v.clone(), m);
        }
        for (v, m) in other.conductor.factors() {
            let e = places.entry(v.clone()).or_insert(0);
            *e = (*e).max(m);
        }
        let mut reduced: Vec<(PrimePlace, u32, Vec<u32>)> = Vec::new();
        for (v, m) in places {
            let group = ideals::local_unit_generators(&self.field, &v, m)?;
            let mut vals: Vec<RootOfUnity> = Vec::new();
            for g in group.generators() {
                let a = self.local_value_or_one(&v, g)?.lift_to(big_order);
                let b = other.local_value_or_one(&v, g)?.lift_to(big_order);
                vals.push(a.mul(&b));
            }
            let exact_m = exact_local_exponent(&group, &vals)?;
            if exact_m == 0 {
                continue;
            }
            let values: Vec<u32> = if exact_m == m {
                vals.iter().map(|r| r.num()).collect()
            } else {
                let small = ideals::local_unit_generators(&self.field, &v, exact_m)?;
                small
                    .generators()
                    .iter()
                    .map(|g| {
                        let exps = group.decompose(g).expect("generator is a unit");
                        let mut val = RootOfUnity::one(big_order);
                        for (r, e) in vals.iter().zip(exps) {
                            val = val.mul(&r.pow(e));
                        }
                        val.num()
                    })
                    .collect()
            };
            reduced.push((v, exact_m, values));
        }
        // Exact order of the product character.
        let mut exact = if infinity.contains(&-1) { 2u32 } else { 1 };
        for (_, _, values) in &reduced {
            for &num in values {
                exact = exact.lcm(&RootOfUnity::new(num, big_order).exact_order());
            }
        }
        if exact == 1 {
            return Ok(HeckeCharacter::trivial(self.field.clone()));
        }
        let mut local_values = BTreeMap::new();
        let mut conductor_factors = Vec::new();
        for (v, m, values) in reduced {
            let rescaled: Vec<u32> = values
                .into_iter()
                .map(|num| (num as u64 * exact as u64 / big_order as u64) as u32)
                .collect();
            conductor_factors.push((v.clone(), m));
            local_values.insert(v, rescaled);
        }
        let conductor = IntegralIdeal::from_factors(self.field.d(), conductor_factors)?;
        assemble(self.field.clone(), exact, &conductor, &local_values, infinity)
    }

    /// ξ_v(x) when v | 𝔣, else 1.
    fn local_value_or_one(&self, place: &PrimePlace, x: &QuadInt) -> Result<RootOfUnity> {
        match self.local.get(place) {
            Some(data) => local_value_of(&data.group, &data.values, self.order, x),
            None => Ok(RootOfUnity::one(self.order)),
        }
    }

    /// Serialization form: deterministic and round-trippable.
    pub fn to_dto(&self) -> CharacterDto {
        CharacterDto {
            field: FieldDto { d: self.field.d() },
            order: self.order,
            conductor: self.conductor.to_dto(),
            local: self
                .local
                .iter()
                .map(|(v, data)| LocalDataDto {
                    p: v.p(),
                    kind: v.kind(),
                    label: v.label(),
                    values: data.values.clone(),
                })
                .collect(),
            infinity: self.infinity.clone(),
        }
    }

    pub fn from_dto(dto: &CharacterDto) -> Result<HeckeCharacter> {
        let field = QuadField::new(dto.field.d)?;
        if dto.order == 1 {
            return Ok(HeckeCharacter::trivial(field));
        }
        let conductor = IntegralIdeal::from_dto(&field, &dto.conductor)?;
        let mut local_values = BTreeMap::new();
        for entry in &dto.local {
            let place = ideals::primes_above(&field, entry.p)?
                .into_iter()
                .find(|v| v.kind() == entry.kind && v.label() == entry.label)
                .ok_or_else(|| Error::Parse("no such place in this field".into()))?;
            local_values.insert(place, entry.values.clone());
        }
        build_character(&field, &conductor, &local_values, dto.order, Some(&dto.infinity))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldDto {
    pub d: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LocalDataDto {
    pub p: u64,
    pub kind: SplitKind,
    pub label: u8,
    pub values: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CharacterDto {
    pub field: FieldDto,
    pub order: u32,
    pub conductor: Vec<PlacePowerDto>,
    pub local: Vec<LocalDataDto>,
    pub infinity: Vec<i8>,
}

/// ξ_v(x) from a generator presentation: decomposition at places over 2,
/// power-residue matching in the 2-Sylow image of κ_v^× at odd places.
fn local_value_of(
    group: &LocalUnitGroup,
    values: &[u32],
    order: u32,
    x: &QuadInt,
) -> Result<RootOfUnity> {
    let place = group.place();
    if place.p() == 2 {
        let exps = group.decompose(x)?;
        let mut value = RootOfUnity::one(order);
        for (&t, e) in values.iter().zip(exps) {
            value = value.mul(&RootOfUnity::new(t, order).pow(e));
        }
        return Ok(value);
    }
    // Odd place: m = 1, a single generator g of κ_v^×.
    let t = RootOfUnity::new(values[0], order);
    if t.is_one() {
        return Ok(RootOfUnity::one(order));
    }
    if x.is_zero() || place.valuation(x) != 0 {
        return Err(Error::NotCoprime(format!("element not a unit at {place}")));
    }
    let value_order = t.exact_order() as u64; // a power of 2
    let nv = place.norm_u64();
    let cof = (nv - 1) / value_order;
    let g = &group.generators()[0];
    match place.kind() {
        SplitKind::Inert => {
            let p = BigInt::from(place.p());
            let base = ideals::pow_mod(g, cof, &p);
            let target = ideals::pow_mod(x, cof, &p);
            let mut acc = QuadInt::one_for(x.field_d());
            for j in 0..value_order {
                if acc.reduce_mod(&p) == target {
                    return Ok(t.pow(j));
                }
                acc = acc.checked_mul(&base).expect("same field").reduce_mod(&p);
            }
            Err(Error::ConstraintViolation(format!(
                "power-residue matching failed at {place}"
            )))
        }
        _ => {
            let p = place.p();
            let base = arith::mod_pow(place.residue_fp(g), cof, p);
            let target = arith::mod_pow(place.residue_fp(x), cof, p);
            let mut acc = 1u64;
            for j in 0..value_order {
                if acc == target {
                    return Ok(t.pow(j));
                }
                acc = ((acc as u128 * base as u128) % p as u128) as u64;
            }
            Err(Error::ConstraintViolation(format!(
                "power-residue matching failed at {place}"
            )))
        }
    }
}

/// Smallest m' ≤ m with ξ trivial on the units ≡ 1 mod v^{m'} (0 means ξ is
/// trivial on the whole unit quotient).
fn exact_local_exponent(group: &LocalUnitGroup, vals: &[RootOfUnity]) -> Result<u32> {
    let m = group.precision();
    if group.place().p() != 2 {
        // m = 1 and the quotient is κ_v^×.
        return Ok(u32::from(!vals.iter().all(RootOfUnity::is_one)));
    }
    let one = QuadInt::one_for(group.place().field_d());
    let value_order = vals.first().map_or(2, |v| v.order());
    'level: for m_try in 0..m {
        for e in enumerate_exponents(group.orders()) {
            let mut u = one.clone();
            let mut val = RootOfUnity::one(value_order);
            for ((g, &ei), r) in group.generators().iter().zip(&e).zip(vals) {
                u = group_mul_pow(group, &u, g, ei);
                val = val.mul(&r.pow(ei));
            }
            let diff = u.checked_sub(&one).expect("same field");
            if group.place().valuation_at_least(&diff, m_try) && !val.is_one() {
                continue 'level;
            }
        }
        return Ok(m_try);
    }
    Ok(m)
}

fn enumerate_exponents(orders: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &ord in orders {
        let mut next = Vec::with_capacity(out.len() * ord as usize);
        for base in &out {
            for e in 0..ord {
                let mut v = base.clone();
                v.push(e);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn group_mul_pow(group: &LocalUnitGroup, acc: &QuadInt, g: &QuadInt, e: u64) -> QuadInt {
    let mut acc = acc.clone();
    for _ in 0..e {
        acc = group.reduce(&acc.checked_mul(g).expect("same field"));
    }
    acc
}

/// Construct the unique idele class character with the given conductor,
/// primitive local data, and 2-power order.
///
/// Validates: the order is a power of two and the class number odd, each
/// ξ_v is primitive at its level, the data is trivial on the global units,
/// and the declared order is exactly the order generated. The infinity type
/// is derived (trivial for imaginary fields; from ξ(−1) and ξ(ε_K) for real
/// fields with N(ε_K) = −1) and checked against the hint when supplied.
pub fn build_character(
    field: &Arc<QuadField>,
    conductor: &IntegralIdeal,
    local_values: &BTreeMap<PrimePlace, Vec<u32>>,
    order: u32,
    infinity_hint: Option<&[i8]>,
) -> Result<HeckeCharacter> {
    if order == 1 {
        if !conductor.is_unit_ideal() {
            return Err(Error::ConstraintViolation(
                "the trivial character has trivial conductor".into(),
            ));
        }
        return Ok(HeckeCharacter::trivial(field.clone()));
    }
    if !order.is_power_of_two() {
        return Err(Error::Unsupported(format!(
            "character order must be a power of 2, got {order}"
        )));
    }
    if conductor.field_d() != field.d() {
        return Err(Error::MixedFields(conductor.field_d(), field.d()));
    }
    let h = field.class_number()?;
    if h % 2 == 0 {
        return Err(Error::Unsupported(format!(
            "class number {h} is even; the construction requires an odd class number"
        )));
    }
    let mut local = BTreeMap::new();
    for (v, m) in conductor.factors() {
        let values = local_values
            .get(v)
            .ok_or_else(|| Error::ConstraintViolation(format!("missing local data at {v}")))?;
        let group = ideals::local_unit_generators(field, v, m)?;
        if values.len() != group.generators().len() {
            return Err(Error::ConstraintViolation(format!(
                "local data at {v} has {} values for {} generators",
                values.len(),
                group.generators().len()
            )));
        }
        for (&t, &ord) in values.iter().zip(group.orders()) {
            if (t as u64 * ord) % order as u64 != 0 {
                return Err(Error::ConstraintViolation(format!(
                    "value exponent {t} is inconsistent with a generator of order {ord} at {v}"
                )));
            }
        }
        if !is_primitive(&group, values, order)? {
            return Err(Error::ConstraintViolation(format!(
                "local data at {v} is not primitive at level {m}"
            )));
        }
        local.insert(
            v.clone(),
            LocalCharData {
                group,
                values: values.clone(),
            },
        );
    }
    // Declared order must be exactly the lcm of the value orders (the
    // infinity type is derived from ξ and cannot raise it).
    let mut exact = 1u32;
    for data in local.values() {
        for &t in &data.values {
            exact = exact.lcm(&RootOfUnity::new(t, order).exact_order());
        }
    }
    if exact != order {
        return Err(Error::ConstraintViolation(format!(
            "declared order {order} differs from the generated order {exact}"
        )));
    }
    let xi_on = |x: &QuadInt| -> Result<RootOfUnity> {
        let mut val = RootOfUnity::one(order);
        for data in local.values() {
            val = val.mul(&local_value_of(&data.group, &data.values, order, x)?);
        }
        Ok(val)
    };
    let infinity: Vec<i8> = if field.is_real() {
        if field.unit_norm() != Some(-1) {
            return Err(Error::Unsupported(
                "real field whose fundamental unit has norm +1 is outside the supported families"
                    .into(),
            ));
        }
        let eps = field.fundamental_unit().unwrap().clone();
        let xi_eps = xi_on(&eps)?.sign().ok_or_else(|| {
            Error::ConstraintViolation(
                "unit character takes a non-real value on the fundamental unit".into(),
            )
        })?;
        let xi_m1 = xi_on(&field.elem(-1, 0))?.sign().ok_or_else(|| {
            Error::ConstraintViolation("unit character takes a non-real value on -1".into())
        })?;
        // σ₁(ε) > 0, σ₂(ε) < 0: ξ(ε) fixes the second sign, ξ(−1) the first.
        debug_assert_eq!(eps.embedding_sign(0), 1);
        let s2 = xi_eps;
        let s1 = xi_m1 * s2;
        vec![s1, s2]
    } else {
        // Imaginary: χ_∞ is trivial; ξ must kill the torsion units.
        let t = field.torsion_generator();
        let val = xi_on(&t)?;
        if !val.is_one() {
            return Err(Error::ConstraintViolation(format!(
                "unit character must be trivial on the torsion unit of an imaginary field \
                 (got {val} on {t})"
            )));
        }
        Vec::new()
    };
    if let Some(hint) = infinity_hint {
        if hint != infinity.as_slice() {
            return Err(Error::ConstraintViolation(format!(
                "infinity hint {hint:?} contradicts the derived type {infinity:?}"
            )));
        }
    }
    let chi = HeckeCharacter {
        field: field.clone(),
        order,
        conductor: conductor.clone(),
        local,
        infinity,
        unramified_cache: Mutex::new(BTreeMap::new()),
    };
    validate_unit_triviality(&chi)?;
    Ok(chi)
}

/// Internal constructor from complete data (used by conjugation, products
/// and base change); applies the same validation as `build_character`.
fn assemble(
    field: Arc<QuadField>,
    order: u32,
    conductor: &IntegralIdeal,
    local_values: &BTreeMap<PrimePlace, Vec<u32>>,
    infinity: Vec<i8>,
) -> Result<HeckeCharacter> {
    if order == 1 {
        return Ok(HeckeCharacter::trivial(field));
    }
    let mut local = BTreeMap::new();
    for (v, m) in conductor.factors() {
        let group = ideals::local_unit_generators(&field, v, m)?;
        let values = local_values
            .get(v)
            .ok_or_else(|| Error::ConstraintViolation(format!("missing local data at {v}")))?;
        if !is_primitive(&group, values, order)? {
            return Err(Error::ConstraintViolation(format!(
                "transported data at {v} lost primitivity"
            )));
        }
        local.insert(
            v.clone(),
            LocalCharData {
                group,
                values: values.clone(),
            },
        );
    }
    let chi = HeckeCharacter {
        field,
        order,
        conductor: conductor.clone(),
        local,
        infinity,
        unramified_cache: Mutex::new(BTreeMap::new()),
    };
    validate_unit_triviality(&chi)?;
    Ok(chi)
}

/// χ_∞(u)·ξ(u) = 1 for every global unit generator.
fn validate_unit_triviality(chi: &HeckeCharacter) -> Result<()> {
    let field = &chi.field;
    let mut units = vec![field.torsion_generator()];
    if let Some(eps) = field.fundamental_unit() {
        units.push(eps.clone());
    }
    for u in units {
        let val = chi.infinity_value(&u).mul(&chi.xi_value(&u)?);
        if !val.is_one() {
            return Err(Error::ConstraintViolation(format!(
                "character is not trivial on the global unit {u} (value {val})"
            )));
        }
    }
    Ok(())
}

/// ξ is primitive at its level: nontrivial on the kernel of reduction to
/// level m−1 (at odd places, m = 1 and this just says ξ ≠ 1).
fn is_primitive(group: &LocalUnitGroup, values: &[u32], order: u32) -> Result<bool> {
    let place = group.place();
    let m = group.precision();
    if place.p() != 2 {
        return Ok(values.iter().any(|&t| t % order != 0));
    }
    if group.generators().is_empty() {
        return Ok(false);
    }
    let one = QuadInt::one_for(place.field_d());
    for e in enumerate_exponents(group.orders()) {
        let mut u = one.clone();
        let mut val = RootOfUnity::one(order);
        for ((g, &ei), &t) in group.generators().iter().zip(&e).zip(values) {
            u = group_mul_pow(group, &u, g, ei);
            val = val.mul(&RootOfUnity::new(t, order).pow(ei));
        }
        let diff = u.checked_sub(&one).expect("same field");
        if place.valuation_at_least(&diff, m - 1) && !val.is_one() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A quadratic Dirichlet character: the Kronecker symbol (D/·) of a
/// fundamental discriminant D (D = 1 is the trivial character).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirichletQuadratic {
    disc: i64,
}

impl DirichletQuadratic {
    pub fn new(disc: i64) -> Result<DirichletQuadratic> {
        if !arith::is_fundamental_discriminant(disc) {
            return Err(Error::InvalidField(format!(
                "{disc} is not a fundamental discriminant"
            )));
        }
        Ok(DirichletQuadratic { disc })
    }

    pub fn trivial() -> DirichletQuadratic {
        DirichletQuadratic { disc: 1 }
    }

    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    pub fn modulus(&self) -> u64 {
        self.disc.unsigned_abs()
    }

    pub fn is_trivial(&self) -> bool {
        self.disc == 1
    }

    pub fn eval_i64(&self, n: i64) -> i32 {
        arith::kronecker(self.disc, n)
    }

    pub fn eval_big(&self, n: &BigInt) -> i32 {
        if self.disc == 1 {
            return 1;
        }
        // (D/·) is periodic mod 4|D| including the sign behavior on
        // negatives of the residue; reduce into [0, 4|D|) first.
        let m = BigInt::from(4 * self.disc.abs());
        let r = n.mod_floor(&m).to_i64().expect("reduced residue fits");
        arith::kronecker(self.disc, r)
    }

    /// The prime discriminant dividing D at p (−4, ±8 at 2; (−1)^{(p−1)/2}p
    /// at odd p), or `None` when p ∤ D.
    pub fn prime_discriminant_at(&self, p: u64) -> Option<i64> {
        if self.disc == 1 || self.disc.unsigned_abs() % p != 0 {
            return None;
        }
        if p == 2 {
            let mut odd = 1i64;
            for (q, _) in arith::factor(self.disc.unsigned_abs()) {
                if q != 2 {
                    let sign = if q % 4 == 1 { 1 } else { -1 };
                    odd *= sign * q as i64;
                }
            }
            let two_part = self.disc / odd;
            debug_assert!([-4, 8, -8].contains(&two_part));
            Some(two_part)
        } else {
            let sign = if p % 4 == 1 { 1 } else { -1 };
            Some(sign * p as i64)
        }
    }
}

/// The base change ν ∘ N_{K/ℚ} as a Hecke character of K: the local
/// component at v | p is u ↦ ν_p(N_{K_v/ℚ_p}(u)), with the conductor
/// computed exactly by primitivity probing at every place over the modulus
/// of ν.
pub fn base_change_of_dirichlet(
    nu: &DirichletQuadratic,
    field: &Arc<QuadField>,
) -> Result<HeckeCharacter> {
    if nu.is_trivial() {
        return Ok(HeckeCharacter::trivial(field.clone()));
    }
    let h = field.class_number()?;
    if h % 2 == 0 {
        return Err(Error::Unsupported(
            "base change construction requires an odd class number".into(),
        ));
    }
    let order = 2u32;
    let mut conductor_factors = Vec::new();
    let mut local_values: BTreeMap<PrimePlace, Vec<u32>> = BTreeMap::new();
    for (p, _) in arith::factor(nu.modulus()) {
        let dp = nu
            .prime_discriminant_at(p)
            .expect("prime divides the modulus");
        for v in ideals::primes_above(field, p)? {
            let m_max = match (p, v.kind()) {
                (2, SplitKind::Ramified) => 5,
                (2, _) => 3,
                _ => 1,
            };
            let group = ideals::local_unit_generators(field, &v, m_max)?;
            let vals: Vec<RootOfUnity> = group
                .generators()
                .iter()
                .map(|g| {
                    let n = local_norm_image(&v, g, m_max);
                    if arith::kronecker(dp, n) >= 0 {
                        RootOfUnity::one(order)
                    } else {
                        RootOfUnity::minus_one(order)
                    }
                })
                .collect();
            let exact_m = exact_local_exponent(&group, &vals)?;
            if exact_m == 0 {
                continue;
            }
            let values: Vec<u32> = if exact_m == m_max {
                vals.iter().map(|r| r.num()).collect()
            } else {
                let small = ideals::local_unit_generators(field, &v, exact_m)?;
                small
                    .generators()
                    .iter()
                    .map(|g| {
                        let exps = group.decompose(g).expect("generator is a unit");
                        let mut val = RootOfUnity::one(order);
                        for (r, e) in vals.iter().zip(exps) {
                            val = val.mul(&r.pow(e));
                        }
                        val.num()
                    })
                    .collect()
            };
            conductor_factors.push((v.clone(), exact_m));
            local_values.insert(v, values);
        }
    }
    if conductor_factors.is_empty() {
        // ν ∘ N is trivial exactly when ν is cut out by K itself.
        return Ok(HeckeCharacter::trivial(field.clone()));
    }
    let conductor = IntegralIdeal::from_factors(field.d(), conductor_factors)?;
    let infinity = if field.is_real() {
        let s = if nu.discriminant() < 0 { -1 } else { 1 };
        vec![s, s]
    } else {
        Vec::new()
    };
    assemble(field.clone(), order, &conductor, &local_values, infinity)
}

/// N_{K_v/ℚ_p}(x) as an i64 residue: the root-embedding image for split v
/// (where K_v = ℚ_p), the global norm otherwise. Enough 2-adic digits are
/// kept for the mod-8 characters.
fn local_norm_image(place: &PrimePlace, x: &QuadInt, m: u32) -> i64 {
    let k = match place.kind() {
        SplitKind::Ramified => place_modulus_exponent(m).max(3),
        _ => m.max(3),
    };
    let modulus = BigInt::from(place.p()).pow(k);
    let image = match place.kind() {
        SplitKind::Split => {
            let (a, b) = x.coeffs();
            a + b * split_root_lift(place, k)
        }
        _ => x.norm(),
    };
    image.mod_floor(&modulus).to_i64().expect("residue fits")
}

fn place_modulus_exponent(m: u32) -> u32 {
    m.div_ceil(2)
}

fn split_root_lift(place: &PrimePlace, k: u32) -> BigInt {
    let p = BigInt::from(place.p());
    let target = p.pow(k);
    let d = place.field_d();
    let half = d.rem_euclid(4) == 1;
    let mut modulus = p.clone();
    let mut r = BigInt::from(place.omega_root().expect("split place has a root"));
    while modulus < target {
        modulus = (&modulus * &modulus).min(target.clone());
        let (f, fp): (BigInt, BigInt) = if half {
            let c = BigInt::from((d - 1) / 4);
            (&r * &r - &r - c, BigInt::from(2) * &r - 1)
        } else {
            (&r * &r - d, BigInt::from(2) * &r)
        };
        let g = fp.extended_gcd(&modulus);
        let inv = g.x.mod_floor(&modulus);
        r = (&r - f * inv).mod_floor(&modulus);
    }
    r.mod_floor(&target)
}
