//! Classification of quadratic idele class characters up to base change.
//!
//! Three families of quadratic fields are admitted, all with odd class
//! number: imaginary K = ℚ(√−d) with d = 2 or a prime ≡ 3 mod 4, the
//! Gaussian field ℚ(i), and real K = ℚ(√d) with d = 2 or a prime
//! ≡ 1 mod 4. In each family a quadratic character is, up to multiplication
//! by base-change characters, pinned to a normal form by four clause sets:
//!
//! - (A) no places over odd inert primes divide 𝔣 (real family: no odd
//!   inert or ramified primes);
//! - (B) at most one place over the ramified odd prime, with exponent 1
//!   (imaginary family only);
//! - (C) split places lie in the designated set S_K (smaller-root places)
//!   with exponent 1 at odd p and exponent 2 or 3 at p = 2;
//! - (D) at a non-split 2: exponent 2 with χ_v(−1) = −1, χ_v(1+2μ₃) = 1
//!   when 2 is inert; exponent 4 or 5 with χ_v(1+π) = 1 when 2 ramifies in
//!   the imaginary family; exponent 2 with χ_v(μ₄) = −1 or exponent 5 with
//!   χ_v(1+π³) = 1 over ℚ(i); exponent 4 with χ_v(1+π) = 1, χ_v(1+π³) = −1
//!   in the real family.
//!
//! Existence of a character with a given admissible conductor is a parity
//! rule in the count r(𝔣) of places over primes ≡ 3 mod 4 (≡ 5 mod 8 for
//! ℚ(i)); the real family always admits one. Enumeration realizes every
//! admissible conductor by direct construction, emitting both characters
//! when a two-adic sign is genuinely free, and verifies that every emitted
//! character is not self-conjugate.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::arith;
use crate::characters::{build_character, HeckeCharacter};
use crate::error::{Error, Result};
use crate::ideals::{self, IntegralIdeal, PrimePlace, SplitKind};
use crate::quadfield::QuadField;

/// The admitted field families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// ℚ(√−d), d = 2 or a prime ≡ 3 mod 4.
    ImaginaryGeneral,
    /// ℚ(i).
    Gaussian,
    /// ℚ(√d), d = 2 or a prime ≡ 1 mod 4.
    Real,
}

/// Clause identifiers for admissibility reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Clause {
    A,
    B,
    C,
    D,
}

impl Clause {
    /// Family-decorated notation, e.g. "(A)i", "(D)i'", "(C)r".
    pub fn notation(&self, family: Family) -> String {
        let tag = match family {
            Family::Real => "r",
            _ => "i",
        };
        let prime = if family == Family::Gaussian && *self == Clause::D {
            "'"
        } else {
            ""
        };
        format!("({self:?}){tag}{prime}")
    }
}

/// Outcome of an admissibility check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseReport {
    pub family: Family,
    pub admissible: bool,
    /// First violated clause when inadmissible.
    pub violated: Option<Clause>,
}

impl fmt::Display for ClauseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.violated {
            None => write!(f, "admissible"),
            Some(c) => write!(f, "violates clause {}", c.notation(self.family)),
        }
    }
}

/// An admissible conductor together with its parity datum r(𝔣).
#[derive(Debug, Clone)]
pub struct AdmissibleConductor {
    pub field_d: i64,
    pub ideal: IntegralIdeal,
    pub family: Family,
    pub r_count: u32,
}

/// The family of an admitted field, or an error outside the classification.
pub fn family_of(field: &QuadField) -> Result<Family> {
    let d = field.d();
    match d {
        -1 => return Ok(Family::Gaussian),
        -2 => return Ok(Family::ImaginaryGeneral),
        2 => return Ok(Family::Real),
        _ => {}
    }
    if d < 0 && arith::is_prime((-d) as u64) && (-d).rem_euclid(4) == 3 {
        return Ok(Family::ImaginaryGeneral);
    }
    if d > 0 && arith::is_prime(d as u64) && d.rem_euclid(4) == 1 {
        return Ok(Family::Real);
    }
    Err(Error::Unsupported(format!(
        "d = {d} is outside the classified families (need -1, ±2, a negative prime \
         ≡ 3 mod 4, or a prime ≡ 1 mod 4)"
    )))
}

/// Number of places in 𝔣 over primes ≡ 3 mod 4 (imaginary family) or
/// ≡ 5 mod 8 (Gaussian family); unused by the real family.
pub fn r_count(family: Family, ideal: &IntegralIdeal) -> u32 {
    ideal
        .factors()
        .filter(|(v, _)| match family {
            Family::ImaginaryGeneral => v.p() % 4 == 3,
            Family::Gaussian => v.p() % 8 == 5,
            Family::Real => false,
        })
        .count() as u32
}

/// Clause-by-clause admissibility of a conductor; the report names the
/// first violated clause.
pub fn is_admissible(field: &QuadField, ideal: &IntegralIdeal) -> Result<ClauseReport> {
    let family = family_of(field)?;
    if ideal.field_d() != field.d() {
        return Err(Error::MixedFields(ideal.field_d(), field.d()));
    }
    let fail = |c: Clause| ClauseReport {
        family,
        admissible: false,
        violated: Some(c),
    };
    for (v, m) in ideal.factors() {
        match (v.p(), v.kind()) {
            (2, SplitKind::Split) => {
                if v.label() != 1 || !(m == 2 || m == 3) {
                    return Ok(fail(Clause::C));
                }
            }
            (2, SplitKind::Inert) => {
                if m != 2 {
                    return Ok(fail(Clause::D));
                }
            }
            (2, SplitKind::Ramified) => {
                let ok = match family {
                    Family::Gaussian => m == 2 || m == 5,
                    Family::ImaginaryGeneral => m == 4 || m == 5,
                    Family::Real => m == 4,
                };
                if !ok {
                    return Ok(fail(Clause::D));
                }
            }
            (_, SplitKind::Inert) => return Ok(fail(Clause::A)),
            (_, SplitKind::Ramified) => {
                if family == Family::Real {
                    return Ok(fail(Clause::A));
                }
                if m != 1 {
                    return Ok(fail(Clause::B));
                }
            }
            (_, SplitKind::Split) => {
                if v.label() != 1 || m != 1 {
                    return Ok(fail(Clause::C));
                }
            }
        }
    }
    Ok(ClauseReport {
        family,
        admissible: true,
        violated: None,
    })
}

/// Existence of a classified quadratic character with the given admissible
/// conductor: the parity rule in r(𝔣) for the imaginary families, always
/// true for the real family (nontrivial conductors only).
pub fn exists_character(field: &QuadField, ideal: &IntegralIdeal) -> Result<bool> {
    let report = is_admissible(field, ideal)?;
    if !report.admissible {
        return Err(Error::Unsupported(format!(
            "conductor {ideal} is not admissible: {report}"
        )));
    }
    if ideal.is_unit_ideal() {
        return Ok(false);
    }
    let family = report.family;
    if family == Family::Real {
        return Ok(true);
    }
    let r = r_count(family, ideal);
    let two_exp = ideal.factors().find(|(v, _)| v.p() == 2).map(|(_, m)| m);
    Ok(match two_exp {
        None => r % 2 == 0,
        Some(m) => match family {
            // m = 5 leaves the sign at μ₄ free, absorbing either parity.
            Family::Gaussian => m != 2 || r % 2 == 1,
            // m = 3 or 5 leaves one free sign.
            Family::ImaginaryGeneral => !(m == 2 || m == 4) || r % 2 == 1,
            Family::Real => unreachable!(),
        },
    })
}

/// The clause-(D) value pins: (generator index, required exponent mod 2).
fn pinned_values(family: Family, place: &PrimePlace, m: u32) -> Vec<(usize, u32)> {
    if place.p() != 2 {
        return Vec::new();
    }
    match (family, place.kind(), m) {
        (_, SplitKind::Inert, 2) => vec![(0, 1), (1, 0)],
        (Family::ImaginaryGeneral, SplitKind::Ramified, 4 | 5) => vec![(0, 0)],
        (Family::Gaussian, SplitKind::Ramified, 2) => vec![(0, 1)],
        (Family::Gaussian, SplitKind::Ramified, 5) => vec![(1, 0)],
        (Family::Real, SplitKind::Ramified, 4) => vec![(0, 0), (1, 1)],
        _ => Vec::new(),
    }
}

/// All quadratic characters with conductor exactly `ideal` whose local data
/// satisfies the family's clause-(D) pins: every sign combination
/// consistent with the pins is attempted, and those surviving primitivity
/// and the global unit constraint are returned.
pub fn attempt_constructions(
    field: &Arc<QuadField>,
    ideal: &IntegralIdeal,
) -> Result<Vec<HeckeCharacter>> {
    let family = family_of(field)?;
    build_all_with_conductor(field, ideal, |place, m| pinned_values(family, place, m))
}

/// All quadratic characters with conductor exactly `ideal`, with no clause
/// pins (used for partner searches outside the classified normal form).
pub fn all_quadratic_characters_with_conductor(
    field: &Arc<QuadField>,
    ideal: &IntegralIdeal,
) -> Result<Vec<HeckeCharacter>> {
    build_all_with_conductor(field, ideal, |_, _| Vec::new())
}

fn build_all_with_conductor(
    field: &Arc<QuadField>,
    ideal: &IntegralIdeal,
    pins: impl Fn(&PrimePlace, u32) -> Vec<(usize, u32)>,
) -> Result<Vec<HeckeCharacter>> {
    if ideal.is_unit_ideal() {
        return Ok(Vec::new());
    }
    let mut per_place: Vec<(PrimePlace, Vec<Vec<u32>>)> = Vec::new();
    for (v, m) in ideal.factors() {
        let group = ideals::local_unit_generators(field, v, m)?;
        let pinned = pins(v, m);
        let n = group.generators().len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut options = Vec::new();
        'combo: for mask in 0u32..(1 << n) {
            let values: Vec<u32> = (0..n).map(|i| (mask >> i) & 1).collect();
            for &(idx, want) in &pinned {
                if values[idx] != want {
                    continue 'combo;
                }
            }
            options.push(values);
        }
        per_place.push((v.clone(), options));
    }
    // Cartesian product over places.
    let mut assignments: Vec<BTreeMap<PrimePlace, Vec<u32>>> = vec![BTreeMap::new()];
    for (v, options) in &per_place {
        let mut next = Vec::with_capacity(assignments.len() * options.len());
        for base in &assignments {
            for opt in options {
                let mut a = base.clone();
                a.insert(v.clone(), opt.clone());
                next.push(a);
            }
        }
        assignments = next;
    }
    let mut out = Vec::new();
    for assignment in assignments {
        match build_character(field, ideal, &assignment, 2, None) {
            Ok(chi) => out.push(chi),
            Err(Error::ConstraintViolation(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// All admissible conductors of norm ≤ `norm_bound` (the unit ideal is
/// omitted), ascending by norm.
pub fn enumerate_admissible_conductors(
    field: &QuadField,
    norm_bound: u64,
) -> Result<Vec<AdmissibleConductor>> {
    let family = family_of(field)?;
    let mut prime_options: Vec<Vec<(PrimePlace, u32, u64)>> = Vec::new();
    for p in arith::primes_up_to(norm_bound) {
        let places = ideals::primes_above(field, p)?;
        let mut opts = Vec::new();
        if p == 2 {
            match places[0].kind() {
                SplitKind::Split => {
                    for m in [2u32, 3] {
                        if (1u64 << m) <= norm_bound {
                            opts.push((places[0].clone(), m, 1u64 << m));
                        }
                    }
                }
                SplitKind::Inert => {
                    if 16 <= norm_bound {
                        opts.push((places[0].clone(), 2, 16));
                    }
                }
                SplitKind::Ramified => {
                    let ms: &[u32] = match family {
                        Family::Gaussian => &[2, 5],
                        Family::ImaginaryGeneral => &[4, 5],
                        Family::Real => &[4],
                    };
                    for &m in ms {
                        if (1u64 << m) <= norm_bound {
                            opts.push((places[0].clone(), m, 1u64 << m));
                        }
                    }
                }
            }
        } else {
            match places[0].kind() {
                SplitKind::Split => opts.push((places[0].clone(), 1, p)),
                SplitKind::Ramified if family != Family::Real => {
                    opts.push((places[0].clone(), 1, p));
                }
                _ => {}
            }
        }
        if !opts.is_empty() {
            prime_options.push(opts);
        }
    }
    let mut out: Vec<(u64, IntegralIdeal)> = Vec::new();
    let mut stack: Vec<(usize, u64, Vec<(PrimePlace, u32)>)> = vec![(0, 1, Vec::new())];
    while let Some((i, norm, factors)) = stack.pop() {
        if i == prime_options.len() {
            if !factors.is_empty() {
                out.push((norm, IntegralIdeal::from_factors(field.d(), factors)?));
            }
            continue;
        }
        stack.push((i + 1, norm, factors.clone()));
        for (place, m, factor_norm) in &prime_options[i] {
            if norm.saturating_mul(*factor_norm) <= norm_bound {
                let mut f = factors.clone();
                f.push((place.clone(), *m));
                stack.push((i + 1, norm * factor_norm, f));
            }
        }
    }
    out.sort_by(|a, b| (a.0, format!("{}", a.1)).cmp(&(b.0, format!("{}", b.1))));
    Ok(out
        .into_iter()
        .map(|(_, ideal)| {
            let r = r_count(family, &ideal);
            AdmissibleConductor {
                field_d: field.d(),
                ideal,
                family,
                r_count: r,
            }
        })
        .collect())
}

/// Enumerate the classified quadratic characters of K with conductor norm
/// ≤ `norm_bound`: every admissible conductor passing the existence parity
/// is realized by construction, and every emitted character is verified not
/// to arise from base change.
pub fn enumerate_characters(
    field: &Arc<QuadField>,
    norm_bound: u64,
) -> Result<Vec<HeckeCharacter>> {
    let conductors = enumerate_admissible_conductors(field, norm_bound)?;
    let results: Vec<Result<Vec<HeckeCharacter>>> = conductors
        .par_iter()
        .map(|cond| {
            let chis = attempt_constructions(field, &cond.ideal)?;
            let should_exist = exists_character(field, &cond.ideal)?;
            if should_exist != !chis.is_empty() {
                return Err(Error::ConstraintViolation(format!(
                    "existence parity disagrees with construction at {}",
                    cond.ideal
                )));
            }
            for chi in &chis {
                if chi.conductor() != &cond.ideal {
                    return Err(Error::ConstraintViolation(format!(
                        "constructed character has conductor {} instead of {}",
                        chi.conductor(),
                        cond.ideal
                    )));
                }
                if chi.is_base_change()? {
                    return Err(Error::ConstraintViolation(format!(
                        "classified character with conductor {} is self-conjugate",
                        cond.ideal
                    )));
                }
            }
            Ok(chis)
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn field(d: i64) -> Arc<QuadField> {
        QuadField::new(d).unwrap()
    }

    fn place(field: &Arc<QuadField>, p: u64, label: u8) -> PrimePlace {
        ideals::primes_above(field, p)
            .unwrap()
            .into_iter()
            .find(|v| v.label() == label)
            .unwrap()
    }

    #[test]
    fn families() {
        assert_eq!(family_of(&field(-1)).unwrap(), Family::Gaussian);
        assert_eq!(family_of(&field(-2)).unwrap(), Family::ImaginaryGeneral);
        assert_eq!(family_of(&field(-7)).unwrap(), Family::ImaginaryGeneral);
        assert_eq!(family_of(&field(-3)).unwrap(), Family::ImaginaryGeneral);
        assert_eq!(family_of(&field(2)).unwrap(), Family::Real);
        assert_eq!(family_of(&field(13)).unwrap(), Family::Real);
        assert!(family_of(&field(-5)).is_err());
        assert!(family_of(&field(10)).is_err());
    }

    #[test]
    fn admissibility_examples() {
        // ℚ(√−7), 𝔣 = v₃: 3 is inert ((−7/3) = −1), clause (A)i.
        let k7 = field(-7);
        let v3 = place(&k7, 3, 1);
        assert_eq!(v3.kind(), SplitKind::Inert);
        let rep = is_admissible(&k7, &IntegralIdeal::from_place(&v3, 1)).unwrap();
        assert!(!rep.admissible);
        assert_eq!(rep.violated, Some(Clause::A));
        assert_eq!(rep.to_string(), "violates clause (A)i");

        // ℚ(i), 𝔣 = v₂⁵ is admissible; v₂³ is not (m ∈ {2, 5} only).
        let ki = field(-1);
        let v2 = place(&ki, 2, 1);
        assert!(is_admissible(&ki, &IntegralIdeal::from_place(&v2, 5))
            .unwrap()
            .admissible);
        let rep = is_admissible(&ki, &IntegralIdeal::from_place(&v2, 3)).unwrap();
        assert_eq!(rep.violated, Some(Clause::D));
        assert_eq!(rep.violated.unwrap().notation(Family::Gaussian), "(D)i'");

        // Empty conductor is trivially admissible.
        assert!(is_admissible(&ki, &IntegralIdeal::unit_ideal(-1))
            .unwrap()
            .admissible);

        // Label-2 split places violate (C).
        let v11b = place(&k7, 11, 2);
        let rep = is_admissible(&k7, &IntegralIdeal::from_place(&v11b, 1)).unwrap();
        assert_eq!(rep.violated, Some(Clause::C));
    }

    #[test]
    fn existence_parity_imaginary() {
        let k7 = field(-7);
        // 11 splits in ℚ(√−7) and 11 ≡ 3 mod 4: r = 1, no place over 2.
        let v11 = place(&k7, 11, 1);
        let f = IntegralIdeal::from_place(&v11, 1);
        assert!(!exists_character(&k7, &f).unwrap());
        assert!(attempt_constructions(&k7, &f).unwrap().is_empty());

        // v₁₁·v₂₃ has r = 2: a character exists.
        let v23 = place(&k7, 23, 1);
        let f2 = f.mul(&IntegralIdeal::from_place(&v23, 1)).unwrap();
        assert!(exists_character(&k7, &f2).unwrap());
        let chis = attempt_constructions(&k7, &f2).unwrap();
        assert_eq!(chis.len(), 1);
        assert_eq!(chis[0].conductor(), &f2);
        assert!(!chis[0].is_base_change().unwrap());
    }

    #[test]
    fn existence_always_for_real_family() {
        for d in [2i64, 5, 13] {
            let k = field(d);
            for cond in enumerate_admissible_conductors(&k, 100).unwrap() {
                assert!(
                    exists_character(&k, &cond.ideal).unwrap(),
                    "d = {d}, f = {}",
                    cond.ideal
                );
            }
        }
    }

    #[test]
    fn gaussian_enumeration_includes_seventeen() {
        // Norm ≤ 50 over ℚ(i) includes 𝔣 = v₁₇ (17 ≡ 1 mod 8, r-count 0).
        let ki = field(-1);
        let chis = enumerate_characters(&ki, 50).unwrap();
        assert!(chis
            .iter()
            .any(|c| c.conductor().norm() == BigInt::from(17)));
        // Nothing of conductor norm ≤ 1.
        assert!(enumerate_characters(&ki, 1).unwrap().is_empty());
        // 13 ≡ 5 mod 8 splits with r-count 1: no character with 𝔣 = v₁₃.
        assert!(!chis
            .iter()
            .any(|c| c.conductor().norm() == BigInt::from(13)));
        // But v₂²·v₁₃ (norm 52) exists: m = 2 at the ramified 2 wants r odd.
        let v2 = place(&ki, 2, 1);
        let v13 = place(&ki, 13, 1);
        let f = IntegralIdeal::from_factors(-1, [(v2, 2), (v13, 1)]).unwrap();
        assert!(exists_character(&ki, &f).unwrap());
        assert_eq!(attempt_constructions(&ki, &f).unwrap().len(), 1);
    }

    #[test]
    fn real_split_two_cube_gives_both_characters() {
        // ℚ(√17): 2 splits; conductor v₂³ leaves χ_v(−1) free, so both
        // characters are classified.
        let k = field(17);
        let v2 = place(&k, 2, 1);
        let f = IntegralIdeal::from_place(&v2, 3);
        let chis = attempt_constructions(&k, &f).unwrap();
        assert_eq!(chis.len(), 2);
        for chi in &chis {
            assert_eq!(chi.conductor(), &f);
            assert!(!chi.is_base_change().unwrap());
        }
        // The two differ exactly in infinity type.
        assert_ne!(chis[0].infinity_type(), chis[1].infinity_type());
    }

    #[test]
    fn imaginary_two_adic_parity_conductors() {
        // ℚ(√−2): v₂⁴ alone fails parity (r = 0), v₂⁵ succeeds.
        let k = field(-2);
        let v2 = place(&k, 2, 1);
        let f4 = IntegralIdeal::from_place(&v2, 4);
        assert!(!exists_character(&k, &f4).unwrap());
        assert!(attempt_constructions(&k, &f4).unwrap().is_empty());
        let f5 = IntegralIdeal::from_place(&v2, 5);
        assert!(exists_character(&k, &f5).unwrap());
        let chis = attempt_constructions(&k, &f5).unwrap();
        assert_eq!(chis.len(), 1);
        assert!(!chis[0].is_base_change().unwrap());
    }

    #[test]
    fn enumerated_characters_distinct_mod_base_change() {
        // Products of distinct classified characters are never base change.
        let k = field(-7);
        let chis = enumerate_characters(&k, 60).unwrap();
        assert!(chis.len() >= 2);
        for i in 0..chis.len() {
            for j in i + 1..chis.len() {
                let prod = chis[i].product(&chis[j]).unwrap();
                assert!(
                    !prod.is_base_change().unwrap(),
                    "{} and {} differ by base change",
                    chis[i],
                    chis[j]
                );
            }
        }
    }
}
