//! L-function data for quadratic Hecke characters: local Euler factors,
//! Dirichlet coefficient tables, the ideal-sum oracle, and descriptors of
//! the induced dihedral GL(2)-forms.
//!
//! For quadratic χ the Dirichlet coefficients of L(s, χ, K) are plain
//! integers. Two independent pipelines produce them:
//!
//! - [`dirichlet_coeffs`] expands the Euler product: each prime contributes
//!   a degree ≤ 2 denominator polynomial, prime-power coefficients follow
//!   the linear recurrence, and a smallest-prime-factor sieve assembles the
//!   multiplicative table in O(N log log N);
//! - [`ideal_sum_oracle`] sums χ(𝔞) directly over all integral ideals of
//!   each norm n ≤ N coprime to the conductor, looping over factorization
//!   patterns.
//!
//! Entrywise agreement of the two tables is the module's correctness
//! anchor.
//!
//! The induced representation has level |d_K|·N(𝔣); it is odd (holomorphic
//! weight-one form) when the two archimedean components differ — always the
//! case over imaginary K — and even with ρ(c) = ±Id otherwise, the sign
//! deciding between a cosine and a sine expansion of the Maass form. The
//! nebentypus is the determinant character, identified exactly by sampling
//! δ_K(p)·χ((p)) and fitting the unique Kronecker symbol pattern.

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::characters::HeckeCharacter;
use crate::error::{Error, Result};
use crate::ideals::{self, IntegralIdeal, SplitKind};

/// How a coefficient table was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffMethod {
    EulerProduct,
    IdealSum,
}

/// Dirichlet coefficients a(1..=N) of L(s, χ, K), exact integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTable {
    n_max: usize,
    /// a[n] for 1 ≤ n ≤ n_max; a[0] is unused.
    a: Vec<i64>,
    method: CoeffMethod,
}

impl CoeffTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn method(&self) -> CoeffMethod {
        self.method
    }

    pub fn get(&self, n: usize) -> i64 {
        self.a[n]
    }

    /// All coefficients a(1..=N) in order.
    pub fn coeffs(&self) -> &[i64] {
        &self.a[1..]
    }

    /// First n where the tables differ, if any (compares up to the shorter).
    pub fn first_mismatch(&self, other: &CoeffTable) -> Option<usize> {
        let n = self.n_max.min(other.n_max);
        (1..=n).find(|&i| self.a[i] != other.a[i])
    }

    /// CSV rows "n,a_n" with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.n_max * 8);
        s.push_str("n,a_n\n");
        for n in 1..=self.n_max {
            let _ = writeln!(s, "{},{}", n, self.a[n]);
        }
        s
    }
}

/// Denominator polynomial [1, c₁, c₂] of the local Euler factor at p:
/// L_p(s, χ) = 1/(1 + c₁ p^{−s} + c₂ p^{−2s}). Places dividing the
/// conductor contribute the factor 1.
pub fn local_factor(chi: &HeckeCharacter, p: u64) -> Result<[i64; 3]> {
    if chi.order() > 2 {
        return Err(Error::Unsupported(
            "integer coefficient tables require a quadratic (or trivial) character".into(),
        ));
    }
    let places = ideals::primes_above(chi.field(), p)?;
    let mut poly = [1i64, 0, 0];
    for v in &places {
        if chi.conductor().exponent_at(v) > 0 {
            continue;
        }
        let value = chi.unramified_value(v)?;
        let sign = value.sign().expect("quadratic character values are real") as i64;
        // Multiply poly by (1 − sign·X^f).
        let f = v.residue_degree() as usize;
        let mut next = poly;
        for (i, c) in poly.iter().enumerate() {
            if i + f <= 2 {
                next[i + f] -= sign * c;
            } else {
                debug_assert_eq!(*c, 0, "local factor degree exceeds 2");
            }
        }
        poly = next;
    }
    Ok(poly)
}

/// Dirichlet coefficients a(n) for n ≤ N by multiplicative assembly from
/// the local Euler factors.
pub fn dirichlet_coeffs(chi: &HeckeCharacter, n_max: usize) -> Result<CoeffTable> {
    if n_max < 1 {
        return Err(Error::Unsupported("coefficient bound must be ≥ 1".into()));
    }
    let primes = arith::primes_up_to(n_max as u64);
    // Local factors in parallel (evaluation caches fill behind a mutex).
    let factors: Vec<(u64, [i64; 3])> = primes
        .par_iter()
        .map(|&p| local_factor(chi, p).map(|f| (p, f)))
        .collect::<Result<_>>()?;
    let mut a = vec![0i64; n_max + 1];
    a[1] = 1;
    // Prime powers from the recurrence a(p^k) = −c₁a(p^{k−1}) − c₂a(p^{k−2}).
    for (p, [_, c1, c2]) in &factors {
        let p = *p as usize;
        let mut prev2 = 0i64; // a(p^{k-2})
        let mut prev1 = 1i64; // a(p^{k-1})
        let mut pk = p;
        while pk <= n_max {
            let cur = -c1 * prev1 - c2 * prev2;
            a[pk] = cur;
            prev2 = prev1;
            prev1 = cur;
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
        }
    }
    // Multiplicative assembly over the smallest-prime-factor sieve.
    let spf = arith::spf_table(n_max);
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let mut pk = p;
        let mut rest = n / p;
        while rest % p == 0 {
            pk *= p;
            rest /= p;
        }
        if rest > 1 {
            a[n] = a[pk] * a[rest];
        }
    }
    Ok(CoeffTable {
        n_max,
        a,
        method: CoeffMethod::EulerProduct,
    })
}

/// a(n) = Σ_{N(𝔞)=n, gcd(𝔞,𝔣)=1} χ(𝔞) by direct enumeration of the ideals
/// of each norm, independent of the Euler-product expansion.
pub fn ideal_sum_oracle(chi: &HeckeCharacter, n_max: usize) -> Result<CoeffTable> {
    if n_max < 1 {
        return Err(Error::Unsupported("coefficient bound must be ≥ 1".into()));
    }
    if chi.order() > 2 {
        return Err(Error::Unsupported(
            "integer coefficient tables require a quadratic (or trivial) character".into(),
        ));
    }
    let primes = arith::primes_up_to(n_max as u64);
    // s_p[k] = Σ over ideals 𝔞 of norm p^k supported over p, coprime to 𝔣.
    let sums: Vec<(u64, Vec<i64>)> = primes
        .par_iter()
        .map(|&p| prime_power_ideal_sums(chi, p, n_max).map(|s| (p, s)))
        .collect::<Result<_>>()?;
    let mut a = vec![0i64; n_max + 1];
    a[1] = 1;
    let spf = arith::spf_table(n_max);
    let sums: std::collections::HashMap<u64, Vec<i64>> = sums.into_iter().collect();
    for n in 2..=n_max {
        let p = spf[n] as usize;
        let mut k = 0usize;
        let mut rest = n;
        while rest % p == 0 {
            k += 1;
            rest /= p;
        }
        let local = sums[&(p as u64)][k];
        a[n] = if rest > 1 { local * a[rest] } else { local };
    }
    Ok(CoeffTable {
        n_max,
        a,
        method: CoeffMethod::IdealSum,
    })
}

/// The sums s_p(k) for p^k ≤ n_max, enumerating ideals of norm p^k.
fn prime_power_ideal_sums(chi: &HeckeCharacter, p: u64, n_max: usize) -> Result<Vec<i64>> {
    let mut k_max = 0usize;
    let mut pk = 1u64;
    while pk <= n_max as u64 / p {
        pk *= p;
        k_max += 1;
    }
    let places = ideals::primes_above(chi.field(), p)?;
    let mut values: Vec<Option<i64>> = Vec::new(); // χ(v), None when v | 𝔣
    for v in &places {
        if chi.conductor().exponent_at(v) > 0 {
            values.push(None);
        } else {
            let value = chi.unramified_value(v)?;
            values.push(Some(value.sign().expect("quadratic values are real") as i64));
        }
    }
    let mut out = vec![0i64; k_max + 1];
    out[0] = 1;
    for (k, entry) in out.iter_mut().enumerate().skip(1) {
        let mut sum = 0i64;
        match places[0].kind() {
            SplitKind::Split => {
                // Ideals v^i (v^c)^j with i + j·1 = k weighted by values.
                for i in 0..=k {
                    let j = k - i;
                    let a = match values[0] {
                        Some(s) => {
                            if i == 0 {
                                1
                            } else {
                                s.pow(i as u32)
                            }
                        }
                        None if i > 0 => continue,
                        None => 1,
                    };
                    let b = match values[1] {
                        Some(s) => {
                            if j == 0 {
                                1
                            } else {
                                s.pow(j as u32)
                            }
                        }
                        None if j > 0 => continue,
                        None => 1,
                    };
                    sum += a * b;
                }
            }
            SplitKind::Inert => {
                // Only v^{k/2} has norm p^k, for even k.
                if k % 2 == 0 {
                    if let Some(s) = values[0] {
                        sum = s.pow((k / 2) as u32);
                    }
                }
            }
            SplitKind::Ramified => {
                if let Some(s) = values[0] {
                    sum = s.pow(k as u32);
                }
            }
        }
        *entry = sum;
    }
    Ok(out)
}

/// Kind of modular form attached to the induced dihedral representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    HolomorphicWeightOne,
    MaassEvenCos,
    MaassEvenSin,
}

/// Exact metadata of the newform g_χ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormDescriptor {
    /// |d_K|·N(𝔣).
    pub level: u64,
    /// Fundamental discriminant of the determinant (nebentypus) character.
    pub nebentypus: i64,
    pub kind: FormKind,
}

/// Whether the induced representation is odd (eigenvalues ±1 at complex
/// conjugation) or even (ρ(c) = ±Id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
}

/// Parity of the induced representation: odd over imaginary K (complex
/// conjugation acts off the index-two subgroup with square 1), odd over
/// real K exactly when the two archimedean components differ.
pub fn induced_parity(chi: &HeckeCharacter) -> Parity {
    if !chi.field().is_real() {
        return Parity::Odd;
    }
    let inf = chi.infinity_type();
    if inf[0] != inf[1] {
        Parity::Odd
    } else {
        Parity::Even
    }
}

/// The descriptor of g_χ: level, nebentypus discriminant, and form kind.
/// Requires χ quadratic and not self-conjugate.
pub fn induced_descriptor(chi: &HeckeCharacter) -> Result<FormDescriptor> {
    if chi.order() != 2 {
        return Err(Error::Unsupported(
            "form descriptors are computed for quadratic characters".into(),
        ));
    }
    if chi.is_base_change()? {
        return Err(Error::Unsupported(
            "self-conjugate characters induce reducible representations".into(),
        ));
    }
    let level_big = chi.conductor().norm() * chi.field().disc().unsigned_abs();
    let level = level_big
        .to_u64()
        .ok_or_else(|| Error::ResourceBound("level exceeds u64".into()))?;
    let kind = match induced_parity(chi) {
        Parity::Odd => FormKind::HolomorphicWeightOne,
        Parity::Even => {
            // ρ(c) = +Id iff both archimedean components are trivial,
            // equivalently ξ(ε_K) = +1.
            if chi.infinity_type()[0] > 0 {
                FormKind::MaassEvenCos
            } else {
                FormKind::MaassEvenSin
            }
        }
    };
    let nebentypus = determinant_discriminant(chi, level)?;
    Ok(FormDescriptor {
        level,
        nebentypus,
        kind,
    })
}

/// The determinant of the induced representation as a Dirichlet character:
/// det ρ(Frob_p) = δ_K(p)·χ((p)). Samples enough primes to pin a unique
/// fundamental discriminant; raises on ambiguity rather than guessing.
fn determinant_discriminant(chi: &HeckeCharacter, level: u64) -> Result<i64> {
    let field = chi.field();
    let cond_norm = chi
        .conductor()
        .norm()
        .to_u64()
        .ok_or_else(|| Error::ResourceBound("conductor norm exceeds u64".into()))?;
    let mut samples: Vec<(u64, i8)> = Vec::new();
    for bound in [200u64, 2000] {
        for p in arith::primes_up_to(bound) {
            if samples.iter().any(|&(q, _)| q == p) {
                continue;
            }
            if field.disc().unsigned_abs() % p == 0 || cond_norm % p == 0 {
                continue;
            }
            let full = ideals::factor_principal(field, &field.elem(p as i64, 0))?;
            let chi_p = chi.eval_ideal(&full)?.sign().expect("quadratic values");
            let delta_k = arith::kronecker(field.disc(), p as i64) as i8;
            samples.push((p, delta_k * chi_p));
        }
        let candidates = matching_fundamental_discriminants(&samples, level as i64);
        match candidates.len() {
            1 => return Ok(candidates[0]),
            0 => {
                return Err(Error::NoMatch(
                    "no fundamental discriminant matches the determinant samples".into(),
                ))
            }
            _ => continue,
        }
    }
    Err(Error::Ambiguous(
        "several fundamental discriminants match the determinant samples".into(),
    ))
}

/// All fundamental discriminants D with |D| ≤ `abs_bound` whose Kronecker
/// pattern matches every (p, sign) sample.
pub fn matching_fundamental_discriminants(samples: &[(u64, i8)], abs_bound: i64) -> Vec<i64> {
    let mut out = Vec::new();
    for abs in 1..=abs_bound {
        for d in [abs, -abs] {
            if d == 1 && abs != 1 {
                continue;
            }
            if !arith::is_fundamental_discriminant(d) {
                continue;
            }
            if samples
                .iter()
                .all(|&(p, s)| arith::kronecker(d, p as i64) == s as i32)
            {
                out.push(d);
            }
            if abs == 1 {
                break; // D = −1 is not fundamental; only D = 1
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::build_character;
    use crate::ideals::PrimePlace;
    use crate::quadfield::QuadField;
    use std::collections::BTreeMap;
    use std::sync::Arc;

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

    fn odd_place_character(field: &Arc<QuadField>, p: u64) -> HeckeCharacter {
        let v = place(field, p, 1);
        let conductor = IntegralIdeal::from_place(&v, 1);
        let mut vals = BTreeMap::new();
        vals.insert(v, vec![1u32]);
        build_character(field, &conductor, &vals, 2, None).unwrap()
    }

    #[test]
    fn local_factor_shapes() {
        // §-family over ℚ(i) with q = 17.
        let k = field(-1);
        let chi = odd_place_character(&k, 17);
        // p ≡ 3 mod 4 inert: factor 1 − (q/p)X².
        for p in [3u64, 7, 11, 19] {
            let f = local_factor(&chi, p).unwrap();
            let s = arith::kronecker(17, p as i64) as i64;
            assert_eq!(f, [1, 0, -s], "p = {p}");
        }
        // p = 2 ramified in ℚ(i), not dividing 𝔣: a linear factor.
        let f2 = local_factor(&chi, 2).unwrap();
        assert_eq!(f2[2], 0);
        assert_eq!(f2[1].abs(), 1);
        // p = q: place Q divides 𝔣, only Q^c contributes: linear factor.
        let f17 = local_factor(&chi, 17).unwrap();
        assert_eq!(f17[2], 0);
        assert_eq!(f17[1].abs(), 1);
    }

    #[test]
    fn coefficients_basic_properties() {
        let k = field(-1);
        let chi = odd_place_character(&k, 17);
        let table = dirichlet_coeffs(&chi, 500).unwrap();
        assert_eq!(table.get(1), 1);
        // a(p) = 0 at inert p not dividing the level.
        for p in [3usize, 7, 11, 19, 23] {
            assert_eq!(table.get(p), 0, "p = {p}");
        }
        // Multiplicativity on coprime pairs.
        for (m, n) in [(2usize, 9), (4, 25), (5, 13), (8, 49)] {
            if m * n <= 500 {
                assert_eq!(table.get(m * n), table.get(m) * table.get(n));
            }
        }
        // Divisor bound.
        for n in 1..=500usize {
            let d_n = (1..=n).filter(|k| n % k == 0).count() as i64;
            assert!(table.get(n).abs() <= d_n);
        }
    }

    #[test]
    fn oracle_agrees_with_euler_product() {
        // The anchor identity on the (5, 29) Maass character.
        let k = field(5);
        let chi = odd_place_character(&k, 29);
        let euler = dirichlet_coeffs(&chi, 2000).unwrap();
        let oracle = ideal_sum_oracle(&chi, 2000).unwrap();
        assert_eq!(euler.first_mismatch(&oracle), None);
        assert_eq!(euler.method(), CoeffMethod::EulerProduct);
        assert_eq!(oracle.method(), CoeffMethod::IdealSum);
    }

    #[test]
    fn oracle_zero_when_no_ideals_of_that_norm() {
        let k = field(5);
        let chi = odd_place_character(&k, 29);
        let oracle = ideal_sum_oracle(&chi, 200).unwrap();
        // 3 is inert in ℚ(√5): no ideals of norm 3.
        assert_eq!(oracle.get(3), 0);
        assert_eq!(oracle.get(7), 0);
        // Norm 9 has the single ideal (3): a(9) = χ((3)) = ±1.
        assert_eq!(oracle.get(9).abs(), 1);
    }

    #[test]
    fn hecke_relation_at_good_primes() {
        // a(p²) = a(p)² − ψ(p), with ψ(p) = c₂ of the local factor.
        let k = field(-1);
        let chi = odd_place_character(&k, 17);
        let table = dirichlet_coeffs(&chi, 10_000).unwrap();
        for p in [3usize, 5, 7, 13, 29, 41, 97] {
            let f = local_factor(&chi, p as u64).unwrap();
            assert_eq!(
                table.get(p * p),
                table.get(p) * table.get(p) - f[2],
                "p = {p}"
            );
        }
    }

    #[test]
    fn descriptors_for_paper_families() {
        // ℚ(i), q = 17: level 4·17 = 68, holomorphic, nebentypus −68.
        let ki = field(-1);
        let chi = odd_place_character(&ki, 17);
        let desc = induced_descriptor(&chi).unwrap();
        assert_eq!(desc.level, 68);
        assert_eq!(desc.kind, FormKind::HolomorphicWeightOne);
        assert_eq!(desc.nebentypus, -68);

        // ℚ(√5), q = 29: level 145, Maass cos, nebentypus 145.
        let k5 = field(5);
        let chi29 = odd_place_character(&k5, 29);
        let desc = induced_descriptor(&chi29).unwrap();
        assert_eq!(desc.level, 145);
        assert_eq!(desc.kind, FormKind::MaassEvenCos);
        assert_eq!(desc.nebentypus, 145);

        // ℚ(√5), q = 41: Maass sin.
        let chi41 = odd_place_character(&k5, 41);
        let desc = induced_descriptor(&chi41).unwrap();
        assert_eq!(desc.level, 205);
        assert_eq!(desc.kind, FormKind::MaassEvenSin);
        assert_eq!(desc.nebentypus, 205);
    }

    #[test]
    fn csv_output_shape() {
        let k = field(5);
        let chi = odd_place_character(&k, 29);
        let table = dirichlet_coeffs(&chi, 5).unwrap();
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,a_n");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1], "1,1");
    }
}
