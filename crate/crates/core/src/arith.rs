//! Elementary integer arithmetic: Kronecker symbols, primality, square roots
//! and primitive roots modulo p, factorization, and small sieves.
//!
//! Everything here is exact. Inputs are desk-scale (primes up to ~10⁷,
//! discriminants up to ~10⁶), so trial division and deterministic
//! Miller–Rabin are the right tools.

/// Kronecker symbol (a/b), extending the Jacobi symbol to all integers.
///
/// Follows the binary reduction used by PARI: strip powers of two with the
/// (a/2) table, then alternate reciprocity flips with remainder steps. The
/// `a & b & 2` test implements the sign rule for negative entries as well.
pub fn kronecker(mut a: i64, mut b: i64) -> i32 {
    // (a/2) as a function of a mod 8; zero entries are unused for odd a.
    const TAB2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    if b == 0 {
        return i32::from(a.abs() == 1);
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let v = b.trailing_zeros();
    b >>= v;
    let mut s: i32 = if v % 2 == 0 {
        1
    } else {
        TAB2[(a.rem_euclid(8)) as usize]
    };
    if b < 0 {
        b = -b;
        if a < 0 {
            s = -s;
        }
    }
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            s *= TAB2[(b % 8) as usize];
        }
        if a & b & 2 != 0 {
            s = -s;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
    if b == 1 {
        s
    } else {
        0
    }
}

/// b^e mod m with 128-bit intermediates; m must be nonzero.
pub fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut base = (b % m) as u128;
    let mut acc: u128 = 1;
    let m = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u64
}

/// Inverse of a mod m (m > 1), if gcd(a, m) = 1.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller–Rabin for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Square root of a mod odd prime p by Tonelli–Shanks; `None` for
/// non-residues. Returns the smaller of the two roots.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    // p ≡ 3 mod 4 shortcut.
    if p % 4 == 3 {
        let r = mod_pow(a, (p + 1) / 4, p);
        return Some(r.min(p - r));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    // Any quadratic non-residue serves as the Tonelli generator.
    let mut z = 2;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = ((t2 as u128 * t2 as u128) % p as u128) as u64;
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        let b2 = ((b as u128 * b as u128) % p as u128) as u64;
        r = ((r as u128 * b as u128) % p as u128) as u64;
        t = ((t as u128 * b2 as u128) % p as u128) as u64;
        c = b2;
        m = i;
    }
    Some(r.min(p - r))
}

/// Prime factorization of n by trial division, as (prime, exponent) pairs in
/// increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, e: u32| {
        if e > 0 {
            out.push((p, e));
        }
    };
    let mut e = 0;
    while n % 2 == 0 {
        n /= 2;
        e += 1;
    }
    push(2, e);
    let mut p = 3;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        push(p, e);
        p += 2;
    }
    push(n, u32::from(n > 1));
    out
}

/// True when n is squarefree (n ≠ 0).
pub fn is_squarefree(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    factor(n.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

/// Squarefree kernel of n, with the sign of n.
pub fn squarefree_part(n: i64) -> i64 {
    let mut k: i64 = n.signum();
    for (p, e) in factor(n.unsigned_abs()) {
        if e % 2 == 1 {
            k *= p as i64;
        }
    }
    k
}

/// Primes up to and including n, by sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2;
    while p * p <= n {
        if sieve[p] {
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i as u64))
        .collect()
}

/// Smallest-prime-factor table for 0..=n (spf[0] = spf[1] = 0).
pub fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// A generator of (ℤ/pℤ)^× for prime p.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fac = factor(p - 1);
    'cand: for g in 2..p {
        for &(q, _) in &fac {
            if mod_pow(g, (p - 1) / q, p) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("no primitive root found for prime {p}")
}

/// The fundamental discriminant attached to a nonzero integer n: the
/// discriminant of ℚ(√n). Returns 1 for square n.
pub fn fundamental_discriminant(n: i64) -> i64 {
    let d = squarefree_part(n);
    if d == 1 {
        return 1;
    }
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

/// True when D is a fundamental discriminant (including D = 1).
pub fn is_fundamental_discriminant(d: i64) -> bool {
    d != 0 && fundamental_discriminant(d) == d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_by_euler(a: i64, p: u64) -> i32 {
        let a = a.rem_euclid(p as i64) as u64;
        if a == 0 {
            return 0;
        }
        match mod_pow(a, (p - 1) / 2, p) {
            1 => 1,
            x if x == p - 1 => -1,
            _ => panic!("p not prime"),
        }
    }

    #[test]
    fn kronecker_matches_euler_criterion_at_odd_primes() {
        for &p in &[3u64, 5, 7, 11, 13, 17, 29, 41, 97, 229] {
            for a in -50i64..50 {
                assert_eq!(
                    kronecker(a, p as i64),
                    legendre_by_euler(a, p),
                    "({a}/{p})"
                );
            }
        }
    }

    #[test]
    fn kronecker_at_two_and_signs() {
        // (a/2) = 0, ±1 by a mod 8.
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(17, 2), 1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(4, 2), 0);
        // (-1/b) = ±1 by b mod 4.
        assert_eq!(kronecker(-1, 5), 1);
        assert_eq!(kronecker(-1, 7), -1);
        // Multiplicativity spot checks.
        assert_eq!(kronecker(-7, 3), kronecker(-7, 3));
        assert_eq!(kronecker(45, 7), kronecker(9, 7) * kronecker(5, 7));
    }

    #[test]
    fn kronecker_of_discriminants_gives_splitting() {
        // (disc/p) for disc = -4: split iff p ≡ 1 mod 4.
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-4, 7), -1);
        assert_eq!(kronecker(-4, 2), 0);
        // disc = 5: split iff p ≡ ±1 mod 5.
        assert_eq!(kronecker(5, 11), 1);
        assert_eq!(kronecker(5, 29), 1);
        assert_eq!(kronecker(5, 3), -1);
        assert_eq!(kronecker(5, 2), -1);
        // disc = -7 at 2: -7 ≡ 1 mod 8, so 2 splits.
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-11, 2), -1);
    }

    #[test]
    fn prime_tests_and_factorization() {
        assert!(is_prime(2));
        assert!(is_prime(97));
        assert!(is_prime(229));
        assert!(!is_prime(1));
        assert!(!is_prime(91));
        assert_eq!(factor(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factor(97), vec![(97, 1)]);
        assert!(is_squarefree(-229));
        assert!(!is_squarefree(12));
        assert_eq!(squarefree_part(-12), -3);
    }

    #[test]
    fn sqrt_mod_prime_roundtrip() {
        for &p in &[3u64, 13, 17, 29, 41, 97, 10007] {
            for a in 1..p.min(60) {
                match sqrt_mod_prime(a, p) {
                    Some(r) => assert_eq!(r * r % p, a % p),
                    None => assert_eq!(mod_pow(a, (p - 1) / 2, p), p - 1),
                }
            }
        }
    }

    #[test]
    fn primitive_roots_generate() {
        for &p in &[3u64, 5, 7, 29, 41] {
            let g = primitive_root(p);
            let mut seen = std::collections::HashSet::new();
            let mut x = 1;
            for _ in 0..p - 1 {
                x = x * g % p;
                seen.insert(x);
            }
            assert_eq!(seen.len() as u64, p - 1);
        }
    }

    #[test]
    fn fundamental_discriminants() {
        assert_eq!(fundamental_discriminant(-1), -4);
        assert_eq!(fundamental_discriminant(5), 5);
        assert_eq!(fundamental_discriminant(2), 8);
        assert_eq!(fundamental_discriminant(-2), -8);
        assert_eq!(fundamental_discriminant(-7), -7);
        assert_eq!(fundamental_discriminant(12), 12); // 12 = 4·3
        assert!(is_fundamental_discriminant(-4));
        assert!(is_fundamental_discriminant(8));
        assert!(!is_fundamental_discriminant(-2));
    }
}
