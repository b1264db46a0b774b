//! Exact integer kernel: valuations, residue symbols, squarefree parts, the
//! sign convention for square roots, primality, and the k-range bound f(n).
//!
//! Everything here is exact big-integer arithmetic; nothing rounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Int = BigInt;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum IntError {
    #[error("valuation of 0 is infinite")]
    ZeroValuation,
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("primality test not certified for n >= 2^64 (got {0})")]
    OutOfCertifiedRange(String),
    #[error("{0} is not coprime to {1}")]
    NotCoprime(String, String),
    #[error("expected nonzero input")]
    ZeroInput,
    #[error("expected n >= {1}, got {0}")]
    TooSmall(String, u32),
}

pub type Result<T> = std::result::Result<T, IntError>;

fn mulmod_u128(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u128(acc, base, m);
        }
        base = mulmod_u128(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Strong probable prime test to base `a`.
fn sprp_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    let mut x = powmod_u64(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mulmod_u128(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

// Witness set making Miller-Rabin deterministic for all n < 3.3e24 > 2^64.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality for 0 <= n < 2^64.
pub fn is_prime_u64(n: u64) -> bool {
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
    MR_WITNESSES.iter().all(|&a| sprp_u64(n, a))
}

/// Deterministic primality verdict, certified for all n below 2^64.
///
/// Larger inputs are rejected rather than answered heuristically.
pub fn is_prime(n: &Int) -> Result<bool> {
    if n.is_negative() {
        return Ok(false);
    }
    match u64::try_from(n) {
        Ok(v) => Ok(is_prime_u64(v)),
        Err(_) => Err(IntError::OutOfCertifiedRange(n.to_string())),
    }
}

/// p-adic valuation: the largest e with p^e | n. Rejects n = 0.
pub fn vp(n: &Int, p: &Int) -> Result<u64> {
    if n.is_zero() {
        return Err(IntError::ZeroValuation);
    }
    if !is_prime(p).unwrap_or(false) {
        return Err(IntError::NotPrime(p.to_string()));
    }
    let mut e = 0u64;
    let mut m = n.abs();
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return Ok(e);
        }
        e += 1;
        m = q;
    }
}

const TRIAL_BOUND: u64 = 1_000_000;

/// Pollard-Brent rho; returns a nontrivial factor of odd composite n.
fn pollard_brent(n: &Int) -> Int {
    let one: Int = One::one();
    for seed in 2u64.. {
        let mut x: Int = Int::from(seed);
        let mut y = x.clone();
        let c: Int = Int::from(seed | 1);
        let mut d: Int = one.clone();
        while d.is_one() {
            x = (&x * &x + &c) % n;
            y = (&y * &y + &c) % n;
            y = (&y * &y + &c) % n;
            let diff = (&x - &y).abs();
            if diff.is_zero() {
                break; // cycle without factor, reseed
            }
            d = diff.gcd(n);
        }
        if !d.is_one() && &d != n {
            return d;
        }
    }
    unreachable!()
}

/// Probable-prime check used only inside factor(); certified below 2^64.
fn looks_prime(n: &Int) -> bool {
    match is_prime(n) {
        Ok(v) => v,
        // beyond the certified range: strong probable prime to the fixed witnesses
        Err(_) => {
            let nm1 = n - 1;
            let s = vp(&nm1, &Int::from(2)).unwrap_or(0);
            let d = &nm1 >> s;
            let two: Int = Int::from(2);
            MR_WITNESSES.iter().all(|&a| {
                let a = Int::from(a);
                let mut x = a.modpow(&d, n);
                if x.is_one() || x == nm1 {
                    return true;
                }
                for _ in 1..s {
                    x = x.modpow(&two, n);
                    if x == nm1 {
                        return true;
                    }
                }
                false
            })
        }
    }
}

/// Prime factorization of |n| as ascending (prime, exponent) pairs.
///
/// Trial division up to 10^6, then Pollard-Brent on what remains. Inputs in
/// this artifact have tiny factors, so the fallback is rarely exercised.
pub fn factor(n: &Int) -> Result<Vec<(Int, u32)>> {
    if n.is_zero() {
        return Err(IntError::ZeroInput);
    }
    let mut m = n.abs();
    let mut out: Vec<(Int, u32)> = Vec::new();
    let push = |p: Int, e: u32, out: &mut Vec<(Int, u32)>| {
        if e > 0 {
            out.push((p, e));
        }
    };
    for p in std::iter::once(2u64).chain((3..=TRIAL_BOUND).step_by(2)) {
        if m.is_one() {
            break;
        }
        let pb = Int::from(p);
        if (&pb * &pb) > m {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            m = q;
            e += 1;
        }
        push(pb, e, &mut out);
    }
    if !m.is_one() {
        let mut stack = vec![m];
        let mut found: Vec<Int> = Vec::new();
        while let Some(c) = stack.pop() {
            if looks_prime(&c) {
                found.push(c);
            } else {
                let d = pollard_brent(&c);
                stack.push(&c / &d);
                stack.push(d);
            }
        }
        found.sort();
        let mut i = 0;
        while i < found.len() {
            let mut j = i;
            while j < found.len() && found[j] == found[i] {
                j += 1;
            }
            push(found[i].clone(), (j - i) as u32, &mut out);
            i = j;
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    // merge duplicates across the trial/rho boundary
    let mut merged: Vec<(Int, u32)> = Vec::new();
    for (p, e) in out {
        match merged.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => merged.push((p, e)),
        }
    }
    Ok(merged)
}

/// Number of distinct prime divisors of |n|; omega(1) = 0. Rejects n = 0.
pub fn omega(n: &Int) -> Result<u64> {
    Ok(factor(n)?.len() as u64)
}

/// The unique squarefree s with n/s a positive perfect square; sign(s) = sign(n).
pub fn squarefree_part(n: &Int) -> Result<Int> {
    if n.is_zero() {
        return Err(IntError::ZeroInput);
    }
    let mut s: Int = if n.is_negative() {
        -Int::one()
    } else {
        Int::one()
    };
    for (p, e) in factor(n)? {
        if e % 2 == 1 {
            s *= p;
        }
    }
    Ok(s)
}

pub fn is_squarefree(n: &Int) -> Result<bool> {
    Ok(factor(n)?.iter().all(|(_, e)| *e < 2))
}

/// Integer square root when n is a perfect square, under the sign convention:
/// the root is ≡ 1 (mod 4) when n is odd and ≥ 0 when n is even.
pub fn convention_sqrt(n: &Int) -> Option<Int> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &(&r * &r) != n {
        return None;
    }
    if n.is_odd() && (&r % 4u32) != Int::from(1) {
        Some(-r)
    } else {
        Some(r)
    }
}

pub fn is_perfect_square(n: &Int) -> bool {
    convention_sqrt(n).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueTests {
    pub is_square: bool,
    pub is_fourth_power: bool,
}

/// Euler-criterion residue tests for a modulo an odd prime p.
///
/// is_square       <=> a^((p-1)/2) ≡ 1 (mod p)
/// is_fourth_power <=> a^((p-1)/gcd(4,p-1)) ≡ 1 (mod p)
pub fn residue_tests(a: &Int, p: &Int) -> Result<ResidueTests> {
    if !is_prime(p)? || p.is_even() {
        return Err(IntError::NotPrime(p.to_string()));
    }
    if a.gcd(p) != Int::one() {
        return Err(IntError::NotCoprime(a.to_string(), p.to_string()));
    }
    let pm1: Int = p - 1;
    let half = &pm1 / 2;
    let g = pm1.gcd(&Int::from(4));
    let quarter = &pm1 / g;
    let am = a.mod_floor(p);
    Ok(ResidueTests {
        is_square: am.modpow(&half, p).is_one(),
        is_fourth_power: am.modpow(&quarter, p).is_one(),
    })
}

/// Legendre symbol (a/p) for odd prime p: 1, -1, or 0 when p | a.
pub fn legendre(a: &Int, p: &Int) -> i32 {
    let am = a.mod_floor(p);
    if am.is_zero() {
        return 0;
    }
    let e = (p - 1) / 2;
    if am.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

/// floor of the Ivorra k-range bound:
///   f(n) = 18 + 2 log2(n)   for n <  2^96
///   f(n) = 435 + 10 log2(n) for n >= 2^96
///
/// Evaluated exactly through bit lengths: floor(2 log2 n) = bits(n^2) - 1 and
/// floor(10 log2 n) = bits(n^10) - 1, so no floating point enters.
pub fn ivorra_bound(n: &Int) -> Result<u64> {
    if n < &Int::one() {
        return Err(IntError::TooSmall(n.to_string(), 1));
    }
    let threshold: Int = Int::one() << 96;
    if n < &threshold {
        let sq = n * n;
        Ok(18 + (sq.bits() - 1))
    } else {
        let tenth = n.pow(10);
        Ok(435 + (tenth.bits() - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> Int {
        Int::from(n)
    }

    #[test]
    fn vp_examples() {
        assert_eq!(vp(&int(-124), &int(2)).unwrap(), 2);
        assert_eq!(vp(&int(29), &int(29)).unwrap(), 1);
        assert_eq!(vp(&(int(16) * int(-124)), &int(2)).unwrap(), 6);
        assert_eq!(vp(&int(0), &int(2)), Err(IntError::ZeroValuation));
        assert!(matches!(vp(&int(10), &int(4)), Err(IntError::NotPrime(_))));
    }

    #[test]
    fn vp_is_additive() {
        let p = int(3);
        for m in [-50i64, -7, 2, 9, 27, 54] {
            for n in [-81i64, -6, 5, 12, 18] {
                let lhs = vp(&(int(m) * int(n)), &p).unwrap();
                assert_eq!(lhs, vp(&int(m), &p).unwrap() + vp(&int(n), &p).unwrap());
            }
        }
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&int(4 * 29)).unwrap(), 2);
        assert_eq!(omega(&int(-8)).unwrap(), 1);
        assert_eq!(omega(&int(1)).unwrap(), 0);
        assert_eq!(omega(&int(-1)).unwrap(), 0);
        assert_eq!(omega(&int(8 * 41 * 41)).unwrap(), 2);
    }

    #[test]
    fn squarefree_part_examples() {
        assert_eq!(squarefree_part(&int(-4 * 31)).unwrap(), int(-31));
        assert_eq!(squarefree_part(&int(32)).unwrap(), int(2));
        assert_eq!(squarefree_part(&int(1)).unwrap(), int(1));
        assert_eq!(squarefree_part(&int(-1)).unwrap(), int(-1));
        // n / squarefree_part(n) is a positive perfect square
        for n in [-720i64, -12, 50, 98, 441, 1984] {
            let s = squarefree_part(&int(n)).unwrap();
            let q = int(n) / &s;
            assert!(q > int(0));
            assert!(is_perfect_square(&q), "n={n} s={s} q={q}");
            assert!(is_squarefree(&s).unwrap());
        }
    }

    #[test]
    fn convention_sqrt_examples() {
        assert_eq!(convention_sqrt(&int(25)), Some(int(5)));
        assert_eq!(convention_sqrt(&int(9)), Some(int(-3)));
        assert_eq!(convention_sqrt(&int(16)), Some(int(4)));
        assert_eq!(convention_sqrt(&int(7)), None);
        assert_eq!(convention_sqrt(&int(-4)), None);
        assert_eq!(convention_sqrt(&int(0)), Some(int(0)));
        assert_eq!(convention_sqrt(&int(1)), Some(int(1)));
        assert_eq!(convention_sqrt(&int(81)), Some(int(9)));
        assert_eq!(convention_sqrt(&int(49)), Some(int(-7)));
    }

    #[test]
    fn convention_sqrt_roundtrip() {
        for r in 1i64..200 {
            let n = int(r * r);
            let s = convention_sqrt(&n).unwrap();
            assert_eq!(&s * &s, n);
            if n.is_odd() {
                assert_eq!(s.mod_floor(&int(4)), int(1));
            } else {
                assert!(s >= int(0));
            }
        }
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(&int(5741)).unwrap());
        assert!(!is_prime(&int(1)).unwrap());
        assert!(is_prime(&int(33461)).unwrap());
        assert!(is_prime(&int(2)).unwrap());
        assert!(!is_prime(&int(-7)).unwrap());
        let big = Int::from(u64::MAX) + 1;
        assert!(matches!(
            is_prime(&big),
            Err(IntError::OutOfCertifiedRange(_))
        ));
    }

    #[test]
    fn primality_agrees_with_trial_division() {
        let trial = |n: u64| {
            if n < 2 {
                return false;
            }
            let mut d = 2;
            while d * d <= n {
                if n % d == 0 {
                    return false;
                }
                d += 1;
            }
            true
        };
        // exhaustive on a dense low range plus a sparse sweep to 10^6
        for n in 0u64..5000 {
            assert_eq!(is_prime_u64(n), trial(n), "n={n}");
        }
        for n in (5000u64..1_000_000).step_by(997) {
            assert_eq!(is_prime_u64(n), trial(n), "n={n}");
        }
    }

    #[test]
    fn residue_examples() {
        let r = residue_tests(&int(-64), &int(5)).unwrap();
        assert!(r.is_square && r.is_fourth_power);
        for p in [3i64, 7, 11, 13, 29] {
            let r = residue_tests(&int(1), &int(p)).unwrap();
            assert!(r.is_square && r.is_fourth_power);
        }
        assert!(matches!(
            residue_tests(&int(10), &int(5)),
            Err(IntError::NotCoprime(_, _))
        ));
    }

    #[test]
    fn residue_tests_against_power_tables() {
        for p in [5i64, 13, 17, 29, 41, 7, 11, 19, 23] {
            let pp = int(p);
            let squares: Vec<i64> = (1..p).map(|x| (x * x) % p).collect();
            let fourths: Vec<i64> = (1..p).map(|x| (x * x * x * x) % p).collect();
            for a in 1..p {
                let r = residue_tests(&int(a), &pp).unwrap();
                assert_eq!(r.is_square, squares.contains(&a), "a={a} p={p}");
                assert_eq!(r.is_fourth_power, fourths.contains(&a), "a={a} p={p}");
                // fourth power implies square; equivalent when p ≡ 3 (mod 4)
                if r.is_fourth_power {
                    assert!(r.is_square);
                }
                if p % 4 == 3 {
                    assert_eq!(r.is_square, r.is_fourth_power);
                }
            }
        }
    }

    #[test]
    fn ivorra_bound_examples() {
        assert_eq!(ivorra_bound(&(Int::one() << 10)).unwrap(), 38);
        assert_eq!(ivorra_bound(&(Int::one() << 96)).unwrap(), 1395);
        assert_eq!(ivorra_bound(&int(1)).unwrap(), 18);
        // just below the branch point the low formula still applies
        let below = (Int::one() << 96) - 1;
        assert_eq!(ivorra_bound(&below).unwrap(), 18 + 191);
        assert_eq!(ivorra_bound(&int(31)).unwrap(), 18 + 9);
    }

    #[test]
    fn factor_handles_mixed_inputs() {
        assert_eq!(factor(&int(2 * 2 * 29)).unwrap(), vec![(int(2), 2), (int(29), 1)]);
        assert_eq!(
            factor(&int(-456968)).unwrap(),
            vec![(int(2), 3), (int(239), 2)]
        );
        let semiprime = Int::from(1_000_003u64) * Int::from(1_000_033u64);
        assert_eq!(
            factor(&semiprime).unwrap(),
            vec![(Int::from(1_000_003u64), 1), (Int::from(1_000_033u64), 1)]
        );
    }
}
