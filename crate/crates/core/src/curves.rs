//! Weierstrass models y^2 = x^3 + ax^2 + bx with the rational 2-torsion point
//! (0,0), their 2-isogenous duals, homogeneous spaces, quadratic twists, and
//! naive point counting over prime fields.

use crate::intcore::{self, Int};
use crate::localsolve::Torsor;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CurveError {
    #[error("singular model: {0}")]
    Singular(&'static str),
    #[error("d = {0} is not squarefree")]
    NotSquarefree(Int),
    #[error("bad reduction at {q}: {q} divides {divides}")]
    BadReduction { q: Int, divides: String },
    #[error("point counting capped at q < 10^7, got {0}")]
    CountingCap(Int),
    #[error("q = {0} must be an odd prime")]
    BadPrime(Int),
}

pub type Result<T> = std::result::Result<T, CurveError>;

/// y^2 = x^3 + a x^2 + b x. Nonsingular, with (0,0) rational 2-torsion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    pub a: Int,
    pub b: Int,
}

impl Curve {
    pub fn new(a: Int, b: Int) -> Result<Self> {
        if b.is_zero() {
            return Err(CurveError::Singular("b = 0"));
        }
        if (&a * &a - Int::from(4) * &b).is_zero() {
            return Err(CurveError::Singular("a^2 = 4b"));
        }
        Ok(Curve { a, b })
    }

    /// a^2 - 4b, the x^2-free discriminant of x^2 + ax + b.
    pub fn quad_disc(&self) -> Int {
        &self.a * &self.a - 4 * &self.b
    }

    /// Full discriminant 16 b^2 (a^2 - 4b).
    pub fn disc(&self) -> Int {
        Int::from(16) * &self.b * &self.b * self.quad_disc()
    }
}

impl std::fmt::Display for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "y^2 = x^3 + ({})x^2 + ({})x", self.a, self.b)
    }
}

/// The 2-isogenous pair: E' has coefficients (-2a, a^2 - 4b).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePair {
    pub e: Curve,
    pub e_dual: Curve,
}

pub fn make_pair(a: Int, b: Int) -> Result<CurvePair> {
    let e = Curve::new(a, b)?;
    let e_dual = Curve::new(-2 * &e.a, e.quad_disc())?;
    Ok(CurvePair { e, e_dual })
}

/// Homogeneous space for the squarefree class d on the curve (A, B):
///
///   d w^2 = d^2 + A d z^2 + B z^4,
///
/// obtained from x = d/z^2, y = d w / z^3 on y^2 = x^3 + Ax^2 + Bx.
pub fn torsor(c: &Curve, d: &Int) -> Result<Torsor> {
    if d.is_zero() || !intcore::is_squarefree(d).map_err(|_| CurveError::NotSquarefree(d.clone()))? {
        return Err(CurveError::NotSquarefree(d.clone()));
    }
    Ok(Torsor {
        d: d.clone(),
        c2: &c.a * d,
        c4: c.b.clone(),
    })
}

/// Twist by squarefree d: (a, b) -> (ad, bd^2).
pub fn quadratic_twist(c: &Curve, d: &Int) -> Result<Curve> {
    if d.is_zero() || !intcore::is_squarefree(d).map_err(|_| CurveError::NotSquarefree(d.clone()))? {
        return Err(CurveError::NotSquarefree(d.clone()));
    }
    Curve::new(&c.a * d, &c.b * d * d)
}

/// Trace of Frobenius a_q = q + 1 - #E(F_q) by direct enumeration with a
/// quadratic-residue table. Requires good reduction: odd q with q ∤ disc.
pub fn a_q(c: &Curve, q: &Int) -> Result<Int> {
    if q < &Int::from(3) || q.is_even() || !intcore::is_prime(q).unwrap_or(false) {
        return Err(CurveError::BadPrime(q.clone()));
    }
    if q >= &Int::from(10_000_000) {
        return Err(CurveError::CountingCap(q.clone()));
    }
    let disc = c.disc();
    if disc.mod_floor(q).is_zero() {
        let which = if c.b.mod_floor(q).is_zero() {
            format!("b = {}", c.b)
        } else {
            format!("a^2 - 4b = {}", c.quad_disc())
        };
        return Err(CurveError::BadReduction {
            q: q.clone(),
            divides: which,
        });
    }
    let qm = u64::try_from(q).expect("q below cap");
    let am = u64::try_from(&c.a.mod_floor(q)).unwrap();
    let bm = u64::try_from(&c.b.mod_floor(q)).unwrap();
    let mut is_square = vec![false; qm as usize];
    let mut x = 0u64;
    while x <= qm / 2 {
        is_square[((x as u128 * x as u128) % qm as u128) as usize] = true;
        x += 1;
    }
    let mut count: i64 = 1; // point at infinity
    for x in 0..qm {
        let x2 = (x as u128 * x as u128) % qm as u128;
        let fx = ((x2 * ((x + am) % qm) as u128) + (bm as u128 * x as u128)) % qm as u128;
        if fx == 0 {
            count += 1;
        } else if is_square[fx as usize] {
            count += 2;
        }
    }
    Ok(Int::from(qm as i64 + 1 - count))
}

/// First n good primes q >= 5 for the curve, ascending.
pub fn good_primes(c: &Curve, n: usize) -> Vec<Int> {
    let disc = c.disc();
    let mut out = Vec::with_capacity(n);
    let mut q = 5u64;
    while out.len() < n {
        if intcore::is_prime_u64(q) && !disc.mod_floor(&Int::from(q)).is_zero() {
            out.push(Int::from(q));
        }
        q += 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> Int {
        Int::from(n)
    }

    fn pair(a: i64, b: i64) -> CurvePair {
        make_pair(int(a), int(b)).unwrap()
    }

    #[test]
    fn make_pair_examples() {
        let p = pair(5, -1);
        assert_eq!((p.e_dual.a.clone(), p.e_dual.b.clone()), (int(-10), int(29)));
        let p = pair(-3, -8);
        assert_eq!((p.e_dual.a.clone(), p.e_dual.b.clone()), (int(6), int(41)));
        let p = pair(0, 4);
        assert_eq!((p.e_dual.a.clone(), p.e_dual.b.clone()), (int(0), int(-16)));
        assert!(matches!(
            make_pair(int(5), int(0)),
            Err(CurveError::Singular("b = 0"))
        ));
        assert!(matches!(
            make_pair(int(4), int(4)),
            Err(CurveError::Singular("a^2 = 4b"))
        ));
    }

    #[test]
    fn double_dual_is_isomorphic_by_coefficients() {
        // E'' = (4a, 16b), the (x,y) -> (4x, 8y) image of E
        for (a, b) in [(5i64, -1i64), (-3, -8), (2, 32), (18, 2), (7, 3)] {
            let p = pair(a, b);
            let dd = make_pair(p.e_dual.a.clone(), p.e_dual.b.clone()).unwrap();
            assert_eq!(dd.e_dual.a, int(4 * a));
            assert_eq!(dd.e_dual.b, int(16 * b));
        }
    }

    #[test]
    fn torsor_examples() {
        let p = pair(5, -1);
        let t = torsor(&p.e_dual, &int(-1)).unwrap();
        // -w^2 = 1 + 10 z^2 + 29 z^4
        assert_eq!((t.d, t.c2, t.c4), (int(-1), int(10), int(29)));
        let t = torsor(&p.e, &int(1)).unwrap();
        // z = 0 gives w^2 = d = 1
        assert_eq!((t.d, t.c2, t.c4), (int(1), int(5), int(-1)));
        assert!(torsor(&p.e, &int(4)).is_err());
        assert!(torsor(&p.e, &int(0)).is_err());
    }

    #[test]
    fn quadratic_twist_examples() {
        let c = Curve::new(int(5), int(-1)).unwrap();
        let t = quadratic_twist(&c, &int(7)).unwrap();
        assert_eq!((t.a.clone(), t.b.clone()), (int(35), int(-49)));
        let t = quadratic_twist(&c, &int(-1)).unwrap();
        assert_eq!((t.a.clone(), t.b.clone()), (int(-5), int(-1)));
        // twisting twice by d recovers (d^2 a, d^4 b), the (d^2 x, d^3 y) image
        let tt = quadratic_twist(&quadratic_twist(&c, &int(7)).unwrap(), &int(7)).unwrap();
        assert_eq!((tt.a, tt.b), (int(5 * 49), int(-49 * 49)));
    }

    #[test]
    fn a_q_examples() {
        let c = Curve::new(int(5), int(-1)).unwrap();
        assert_eq!(a_q(&c, &int(3)).unwrap(), int(2));
        assert_eq!(a_q(&c, &int(5)).unwrap(), int(-2));
        assert!(matches!(
            a_q(&c, &int(29)),
            Err(CurveError::BadReduction { .. })
        ));
        assert!(a_q(&c, &int(2)).is_err());
        assert!(a_q(&c, &int(9)).is_err());
    }

    #[test]
    fn a_q_parity_hasse_and_isogeny_invariance() {
        let pairs = [
            (5i64, -1i64),
            (-3, -8),
            (2, 32),
            (-30, 256),
            (18, 2),
            (26, -4),
            (36, -2),
            (-18, -2),
            (16, 2),
            (82, 1682),
        ];
        let mut checked = 0;
        for (a, b) in pairs {
            let p = pair(a, b);
            for q in good_primes(&p.e, 4) {
                let aq = a_q(&p.e, &q).unwrap();
                assert!(aq.is_even(), "a_q odd for ({a},{b}) at {q}");
                assert!(&aq * &aq <= 4 * &q, "Hasse violated for ({a},{b}) at {q}");
                if !p.e_dual.disc().mod_floor(&q).is_zero() {
                    assert_eq!(aq, a_q(&p.e_dual, &q).unwrap(), "({a},{b}) at {q}");
                }
                checked += 1;
            }
        }
        assert!(checked >= 20);
    }
}
