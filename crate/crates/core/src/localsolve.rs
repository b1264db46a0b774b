//! Certified decision procedure for local solvability of quartic homogeneous
//! spaces d w^2 = d^2 + c2 z^2 + c4 z^4 over R and over Q_p (including p = 2).
//!
//! The Q_p decision explores z by residue refinement. A residue class is
//! decided only once the value of the quartic is pinned modulo p^(v+s+1),
//! where v is its valuation and s = 1 for odd p, s = 3 for p = 2; at that
//! precision squareness is constant on the class, so Solvable verdicts carry a
//! Hensel witness and Unsolvable verdicts carry a finite, replayable
//! refutation tree. The chart z = 1/z' (reversed coefficients) covers the rest
//! of P^1(Q_p).

use crate::intcore::{self, Int};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_DEPTH: u32 = 12;

// node budget per chart; blowup past this is reported as Inconclusive
const NODE_BUDGET: usize = 1 << 20;

/// d w^2 = d^2 + c2 z^2 + c4 z^4 with d squarefree nonzero and c4 nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Torsor {
    pub d: Int,
    pub c2: Int,
    pub c4: Int,
}

impl Torsor {
    pub fn new(d: Int, c2: Int, c4: Int) -> Option<Self> {
        if d.is_zero() || c4.is_zero() || !intcore::is_squarefree(&d).ok()? {
            return None;
        }
        Some(Torsor { d, c2, c4 })
    }

    /// Discriminant of c4 t^2 + c2 t + d^2 (with t = z^2).
    pub fn quad_disc(&self) -> Int {
        &self.c2 * &self.c2 - 4 * &self.c4 * &self.d * &self.d
    }

    /// Replace z by 2z: (c2, c4) -> (4 c2, 16 c4). Local solvability is
    /// invariant under this, which is how the two textbook displays of the
    /// dual homogeneous space reconcile.
    pub fn scale_z2(&self) -> Torsor {
        Torsor {
            d: self.d.clone(),
            c2: 4 * &self.c2,
            c4: 16 * &self.c4,
        }
    }
}

impl std::fmt::Display for Torsor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({})w^2 = ({}) + ({})z^2 + ({})z^4",
            self.d,
            &self.d * &self.d,
            self.c2,
            self.c4
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Place {
    R,
    Qp(Int),
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::R => write!(f, "R"),
            Place::Qp(p) => write!(f, "Q_{}", p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Solvable,
    Unsolvable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// z in Z_p
    Main,
    /// z = 1/z' with z' in pZ_p
    Reversed,
}

/// Hensel witness: every z in the class `z_rep mod p^precision` yields a
/// square value (of valuation `value_ord`), or an exact point when w_exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub chart: Chart,
    pub z_rep: Int,
    pub precision: u32,
    pub value_ord: u64,
    /// square root of the value to one digit of p-adic precision
    pub w_approx: Int,
    pub w_exact: bool,
}

/// One refuted residue class: the quartic's value on the whole class has
/// valuation `value_ord` and unit part `unit_rep` there, which is not a
/// square, so no z in the class can work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutedClass {
    pub chart: Chart,
    pub z_rep: Int,
    pub depth: u32,
    pub value_ord: u64,
    pub unit_rep: Int,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalVerdict {
    pub place: Place,
    pub status: Status,
    pub witness: Option<Witness>,
    /// depth-first refutation tree, present exactly when Unsolvable over Q_p
    pub refutation: Option<Vec<RefutedClass>>,
    pub refutation_depth: Option<u32>,
    pub note: Option<String>,
}

impl LocalVerdict {
    fn solvable(place: Place, witness: Option<Witness>, note: Option<String>) -> Self {
        LocalVerdict {
            place,
            status: Status::Solvable,
            witness,
            refutation: None,
            refutation_depth: None,
            note,
        }
    }

    fn unsolvable(place: Place, refutation: Option<Vec<RefutedClass>>, note: Option<String>) -> Self {
        let depth = refutation
            .as_ref()
            .map(|t| t.iter().map(|n| n.depth).max().unwrap_or(0));
        LocalVerdict {
            place,
            status: Status::Unsolvable,
            witness: None,
            refutation,
            refutation_depth: depth,
            note,
        }
    }

    fn inconclusive(place: Place, note: String) -> Self {
        LocalVerdict {
            place,
            status: Status::Inconclusive,
            witness: None,
            refutation: None,
            refutation_depth: None,
            note: Some(note),
        }
    }
}

/// Serializable certificate: {equation: [d, c2, c4], place, status, ...}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub equation: [Int; 3],
    pub place: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refutation_depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Vec<RefutedClass>>,
}

impl Certificate {
    pub fn new(t: &Torsor, v: &LocalVerdict) -> Self {
        Certificate {
            schema: crate::SCHEMA.to_string(),
            equation: [t.d.clone(), t.c2.clone(), t.c4.clone()],
            place: v.place.to_string(),
            status: v.status,
            witness: v.witness.clone(),
            refutation_depth: v.refutation_depth,
            refutation: v.refutation.clone(),
        }
    }
}

/// Real solvability, deciding whether sign(d) * (c4 t^2 + c2 t + d^2) >= 0
/// for some t >= 0, by exact sign and discriminant analysis.
pub fn solvable_r(t: &Torsor) -> LocalVerdict {
    let place = Place::R;
    if t.d.is_positive() {
        return LocalVerdict::solvable(place, None, Some("z = 0 gives w^2 = d > 0".into()));
    }
    // d < 0: need the quadratic to take a non-positive value on t >= 0
    if t.c4.is_negative() {
        return LocalVerdict::solvable(place, None, Some("c4 < 0, RHS -> -inf as z grows".into()));
    }
    if !t.c2.is_negative() {
        return LocalVerdict::unsolvable(
            place,
            None,
            Some("RHS increasing from d^2 > 0 on t >= 0 while d < 0".into()),
        );
    }
    let disc = t.quad_disc();
    if disc.is_negative() {
        LocalVerdict::unsolvable(
            place,
            None,
            Some(format!("RHS positive definite: discriminant {disc} < 0")),
        )
    } else {
        LocalVerdict::solvable(
            place,
            None,
            Some(format!(
                "vertex value non-positive: discriminant {disc} >= 0 at t = -c2/(2 c4) > 0"
            )),
        )
    }
}

fn is_square_unit_mod(u: &Int, p: &Int) -> bool {
    if p == &Int::from(2) {
        u.mod_floor(&Int::from(8)).is_one()
    } else {
        intcore::legendre(u, p) == 1
    }
}

/// Is the nonzero integer n a square in Q_p?
pub fn is_square_in_qp(n: &Int, p: &Int) -> bool {
    debug_assert!(!n.is_zero());
    let v = intcore::vp(n, p).expect("nonzero");
    if v % 2 != 0 {
        return false;
    }
    let u = n / p.pow(u32::try_from(v).unwrap());
    is_square_unit_mod(&u, p)
}

fn sqrt_mod_p(u: u64, p: u64) -> Option<u64> {
    if p == 2 {
        return Some(u % 2);
    }
    let um = u % p;
    if um == 0 {
        return Some(0);
    }
    // Tonelli-Shanks
    let pow = |mut b: u64, mut e: u64| -> u64 {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = ((acc as u128 * b as u128) % p as u128) as u64;
            }
            b = ((b as u128 * b as u128) % p as u128) as u64;
            e >>= 1;
        }
        acc
    };
    if pow(um, (p - 1) / 2) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow(um, (p + 1) / 4));
    }
    let s = (p - 1).trailing_zeros() as u64;
    let q = (p - 1) >> s;
    let mut z = 2u64;
    while pow(z, (p - 1) / 2) == 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow(z, q);
    let mut t = pow(um, q);
    let mut r = pow(um, (q + 1) / 2);
    while t != 1 {
        let mut i = 0u64;
        let mut t2 = t;
        while t2 != 1 {
            t2 = ((t2 as u128 * t2 as u128) % p as u128) as u64;
            i += 1;
        }
        let b = pow(c, 1 << (m - i - 1));
        m = i;
        c = ((b as u128 * b as u128) % p as u128) as u64;
        t = ((t as u128 * c as u128) % p as u128) as u64;
        r = ((r as u128 * b as u128) % p as u128) as u64;
    }
    Some(r)
}

struct PolyChart {
    chart: Chart,
    // coefficients [t^0, t^2, t^4] of the even quartic d * F
    c0: Int,
    c2: Int,
    c4: Int,
}

impl PolyChart {
    fn eval(&self, z: &Int) -> Int {
        let z2 = z * z;
        &self.c0 + (&self.c2 + &self.c4 * &z2) * &z2
    }

    fn deriv(&self, z: &Int) -> Int {
        // d/dz (c2 z^2 + c4 z^4) = 2 c2 z + 4 c4 z^3
        let z2 = z * z;
        (2 * &self.c2 + 4 * &self.c4 * &z2) * z
    }

    /// Taylor coefficients of P(r + s) in s: [P(r), q1, q2, q3, q4].
    fn taylor(&self, r: &Int) -> [Int; 5] {
        let r2 = r * r;
        [
            &self.c0 + (&self.c2 + &self.c4 * &r2) * &r2,
            (2 * &self.c2 + 4 * &self.c4 * &r2) * r,
            &self.c2 + 6 * &self.c4 * &r2,
            4 * &self.c4 * r,
            self.c4.clone(),
        ]
    }
}

enum ChartOutcome {
    Solvable(Witness),
    Refuted(Vec<RefutedClass>),
    Inconclusive,
}

fn witness_for(chart: Chart, rep: &Int, n: u32, val: &Int, p: &Int) -> Witness {
    // val is a square in Q_p of even valuation v; give one p-adic digit of w
    let v = intcore::vp(val, p).expect("nonzero");
    let u = val / p.pow(u32::try_from(v).unwrap());
    let exact_root = intcore::convention_sqrt(&val.abs());
    let (w, exact) = match (&exact_root, val.is_positive()) {
        (Some(r), true) => (r.abs(), true),
        _ => {
            let pm = u64::try_from(p).unwrap_or(u64::MAX);
            let um = u64::try_from(&u.mod_floor(p)).unwrap_or(1);
            let digit = sqrt_mod_p(um, pm).unwrap_or(1);
            (p.pow(u32::try_from(v / 2).unwrap()) * Int::from(digit), false)
        }
    };
    Witness {
        chart,
        z_rep: rep.clone(),
        precision: n,
        value_ord: v,
        w_approx: w,
        w_exact: exact,
    }
}

fn explore_chart(poly: &PolyChart, p: &Int, max_depth: u32) -> ChartOutcome {
    let s_p = if p == &Int::from(2) { 3u64 } else { 1u64 };
    let mut refuted: Vec<RefutedClass> = Vec::new();
    let mut hit_depth_limit = false;
    let mut nodes = 0usize;

    // stack of (rep, depth); depth n means the class rep + p^n Z_p
    let mut stack: Vec<(Int, u32)> = Vec::new();
    match poly.chart {
        Chart::Main => {
            let mut r = Int::zero();
            while &r < p {
                stack.push((r.clone(), 1));
                r += 1;
            }
        }
        Chart::Reversed => stack.push((Int::zero(), 1)),
    }

    while let Some((rep, n)) = stack.pop() {
        nodes += 1;
        if nodes > NODE_BUDGET {
            return ChartOutcome::Inconclusive;
        }
        let q = poly.taylor(&rep);
        let val = q[0].clone();
        if val.is_zero() {
            // exact root: (w, z) = (0, rep) lies on the torsor
            return ChartOutcome::Solvable(Witness {
                chart: poly.chart,
                z_rep: rep,
                precision: n,
                value_ord: 0,
                w_approx: Int::zero(),
                w_exact: true,
            });
        }
        let v = intcore::vp(&val, p).expect("nonzero");
        // the class's values are P(rep) + sum_j q_j p^(jn) s^j, so they are
        // pinned modulo p^tau with tau the least j*n + ord(q_j); once the
        // unit part is pinned mod p^s (mod p for odd p, mod 8 at p = 2) the
        // square test is constant over the class and the verdict certified
        let tau = (1..=4u64)
            .filter(|&j| !q[j as usize].is_zero())
            .map(|j| j * n as u64 + intcore::vp(&q[j as usize], p).expect("nonzero"))
            .min()
            .unwrap_or(u64::MAX);
        if v < tau && (tau - v) >= s_p {
            // valuation and enough of the unit are constant on the class
            let u = &val / p.pow(u32::try_from(v).unwrap());
            if v % 2 == 0 && is_square_unit_mod(&u, p) {
                return ChartOutcome::Solvable(witness_for(poly.chart, &rep, n, &val, p));
            }
            refuted.push(RefutedClass {
                chart: poly.chart,
                z_rep: rep,
                depth: n,
                value_ord: v,
                unit_rep: u.mod_floor(&p.pow(u32::try_from(s_p + 1).unwrap())),
            });
            continue;
        }
        // value not pinned: a p-adic root may hide here (simple-root Hensel)
        if !q[1].is_zero() {
            let mu = intcore::vp(&q[1], p).expect("nonzero");
            if v > 2 * mu {
                // Newton iteration converges to a root z0 ≡ rep, giving w = 0
                return ChartOutcome::Solvable(Witness {
                    chart: poly.chart,
                    z_rep: rep,
                    precision: n,
                    value_ord: v,
                    w_approx: Int::zero(),
                    w_exact: false,
                });
            }
        }
        if n >= max_depth {
            hit_depth_limit = true;
            continue;
        }
        let step = p.pow(n);
        let mut i = Int::zero();
        while &i < p {
            stack.push((&rep + &i * &step, n + 1));
            i += 1;
        }
    }

    if hit_depth_limit {
        ChartOutcome::Inconclusive
    } else {
        ChartOutcome::Refuted(refuted)
    }
}

/// Q_p-solvability of the torsor by certified residue refinement.
///
/// Inconclusive (only possible when `max_depth` is exhausted) is a value,
/// not an error; callers that need a decision should raise the depth.
pub fn solvable_qp(t: &Torsor, p: &Int, max_depth: u32) -> LocalVerdict {
    let place = Place::Qp(p.clone());
    let d2 = &t.d * &t.d;

    // degenerate quadratic: d*F = d*c4*(z^2 - t0)^2 needs a closed form,
    // since refinement near the double root never pins the valuation
    if t.quad_disc().is_zero() {
        // t0 = -c2 / (2 c4) as a reduced fraction num/den
        let num = -&t.c2;
        let den = 2 * &t.c4;
        let g = num.gcd(&den);
        let (num, den) = (num / &g, den / &g);
        let dc4 = &t.d * &t.c4;
        if is_square_in_qp(&dc4, p) {
            return LocalVerdict::solvable(
                place,
                None,
                Some("degenerate: d*c4 is a square in Q_p".into()),
            );
        }
        let t0_square = is_square_in_qp(&(&num * &den), p);
        return if t0_square {
            LocalVerdict::solvable(
                place,
                None,
                Some("degenerate: double root t0 is a square in Q_p, giving w = 0".into()),
            )
        } else {
            LocalVerdict::unsolvable(
                place,
                None,
                Some("degenerate: neither d*c4 nor t0 is a square in Q_p".into()),
            )
        };
    }

    let main = PolyChart {
        chart: Chart::Main,
        c0: &t.d * &d2,
        c2: &t.d * &t.c2,
        c4: &t.d * &t.c4,
    };
    let rev = PolyChart {
        chart: Chart::Reversed,
        c0: &t.d * &t.c4,
        c2: &t.d * &t.c2,
        c4: &t.d * &d2,
    };

    let mut refutation: Vec<RefutedClass> = Vec::new();
    let mut inconclusive = false;
    for chart in [main, rev] {
        match explore_chart(&chart, p, max_depth) {
            ChartOutcome::Solvable(w) => return LocalVerdict::solvable(place, Some(w), None),
            ChartOutcome::Refuted(mut r) => refutation.append(&mut r),
            ChartOutcome::Inconclusive => inconclusive = true,
        }
    }
    if inconclusive {
        LocalVerdict::inconclusive(place, format!("undecided at depth {max_depth}"))
    } else {
        LocalVerdict::unsolvable(place, Some(refutation), None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EverywhereVerdict {
    pub verdicts: Vec<LocalVerdict>,
    /// deterministic good-prime spot checks backing the "good places are
    /// automatically solvable" assumption
    pub spot_checks: Vec<LocalVerdict>,
    pub status: Status,
}

impl EverywhereVerdict {
    /// The place that obstructs, when Unsolvable.
    pub fn obstruction(&self) -> Option<&Place> {
        self.verdicts
            .iter()
            .chain(self.spot_checks.iter())
            .find(|v| v.status == Status::Unsolvable)
            .map(|v| &v.place)
    }
}

fn spot_check_primes(t: &Torsor, avoid: &[Int], count: usize) -> Vec<Int> {
    use rand_core::{RngCore, SeedableRng};
    // deterministic seed from the equation, so output is reproducible
    let mut seed = 0xcbf29ce484222325u64;
    for x in [&t.d, &t.c2, &t.c4] {
        for b in x.to_signed_bytes_le() {
            seed ^= b as u64;
            seed = seed.wrapping_mul(0x100000001b3);
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bad_value = &t.d * &t.c4 * t.quad_disc();
    let mut out = Vec::new();
    while out.len() < count {
        let q = 1000 + (rng.next_u64() % 9000);
        let q = Int::from(q | 1);
        if intcore::is_prime(&q).unwrap_or(false)
            && !avoid.contains(&q)
            && !bad_value.mod_floor(&q).is_zero()
            && !out.contains(&q)
        {
            out.push(q);
        }
    }
    out
}

/// Runs R and every listed p-adic place, plus five deterministic good-prime
/// spot checks. Aggregate Solvable requires every place to be Solvable.
pub fn solvable_everywhere(t: &Torsor, bad_primes: &[Int], max_depth: u32) -> EverywhereVerdict {
    let mut verdicts = vec![solvable_r(t)];
    let mut primes: Vec<Int> = bad_primes.to_vec();
    if !primes.contains(&Int::from(2)) {
        primes.insert(0, Int::from(2));
    }
    primes.sort();
    primes.dedup();
    for p in &primes {
        verdicts.push(solvable_qp(t, p, max_depth));
    }
    let spot_checks: Vec<LocalVerdict> = spot_check_primes(t, &primes, 5)
        .iter()
        .map(|q| solvable_qp(t, q, max_depth))
        .collect();
    let all = verdicts.iter().chain(spot_checks.iter());
    let status = if all
        .clone()
        .any(|v| v.status == Status::Unsolvable)
    {
        Status::Unsolvable
    } else if all.clone().any(|v| v.status == Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Solvable
    };
    EverywhereVerdict {
        verdicts,
        spot_checks,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(d: i64, c2: i64, c4: i64) -> Torsor {
        Torsor::new(Int::from(d), Int::from(c2), Int::from(c4)).unwrap()
    }

    #[test]
    fn real_verdicts() {
        // d = 1 always solvable via z = 0
        assert_eq!(solvable_r(&t(1, -100, 7)).status, Status::Solvable);
        // type X dual space at d = -1: 32 t^2 - 2t + 1 positive definite
        assert_eq!(solvable_r(&t(-1, -2, 32)).status, Status::Unsolvable);
        // c4 < 0 pushes the RHS negative eventually
        assert_eq!(solvable_r(&t(-1, 0, -1)).status, Status::Solvable);
        // d < 0 with nonnegative c2: increasing from d^2
        assert_eq!(solvable_r(&t(-1, 3, 5)).status, Status::Unsolvable);
        // d < 0, c2 < 0, disc >= 0: vertex dips to zero or below
        assert_eq!(solvable_r(&t(-1, -5, 5)).status, Status::Solvable);
    }

    #[test]
    fn trivial_class_solvable_everywhere() {
        // d = 1: (w, z) = (1, 0)
        let tt = t(1, 10, 29);
        for p in [2i64, 3, 5, 29, 31] {
            let v = solvable_qp(&tt, &Int::from(p), DEFAULT_MAX_DEPTH);
            assert_eq!(v.status, Status::Solvable, "p={p}");
        }
    }

    #[test]
    fn type_x_q2_cells_split_by_sign_and_p_mod_16() {
        // Family X, k=5. For p = 23 ≡ 7 (mod 16), a = -6 (dual coefficients
        // (12, -92)): both C_{±2}(Q_2) are empty.
        for d in [2i64, -2] {
            let tor = t(d, 12 * d, -92);
            let v = solvable_qp(&tor, &Int::from(2), DEFAULT_MAX_DEPTH);
            assert_eq!(v.status, Status::Unsolvable, "p=23 d={d}");
            assert!(v.refutation_depth.is_some());
        }
        // For p = 31 ≡ 15 (mod 16), a = 2 (dual coefficients (-4, -124)):
        // C_2 has the Q_2-point z = 3 (value -5056 = 2^6 * (-79), -79 ≡ 1 mod 8),
        // while C_{-2} stays empty. A deeper 2-adic cancellation defeats the
        // naive valuation count here; the oracle decides it correctly.
        let v = solvable_qp(&t(2, -8, -124), &Int::from(2), DEFAULT_MAX_DEPTH);
        assert_eq!(v.status, Status::Solvable);
        let v = solvable_qp(&t(-2, 8, -124), &Int::from(2), DEFAULT_MAX_DEPTH);
        assert_eq!(v.status, Status::Unsolvable);
        // and the a = -2 twin has a rational point on C_{-2}: (w, z) = (8, 1)
        let v = solvable_qp(&t(-2, -8, -124), &Int::from(2), DEFAULT_MAX_DEPTH);
        assert_eq!(v.status, Status::Solvable);
    }

    #[test]
    fn type_x_qp_obstruction() {
        // X (p=31, k=5): C'_{±31} on (2, 32); the mod p^2 argument
        for d in [31i64, -31] {
            let tor = t(d, 2 * d, 32);
            let v = solvable_qp(&tor, &Int::from(31), DEFAULT_MAX_DEPTH);
            assert_eq!(v.status, Status::Unsolvable, "d={d}");
        }
    }

    #[test]
    fn global_point_found_via_reversed_chart() {
        // delta-image of (0,0) sits at z' = 0 on the reversed chart:
        // d = squarefree part of c4 makes d * c4 a square
        let tor = t(2, 4, 32);
        for p in [2i64, 31] {
            let v = solvable_qp(&tor, &Int::from(p), DEFAULT_MAX_DEPTH);
            assert_eq!(v.status, Status::Solvable, "p={p}");
        }
    }

    #[test]
    fn exact_rational_root_detected() {
        // d w^2 = d^2 + 0 z^2 - 4 z^4 with d = 2: z = 1 gives w = 0... use
        // c4 = -d^2: value at z=1 is d(d^2 - d^2) = 0
        let tor = t(2, 0, -4);
        let v = solvable_qp(&tor, &Int::from(7), DEFAULT_MAX_DEPTH);
        assert_eq!(v.status, Status::Solvable);
        let w = v.witness.unwrap();
        assert_eq!(w.w_approx, Int::zero());
    }

    #[test]
    fn scaling_invariance_spot() {
        // the scaled equation carries 2-adic valuations up to 4 higher, so it
        // gets extra refinement depth; verdicts must agree
        for (d, c2, c4) in [(3i64, 5i64, 7i64), (-1, -2, 32), (2, -8, -124), (-5, 12, 9)] {
            let a = t(d, c2, c4);
            let b = a.scale_z2();
            for p in [2i64, 3, 5, 7] {
                let va = solvable_qp(&a, &Int::from(p), DEFAULT_MAX_DEPTH);
                let vb = solvable_qp(&b, &Int::from(p), DEFAULT_MAX_DEPTH + 6);
                assert_eq!(va.status, vb.status, "({d},{c2},{c4}) at p={p}");
            }
            assert_eq!(solvable_r(&a).status, solvable_r(&b).status);
        }
    }

    #[test]
    fn degenerate_disc_closed_form() {
        // c2^2 = 4 c4 d^2: F = c4 (z^2 - t0)^2
        // d=1, c4=1, c2=-2: t0 = 1: root z=1 -> solvable everywhere
        let tor = t(1, -2, 1);
        for p in [2i64, 3, 5, 7] {
            assert_eq!(
                solvable_qp(&tor, &Int::from(p), DEFAULT_MAX_DEPTH).status,
                Status::Solvable
            );
        }
        // d=-1, c4=-1, c2=-2: d*F = (z^2-1)^2... d*c4 = 1 square: solvable
        let tor = t(-1, -2, -1);
        assert_eq!(
            solvable_qp(&tor, &Int::from(3), DEFAULT_MAX_DEPTH).status,
            Status::Solvable
        );
        // d=-1, c2=2, c4=-1: t0 = 1 again solvable; pick one with both failing:
        // d=3, c4=3, c2=6: wait c2^2=36=4*3*9=108 no. d=1,c4=3,c2 would need
        // c2^2=12, not integral. d=5, c4=5, c2=50: 2500 = 4*5*25*5 = 2500: t0 = -5.
        let tor = t(5, 50, 5);
        // d*c4 = 25 square -> solvable at every p
        assert_eq!(
            solvable_qp(&tor, &Int::from(7), DEFAULT_MAX_DEPTH).status,
            Status::Solvable
        );
    }

    #[test]
    fn everywhere_aggregation() {
        let tor = t(-1, -2, 32);
        let v = solvable_everywhere(&tor, &[Int::from(2), Int::from(31)], DEFAULT_MAX_DEPTH);
        assert_eq!(v.status, Status::Unsolvable);
        assert_eq!(v.obstruction(), Some(&Place::R));
        assert_eq!(v.spot_checks.len(), 5);

        let ok = t(1, 10, 29);
        let v = solvable_everywhere(&ok, &[Int::from(2), Int::from(29)], DEFAULT_MAX_DEPTH);
        assert_eq!(v.status, Status::Solvable);
    }

    #[test]
    fn certificate_roundtrip() {
        let tor = t(-1, -2, 32);
        let v = solvable_qp(&tor, &Int::from(2), DEFAULT_MAX_DEPTH);
        let cert = Certificate::new(&tor, &v);
        let s = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back.status, v.status);
        assert_eq!(back.equation[0], tor.d);
    }
}
