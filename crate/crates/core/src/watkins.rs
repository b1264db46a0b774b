//! Quadratic-twist certification. For a twist E^(±q) of a family curve, the
//! square of the ratio of Petersson norms turns into the integer identity
//!
//!   2^(k-m) (q-1)(q+1-a_q)(q+1+a_q) = (m_twist / m_E) * (c_E^2 / c_twist^2),
//!
//! whose left side always carries enough powers of 2 to clear the twist's
//! rank bound in the certified cases. Modular degrees and Manin constants are
//! ingested data, never computed here.

use crate::curves;
use crate::descent::RankCertificate;
use crate::families::{is_trick_family, FamilyInstance};
use crate::intcore::{self, Int};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WatkinsError {
    #[error("q = {0} must be a prime >= 5")]
    BadTwistPrime(Int),
    #[error(transparent)]
    Curve(#[from] curves::CurveError),
    #[error("a_q = {0} is odd; the 2-torsion parity law rules this out for family curves")]
    OddTrace(Int),
    #[error("csv: {0}")]
    Csv(String),
    #[error("no curve data row matches (a, b) = ({0}, {1})")]
    NoDataRow(Int, Int),
    #[error("invalid curve data: {0}")]
    BadData(String),
    #[error("certified verdict with v2 = {v2} below rank bound {bound}; identity violated")]
    Internal { v2: u64, bound: u32 },
}

pub type Result<T> = std::result::Result<T, WatkinsError>;

/// Ingested invariants of one curve: modular degree and Manin constant,
/// matched to instances by (a, b), never computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveData {
    pub label: String,
    pub a: Int,
    pub b: Int,
    pub modular_degree: Int,
    pub manin_constant: Int,
    pub rank: Option<u32>,
    pub provenance: String,
}

/// Reads `label,a,b,modular_degree,manin_constant,rank` rows; extra columns
/// are tolerated, m_E >= 1 and c_E >= 1 are enforced, rank may be blank.
pub fn load_csv(path: &Path) -> Result<Vec<CurveData>> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| WatkinsError::Csv(e.to_string()))?;
    let headers = rdr
        .headers()
        .map_err(|e| WatkinsError::Csv(e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| WatkinsError::Csv(format!("missing column {name:?}")))
    };
    let (li, ai, bi, mi, ci) = (
        col("label")?,
        col("a")?,
        col("b")?,
        col("modular_degree")?,
        col("manin_constant")?,
    );
    let ri = headers.iter().position(|h| h == "rank");
    let provenance = path.display().to_string();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| WatkinsError::Csv(e.to_string()))?;
        let get = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| WatkinsError::Csv(format!("short row: {rec:?}")))
        };
        let parse_int = |s: &str| -> Result<Int> {
            s.parse::<Int>()
                .map_err(|_| WatkinsError::Csv(format!("bad integer {s:?}")))
        };
        let m = parse_int(get(mi)?)?;
        let c = parse_int(get(ci)?)?;
        if m < Int::from(1) || c < Int::from(1) {
            return Err(WatkinsError::BadData(format!(
                "modular_degree and manin_constant must be >= 1 (row {:?})",
                get(li)?
            )));
        }
        let rank = match ri.and_then(|i| rec.get(i)) {
            Some("") | None => None,
            Some(s) => Some(
                s.parse::<u32>()
                    .map_err(|_| WatkinsError::Csv(format!("bad rank {s:?}")))?,
            ),
        };
        out.push(CurveData {
            label: get(li)?.to_string(),
            a: parse_int(get(ai)?)?,
            b: parse_int(get(bi)?)?,
            modular_degree: m,
            manin_constant: c,
            rank,
            provenance: provenance.clone(),
        });
    }
    Ok(out)
}

/// Rows are matched to curves by coefficients, not by label string.
pub fn find_by_coefficients<'d>(data: &'d [CurveData], a: &Int, b: &Int) -> Option<&'d CurveData> {
    data.iter().find(|r| &r.a == a && &r.b == b)
}

/// Fetch one curve record from `{base_url}/curve/{label}` (opt-in; offline
/// CSV ingestion is the default everywhere).
#[cfg(feature = "fetch")]
pub fn fetch_curve(base_url: &str, label: &str) -> Result<CurveData> {
    #[derive(Deserialize)]
    struct Wire {
        label: String,
        a: String,
        b: String,
        modular_degree: String,
        manin_constant: String,
        rank: Option<u32>,
    }
    let url = format!("{}/curve/{}", base_url.trim_end_matches('/'), label);
    let w: Wire = reqwest::blocking::get(&url)
        .and_then(|r| r.json())
        .map_err(|e| WatkinsError::Csv(format!("fetch {url}: {e}")))?;
    let parse = |s: &str| {
        s.parse::<Int>()
            .map_err(|_| WatkinsError::BadData(s.to_string()))
    };
    Ok(CurveData {
        label: w.label,
        a: parse(&w.a)?,
        b: parse(&w.b)?,
        modular_degree: parse(&w.modular_degree)?,
        manin_constant: parse(&w.manin_constant)?,
        rank: w.rank,
        provenance: url,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistConductorBound {
    /// true exactly when d ≡ 1 (mod 4): the twisted 2-exponent k equals m
    pub k_exact_equals_m: bool,
    /// the only unconditional statement otherwise: k - m >= 0
    pub k_minus_m_lower: u32,
}

/// Conductor 2-exponent rule for the twist by d = ±q.
pub fn twist_conductor_bound(d: &Int) -> TwistConductorBound {
    TwistConductorBound {
        k_exact_equals_m: d.mod_floor(&Int::from(4)) == Int::from(1),
        k_minus_m_lower: 0,
    }
}

/// Exact v2((q-1)(q+1-a_q)(q+1+a_q)); the 2^(k-m) factor only adds to this.
/// Rejects odd a_q, which the 2-torsion parity law excludes for these curves.
pub fn valuation_lower(q: &Int, a_q: &Int) -> Result<u64> {
    if a_q.is_odd() {
        return Err(WatkinsError::OddTrace(a_q.clone()));
    }
    if q < &Int::from(5) || !intcore::is_prime(q).unwrap_or(false) {
        return Err(WatkinsError::BadTwistPrime(q.clone()));
    }
    let prod: Int = (q - 1) * (q + 1 - a_q) * (q + 1 + a_q);
    debug_assert!(!prod.is_zero(), "|a_q| <= 2 sqrt(q) < q + 1");
    Ok(intcore::vp(&prod, &Int::from(2)).expect("nonzero"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedUnconditional { lemma: String },
    CertifiedConditional { hypotheses: String },
    Unknown { reason: String },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        !matches!(self, Verdict::Unknown { .. })
    }
}

/// Facts the caller must assert for the rank-one route: the base curve has
/// Mordell-Weil rank exactly 1 and its own 2-divisibility is already known.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallerFacts {
    pub rank_exactly_one: bool,
    pub watkins_known_for_base: bool,
}

/// The verdict table as a pure classifier over the finite case grid; the
/// five certified rows and the four open gaps partition it.
pub fn match_case_grid(
    trick: bool,
    c_greater_one: bool,
    q_mod_8: u8,
    a_q_zero: bool,
    facts: CallerFacts,
) -> Verdict {
    debug_assert!(matches!(q_mod_8, 1 | 3 | 5 | 7));
    let q_mod_4 = q_mod_8 % 4;
    let cert = |lemma: &str| Verdict::CertifiedUnconditional {
        lemma: lemma.to_string(),
    };
    if trick && !c_greater_one {
        return cert("trick family with c_E = 1: the identity's left side is divisible by 2^3");
    }
    if trick && c_greater_one {
        if q_mod_8 == 1 {
            return cert("trick family, c_E > 1, q ≡ 1 (mod 8)");
        }
        if q_mod_4 == 3 && a_q_zero {
            return cert("trick family, c_E > 1, supersingular q ≡ 3 (mod 4)");
        }
        if q_mod_4 == 1 && facts.rank_exactly_one && facts.watkins_known_for_base {
            return cert(
                "trick family, c_E > 1, q ≡ 1 (mod 4), rank exactly 1 with the base case \
                 known (caller-asserted facts)",
            );
        }
        if q_mod_8 == 5 {
            return Verdict::Unknown {
                reason: "trick, c_E > 1, q ≡ 5 (mod 8)".into(),
            };
        }
        return Verdict::Unknown {
            reason: "trick, c_E > 1, q ≡ 3 (mod 4), a_q ≠ 0".into(),
        };
    }
    // non-trick families
    if !c_greater_one {
        if a_q_zero {
            return cert("any family, c_E = 1, supersingular q");
        }
        if q_mod_4 == 1 {
            return cert("any family, c_E = 1, ordinary q ≡ 1 (mod 4)");
        }
        return Verdict::Unknown {
            reason: "non-trick, c_E = 1, q ≡ 3 (mod 4), a_q ≠ 0".into(),
        };
    }
    Verdict::Unknown {
        reason: "non-trick, c_E > 1".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistCertificate {
    pub schema: String,
    pub base: String,
    pub base_curve: (Int, Int),
    pub q: Int,
    pub sign: i8,
    pub a_q: Int,
    pub theta: Int,
    /// exact v2 of (q-1)(q+1-a_q)(q+1+a_q); 2^(k-m) only adds
    pub v2_lower: u64,
    pub rank_bound: u32,
    pub conductor_rule: TwistConductorBound,
    pub manin_constant: Int,
    pub modular_degree: Int,
    pub data_provenance: String,
    pub verdict: Verdict,
}

/// Certify (or decline to certify) the 2-divisibility bound for the twists
/// E^(±q) of a family instance; never certifies below the rank bound.
pub fn certify_twist(
    inst: &FamilyInstance,
    data: &CurveData,
    q: &Int,
    sign: i8,
    facts: CallerFacts,
) -> Result<TwistCertificate> {
    if q < &Int::from(5) || !intcore::is_prime(q).unwrap_or(false) {
        return Err(WatkinsError::BadTwistPrime(q.clone()));
    }
    let a_q = curves::a_q(&inst.pair.e, q)?;
    if a_q.is_odd() {
        return Err(WatkinsError::OddTrace(a_q));
    }
    let theta = &a_q / 2;
    let v2 = valuation_lower(q, &a_q)?;
    let trick = is_trick_family(inst.label);
    let rank_bound: u32 = if trick { 3 } else { 4 };
    let c_greater_one = data.manin_constant > Int::from(1);
    let q_mod_8 = u8::try_from(&q.mod_floor(&Int::from(8))).unwrap();
    let verdict = match_case_grid(trick, c_greater_one, q_mod_8, a_q.is_zero(), facts);
    if verdict.is_certified() && v2 < rank_bound as u64 {
        return Err(WatkinsError::Internal {
            v2,
            bound: rank_bound,
        });
    }
    let d = Int::from(sign) * q;
    Ok(TwistCertificate {
        schema: crate::SCHEMA.to_string(),
        base: format!(
            "{}(p={}, k={}, sign={:+})",
            inst.label, inst.p, inst.k, inst.sign
        ),
        base_curve: (inst.pair.e.a.clone(), inst.pair.e.b.clone()),
        q: q.clone(),
        sign,
        a_q,
        theta,
        v2_lower: v2,
        rank_bound,
        conductor_rule: twist_conductor_bound(&d),
        manin_constant: data.manin_constant.clone(),
        modular_degree: data.modular_degree.clone(),
        data_provenance: data.provenance.clone(),
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionAt2 {
    Good,
    Multiplicative,
    Additive,
}

/// The residual gap of the parity form of the conjecture: conductor with at
/// most two odd prime divisors, additive reduction at 2, and a rational
/// 2-torsion point.
pub fn weak_watkins_missing_case(
    conductor_factorization: &[(Int, u32)],
    reduction_at_2: ReductionAt2,
    two_torsion_nontrivial: bool,
) -> bool {
    let odd_primes = conductor_factorization
        .iter()
        .filter(|(p, _)| p.is_odd())
        .count();
    odd_primes <= 2 && reduction_at_2 == ReductionAt2::Additive && two_torsion_nontrivial
}

/// Conditional certificate for the base curve from its rank bound: trivial at
/// bound 0, conditional on BSD or Sha-finiteness at bound 1, absent above.
pub fn conditional_watkins(cert: &RankCertificate) -> Option<String> {
    crate::descent::conditional_watkins_note(cert.final_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::instantiate;
    use std::io::Write;

    fn int(n: i64) -> Int {
        Int::from(n)
    }

    #[test]
    fn valuation_examples() {
        // q = 5, a_q = -2: v2(4 * 8 * 4) = 7
        assert_eq!(valuation_lower(&int(5), &int(-2)).unwrap(), 7);
        // q = 7, a_q = 0: v2(6 * 8 * 8) = 7
        assert_eq!(valuation_lower(&int(7), &int(0)).unwrap(), 7);
        // q = 13, a_q = 2: v2(12 * 12 * 16) = 8
        assert_eq!(valuation_lower(&int(13), &int(2)).unwrap(), 8);
        assert!(valuation_lower(&int(13), &int(3)).is_err());
        assert!(valuation_lower(&int(4), &int(0)).is_err());
    }

    #[test]
    fn valuation_guarantees() {
        for q in [5i64, 7, 11, 13, 17, 19, 23, 29, 37, 41] {
            let max_a = 2 * (q as f64).sqrt() as i64;
            for a in (-max_a..=max_a).filter(|a| a % 2 == 0) {
                let v = valuation_lower(&int(q), &int(a)).unwrap();
                assert!(v >= 3, "q={q} a={a} v={v}");
                if q % 4 == 1 {
                    assert!(v >= 4, "q={q} a={a} v={v}");
                }
                if a == 0 && q % 4 == 3 {
                    assert!(v >= 5, "q={q} v={v}");
                }
            }
        }
    }

    #[test]
    fn conductor_rule_examples() {
        assert!(twist_conductor_bound(&int(29)).k_exact_equals_m);
        assert!(!twist_conductor_bound(&int(7)).k_exact_equals_m);
        // d = -7 ≡ 1 (mod 4)
        assert!(twist_conductor_bound(&int(-7)).k_exact_equals_m);
        assert_eq!(twist_conductor_bound(&int(7)).k_minus_m_lower, 0);
    }

    #[test]
    fn case_grid_is_a_partition() {
        let facts = CallerFacts::default();
        let mut certified = 0;
        let mut reasons = std::collections::BTreeSet::new();
        for trick in [true, false] {
            for c_gt in [true, false] {
                for q8 in [1u8, 3, 5, 7] {
                    for aq0 in [true, false] {
                        match match_case_grid(trick, c_gt, q8, aq0, facts) {
                            Verdict::Unknown { reason } => {
                                reasons.insert(reason);
                            }
                            _ => certified += 1,
                        }
                    }
                }
            }
        }
        // 18 of the 32 grid points land in a certified row, the rest in
        // exactly four open-gap classes
        assert_eq!(certified, 18);
        assert_eq!(reasons.len(), 4);
    }

    #[test]
    fn certify_examples() {
        let inst = instantiate("I".parse().unwrap(), &int(29), 2, 1).unwrap();
        let data = CurveData {
            label: "116c2".into(),
            a: int(5),
            b: int(-1),
            modular_degree: int(15),
            manin_constant: int(1),
            rank: Some(0),
            provenance: "test".into(),
        };
        let cert = certify_twist(&inst, &data, &int(5), 1, CallerFacts::default()).unwrap();
        assert_eq!(cert.a_q, int(-2));
        assert_eq!(cert.v2_lower, 7);
        assert_eq!(cert.rank_bound, 3);
        assert!(cert.verdict.is_certified());

        // bad reduction: q = p
        assert!(matches!(
            certify_twist(&inst, &data, &int(29), 1, CallerFacts::default()),
            Err(WatkinsError::Curve(_))
        ));
        // q too small
        assert!(certify_twist(&inst, &data, &int(3), 1, CallerFacts::default()).is_err());

        // c_E = 2 data with q ≡ 1 (mod 8): second certified row
        let data_c2 = CurveData {
            label: "116c1".into(),
            a: int(5),
            b: int(-1),
            modular_degree: int(30),
            manin_constant: int(2),
            rank: Some(0),
            provenance: "test".into(),
        };
        let cert = certify_twist(&inst, &data_c2, &int(17), 1, CallerFacts::default()).unwrap();
        assert!(matches!(cert.verdict, Verdict::CertifiedUnconditional { .. }));

        // sign does not change the verdict
        let plus = certify_twist(&inst, &data, &int(7), 1, CallerFacts::default()).unwrap();
        let minus = certify_twist(&inst, &data, &int(7), -1, CallerFacts::default()).unwrap();
        assert_eq!(plus.verdict, minus.verdict);
        assert_eq!(plus.a_q, minus.a_q);
    }

    #[test]
    fn missing_case_predicate() {
        let f_116 = vec![(int(2), 2u32), (int(29), 1)];
        assert!(weak_watkins_missing_case(&f_116, ReductionAt2::Additive, true));
        let f_11 = vec![(int(11), 1u32)];
        assert!(!weak_watkins_missing_case(&f_11, ReductionAt2::Multiplicative, true));
        let f_many = vec![(int(2), 4u32), (int(3), 1), (int(5), 1), (int(7), 1)];
        assert!(!weak_watkins_missing_case(&f_many, ReductionAt2::Additive, true));
        assert!(!weak_watkins_missing_case(&f_116, ReductionAt2::Additive, false));
    }

    #[test]
    fn csv_roundtrip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "label,a,b,modular_degree,manin_constant,rank,extra").unwrap();
        writeln!(f, "116c2,5,-1,15,1,0,ignored").unwrap();
        writeln!(f, "328a1,-3,-8,8,1,,x").unwrap();
        let rows = load_csv(f.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].modular_degree, int(15));
        assert_eq!(rows[1].rank, None);
        assert!(find_by_coefficients(&rows, &int(5), &int(-1)).is_some());
        assert!(find_by_coefficients(&rows, &int(5), &int(1)).is_none());

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "label,a,b,modular_degree,manin_constant,rank").unwrap();
        writeln!(bad, "x,1,2,0,1,").unwrap();
        assert!(matches!(load_csv(bad.path()), Err(WatkinsError::BadData(_))));
    }
}
