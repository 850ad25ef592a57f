//! CM fields in three families and the splitting of a rational prime in the
//! CM field E and its totally real subfield F.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{
    euler_phi, exact_sqrt, fundamental_discriminant, is_fundamental_discriminant,
    kronecker_symbol, multiplicative_order, require_prime, valuation_i64,
};
use crate::error::{invalid, Error, Result};

/// A CM field E given by finite data. F is the maximal totally real subfield.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CmFieldSpec {
    /// Q(√D), D a negative fundamental discriminant. F = Q.
    ImagQuadratic { d: i64 },
    /// Q(√D1, √D2) for distinct negative fundamental discriminants.
    /// F = Q(√D3) with D3 the discriminant of Q(√(D1·D2)).
    Biquadratic { d1: i64, d2: i64 },
    /// Q(ζ_N), N ≥ 3, N ≢ 2 mod 4.
    Cyclotomic { n: u64 },
}

impl CmFieldSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CmFieldSpec::ImagQuadratic { d } => {
                if d >= 0 || !is_fundamental_discriminant(d) {
                    return invalid(format!("{d} is not a negative fundamental discriminant"));
                }
            }
            CmFieldSpec::Biquadratic { d1, d2 } => {
                for d in [d1, d2] {
                    if d >= 0 || !is_fundamental_discriminant(d) {
                        return invalid(format!("{d} is not a negative fundamental discriminant"));
                    }
                }
                if d1 == d2 {
                    return invalid("biquadratic field needs distinct discriminants");
                }
            }
            CmFieldSpec::Cyclotomic { n } => {
                if n < 3 || n % 4 == 2 {
                    return invalid(format!("cyclotomic conductor {n} must be >= 3 and not 2 mod 4"));
                }
            }
        }
        Ok(())
    }

    /// [E:Q].
    pub fn degree(&self) -> u64 {
        match *self {
            CmFieldSpec::ImagQuadratic { .. } => 2,
            CmFieldSpec::Biquadratic { .. } => 4,
            CmFieldSpec::Cyclotomic { n } => euler_phi(n),
        }
    }

    /// Discriminant of the real quadratic subfield of a biquadratic field.
    pub fn real_subfield_discriminant(&self) -> Option<i64> {
        match *self {
            CmFieldSpec::Biquadratic { d1, d2 } => fundamental_discriminant(d1 * d2).ok(),
            _ => None,
        }
    }
}

impl fmt::Display for CmFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmFieldSpec::ImagQuadratic { d } => write!(f, "Q(sqrt({d}))"),
            CmFieldSpec::Biquadratic { d1, d2 } => write!(f, "Q(sqrt({d1}), sqrt({d2}))"),
            CmFieldSpec::Cyclotomic { n } => write!(f, "Q(zeta_{n})"),
        }
    }
}

/// Behaviour of the place 𝔮 of F in the quadratic extension E/F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeSplitting {
    Split,
    Inert,
    Ramified,
}

/// Splitting data of p in E (place 𝔭) and in F (place 𝔮 below 𝔭).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceInvariants {
    pub p: u64,
    pub field_degree: u64,
    pub split_q_in_e: bool,
    pub relative: RelativeSplitting,
    pub e_q: u64,
    pub f_q: u64,
    /// Number of places of F above p.
    pub g_q: u64,
    pub e_p: u64,
    pub f_p: u64,
    /// Number of places of E above p.
    pub g_p: u64,
    /// [E_{𝔭,0} : Q_p], the inertia degree of 𝔭.
    pub d: u64,
    /// Ramification index of E_𝔭 over Q_p.
    pub e: u64,
    /// [k(𝔮) : F_p].
    pub kq_degree: u64,
    /// [E_𝔭 : Q_p].
    pub local_degree: u64,
}

impl PlaceInvariants {
    /// Whether E_𝔭/F_𝔮 is ramified.
    pub fn ramified_over_f(&self) -> bool {
        self.e_p > self.e_q
    }
}

/// (e, f, g) of p in the quadratic field of discriminant `disc`.
fn quadratic_efg(disc: i64, p: u64) -> (u64, u64, u64) {
    match kronecker_symbol(disc, p as i64).expect("p is nonzero") {
        1 => (1, 1, 2),
        -1 => (1, 2, 1),
        _ => (2, 1, 1),
    }
}

fn assemble(p: u64, degree: u64, efg_p: (u64, u64, u64), efg_q: (u64, u64, u64)) -> PlaceInvariants {
    let (e_p, f_p, g_p) = efg_p;
    let (e_q, f_q, g_q) = efg_q;
    let relative = if e_p > e_q {
        RelativeSplitting::Ramified
    } else if f_p > f_q {
        RelativeSplitting::Inert
    } else {
        RelativeSplitting::Split
    };
    PlaceInvariants {
        p,
        field_degree: degree,
        split_q_in_e: relative == RelativeSplitting::Split,
        relative,
        e_q,
        f_q,
        g_q,
        e_p,
        f_p,
        g_p,
        d: f_p,
        e: e_p,
        kq_degree: f_q,
        local_degree: e_p * f_p,
    }
}

/// Splitting and ramification data of p in E and F.
pub fn analyze_place(spec: &CmFieldSpec, p: u64) -> Result<PlaceInvariants> {
    spec.validate()?;
    require_prime(p)?;
    let degree = spec.degree();
    let inv = match *spec {
        CmFieldSpec::ImagQuadratic { d } => assemble(p, degree, quadratic_efg(d, p), (1, 1, 1)),
        CmFieldSpec::Biquadratic { d1, d2 } => {
            let d3 = fundamental_discriminant(d1 * d2)?;
            let sub = [quadratic_efg(d1, p), quadratic_efg(d2, p), quadratic_efg(d3, p)];
            let ramified = sub.iter().filter(|t| t.0 == 2).count();
            let efg_p = match ramified {
                0 if sub.iter().all(|t| t.2 == 2) => (1, 1, 4),
                0 => (1, 2, 2),
                2 => {
                    let unram = sub.iter().find(|t| t.0 == 1).expect("one unramified subfield");
                    (2, unram.1, 2 / unram.1)
                }
                3 => (4, 1, 1),
                _ => {
                    return Err(Error::Internal(format!(
                        "p = {p} ramified in exactly one quadratic subfield of {spec}"
                    )))
                }
            };
            assemble(p, degree, efg_p, sub[2])
        }
        CmFieldSpec::Cyclotomic { n } => {
            let a = valuation_i64(n as i64, p).expect("n > 0");
            let pa = p.pow(a);
            let n_prime = n / pa;
            let e_p = euler_phi(pa);
            let f_p = multiplicative_order(p % n_prime.max(1), n_prime);
            let g_p = euler_phi(n_prime) / f_p;
            let efg_q = if n_prime <= 2 {
                // -1 lies in the inertia group: E/F ramified above p.
                (e_p / 2, f_p, g_p)
            } else {
                let minus_one = n_prime - 1;
                let mut x = 1u64;
                let mut hits = false;
                for _ in 0..f_p {
                    x = ((x as u128 * p as u128) % n_prime as u128) as u64;
                    if x == minus_one {
                        hits = true;
                        break;
                    }
                }
                if hits {
                    (e_p, f_p / 2, g_p)
                } else {
                    (e_p, f_p, g_p / 2)
                }
            };
            assemble(p, degree, (e_p, f_p, g_p), efg_q)
        }
    };
    Ok(inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    Violated,
}

/// With both assumptions in force, E_𝔭/F_𝔮 must be unramified. A ramified
/// configuration together with both assumptions is contradictory data.
pub fn check_unramified_consistency(
    inv: &PlaceInvariants,
    disc_pic_coprime_to_p: bool,
    order_maximal_at_p: bool,
) -> Consistency {
    if disc_pic_coprime_to_p && order_maximal_at_p && inv.ramified_over_f() {
        Consistency::Violated
    } else {
        Consistency::Consistent
    }
}

/// Whether Q_2(√c)/Q_2 is a totally ramified quadratic extension.
pub fn is_ramified_over_q2(c: i64) -> bool {
    if c == 0 {
        return false;
    }
    let mut c0 = c;
    while c0 % 4 == 0 {
        c0 /= 4;
    }
    if c0 % 2 != 0 {
        c0.rem_euclid(4) == 3
    } else {
        // c0 = 2·odd
        true
    }
}

/// Checks at precision 2^N that the norms x² − c·y² from Z_2[√c] generate
/// Z/2^N additively, for a totally ramified Q_2(√c).
pub fn norm_generation_check(c: i64, precision: u32) -> Result<bool> {
    if precision == 0 || precision > 16 {
        return invalid(format!("precision {precision} outside 1..=16"));
    }
    if !is_ramified_over_q2(c) {
        return invalid(format!("Q_2(sqrt {c}) is not a ramified quadratic extension of Q_2"));
    }
    let modulus = 1i64 << precision;
    let cm = c.rem_euclid(modulus);
    let mut generated = modulus;
    'outer: for x in 0..modulus {
        let x2 = (x * x) % modulus;
        for y in 0..modulus {
            let v = (x2 - cm * ((y * y) % modulus) % modulus).rem_euclid(modulus);
            generated = num_integer::gcd(generated, v);
            if generated == 1 {
                break 'outer;
            }
        }
    }
    Ok(generated == 1)
}

/// Index of Z[O_{K1}·O_{K2}] in the maximal order of the compositum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderIndex {
    pub index: u64,
    pub disc_e: i64,
    pub p_divides_index: bool,
}

impl OrderIndex {
    pub fn maximal_at_p(&self) -> bool {
        !self.p_divides_index
    }
}

/// index² = D1²·D2² / disc(E), disc(E) = D1·D2·D3 (conductor–discriminant).
pub fn biquadratic_order_index_at_p(d1: i64, d2: i64, p: u64) -> Result<OrderIndex> {
    CmFieldSpec::Biquadratic { d1, d2 }.validate()?;
    require_prime(p)?;
    let d3 = fundamental_discriminant(d1 * d2)?;
    let disc_e = d1 as i128 * d2 as i128 * d3 as i128;
    let num = (d1 as i128 * d2 as i128).pow(2);
    if num % disc_e != 0 {
        return Err(Error::Internal(format!("disc(E) = {disc_e} does not divide {num}")));
    }
    let sq = num / disc_e;
    let index = exact_sqrt(sq)
        .ok_or_else(|| Error::Internal(format!("index^2 = {sq} is not a square")))?;
    Ok(OrderIndex {
        index: index as u64,
        disc_e: disc_e as i64,
        p_divides_index: index % p as i128 == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;

    fn iq(d: i64) -> CmFieldSpec {
        CmFieldSpec::ImagQuadratic { d }
    }

    #[test]
    fn gaussian_field() {
        let at5 = analyze_place(&iq(-4), 5).unwrap();
        assert!(at5.split_q_in_e);
        assert_eq!((at5.local_degree, at5.kq_degree), (1, 1));

        let at3 = analyze_place(&iq(-4), 3).unwrap();
        assert!(!at3.split_q_in_e);
        assert_eq!((at3.e_p, at3.f_p, at3.d, at3.kq_degree), (1, 2, 2, 1));

        let at2 = analyze_place(&iq(-4), 2).unwrap();
        assert_eq!(at2.relative, RelativeSplitting::Ramified);
    }

    #[test]
    fn counterexample_field_at_five() {
        let spec = CmFieldSpec::Biquadratic { d1: -20, d2: -15 };
        assert_eq!(spec.real_subfield_discriminant(), Some(12));
        let inv = analyze_place(&spec, 5).unwrap();
        assert_eq!(inv.f_q, 2);
        assert_eq!((inv.e_p, inv.f_p), (2, 2));
        assert!(!inv.split_q_in_e);
        assert_eq!(inv.kq_degree, 2);
        assert_eq!(inv.g_p, 1);
    }

    #[test]
    fn consistency_check() {
        let inert = analyze_place(&iq(-4), 3).unwrap();
        assert_eq!(check_unramified_consistency(&inert, true, true), Consistency::Consistent);
        let ram = analyze_place(&iq(-20), 5).unwrap();
        assert_eq!(check_unramified_consistency(&ram, true, true), Consistency::Violated);
        assert_eq!(check_unramified_consistency(&ram, false, true), Consistency::Consistent);
        assert_eq!(check_unramified_consistency(&ram, true, false), Consistency::Consistent);
    }

    #[test]
    fn norm_generation() {
        assert!(norm_generation_check(-1, 6).unwrap());
        assert!(norm_generation_check(2, 6).unwrap());
        assert!(norm_generation_check(-1, 1).unwrap());
        assert!(norm_generation_check(17, 6).is_err());
        assert!(norm_generation_check(5, 6).is_err());
        assert!(norm_generation_check(-2, 8).unwrap());
        assert!(norm_generation_check(6, 8).unwrap());
    }

    #[test]
    fn order_indices() {
        let idx = biquadratic_order_index_at_p(-20, -15, 5).unwrap();
        assert_eq!(idx.index, 5);
        assert!(idx.p_divides_index);
        let idx = biquadratic_order_index_at_p(-4, -3, 5).unwrap();
        assert_eq!(idx.index, 1);
        assert!(idx.maximal_at_p());
        assert!(biquadratic_order_index_at_p(-20, -15, 7).unwrap().maximal_at_p());
        assert!(biquadratic_order_index_at_p(-20, -20, 7).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(analyze_place(&iq(-5), 3).is_err());
        assert!(analyze_place(&iq(5), 3).is_err());
        assert!(analyze_place(&CmFieldSpec::Cyclotomic { n: 6 }, 3).is_err());
        assert!(analyze_place(&iq(-4), 9).is_err());
    }

    fn specs() -> Vec<CmFieldSpec> {
        let discs: Vec<i64> = (-60..0).filter(|&d| is_fundamental_discriminant(d)).collect();
        let mut out: Vec<CmFieldSpec> = discs.iter().map(|&d| iq(d)).collect();
        for (i, &a) in discs.iter().enumerate() {
            for &b in &discs[i + 1..] {
                out.push(CmFieldSpec::Biquadratic { d1: a, d2: b });
            }
        }
        out.extend(
            (3..=70)
                .filter(|n| n % 4 != 2)
                .map(|n| CmFieldSpec::Cyclotomic { n }),
        );
        out
    }

    #[test]
    fn fundamental_identity() {
        for spec in specs() {
            for p in (2..60).filter(|&p| is_prime(p)) {
                let inv = analyze_place(&spec, p).unwrap();
                assert_eq!(inv.e_p * inv.f_p * inv.g_p, spec.degree(), "{spec} at {p}");
                assert_eq!(inv.e_q * inv.f_q * inv.g_q, spec.degree() / 2, "{spec} at {p}");
                assert_eq!(inv.e_p % inv.e_q, 0);
                assert_eq!(inv.f_p % inv.f_q, 0);
                if inv.split_q_in_e {
                    assert_eq!((inv.e_p, inv.f_p), (inv.e_q, inv.f_q));
                    assert_eq!(inv.g_p, 2 * inv.g_q);
                }
                if inv.relative == RelativeSplitting::Inert {
                    assert_eq!(inv.d % 2, 0);
                }
            }
        }
    }

    #[test]
    fn imag_quadratic_matches_kronecker() {
        for spec in specs().into_iter().filter(|s| matches!(s, CmFieldSpec::ImagQuadratic { .. })) {
            let CmFieldSpec::ImagQuadratic { d } = spec else { unreachable!() };
            for p in (2..100).filter(|&p| is_prime(p)) {
                let inv = analyze_place(&spec, p).unwrap();
                let k = kronecker_symbol(d, p as i64).unwrap();
                let rel = match k {
                    1 => RelativeSplitting::Split,
                    -1 => RelativeSplitting::Inert,
                    _ => RelativeSplitting::Ramified,
                };
                assert_eq!(inv.relative, rel);
            }
        }
    }

    #[test]
    fn cyclotomic_residue_degree_by_brute_force() {
        for n in (3u64..=80).filter(|n| n % 4 != 2) {
            for p in (2..40).filter(|&p| is_prime(p)) {
                let inv = analyze_place(&CmFieldSpec::Cyclotomic { n }, p).unwrap();
                let mut np = n;
                while np % p == 0 {
                    np /= p;
                }
                // Smallest k with p^k ≡ 1 mod N' by plain powering.
                let mut k = 1u32;
                while np > 1 && num_bigint::BigInt::from(p).pow(k) % np != num_bigint::BigInt::from(1) {
                    k += 1;
                }
                assert_eq!(inv.f_p, k as u64, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn serde_shape() {
        let spec: CmFieldSpec = serde_json::from_str(r#"{"type":"biquadratic","d1":-20,"d2":-15}"#).unwrap();
        assert_eq!(spec, CmFieldSpec::Biquadratic { d1: -20, d2: -15 });
        assert!(serde_json::from_str::<CmFieldSpec>(r#"{"type":"imag_quadratic","d":-4,"x":1}"#).is_err());
    }
}
