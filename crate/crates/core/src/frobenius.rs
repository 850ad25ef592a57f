//! Picard number, formal-Brauer height and supersingularity from the
//! characteristic polynomial of (Tate-twisted) geometric Frobenius on H².
//!
//! The Picard number read off here is conditional on the Tate conjecture;
//! the count itself is computed unconditionally from the polynomial.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{
    cyclotomic_polynomial, euler_phi, is_prime, newton_polygon, NewtonPolygon, Rational,
    RationalPoly,
};
use crate::error::{invalid, Error, Result};

/// Height of the formal Brauer group; `Infinite` means supersingular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Height {
    Finite(u32),
    Infinite,
}

impl Height {
    pub fn is_infinite(self) -> bool {
        self == Height::Infinite
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Height {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Height::Finite(h) => s.serialize_u32(*h),
            Height::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Height {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(h) if h > 0 => Ok(Height::Finite(h)),
            Raw::Num(_) => Err(serde::de::Error::custom("height must be positive")),
            Raw::Text(t) if t == "inf" => Ok(Height::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad height {t:?}"))),
        }
    }
}

/// Characteristic polynomial of Frobenius over F_q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrobCharPoly {
    pub q: u64,
    pub p: u64,
    pub poly: RationalPoly,
    /// The input claims to satisfy the functional equation; enables the
    /// slope-symmetry check.
    #[serde(default)]
    pub weil: bool,
}

impl FrobCharPoly {
    pub fn new(p: u64, q: u64, poly: RationalPoly) -> Result<Self> {
        let fp = FrobCharPoly { q, p, poly, weil: false };
        fp.validate()?;
        Ok(fp)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return invalid(format!("{} is not a prime", self.p));
        }
        let mut q = self.q;
        while q > 1 && q % self.p == 0 {
            q /= self.p;
        }
        if q != 1 || self.q == 1 {
            return invalid(format!("q = {} is not a power of p = {}", self.q, self.p));
        }
        if !self.poly.is_monic() {
            return invalid("Frobenius characteristic polynomial must be monic");
        }
        if self.poly.constant_term().is_zero() {
            return invalid("Frobenius characteristic polynomial has zero constant term");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobReport {
    pub picard: u32,
    pub height: Height,
    pub supersingular: bool,
    pub degree: u32,
    pub positive_slope_roots: u32,
    pub negative_slope_roots: u32,
    pub unit_slope_roots: u32,
    pub newton_polygon: NewtonPolygon,
}

/// Total multiplicity of roots of unity among the roots of `poly`, by
/// repeated trial division by Φ_m for every m with φ(m) ≤ deg.
pub fn count_unit_root_multiplicity(poly: &RationalPoly) -> u32 {
    let Some(deg) = poly.degree() else { return 0 };
    let deg = deg as u64;
    // φ(m) ≥ √(m/2), so m ≤ 2·deg² bounds the search.
    let bound = 2 * deg * deg + 2;
    let mut rest = poly.clone();
    let mut count = 0u32;
    for m in 1..=bound {
        let phi = euler_phi(m);
        if phi > deg {
            continue;
        }
        let cyc = cyclotomic_polynomial(m);
        while rest.degree().unwrap_or(0) as u64 >= phi {
            match rest.exact_div(&cyc) {
                Some(q) => {
                    rest = q;
                    count += phi as u32;
                }
                None => break,
            }
        }
    }
    count
}

/// picard ≤ deg − 2·height for finite height (deg = 22 for K3 surfaces).
pub fn check_artin_inequality(report: &FrobReport) -> bool {
    artin_inequality_holds(report.picard, report.height, report.degree)
}

pub fn artin_inequality_holds(picard: u32, height: Height, degree: u32) -> bool {
    match height {
        Height::Infinite => true,
        Height::Finite(h) => picard + 2 * h <= degree,
    }
}

/// Analyzes a Frobenius polynomial. With `strict`, or when the input
/// declares itself a Weil polynomial, the slope multiset must be symmetric.
pub fn analyze(fp: &FrobCharPoly, strict: bool) -> Result<FrobReport> {
    fp.validate()?;
    let degree = fp.poly.degree().expect("monic") as u32;
    let picard = count_unit_root_multiplicity(&fp.poly);
    let np = newton_polygon(&fp.poly, fp.p)?;
    let pos = np.positive_root_count() as u32;
    let neg = np.negative_root_count() as u32;
    let unit = np.unit_root_count() as u32;

    if picard > unit || picard + pos + neg > degree {
        return Err(Error::Internal(format!(
            "root accounting broken: picard {picard}, slopes +{pos}/0:{unit}/-{neg}, degree {degree}"
        )));
    }

    if strict || fp.weil {
        let vals = np.root_valuations();
        let mirrored: Vec<(Rational, usize)> = {
            let mut v: Vec<_> = vals.iter().map(|(s, m)| (-s.clone(), *m)).collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        if vals != mirrored {
            return Err(Error::Inconsistent(
                "slope multiset is not symmetric about 0 for a declared Weil polynomial".into(),
            ));
        }
    }

    let (height, supersingular) = if picard == degree {
        (Height::Infinite, true)
    } else if pos == 0 {
        return Err(Error::Inconsistent(format!(
            "{} roots are not roots of unity yet none has positive valuation",
            degree - picard
        )));
    } else {
        (Height::Finite(pos), false)
    };

    if !artin_inequality_holds(picard, height, degree) {
        return Err(Error::Inconsistent(format!(
            "Artin inequality violated: picard {picard} > {degree} - 2*{height}"
        )));
    }

    Ok(FrobReport {
        picard,
        height,
        supersingular,
        degree,
        positive_slope_roots: pos,
        negative_slope_roots: neg,
        unit_slope_roots: unit,
        newton_polygon: np,
    })
}

/// T² − (p^k + p^{−k})T + 1, whose roots p^k and p^{−k} have valuations ±k.
pub fn slope_quadratic(p: u64, k: u32) -> RationalPoly {
    let pk = Rational::from_integer(num_bigint::BigInt::from(p).pow(k));
    let trace = &pk + pk.recip();
    RationalPoly::new(vec![Rational::one(), -trace, Rational::one()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;

    fn linear_pow(k: u32) -> RationalPoly {
        RationalPoly::from_ints(&[-1, 1]).pow(k)
    }

    #[test]
    fn unit_root_counts() {
        assert_eq!(count_unit_root_multiplicity(&linear_pow(22)), 22);
        let g = &linear_pow(20) * &RationalPoly::from_ints(&[1, -3, 1]);
        assert_eq!(count_unit_root_multiplicity(&g), 20);
        let h = &linear_pow(20) * &cyclotomic_polynomial(4);
        assert_eq!(count_unit_root_multiplicity(&h), 22);
        let mixed = &(&cyclotomic_polynomial(7) * &cyclotomic_polynomial(7))
            * &cyclotomic_polynomial(9);
        assert_eq!(count_unit_root_multiplicity(&mixed), 18);
    }

    #[test]
    fn supersingular_polynomial() {
        let fp = FrobCharPoly::new(3, 3, linear_pow(22)).unwrap();
        let r = analyze(&fp, false).unwrap();
        assert_eq!((r.picard, r.height, r.supersingular), (22, Height::Infinite, true));
    }

    #[test]
    fn height_one_polynomial() {
        let quad = RationalPoly::new(vec![
            Rational::one(),
            parse_rational("-29/5").unwrap(),
            Rational::one(),
        ]);
        let fp = FrobCharPoly::new(5, 5, &linear_pow(20) * &quad).unwrap();
        let r = analyze(&fp, false).unwrap();
        assert_eq!((r.picard, r.height, r.supersingular), (20, Height::Finite(1), false));
        assert!(check_artin_inequality(&r));
    }

    #[test]
    fn quartic_witness() {
        // (T² − 26/5·T + 1)(T² − 3T + 1): roots 5, 1/5 and two non-torsion units.
        let quartic = &slope_quadratic(5, 1) * &RationalPoly::from_ints(&[1, -3, 1]);
        assert_eq!(quartic.coeff(3), parse_rational("-41/5").unwrap());
        let np = newton_polygon(&quartic, 5).unwrap();
        let vals: Vec<_> = np.root_valuations();
        assert_eq!(
            vals,
            vec![
                (parse_rational("-1").unwrap(), 1),
                (parse_rational("0").unwrap(), 2),
                (parse_rational("1").unwrap(), 1)
            ]
        );
        let fp = FrobCharPoly::new(5, 25, &linear_pow(18) * &quartic).unwrap();
        let r = analyze(&fp, true).unwrap();
        assert_eq!((r.picard, r.height), (18, Height::Finite(1)));
    }

    #[test]
    fn artin_inequality() {
        let mk = |picard, height| FrobReport {
            picard,
            height,
            supersingular: height == Height::Infinite,
            degree: 22,
            positive_slope_roots: 0,
            negative_slope_roots: 0,
            unit_slope_roots: 0,
            newton_polygon: NewtonPolygon { prime: 2, segments: vec![] },
        };
        assert!(check_artin_inequality(&mk(20, Height::Finite(1))));
        assert!(check_artin_inequality(&mk(22, Height::Infinite)));
        assert!(!check_artin_inequality(&mk(21, Height::Finite(1))));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FrobCharPoly::new(4, 4, linear_pow(2)).is_err());
        assert!(FrobCharPoly::new(3, 6, linear_pow(2)).is_err());
        assert!(FrobCharPoly::new(3, 3, RationalPoly::from_ints(&[1, 2])).is_err());
        assert!(FrobCharPoly::new(3, 3, RationalPoly::from_ints(&[0, 1])).is_err());
        // Unit roots that are not roots of unity with nothing of positive slope.
        let fp = FrobCharPoly::new(5, 5, &linear_pow(20) * &RationalPoly::from_ints(&[1, -3, 1])).unwrap();
        assert!(matches!(analyze(&fp, false), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn strict_mode_demands_symmetry() {
        // (T − 5)(T − 2): slopes {1, 0}, not symmetric.
        let poly = &linear_pow(20) * &RationalPoly::from_ints(&[10, -7, 1]);
        let fp = FrobCharPoly::new(5, 5, poly).unwrap();
        assert!(analyze(&fp, false).is_ok());
        assert!(matches!(analyze(&fp, true), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn height_serde() {
        assert_eq!(serde_json::to_string(&Height::Infinite).unwrap(), r#""inf""#);
        assert_eq!(serde_json::to_string(&Height::Finite(2)).unwrap(), "2");
        assert_eq!(serde_json::from_str::<Height>("3").unwrap(), Height::Finite(3));
        assert!(serde_json::from_str::<Height>("0").is_err());
    }
}
