use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::{require_prime, valuation, Rational, RationalPoly, Valuation};
use crate::error::{invalid, Result};

/// One edge of a Newton polygon: hull slope and horizontal length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(with = "rational_str")]
    pub slope: Rational,
    pub length: usize,
}

/// Lower convex hull of {(i, ν(c_i))}. Segment slopes are strictly
/// increasing; a root of valuation v contributes to the segment of slope −v.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    pub prime: u64,
    pub segments: Vec<Segment>,
}

impl NewtonPolygon {
    /// Root valuations with multiplicity, as (valuation, multiplicity),
    /// sorted by valuation.
    pub fn root_valuations(&self) -> Vec<(Rational, usize)> {
        let mut out: Vec<_> = self
            .segments
            .iter()
            .map(|s| (-s.slope.clone(), s.length))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Number of roots (with multiplicity) of strictly positive valuation.
    pub fn positive_root_count(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.slope.is_negative())
            .map(|s| s.length)
            .sum()
    }

    pub fn negative_root_count(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.slope.is_positive())
            .map(|s| s.length)
            .sum()
    }

    pub fn unit_root_count(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.slope == Rational::from_integer(BigInt::from(0)))
            .map(|s| s.length)
            .sum()
    }

    pub fn degree(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }
}

/// Newton polygon of `poly` at `p`.
///
/// Rejects the zero polynomial and polynomials with zero constant term,
/// whose root valuations are unbounded.
pub fn newton_polygon(poly: &RationalPoly, p: u64) -> Result<NewtonPolygon> {
    require_prime(p)?;
    if poly.is_zero() {
        return invalid("newton polygon of the zero polynomial");
    }
    if poly.constant_term() == Rational::from_integer(BigInt::from(0)) {
        return invalid("newton polygon needs a nonzero constant term");
    }
    let points: Vec<(i64, i64)> = poly
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match valuation(c, p) {
            Valuation::Finite(v) => Some((i as i64, v)),
            Valuation::Infinite => None,
        })
        .collect();

    // Monotone chain; points already sorted by abscissa. Collinear middle
    // points are dropped so slopes come out strictly increasing.
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(points.len());
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) as i128 * (pt.1 - a.1) as i128
                - (b.1 - a.1) as i128 * (pt.0 - a.0) as i128;
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    let segments = hull
        .windows(2)
        .map(|w| {
            let dx = w[1].0 - w[0].0;
            let dy = w[1].1 - w[0].1;
            Segment {
                slope: Rational::new(BigInt::from(dy), BigInt::from(dx)),
                length: dx as usize,
            }
        })
        .collect();
    Ok(NewtonPolygon { prime: p, segments })
}

pub(crate) mod rational_str {
    use super::Rational;
    use crate::arith::{format_rational, parse_rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{cyclotomic_polynomial, parse_rational};
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    /// Brute-force lower hull: an edge between points i < j belongs to the
    /// hull iff every point lies on or above the line and no point strictly
    /// between them lies on it.
    fn brute_force_hull(points: &[(i64, i64)]) -> Vec<(Rational, usize)> {
        let mut vertices = vec![points[0]];
        let mut cur = 0;
        while cur + 1 < points.len() {
            let mut next = None;
            for j in (cur + 1..points.len()).rev() {
                let (x0, y0) = points[cur];
                let (x1, y1) = points[j];
                let ok = points.iter().all(|&(x, y)| {
                    (y - y0) as i128 * (x1 - x0) as i128 >= (y1 - y0) as i128 * (x - x0) as i128
                });
                if ok {
                    next = Some(j);
                    break;
                }
            }
            let j = next.unwrap();
            vertices.push(points[j]);
            cur = j;
        }
        vertices
            .windows(2)
            .map(|w| {
                (
                    Rational::new(BigInt::from(w[1].1 - w[0].1), BigInt::from(w[1].0 - w[0].0)),
                    (w[1].0 - w[0].0) as usize,
                )
            })
            .collect()
    }

    #[test]
    fn supersingular_quadratic() {
        // 25 - 5T + T^2 at 5: points (0,2),(1,1),(2,0) are collinear.
        let np = newton_polygon(&RationalPoly::from_ints(&[25, -5, 1]), 5).unwrap();
        assert_eq!(np.segments, vec![Segment { slope: q("-1"), length: 2 }]);
        assert_eq!(np.root_valuations(), vec![(q("1"), 2)]);
        assert_eq!(
            brute_force_hull(&[(0, 2), (1, 1), (2, 0)]),
            vec![(q("-1"), 2)]
        );
    }

    #[test]
    fn unit_root() {
        for p in [2, 3, 5, 101] {
            let np = newton_polygon(&RationalPoly::from_ints(&[-1, 1]), p).unwrap();
            assert_eq!(np.segments, vec![Segment { slope: q("0"), length: 1 }]);
        }
    }

    #[test]
    fn split_slopes() {
        let poly = RationalPoly::new(vec![q("1"), q("-29/5"), q("1")]);
        let np = newton_polygon(&poly, 5).unwrap();
        assert_eq!(
            np.segments,
            vec![
                Segment { slope: q("-1"), length: 1 },
                Segment { slope: q("1"), length: 1 }
            ]
        );
        assert_eq!(np.positive_root_count(), 1);
        assert_eq!(np.negative_root_count(), 1);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(newton_polygon(&RationalPoly::zero(), 3).is_err());
        assert!(newton_polygon(&RationalPoly::from_ints(&[0, 1, 1]), 3).is_err());
        assert!(newton_polygon(&RationalPoly::from_ints(&[1, 1]), 4).is_err());
    }

    #[test]
    fn fractional_slopes() {
        // T^2 - p has two roots of valuation 1/2.
        let np = newton_polygon(&RationalPoly::from_ints(&[-3, 0, 1]), 3).unwrap();
        assert_eq!(np.segments, vec![Segment { slope: q("-1/2"), length: 2 }]);
    }

    /// Monic integer polynomial from integer roots, with the root valuation
    /// multiset known by construction.
    fn from_roots(roots: &[i64]) -> RationalPoly {
        roots.iter().fold(RationalPoly::one(), |acc, &r| {
            &acc * &RationalPoly::from_ints(&[-r, 1])
        })
    }

    proptest! {
        #[test]
        fn root_valuations_match_construction(
            roots in proptest::collection::vec(
                (1i64..30, 0u32..4, prop::bool::ANY), 1..7),
            pidx in 0usize..3,
        ) {
            let p = [2i64, 3, 5][pidx];
            let mut ints = Vec::new();
            let mut expected: Vec<i64> = Vec::new();
            for (unit, k, neg) in roots {
                let u = if unit % p == 0 { unit + 1 } else { unit };
                let r = u * p.pow(k) * if neg { -1 } else { 1 };
                ints.push(r);
                expected.push(k as i64);
            }
            let np = newton_polygon(&from_roots(&ints), p as u64).unwrap();
            let mut got: Vec<i64> = Vec::new();
            for (v, m) in np.root_valuations() {
                prop_assert!(v.is_integer());
                for _ in 0..m {
                    got.push(v.to_integer().try_into().unwrap());
                }
            }
            expected.sort();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn slopes_of_products_are_unions(
            a in proptest::collection::vec(-40i64..40, 2..5),
            b in proptest::collection::vec(-40i64..40, 2..5),
        ) {
            let mut a = a; let mut b = b;
            if a[0] == 0 { a[0] = 1; }
            if b[0] == 0 { b[0] = 1; }
            let pa = RationalPoly::from_ints(&a);
            let pb = RationalPoly::from_ints(&b);
            prop_assume!(!pa.is_zero() && pa.degree() > Some(0));
            prop_assume!(!pb.is_zero() && pb.degree() > Some(0));
            for p in [2u64, 3, 5] {
                let expand = |np: NewtonPolygon| {
                    let mut v: Vec<Rational> = Vec::new();
                    for s in np.segments { for _ in 0..s.length { v.push(s.slope.clone()); } }
                    v
                };
                let mut union = expand(newton_polygon(&pa, p).unwrap());
                union.extend(expand(newton_polygon(&pb, p).unwrap()));
                union.sort();
                let prod = expand(newton_polygon(&(&pa * &pb), p).unwrap());
                prop_assert_eq!(prod, union);
            }
        }

        #[test]
        fn hull_matches_brute_force(vals in proptest::collection::vec(-6i64..6, 2..12)) {
            let mut coeffs = Vec::new();
            for (i, v) in vals.iter().enumerate() {
                let c = if *v >= 0 {
                    Rational::from_integer(BigInt::from(3i64.pow(*v as u32) * (1 + (i as i64 % 2))))
                } else {
                    Rational::new(BigInt::from(1 + (i as i64 % 2)), BigInt::from(3i64.pow((-v) as u32)))
                };
                coeffs.push(c);
            }
            let poly = RationalPoly::new(coeffs);
            let points: Vec<(i64, i64)> = vals.iter().enumerate().map(|(i, v)| (i as i64, *v)).collect();
            let np = newton_polygon(&poly, 3).unwrap();
            let got: Vec<(Rational, usize)> = np.segments.into_iter().map(|s| (s.slope, s.length)).collect();
            prop_assert_eq!(got, brute_force_hull(&points));
        }
    }

    #[test]
    fn cyclotomic_polys_are_unit_roots() {
        for m in 1..30 {
            let np = newton_polygon(&cyclotomic_polynomial(m), 3).unwrap();
            assert_eq!(np.unit_root_count(), np.degree());
        }
    }
}
