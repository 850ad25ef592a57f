//! Even lattices given by Gram matrices, the rank-2 normal form for
//! transcendental lattices of singular K3 surfaces, and the doubling isometry.

use serde::{Deserialize, Serialize};

use crate::arith::{fundamental_discriminant, kronecker_symbol, require_prime, valuation_i64};
use crate::error::{invalid, Result};

/// Symmetric integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct GramMatrix {
    rows: Vec<Vec<i64>>,
}

impl GramMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return invalid("empty Gram matrix");
        }
        if rows.iter().any(|r| r.len() != n) {
            return invalid("Gram matrix is not square");
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return invalid(format!("Gram matrix not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(GramMatrix { rows })
    }

    /// Rank-2 matrix [[a1, a2], [a2, a3]].
    pub fn binary(a1: i64, a2: i64, a3: i64) -> Self {
        GramMatrix { rows: vec![vec![a1, a2], vec![a2, a3]] }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.rows[i][i] % 2 == 0)
    }

    /// Determinant by fraction-free Gaussian elimination (Bareiss).
    pub fn determinant(&self) -> i128 {
        let n = self.rank();
        let mut m: Vec<Vec<i128>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if m[k][k] == 0 {
                match (k + 1..n).find(|&i| m[i][k] != 0) {
                    Some(i) => {
                        m.swap(i, k);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
                }
            }
            prev = m[k][k];
        }
        sign * m[n - 1][n - 1]
    }

    /// Positive definite by leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        (1..=self.rank()).all(|k| {
            let minor = GramMatrix {
                rows: self.rows[..k].iter().map(|r| r[..k].to_vec()).collect(),
            };
            minor.determinant() > 0
        })
    }
}

impl TryFrom<Vec<Vec<i64>>> for GramMatrix {
    type Error = crate::Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        GramMatrix::new(rows)
    }
}

impl From<GramMatrix> for Vec<Vec<i64>> {
    fn from(g: GramMatrix) -> Self {
        g.rows
    }
}

/// disc Pic = a2² − a1·a3 (= −det of the rank-2 transcendental lattice).
pub fn disc_pic(gram: &GramMatrix) -> i64 {
    let (a1, a2, a3) = (gram.entry(0, 0), gram.entry(0, 1), gram.entry(1, 1));
    a2 * a2 - a1 * a3
}

/// a1 = 2pⁿa′1, a3 = 2pⁿa′3 with p ∤ a′1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularNormalForm {
    pub p: u64,
    pub n: u32,
    pub a1p: i64,
    pub a2: i64,
    pub a3p: i64,
    pub disc_pic: i64,
    /// Whether e1 and e2 were exchanged to make p ∤ a′1.
    pub swapped: bool,
}

impl SingularNormalForm {
    fn p_pow_n(&self) -> i64 {
        (self.p as i64).pow(self.n)
    }

    pub fn a1(&self) -> i64 {
        2 * self.p_pow_n() * self.a1p
    }

    pub fn a3(&self) -> i64 {
        2 * self.p_pow_n() * self.a3p
    }
}

fn check_singular_gram(gram: &GramMatrix) -> Result<()> {
    if gram.rank() != 2 {
        return invalid(format!("expected a rank-2 Gram matrix, got rank {}", gram.rank()));
    }
    if !gram.is_even() {
        return invalid("Gram matrix is not even");
    }
    if !gram.is_positive_definite() {
        return invalid("Gram matrix is not positive definite");
    }
    Ok(())
}

pub fn singular_normal_form(gram: &GramMatrix, p: u64) -> Result<SingularNormalForm> {
    require_prime(p)?;
    check_singular_gram(gram)?;
    let disc = disc_pic(gram);
    if disc % p as i64 == 0 {
        return invalid(format!(
            "p = {p} divides disc Pic = {disc}; the singular-K3 criterion requires p not dividing it"
        ));
    }
    let (mut h1, a2, mut h3) = (gram.entry(0, 0) / 2, gram.entry(0, 1), gram.entry(1, 1) / 2);
    let v1 = valuation_i64(h1, p).expect("positive definite");
    let v3 = valuation_i64(h3, p).expect("positive definite");
    let n = v1.min(v3);
    let swapped = v1 > n;
    if swapped {
        std::mem::swap(&mut h1, &mut h3);
    }
    let pn = (p as i64).pow(n);
    Ok(SingularNormalForm {
        p,
        n,
        a1p: h1 / pn,
        a2,
        a3p: h3 / pn,
        disc_pic: disc,
        swapped,
    })
}

/// a′1T² + a2T + p^{2n}a′3 presenting End ⊗ Z_(p).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndomorphismOrder {
    /// Coefficients, constant term first.
    pub poly: [i64; 3],
    pub disc: i64,
    pub field_discriminant: i64,
    pub maximal_at_p: bool,
}

pub fn endomorphism_order(nf: &SingularNormalForm) -> Result<EndomorphismOrder> {
    let p2n = (nf.p as i64).pow(2 * nf.n);
    let poly = [p2n * nf.a3p, nf.a2, nf.a1p];
    let disc = poly[1] * poly[1] - 4 * poly[2] * poly[0];
    debug_assert_eq!(disc, nf.disc_pic);
    Ok(EndomorphismOrder {
        poly,
        disc,
        field_discriminant: fundamental_discriminant(disc)?,
        maximal_at_p: disc % nf.p as i64 != 0,
    })
}

/// True when p does not split in E.
pub fn nonsplit_criterion(nf: &SingularNormalForm) -> bool {
    if nf.p == 2 {
        nf.n == 0 && nf.a3p % 2 != 0
    } else {
        kronecker_symbol(nf.disc_pic, nf.p as i64).expect("p nonzero") == -1
    }
}

/// The lattice with pairing multiplied by 2.
pub fn double_pairing(gram: &GramMatrix) -> GramMatrix {
    GramMatrix {
        rows: gram
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| 2 * x).collect())
            .collect(),
    }
}

/// The hyperbolic plane U.
pub fn hyperbolic_plane() -> GramMatrix {
    GramMatrix::binary(0, 1, 0)
}

/// Orthogonal direct sum.
pub fn direct_sum(a: &GramMatrix, b: &GramMatrix) -> GramMatrix {
    let n = a.rank() + b.rank();
    let mut rows = vec![vec![0i64; n]; n];
    for i in 0..a.rank() {
        rows[i][..a.rank()].copy_from_slice(&a.rows[i]);
    }
    for i in 0..b.rank() {
        rows[a.rank() + i][a.rank()..].copy_from_slice(&b.rows[i]);
    }
    GramMatrix { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{analyze_place, CmFieldSpec};
    use proptest::prelude::*;

    #[test]
    fn normal_forms() {
        let nf = singular_normal_form(&GramMatrix::binary(2, 1, 2), 5).unwrap();
        assert_eq!((nf.n, nf.a1p, nf.a2, nf.a3p, nf.disc_pic), (0, 1, 1, 1, -3));
        let nf = singular_normal_form(&GramMatrix::binary(2, 0, 2), 3).unwrap();
        assert_eq!((nf.n, nf.a1p, nf.a2, nf.a3p, nf.disc_pic), (0, 1, 0, 1, -4));
        let nf = singular_normal_form(&GramMatrix::binary(10, 1, 10), 5).unwrap();
        assert_eq!((nf.n, nf.a1p, nf.a2, nf.a3p, nf.disc_pic), (1, 1, 1, 1, -99));
        assert_eq!((nf.a1(), nf.a3()), (10, 10));
    }

    #[test]
    fn swap_when_first_entry_divisible() {
        let nf = singular_normal_form(&GramMatrix::binary(10, 1, 2), 5).unwrap();
        assert!(nf.swapped);
        assert_eq!((nf.n, nf.a1p, nf.a3p), (0, 1, 5));
        assert_ne!(nf.a1p % 5, 0);
    }

    #[test]
    fn rejections() {
        assert!(singular_normal_form(&GramMatrix::binary(2, 1, 2), 3).is_err());
        assert!(singular_normal_form(&GramMatrix::binary(3, 1, 2), 5).is_err());
        assert!(singular_normal_form(&GramMatrix::binary(2, 3, 2), 7).is_err());
        assert!(singular_normal_form(&GramMatrix::binary(-2, 0, -2), 7).is_err());
        assert!(GramMatrix::new(vec![vec![2, 1], vec![0, 2]]).is_err());
    }

    #[test]
    fn endomorphism_orders() {
        let eo = |a1, a2, a3, p| {
            endomorphism_order(&singular_normal_form(&GramMatrix::binary(a1, a2, a3), p).unwrap())
                .unwrap()
        };
        let o = eo(2, 1, 2, 5);
        assert_eq!((o.poly, o.disc), ([1, 1, 1], -3));
        let o = eo(2, 0, 2, 3);
        assert_eq!((o.poly, o.disc), ([1, 0, 1], -4));
        let o = eo(10, 1, 10, 5);
        assert_eq!((o.poly, o.disc, o.field_discriminant), ([25, 1, 1], -99, -11));
        assert!(o.maximal_at_p);
    }

    #[test]
    fn nonsplit_examples() {
        let nf = |a1, a2, a3, p| singular_normal_form(&GramMatrix::binary(a1, a2, a3), p).unwrap();
        assert!(nonsplit_criterion(&nf(2, 1, 2, 5)));
        assert!(!nonsplit_criterion(&nf(2, 1, 2, 7)));
        assert!(!nonsplit_criterion(&nf(2, 1, 4, 2)));
        assert!(nonsplit_criterion(&nf(2, 1, 2, 2)));
    }

    #[test]
    fn doubling() {
        assert_eq!(double_pairing(&GramMatrix::binary(2, 1, 2)), GramMatrix::binary(4, 2, 4));
        assert_eq!(double_pairing(&hyperbolic_plane()), GramMatrix::binary(0, 2, 0));
        let u2 = direct_sum(&hyperbolic_plane(), &hyperbolic_plane());
        assert_eq!(u2.determinant(), 1);
        assert_eq!(double_pairing(&u2).determinant(), 16);
    }

    #[test]
    fn criterion_agrees_with_splitting_sweep() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            for a1 in (2..=50).step_by(2) {
                for a3 in (2..=50).step_by(2) {
                    for a2 in -50i64..=50 {
                        let g = GramMatrix::binary(a1, a2, a3);
                        if !g.is_positive_definite() || disc_pic(&g) % p as i64 == 0 {
                            continue;
                        }
                        let nf = singular_normal_form(&g, p).unwrap();
                        let d = fundamental_discriminant(nf.disc_pic).unwrap();
                        let inv = analyze_place(&CmFieldSpec::ImagQuadratic { d }, p).unwrap();
                        assert_eq!(nonsplit_criterion(&nf), !inv.split_q_in_e, "{g:?} p={p}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn doubling_scales_determinant(entries in proptest::collection::vec(-9i64..9, 10)) {
            // Symmetric 4x4 from 10 upper-triangular entries, diagonal made even.
            let mut rows = vec![vec![0i64; 4]; 4];
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    let v = if i == j { 2 * entries[k] } else { entries[k] };
                    rows[i][j] = v;
                    rows[j][i] = v;
                    k += 1;
                }
            }
            let g = GramMatrix::new(rows).unwrap();
            let d = double_pairing(&g);
            prop_assert!(d.is_even());
            prop_assert_eq!(d.determinant(), 16 * g.determinant());
        }

        #[test]
        fn order_discriminant_equals_disc_pic(h1 in 1i64..30, h3 in 1i64..30, a2 in -30i64..30, pidx in 0usize..5) {
            let p = [2u64, 3, 5, 7, 11][pidx];
            let g = GramMatrix::binary(2 * h1, a2, 2 * h3);
            prop_assume!(g.is_positive_definite() && disc_pic(&g) % p as i64 != 0);
            let nf = singular_normal_form(&g, p).unwrap();
            let o = endomorphism_order(&nf).unwrap();
            prop_assert_eq!(o.disc, disc_pic(&g));
        }
    }
}
