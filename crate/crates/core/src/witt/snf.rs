//! Smith normal form over the local rings Z/p^N and W(F_{p^m})/p^N.
//!
//! Both rings are quotients of a DVR with uniformizer p, so every nonzero
//! element is p^v · unit and the diagonal is determined by valuations.

use super::ring::{WittApprox, WittElem, ZMod};

pub trait LocalRing {
    type Elem: Clone + PartialEq;

    fn precision(&self) -> u32;
    fn zero(&self) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// ν_p, `precision()` for zero.
    fn valuation(&self, a: &Self::Elem) -> u32;
    /// a / p^v for ν_p(a) ≥ v (any lift of the quotient).
    fn div_p_pow(&self, a: &Self::Elem, v: u32) -> Self::Elem;
    fn unit_inverse(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

impl LocalRing for ZMod {
    type Elem = u64;

    fn precision(&self) -> u32 {
        self.precision
    }
    fn zero(&self) -> u64 {
        0
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        ZMod::sub(self, *a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ZMod::mul(self, *a, *b)
    }
    fn valuation(&self, a: &u64) -> u32 {
        ZMod::valuation(self, *a)
    }
    fn div_p_pow(&self, a: &u64, v: u32) -> u64 {
        ZMod::div_p_pow(self, *a, v)
    }
    fn unit_inverse(&self, a: &u64) -> Option<u64> {
        self.inverse(*a)
    }
}

impl LocalRing for WittApprox {
    type Elem = WittElem;

    fn precision(&self) -> u32 {
        WittApprox::precision(self)
    }
    fn zero(&self) -> WittElem {
        WittApprox::zero(self)
    }
    fn sub(&self, a: &WittElem, b: &WittElem) -> WittElem {
        WittApprox::sub(self, a, b)
    }
    fn mul(&self, a: &WittElem, b: &WittElem) -> WittElem {
        WittApprox::mul(self, a, b)
    }
    fn valuation(&self, a: &WittElem) -> u32 {
        WittApprox::valuation(self, a)
    }
    fn div_p_pow(&self, a: &WittElem, v: u32) -> WittElem {
        WittApprox::div_p_pow(self, a, v)
    }
    fn unit_inverse(&self, a: &WittElem) -> Option<WittElem> {
        self.inverse(a)
    }
}

/// Valuations of the SNF diagonal of a rows × cols matrix, ascending;
/// length min(rows, cols). A value equal to the precision means the entry
/// vanished at this precision.
pub fn snf_diagonal<R: LocalRing>(ring: &R, mut mat: Vec<Vec<R::Elem>>) -> Vec<u32> {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    let n = ring.precision();
    let mut diag = Vec::with_capacity(rows.min(cols));
    for k in 0..rows.min(cols) {
        // Pivot of minimal valuation in the trailing block.
        let mut best = (n, k, k);
        'search: for (i, row) in mat.iter().enumerate().skip(k) {
            for (j, a) in row.iter().enumerate().skip(k) {
                let v = ring.valuation(a);
                if v < best.0 {
                    best = (v, i, j);
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let (v, pi, pj) = best;
        if v >= n {
            diag.extend(std::iter::repeat(n).take(rows.min(cols) - k));
            break;
        }
        mat.swap(k, pi);
        for row in mat.iter_mut() {
            row.swap(k, pj);
        }
        let unit = ring.div_p_pow(&mat[k][k], v);
        let unit_inv = ring.unit_inverse(&unit).expect("pivot has minimal valuation");
        // Clear column k below the pivot.
        for i in k + 1..rows {
            if ring.valuation(&mat[i][k]) >= n {
                continue;
            }
            let factor = ring.mul(&ring.div_p_pow(&mat[i][k], v), &unit_inv);
            for j in k..cols {
                let t = ring.mul(&factor, &mat[k][j]);
                mat[i][j] = ring.sub(&mat[i][j], &t);
            }
        }
        // Row k is now divisible by the pivot; clearing it by column
        // operations leaves the trailing block as is.
        diag.push(v);
    }
    diag.sort_unstable();
    diag
}

/// Length of the cokernel of a square matrix: Σ of diagonal valuations, or
/// `None` if some diagonal entry vanished at this precision.
pub fn cokernel_length(diag: &[u32], precision: u32) -> Option<u32> {
    if diag.iter().any(|&v| v >= precision) {
        None
    } else {
        Some(diag.iter().sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Elementary-divisor oracle over Z via gcds of k×k minors (small sizes).
    fn minors_gcd_valuations(m: &[Vec<i64>], p: u64) -> Vec<u32> {
        use num_bigint::BigInt;
        use num_integer::Integer;
        use num_traits::{Signed, Zero};
        let r = m.len();
        let c = m[0].len();
        fn det(m: &[Vec<BigInt>]) -> BigInt {
            let n = m.len();
            if n == 1 {
                return m[0][0].clone();
            }
            let mut acc = BigInt::zero();
            for j in 0..n {
                let minor: Vec<Vec<BigInt>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = &m[0][j] * det(&minor);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut out = subsets(n - 1, k);
            for mut s in subsets(n - 1, k - 1) {
                s.push(n - 1);
                out.push(s);
            }
            out
        }
        let mut gcds = vec![BigInt::from(1)];
        for k in 1..=r.min(c) {
            let mut g = BigInt::zero();
            for rs in subsets(r, k) {
                for cs in subsets(c, k) {
                    let sub: Vec<Vec<BigInt>> = rs
                        .iter()
                        .map(|&i| cs.iter().map(|&j| BigInt::from(m[i][j])).collect())
                        .collect();
                    g = g.gcd(&det(&sub));
                }
            }
            gcds.push(g.abs());
        }
        let val = |x: &BigInt| -> Option<u32> {
            if x.is_zero() {
                return None;
            }
            let mut x = x.clone();
            let mut v = 0;
            while (&x % p).is_zero() {
                x /= p;
                v += 1;
            }
            Some(v)
        };
        (1..gcds.len())
            .map(|k| match (val(&gcds[k]), val(&gcds[k - 1])) {
                (Some(a), Some(b)) => a - b,
                _ => u32::MAX,
            })
            .collect()
    }

    #[test]
    fn diagonal_example() {
        let zm = ZMod::new(3, 6).unwrap();
        let m = vec![vec![3, 0], vec![0, 9]];
        assert_eq!(snf_diagonal(&zm, m), vec![1, 2]);
        let m = vec![vec![0u64, 0], vec![0, 0]];
        assert_eq!(snf_diagonal(&zm, m.clone()), vec![6, 6]);
        assert_eq!(cokernel_length(&snf_diagonal(&zm, m), 6), None);
    }

    proptest! {
        #[test]
        fn matches_minor_gcds(
            p in prop::sample::select(vec![2u64, 3, 5]),
            entries in prop::collection::vec(-30i64..30, 9),
        ) {
            let m: Vec<Vec<i64>> = entries.chunks(3).map(<[i64]>::to_vec).collect();
            let oracle = minors_gcd_valuations(&m, p);
            let n = 12;
            let zm = ZMod::new(p, n).unwrap();
            let red: Vec<Vec<u64>> =
                m.iter().map(|r| r.iter().map(|&a| zm.reduce_i64(a)).collect()).collect();
            let got = snf_diagonal(&zm, red);
            let expect: Vec<u32> = {
                let mut e: Vec<u32> = oracle.iter().map(|&v| v.min(n)).collect();
                e.sort_unstable();
                e
            };
            prop_assert_eq!(got, expect);
        }
    }
}
