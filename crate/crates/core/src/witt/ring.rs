//! W(F_{p^m}) / p^N realized as (Z/p^N)[X]/(f) with f a monic lift of an
//! irreducible polynomial over F_p, and its Frobenius lift.

use crate::arith::require_prime;
use crate::error::{invalid, Error, Result};

/// Element of the Witt approximation: coefficients of 1, X, …, X^{m−1},
/// each reduced mod p^N.
pub type WittElem = Vec<u64>;

/// Arithmetic mod p^N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZMod {
    pub p: u64,
    pub precision: u32,
    pub modulus: u64,
}

impl ZMod {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        require_prime(p)?;
        if precision == 0 {
            return invalid("precision must be at least 1");
        }
        let modulus = (p as u128)
            .checked_pow(precision)
            .filter(|&m| m < (1u128 << 63))
            .ok_or_else(|| {
                Error::InvalidInput(format!("p^N = {p}^{precision} does not fit in 63 bits"))
            })?;
        Ok(ZMod { p, precision, modulus: modulus as u64 })
    }

    #[inline]
    pub fn reduce_i64(&self, a: i64) -> u64 {
        (a as i128).rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.modulus as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    /// ν_p of a residue; `precision` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.precision;
        }
        let mut v = 0;
        let mut a = a;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// a / p^v for a divisible by p^v; the result is determined mod p^{N−v}.
    pub fn div_p_pow(&self, a: u64, v: u32) -> u64 {
        let pv = self.p.pow(v);
        debug_assert_eq!(a % pv, 0);
        a / pv
    }

    pub fn p_pow(&self, v: u32) -> u64 {
        if v >= self.precision {
            0
        } else {
            self.p.pow(v)
        }
    }

    /// Inverse of a unit by Newton iteration from the inverse mod p.
    pub fn inverse(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            return None;
        }
        let inv_p = inverse_mod_prime(a % self.p, self.p);
        let mut x = inv_p;
        for _ in 0..=self.precision.ilog2() + 1 {
            // x ← x(2 − a x)
            let ax = self.mul(a, x);
            x = self.mul(x, self.sub(2 % self.modulus, ax));
        }
        debug_assert_eq!(self.mul(a, x), 1 % self.modulus);
        Some(x)
    }
}

fn inverse_mod_prime(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(p as i128) as u64
}

// --- polynomials over F_p, used only to find an irreducible modulus ---

fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let db = b.len() - 1;
    let inv_lead = inverse_mod_prime(b[db], p);
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = r[r.len() - 1] * inv_lead % p;
        for (j, &bj) in b.iter().enumerate() {
            r[k + j] = (r[k + j] + p * p - c * bj % p) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    fp_rem(&out, f, p)
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or: f of degree m is irreducible iff gcd(f, X^{p^i} − X) = 1 for
/// i = 1..m/2.
fn fp_is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let x = vec![0, 1];
    let mut xp = x.clone();
    for _ in 1..=m / 2 {
        // xp ← xp^p
        let mut acc = vec![1u64];
        for _ in 0..p {
            acc = fp_mulmod(&acc, &xp, f, p);
        }
        xp = acc;
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = fp_gcd(f, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Lexicographically first monic irreducible polynomial of degree m over
/// F_p (coefficients low to high, leading 1 included).
pub fn first_irreducible(p: u64, m: u32) -> Vec<u64> {
    let m = m as usize;
    let mut c = vec![0u64; m];
    loop {
        let mut f = c.clone();
        f.push(1);
        if fp_is_irreducible(&f, p) {
            return f;
        }
        // increment base-p counter
        let mut i = 0;
        loop {
            c[i] += 1;
            if c[i] < p {
                break;
            }
            c[i] = 0;
            i += 1;
            assert!(i < m, "irreducible polynomials exist in every degree");
        }
    }
}

/// W(F_{p^m}) / p^N with Frobenius.
#[derive(Debug, Clone)]
pub struct WittApprox {
    pub zm: ZMod,
    pub m: u32,
    /// Monic modulus f, length m + 1, reduced mod p^N.
    pub modulus_poly: Vec<u64>,
    /// φ(X): the root of f congruent to X^p mod p.
    frob_x: WittElem,
}

impl WittApprox {
    pub fn new(p: u64, m: u32, precision: u32) -> Result<Self> {
        if m == 0 {
            return invalid("residue degree must be at least 1");
        }
        let zm = ZMod::new(p, precision)?;
        let modulus_poly = first_irreducible(p, m);
        let mut ring = WittApprox { zm, m, modulus_poly, frob_x: Vec::new() };
        ring.frob_x = ring.lift_frobenius()?;
        Ok(ring)
    }

    pub fn p(&self) -> u64 {
        self.zm.p
    }

    pub fn precision(&self) -> u32 {
        self.zm.precision
    }

    pub fn zero(&self) -> WittElem {
        vec![0; self.m as usize]
    }

    pub fn from_int(&self, a: i64) -> WittElem {
        let mut e = self.zero();
        e[0] = self.zm.reduce_i64(a);
        e
    }

    pub fn one(&self) -> WittElem {
        self.from_int(1)
    }

    /// The generator X (only meaningful for m ≥ 2).
    pub fn generator(&self) -> WittElem {
        let mut e = self.zero();
        if self.m >= 2 {
            e[1] = 1;
        } else {
            // m = 1: X is the root of the linear modulus.
            e[0] = self.zm.neg(self.modulus_poly[0]);
        }
        e
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> WittElem {
        a.iter().zip(b).map(|(&x, &y)| self.zm.add(x, y)).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> WittElem {
        a.iter().zip(b).map(|(&x, &y)| self.zm.sub(x, y)).collect()
    }

    pub fn neg(&self, a: &[u64]) -> WittElem {
        a.iter().map(|&x| self.zm.neg(x)).collect()
    }

    pub fn scale(&self, a: &[u64], k: u64) -> WittElem {
        a.iter().map(|&x| self.zm.mul(x, k)).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> WittElem {
        let m = self.m as usize;
        let modulus = self.zm.modulus as u128;
        let mut prod = vec![0u128; 2 * m - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u128 * y as u128) % modulus;
            }
        }
        // Reduce by the monic modulus from the top.
        for k in (m..2 * m - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for j in 0..m {
                let fj = self.modulus_poly[j] as u128;
                if fj != 0 {
                    prod[k - m + j] = (prod[k - m + j] + modulus - c * fj % modulus) % modulus;
                }
            }
        }
        prod[..m].iter().map(|&c| c as u64).collect()
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> WittElem {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Evaluates a polynomial with coefficients in Z/p^N at `x`.
    fn eval_int_poly(&self, coeffs: &[u64], x: &[u64]) -> WittElem {
        let mut acc = self.zero();
        for &c in coeffs.iter().rev() {
            acc = self.mul(&acc, x);
            acc[0] = self.zm.add(acc[0], c);
        }
        acc
    }

    /// ν_p: minimum over coefficients, `precision` for zero.
    pub fn valuation(&self, a: &[u64]) -> u32 {
        a.iter().map(|&c| self.zm.valuation(c)).min().unwrap_or(self.precision())
    }

    pub fn div_p_pow(&self, a: &[u64], v: u32) -> WittElem {
        a.iter().map(|&c| self.zm.div_p_pow(c, v)).collect()
    }

    /// Inverse of a unit: invert mod p in F_{p^m}, then Newton-lift.
    pub fn inverse(&self, a: &[u64]) -> Option<WittElem> {
        if self.valuation(a) > 0 {
            return None;
        }
        let p = self.p();
        let abar: Vec<u64> = a.iter().map(|&c| c % p).collect();
        let fbar: Vec<u64> = self.modulus_poly.iter().map(|&c| c % p).collect();
        let inv_bar = fp_poly_inverse(&abar, &fbar, p)?;
        let mut x: WittElem = inv_bar;
        x.resize(self.m as usize, 0);
        let two = self.from_int(2);
        for _ in 0..=self.precision().ilog2() + 1 {
            let ax = self.mul(a, &x);
            x = self.mul(&x, &self.sub(&two, &ax));
        }
        debug_assert_eq!(self.mul(a, &x), self.one());
        Some(x)
    }

    fn lift_frobenius(&self) -> Result<WittElem> {
        let m = self.m as usize;
        if m == 1 {
            return Ok(self.generator());
        }
        let f = &self.modulus_poly;
        let fprime: Vec<u64> = (1..f.len())
            .map(|k| self.zm.mul(f[k], k as u64 % self.zm.modulus))
            .collect();
        let mut y = self.pow(&self.generator(), self.p());
        for _ in 0..=self.precision().ilog2() + 2 {
            let fy = self.eval_int_poly(f, &y);
            if self.is_zero(&fy) {
                break;
            }
            let dfy = self.eval_int_poly(&fprime, &y);
            let inv = self.inverse(&dfy).ok_or_else(|| {
                Error::Internal("derivative of the modulus is not a unit".into())
            })?;
            y = self.sub(&y, &self.mul(&fy, &inv));
        }
        if !self.is_zero(&self.eval_int_poly(f, &y)) {
            return Err(Error::Internal("Frobenius lift did not converge".into()));
        }
        Ok(y)
    }

    /// The Frobenius lift: fixes Z/p^N and sends X to its lifted p-th power.
    pub fn frobenius(&self, a: &[u64]) -> WittElem {
        if self.m == 1 {
            return a.to_vec();
        }
        self.eval_int_poly(a, &self.frob_x)
    }

    pub fn frobenius_pow(&self, a: &[u64], k: u32) -> WittElem {
        (0..k % self.m).fold(a.to_vec(), |acc, _| self.frobenius(&acc))
    }

    /// Teichmüller representative: lim a^{p^{mk}}.
    pub fn teichmuller(&self, a: &[u64]) -> WittElem {
        let mut x = a.to_vec();
        for _ in 0..self.m * self.precision() {
            x = self.pow(&x, self.p());
        }
        x
    }

    /// A Z_p-basis of W(F_{p^d}) inside W(F_{p^m}), d | m: powers 1, a, …,
    /// a^{d−1} of a Teichmüller element whose residue generates F_{p^d}.
    pub fn unramified_basis(&self, d: u32) -> Result<Vec<WittElem>> {
        if d == 0 || self.m % d != 0 {
            return invalid(format!("subring degree {d} does not divide m = {}", self.m));
        }
        if d == 1 {
            return Ok(vec![self.one()]);
        }
        let p = self.p();
        let proper: Vec<u32> = (1..d).filter(|k| d % k == 0).collect();
        // Enumerate nonzero residues c and take the relative norm of τ(c).
        let total = (p as u128).pow(self.m).min(1 << 20) as u64;
        for idx in 1..total {
            let mut c = self.zero();
            let mut t = idx;
            for slot in c.iter_mut() {
                *slot = t % p;
                t /= p;
            }
            let tau = self.teichmuller(&c);
            let mut a = self.one();
            for j in 0..self.m / d {
                a = self.mul(&a, &self.frobenius_pow(&tau, j * d));
            }
            let generates = proper.iter().all(|&k| {
                let ak = self.frobenius_pow(&a, k);
                let diff = self.sub(&ak, &a);
                self.valuation(&diff) == 0
            });
            if generates {
                if self.frobenius_pow(&a, d) != a {
                    return Err(Error::Internal("norm element not fixed by φ^d".into()));
                }
                let mut basis = vec![self.one()];
                for _ in 1..d {
                    let next = self.mul(basis.last().expect("nonempty"), &a);
                    basis.push(next);
                }
                return Ok(basis);
            }
        }
        Err(Error::Internal(format!("no generator of F_{{{p}^{d}}} found")))
    }
}

/// Inverse of a mod (f, p) by the extended Euclidean algorithm.
fn fp_poly_inverse(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
    let mut r0 = f.to_vec();
    let mut r1 = a.to_vec();
    fp_trim(&mut r0);
    fp_trim(&mut r1);
    let mut t0: Vec<u64> = Vec::new();
    let mut t1: Vec<u64> = vec![1];
    while !r1.is_empty() {
        // q, r = divmod(r0, r1)
        let mut r = r0.clone();
        let dr1 = r1.len() - 1;
        let inv_lead = inverse_mod_prime(r1[dr1], p);
        let mut q = vec![0u64; r.len().saturating_sub(dr1).max(1)];
        while r.len() > dr1 {
            let k = r.len() - 1 - dr1;
            let c = r[r.len() - 1] * inv_lead % p;
            q[k] = c;
            for (j, &b) in r1.iter().enumerate() {
                r[k + j] = (r[k + j] + p * p - c * b % p) % p;
            }
            fp_trim(&mut r);
        }
        // t2 = t0 − q t1
        let mut qt = vec![0u64; q.len() + t1.len()];
        for (i, &x) in q.iter().enumerate() {
            for (j, &y) in t1.iter().enumerate() {
                qt[i + j] = (qt[i + j] + x * y) % p;
            }
        }
        let n = qt.len().max(t0.len());
        let mut t2 = vec![0u64; n];
        for (i, slot) in t2.iter_mut().enumerate() {
            let x = t0.get(i).copied().unwrap_or(0);
            let y = qt.get(i).copied().unwrap_or(0);
            *slot = (x + p - y) % p;
        }
        fp_trim(&mut t2);
        r0 = std::mem::replace(&mut r1, r);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = inverse_mod_prime(r0[0], p);
    let mut inv: Vec<u64> = t0.iter().map(|&x| x * c % p).collect();
    fp_trim(&mut inv);
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zmod_inverse() {
        let zm = ZMod::new(7, 16).unwrap();
        for a in [1u64, 2, 3, 100, 12345678] {
            let inv = zm.inverse(a).unwrap();
            assert_eq!(zm.mul(a, inv), 1);
        }
        assert!(zm.inverse(49).is_none());
        assert!(ZMod::new(7, 40).is_err());
    }

    #[test]
    fn irreducibles() {
        assert_eq!(first_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(first_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(first_irreducible(2, 3), vec![1, 1, 0, 1]);
        for (p, m) in [(2u64, 10u32), (3, 8), (5, 6), (7, 20)] {
            let f = first_irreducible(p, m);
            assert_eq!(f.len(), m as usize + 1);
            assert!(fp_is_irreducible(&f, p));
        }
        // X^2 + 1 is reducible mod 5.
        assert!(!fp_is_irreducible(&[1, 0, 1], 5));
    }

    #[test]
    fn frobenius_is_a_ring_map_of_order_m() {
        for (p, m, n) in [(2u64, 4u32, 8u32), (3, 2, 6), (5, 4, 5), (7, 6, 4)] {
            let w = WittApprox::new(p, m, n).unwrap();
            let a: WittElem = (0..m as u64).map(|k| (k * 7 + 3) % w.zm.modulus).collect();
            let b: WittElem = (0..m as u64).map(|k| (k * k + 11) % w.zm.modulus).collect();
            assert_eq!(w.frobenius(&w.mul(&a, &b)), w.mul(&w.frobenius(&a), &w.frobenius(&b)));
            assert_eq!(w.frobenius(&w.add(&a, &b)), w.add(&w.frobenius(&a), &w.frobenius(&b)));
            let mut x = a.clone();
            for _ in 0..m {
                x = w.frobenius(&x);
            }
            assert_eq!(x, a);
            assert_eq!(w.frobenius(&w.from_int(5)), w.from_int(5));
            // φ(a) ≡ a^p mod p
            let fa = w.frobenius(&a);
            let ap = w.pow(&a, p);
            assert!(w.valuation(&w.sub(&fa, &ap)) >= 1);
        }
    }

    #[test]
    fn unit_inverse() {
        let w = WittApprox::new(3, 4, 10).unwrap();
        let a: WittElem = vec![2, 5, 0, 7];
        let inv = w.inverse(&a).unwrap();
        assert_eq!(w.mul(&a, &inv), w.one());
        assert!(w.inverse(&w.from_int(3)).is_none());
    }

    #[test]
    fn unramified_subring_basis() {
        let w = WittApprox::new(5, 4, 6).unwrap();
        let basis = w.unramified_basis(2).unwrap();
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert_eq!(w.frobenius_pow(b, 2), *b);
        }
        assert_ne!(w.frobenius(&basis[1]), basis[1]);
        assert!(w.unramified_basis(3).is_err());
        let full = w.unramified_basis(4).unwrap();
        assert_eq!(full.len(), 4);
    }
}
