//! Dense polynomials in `q` with arbitrary-precision integer coefficients.
//!
//! These are the numerators/denominators of [`crate::scalars::RatFunc`]; the
//! gcd here (primitive PRS) is what keeps rational functions canonical.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Polynomial in `q` over `Z`, stored densely, no trailing zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZPoly {
    /// `coeffs[k]` is the coefficient of `q^k`; empty means the zero polynomial.
    pub coeffs: Vec<BigInt>,
}

impl ZPoly {
    pub fn zero() -> Self {
        ZPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        ZPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            ZPoly::zero()
        } else {
            ZPoly { coeffs: vec![c] }
        }
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree; zero polynomial reports -1.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("leading coefficient of zero polynomial")
    }

    /// Lowest nonzero exponent (valuation at q = 0); zero polynomial reports 0.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        ZPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &ZPoly) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero);
            let b = other.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero);
            out.push(a + b);
        }
        ZPoly::from_coeffs(out)
    }

    pub fn sub(&self, other: &ZPoly) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ZPoly) -> Self {
        if self.is_zero() || other.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        ZPoly::from_coeffs(out)
    }

    pub fn mul_bigint(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return ZPoly::zero();
        }
        ZPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// `self * q^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![BigInt::zero(); k];
        out.extend(self.coeffs.iter().cloned());
        ZPoly { coeffs: out }
    }

    /// Divide by `q^k`; panics if not exactly divisible.
    pub fn shift_down(&self, k: usize) -> Self {
        if self.is_zero() {
            return ZPoly::zero();
        }
        assert!(self.valuation() >= k, "shift_down would truncate");
        ZPoly::from_coeffs(self.coeffs[k..].to_vec())
    }

    /// Reverse coefficients: `q^deg * p(1/q)`.
    pub fn reverse(&self) -> Self {
        let mut coeffs: Vec<BigInt> = self.coeffs.iter().rev().cloned().collect();
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    /// gcd of all coefficients, nonnegative; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divide all coefficients by `d` exactly; panics on inexact division.
    pub fn div_bigint_exact(&self, d: &BigInt) -> Self {
        assert!(!d.is_zero());
        ZPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    let (qt, r) = c.div_rem(d);
                    assert!(r.is_zero(), "inexact coefficient division");
                    qt
                })
                .collect(),
        }
    }

    /// Exact division; returns `None` if `other` does not divide `self` in `Q[q]`
    /// or the quotient has non-integer coefficients.
    pub fn div_exact(&self, other: &ZPoly) -> Option<ZPoly> {
        assert!(!other.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(ZPoly::zero());
        }
        if self.degree() < other.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let dlead = other.leading();
        let dn = other.coeffs.len();
        let qn = rem.len() - dn + 1;
        let mut quot = vec![BigInt::zero(); qn];
        for k in (0..qn).rev() {
            let top = rem[k + dn - 1].clone();
            if top.is_zero() {
                continue;
            }
            let (c, r) = top.div_rem(dlead);
            if !r.is_zero() {
                return None;
            }
            quot[k] = c.clone();
            for (j, d) in other.coeffs.iter().enumerate() {
                rem[k + j] -= &c * d;
            }
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(ZPoly::from_coeffs(quot))
    }

    /// Pseudo-remainder of `self` by `other` (leading(other)^k * self mod other).
    fn pseudo_rem(&self, other: &ZPoly) -> ZPoly {
        let mut rem = self.clone();
        let d = other.degree();
        let lead = other.leading().clone();
        while !rem.is_zero() && rem.degree() >= d {
            let k = (rem.degree() - d) as usize;
            let c = rem.leading().clone();
            rem = rem.mul_bigint(&lead).sub(&other.mul_bigint(&c).shift_up(k));
        }
        rem
    }

    /// Nonzero gcd in `Z[q]`, primitive up to the gcd of contents, with a
    /// positive leading coefficient.
    pub fn gcd(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() {
            return other.abs_lead();
        }
        if other.is_zero() {
            return self.abs_lead();
        }
        let cont = self.content().gcd(&other.content());
        let mut a = self.div_bigint_exact(&self.content());
        let mut b = other.div_bigint_exact(&other.content());
        if a.degree() < b.degree() {
            core::mem::swap(&mut a, &mut b);
        }
        // primitive PRS
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = if r.is_zero() {
                ZPoly::zero()
            } else {
                let c = r.content();
                r.div_bigint_exact(&c)
            };
        }
        let g = a.mul_bigint(&cont);
        g.abs_lead()
    }

    fn abs_lead(&self) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        if self.leading().is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> ZPoly {
        ZPoly::from_coeffs(cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    #[test]
    fn gcd_of_products() {
        // (q-1)(q+1) and (q-1)(q+2) share q-1
        let a = p(&[-1, 1]).mul(&p(&[1, 1]));
        let b = p(&[-1, 1]).mul(&p(&[2, 1]));
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
    }

    #[test]
    fn gcd_sign_normalized() {
        let a = p(&[1, -1]); // 1 - q
        let b = p(&[2, -2]);
        let g = a.gcd(&b);
        assert!(g.leading() > &BigInt::zero());
        assert_eq!(g, p(&[-1, 1]));
    }

    #[test]
    fn exact_division() {
        let a = p(&[-1, 0, 0, 0, 1]); // q^4 - 1
        let b = p(&[-1, 0, 1]); // q^2 - 1
        assert_eq!(a.div_exact(&b), Some(p(&[1, 0, 1])));
        assert_eq!(a.div_exact(&p(&[1, 1, 1])), None);
    }

    #[test]
    fn content_and_valuation() {
        let a = p(&[0, 0, 6, -9]);
        assert_eq!(a.content(), BigInt::from(3));
        assert_eq!(a.valuation(), 2);
        assert_eq!(a.shift_down(2), p(&[6, -9]));
    }
}
