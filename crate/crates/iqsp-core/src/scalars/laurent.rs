//! Laurent polynomials `Z[q, q^-1]` with exact integer coefficients.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::zpoly::ZPoly;

/// Element of `Z[q, q^-1]`: a finite map exponent -> nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LaurentInt {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentInt {
    pub fn zero() -> Self {
        LaurentInt::default()
    }

    pub fn one() -> Self {
        LaurentInt::monomial(BigInt::one(), 0)
    }

    pub fn q_power(e: i64) -> Self {
        LaurentInt::monomial(BigInt::one(), e)
    }

    pub fn from_int(c: i64) -> Self {
        LaurentInt::monomial(BigInt::from(c), 0)
    }

    pub fn monomial(c: BigInt, e: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        LaurentInt { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).map_or(false, |c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    fn insert(&mut self, e: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &LaurentInt) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.insert(e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &LaurentInt) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.insert(e, -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentInt {
            terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }

    pub fn mul(&self, other: &LaurentInt) -> Self {
        let mut out = LaurentInt::zero();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &other.terms {
                out.insert(e1 + e2, c1 * c2);
            }
        }
        out
    }

    pub fn mul_q_power(&self, e: i64) -> Self {
        LaurentInt {
            terms: self.terms.iter().map(|(&k, c)| (k + e, c.clone())).collect(),
        }
    }

    /// The scalar bar involution `q -> q^-1`.
    pub fn bar(&self) -> Self {
        LaurentInt {
            terms: self.terms.iter().map(|(&e, c)| (-e, c.clone())).collect(),
        }
    }

    pub fn is_bar_symmetric(&self) -> bool {
        self == &self.bar()
    }

    /// All exponents <= -1, i.e. membership in `q^-1 Z[q^-1]`.
    pub fn in_qinv_zqinv(&self) -> bool {
        self.max_exp().map_or(true, |e| e <= -1)
    }

    /// Split off `(q^shift, polynomial part)` with the polynomial having a
    /// nonzero constant term; zero maps to `(0, 0)`.
    pub fn to_shifted_poly(&self) -> (i64, ZPoly) {
        match self.min_exp() {
            None => (0, ZPoly::zero()),
            Some(v) => {
                let deg = self.max_exp().unwrap() - v;
                let mut coeffs = alloc::vec![BigInt::zero(); (deg + 1) as usize];
                for (&e, c) in &self.terms {
                    coeffs[(e - v) as usize] = c.clone();
                }
                (v, ZPoly::from_coeffs(coeffs))
            }
        }
    }

    pub fn from_shifted_poly(shift: i64, p: &ZPoly) -> Self {
        let mut out = LaurentInt::zero();
        for (k, c) in p.coeffs.iter().enumerate() {
            out.insert(shift + k as i64, c.clone());
        }
        out
    }

    /// Exact division; `None` if `other` does not divide `self` in `Z[q,q^-1]`.
    pub fn div_exact(&self, other: &LaurentInt) -> Option<LaurentInt> {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Some(LaurentInt::zero());
        }
        let (sa, pa) = self.to_shifted_poly();
        let (sb, pb) = other.to_shifted_poly();
        let q = pa.div_exact(&pb)?;
        Some(LaurentInt::from_shifted_poly(sa - sb, &q))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = LaurentInt::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Canonical text form: terms in descending exponent, each `c*q^e`,
    /// joined by ` + `; zero renders as `0`. Round-trips through [`parse`].
    pub fn render(&self) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let mut parts: Vec<String> = Vec::new();
        for (&e, c) in self.terms.iter().rev() {
            parts.push(alloc::format!("{c}*q^{e}"));
        }
        parts.join(" + ")
    }

    /// Inverse of [`render`].
    pub fn parse(s: &str) -> Option<LaurentInt> {
        let s = s.trim();
        if s == "0" {
            return Some(LaurentInt::zero());
        }
        let mut out = LaurentInt::zero();
        for part in s.split(" + ") {
            let (c, e) = part.trim().split_once("*q^")?;
            let coeff: BigInt = c.parse().ok()?;
            let exp: i64 = e.parse().ok()?;
            out.insert(exp, coeff);
        }
        Some(out)
    }
}

impl fmt::Display for LaurentInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// `[n]` in base `q^d`: `(q_i^n - q_i^-n) / (q_i - q_i^-1)` with `q_i = q^d`.
pub fn qint(n: i64, d: i64) -> LaurentInt {
    assert!(d > 0);
    let mut out = LaurentInt::zero();
    let a = n.abs();
    // q_i^{n-1} + q_i^{n-3} + ... + q_i^{1-n}
    let mut e = a - 1;
    while e >= -(a - 1) {
        out.insert(e * d, BigInt::one());
        e -= 2;
    }
    if n < 0 {
        out.neg()
    } else {
        out
    }
}

/// `[n]!` in base `q^d`.
pub fn qfact(n: i64, d: i64) -> LaurentInt {
    assert!(n >= 0);
    let mut out = LaurentInt::one();
    for k in 1..=n {
        out = out.mul(&qint(k, d));
    }
    out
}

/// Quantum binomial `[n; s]` in base `q^d`, for `0 <= s <= n`.
pub fn qbinom(n: i64, s: i64, d: i64) -> LaurentInt {
    assert!(
        0 <= s && s <= n,
        "qbinom out of range: s = {s}, n = {n}"
    );
    let mut num = LaurentInt::one();
    for j in 0..s {
        num = num.mul(&qint(n - j, d));
    }
    num.div_exact(&qfact(s, d))
        .expect("quantum binomial is a Laurent polynomial")
}

/// `(-1)^e` as a BigInt sign.
pub fn sign_pow(e: i64) -> BigInt {
    if e.rem_euclid(2) == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qint_small() {
        // [3] = q^2 + 1 + q^-2
        let v = qint(3, 1);
        assert_eq!(v.coeff(2), BigInt::one());
        assert_eq!(v.coeff(0), BigInt::one());
        assert_eq!(v.coeff(-2), BigInt::one());
        assert_eq!(v.terms.len(), 3);
        assert!(v.is_bar_symmetric());
    }

    #[test]
    fn qbinom_two_one() {
        assert_eq!(qbinom(2, 1, 1), qint(2, 1));
        assert_eq!(qfact(0, 2), LaurentInt::one());
    }

    #[test]
    fn qbinom_divides_exactly() {
        for n in 0..7 {
            for s in 0..=n {
                for d in 1..3 {
                    let b = qbinom(n, s, d);
                    // definition check: [s]! [n-s]! [n;s] = [n]!
                    let lhs = qfact(s, d).mul(&qfact(n - s, d)).mul(&b);
                    assert_eq!(lhs, qfact(n, d));
                }
            }
        }
    }

    #[test]
    fn bar_is_involutive() {
        let x = qint(4, 2).mul(&LaurentInt::monomial(BigInt::from(3), -5));
        assert_eq!(x.bar().bar(), x);
    }

    #[test]
    fn render_roundtrip() {
        let x = LaurentInt::monomial(BigInt::from(2), 3)
            .add(&LaurentInt::monomial(BigInt::from(-1), -1));
        let s = x.render();
        assert_eq!(s, "2*q^3 + -1*q^-1");
        assert_eq!(LaurentInt::parse(&s), Some(x));
        assert_eq!(LaurentInt::parse("0"), Some(LaurentInt::zero()));
    }
}
