//! The field `Q(q)` in canonical form.
//!
//! An element is stored as `q^shift * num / den` with `num, den` coprime in
//! `Z[q]`, both prime to `q`, coprime integer contents, and `den` having a
//! positive leading coefficient. Equality is plain structural equality.

use alloc::string::String;
use core::fmt;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::laurent::LaurentInt;
use super::zpoly::ZPoly;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatFunc {
    shift: i64,
    num: ZPoly,
    den: ZPoly,
}

impl RatFunc {
    fn normalized(mut shift: i64, mut num: ZPoly, mut den: ZPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc {
                shift: 0,
                num: ZPoly::zero(),
                den: ZPoly::one(),
            };
        }
        // clear q-powers
        let vn = num.valuation();
        let vd = den.valuation();
        if vn > 0 {
            num = num.shift_down(vn);
            shift += vn as i64;
        }
        if vd > 0 {
            den = den.shift_down(vd);
            shift -= vd as i64;
        }
        // cancel polynomial gcd
        let g = num.gcd(&den);
        if !g.is_one() {
            num = num.div_exact(&g).expect("gcd divides");
            den = den.div_exact(&g).expect("gcd divides");
        }
        // coprime integer contents, positive leading denominator coefficient
        let c = num.content().gcd(&den.content());
        if !c.is_one() {
            num = num.div_bigint_exact(&c);
            den = den.div_bigint_exact(&c);
        }
        if den.leading().is_negative() {
            num = num.neg();
            den = den.neg();
        }
        RatFunc { shift, num, den }
    }

    pub fn zero() -> Self {
        RatFunc {
            shift: 0,
            num: ZPoly::zero(),
            den: ZPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc {
            shift: 0,
            num: ZPoly::one(),
            den: ZPoly::one(),
        }
    }

    pub fn from_int(c: i64) -> Self {
        RatFunc::from_laurent(&LaurentInt::from_int(c))
    }

    pub fn q_power(e: i64) -> Self {
        RatFunc {
            shift: e,
            num: ZPoly::one(),
            den: ZPoly::one(),
        }
    }

    pub fn from_laurent(x: &LaurentInt) -> Self {
        let (shift, p) = x.to_shifted_poly();
        RatFunc::normalized(shift, p, ZPoly::one())
    }

    pub fn from_ratio(num: &LaurentInt, den: &LaurentInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (sn, pn) = num.to_shifted_poly();
        let (sd, pd) = den.to_shifted_poly();
        RatFunc::normalized(sn - sd, pn, pd)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.shift == 0 && self.num.is_one() && self.den.is_one()
    }

    pub fn add(&self, other: &RatFunc) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // fast path: equal denominators and both Laurent
        let shift = self.shift.min(other.shift);
        let a = self.num.shift_up((self.shift - shift) as usize);
        let b = other.num.shift_up((other.shift - shift) as usize);
        if self.den == other.den {
            return RatFunc::normalized(shift, a.add(&b), self.den.clone());
        }
        let num = a.mul(&other.den).add(&b.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFunc::normalized(shift, num, den)
    }

    pub fn sub(&self, other: &RatFunc) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RatFunc {
            shift: self.shift,
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> Self {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return RatFunc {
                shift: self.shift + other.shift,
                num: self.num.mul(&other.num),
                den: ZPoly::one(),
            };
        }
        // cross-cancel before multiplying to limit growth
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = other.den.div_exact(&g1).unwrap();
        let n2 = other.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        RatFunc::normalized(self.shift + other.shift, n1.mul(&n2), d1.mul(&d2))
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        RatFunc::normalized(-self.shift, self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFunc) -> Self {
        self.mul(&other.inv())
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut out = RatFunc::one();
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// The bar involution `q -> q^-1`.
    pub fn bar(&self) -> Self {
        let num = self.num.reverse();
        let den = self.den.reverse();
        let shift = -self.shift - self.num.degree() + self.den.degree();
        RatFunc::normalized(shift, num, den)
    }

    /// Laurent witness: `Some` iff the element lies in `Z[q, q^-1]`.
    pub fn as_laurent(&self) -> Option<LaurentInt> {
        if self.den.is_one() {
            Some(LaurentInt::from_shifted_poly(self.shift, &self.num))
        } else {
            None
        }
    }

    /// Membership in `A = Q[[q^-1]] ∩ Q(q)`: regular at `q = ∞`.
    pub fn in_bold_a(&self) -> bool {
        self.is_zero() || self.shift + self.num.degree() <= self.den.degree()
    }

    /// Membership in `q^-1 A`: vanishing at `q = ∞`.
    pub fn in_qinv_bold_a(&self) -> bool {
        self.is_zero() || self.shift + self.num.degree() < self.den.degree()
    }

    /// Membership in `q^-1 Z[q^-1]`.
    pub fn in_qinv_zqinv(&self) -> bool {
        self.as_laurent().map_or(false, |l| l.in_qinv_zqinv())
    }

    /// Canonical text: Laurent elements render as Laurent text, others as
    /// `(num Laurent text)/(den Laurent text)`.
    pub fn render(&self) -> String {
        match self.as_laurent() {
            Some(l) => l.render(),
            None => {
                let n = LaurentInt::from_shifted_poly(self.shift, &self.num);
                let d = LaurentInt::from_shifted_poly(0, &self.den);
                alloc::format!("({})/({})", n.render(), d.render())
            }
        }
    }

    pub fn parse(s: &str) -> Option<RatFunc> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('(') {
            let (n, d) = rest.split_once(")/(")?;
            let d = d.strip_suffix(')')?;
            let num = LaurentInt::parse(n)?;
            let den = LaurentInt::parse(d)?;
            if den.is_zero() {
                return None;
            }
            Some(RatFunc::from_ratio(&num, &den))
        } else {
            LaurentInt::parse(s).map(|l| RatFunc::from_laurent(&l))
        }
    }

    /// Numerator as a Laurent polynomial (including the q-power shift).
    pub fn numerator(&self) -> LaurentInt {
        LaurentInt::from_shifted_poly(self.shift, &self.num)
    }

    /// Denominator polynomial in `Z[q]`.
    pub fn denominator(&self) -> &ZPoly {
        &self.den
    }

    /// Specialize at an integer value of `q` (test helper; exact rational
    /// evaluation as a pair (num, den)).
    pub fn eval_int(&self, q: i64) -> (BigInt, BigInt) {
        let qb = BigInt::from(q);
        let ev = |p: &ZPoly| -> BigInt {
            let mut acc = BigInt::zero();
            for c in p.coeffs.iter().rev() {
                acc = acc * &qb + c;
            }
            acc
        };
        let mut n = ev(&self.num);
        let mut d = ev(&self.den);
        if self.shift >= 0 {
            n *= qb.pow(self.shift as u32);
        } else {
            d *= qb.pow((-self.shift) as u32);
        }
        (n, d)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::laurent::qint;

    fn q() -> RatFunc {
        RatFunc::q_power(1)
    }

    #[test]
    fn field_ops() {
        let x = q().add(&RatFunc::one()); // q + 1
        let y = x.mul(&x.inv());
        assert!(y.is_one());
        let z = x.sub(&x);
        assert!(z.is_zero());
    }

    #[test]
    fn telescoping_is_laurent() {
        // (q^4 - q^-4)/(q^2 - q^-2) = q^2 + q^-2
        let n = LaurentInt::q_power(4).sub(&LaurentInt::q_power(-4));
        let d = LaurentInt::q_power(2).sub(&LaurentInt::q_power(-2));
        let r = RatFunc::from_ratio(&n, &d);
        let w = r.as_laurent().unwrap();
        assert_eq!(w, LaurentInt::q_power(2).add(&LaurentInt::q_power(-2)));
    }

    #[test]
    fn non_laurent_has_no_witness() {
        // 1/(q-1)
        let r = RatFunc::one().div(&q().sub(&RatFunc::one()));
        assert!(r.as_laurent().is_none());
    }

    #[test]
    fn bold_a_membership() {
        // 1/(q+1) -> q^-1 A
        let r = RatFunc::one().div(&q().add(&RatFunc::one()));
        assert!(r.in_bold_a());
        assert!(r.in_qinv_bold_a());
        // q/(q+1) is in A but not q^-1 A
        let s = q().div(&q().add(&RatFunc::one()));
        assert!(s.in_bold_a());
        assert!(!s.in_qinv_bold_a());
        assert!(!q().in_bold_a());
    }

    #[test]
    fn bar_involution() {
        let r = RatFunc::from_laurent(&qint(2, 1))
            .div(&q().add(&RatFunc::from_int(2)));
        assert_eq!(r.bar().bar(), r);
        // bar(2q^3 - q^-1) = 2q^-3 - q
        let x = RatFunc::from_laurent(
            &LaurentInt::monomial(BigInt::from(2), 3).add(&LaurentInt::monomial(BigInt::from(-1), -1)),
        );
        let expect = RatFunc::from_laurent(
            &LaurentInt::monomial(BigInt::from(2), -3).add(&LaurentInt::monomial(BigInt::from(-1), 1)),
        );
        assert_eq!(x.bar(), expect);
    }

    #[test]
    fn bar_is_multiplicative_randomized() {
        // deterministic xorshift
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut mk = || {
            let mut n = LaurentInt::zero();
            let mut d = LaurentInt::zero();
            for _ in 0..3 {
                n = n.add(&LaurentInt::monomial(
                    BigInt::from((rnd() as i64 % 7) - 3),
                    (rnd() % 5) as i64 - 2,
                ));
                d = d.add(&LaurentInt::monomial(
                    BigInt::from((rnd() as i64 % 7) - 3),
                    (rnd() % 5) as i64 - 2,
                ));
            }
            if d.is_zero() {
                d = LaurentInt::one();
            }
            RatFunc::from_ratio(&n, &d)
        };
        for _ in 0..40 {
            let x = mk();
            let y = mk();
            assert_eq!(x.mul(&y).bar(), x.bar().mul(&y.bar()));
            assert_eq!(x.add(&y).bar(), x.bar().add(&y.bar()));
            // associativity/distributivity spot checks
            let z = mk();
            assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        }
    }

    #[test]
    fn render_roundtrip() {
        let r = RatFunc::from_laurent(&qint(3, 1)).div(&q().add(&RatFunc::from_int(2)));
        assert_eq!(RatFunc::parse(&r.render()), Some(r.clone()));
        let l = RatFunc::from_laurent(&qint(5, 2));
        assert_eq!(RatFunc::parse(&l.render()), Some(l));
    }
}
