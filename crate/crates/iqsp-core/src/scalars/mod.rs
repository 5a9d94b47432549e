//! Exact scalars: `Z[q,q^-1]`, `Q(q)`, quantum integers, and the bar map.

mod laurent;
mod ratfunc;
pub mod zpoly;

pub use laurent::{qbinom, qfact, qint, sign_pow, LaurentInt};
pub use ratfunc::RatFunc;

/// Quantum integer in `q_i = q^d` as an element of `Q(q)`.
pub fn qint_r(n: i64, d: i64) -> RatFunc {
    RatFunc::from_laurent(&qint(n, d))
}

/// `[n]!` in `q_i = q^d` as an element of `Q(q)`.
pub fn qfact_r(n: i64, d: i64) -> RatFunc {
    RatFunc::from_laurent(&qfact(n, d))
}

/// Quantum binomial in `q_i = q^d` as an element of `Q(q)`.
pub fn qbinom_r(n: i64, s: i64, d: i64) -> RatFunc {
    RatFunc::from_laurent(&qbinom(n, s, d))
}

/// A signed power of `q`, the shape every QSP parameter `varsigma` takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedQPower {
    pub negative: bool,
    pub exp: i64,
}

impl SignedQPower {
    pub fn new(negative: bool, exp: i64) -> Self {
        SignedQPower { negative, exp }
    }

    pub fn to_ratfunc(&self) -> RatFunc {
        let p = RatFunc::q_power(self.exp);
        if self.negative {
            p.neg()
        } else {
            p
        }
    }

    pub fn inv(&self) -> Self {
        SignedQPower {
            negative: self.negative,
            exp: -self.exp,
        }
    }

    pub fn mul(&self, other: &SignedQPower) -> Self {
        SignedQPower {
            negative: self.negative ^ other.negative,
            exp: self.exp + other.exp,
        }
    }
}
