//! Exact arithmetic in the quantum group `U` in triangular normal form.
//!
//! Elements are finite sums `F_y K_mu E_x` with `y`, `x` running over the
//! word bases of `f` weight spaces and `mu` in `Y`. Straightening uses the
//! commutation of a generator past a whole `f`-element, expressed through the
//! one-sided derivations `r_i` and `_i r`:
//!
//! `[E_i, y^-] = (q^{i.i - i.|y|} (_i r y)^- Kt_i - (r_i y)^- Kt_{-i}) / (q_i - q_i^-1)`
//! `[F_i, x^+] = (q^{i.i - i.|x|} (_i r x)^+ Kt_{-i} - (r_i x)^+ Kt_i) / (q_i - q_i^-1)`
//!
//! both derived from the defining relations (and pinned by the module tests).
//! Braid symmetries act on generators by the standard formulas and extend as
//! (anti)automorphisms; root vectors land back in `U^+` where the theory says
//! they must, and the code asserts it.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::cartan::{WeylElement, XWeight, YVec};
use crate::falg::{FAlgebra, FElement, FWt};
use crate::scalars::{qbinom, sign_pow, LaurentInt, RatFunc};
use crate::{Error, Result};

/// Key of a normal-form term: minus-part weight and basis index, Cartan part,
/// plus-part weight and basis index.
pub type TermKey = (FWt, u32, YVec, FWt, u32);

/// Element of `U` in triangular normal form.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct UElement {
    terms: BTreeMap<TermKey, RatFunc>,
}

/// A generator of `U`, used to spell out products and morphism images.
#[derive(Clone, Debug, PartialEq)]
pub enum Gen {
    E(usize),
    F(usize),
    K(YVec),
}

impl UElement {
    pub fn zero() -> Self {
        UElement::default()
    }

    pub fn one(rank: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            (vec![0; rank], 0, vec![0; rank], vec![0; rank], 0),
            RatFunc::one(),
        );
        UElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn k(mu: &[i64], rank: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            (vec![0; rank], 0, mu.to_vec(), vec![0; rank], 0),
            RatFunc::one(),
        );
        UElement { terms }
    }

    /// `Kt_i^{sign} = K_{sign d_i alpha_i^vee}`.
    pub fn kt(f: &FAlgebra, i: usize, sign: i64) -> Self {
        let mut mu = vec![0i64; f.rank()];
        mu[i] = sign * f.datum.d(i);
        UElement::k(&mu, f.rank())
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert(&mut self, key: TermKey, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &UElement) -> UElement {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &UElement) -> UElement {
        self.add(&other.scale(&RatFunc::from_int(-1)))
    }

    pub fn scale(&self, c: &RatFunc) -> UElement {
        if c.is_zero() {
            return UElement::zero();
        }
        UElement {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.mul(c)))
                .collect(),
        }
    }

    /// Lift a plus-part element `x^+`.
    pub fn from_plus(f: &mut FAlgebra, x: &FElement) -> Result<UElement> {
        let rank = f.rank();
        let mut out = UElement::zero();
        for (wt, v) in &x.comps {
            f.space(wt)?;
            for (k, c) in v.iter().enumerate() {
                out.insert(
                    (vec![0; rank], 0, vec![0; rank], wt.clone(), k as u32),
                    c.clone(),
                );
            }
        }
        Ok(out)
    }

    /// Lift a minus-part element `y^-`.
    pub fn from_minus(f: &mut FAlgebra, y: &FElement) -> Result<UElement> {
        let rank = f.rank();
        let mut out = UElement::zero();
        for (wt, v) in &y.comps {
            f.space(wt)?;
            for (k, c) in v.iter().enumerate() {
                out.insert(
                    (wt.clone(), k as u32, vec![0; rank], vec![0; rank], 0),
                    c.clone(),
                );
            }
        }
        Ok(out)
    }

    /// Extract the plus part if the element lies in `U^+`.
    pub fn as_plus(&self, f: &FAlgebra) -> Option<FElement> {
        let rank = f.rank();
        let zero_wt = vec![0u32; rank];
        let zero_mu = vec![0i64; rank];
        let mut comps: BTreeMap<FWt, Vec<RatFunc>> = BTreeMap::new();
        for ((yw, _, mu, xw, xi), c) in &self.terms {
            if *yw != zero_wt || *mu != zero_mu {
                return None;
            }
            let dim = f.kostant_count(xw) as usize;
            let v = comps
                .entry(xw.clone())
                .or_insert_with(|| vec![RatFunc::zero(); dim]);
            v[*xi as usize] = c.clone();
        }
        let mut out = FElement { comps };
        out.retain_nonzero();
        Some(out)
    }

    /// Multiply by a single generator on the right.
    pub fn mul_gen_right(&self, f: &mut FAlgebra, g: &Gen) -> Result<UElement> {
        let rank = f.rank();
        let mut out = UElement::zero();
        for ((yw, yi, mu, xw, xi), c) in &self.terms {
            match g {
                Gen::K(nu) => {
                    // E_x K_nu = q^{-<nu, X(|x|)>} K_nu E_x
                    let xx = f.rd.root_to_x(&to_i64(xw));
                    let pow = -f.rd.pair(nu, &xx);
                    let mut new_mu = mu.clone();
                    for (a, b) in new_mu.iter_mut().zip(nu.iter()) {
                        *a += b;
                    }
                    out.insert(
                        (yw.clone(), *yi, new_mu, xw.clone(), *xi),
                        c.mul(&RatFunc::q_power(pow)),
                    );
                }
                Gen::E(j) => {
                    let x = basis_element(f, xw, *xi)?;
                    let tj = f.theta(*j);
                    let xj = f.multiply(&x, &tj)?;
                    let y = basis_element(f, yw, *yi)?;
                    add_mixed(f, &mut out, &y, mu, &xj, c)?;
                }
                Gen::F(j) => {
                    let j = *j;
                    let dj = f.datum.d(j);
                    let qq = RatFunc::q_power(dj).sub(&RatFunc::q_power(-dj)).inv();
                    let x = basis_element(f, xw, *xi)?;
                    let y = basis_element(f, yw, *yi)?;
                    // main term: q^{-<mu, alpha_j>} F_{y theta_j} K_mu E_x
                    let aj = f.rd.simple_root_x(j);
                    let pow = -f.rd.pair(mu, &aj);
                    let tj = f.theta(j);
                    let ytj = f.multiply(&y, &tj)?;
                    add_mixed(f, &mut out, &ytj, mu, &x, &c.mul(&RatFunc::q_power(pow)))?;
                    // - 1/(q_j - q_j^-1) F_y K_{mu - d_j aj^vee} (_j r x)^+
                    let jrx = f.r_map(true, j, &x)?;
                    if !jrx.is_zero() {
                        let mut new_mu = mu.clone();
                        new_mu[j] -= dj;
                        let coeff = c.mul(&qq).neg();
                        add_mixed(f, &mut out, &y, &new_mu, &jrx, &coeff)?;
                    }
                    // + q^{j.j - j.|x|}/(q_j - q_j^-1) F_y K_{mu + d_j aj^vee} (r_j x)^+
                    let rjx = f.r_map(false, j, &x)?;
                    if !rjx.is_zero() {
                        let mut ej = vec![0i64; rank];
                        ej[j] = 1;
                        let jx = f.datum.dot_vec(&ej, &to_i64(xw));
                        let jj = f.datum.dot(j, j);
                        let mut new_mu = mu.clone();
                        new_mu[j] += dj;
                        let coeff = c.mul(&qq).mul(&RatFunc::q_power(jj - jx));
                        add_mixed(f, &mut out, &y, &new_mu, &rjx, &coeff)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// General product.
    pub fn mul(&self, f: &mut FAlgebra, other: &UElement) -> Result<UElement> {
        let mut out = UElement::zero();
        for ((yw, yi, mu, xw, xi), c) in &other.terms {
            // self * (F_y K_mu E_x) one generator at a time
            let mut acc = self.scale(c);
            let yword: Vec<u8> = {
                let sp = f.space(yw)?;
                sp.basis_word(*yi as usize).to_vec()
            };
            for &l in &yword {
                acc = acc.mul_gen_right(f, &Gen::F(l as usize))?;
            }
            if mu.iter().any(|&v| v != 0) {
                acc = acc.mul_gen_right(f, &Gen::K(mu.clone()))?;
            }
            let xword: Vec<u8> = {
                let sp = f.space(xw)?;
                sp.basis_word(*xi as usize).to_vec()
            };
            for &l in &xword {
                acc = acc.mul_gen_right(f, &Gen::E(l as usize))?;
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Apply a morphism given by generator images; `anti` reverses products,
    /// `conj` applies the scalar bar to coefficients.
    pub fn apply_morphism<M>(
        &self,
        f: &mut FAlgebra,
        images: &M,
        anti: bool,
        conj: bool,
    ) -> Result<UElement>
    where
        M: Fn(&mut FAlgebra, &Gen) -> Result<UElement>,
    {
        let rank = f.rank();
        let mut out = UElement::zero();
        for ((yw, yi, mu, xw, xi), c) in &self.terms {
            let mut gens: Vec<Gen> = Vec::new();
            {
                let sp = f.space(yw)?;
                for &l in sp.basis_word(*yi as usize) {
                    gens.push(Gen::F(l as usize));
                }
            }
            if mu.iter().any(|&v| v != 0) {
                gens.push(Gen::K(mu.clone()));
            }
            {
                let sp = f.space(xw)?;
                for &l in sp.basis_word(*xi as usize) {
                    gens.push(Gen::E(l as usize));
                }
            }
            if anti {
                gens.reverse();
            }
            let mut acc = UElement::one(rank);
            for g in &gens {
                let img = images(f, g)?;
                acc = acc.mul(f, &img)?;
            }
            let coeff = if conj { c.bar() } else { c.clone() };
            out = out.add(&acc.scale(&coeff));
        }
        Ok(out)
    }

    /// The bar involution of `U`.
    pub fn bar(&self, f: &mut FAlgebra) -> Result<UElement> {
        let rank = f.rank();
        self.apply_morphism(
            f,
            &|f: &mut FAlgebra, g: &Gen| match g {
                Gen::E(i) => {
                    let t = f.theta(*i);
                    UElement::from_plus(f, &t)
                }
                Gen::F(i) => {
                    let t = f.theta(*i);
                    UElement::from_minus(f, &t)
                }
                Gen::K(mu) => Ok(UElement::k(
                    &mu.iter().map(|&v| -v).collect::<Vec<_>>(),
                    rank,
                )),
            },
            false,
            true,
        )
    }

    /// The involution `omega`: swaps `E_i` and `F_i`, inverts `K`.
    pub fn omega(&self, f: &mut FAlgebra) -> Result<UElement> {
        let rank = f.rank();
        self.apply_morphism(
            f,
            &|f: &mut FAlgebra, g: &Gen| match g {
                Gen::E(i) => {
                    let t = f.theta(*i);
                    UElement::from_minus(f, &t)
                }
                Gen::F(i) => {
                    let t = f.theta(*i);
                    UElement::from_plus(f, &t)
                }
                Gen::K(mu) => Ok(UElement::k(
                    &mu.iter().map(|&v| -v).collect::<Vec<_>>(),
                    rank,
                )),
            },
            false,
            false,
        )
    }

    /// The anti-involution with `E_i -> q_i^-1 F_i Kt_i`,
    /// `F_i -> q_i^-1 E_i Kt_i^-1`, fixing `K`.
    pub fn wp(&self, f: &mut FAlgebra) -> Result<UElement> {
        let rank = f.rank();
        self.apply_morphism(
            f,
            &|f: &mut FAlgebra, g: &Gen| match g {
                Gen::E(i) => {
                    let t = f.theta(*i);
                    let fi = UElement::from_minus(f, &t)?;
                    let kt = UElement::kt(f, *i, 1);
                    Ok(fi.mul(f, &kt)?.scale(&RatFunc::q_power(-f.datum.d(*i))))
                }
                Gen::F(i) => {
                    let t = f.theta(*i);
                    let ei = UElement::from_plus(f, &t)?;
                    let kt = UElement::kt(f, *i, -1);
                    Ok(ei.mul(f, &kt)?.scale(&RatFunc::q_power(-f.datum.d(*i))))
                }
                Gen::K(mu) => Ok(UElement::k(mu, rank)),
            },
            true,
            false,
        )
    }

    /// The anti-involution `sigma`: fixes `E_i`, `F_i`, inverts `K`.
    pub fn sigma(&self, f: &mut FAlgebra) -> Result<UElement> {
        let rank = f.rank();
        self.apply_morphism(
            f,
            &|f: &mut FAlgebra, g: &Gen| match g {
                Gen::E(i) => {
                    let t = f.theta(*i);
                    UElement::from_plus(f, &t)
                }
                Gen::F(i) => {
                    let t = f.theta(*i);
                    UElement::from_minus(f, &t)
                }
                Gen::K(mu) => Ok(UElement::k(
                    &mu.iter().map(|&v| -v).collect::<Vec<_>>(),
                    rank,
                )),
            },
            true,
            false,
        )
    }

    /// The diagram automorphism induced by `tau`.
    pub fn tau_twist(&self, f: &mut FAlgebra, tau: &[usize]) -> Result<UElement> {
        self.apply_morphism(
            f,
            &|f: &mut FAlgebra, g: &Gen| match g {
                Gen::E(i) => {
                    let t = f.theta(tau[*i]);
                    UElement::from_plus(f, &t)
                }
                Gen::F(i) => {
                    let t = f.theta(tau[*i]);
                    UElement::from_minus(f, &t)
                }
                Gen::K(mu) => {
                    let mut out = vec![0i64; mu.len()];
                    for (i, &v) in mu.iter().enumerate() {
                        out[tau[i]] = v;
                    }
                    Ok(UElement::k(&out, mu.len()))
                }
            },
            false,
            false,
        )
    }

    /// Braid operator `T'_{i,e}` (`double = false`) or `T''_{i,e}` (`true`).
    pub fn braid(&self, f: &mut FAlgebra, i: usize, e: i64, double: bool) -> Result<UElement> {
        self.apply_morphism(
            f,
            &|f: &mut FAlgebra, g: &Gen| braid_gen(f, i, e, double, g),
            false,
            false,
        )
    }

    /// `T_w = T''_{i_1,+1} ... T''_{i_l,+1}` along the stored reduced word.
    pub fn braid_word(&self, f: &mut FAlgebra, w: &WeylElement) -> Result<UElement> {
        let mut acc = self.clone();
        for &i in w.word.iter().rev() {
            acc = acc.braid(f, i, 1, true)?;
        }
        Ok(acc)
    }

    /// `T_w^{-1} = T'_{i_l,-1} ... T'_{i_1,-1}`.
    pub fn braid_word_inv(&self, f: &mut FAlgebra, w: &WeylElement) -> Result<UElement> {
        let mut acc = self.clone();
        for &i in w.word.iter() {
            acc = acc.braid(f, i, -1, false)?;
        }
        Ok(acc)
    }

    /// Iterate over the normal-form terms.
    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &RatFunc)> {
        self.terms.iter()
    }
}

fn to_i64(wt: &[u32]) -> Vec<i64> {
    wt.iter().map(|&v| v as i64).collect()
}

pub(crate) fn basis_element(f: &mut FAlgebra, wt: &FWt, idx: u32) -> Result<FElement> {
    let dim = f.space(wt)?.dim();
    let mut v = vec![RatFunc::zero(); dim];
    v[idx as usize] = RatFunc::one();
    let mut comps = BTreeMap::new();
    comps.insert(wt.clone(), v);
    let mut out = FElement { comps };
    out.retain_nonzero();
    Ok(out)
}

/// Accumulate `coeff * y^- K_mu x^+` into `out`, expanding the two
/// `f`-elements over their bases.
fn add_mixed(
    f: &mut FAlgebra,
    out: &mut UElement,
    y: &FElement,
    mu: &[i64],
    x: &FElement,
    coeff: &RatFunc,
) -> Result<()> {
    if coeff.is_zero() {
        return Ok(());
    }
    for (yw, yv) in &y.comps {
        f.space(yw)?;
        for (yi, yc) in yv.iter().enumerate() {
            if yc.is_zero() {
                continue;
            }
            for (xw, xv) in &x.comps {
                f.space(xw)?;
                for (xi, xc) in xv.iter().enumerate() {
                    if xc.is_zero() {
                        continue;
                    }
                    out.insert(
                        (yw.clone(), yi as u32, mu.to_vec(), xw.clone(), xi as u32),
                        coeff.mul(yc).mul(xc),
                    );
                }
            }
        }
    }
    Ok(())
}

/// Images of generators under `T'_{i,e}` (`double = false`) / `T''_{i,e}`.
fn braid_gen(f: &mut FAlgebra, i: usize, e: i64, double: bool, g: &Gen) -> Result<UElement> {
    let rank = f.rank();
    let di = f.datum.d(i);
    match g {
        Gen::K(mu) => {
            let smu = crate::cartan::reflect_y(&f.rd, i, mu);
            Ok(UElement::k(&smu, rank))
        }
        Gen::E(j) if *j == i => {
            let t = f.theta(i);
            let fi = UElement::from_minus(f, &t)?;
            let kt = UElement::kt(f, i, e);
            if !double {
                // T'_{i,e}(E_i) = -Kt_{ei} F_i
                Ok(kt.mul(f, &fi)?.scale(&RatFunc::from_int(-1)))
            } else {
                // T''_{i,e}(E_i) = -F_i Kt_{ei}
                Ok(fi.mul(f, &kt)?.scale(&RatFunc::from_int(-1)))
            }
        }
        Gen::F(j) if *j == i => {
            let t = f.theta(i);
            let ei = UElement::from_plus(f, &t)?;
            let kt = UElement::kt(f, i, -e);
            if !double {
                // T'_{i,e}(F_i) = -E_i Kt_{-ei}
                Ok(ei.mul(f, &kt)?.scale(&RatFunc::from_int(-1)))
            } else {
                // T''_{i,e}(F_i) = -Kt_{-ei} E_i
                Ok(kt.mul(f, &ei)?.scale(&RatFunc::from_int(-1)))
            }
        }
        Gen::E(j) => {
            let j = *j;
            let m = -f.datum.cartan(i, j);
            let mut out = UElement::zero();
            for r in 0..=m {
                let s = m - r;
                // T'_{i,e}:  sum (-1)^r q_i^{er}  E^{(r)} E_j E^{(s)}
                // T''_{i,e}: sum (-1)^r q_i^{-er} E^{(s)} E_j E^{(r)}
                let (lead, trail, pow) = if !double {
                    (r, s, e * r * di)
                } else {
                    (s, r, -e * r * di)
                };
                let el = f.theta_divided(i, lead as u32)?;
                let ej = f.theta(j);
                let er = f.theta_divided(i, trail as u32)?;
                let le = f.multiply(&el, &ej)?;
                let prod = f.multiply(&le, &er)?;
                let c = RatFunc::from_laurent(&LaurentInt::monomial(sign_pow(r), 0))
                    .mul(&RatFunc::q_power(pow));
                out = out.add(&UElement::from_plus(f, &prod)?.scale(&c));
            }
            Ok(out)
        }
        Gen::F(j) => {
            let j = *j;
            let m = -f.datum.cartan(i, j);
            let mut out = UElement::zero();
            for r in 0..=m {
                let s = m - r;
                // T'_{i,e}:  sum (-1)^r q_i^{-er} F^{(s)} F_j F^{(r)}
                // T''_{i,e}: sum (-1)^r q_i^{er}  F^{(r)} F_j F^{(s)}
                let (lead, trail, pow) = if !double {
                    (s, r, -e * r * di)
                } else {
                    (r, s, e * r * di)
                };
                let fl = f.theta_divided(i, lead as u32)?;
                let fj = f.theta(j);
                let fr = f.theta_divided(i, trail as u32)?;
                let lf = f.multiply(&fl, &fj)?;
                let prod = f.multiply(&lf, &fr)?;
                let c = RatFunc::from_laurent(&LaurentInt::monomial(sign_pow(r), 0))
                    .mul(&RatFunc::q_power(pow));
                out = out.add(&UElement::from_minus(f, &prod)?.scale(&c));
            }
            Ok(out)
        }
    }
}

/// PBW root vectors along a reduced word: the k-th vector is
/// `T_{i_1} ... T_{i_{k-1}} (E_{i_k})`, always in `U^+`.
pub fn pbw_root_vectors(f: &mut FAlgebra, word: &[usize]) -> Result<Vec<FElement>> {
    let mut out = Vec::with_capacity(word.len());
    for k in 0..word.len() {
        let t = f.theta(word[k]);
        let mut u = UElement::from_plus(f, &t)?;
        for j in (0..k).rev() {
            u = u.braid(f, word[j], 1, true)?;
        }
        let x = u.as_plus(f).ok_or_else(|| {
            Error::Invalid(alloc::format!(
                "root vector {k} left U^+ (word not reduced?)"
            ))
        })?;
        out.push(x);
    }
    Ok(out)
}

/// `T_w(E_j)` as an element of `U^+` (valid when `w(alpha_j) > 0`).
pub fn braid_e(f: &mut FAlgebra, w: &WeylElement, j: usize) -> Result<FElement> {
    let t = f.theta(j);
    let u = UElement::from_plus(f, &t)?.braid_word(f, w)?;
    u.as_plus(f)
        .ok_or_else(|| Error::Invalid("T_w(E_j) not in U^+".into()))
}

/// `T_w^{-1}(E_j)` as an element of `U^+` (valid when `w^{-1}(alpha_j) > 0`).
pub fn braid_e_inv(f: &mut FAlgebra, w: &WeylElement, j: usize) -> Result<FElement> {
    let t = f.theta(j);
    let u = UElement::from_plus(f, &t)?.braid_word_inv(f, w)?;
    u.as_plus(f)
        .ok_or_else(|| Error::Invalid("T_w^{-1}(E_j) not in U^+".into()))
}

impl FElement {
    pub(crate) fn retain_nonzero(&mut self) {
        self.comps.retain(|_, v| v.iter().any(|c| !c.is_zero()));
    }
}

/// Quantum binomial in `q_i` as a `RatFunc` (shared by the module braid sums).
pub fn qbinom_rat(n: i64, s: i64, d: i64) -> RatFunc {
    RatFunc::from_laurent(&qbinom(n, s, d))
}

/// Simple-root `X`-coordinates of an `N[I]` content vector.
pub fn content_to_x(f: &FAlgebra, wt: &[u32]) -> XWeight {
    f.rd.root_to_x(&to_i64(wt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{longest_element, CartanDatum};
    use crate::scalars::qint;

    fn alg(name: &str) -> FAlgebra {
        FAlgebra::new(CartanDatum::by_name(name).unwrap(), 12)
    }

    fn e(f: &mut FAlgebra, i: usize) -> UElement {
        let t = f.theta(i);
        UElement::from_plus(f, &t).unwrap()
    }

    fn fm(f: &mut FAlgebra, i: usize) -> UElement {
        let t = f.theta(i);
        UElement::from_minus(f, &t).unwrap()
    }

    #[test]
    fn ef_commutator_sl2() {
        let mut f = alg("A1");
        let ee = e(&mut f, 0);
        let ff = fm(&mut f, 0);
        let ef = ee.mul(&mut f, &ff).unwrap();
        let fe = ff.mul(&mut f, &ee).unwrap();
        let lhs = ef.sub(&fe);
        let kt = UElement::kt(&f, 0, 1);
        let ktm = UElement::kt(&f, 0, -1);
        let rhs = kt
            .sub(&ktm)
            .scale(&RatFunc::q_power(1).sub(&RatFunc::q_power(-1)).inv());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn ef_commute_distinct_nodes() {
        let mut f = alg("A2");
        let e0 = e(&mut f, 0);
        let f1 = fm(&mut f, 1);
        let a = e0.mul(&mut f, &f1).unwrap();
        let b = f1.mul(&mut f, &e0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn serre_holds_in_u() {
        // S(E_1, E_2) = 0 in A2 via f-reduction of the plus part
        let mut f = alg("A2");
        let e0 = e(&mut f, 0);
        let e1 = e(&mut f, 1);
        let e00_1 = e0.mul(&mut f, &e0).unwrap().mul(&mut f, &e1).unwrap();
        let e0_1_0 = e0.mul(&mut f, &e1).unwrap().mul(&mut f, &e0).unwrap();
        let e1_00 = e1.mul(&mut f, &e0).unwrap().mul(&mut f, &e0).unwrap();
        let two = RatFunc::from_laurent(&qint(2, 1));
        let s = e00_1.sub(&e0_1_0.scale(&two)).add(&e1_00);
        assert!(s.is_zero());
    }

    #[test]
    fn braid_t1_e2_in_a2() {
        // T_1(E_2) = E_1 E_2 - q^-1 E_2 E_1
        let mut f = alg("A2");
        let t = f.theta(1);
        let u = UElement::from_plus(&mut f, &t)
            .unwrap()
            .braid(&mut f, 0, 1, true)
            .unwrap();
        let x = u.as_plus(&f).unwrap();
        let w01 = f.word_element(&[0, 1]).unwrap();
        let w10 = f.word_element(&[1, 0]).unwrap();
        let expect = w01.sub(&w10.scale(&RatFunc::q_power(-1)));
        assert_eq!(x, expect);
    }

    #[test]
    fn braid_inverse_pair() {
        // T''_{i,e} and T'_{i,-e} are mutually inverse
        let mut f = alg("B2");
        let gens = [e(&mut f, 0), e(&mut f, 1), fm(&mut f, 0)];
        for gen in &gens {
            for eps in [1i64, -1] {
                let fwd = gen.braid(&mut f, 0, eps, true).unwrap();
                let back = fwd.braid(&mut f, 0, -eps, false).unwrap();
                assert_eq!(&back, gen);
                let fwd = gen.braid(&mut f, 1, eps, false).unwrap();
                let back = fwd.braid(&mut f, 1, -eps, true).unwrap();
                assert_eq!(&back, gen);
            }
        }
    }

    #[test]
    fn braid_sends_root_to_generator() {
        // w(alpha_j) = alpha_k implies T_w(E_j) = E_k; in A1xA1 s_0 fixes alpha_1
        let mut f = alg("A1xA1");
        let rd = f.rd.clone();
        let w = WeylElement::from_word(&rd, &[0]);
        let x = braid_e(&mut f, &w, 1).unwrap();
        assert_eq!(x, f.theta(1));
    }

    #[test]
    fn pbw_vectors_a2() {
        let mut f = alg("A2");
        let rd = f.rd.clone();
        let w0 = longest_element(&rd, &[0, 1]);
        let vs = pbw_root_vectors(&mut f, &w0.word).unwrap();
        assert_eq!(vs.len(), 3);
        assert_eq!(vs[0], f.theta(w0.word[0]));
        // weights are the positive roots in word order
        for (k, v) in vs.iter().enumerate() {
            let (wt, _) = v.homogeneous().expect("homogeneous root vector");
            let prefix = WeylElement::from_word(&rd, &w0.word[..k]);
            let root_x = prefix.apply_x(&rd.simple_root_x(w0.word[k]));
            let expect = rd.x_to_root(&root_x).unwrap();
            let got: Vec<i64> = wt.iter().map(|&v| v as i64).collect();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn wp_is_anti_involution() {
        let mut f = alg("A2");
        let e0 = e(&mut f, 0);
        let f1 = fm(&mut f, 1);
        let u = e0.mul(&mut f, &f1).unwrap();
        let w2 = u.wp(&mut f).unwrap().wp(&mut f).unwrap();
        assert_eq!(w2, u);
        let lhs = u.wp(&mut f).unwrap();
        let wp_f1 = f1.wp(&mut f).unwrap();
        let wp_e0 = e0.wp(&mut f).unwrap();
        let rhs = wp_f1.mul(&mut f, &wp_e0).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn bar_fixes_generators_and_conjugates() {
        let mut f = alg("A2");
        let u = e(&mut f, 0).scale(&RatFunc::q_power(3));
        let b = u.bar(&mut f).unwrap();
        assert_eq!(b, e(&mut f, 0).scale(&RatFunc::q_power(-3)));
        let kt = UElement::kt(&f, 0, 1);
        assert_eq!(kt.bar(&mut f).unwrap(), UElement::kt(&f, 0, -1));
    }

    #[test]
    fn omega_swaps_triangular_parts() {
        let mut f = alg("A2");
        let u = e(&mut f, 0);
        assert_eq!(u.omega(&mut f).unwrap(), fm(&mut f, 0));
        let v = fm(&mut f, 1);
        assert_eq!(v.omega(&mut f).unwrap(), e(&mut f, 1));
    }

    #[test]
    fn bar_of_braid_lemma_aii3() {
        // bar(T_wb(E_i)) = (-1)^{<2 rho_b^vee, alpha_i>} q_i^{-<i, 2 rho_b>}
        //                  T_wb^{-1}(E_i)   for the white node of AII3
        let mut f = alg("A3");
        let rd = f.rd.clone();
        let wb = longest_element(&rd, &[0, 2]);
        let p = braid_e(&mut f, &wb, 1).unwrap();
        let pbar = {
            let u = UElement::from_plus(&mut f, &p).unwrap();
            u.bar(&mut f).unwrap().as_plus(&f).unwrap()
        };
        let pinv = braid_e_inv(&mut f, &wb, 1).unwrap();
        let two_rho_check = rd.two_rho_check_sub_y(&[0, 2]);
        let a1 = rd.simple_root_x(1);
        let sgn = rd.pair(&two_rho_check, &a1);
        let two_rho_x = rd.two_rho_sub_x(&[0, 2]);
        let pow = -two_rho_x[1] * f.datum.d(1);
        let mut scalar = RatFunc::q_power(pow);
        if sgn % 2 != 0 {
            scalar = scalar.neg();
        }
        assert_eq!(pbar, pinv.scale(&scalar));
    }
}
