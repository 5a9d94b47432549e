//! Weyl group elements as reduced words with exact actions on `X` and `Y`.

use alloc::vec;
use alloc::vec::Vec;

use super::datum::{RootDatum, XWeight, YVec};

/// A Weyl group element carrying a reduced word and its action matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElement {
    /// Reduced word, applied right-to-left to weights: `w = s_{i_1} ... s_{i_l}`.
    pub word: Vec<usize>,
    /// Action on `X` (columns are images of the standard basis).
    pub mat_x: Vec<Vec<i64>>,
    /// Action on `Y`.
    pub mat_y: Vec<Vec<i64>>,
}

impl WeylElement {
    pub fn identity(rd: &RootDatum) -> Self {
        let n = rd.rank();
        let id = |n: usize| -> Vec<Vec<i64>> {
            (0..n)
                .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
                .collect()
        };
        WeylElement {
            word: Vec::new(),
            mat_x: id(n),
            mat_y: id(n),
        }
    }

    /// Length of the reduced word.
    pub fn length(&self) -> usize {
        self.word.len()
    }

    pub fn apply_x(&self, v: &XWeight) -> XWeight {
        mat_apply(&self.mat_x, v)
    }

    pub fn apply_y(&self, v: &YVec) -> YVec {
        mat_apply(&self.mat_y, v)
    }

    /// Apply to a root-lattice vector (simple-root coordinates).
    pub fn apply_root(&self, rd: &RootDatum, r: &[i64]) -> Vec<i64> {
        let mut out = r.to_vec();
        for &i in self.word.iter().rev() {
            out = RootDatum::reflect_root(&rd.cartan, i, &out);
        }
        out
    }

    pub fn inverse(&self, rd: &RootDatum) -> WeylElement {
        let word: Vec<usize> = self.word.iter().rev().copied().collect();
        WeylElement::from_word(rd, &word)
    }

    /// Build from a word (not necessarily reduced); the stored word is
    /// re-derived in reduced form.
    pub fn from_word(rd: &RootDatum, word: &[usize]) -> WeylElement {
        let n = rd.rank();
        let mut mat_x: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        // columns are images of basis vectors under s_{i_1}...s_{i_l}
        for k in 0..n {
            let mut v = vec![0i64; n];
            v[k] = 1;
            for &i in word.iter().rev() {
                v = reflect_x(rd, i, &v);
            }
            for r in 0..n {
                mat_x[r][k] = v[r];
            }
        }
        let mut mat_y: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        for k in 0..n {
            let mut v = vec![0i64; n];
            v[k] = 1;
            for &i in word.iter().rev() {
                v = reflect_y(rd, i, &v);
            }
            for r in 0..n {
                mat_y[r][k] = v[r];
            }
        }
        let word = reduced_word_from_mat(rd, &mat_x);
        WeylElement { word, mat_x, mat_y }
    }
}

fn mat_apply(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    let n = m.len();
    let mut out = vec![0i64; n];
    for (r, row) in m.iter().enumerate() {
        for (c, &mv) in row.iter().enumerate() {
            out[r] += mv * v[c];
        }
    }
    out
}

/// `s_i` on `X` in fundamental coordinates: `s_i(l) = l - l_i * alpha_i`.
pub fn reflect_x(rd: &RootDatum, i: usize, l: &XWeight) -> XWeight {
    let mut out = l.to_vec();
    let a = rd.simple_root_x(i);
    let c = l[i];
    for j in 0..out.len() {
        out[j] -= c * a[j];
    }
    out
}

/// `s_i` on `Y` in coroot coordinates: `s_i(m) = m - <m, alpha_i> alpha_i^vee`.
pub fn reflect_y(rd: &RootDatum, i: usize, m: &YVec) -> YVec {
    let mut out = m.to_vec();
    let ax = rd.simple_root_x(i);
    let c: i64 = m.iter().zip(ax.iter()).map(|(a, b)| a * b).sum();
    out[i] -= c;
    out
}

/// Recover a canonical reduced word (smallest descent first) from the action
/// on `X`.
fn reduced_word_from_mat(rd: &RootDatum, mat_x: &[Vec<i64>]) -> Vec<usize> {
    let n = rd.rank();
    let mut word = Vec::new();
    let mut cur: Vec<Vec<i64>> = mat_x.to_vec();
    loop {
        // w(alpha_i) < 0 detection: compute w(alpha_i) in X then to roots
        let mut descent = None;
        for i in 0..n {
            let a = rd.simple_root_x(i);
            let img = mat_apply(&cur, &a);
            let r = rd
                .x_to_root(&img)
                .expect("Weyl image of a root is a root");
            if r.iter().sum::<i64>() < 0 {
                descent = Some(i);
                break;
            }
        }
        match descent {
            None => break,
            Some(i) => {
                // w s_i is shorter; record i on the right
                word.push(i);
                // cur = cur * s_i: columns become images of s_i(e_k)
                let mut next = vec![vec![0i64; n]; n];
                for k in 0..n {
                    let mut v = vec![0i64; n];
                    v[k] = 1;
                    v = reflect_x(rd, i, &v);
                    let img = mat_apply(&cur, &v);
                    for r in 0..n {
                        next[r][k] = img[r];
                    }
                }
                cur = next;
            }
        }
    }
    word.reverse();
    word
}

/// Longest element of the parabolic subgroup generated by `subset`.
pub fn longest_element(rd: &RootDatum, subset: &[usize]) -> WeylElement {
    // ascend on the right: while some w(alpha_i) > 0 with i in subset,
    // l(w s_i) = l(w) + 1, so appending s_i builds a reduced word
    let inset: alloc::collections::BTreeSet<usize> = subset.iter().copied().collect();
    let mut word: Vec<usize> = Vec::new();
    loop {
        let w = WeylElement::from_word(rd, &word);
        let mut ascent = None;
        for &i in &inset {
            let a = rd.simple_root_x(i);
            let img = w.apply_x(&a);
            let r = rd.x_to_root(&img).expect("root image");
            if r.iter().sum::<i64>() > 0 {
                ascent = Some(i);
                break;
            }
        }
        match ascent {
            None => return w,
            Some(i) => word.push(i),
        }
    }
}

/// Exponents of the divided-power string for the extremal vector
/// `eta_{w lambda} = F_{i_1}^{(a_1)} ... F_{i_l}^{(a_l)} eta_lambda` along the
/// given reduced word of `w`.
pub fn extremal_string(rd: &RootDatum, word: &[usize], lambda: &XWeight) -> Vec<i64> {
    let mut out = vec![0i64; word.len()];
    for k in (0..word.len()).rev() {
        // a_k = <i_k, s_{i_{k+1}} ... s_{i_l} lambda>
        let mut v = lambda.clone();
        for &i in word[k + 1..].iter().rev() {
            v = reflect_x(rd, i, &v);
        }
        out[k] = v[word[k]];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::datum::CartanDatum;

    #[test]
    fn a2_longest() {
        let rd = RootDatum::new(CartanDatum::by_name("A2").unwrap());
        let w0 = longest_element(&rd, &[0, 1]);
        assert_eq!(w0.length(), 3);
        // canonical reduced word (1,2,1) in 0-based (0,1,0)
        assert_eq!(w0.word, alloc::vec![0, 1, 0]);
        // w0 negates and flips in A2
        let rho = rd.rho();
        assert_eq!(w0.apply_x(&rho), alloc::vec![-1, -1]);
    }

    #[test]
    fn parabolic_longest_aii3() {
        // A3 with subset {0, 2}: length 2, rho_check_sub = alpha1/2 + alpha3/2
        let rd = RootDatum::new(CartanDatum::by_name("A3").unwrap());
        let wb = longest_element(&rd, &[0, 2]);
        assert_eq!(wb.length(), 2);
        let two_rho = rd.two_rho_check_sub_y(&[0, 2]);
        assert_eq!(two_rho, alloc::vec![1, 0, 1]);
        // w_bullet tau (alpha_2) = alpha_1 + alpha_2 + alpha_3 with tau = id
        let a2 = rd.simple_root_x(1);
        let img = wb.apply_x(&a2);
        let r = rd.x_to_root(&img).unwrap();
        assert_eq!(r, alloc::vec![1, 1, 1]);
    }

    #[test]
    fn lengths_match_root_counts() {
        for name in ["A3", "B3", "C3", "D4", "G2"] {
            let rd = RootDatum::new(CartanDatum::by_name(name).unwrap());
            let all: Vec<usize> = (0..rd.rank()).collect();
            let w0 = longest_element(&rd, &all);
            assert_eq!(w0.length(), rd.pos_roots.len(), "{name}");
        }
    }

    #[test]
    fn actions_preserve_pairing() {
        let rd = RootDatum::new(CartanDatum::by_name("B3").unwrap());
        let w = WeylElement::from_word(&rd, &[0, 1, 2, 1]);
        let lam = alloc::vec![1, -2, 3];
        let mu = alloc::vec![2, 0, -1];
        assert_eq!(
            rd.pair(&w.apply_y(&mu), &w.apply_x(&lam)),
            rd.pair(&mu, &lam)
        );
    }

    #[test]
    fn extremal_string_sl2() {
        let rd = RootDatum::new(CartanDatum::by_name("A1").unwrap());
        let a = extremal_string(&rd, &[0], &alloc::vec![3]);
        assert_eq!(a, alloc::vec![3]);
    }
}
