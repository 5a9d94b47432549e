//! Satake diagrams: black subsets, diagram involutions, admissibility, and
//! the decomposition into subdiagrams of real rank one.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::datum::{CartanDatum, RootDatum, XWeight, YVec};
use super::weyl::{longest_element, WeylElement};
use crate::{Error, Result};

/// The eight local types of real rank one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankOneType {
    AI1,
    AII3,
    AIII11,
    /// AIV of rank n >= 2 (n = 2 is the two connected swapped white nodes).
    AIV(usize),
    BII(usize),
    CII(usize),
    DII(usize),
    FII,
}

impl RankOneType {
    pub fn label(&self) -> String {
        match self {
            RankOneType::AI1 => "AI1".to_string(),
            RankOneType::AII3 => "AII3".to_string(),
            RankOneType::AIII11 => "AIII11".to_string(),
            RankOneType::AIV(n) => alloc::format!("AIV{n}"),
            RankOneType::BII(n) => alloc::format!("BII{n}"),
            RankOneType::CII(n) => alloc::format!("CII{n}"),
            RankOneType::DII(n) => alloc::format!("DII{n}"),
            RankOneType::FII => "FII".to_string(),
        }
    }
}

/// A Satake diagram: Cartan datum, black subset, involution of the datum.
#[derive(Clone, Debug)]
pub struct SatakeDiagram {
    pub datum: CartanDatum,
    pub root_datum: RootDatum,
    /// Black nodes, sorted.
    pub black: Vec<usize>,
    /// Involution as an index permutation.
    pub tau: Vec<usize>,
    /// Longest element of the black parabolic.
    pub w_black: WeylElement,
}

/// Outcome of the Def. 3.1 admissibility check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatakeReport {
    pub valid: bool,
    /// First failing condition, empty when valid.
    pub failure: String,
}

impl SatakeDiagram {
    pub fn new(datum: CartanDatum, black: Vec<usize>, tau: Vec<usize>) -> Result<Self> {
        let n = datum.rank();
        if tau.len() != n {
            return Err(Error::Invalid("tau has wrong length".into()));
        }
        let mut sorted_black = black;
        sorted_black.sort_unstable();
        sorted_black.dedup();
        if sorted_black.iter().any(|&i| i >= n) {
            return Err(Error::Invalid("black node out of range".into()));
        }
        // tau must be an involution of the Cartan datum
        for i in 0..n {
            if tau[i] >= n || tau[tau[i]] != i {
                return Err(Error::Invalid("tau is not an involution".into()));
            }
            for j in 0..n {
                if datum.dot(tau[i], tau[j]) != datum.dot(i, j) {
                    return Err(Error::Invalid("tau does not preserve the pairing".into()));
                }
            }
        }
        let root_datum = RootDatum::new(datum.clone());
        let w_black = longest_element(&root_datum, &sorted_black);
        Ok(SatakeDiagram {
            datum,
            root_datum,
            black: sorted_black,
            tau,
            w_black,
        })
    }

    pub fn rank(&self) -> usize {
        self.datum.rank()
    }

    pub fn is_black(&self, i: usize) -> bool {
        self.black.binary_search(&i).is_ok()
    }

    /// White nodes, sorted.
    pub fn white(&self) -> Vec<usize> {
        (0..self.rank()).filter(|&i| !self.is_black(i)).collect()
    }

    /// `tau` on `X` (permutes fundamental-weight coordinates).
    pub fn tau_x(&self, l: &XWeight) -> XWeight {
        let mut out = vec![0i64; l.len()];
        for i in 0..l.len() {
            out[self.tau[i]] = l[i];
        }
        out
    }

    /// `tau` on `Y`.
    pub fn tau_y(&self, m: &YVec) -> YVec {
        self.tau_x(m)
    }

    /// `theta = -w_black . tau` on `X`.
    pub fn theta_x(&self, l: &XWeight) -> XWeight {
        let t = self.tau_x(l);
        self.w_black.apply_x(&t).iter().map(|&v| -v).collect()
    }

    /// `theta` on `Y`.
    pub fn theta_y(&self, m: &YVec) -> YVec {
        let t = self.tau_y(m);
        self.w_black.apply_y(&t).iter().map(|&v| -v).collect()
    }

    /// Admissibility per the three conditions: tau-stable black set, tau
    /// acting as `-w_black` on black simples, and integral `<rho_black^vee, j'>`
    /// for tau-fixed white j.
    pub fn validate(&self) -> SatakeReport {
        // (1)
        for &b in &self.black {
            if !self.is_black(self.tau[b]) {
                return SatakeReport {
                    valid: false,
                    failure: alloc::format!("tau does not preserve the black set at node {b}"),
                };
            }
        }
        // (2): tau = -w_black on black simple roots
        for &b in &self.black {
            let a = self.root_datum.simple_root_x(b);
            let img = self.w_black.apply_x(&a);
            let neg: XWeight = img.iter().map(|&v| -v).collect();
            let expect = self.root_datum.simple_root_x(self.tau[b]);
            if neg != expect {
                return SatakeReport {
                    valid: false,
                    failure: alloc::format!("tau != -w_black on black node {b}"),
                };
            }
        }
        // (3): tau-fixed white j must have integral <rho_black^vee, alpha_j>
        let two_rho_check = self.root_datum.two_rho_check_sub_y(&self.black);
        for j in self.white() {
            if self.tau[j] == j {
                let aj = self.root_datum.simple_root_x(j);
                let v = self.root_datum.pair(&two_rho_check, &aj);
                if v % 2 != 0 {
                    return SatakeReport {
                        valid: false,
                        failure: alloc::format!(
                            "<rho_black^vee, alpha_{}> = {}/2 is not an integer",
                            j,
                            v
                        ),
                    };
                }
            }
        }
        // theta^2 = id on X (sanity; follows from (1)-(2))
        for k in 0..self.rank() {
            let mut e = vec![0i64; self.rank()];
            e[k] = 1;
            if self.theta_x(&self.theta_x(&e)) != e {
                return SatakeReport {
                    valid: false,
                    failure: "theta is not an involution on X".to_string(),
                };
            }
        }
        SatakeReport {
            valid: true,
            failure: String::new(),
        }
    }

    /// Orbits of `tau` on white nodes, ordered by smallest element.
    pub fn white_orbits(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for w in self.white() {
            let t = self.tau[w];
            if t < w {
                continue;
            }
            if t == w {
                out.push(vec![w]);
            } else {
                out.push(vec![w, t]);
            }
        }
        out
    }

    /// The subdiagram of real rank one attached to a white orbit: remove all
    /// other white nodes, keep the connected component(s) meeting the orbit,
    /// together with the restricted involution.
    pub fn rank_one_subdiagram(&self, orbit: &[usize]) -> SatakeDiagram {
        let keep: Vec<usize> = {
            let mut nodes: alloc::collections::BTreeSet<usize> =
                self.black.iter().copied().collect();
            for &o in orbit {
                nodes.insert(o);
            }
            // connected components meeting the orbit
            let mut comp: alloc::collections::BTreeSet<usize> = orbit.iter().copied().collect();
            loop {
                let additions: Vec<usize> = nodes
                    .iter()
                    .copied()
                    .filter(|&a| {
                        !comp.contains(&a) && comp.iter().any(|&b| self.datum.dot(a, b) != 0)
                    })
                    .collect();
                if additions.is_empty() {
                    break;
                }
                comp.extend(additions);
            }
            comp.into_iter().collect()
        };
        self.subdiagram(&keep)
    }

    /// Full subdiagram on the given (sorted) node set, restricting the
    /// involution (which must preserve the set).
    pub fn subdiagram(&self, nodes: &[usize]) -> SatakeDiagram {
        let pos: alloc::collections::BTreeMap<usize, usize> = nodes
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let m = nodes.len();
        let mut pairing = vec![vec![0i64; m]; m];
        for a in 0..m {
            for b in 0..m {
                pairing[a][b] = self.datum.dot(nodes[a], nodes[b]);
            }
        }
        let datum = CartanDatum::new(pairing).expect("subdiagram datum");
        let black: Vec<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, &old)| self.is_black(old))
            .map(|(new, _)| new)
            .collect();
        let tau: Vec<usize> = nodes
            .iter()
            .map(|&old| *pos.get(&self.tau[old]).expect("tau preserves subdiagram"))
            .collect();
        SatakeDiagram::new(datum, black, tau).expect("subdiagram is a Satake diagram")
    }

    /// Classify a connected real-rank-one Satake diagram against the eight
    /// local types.
    pub fn classify_rank_one(&self) -> Option<RankOneType> {
        let n = self.rank();
        let whites = self.white();
        let nblack = self.black.len();
        // normalized norms: divide i.i by min so shortest = 2
        let min_norm = (0..n).map(|i| self.datum.dot(i, i)).min()?;
        let norm = |i: usize| 2 * self.datum.dot(i, i) / min_norm;
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.datum.dot(a, b) != 0)
            .collect();
        let degree = |i: usize| edges.iter().filter(|&&(a, b)| a == i || b == i).count();
        match (n, whites.len()) {
            (1, 1) => Some(RankOneType::AI1),
            (2, 2) => {
                if edges.is_empty() && self.tau[0] == 1 {
                    Some(RankOneType::AIII11)
                } else if !edges.is_empty() && self.tau[0] == 1 {
                    Some(RankOneType::AIV(2))
                } else {
                    None
                }
            }
            (3, 1)
                if nblack == 2
                    && (0..n).all(|i| norm(i) == 2)
                    && degree(whites[0]) == 2 =>
            {
                Some(RankOneType::AII3)
            }
            _ => {
                let simply_laced = (0..n).all(|i| norm(i) == 2);
                if whites.len() == 2 && simply_laced && self.tau[whites[0]] == whites[1] {
                    // chain with swapped white ends
                    if degree(whites[0]) == 1 && degree(whites[1]) == 1 {
                        return Some(RankOneType::AIV(n));
                    }
                    return None;
                }
                if whites.len() != 1 {
                    return None;
                }
                let w = whites[0];
                if simply_laced {
                    // D-type: one node of degree 3, white at a chain end
                    let forks = (0..n).filter(|&i| degree(i) == 3).count();
                    if forks == 1 && degree(w) == 1 && n >= 4 {
                        return Some(RankOneType::DII(n));
                    }
                    return None;
                }
                // two lengths: B/C/F
                let longs: Vec<usize> = (0..n).filter(|&i| norm(i) == 4).collect();
                let shorts: Vec<usize> = (0..n).filter(|&i| norm(i) == 2).collect();
                if longs.len() == n - 1 && shorts.len() == 1 && norm(w) == 4 && degree(w) == 1 {
                    // white long end, chain towards one short end: BII
                    return Some(RankOneType::BII(n));
                }
                if shorts.len() == n - 1 && longs.len() == 1 && norm(w) == 2 && degree(w) == 2 {
                    return Some(RankOneType::CII(n));
                }
                if n == 4 && longs.len() == 2 && norm(w) == 2 && degree(w) == 1 {
                    return Some(RankOneType::FII);
                }
                None
            }
        }
    }

    /// One labeled subdiagram of real rank one per white `tau`-orbit, plus the
    /// compact-rank-one (single black node) subdiagrams.
    pub fn rank_one_decomposition(&self) -> (Vec<(Vec<usize>, SatakeDiagram, Option<RankOneType>)>, Vec<usize>) {
        let mut out = Vec::new();
        for orbit in self.white_orbits() {
            let sub = self.rank_one_subdiagram(&orbit);
            let ty = sub.classify_rank_one();
            out.push((orbit, sub, ty));
        }
        (out, self.black.clone())
    }
}
