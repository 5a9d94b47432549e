//! QSP parameters `(varsigma_i, kappa_i)` and their constraints.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::satake::{RankOneType, SatakeDiagram};
use crate::scalars::{LaurentInt, SignedQPower};
use crate::{Error, Result};

/// Parameters of a quantum symmetric pair: a signed `q`-power `varsigma_i`
/// and a bar-symmetric `kappa_i` for each white node.
#[derive(Clone, Debug, PartialEq)]
pub struct QSPParams {
    pub varsigma: BTreeMap<usize, SignedQPower>,
    pub kappa: BTreeMap<usize, LaurentInt>,
}

impl QSPParams {
    /// One concrete solution of the parameter constraints: the Table-3 value
    /// with positive sign for every white orbit, `kappa = 0`.
    pub fn default_for(diagram: &SatakeDiagram) -> Result<QSPParams> {
        let mut varsigma = BTreeMap::new();
        let mut kappa = BTreeMap::new();
        for orbit in diagram.white_orbits() {
            let sub = diagram.rank_one_subdiagram(&orbit);
            let ty = sub.classify_rank_one().ok_or_else(|| {
                Error::Invalid("white orbit is not of a known real rank one type".to_string())
            })?;
            // exponents are in ambient q (q_i = q^{d_i})
            match ty {
                RankOneType::AI1 => {
                    let i = orbit[0];
                    varsigma.insert(i, SignedQPower::new(false, -diagram.datum.d(i)));
                }
                RankOneType::AII3 => {
                    varsigma.insert(orbit[0], SignedQPower::new(false, diagram.datum.d(orbit[0])));
                }
                RankOneType::AIII11 => {
                    varsigma.insert(orbit[0], SignedQPower::new(false, 0));
                    varsigma.insert(orbit[1], SignedQPower::new(false, 0));
                }
                RankOneType::AIV(n) => {
                    // split choice: varsigma_1 = q^0, varsigma_n = (-1)^n q^{(n-1) d}
                    let d = diagram.datum.d(orbit[0]);
                    varsigma.insert(orbit[0], SignedQPower::new(false, 0));
                    varsigma.insert(
                        orbit[1],
                        SignedQPower::new(n % 2 == 1, (n as i64 - 1) * d),
                    );
                }
                RankOneType::BII(n) => {
                    // q_1 = q^2, varsigma = q^{2n-3} in plain q
                    let i = orbit[0];
                    debug_assert_eq!(diagram.datum.d(i), 2);
                    varsigma.insert(i, SignedQPower::new(false, 2 * n as i64 - 3));
                }
                RankOneType::CII(n) => {
                    let i = orbit[0];
                    debug_assert_eq!(diagram.datum.d(i), 1);
                    varsigma.insert(i, SignedQPower::new(false, n as i64 - 1));
                }
                RankOneType::DII(n) => {
                    let i = orbit[0];
                    varsigma.insert(i, SignedQPower::new(false, n as i64 - 2));
                }
                RankOneType::FII => {
                    let i = orbit[0];
                    varsigma.insert(i, SignedQPower::new(false, 5));
                }
            }
            for &i in &orbit {
                kappa.insert(i, LaurentInt::zero());
            }
        }
        let params = QSPParams { varsigma, kappa };
        params.validate(diagram)?;
        Ok(params)
    }

    /// Whether `kappa_i` is allowed to be nonzero (the support condition).
    pub fn kappa_allowed(diagram: &SatakeDiagram, i: usize) -> bool {
        if diagram.is_black(i) || diagram.tau[i] != i {
            return false;
        }
        if diagram
            .black
            .iter()
            .any(|&j| diagram.root_datum.simple_root_x(j)[i] != 0)
        {
            // <i, alpha_j> != 0 for a black j
            return false;
        }
        // for every tau-fixed white k orthogonal to all black nodes,
        // <k, alpha_i> must be even
        for k in diagram.white() {
            if diagram.tau[k] != k {
                continue;
            }
            let k_orth_black = diagram
                .black
                .iter()
                .all(|&j| diagram.root_datum.simple_root_x(j)[k] == 0);
            if k_orth_black {
                let ai = diagram.root_datum.simple_root_x(i);
                if ai[k] % 2 != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Set a nonzero `kappa_i`, enforcing the support condition, bar symmetry,
    /// and the standing assumption `varsigma_i = q_i^{-1}` when `kappa_i != 0`.
    pub fn with_kappa(mut self, diagram: &SatakeDiagram, i: usize, k: LaurentInt) -> Result<Self> {
        if !k.is_zero() {
            if !Self::kappa_allowed(diagram, i) {
                return Err(Error::Invalid(alloc::format!(
                    "kappa_{i} must vanish for this diagram"
                )));
            }
            if !k.is_bar_symmetric() {
                return Err(Error::Invalid("kappa must be bar-symmetric".to_string()));
            }
            self.varsigma
                .insert(i, SignedQPower::new(false, -diagram.datum.d(i)));
        }
        self.kappa.insert(i, k);
        self.validate(diagram)?;
        Ok(self)
    }

    /// Flip the sign of `varsigma` on a whole tau-orbit (any admissible
    /// assignment flips in pairs for two-element orbits).
    pub fn with_sign_flip(mut self, diagram: &SatakeDiagram, i: usize) -> Result<Self> {
        let j = diagram.tau[i];
        let v = self.varsigma[&i];
        self.varsigma.insert(i, SignedQPower::new(!v.negative, v.exp));
        if j != i {
            let w = self.varsigma[&j];
            self.varsigma.insert(j, SignedQPower::new(!w.negative, w.exp));
        }
        self.validate(diagram)?;
        Ok(self)
    }

    /// Check all parameter constraints against the diagram.
    pub fn validate(&self, diagram: &SatakeDiagram) -> Result<()> {
        let rd = &diagram.root_datum;
        for i in diagram.white() {
            let vs = self
                .varsigma
                .get(&i)
                .ok_or_else(|| Error::Invalid(alloc::format!("missing varsigma_{i}")))?;
            let kap = self.kappa.get(&i).cloned().unwrap_or_else(LaurentInt::zero);
            // kappa support and bar symmetry
            if !kap.is_zero() {
                if !Self::kappa_allowed(diagram, i) {
                    return Err(Error::Invalid(alloc::format!(
                        "kappa_{i} violates the support condition"
                    )));
                }
                if !kap.is_bar_symmetric() {
                    return Err(Error::Invalid(alloc::format!("kappa_{i} is not bar-symmetric")));
                }
                if *vs != SignedQPower::new(false, -diagram.datum.d(i)) {
                    return Err(Error::Invalid(alloc::format!(
                        "varsigma_{i} must equal q_i^-1 when kappa_{i} != 0"
                    )));
                }
            }
            // varsigma_i = varsigma_{tau i} when i . theta(i) = 0
            let ti = diagram.tau[i];
            let mut ei = alloc::vec![0i64; diagram.rank()];
            ei[i] = 1;
            let th = {
                // theta on the root lattice: -w_black(alpha_{tau i}) in root coords
                let x = rd.simple_root_x(ti);
                let img = diagram.w_black.apply_x(&x);
                let neg: Vec<i64> = img.iter().map(|&v| -v).collect();
                rd.x_to_root(&neg).expect("theta of a root is in the root lattice")
            };
            if diagram.datum.dot_vec(&ei, &th) == 0 {
                let vti = self
                    .varsigma
                    .get(&ti)
                    .ok_or_else(|| Error::Invalid(alloc::format!("missing varsigma_{ti}")))?;
                if vs != vti {
                    return Err(Error::Invalid(alloc::format!(
                        "varsigma_{i} must equal varsigma_{ti} (i . theta(i) = 0)"
                    )));
                }
            }
            // the product constraint:
            // varsigma_i varsigma_{tau i}
            //   = (-1)^{<2 rho_black^vee, alpha_i>} q_i^{-<i, 2 rho_black + w_black tau alpha_i>}
            let vti = self.varsigma[&ti];
            let prod = vs.mul(&vti);
            let ai = rd.simple_root_x(i);
            let two_rho_check = rd.two_rho_check_sub_y(&diagram.black);
            let sign_exp = rd.pair(&two_rho_check, &ai);
            let two_rho_x = rd.two_rho_sub_x(&diagram.black);
            let wtai = diagram.w_black.apply_x(&rd.simple_root_x(ti));
            let pow = -(two_rho_x[i] + wtai[i]) * diagram.datum.d(i);
            let expect = SignedQPower::new(sign_exp % 2 != 0, pow);
            if prod != expect {
                return Err(Error::Invalid(alloc::format!(
                    "varsigma_{i} varsigma_{ti} violates the product constraint: got sign {} exp {}, need sign {} exp {}",
                    prod.negative, prod.exp, expect.negative, expect.exp
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::datum::CartanDatum;

    fn diagram(name: &str, black: &[usize], tau: Vec<usize>) -> SatakeDiagram {
        SatakeDiagram::new(CartanDatum::by_name(name).unwrap(), black.to_vec(), tau).unwrap()
    }

    #[test]
    fn ai1_default() {
        let d = diagram("A1", &[], alloc::vec![0]);
        let p = QSPParams::default_for(&d).unwrap();
        assert_eq!(p.varsigma[&0], SignedQPower::new(false, -1));
    }

    #[test]
    fn dii4_default() {
        let d = diagram("D4", &[1, 2, 3], alloc::vec![0, 1, 3, 2]);
        let p = QSPParams::default_for(&d).unwrap();
        // n - 2 = 2
        assert_eq!(p.varsigma[&0], SignedQPower::new(false, 2));
    }

    #[test]
    fn aiv2_product() {
        // AIV n=2: varsigma_1 varsigma_2 = (-1)^2 q^{2-1} = q
        let d = diagram("A2", &[], alloc::vec![1, 0]);
        let p = QSPParams::default_for(&d).unwrap();
        let prod = p.varsigma[&0].mul(&p.varsigma[&1]);
        assert_eq!(prod, SignedQPower::new(false, 1));
    }

    #[test]
    fn table3_values_all_rank_one() {
        for (name, black, tau, i, expect) in [
            ("A3", alloc::vec![0usize, 2], alloc::vec![0usize, 1, 2], 1usize, SignedQPower::new(false, 1)),
            ("B2", alloc::vec![1], alloc::vec![0, 1], 0, SignedQPower::new(false, 1)),
            ("B3", alloc::vec![1, 2], alloc::vec![0, 1, 2], 0, SignedQPower::new(false, 3)),
            ("C3", alloc::vec![0, 2], alloc::vec![0, 1, 2], 1, SignedQPower::new(false, 2)),
            ("D4", alloc::vec![1, 2, 3], alloc::vec![0, 1, 3, 2], 0, SignedQPower::new(false, 2)),
            ("F4", alloc::vec![0, 1, 2], alloc::vec![0, 1, 2, 3], 3, SignedQPower::new(false, 5)),
        ] {
            let d = diagram(name, &black, tau);
            assert!(d.validate().valid, "{name}");
            let p = QSPParams::default_for(&d).unwrap();
            assert_eq!(p.varsigma[&i], expect, "{name}");
        }
    }

    #[test]
    fn kappa_support() {
        let ai1 = diagram("A1", &[], alloc::vec![0]);
        assert!(QSPParams::kappa_allowed(&ai1, 0));
        let p = QSPParams::default_for(&ai1)
            .unwrap()
            .with_kappa(&ai1, 0, LaurentInt::one())
            .unwrap();
        assert!(!p.kappa[&0].is_zero());
        // AII3: white node adjacent to black, kappa forbidden
        let aii3 = diagram("A3", &[0, 2], alloc::vec![0, 1, 2]);
        assert!(!QSPParams::kappa_allowed(&aii3, 1));
        // AIII11: tau moves the node, kappa forbidden
        let aiii = diagram("A1xA1", &[], alloc::vec![1, 0]);
        assert!(!QSPParams::kappa_allowed(&aiii, 0));
        // non-bar-symmetric kappa rejected
        let bad = QSPParams::default_for(&ai1)
            .unwrap()
            .with_kappa(&ai1, 0, LaurentInt::q_power(1));
        assert!(bad.is_err());
    }

    #[test]
    fn sign_violation_detected() {
        let d = diagram("A1", &[], alloc::vec![0]);
        let mut p = QSPParams::default_for(&d).unwrap();
        p.varsigma.insert(0, SignedQPower::new(false, 1)); // q instead of q^-1
        assert!(p.validate(&d).is_err());
    }
}
