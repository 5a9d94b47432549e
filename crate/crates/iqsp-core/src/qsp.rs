//! Quantum symmetric pair operators: `B_i` actions, the intertwiner solved
//! degree by degree, the rank-one PBW oracle, the weight function `g` with the
//! module isomorphism built from it, and the braid/adjunction certificates.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::canbasis::PbwBasis;
use crate::cartan::{longest_element, IWeightCtx, QSPParams, SatakeDiagram, WeylElement, XWeight};
use crate::falg::{fwt_height, FAlgebra, FElement, FWt};
use crate::linalg::{solve_unique, SparseVec};
use crate::scalars::RatFunc;
use crate::ualg::{braid_e, braid_e_inv, Gen, UElement};
use crate::umod::{
    act_gen, braid_vector, braid_vector_word, braid_vector_word_inv, ContraForm,
    Module, ModVector,
};
use crate::{Error, Result};

/// Everything fixed by a choice of Satake diagram and parameters.
#[derive(Clone, Debug)]
pub struct QSPContext {
    pub diagram: SatakeDiagram,
    pub params: QSPParams,
    pub iweights: IWeightCtx,
    /// `P_i = T_{w_black}(E_{tau i})` for white `i`.
    pub twb_e: BTreeMap<usize, FElement>,
    /// `P'_i = T_{w_black}^{-1}(E_{tau i})`.
    pub twb_e_inv: BTreeMap<usize, FElement>,
    /// scalar with `bar(P_i) = c_i P'_i`.
    pub bar_scalar: BTreeMap<usize, RatFunc>,
    /// content of `w_black(alpha_{tau i})` in `N[I]`.
    pub beta: BTreeMap<usize, FWt>,
    /// reduced word of `w_black w_0`.
    pub w_circ: WeylElement,
    pbw_circ: core::cell::RefCell<Option<alloc::rc::Rc<PbwBasis>>>,
}

impl QSPContext {
    pub fn new(f: &mut FAlgebra, diagram: SatakeDiagram, params: QSPParams) -> Result<QSPContext> {
        let rep = diagram.validate();
        if !rep.valid {
            return Err(Error::Invalid(rep.failure));
        }
        params.validate(&diagram)?;
        let iweights = IWeightCtx::new(&diagram);
        let rd = f.rd.clone();
        let mut twb_e = BTreeMap::new();
        let mut twb_e_inv = BTreeMap::new();
        let mut bar_scalar = BTreeMap::new();
        let mut beta = BTreeMap::new();
        for i in diagram.white() {
            let ti = diagram.tau[i];
            let p = braid_e(f, &diagram.w_black, ti)?;
            let pinv = braid_e_inv(f, &diagram.w_black, ti)?;
            // bar(P) is proportional to P'; pin the scalar and verify
            let pbar = p.bar();
            let c = proportionality(&pbar, &pinv).ok_or_else(|| {
                Error::Invalid("bar(T_w(E)) not proportional to T_w^{-1}(E)".into())
            })?;
            let (wt, _) = p.homogeneous().expect("homogeneous braid image");
            beta.insert(i, wt.clone());
            twb_e.insert(i, p);
            twb_e_inv.insert(i, pinv);
            bar_scalar.insert(i, c);
        }
        let all: Vec<usize> = (0..rd.rank()).collect();
        let w0 = longest_element(&rd, &all);
        // reduced word of w_black w_0
        let mut word = diagram.w_black.word.clone();
        word.extend(w0.word.iter().copied());
        let w_circ = WeylElement::from_word(&rd, &word);
        if w_circ.length() + diagram.w_black.length() != w0.length() {
            return Err(Error::Invalid("w_black w_0 length mismatch".into()));
        }
        Ok(QSPContext {
            diagram,
            params,
            iweights,
            twb_e,
            twb_e_inv,
            bar_scalar,
            beta,
            w_circ,
            pbw_circ: core::cell::RefCell::new(None),
        })
    }

    /// Shared PBW basis of `U^+(w_black w_0)` (intertwiner convention).
    pub fn pbw_circ(&self, f: &mut FAlgebra) -> Result<alloc::rc::Rc<PbwBasis>> {
        if let Some(p) = self.pbw_circ.borrow().as_ref() {
            return Ok(p.clone());
        }
        let p = alloc::rc::Rc::new(PbwBasis::new(f, &self.w_circ.word, false)?);
        *self.pbw_circ.borrow_mut() = Some(p.clone());
        Ok(p)
    }

    pub fn is_black(&self, i: usize) -> bool {
        self.diagram.is_black(i)
    }

    pub fn varsigma(&self, i: usize) -> RatFunc {
        self.params.varsigma[&i].to_ratfunc()
    }

    pub fn kappa(&self, i: usize) -> RatFunc {
        self.params
            .kappa
            .get(&i)
            .map(|k| RatFunc::from_laurent(k))
            .unwrap_or_else(RatFunc::zero)
    }

    /// `B_i` as a normal-form `U`-element.
    pub fn b_element(&self, f: &mut FAlgebra, i: usize) -> Result<UElement> {
        let t = f.theta(i);
        let fi = UElement::from_minus(f, &t)?;
        if self.is_black(i) {
            return Ok(fi);
        }
        let p = UElement::from_plus(f, &self.twb_e[&i])?;
        let ktm = UElement::kt(f, i, -1);
        let second = p.mul(f, &ktm)?.scale(&self.varsigma(i));
        let third = ktm.scale(&self.kappa(i));
        Ok(fi.add(&second).add(&third))
    }

    /// `psi(B_i)`: the image of `B_i` under the bar involution of `U`.
    pub fn psi_b_element(&self, f: &mut FAlgebra, i: usize) -> Result<UElement> {
        let b = self.b_element(f, i)?;
        b.bar(f)
    }
}

fn proportionality(a: &FElement, b: &FElement) -> Option<RatFunc> {
    let (wa, va) = a.homogeneous()?;
    let (wb, vb) = b.homogeneous()?;
    if wa != wb {
        return None;
    }
    let k = vb.iter().position(|c| !c.is_zero())?;
    let c = va[k].div(&vb[k]);
    for (x, y) in va.iter().zip(vb.iter()) {
        if x != &c.mul(y) {
            return None;
        }
    }
    Some(c)
}

/// The `B_i` action on a module vector: three-term action for white nodes,
/// plain `F_i` for black ones.
pub fn act_bi(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    m: &Module,
    i: usize,
    v: &ModVector,
) -> Result<ModVector> {
    let mut out = act_gen(f, m, &Gen::F(i), v)?;
    if !ctx.is_black(i) {
        let mut mu = vec![0i64; f.rank()];
        mu[i] = -f.datum.d(i);
        let kv = act_gen(f, m, &Gen::K(mu), v)?;
        let p = ctx.twb_e[&i].clone();
        let pv = crate::umod::act_f_element(f, m, true, &p, &kv)?;
        out = out.add(&pv.scale(&ctx.varsigma(i)));
        let kap = ctx.kappa(i);
        if !kap.is_zero() {
            out = out.add(&kv.scale(&kap));
        }
    }
    Ok(out)
}

/// The same action with `T_{w_black}(E_{tau i})` evaluated by the braid
/// round-trip `T_w(E_{tau i} T_w^{-1}(v))`; used to cross-check `act_bi`.
pub fn act_bi_roundtrip(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    m: &Module,
    i: usize,
    v: &ModVector,
) -> Result<ModVector> {
    let mut out = act_gen(f, m, &Gen::F(i), v)?;
    if !ctx.is_black(i) {
        let mut mu = vec![0i64; f.rank()];
        mu[i] = -f.datum.d(i);
        let kv = act_gen(f, m, &Gen::K(mu), v)?;
        let back = braid_vector_word_inv(f, m, &ctx.diagram.w_black, &kv)?;
        let mid = act_gen(f, m, &Gen::E(ctx.diagram.tau[i]), &back)?;
        let pv = braid_vector_word(f, m, &ctx.diagram.w_black, &mid)?;
        out = out.add(&pv.scale(&ctx.varsigma(i)));
        let kap = ctx.kappa(i);
        if !kap.is_zero() {
            out = out.add(&kv.scale(&kap));
        }
    }
    Ok(out)
}

/// `B_i^(a) = B_i^a / [a]_i!` as a module operator.
pub fn act_bi_divided(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    m: &Module,
    i: usize,
    a: u32,
    v: &ModVector,
) -> Result<ModVector> {
    let mut out = v.clone();
    for _ in 0..a {
        out = act_bi(ctx, f, m, i, &out)?;
    }
    let fact = RatFunc::from_laurent(&crate::scalars::qfact(a as i64, f.datum.d(i))).inv();
    Ok(out.scale(&fact))
}

// ---------------------------------------------------------------------------
// the intertwiner
// ---------------------------------------------------------------------------

/// Per-weight components of the intertwiner, in `f` coordinates and (when a
/// PBW restriction applies) in PBW exponent coordinates.
#[derive(Clone, Debug)]
pub struct UpsilonTable {
    pub comps: BTreeMap<FWt, FElement>,
    pub bound: u32,
    /// Exponent coordinates over the `w_black w_0` PBW monomials.
    pub pbw_coords: BTreeMap<FWt, Vec<(Vec<u32>, RatFunc)>>,
    /// Integrality per component.
    pub integral: BTreeMap<FWt, bool>,
}

impl UpsilonTable {
    /// All coefficients lie in `Z[q, q^-1]` (in PBW coordinates).
    pub fn all_integral(&self) -> bool {
        self.integral.values().all(|&b| b)
    }
}

/// Admissible intertwiner supports: contents `nu` with `theta(nu) = -nu`, heights
/// `1..=bound`.
pub fn upsilon_supports(f: &mut FAlgebra, diagram: &SatakeDiagram, bound: u32) -> Result<Vec<FWt>> {
    let n = f.rank();
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(n: usize, k: usize, left: u32, cur: &mut FWt, out: &mut Vec<FWt>) {
        if k == n {
            if cur.iter().any(|&v| v > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(n, k + 1, left - v, cur, out);
        }
        cur[k] = 0;
    }
    let mut all = Vec::new();
    for h in 1..=bound {
        let mut batch = Vec::new();
        rec(n, 0, h, &mut cur, &mut batch);
        all.extend(batch.into_iter().filter(|w| fwt_height(w) == h));
    }
    all.sort_by_key(|w| (fwt_height(w), w.clone()));
    all.dedup();
    for nu in all {
        let x = crate::ualg::content_to_x(f, &nu);
        let th = diagram.theta_x(&x);
        let neg: XWeight = x.iter().map(|&v| -v).collect();
        if th == neg {
            out.push(nu);
        }
    }
    Ok(out)
}

/// A probe vector of the lowest-weight cone: an `f`-element `x` standing for
/// `x^+ xi` in `omega L(lambda_probe)`; the cone realizes the module exactly
/// for the heights touched because `lambda_probe` dominates them all.
struct Cone {
    lambda: XWeight,
    /// components above this f-height are never materialized; the equation
    /// filter keeps only components well inside it
    cutoff: u32,
}

impl Cone {
    fn act_e(&self, f: &mut FAlgebra, i: usize, x: &FElement) -> Result<FElement> {
        let t = f.theta(i);
        f.multiply_trunc(&t, x, self.cutoff)
    }

    /// `F_i (x^+ xi) = [q_i^{<i,l>} q^{i.i - i.|x|} (_i r x) - q_i^{-<i,l>} (r_i x)]
    ///                 / (q_i - q_i^-1)`
    fn act_f(&self, f: &mut FAlgebra, i: usize, x: &FElement) -> Result<FElement> {
        let di = f.datum.d(i);
        let li = self.lambda[i];
        let denom = RatFunc::q_power(di).sub(&RatFunc::q_power(-di)).inv();
        let mut out = FElement::zero();
        let comps: Vec<(FWt, Vec<RatFunc>)> = x
            .comps
            .iter()
            .map(|(w, v)| (w.clone(), v.clone()))
            .collect();
        for (wt, coords) in comps {
            let mut piece = FElement::default();
            piece.comps.insert(wt.clone(), coords);
            let mut ei = vec![0i64; f.rank()];
            ei[i] = 1;
            let inu = f
                .datum
                .dot_vec(&ei, &wt.iter().map(|&v| v as i64).collect::<Vec<_>>());
            let ii = f.datum.dot(i, i);
            let l = f.r_map(true, i, &piece)?;
            let r = f.r_map(false, i, &piece)?;
            let cl = RatFunc::q_power(di * li + ii - inu).mul(&denom);
            let cr = RatFunc::q_power(-di * li).mul(&denom).neg();
            out = out.add(&l.scale(&cl)).add(&r.scale(&cr));
        }
        Ok(out)
    }

    /// scalar of `K_mu` on the component at content `nu`.
    fn k_scalar(&self, f: &FAlgebra, mu: &[i64], nu: &FWt) -> RatFunc {
        let x = crate::ualg::content_to_x(f, nu);
        let w: XWeight = self
            .lambda
            .iter()
            .zip(x.iter())
            .map(|(l, v)| -l + v)
            .collect();
        RatFunc::q_power(f.rd.pair(&mu.to_vec(), &w))
    }

    fn act_k(&self, f: &FAlgebra, mu: &[i64], x: &FElement) -> FElement {
        let mut out = FElement::zero();
        for (wt, coords) in &x.comps {
            let s = self.k_scalar(f, mu, wt);
            let mut piece = FElement::default();
            piece
                .comps
                .insert(wt.clone(), coords.iter().map(|c| c.mul(&s)).collect());
            out = out.add(&piece);
        }
        Ok::<(), Error>(()).unwrap();
        out
    }

    /// multiply by a plus element on the left (`U^+` acting on the cone).
    fn act_plus(&self, f: &mut FAlgebra, p: &FElement, x: &FElement) -> Result<FElement> {
        f.multiply_trunc(p, x, self.cutoff)
    }
}

/// Solve the intertwining identity up to the height bound on a lowest-weight
/// probe cone. Unknowns are restricted to the PBW span of `U^+(w_black w_0)`
/// at theta-anti-fixed contents; the solution is unique or the call fails.
pub fn solve_upsilon(ctx: &QSPContext, f: &mut FAlgebra, bound: u32) -> Result<UpsilonTable> {
    let supports = upsilon_supports(f, &ctx.diagram, bound)?;
    // PBW restriction (skip when there are no black nodes: U^+(w_0) = U^+)
    let pbw = if ctx.diagram.black.is_empty() {
        None
    } else {
        Some(ctx.pbw_circ(f)?)
    };
    // unknown list: (content, local index, f-coords of the unknown vector)
    let mut unknowns: Vec<(FWt, FElement)> = Vec::new();
    let mut labels: Vec<(FWt, Vec<u32>)> = Vec::new();
    for nu in &supports {
        match &pbw {
            None => {
                let dim = f.space(nu)?.dim();
                for k in 0..dim {
                    let el = crate::ualg::basis_element(f, nu, k as u32)?;
                    unknowns.push((nu.clone(), el));
                    labels.push((nu.clone(), vec![k as u32]));
                }
            }
            Some(p) => {
                for exps in p.exponents_at(nu) {
                    let el = p.monomial(f, &exps)?;
                    unknowns.push((nu.clone(), el));
                    labels.push((nu.clone(), exps));
                }
            }
        }
    }
    let max_beta = ctx
        .beta
        .values()
        .map(|b| fwt_height(b))
        .max()
        .unwrap_or(0);
    let lambda: XWeight = vec![(bound + max_beta + 3) as i64; f.rank()];
    // probe vectors: start from xi, escalate with low words if needed
    let mut probe_words: Vec<Vec<u8>> = vec![Vec::new()];
    for escalation in 0..3u32 {
        let mut eqs: Vec<(SparseVec, RatFunc)> = Vec::new();
        for word in &probe_words {
            let x = f.word_element(word)?;
            let hx = word.len() as u32;
            let cone = Cone {
                lambda: lambda.clone(),
                cutoff: hx + bound,
            };
            collect_upsilon_equations(ctx, f, &cone, &x, hx, bound, &unknowns, &mut eqs)?;
        }
        match solve_unique(&eqs, unknowns.len() as u32) {
            Err(()) => {
                return Err(Error::Singular(
                    "intertwiner system inconsistent (parameter violation?)".into(),
                ))
            }
            Ok(Some(sol)) => {
                return assemble_upsilon(f, &pbw, &supports, &unknowns, &labels, &sol, bound)
            }
            Ok(None) => {
                // escalate: add probe words of the next height
                let h = escalation + 1;
                let mut next = Vec::new();
                let mut cur = vec![0u32; f.rank()];
                collect_heights(f.rank(), h, &mut cur, &mut next);
                for nu in next {
                    let words: Vec<Vec<u8>> = {
                        let sp = f.space(&nu)?;
                        (0..sp.dim()).map(|k| sp.basis_word(k).to_vec()).collect()
                    };
                    probe_words.extend(words);
                }
            }
        }
    }
    Err(Error::Singular(
        "intertwiner system underdetermined after probe escalation".into(),
    ))
}

fn collect_heights(n: usize, h: u32, cur: &mut FWt, out: &mut Vec<FWt>) {
    fn rec(n: usize, k: usize, left: u32, cur: &mut FWt, out: &mut Vec<FWt>) {
        if k == n {
            if left == 0 && cur.iter().any(|&v| v > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(n, k + 1, left - v, cur, out);
        }
        cur[k] = 0;
    }
    rec(n, 0, h, cur, out);
}

/// Append the scalar equations from one probe vector.
#[allow(clippy::too_many_arguments)]
fn collect_upsilon_equations(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    cone: &Cone,
    x: &FElement,
    hx: u32,
    bound: u32,
    unknowns: &[(FWt, FElement)],
    eqs: &mut Vec<(SparseVec, RatFunc)>,
) -> Result<()> {
    // operator pairs (L, R): equation L(Upsilon(v)) - Upsilon(R(v)) = 0
    // for L = B_i (white), R = psi(B_i); and L = R = E_j / F_j (black)
    let whites = ctx.diagram.white();
    let blacks = ctx.diagram.black.clone();
    let mut ops: Vec<(UOp, UOp)> = Vec::new();
    for &i in &whites {
        ops.push((UOp::B(i), UOp::PsiB(i)));
    }
    for &j in &blacks {
        ops.push((UOp::E(j), UOp::E(j)));
        ops.push((UOp::F(j), UOp::F(j)));
    }
    for (lop, rop) in ops {
        // constant part from Upsilon_0 = 1
        let c_l = apply_uop(ctx, f, cone, &lop, x)?;
        let c_r = apply_uop(ctx, f, cone, &rop, x)?;
        let const_part = c_l.sub(&c_r);
        // per-unknown columns
        let mut cols: Vec<(usize, FElement)> = Vec::new();
        for (k, (_, el)) in unknowns.iter().enumerate() {
            let uv = cone.act_plus(f, el, x)?;
            let l = apply_uop(ctx, f, cone, &lop, &uv)?;
            let rv = apply_uop(ctx, f, cone, &rop, x)?;
            let r = cone.act_plus(f, el, &rv)?;
            let col = l.sub(&r);
            if !col.is_zero() {
                cols.push((k, col));
            }
        }
        // scalar equations keyed by (content, coord); drop components deeper
        // than the solvable range
        let mut rows: BTreeMap<(FWt, usize), Vec<(u32, RatFunc)>> = BTreeMap::new();
        for (k, col) in &cols {
            for (wt, coords) in &col.comps {
                if fwt_height(wt) > hx + bound + 1 {
                    continue;
                }
                // the F_i . Upsilon_h term reaches depth hx + h - 1; keep only
                // components that cannot receive contributions from heights
                // beyond the bound: depth <= hx + bound - 1
                if fwt_height(wt) + 1 > hx + bound {
                    continue;
                }
                for (t, c) in coords.iter().enumerate() {
                    if !c.is_zero() {
                        rows.entry((wt.clone(), t))
                            .or_default()
                            .push((*k as u32, c.clone()));
                    }
                }
            }
        }
        for (wt, coords) in &const_part.comps {
            if fwt_height(wt) + 1 > hx + bound {
                continue;
            }
            for (t, c) in coords.iter().enumerate() {
                if !c.is_zero() {
                    rows.entry((wt.clone(), t)).or_default();
                }
            }
        }
        for ((wt, t), row) in rows {
            let rhs = const_part
                .comps
                .get(&wt)
                .map(|v| v[t].clone())
                .unwrap_or_else(RatFunc::zero)
                .neg();
            eqs.push((SparseVec::from_entries(row), rhs));
        }
    }
    Ok(())
}

enum UOp {
    B(usize),
    PsiB(usize),
    E(usize),
    F(usize),
}

fn apply_uop(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    cone: &Cone,
    op: &UOp,
    x: &FElement,
) -> Result<FElement> {
    match op {
        UOp::E(j) => cone.act_e(f, *j, x),
        UOp::F(j) => cone.act_f(f, *j, x),
        UOp::B(i) => {
            let i = *i;
            let mut out = cone.act_f(f, i, x)?;
            let mut mu = vec![0i64; f.rank()];
            mu[i] = -f.datum.d(i);
            let kv = cone.act_k(f, &mu, x);
            let p = ctx.twb_e[&i].clone();
            let pv = cone.act_plus(f, &p, &kv)?;
            out = out.add(&pv.scale(&ctx.varsigma(i)));
            let kap = ctx.kappa(i);
            if !kap.is_zero() {
                out = out.add(&kv.scale(&kap));
            }
            Ok(out)
        }
        UOp::PsiB(i) => {
            // psi(B_i) = F_i + bar(varsigma_i) bar(P_i) Kt_i + bar(kappa_i) Kt_i
            let i = *i;
            let mut out = cone.act_f(f, i, x)?;
            let mut mu = vec![0i64; f.rank()];
            mu[i] = f.datum.d(i);
            let kv = cone.act_k(f, &mu, x);
            let pprime = ctx.twb_e_inv[&i].clone();
            let pv = cone.act_plus(f, &pprime, &kv)?;
            let coeff = ctx.varsigma(i).bar().mul(&ctx.bar_scalar[&i]);
            out = out.add(&pv.scale(&coeff));
            let kap = ctx.kappa(i).bar();
            if !kap.is_zero() {
                out = out.add(&kv.scale(&kap));
            }
            Ok(out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble_upsilon(
    f: &mut FAlgebra,
    pbw: &Option<alloc::rc::Rc<PbwBasis>>,
    supports: &[FWt],
    unknowns: &[(FWt, FElement)],
    labels: &[(FWt, Vec<u32>)],
    sol: &[RatFunc],
    bound: u32,
) -> Result<UpsilonTable> {
    let _ = f;
    let mut comps: BTreeMap<FWt, FElement> = BTreeMap::new();
    let mut pbw_coords: BTreeMap<FWt, Vec<(Vec<u32>, RatFunc)>> = BTreeMap::new();
    for nu in supports {
        comps.insert(nu.clone(), FElement::zero());
        pbw_coords.insert(nu.clone(), Vec::new());
    }
    for (k, (nu, el)) in unknowns.iter().enumerate() {
        if sol[k].is_zero() {
            continue;
        }
        let acc = comps.get_mut(nu).unwrap();
        *acc = acc.add(&el.scale(&sol[k]));
        pbw_coords
            .get_mut(nu)
            .unwrap()
            .push((labels[k].1.clone(), sol[k].clone()));
    }
    comps.retain(|_, v| !v.is_zero());
    pbw_coords.retain(|_, v| !v.is_empty());
    let mut integral = BTreeMap::new();
    for (nu, coords) in &pbw_coords {
        let ok = if pbw.is_some() {
            coords.iter().all(|(_, c)| c.as_laurent().is_some())
        } else {
            // no PBW restriction: check over divided-power monomials of the
            // full PBW of w_0 is equivalent to Laurent PBW coords; with the
            // trivial restriction the coords are f-basis words, so test the
            // element against the w_0 PBW instead
            true
        };
        integral.insert(nu.clone(), ok);
    }
    // for the unrestricted case compute integrality over the w_0 PBW
    if pbw.is_none() {
        let all: Vec<usize> = (0..f.rank()).collect();
        let rd = f.rd.clone();
        let w0 = longest_element(&rd, &all);
        let full = PbwBasis::new(f, &w0.word, false)?;
        for (nu, el) in &comps {
            let exps = full.exponents_at(nu);
            let dim = f.space(nu)?.dim();
            let mut solver = crate::linalg::SpanSolver::new(dim as u32);
            let mut monos = Vec::new();
            for e in &exps {
                let m = full.monomial(f, e)?;
                let coords = m
                    .comps
                    .get(nu)
                    .cloned()
                    .unwrap_or_else(|| vec![RatFunc::zero(); dim]);
                solver.insert(&sparse_vec(&coords));
                monos.push(e.clone());
            }
            let coords = el
                .comps
                .get(nu)
                .cloned()
                .unwrap_or_else(|| vec![RatFunc::zero(); dim]);
            let expr = solver
                .express(&sparse_vec(&coords))
                .ok_or_else(|| Error::Singular("component escapes PBW span".into()))?;
            let ok = expr.iter().all(|(_, c)| c.as_laurent().is_some());
            integral.insert(nu.clone(), ok);
            let entry = pbw_coords.entry(nu.clone()).or_default();
            entry.clear();
            for (t, c) in expr {
                entry.push((monos[t as usize].clone(), c));
            }
        }
    }
    Ok(UpsilonTable {
        comps,
        bound,
        pbw_coords,
        integral,
    })
}

fn sparse_vec(v: &[RatFunc]) -> SparseVec {
    SparseVec::from_entries(
        v.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u32, c.clone()))
            .collect(),
    )
}

/// Apply the intertwiner to a module vector (finite operator sum).
pub fn apply_upsilon(
    f: &mut FAlgebra,
    m: &Module,
    table: &UpsilonTable,
    v: &ModVector,
) -> Result<ModVector> {
    let mut out = v.clone();
    for el in table.comps.values() {
        let uv = crate::umod::act_f_element(f, m, true, el, v)?;
        out = out.add(&uv);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// rank one oracle
// ---------------------------------------------------------------------------

/// Solve the one-sided derivation constraints degree by degree:
///
/// `_i r (U_nu) = -(q_i - q_i^-1) [vs_i q^{i.beta} P_i U_{nu - i - beta}
///                                 + kappa_i U_{nu - 2i'}]`-style
/// `r_i (U_nu) = -(q_i - q_i^-1) [vs_i^-1 c_i U_{nu - i - beta} P'_i
///                                 + kappa_i U_{nu - 2i'}]`
/// `r_j = _j r = 0` on black nodes,
///
/// independent of the module-probe solver. Reports the gamma tables over the
/// PBW monomials of the fixed reduced word of `w_black w_0`.
pub fn rank1_upsilon_pbw(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    bound: u32,
) -> Result<UpsilonTable> {
    let supports = upsilon_supports(f, &ctx.diagram, bound)?;
    let known_zero = FElement::zero();
    let mut comps: BTreeMap<FWt, FElement> = BTreeMap::new();
    let one = FElement::one(f.rank());
    let whites = ctx.diagram.white();
    let blacks = ctx.diagram.black.clone();
    for nu in &supports {
        let dim = f.space(nu)?.dim();
        let mut eqs: Vec<(SparseVec, RatFunc)> = Vec::new();
        // RHS lookup: component at a content, treating height 0 as 1
        let lookup = |comps: &BTreeMap<FWt, FElement>, wt: &[i64]| -> Option<FElement> {
            if wt.iter().any(|&v| v < 0) {
                return Some(known_zero.clone());
            }
            let w: FWt = wt.iter().map(|&v| v as u32).collect();
            if fwt_height(&w) == 0 {
                return Some(one.clone());
            }
            Some(comps.get(&w).cloned().unwrap_or_else(FElement::zero))
        };
        for &i in &whites {
            let di = f.datum.d(i);
            let qq = RatFunc::q_power(di).sub(&RatFunc::q_power(-di));
            let beta = ctx.beta[&i].clone();
            // nu - e_i - beta
            let mut prev: Vec<i64> = nu.iter().map(|&v| v as i64).collect();
            prev[i] -= 1;
            for (k, b) in beta.iter().enumerate() {
                prev[k] -= *b as i64;
            }
            let up_prev = lookup(&comps, &prev).unwrap();
            // kappa term pairs with the component one step below
            let mut prev_k: Vec<i64> = nu.iter().map(|&v| v as i64).collect();
            prev_k[i] -= 1;
            let up_k = lookup(&comps, &prev_k).unwrap();
            let mut ei = vec![0i64; f.rank()];
            ei[i] = 1;
            let ibeta = f
                .datum
                .dot_vec(&ei, &beta.iter().map(|&v| v as i64).collect::<Vec<_>>());
            // left derivation RHS
            let p = ctx.twb_e[&i].clone();
            let lhs_l = f.multiply(&p, &up_prev)?;
            let mut rhs_l = lhs_l
                .scale(&ctx.varsigma(i))
                .scale(&RatFunc::q_power(ibeta));
            if !ctx.kappa(i).is_zero() {
                rhs_l = rhs_l.add(&up_k.scale(&ctx.kappa(i)));
            }
            let rhs_l = rhs_l.scale(&qq.neg());
            // right derivation RHS
            let pp = ctx.twb_e_inv[&i].clone();
            let rhs_r_core = f.multiply(&up_prev, &pp)?;
            let mut rhs_r = rhs_r_core
                .scale(&ctx.varsigma(i).inv())
                .scale(&ctx.bar_scalar[&i]);
            if !ctx.kappa(i).is_zero() {
                rhs_r = rhs_r.add(&up_k.scale(&ctx.kappa(i)));
            }
            let rhs_r = rhs_r.scale(&qq.neg());
            push_derivation_eqs(f, nu, dim, i, true, &rhs_l, &mut eqs)?;
            push_derivation_eqs(f, nu, dim, i, false, &rhs_r, &mut eqs)?;
        }
        for &j in &blacks {
            push_derivation_eqs(f, nu, dim, j, true, &FElement::zero(), &mut eqs)?;
            push_derivation_eqs(f, nu, dim, j, false, &FElement::zero(), &mut eqs)?;
        }
        let sol = solve_unique(&eqs, dim as u32)
            .map_err(|_| Error::Singular("rank-one oracle inconsistent".into()))?
            .ok_or_else(|| Error::Singular("rank-one oracle underdetermined".into()))?;
        let mut el = FElement::default();
        el.comps.insert(nu.clone(), sol);
        el.retain_nonzero();
        if !el.is_zero() {
            comps.insert(nu.clone(), el);
        }
    }
    // express over the fixed w_circ PBW and report integrality
    let pbw = ctx.pbw_circ(f)?;
    let mut pbw_coords = BTreeMap::new();
    let mut integral = BTreeMap::new();
    for (nu, el) in &comps {
        let exps = pbw.exponents_at(nu);
        let dim = f.space(nu)?.dim();
        let mut solver = crate::linalg::SpanSolver::new(dim as u32);
        let mut monos = Vec::new();
        for e in &exps {
            let m = pbw.monomial(f, e)?;
            let coords = m
                .comps
                .get(nu)
                .cloned()
                .unwrap_or_else(|| vec![RatFunc::zero(); dim]);
            solver.insert(&sparse_vec(&coords));
            monos.push(e.clone());
        }
        let coords = el
            .comps
            .get(nu)
            .cloned()
            .unwrap_or_else(|| vec![RatFunc::zero(); dim]);
        let expr = solver.express(&sparse_vec(&coords)).ok_or_else(|| {
            Error::Singular("oracle component escapes U^+(w_black w_0)".into())
        })?;
        let mut entry = Vec::new();
        let mut ok = true;
        for (t, c) in expr {
            ok = ok && c.as_laurent().is_some();
            entry.push((monos[t as usize].clone(), c));
        }
        integral.insert(nu.clone(), ok);
        pbw_coords.insert(nu.clone(), entry);
    }
    Ok(UpsilonTable {
        comps,
        bound,
        pbw_coords,
        integral,
    })
}

/// Equations `derivation(x) = rhs` over the unknown coordinates of `x` at `nu`.
fn push_derivation_eqs(
    f: &mut FAlgebra,
    nu: &FWt,
    dim: usize,
    i: usize,
    left: bool,
    rhs: &FElement,
    eqs: &mut Vec<(SparseVec, RatFunc)>,
) -> Result<()> {
    if nu[i] == 0 {
        // derivation is zero; rhs must also vanish
        if !rhs.is_zero() {
            return Err(Error::Singular("derivation constraint unsatisfiable".into()));
        }
        return Ok(());
    }
    let mut lower = nu.clone();
    lower[i] -= 1;
    let ldim = f.space(&lower)?.dim();
    // matrix of the derivation on basis vectors
    let mut rows: BTreeMap<usize, Vec<(u32, RatFunc)>> = BTreeMap::new();
    for k in 0..dim {
        let x = crate::ualg::basis_element(f, nu, k as u32)?;
        let img = f.r_map(left, i, &x)?;
        if let Some((_, coords)) = img.homogeneous() {
            for (t, c) in coords.iter().enumerate() {
                if !c.is_zero() {
                    rows.entry(t).or_default().push((k as u32, c.clone()));
                }
            }
        }
    }
    let rhs_coords = rhs
        .comps
        .get(&lower)
        .cloned()
        .unwrap_or_else(|| vec![RatFunc::zero(); ldim]);
    for t in 0..ldim {
        let row = rows.remove(&t).unwrap_or_default();
        let r = rhs_coords[t].clone();
        if row.is_empty() && r.is_zero() {
            continue;
        }
        eqs.push((SparseVec::from_entries(row), r));
    }
    Ok(())
}

/// Closed recursion for the single-node diagram with `varsigma = q^-1`:
/// `gamma_{c+1} = -(q - q^-1) q^{-c} (q [c] gamma_{c-1} + kappa gamma_c)`.
pub fn ai1_gamma_table(kappa: &RatFunc, bound: u32) -> Vec<RatFunc> {
    let mut out = vec![RatFunc::one()];
    let qq = RatFunc::q_power(1).sub(&RatFunc::q_power(-1));
    for c in 0..bound as i64 {
        let prev2 = if c == 0 {
            RatFunc::zero()
        } else {
            out[(c - 1) as usize].clone()
        };
        let prev1 = out[c as usize].clone();
        let int_c = crate::scalars::qint_r(c, 1);
        let val = qq
            .neg()
            .mul(&RatFunc::q_power(-c))
            .mul(
                &RatFunc::q_power(1)
                    .mul(&int_c)
                    .mul(&prev2)
                    .add(&kappa.mul(&prev1)),
            );
        out.push(val);
    }
    out
}

// ---------------------------------------------------------------------------
// the weight function g and the module isomorphism built from it
// ---------------------------------------------------------------------------

/// Values of `g`, propagated from value 1 at a canonical base point of each
/// root-lattice coset, by the two defining recursions.
#[derive(Clone, Debug)]
pub struct GTable {
    memo: BTreeMap<XWeight, RatFunc>,
    /// extra normalization per coset representative (used so that the module
    /// isomorphism sends the extremal vector exactly to the cyclic one)
    scale: BTreeMap<XWeight, RatFunc>,
}

impl GTable {
    pub fn new() -> Self {
        GTable {
            memo: BTreeMap::new(),
            scale: BTreeMap::new(),
        }
    }

    /// Ratio `g(mu) / g(mu - alpha_i)`.
    fn step(&self, ctx: &QSPContext, f: &FAlgebra, i: usize, mu: &XWeight) -> RatFunc {
        let rd = &f.rd;
        let di = f.datum.d(i);
        if ctx.is_black(i) {
            // -q_i^{3 - 2 <i, mu>}
            RatFunc::q_power(di * (3 - 2 * mu[i])).neg()
        } else {
            let ti = ctx.diagram.tau[i];
            let ai = rd.simple_root_x(i);
            let two_rho_check = rd.two_rho_check_sub_y(&ctx.diagram.black);
            let sgn = rd.pair(&two_rho_check, &ai);
            let two_rho_x = rd.two_rho_sub_x(&ctx.diagram.black);
            let wmu = ctx.diagram.w_black.apply_x(mu);
            let dti = f.datum.d(ti);
            let pow = di * two_rho_x[i] + di + di * (-mu[i]) + dti * wmu[ti];
            let mut v = ctx.varsigma(i).mul(&RatFunc::q_power(pow));
            if sgn % 2 != 0 {
                v = v.neg();
            }
            v
        }
    }

    /// Canonical base point of the root-lattice coset of `mu`.
    fn base_point(&self, f: &FAlgebra, mu: &XWeight) -> (XWeight, Vec<i64>) {
        // reduce mu modulo the simple roots by integer elimination: walk the
        // coordinates of mu over the root basis greedily
        // delta = mu - base must lie in Z[I]; use rational solve and floor
        let n = f.rank();
        // solve A^T c = mu over Q; base = mu - A^T floor(c) keeps a bounded rep
        let mut c = vec![0i64; n];
        // iterate: subtract whole roots while the rational solution has
        // integer parts
        let approx = rational_root_coords(f, mu);
        for k in 0..n {
            c[k] = approx[k].div_euclid(1); // already floored below
        }
        let mut base = mu.clone();
        for k in 0..n {
            if c[k] != 0 {
                let a = f.rd.simple_root_x(k);
                for t in 0..n {
                    base[t] -= c[k] * a[t];
                }
            }
        }
        (base, c)
    }

    /// `g(mu)` with base value 1 per coset (times any registered rescale).
    pub fn value(&mut self, ctx: &QSPContext, f: &FAlgebra, mu: &XWeight) -> RatFunc {
        if let Some(v) = self.memo.get(mu) {
            return v.clone();
        }
        let (base, steps) = self.base_point(f, mu);
        // path: walk each simple-root direction in turn
        let mut val = self
            .scale
            .get(&base)
            .cloned()
            .unwrap_or_else(RatFunc::one);
        let mut cur = base.clone();
        for i in 0..f.rank() {
            let s = steps[i];
            let a = f.rd.simple_root_x(i);
            for _ in 0..s.abs() {
                if s > 0 {
                    // move cur -> cur + alpha_i: ratio at mu' = cur + alpha_i
                    let next: XWeight = cur.iter().zip(a.iter()).map(|(x, y)| x + y).collect();
                    val = val.mul(&self.step(ctx, f, i, &next));
                    cur = next;
                } else {
                    let next: XWeight = cur.iter().zip(a.iter()).map(|(x, y)| x - y).collect();
                    let ratio = self.step(ctx, f, i, &cur);
                    val = val.div(&ratio);
                    cur = next;
                }
            }
        }
        debug_assert_eq!(cur, *mu);
        self.memo.insert(mu.clone(), val.clone());
        val
    }

    /// Verify both recursions hold for every neighbor pair around `mu`.
    pub fn check_consistency(&mut self, ctx: &QSPContext, f: &FAlgebra, mu: &XWeight) -> bool {
        for i in 0..f.rank() {
            let a = f.rd.simple_root_x(i);
            let prev: XWeight = mu.iter().zip(a.iter()).map(|(x, y)| x - y).collect();
            let lhs = self.value(ctx, f, mu);
            let rhs = self.value(ctx, f, &prev).mul(&self.step(ctx, f, i, mu));
            if lhs != rhs {
                return false;
            }
        }
        true
    }

    /// Rescale the coset of `base` so the isomorphism normalizes exactly.
    pub fn rescale_coset(&mut self, f: &FAlgebra, point: &XWeight, factor: &RatFunc) {
        let (base, _) = self.base_point(f, point);
        let cur = self
            .scale
            .get(&base)
            .cloned()
            .unwrap_or_else(RatFunc::one);
        self.scale.insert(base, cur.mul(factor));
        self.memo.clear();
    }
}

impl Default for GTable {
    fn default() -> Self {
        GTable::new()
    }
}

/// Integer root coordinates of the projection of `mu` to the root lattice,
/// rounded toward a bounded representative.
fn rational_root_coords(f: &FAlgebra, mu: &XWeight) -> Vec<i64> {
    // solve A^T c = mu over Q with exact rationals, then floor componentwise
    let n = f.rank();
    let mut rows: Vec<(Vec<(i128, i128)>, (i128, i128))> = (0..n)
        .map(|j| {
            (
                (0..n)
                    .map(|i| (f.datum.cartan(j, i) as i128, 1i128))
                    .collect::<Vec<_>>(),
                (mu[j] as i128, 1i128),
            )
        })
        .collect();
    let norm = |(a, b): (i128, i128)| -> (i128, i128) {
        if a == 0 {
            return (0, 1);
        }
        let g = gcd128(a.abs(), b.abs());
        let (mut a, mut b) = (a / g, b / g);
        if b < 0 {
            a = -a;
            b = -b;
        }
        (a, b)
    };
    let radd = |a: (i128, i128), b: (i128, i128)| norm((a.0 * b.1 + b.0 * a.1, a.1 * b.1));
    let rmul = |a: (i128, i128), b: (i128, i128)| norm((a.0 * b.0, a.1 * b.1));
    for p in 0..n {
        let piv = (p..n).find(|&r| rows[r].0[p].0 != 0).expect("invertible");
        rows.swap(p, piv);
        let pv = rows[p].0[p];
        let pinv = norm((pv.1, pv.0));
        for c in 0..n {
            rows[p].0[c] = rmul(rows[p].0[c], pinv);
        }
        rows[p].1 = rmul(rows[p].1, pinv);
        for r in 0..n {
            if r != p && rows[r].0[p].0 != 0 {
                let fct = (-rows[r].0[p].0, rows[r].0[p].1);
                for c in 0..n {
                    let t = rmul(fct, rows[p].0[c]);
                    rows[r].0[c] = radd(rows[r].0[c], t);
                }
                let t = rmul(fct, rows[p].1);
                rows[r].1 = radd(rows[r].1, t);
            }
        }
    }
    (0..n)
        .map(|p| {
            let (a, b) = rows[p].1;
            a.div_euclid(b) as i64
        })
        .collect()
}

fn gcd128(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// The module isomorphism `Upsilon . g~ . T_{w_black}^{-1}` on `L(lambda)`,
/// normalized so the extremal vector of weight `w_black lambda` maps exactly
/// to the highest weight vector (the lowest weight vector of the twisted
/// target module).
pub struct TMap {
    pub g: GTable,
    pub normalized: bool,
}

impl TMap {
    /// Build and normalize on the given module; fails if the raw map does not
    /// send the extremal vector onto the highest-weight line.
    pub fn new(
        ctx: &QSPContext,
        f: &mut FAlgebra,
        m: &Module,
        upsilon: &UpsilonTable,
    ) -> Result<TMap> {
        let mut tm = TMap {
            g: GTable::new(),
            normalized: false,
        };
        let eta = m.cyclic_vector();
        let eta_b = crate::umod::extremal_vector(f, m, &ctx.diagram.w_black)?;
        let raw = tm.apply(ctx, f, m, upsilon, &eta_b)?;
        // must be a multiple of eta
        let lambda = match &m.desc {
            crate::umod::ModuleDesc::Highest(l) => l.clone(),
            _ => return Err(Error::Invalid("T map normalization needs L(lambda)".into())),
        };
        let coeff = raw
            .comps
            .get(&lambda)
            .map(|v| v[0].clone())
            .unwrap_or_else(RatFunc::zero);
        if coeff.is_zero() || raw.sub(&eta.scale(&coeff)).comps.len() > 0 && raw != eta.scale(&coeff)
        {
            if raw != eta.scale(&coeff) {
                return Err(Error::Invalid(
                    "T(eta_bullet) is not on the highest-weight line".into(),
                ));
            }
        }
        let wb_lambda = ctx.diagram.w_black.apply_x(&lambda);
        tm.g.rescale_coset(f, &wb_lambda, &coeff.inv());
        tm.normalized = true;
        Ok(tm)
    }

    /// Apply the map to a vector of `L(lambda)`.
    pub fn apply(
        &mut self,
        ctx: &QSPContext,
        f: &mut FAlgebra,
        m: &Module,
        upsilon: &UpsilonTable,
        v: &ModVector,
    ) -> Result<ModVector> {
        let tv = braid_vector_word_inv(f, m, &ctx.diagram.w_black, v)?;
        // scale per weight by g
        let mut scaled = ModVector::zero();
        for (w, coords) in &tv.comps {
            let gval = self.g.value(ctx, f, w);
            let piece = ModVector {
                comps: [(w.clone(), coords.iter().map(|c| c.mul(&gval)).collect())]
                    .into_iter()
                    .collect(),
            };
            scaled = scaled.add(&piece);
        }
        apply_upsilon(f, m, upsilon, &scaled)
    }
}

/// `vartheta = sigma . wp . tau` applied to `B_i`, as a `U`-element.
pub fn vartheta_b(ctx: &QSPContext, f: &mut FAlgebra, i: usize) -> Result<UElement> {
    let b = ctx.b_element(f, i)?;
    let t = b.tau_twist(f, &ctx.diagram.tau)?;
    let w = t.wp(f)?;
    w.sigma(f)
}

// ---------------------------------------------------------------------------
// certificates
// ---------------------------------------------------------------------------

/// Outcome of one verification, with a witness when it fails.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub name: String,
    pub pass: bool,
    pub witness: String,
}

impl Certificate {
    fn ok(name: &str) -> Certificate {
        Certificate {
            name: name.into(),
            pass: true,
            witness: String::new(),
        }
    }

    fn fail(name: &str, witness: String) -> Certificate {
        Certificate {
            name: name.into(),
            pass: false,
            witness,
        }
    }
}

/// Braid restriction: for black `i` and any `j != i`, as module operators,
/// `T'_{i,e}(B_j) = sum_{r+s=-<i,j'>} (-1)^r q_i^{-er} B_i^(s) B_j B_i^(r)`
/// and the `T''` variant with `r`, `s` swapped.
pub fn verify_braid_restriction(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    m: &Module,
    i: usize,
    e: i64,
    j: usize,
) -> Result<Certificate> {
    if !ctx.is_black(i) {
        return Err(Error::Invalid("braid restriction needs a black node".into()));
    }
    let a = f.datum.cartan(i, j);
    let mm = -a;
    let di = f.datum.d(i);
    let weights: Vec<XWeight> = m.spaces.keys().cloned().collect();
    for w in &weights {
        let dim = m.spaces[w].dim();
        for k in 0..dim {
            let v = ModVector::unit(w, k, dim);
            for double in [false, true] {
                // left side: braid round trip
                let back = braid_vector(f, m, i, -e, !double, &v)?;
                let bj = act_bi(ctx, f, m, j, &back)?;
                let lhs = braid_vector(f, m, i, e, double, &bj)?;
                // right side
                let mut rhs = ModVector::zero();
                for r in 0..=mm {
                    let s = mm - r;
                    // T' : B^(s) B_j B^(r) ; T''_{i,-e}: B^(r) B_j B^(s);
                    // the exponent convention matches the generator tables
                    let (first, last, pow) = if !double {
                        (r, s, -e * r * di)
                    } else {
                        (s, r, e * r * di)
                    };
                    let step = act_bi_divided(ctx, f, m, i, first as u32, &v)?;
                    let step = act_bi(ctx, f, m, j, &step)?;
                    let step = act_bi_divided(ctx, f, m, i, last as u32, &step)?;
                    let sign = if r % 2 == 0 { 1 } else { -1 };
                    let c = RatFunc::q_power(pow).mul(&RatFunc::from_int(sign));
                    rhs = rhs.add(&step.scale(&c));
                }
                if lhs != rhs {
                    return Ok(Certificate::fail(
                        "braid-restriction",
                        alloc::format!(
                            "identity fails at weight {:?} basis #{k} (double = {double}, e = {e})",
                            w
                        ),
                    ));
                }
            }
        }
    }
    Ok(Certificate::ok("braid-restriction"))
}

/// `T''_{i,e}(Upsilon_nu) = Upsilon_nu` for black `i` (and the `T'` variant).
pub fn verify_braid_fixes_upsilon(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    upsilon: &UpsilonTable,
) -> Result<Certificate> {
    for &i in &ctx.diagram.black {
        for e in [1i64, -1] {
            for (nu, el) in &upsilon.comps {
                let u = UElement::from_plus(f, el)?;
                for double in [true, false] {
                    let img = u.braid(f, i, e, double)?;
                    let Some(plus) = img.as_plus(f) else {
                        return Ok(Certificate::fail(
                            "braid-fixes-upsilon",
                            alloc::format!("T(Upsilon_{nu:?}) left U^+"),
                        ));
                    };
                    if &plus != el {
                        return Ok(Certificate::fail(
                            "braid-fixes-upsilon",
                            alloc::format!("T(Upsilon_{nu:?}) != Upsilon (i={i}, e={e})"),
                        ));
                    }
                }
            }
        }
    }
    Ok(Certificate::ok("braid-fixes-upsilon"))
}

/// Adjunction under the contravariant form:
/// `(B_i x, y) = (x, q_i^-1 vs_{tau i}^-1 T_w^{-1}(B_{tau i})
///                Kt_{w tau i} Kt_i^{-1} y)` for every white `i`, plus the
/// plain black-generator adjunctions.
pub fn verify_wp_restriction(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    m: &Module,
) -> Result<Certificate> {
    let mut form = ContraForm::new();
    let weights: Vec<XWeight> = m.spaces.keys().cloned().collect();
    // wp(B_i) as a U-element (exact route through the anti-involution)
    for i in ctx.diagram.white() {
        let b = ctx.b_element(f, i)?;
        let wpb = b.wp(f)?;
        // displayed operator: q_i^-1 vs_{tau i}^-1 T_w^{-1}(B_{tau i}) K-part
        let ti = ctx.diagram.tau[i];
        let bt = ctx.b_element(f, ti)?;
        let tb = bt.braid_word_inv(f, &ctx.diagram.w_black)?;
        let wtx = ctx
            .diagram
            .w_black
            .apply_y(&unit_y(f, ti, f.datum.d(ti)));
        let mut kvec = wtx;
        kvec[i] -= f.datum.d(i);
        let kel = UElement::k(&kvec, f.rank());
        let displayed = tb
            .mul(f, &kel)?
            .scale(&RatFunc::q_power(-f.datum.d(i)).mul(&ctx.varsigma(ti).inv()));
        if wpb != displayed {
            return Ok(Certificate::fail(
                "wp-restriction",
                alloc::format!("wp(B_{i}) does not match the displayed operator"),
            ));
        }
        // contravariance on the module
        for w in &weights {
            let dim = m.spaces[w].dim();
            for k in 0..dim {
                let x = ModVector::unit(w, k, dim);
                let bx = act_bi(ctx, f, m, i, &x)?;
                for (wy, spy) in m.spaces.clone() {
                    let dy = spy.dim();
                    for t in 0..dy {
                        let y = ModVector::unit(&wy, t, dy);
                        let lhs = form.pair(f, m, &bx, &y)?;
                        let wy_v = crate::umod::act_u_element(f, m, &displayed, &y)?;
                        let rhs = form.pair(f, m, &x, &wy_v)?;
                        if lhs != rhs {
                            return Ok(Certificate::fail(
                                "wp-restriction",
                                alloc::format!(
                                    "adjunction fails: i={i}, x at {:?}#{k}, y at {:?}#{t}",
                                    w,
                                    wy
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
    // black generators: wp(E_i) = q_i^-1 F_i Kt_i acts adjointly by the
    // construction of the form; verify once per node anyway
    for &i in &ctx.diagram.black {
        let mut mu = vec![0i64; f.rank()];
        mu[i] = f.datum.d(i);
        for w in &weights {
            let dim = m.spaces[w].dim();
            for k in 0..dim.min(2) {
                let x = ModVector::unit(w, k, dim);
                let ex = act_gen(f, m, &Gen::E(i), &x)?;
                for (wy, spy) in m.spaces.clone() {
                    let dy = spy.dim();
                    for t in 0..dy.min(2) {
                        let y = ModVector::unit(&wy, t, dy);
                        let lhs = form.pair(f, m, &ex, &y)?;
                        let ky = act_gen(f, m, &Gen::K(mu.clone()), &y)?;
                        let fy = act_gen(f, m, &Gen::F(i), &ky)?;
                        let rhs = form
                            .pair(f, m, &x, &fy)?
                            .mul(&RatFunc::q_power(-f.datum.d(i)));
                        if lhs != rhs {
                            return Ok(Certificate::fail(
                                "wp-restriction",
                                alloc::format!("black adjunction fails at node {i}"),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(Certificate::ok("wp-restriction"))
}

fn unit_y(f: &FAlgebra, i: usize, v: i64) -> Vec<i64> {
    let mut out = vec![0i64; f.rank()];
    out[i] = v;
    out
}

/// `T(B_i m) = vartheta-twisted action` certificate for the isomorphism map:
/// checks `T(vartheta(B_i) m) = B_i T(m)` on every basis vector.
pub fn verify_tmap_intertwines(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    m: &Module,
    upsilon: &UpsilonTable,
    tmap: &mut TMap,
) -> Result<Certificate> {
    let weights: Vec<XWeight> = m.spaces.keys().cloned().collect();
    for i in 0..f.rank() {
        let vb = vartheta_b(ctx, f, i)?;
        for w in &weights {
            let dim = m.spaces[w].dim();
            for k in 0..dim {
                let v = ModVector::unit(w, k, dim);
                let tv = crate::umod::act_u_element(f, m, &vb, &v)?;
                let lhs = tmap.apply(ctx, f, m, upsilon, &tv)?;
                let tm = tmap.apply(ctx, f, m, upsilon, &v)?;
                let rhs = act_bi(ctx, f, m, i, &tm)?;
                if lhs != rhs {
                    return Ok(Certificate::fail(
                        "tmap-intertwines",
                        alloc::format!("B_{i} fails at {:?}#{k}", w),
                    ));
                }
            }
        }
    }
    Ok(Certificate::ok("tmap-intertwines"))
}

/// `U^i`-cyclicity: the saturation of the extremal vector under the `B_i`
/// and black `E_j` reaches the whole module.
pub fn verify_ui_cyclic(
    ctx: &QSPContext,
    f: &mut FAlgebra,
    m: &Module,
) -> Result<Certificate> {
    let eta_b = crate::umod::extremal_vector(f, m, &ctx.diagram.w_black)?;
    // flatten coordinates
    let mut offsets = BTreeMap::new();
    let mut total = 0usize;
    for (w, sp) in &m.spaces {
        offsets.insert(w.clone(), total);
        total += sp.dim();
    }
    let flat = |v: &ModVector| -> SparseVec {
        let mut entries = Vec::new();
        for (w, coords) in &v.comps {
            let off = offsets[w];
            for (k, c) in coords.iter().enumerate() {
                if !c.is_zero() {
                    entries.push(((off + k) as u32, c.clone()));
                }
            }
        }
        SparseVec::from_entries(entries)
    };
    let mut span = crate::linalg::SpanSolver::new(total as u32);
    span.insert(&flat(&eta_b));
    let mut queue = vec![eta_b];
    while let Some(v) = queue.pop() {
        let mut imgs: Vec<ModVector> = Vec::new();
        for i in 0..f.rank() {
            imgs.push(act_bi(ctx, f, m, i, &v)?);
        }
        for &j in &ctx.diagram.black {
            imgs.push(act_gen(f, m, &Gen::E(j), &v)?);
        }
        for img in imgs {
            if !img.is_zero() && span.insert(&flat(&img)) {
                queue.push(img);
            }
        }
    }
    if span.rank() == total {
        Ok(Certificate::ok("ui-cyclic"))
    } else {
        Ok(Certificate::fail(
            "ui-cyclic",
            alloc::format!("span dim {} < module dim {}", span.rank(), total),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::catalog;
    use crate::cartan::CartanDatum;
    use crate::scalars::{qint_r, LaurentInt};
    use crate::umod::ModuleDesc;

    fn alg(name: &str) -> FAlgebra {
        FAlgebra::new(CartanDatum::by_name(name).unwrap(), 24)
    }

    fn context(f: &mut FAlgebra, type_name: &str, rank: Option<usize>) -> QSPContext {
        let e = catalog::resolve(type_name, rank).unwrap();
        let d = e.diagram().unwrap();
        let p = QSPParams::default_for(&d).unwrap();
        QSPContext::new(f, d, p).unwrap()
    }

    #[test]
    fn ai1_b_action_on_eta() {
        // B eta = F eta + kappa q^{-n} eta on L(n)
        let mut f = alg("A1");
        let e = catalog::resolve("AI1", None).unwrap();
        let d = e.diagram().unwrap();
        let p = QSPParams::default_for(&d)
            .unwrap()
            .with_kappa(&d, 0, LaurentInt::one())
            .unwrap();
        let ctx = QSPContext::new(&mut f, d, p).unwrap();
        let m = Module::build(&mut f, &ModuleDesc::Highest(vec![3])).unwrap();
        let eta = m.cyclic_vector();
        let bv = act_bi(&ctx, &mut f, &m, 0, &eta).unwrap();
        let fv = act_gen(&mut f, &m, &Gen::F(0), &eta).unwrap();
        let expect = fv.add(&eta.scale(&RatFunc::q_power(-3)));
        assert_eq!(bv, expect);
    }

    #[test]
    fn act_bi_matches_roundtrip() {
        let mut f = alg("A3");
        let ctx = context(&mut f, "AII3", None);
        let m = Module::build(&mut f, &ModuleDesc::Highest(vec![0, 1, 0])).unwrap();
        let weights: Vec<XWeight> = m.spaces.keys().cloned().collect();
        for w in weights {
            let dim = m.spaces[&w].dim();
            for k in 0..dim {
                let v = ModVector::unit(&w, k, dim);
                let a = act_bi(&ctx, &mut f, &m, 1, &v).unwrap();
                let b = act_bi_roundtrip(&ctx, &mut f, &m, 1, &v).unwrap();
                assert_eq!(a, b, "at {w:?}#{k}");
            }
        }
    }

    #[test]
    fn black_commutation_with_e() {
        // E_i B_j - B_j E_i = delta_ij (Kt_i - Kt_{-i})/(q_i - q_i^-1), i black
        let mut f = alg("A3");
        let ctx = context(&mut f, "AII3", None);
        let m = Module::build(&mut f, &ModuleDesc::Highest(vec![0, 1, 0])).unwrap();
        let weights: Vec<XWeight> = m.spaces.keys().cloned().collect();
        for w in weights {
            let dim = m.spaces[&w].dim();
            for k in 0..dim {
                let v = ModVector::unit(&w, k, dim);
                for i in [0usize, 2] {
                    for j in 0..3 {
                        let bv = act_bi(&ctx, &mut f, &m, j, &v).unwrap();
                        let ebv = act_gen(&mut f, &m, &Gen::E(i), &bv).unwrap();
                        let ev = act_gen(&mut f, &m, &Gen::E(i), &v).unwrap();
                        let bev = act_bi(&ctx, &mut f, &m, j, &ev).unwrap();
                        let lhs = ebv.sub(&bev);
                        let rhs = if i == j {
                            let di = f.datum.d(i);
                            let mut mu = vec![0i64; 3];
                            mu[i] = di;
                            let kv = act_gen(&mut f, &m, &Gen::K(mu.clone()), &v).unwrap();
                            mu[i] = -di;
                            let km = act_gen(&mut f, &m, &Gen::K(mu), &v).unwrap();
                            kv.sub(&km)
                                .scale(&RatFunc::q_power(di).sub(&RatFunc::q_power(-di)).inv())
                        } else {
                            ModVector::zero()
                        };
                        assert_eq!(lhs, rhs, "i={i} j={j} at {w:?}#{k}");
                    }
                }
            }
        }
    }

    #[test]
    fn upsilon_ai1_matches_recursion() {
        for kappa in [RatFunc::zero(), RatFunc::one()] {
            let mut f = alg("A1");
            let e = catalog::resolve("AI1", None).unwrap();
            let d = e.diagram().unwrap();
            let mut p = QSPParams::default_for(&d).unwrap();
            if !kappa.is_zero() {
                p = p.with_kappa(&d, 0, LaurentInt::one()).unwrap();
            }
            let ctx = QSPContext::new(&mut f, d, p).unwrap();
            let bound = 6u32;
            let table = solve_upsilon(&ctx, &mut f, bound).unwrap();
            let gammas = ai1_gamma_table(&kappa, bound);
            for c in 1..=bound {
                let nu = vec![c];
                let expect = {
                    let dp = f.theta_divided(0, c).unwrap();
                    dp.scale(&gammas[c as usize])
                };
                let got = table.comps.get(&nu).cloned().unwrap_or_else(FElement::zero);
                assert_eq!(got, expect, "kappa={} c={c}", kappa.render());
            }
            assert!(table.all_integral());
            // gamma_2 with kappa=0: coefficient of E^(2) is -(q - q^-1)
            if kappa.is_zero() {
                let g2 = &gammas[2];
                assert_eq!(
                    *g2,
                    RatFunc::q_power(1).sub(&RatFunc::q_power(-1)).neg()
                );
            }
        }
    }

    #[test]
    fn oracle_matches_solver_ai1_and_aiii11() {
        for (cart, ty) in [("A1", "AI1"), ("A1xA1", "AIII11")] {
            let mut f = alg(cart);
            let ctx = context(&mut f, ty, None);
            let bound = 5u32;
            let solver = solve_upsilon(&ctx, &mut f, bound).unwrap();
            let oracle = rank1_upsilon_pbw(&ctx, &mut f, bound).unwrap();
            assert_eq!(solver.comps, oracle.comps, "{ty}");
            assert!(solver.all_integral(), "{ty}");
        }
    }

    #[test]
    fn upsilon_support_vanishes_off_anti_fixed() {
        // AII3: supports only at multiples of (1,2,1); solver output respects it
        let mut f = alg("A3");
        let ctx = context(&mut f, "AII3", None);
        let sup = upsilon_supports(&mut f, &ctx.diagram, 4).unwrap();
        assert_eq!(sup, vec![vec![1u32, 2, 1]]);
    }

    #[test]
    fn oracle_matches_solver_aii3() {
        let mut f = alg("A3");
        let ctx = context(&mut f, "AII3", None);
        let bound = 4u32;
        let solver = solve_upsilon(&ctx, &mut f, bound).unwrap();
        let oracle = rank1_upsilon_pbw(&ctx, &mut f, bound).unwrap();
        assert_eq!(solver.comps, oracle.comps);
        assert!(solver.all_integral());
        // support constraint c1 = c4, c2 = c3 along the word (2,1,3,2)
        let word = vec![1usize, 0, 2, 1];
        let pbw = PbwBasis::new(&mut f, &word, false).unwrap();
        for (nu, el) in &oracle.comps {
            let dim = f.space(nu).unwrap().dim();
            let mut solver2 = crate::linalg::SpanSolver::new(dim as u32);
            let exps = pbw.exponents_at(nu);
            for e in &exps {
                let m = pbw.monomial(&mut f, e).unwrap();
                let coords = m.comps.get(nu).cloned().unwrap_or_else(|| vec![RatFunc::zero(); dim]);
                solver2.insert(&sparse_vec(&coords));
            }
            let coords = el.comps.get(nu).cloned().unwrap();
            let expr = solver2.express(&sparse_vec(&coords)).unwrap();
            for (t, c) in expr {
                if !c.is_zero() {
                    let e = &exps[t as usize];
                    assert_eq!(e[0], e[3], "c1 = c4 violated");
                    assert_eq!(e[1], e[2], "c2 = c3 violated");
                }
            }
        }
    }

    #[test]
    fn upsilon_bar_involution_on_module() {
        // psi_i = Upsilon . psi squares to the identity on L(2) for AI1
        let mut f = alg("A1");
        let ctx = context(&mut f, "AI1", None);
        let table = solve_upsilon(&ctx, &mut f, 6).unwrap();
        let m = Module::build(&mut f, &ModuleDesc::Highest(vec![2])).unwrap();
        let weights: Vec<XWeight> = m.spaces.keys().cloned().collect();
        for w in weights {
            let dim = m.spaces[&w].dim();
            for k in 0..dim {
                let v = ModVector::unit(&w, k, dim);
                let p1 = apply_upsilon(&mut f, &m, &table, &v.bar_coeffs()).unwrap();
                let p2 = apply_upsilon(&mut f, &m, &table, &p1.bar_coeffs()).unwrap();
                assert_eq!(p2, v, "psi_i^2 != 1 at {w:?}#{k}");
            }
        }
    }

    #[test]
    fn upsilon_rmaps_vanish_on_black() {
        let mut f = alg("A3");
        let ctx = context(&mut f, "AII3", None);
        let table = solve_upsilon(&ctx, &mut f, 4).unwrap();
        for el in table.comps.values() {
            for &j in &ctx.diagram.black {
                assert!(f.r_map(false, j, el).unwrap().is_zero());
                assert!(f.r_map(true, j, el).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn braid_restriction_aii3() {
        let mut f = alg("A3");
        let ctx = context(&mut f, "AII3", None);
        let m = Module::build(&mut f, &ModuleDesc::Highest(vec![0, 1, 0])).unwrap();
        for i in [0usize, 2] {
            for e in [1i64, -1] {
                let cert = verify_braid_restriction(&ctx, &mut f, &m, i, e, 1).unwrap();
                assert!(cert.pass, "{}", cert.witness);
            }
        }
        let table = solve_upsilon(&ctx, &mut f, 4).unwrap();
        let cert = verify_braid_fixes_upsilon(&ctx, &mut f, &table).unwrap();
        assert!(cert.pass, "{}", cert.witness);
    }

    #[test]
    fn wp_restriction_ai1_and_violation() {
        let mut f = alg("A1");
        let ctx = context(&mut f, "AI1", None);
        let m = Module::build(&mut f, &ModuleDesc::Highest(vec![2])).unwrap();
        let cert = verify_wp_restriction(&ctx, &mut f, &m).unwrap();
        assert!(cert.pass, "{}", cert.witness);
        // deliberate violation: flip varsigma away from the product constraint
        let mut bad = ctx.clone();
        bad.params.varsigma.insert(0, crate::scalars::SignedQPower::new(false, 1));
        let cert2 = verify_wp_restriction(&bad, &mut f, &m).unwrap();
        assert!(!cert2.pass);
    }

    #[test]
    fn ui_cyclic_ai1() {
        let mut f = alg("A1");
        let ctx = context(&mut f, "AI1", None);
        let m = Module::build(&mut f, &ModuleDesc::Highest(vec![3])).unwrap();
        let cert = verify_ui_cyclic(&ctx, &mut f, &m).unwrap();
        assert!(cert.pass);
    }

    #[test]
    fn g_consistency_and_tmap_ai1() {
        let mut f = alg("A1");
        let ctx = context(&mut f, "AI1", None);
        let table = solve_upsilon(&ctx, &mut f, 8).unwrap();
        let mut g = GTable::new();
        for mu in [vec![0i64], vec![1], vec![2], vec![-3]] {
            assert!(g.check_consistency(&ctx, &f, &mu));
        }
        let m = Module::build(&mut f, &ModuleDesc::Highest(vec![2])).unwrap();
        let mut tm = TMap::new(&ctx, &mut f, &m, &table).unwrap();
        let cert = verify_tmap_intertwines(&ctx, &mut f, &m, &table, &mut tm).unwrap();
        assert!(cert.pass, "{}", cert.witness);
        // T(eta_bullet) = eta exactly after normalization
        let eta_b = crate::umod::extremal_vector(&mut f, &m, &ctx.diagram.w_black).unwrap();
        let img = tm.apply(&ctx, &mut f, &m, &table, &eta_b).unwrap();
        assert_eq!(img, m.cyclic_vector());
    }

    #[test]
    fn qint_is_symmetric() {
        assert_eq!(qint_r(3, 1).bar(), qint_r(3, 1));
    }
}
