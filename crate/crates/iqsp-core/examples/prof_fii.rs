use std::time::Instant;
use iqsp_core::cartan::{catalog, QSPParams, CartanDatum};
use iqsp_core::falg::FAlgebra;
use iqsp_core::qsp::{QSPContext, upsilon_supports};
use iqsp_core::canbasis::PbwBasis;

fn main() {
    let e = catalog::resolve("FII", None).unwrap();
    let d = e.diagram().unwrap();
    let p = QSPParams::default_for(&d).unwrap();
    let mut f = FAlgebra::new(CartanDatum::by_name("F4").unwrap(), 64);
    let t0 = Instant::now();
    let ctx = QSPContext::new(&mut f, d, p).unwrap();
    eprintln!("context: {:?}", t0.elapsed());
    let t = Instant::now();
    let sup = upsilon_supports(&mut f, &ctx.diagram, 8).unwrap();
    eprintln!("supports {:?}: {:?}", sup, t.elapsed());
    let t = Instant::now();
    let pbw = PbwBasis::new(&mut f, &ctx.w_circ.word, false).unwrap();
    eprintln!("pbw new: {:?}", t.elapsed());
    let t = Instant::now();
    for nu in &sup {
        let exps = pbw.exponents_at(nu);
        eprintln!("  exps at {:?}: {}", nu, exps.len());
        for (k, e) in exps.iter().enumerate() {
            let tm = Instant::now();
            let m = pbw.monomial(&mut f, e).unwrap();
            if k < 3 || tm.elapsed().as_millis() > 500 {
                eprintln!("    monomial {k} {:?}: {:?} zero={}", e, tm.elapsed(), m.is_zero());
            }
        }
    }
    eprintln!("monomials: {:?}", t.elapsed());
    let t = Instant::now();
    let table = iqsp_core::qsp::solve_upsilon(&ctx, &mut f, 8).unwrap();
    eprintln!("solve: {:?} integral={}", t.elapsed(), table.all_integral());
    let t = Instant::now();
    let oracle = iqsp_core::qsp::rank1_upsilon_pbw(&ctx, &mut f, 8).unwrap();
    eprintln!("oracle: {:?} agree={}", t.elapsed(), oracle.comps == table.comps);
}
