use iqsp_core::cartan::{catalog, CartanDatum, QSPParams, WeylElement};
use iqsp_core::falg::FAlgebra;
use iqsp_core::qsp::QSPContext;

fn main() {
    let e = catalog::resolve("FII", None).unwrap();
    let d = e.diagram().unwrap();
    let p = QSPParams::default_for(&d).unwrap();
    let mut f = FAlgebra::new(CartanDatum::by_name("F4").unwrap(), 64);
    let ctx = QSPContext::new(&mut f, d, p).unwrap();
    let rd = f.rd.clone();
    let word = &ctx.w_circ.word;
    println!("w_circ word: {word:?}");
    for k in 0..word.len() {
        // chain roots: s_{i_j}...s_{i_{k-1}}(alpha_{i_k}) for j = k down to 1
        let mut heights = Vec::new();
        for j in (0..=k).rev() {
            let prefix = WeylElement::from_word(&rd, &word[j..k]);
            let rx = prefix.apply_x(&rd.simple_root_x(word[k]));
            let r = rd.x_to_root(&rx).unwrap();
            heights.push(r.iter().sum::<i64>());
        }
        println!("k={k}: final ht {} chain {:?}", heights.last().unwrap(), heights);
    }
}
