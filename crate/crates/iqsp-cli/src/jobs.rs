//! Job specifications, result documents, and the runners behind the
//! `compute` and `verify` subcommands.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use iqsp_core::canbasis::{
    solve_theta, BasedModule, CanonicalBasisF, CbLabel, li_submodule,
};
use iqsp_core::cartan::{catalog, CartanDatum, QSPParams, SatakeDiagram};
use iqsp_core::falg::{fwt_height, FAlgebra};
use iqsp_core::icanbasis::{
    i_canonical_basis, i_divided_power_certificate, modified_icb_stabilize, ui_bilinear_form,
    BarKind, StabLabel,
};
use iqsp_core::qsp::{
    rank1_upsilon_pbw, solve_upsilon, upsilon_supports, verify_braid_fixes_upsilon,
    verify_braid_restriction, verify_tmap_intertwines, verify_ui_cyclic, verify_wp_restriction,
    QSPContext, TMap, UpsilonTable,
};
use iqsp_core::scalars::LaurentInt;
use iqsp_core::umod::{Module, ModuleDesc};

pub const SCHEMA_VERSION: u32 = 1;

/// Fully-determined description of one run.
#[derive(Clone, Debug, Serialize)]
pub struct JobSpec {
    pub command: String,
    pub type_name: Option<String>,
    pub rank: Option<usize>,
    pub cartan: Option<String>,
    pub lambda: Option<Vec<i64>>,
    pub mu: Option<Vec<i64>>,
    pub height: Option<u32>,
    pub degree: Option<u32>,
    pub kappa: Option<String>,
    pub sigma_signs: Option<String>,
    pub schedule: u32,
    pub family: Option<String>,
    pub node: usize,
    pub power: u32,
}

/// Exit-code contract: unknown identifiers.
pub const EXIT_UNKNOWN: i32 = 2;
/// Exit-code contract: bound exceeded.
pub const EXIT_BOUND: i32 = 3;
/// Exit-code contract: parameter violation.
pub const EXIT_PARAM: i32 = 4;

/// Resolve the Satake diagram and parameters a job refers to.
pub struct Resolved {
    pub entry_label: String,
    pub diagram: SatakeDiagram,
    pub params: QSPParams,
    pub cartan_name: String,
}

pub fn resolve_job(job: &JobSpec) -> Result<Resolved> {
    let (entry_label, diagram, cartan_name) = match (&job.type_name, &job.cartan) {
        (Some(t), _) => {
            let e = catalog::resolve(t, job.rank)
                .map_err(|e| anyhow!("{e}")).context("unknown type")?;
            let d = e.diagram().map_err(|e| anyhow!("{e}"))?;
            (format!("{} {}", e.label, e.cartan), d, e.cartan.clone())
        }
        (None, Some(c)) => {
            let datum = CartanDatum::by_name(c)
                .map_err(|e| anyhow!("{e}")).context("unknown cartan type")?;
            let n = datum.rank();
            let d = SatakeDiagram::new(datum, vec![], (0..n).collect())
                .map_err(|e| anyhow!("{e}"))?;
            (format!("split {c}"), d, c.clone())
        }
        (None, None) => bail!("need --type or --cartan"),
    };
    let mut params =
        QSPParams::default_for(&diagram).map_err(|e| anyhow!("parameter construction: {e}"))?;
    if let Some(signs) = &job.sigma_signs {
        for part in signs.split(',').filter(|s| !s.is_empty()) {
            let i: usize = part
                .trim()
                .parse()
                .map_err(|_| anyhow!("bad --sigma-signs entry '{part}'"))?;
            params = params
                .with_sign_flip(&diagram, i.checked_sub(1).context("node numbers are 1-based")?)
                .map_err(|e| anyhow!("{e}"))?;
        }
    }
    if let Some(kap) = &job.kappa {
        let val = LaurentInt::parse(kap)
            .or_else(|| kap.parse::<i64>().ok().map(LaurentInt::from_int))
            .ok_or_else(|| anyhow!("bad --kappa value '{kap}' (use Laurent text or an integer)"))?;
        // attach kappa at the first admissible white node
        let node = diagram
            .white()
            .into_iter()
            .find(|&i| QSPParams::kappa_allowed(&diagram, i))
            .ok_or_else(|| anyhow!("kappa is not allowed anywhere on this diagram"))?;
        params = params
            .with_kappa(&diagram, node, val)
            .map_err(|e| anyhow!("{e}"))?;
    }
    Ok(Resolved {
        entry_label,
        diagram,
        params,
        cartan_name,
    })
}

pub fn new_algebra(cartan_name: &str, height_bound: u32) -> Result<FAlgebra> {
    let datum = CartanDatum::by_name(cartan_name).map_err(|e| anyhow!("{e}"))?;
    let mut f = FAlgebra::new(datum, height_bound);
    cache::load(&mut f, cartan_name);
    Ok(f)
}

fn upsilon_json(f: &mut FAlgebra, t: &UpsilonTable) -> Value {
    let mut comps = Vec::new();
    for (nu, coords) in &t.pbw_coords {
        let entries: Vec<Value> = coords
            .iter()
            .map(|(exps, c)| json!({ "exponents": exps, "coefficient": c.render() }))
            .collect();
        comps.push(json!({
            "weight": nu,
            "height": fwt_height(nu),
            "integral": t.integral.get(nu).copied().unwrap_or(true),
            "pbw_coefficients": entries,
        }));
    }
    let _ = f;
    json!({ "bound": t.bound, "components": comps, "all_integral": t.all_integral() })
}

/// `compute upsilon`.
pub fn compute_upsilon(job: &JobSpec) -> Result<(Value, FAlgebra)> {
    let r = resolve_job(job)?;
    let degree = job.degree.or(job.height).unwrap_or(3);
    let mut f = new_algebra(&r.cartan_name, 64)?;
    let ctx = QSPContext::new(&mut f, r.diagram.clone(), r.params.clone())
        .map_err(|e| anyhow!("{e}"))?;
    // bound: degree counts multiples of the minimal support height
    let probe = upsilon_supports(&mut f, &ctx.diagram, 24).map_err(|e| anyhow!("{e}"))?;
    let unit = probe.first().map(|w| fwt_height(w)).unwrap_or(1);
    let bound = job.height.unwrap_or(unit * degree);
    let table = solve_upsilon(&ctx, &mut f, bound).map_err(|e| anyhow!("{e}"))?;
    let oracle = rank1_upsilon_pbw(&ctx, &mut f, bound).map_err(|e| anyhow!("{e}"))?;
    let agree = table.comps == oracle.comps;
    let mut doc = upsilon_json(&mut f, &table);
    doc["oracle_agrees"] = json!(agree);
    Ok((doc, f))
}

/// `compute cbf`.
pub fn compute_cbf(job: &JobSpec) -> Result<(Value, FAlgebra)> {
    let r = resolve_job(job)?;
    let height = job.height.unwrap_or(3);
    let mut f = new_algebra(&r.cartan_name, height.max(8) * 2)?;
    let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
    let n = f.rank();
    let mut weights: Vec<Vec<u32>> = Vec::new();
    collect_all_weights(n, height, &mut weights);
    let mut out = Vec::new();
    for wt in weights {
        if fwt_height(&wt) == 0 {
            continue;
        }
        let cb = cbf.at(&mut f, &wt).map_err(|e| anyhow!("{e}"))?.clone();
        let mut elements = Vec::new();
        for (k, el) in cb.elements.iter().enumerate() {
            elements.push(json!({
                "label": cb.labels[k],
                "element": f.render(el, true),
                "corrections": cb.corrections[k]
                    .iter()
                    .map(|(t, c)| json!({"lower": cb.labels[*t], "coefficient": c.render()}))
                    .collect::<Vec<_>>(),
            }));
        }
        out.push(json!({ "weight": wt, "dim": cb.elements.len(), "elements": elements }));
    }
    Ok((json!({ "weights": out }), f))
}

fn collect_all_weights(n: usize, height: u32, out: &mut Vec<Vec<u32>>) {
    fn rec(n: usize, k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[k] = v;
            rec(n, k + 1, left - v, cur, out);
        }
        cur[k] = 0;
    }
    let mut cur = vec![0u32; n];
    for h in 1..=height {
        let mut batch = Vec::new();
        rec(n, 0, h, &mut cur, &mut batch);
        out.extend(batch.into_iter().filter(|w| fwt_height(w) == h));
    }
    out.sort();
    out.dedup();
}

/// `compute cbl`: canonical basis of `L(lambda)`.
pub fn compute_cbl(job: &JobSpec) -> Result<(Value, FAlgebra)> {
    let r = resolve_job(job)?;
    let lambda = job.lambda.clone().context("need --lambda")?;
    let mut f = new_algebra(&r.cartan_name, 48)?;
    let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
    let based = BasedModule::highest(&mut f, &mut cbf, &lambda).map_err(|e| anyhow!("{e}"))?;
    let mut elements = Vec::new();
    for (label, _, w) in based.all_cb() {
        let CbLabel::Single(nu, k) = label else { unreachable!() };
        elements.push(json!({ "weight": w, "f_weight": nu, "index": k }));
    }
    Ok((
        json!({ "lambda": lambda, "dim": based.total_dim, "elements": elements }),
        f,
    ))
}

/// `compute cbtensor`.
pub fn compute_cbtensor(job: &JobSpec) -> Result<(Value, FAlgebra)> {
    let r = resolve_job(job)?;
    let lambda = job.lambda.clone().context("need --lambda")?;
    let mu = job.mu.clone().context("need --mu")?;
    let mut f = new_algebra(&r.cartan_name, 48)?;
    let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
    let depth = iqsp_core::umod::depth_bound(&f.rd, &lambda)
        + iqsp_core::umod::depth_bound(&f.rd, &mu);
    let theta = solve_theta(&mut f, depth).map_err(|e| anyhow!("{e}"))?;
    let based =
        BasedModule::tensor(&mut f, &mut cbf, &theta, &lambda, &mu).map_err(|e| anyhow!("{e}"))?;
    let mut elements = Vec::new();
    for (label, _, w) in based.all_cb() {
        let CbLabel::Pair(n1, k1, n2, k2) = label else { unreachable!() };
        elements.push(json!({
            "weight": w,
            "b1": {"f_weight": n1, "index": k1},
            "b2": {"f_weight": n2, "index": k2},
        }));
    }
    Ok((
        json!({ "lambda": lambda, "mu": mu, "dim": based.total_dim, "elements": elements }),
        f,
    ))
}

/// `compute icb`: the i-canonical basis transition of `L(lambda)` or of a
/// tensor when `--mu` is present.
pub fn compute_icb(job: &JobSpec) -> Result<(Value, FAlgebra)> {
    let r = resolve_job(job)?;
    let lambda = job.lambda.clone().context("need --lambda")?;
    let mut f = new_algebra(&r.cartan_name, 64)?;
    let ctx = QSPContext::new(&mut f, r.diagram.clone(), r.params.clone())
        .map_err(|e| anyhow!("{e}"))?;
    let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
    let depth = iqsp_core::umod::depth_bound(&f.rd, &lambda)
        + job.mu.as_ref().map_or(0, |m| iqsp_core::umod::depth_bound(&f.rd, m));
    let upsilon = solve_upsilon(&ctx, &mut f, depth).map_err(|e| anyhow!("{e}"))?;
    let (based, theta) = match &job.mu {
        None => (
            BasedModule::highest(&mut f, &mut cbf, &lambda).map_err(|e| anyhow!("{e}"))?,
            None,
        ),
        Some(mu) => {
            let theta = solve_theta(&mut f, depth).map_err(|e| anyhow!("{e}"))?;
            (
                BasedModule::tensor(&mut f, &mut cbf, &theta, &lambda, mu)
                    .map_err(|e| anyhow!("{e}"))?,
                Some(theta),
            )
        }
    };
    let bar = match &theta {
        None => BarKind::Single,
        Some(t) => BarKind::Tensor(t),
    };
    let report = i_canonical_basis(&ctx, &mut f, &based, &bar, &upsilon)
        .map_err(|e| anyhow!("{e}"))?;
    let labels: Vec<String> = based
        .all_cb()
        .iter()
        .map(|(l, _, w)| format!("{l:?} @ {w:?}"))
        .collect();
    let mut transition = Vec::new();
    for (j, corr) in report.transition.iter().enumerate() {
        transition.push(json!({
            "element": labels[j],
            "corrections": corr
                .iter()
                .map(|(k, c)| json!({"lower": labels[*k], "coefficient": c.render()}))
                .collect::<Vec<_>>(),
        }));
    }
    Ok((
        json!({
            "lambda": lambda,
            "mu": job.mu,
            "dim": based.total_dim,
            "certificates": {
                "involution": report.ipsibar.involution_ok,
                "unitriangular": report.ipsibar.unitriangular_ok,
                "integral_entries": report.ipsibar.integral_ok,
            },
            "transition": transition,
        }),
        f,
    ))
}

fn parse_label(job: &JobSpec) -> Result<StabLabel> {
    let family = job.family.as_deref().unwrap_or("f");
    let node = job.node.checked_sub(1).context("node numbers are 1-based")?;
    Ok(match family {
        "f" => StabLabel::FDiv(node, job.power),
        "e" => StabLabel::EDiv(node, job.power),
        other => bail!("unknown label family '{other}' (use f or e)"),
    })
}

/// `compute icbdot`: stabilized modified-form element.
pub fn compute_icbdot(job: &JobSpec) -> Result<(Value, FAlgebra)> {
    let r = resolve_job(job)?;
    let mut f = new_algebra(&r.cartan_name, 64)?;
    let ctx = QSPContext::new(&mut f, r.diagram.clone(), r.params.clone())
        .map_err(|e| anyhow!("{e}"))?;
    let label = parse_label(job)?;
    let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
    let n = f.rank();
    let base = vec![1i64; n];
    let step = vec![1i64; n];
    let sched = job.schedule;
    let theta_bound = 2 * (sched + job.power + 2) * n as u32;
    let upsilon = solve_upsilon(&ctx, &mut f, theta_bound).map_err(|e| anyhow!("{e}"))?;
    let report = modified_icb_stabilize(
        &ctx, &mut f, &mut cbf, &label, &base, &base, &step, sched, theta_bound, &upsilon,
    )
    .map_err(|e| anyhow!("{e}"))?;
    let steps: Vec<Value> = report
        .steps
        .iter()
        .map(|s| {
            json!({
                "lambda": s.lambda,
                "mu": s.mu,
                "table": s.table.iter().map(|(k, c)| json!([k, c.render()])).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok((
        json!({
            "label": report.label.render(),
            "steps": steps,
            "stabilized_at": report.stabilized_at,
        }),
        f,
    ))
}

/// `compute form`: limiting bilinear form of two stabilized labels.
pub fn compute_form(job: &JobSpec, second: Option<(String, usize, u32)>) -> Result<(Value, FAlgebra)> {
    let r = resolve_job(job)?;
    let mut f = new_algebra(&r.cartan_name, 64)?;
    let ctx = QSPContext::new(&mut f, r.diagram.clone(), r.params.clone())
        .map_err(|e| anyhow!("{e}"))?;
    let label_x = parse_label(job)?;
    let label_y = match second {
        None => label_x.clone(),
        Some((fam, node, pow)) => match fam.as_str() {
            "f" => StabLabel::FDiv(node - 1, pow),
            "e" => StabLabel::EDiv(node - 1, pow),
            other => bail!("unknown label family '{other}'"),
        },
    };
    let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
    let n = f.rank();
    let base = vec![1i64; n];
    let step = vec![1i64; n];
    let sched = job.schedule;
    let theta_bound = 2 * (sched + job.power + 2) * n as u32;
    let upsilon = solve_upsilon(&ctx, &mut f, theta_bound).map_err(|e| anyhow!("{e}"))?;
    let rx = modified_icb_stabilize(
        &ctx, &mut f, &mut cbf, &label_x, &base, &base, &step, sched, theta_bound, &upsilon,
    )
    .map_err(|e| anyhow!("{e}"))?;
    let ry = if label_y == label_x {
        None
    } else {
        Some(
            modified_icb_stabilize(
                &ctx, &mut f, &mut cbf, &label_y, &base, &base, &step, sched, theta_bound,
                &upsilon,
            )
            .map_err(|e| anyhow!("{e}"))?,
        )
    };
    let pair = ui_bilinear_form(&mut f, (&rx, ry.as_ref().unwrap_or(&rx)))
        .map_err(|e| anyhow!("{e}"))?;
    Ok((
        json!({
            "x": label_x.render(),
            "y": label_y.render(),
            "value": pair.as_ref().map(|v| v.render()),
            "stabilized": pair.is_some(),
            "congruent_to_delta_mod_qinv_A": pair.as_ref().map(|v| {
                if label_x == label_y {
                    v.sub(&iqsp_core::scalars::RatFunc::one()).in_qinv_bold_a()
                } else {
                    v.in_qinv_bold_a()
                }
            }),
        }),
        f,
    ))
}

/// One verification suite; returns (pass, details).
pub fn run_verify_suite(suite: &str, job: &JobSpec) -> Result<(bool, Value, FAlgebra)> {
    let r = resolve_job(job)?;
    let mut f = new_algebra(&r.cartan_name, 64)?;
    let ctx = QSPContext::new(&mut f, r.diagram.clone(), r.params.clone())
        .map_err(|e| anyhow!("{e}"))?;
    match suite {
        "integrality" => {
            let degree = job.degree.unwrap_or(1);
            let probe = upsilon_supports(&mut f, &ctx.diagram, 24).map_err(|e| anyhow!("{e}"))?;
            let unit = probe.first().map(|w| fwt_height(w)).unwrap_or(1);
            let bound = job.height.unwrap_or(unit * degree);
            let table = solve_upsilon(&ctx, &mut f, bound).map_err(|e| anyhow!("{e}"))?;
            let oracle = rank1_upsilon_pbw(&ctx, &mut f, bound).map_err(|e| anyhow!("{e}"))?;
            let agree = table.comps == oracle.comps;
            let pass = table.all_integral() && agree;
            Ok((
                pass,
                json!({
                    "bound": bound,
                    "integral": table.all_integral(),
                    "oracle_agrees": agree,
                    "components": table.pbw_coords.len(),
                }),
                f,
            ))
        }
        "braid" => {
            let lambda = job
                .lambda
                .clone()
                .unwrap_or_else(|| default_braid_weight(&ctx, f.rank()));
            let m = Module::build(&mut f, &ModuleDesc::Highest(lambda.clone()))
                .map_err(|e| anyhow!("{e}"))?;
            let mut all_pass = true;
            let mut details = Vec::new();
            for &i in &ctx.diagram.black.clone() {
                for e in [1i64, -1] {
                    for j in 0..f.rank() {
                        if j == i {
                            continue;
                        }
                        let cert = verify_braid_restriction(&ctx, &mut f, &m, i, e, j)
                            .map_err(|e| anyhow!("{e}"))?;
                        all_pass &= cert.pass;
                        details.push(json!({
                            "i": i + 1, "e": e, "j": j + 1,
                            "pass": cert.pass, "witness": cert.witness,
                        }));
                    }
                }
            }
            let bound = job.height.unwrap_or(4);
            let table = solve_upsilon(&ctx, &mut f, bound).map_err(|e| anyhow!("{e}"))?;
            let cert =
                verify_braid_fixes_upsilon(&ctx, &mut f, &table).map_err(|e| anyhow!("{e}"))?;
            all_pass &= cert.pass;
            details.push(json!({"upsilon_fixed": cert.pass, "witness": cert.witness}));
            Ok((all_pass, json!({ "lambda": lambda, "checks": details }), f))
        }
        "wp" => {
            let lambda = job
                .lambda
                .clone()
                .unwrap_or_else(|| default_braid_weight(&ctx, f.rank()));
            let m = Module::build(&mut f, &ModuleDesc::Highest(lambda.clone()))
                .map_err(|e| anyhow!("{e}"))?;
            let cert = verify_wp_restriction(&ctx, &mut f, &m).map_err(|e| anyhow!("{e}"))?;
            Ok((
                cert.pass,
                json!({ "lambda": lambda, "pass": cert.pass, "witness": cert.witness }),
                f,
            ))
        }
        "stabilize" => {
            let label = parse_label(job)?;
            let n = f.rank();
            let base = vec![1i64; n];
            let step = vec![1i64; n];
            let sched = job.schedule;
            let theta_bound = 2 * (sched + job.power + 2) * n as u32;
            let upsilon =
                solve_upsilon(&ctx, &mut f, theta_bound).map_err(|e| anyhow!("{e}"))?;
            let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
            let report = modified_icb_stabilize(
                &ctx, &mut f, &mut cbf, &label, &base, &base, &step, sched, theta_bound,
                &upsilon,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let pass = report.stabilized_at.is_some();
            Ok((
                pass,
                json!({
                    "label": report.label.render(),
                    "steps": report.steps.len(),
                    "stabilized_at": report.stabilized_at,
                }),
                f,
            ))
        }
        "orthonormal" => {
            let label = parse_label(job)?;
            let n = f.rank();
            let base = vec![1i64; n];
            let step = vec![1i64; n];
            let sched = job.schedule;
            let theta_bound = 2 * (sched + job.power + 2) * n as u32;
            let upsilon =
                solve_upsilon(&ctx, &mut f, theta_bound).map_err(|e| anyhow!("{e}"))?;
            let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
            let report = modified_icb_stabilize(
                &ctx, &mut f, &mut cbf, &label, &base, &base, &step, sched, theta_bound,
                &upsilon,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let diag = ui_bilinear_form(&mut f, (&report, &report)).map_err(|e| anyhow!("{e}"))?;
            let pass = matches!(
                &diag,
                Some(v) if v.sub(&iqsp_core::scalars::RatFunc::one()).in_qinv_bold_a()
            );
            Ok((
                pass,
                json!({
                    "label": report.label.render(),
                    "diagonal": diag.as_ref().map(|v| v.render()),
                }),
                f,
            ))
        }
        other => bail!("unknown suite '{other}'"),
    }
}

/// A small dominant weight with support on the white orbit closure, used as
/// the default test module.
fn default_braid_weight(ctx: &QSPContext, n: usize) -> Vec<i64> {
    let whites = ctx.diagram.white();
    let mut lam = vec![0i64; n];
    if let Some(&w) = whites.first() {
        lam[w] = 1;
    } else {
        lam[0] = 1;
    }
    lam
}

/// `catalog` subcommand body.
pub fn run_catalog(type_name: Option<&str>, rank: Option<usize>, all: bool, check: bool) -> Result<(Value, bool)> {
    let entries = if all {
        catalog::catalog()
    } else if let Some(t) = type_name {
        let list = catalog::find(t, rank);
        if list.is_empty() {
            bail!("no catalog entry for '{t}'");
        }
        list
    } else {
        catalog::catalog()
    };
    let mut out = Vec::new();
    let mut all_valid = true;
    for e in &entries {
        let d = e.diagram().map_err(|er| anyhow!("{er}"))?;
        let rep = d.validate();
        all_valid &= rep.valid;
        let mut locals = Vec::new();
        for (orbit, _, ty) in d.rank_one_decomposition().0 {
            locals.push(json!({
                "orbit": orbit.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "type": ty.map(|t| t.label()),
            }));
        }
        let params = QSPParams::default_for(&d).ok();
        let mut varsigma = BTreeMap::new();
        if let Some(p) = &params {
            for (i, v) in &p.varsigma {
                varsigma.insert(
                    format!("{}", i + 1),
                    format!(
                        "{}q^{}",
                        if v.negative { "-" } else { "" },
                        v.exp
                    ),
                );
            }
        }
        out.push(json!({
            "label": e.label,
            "cartan": e.cartan,
            "rank": e.rank,
            "black": e.black.iter().map(|v| v + 1).collect::<Vec<_>>(),
            "tau": e.tau.iter().enumerate().filter(|(a, b)| a != *b && a < *b)
                .map(|(a, b)| format!("{}-{}", a + 1, b + 1)).collect::<Vec<_>>(),
            "admissible": rep.valid,
            "failure": rep.failure,
            "varsigma": varsigma,
            "rank_one": locals,
            "note": e.note,
        }));
        if check && !rep.valid {
            all_valid = false;
        }
    }
    Ok((json!({ "entries": out }), all_valid))
}

/// Wrap a result table in the reproducible document shape.
pub fn result_doc(job: &JobSpec, results: Value, started: Instant, cache_stats: Option<Value>) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "job": job,
        "results": results,
        "metrics": {
            "elapsed_ms": started.elapsed().as_millis() as u64,
            "cache": cache_stats,
        },
    })
}

/// Flatten a JSON document into TSV lines (arrays of scalars become columns).
pub fn to_tsv(doc: &Value) -> String {
    let mut lines = Vec::new();
    fn walk(prefix: &str, v: &Value, lines: &mut Vec<String>) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    let p = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&p, x, lines);
                }
            }
            Value::Array(items) => {
                if items.iter().all(|x| !x.is_object() && !x.is_array()) {
                    let row: Vec<String> = items.iter().map(scalar_to_string).collect();
                    lines.push(format!("{prefix}\t{}", row.join("\t")));
                } else {
                    for (k, x) in items.iter().enumerate() {
                        walk(&format!("{prefix}[{k}]"), x, lines);
                    }
                }
            }
            scalar => lines.push(format!("{prefix}\t{}", scalar_to_string(scalar))),
        }
    }
    fn scalar_to_string(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    walk("", doc, &mut lines);
    lines.join("\n") + "\n"
}

/// Hydrate the weight-space cache of an algebra from disk and export it back.
pub mod cache {
    use super::*;
    use std::fs;
    use std::path::PathBuf;

    pub fn cache_path(cartan: &str) -> Option<PathBuf> {
        let dir = std::env::var("IQSP_CACHE_DIR").ok()?;
        let mut p = PathBuf::from(dir);
        p.push(format!("fspaces_{cartan}.json"));
        Some(p)
    }

    /// Returns the number of spaces loaded.
    pub fn load(f: &mut FAlgebra, cartan: &str) -> usize {
        let Some(path) = cache_path(cartan) else { return 0 };
        let Ok(text) = fs::read_to_string(&path) else { return 0 };
        let Ok(doc) = serde_json::from_str::<Value>(&text) else { return 0 };
        if doc["schema_version"].as_u64() != Some(SCHEMA_VERSION as u64) {
            return 0;
        }
        let mut n = 0;
        if let Some(spaces) = doc["spaces"].as_object() {
            for (key, rows) in spaces {
                let wt: Vec<u32> = key
                    .split(',')
                    .filter_map(|s| s.parse().ok())
                    .collect();
                if wt.len() != f.rank() {
                    continue;
                }
                let parsed: Option<Vec<Vec<(u32, String)>>> = rows.as_array().map(|rs| {
                    rs.iter()
                        .filter_map(|r| {
                            r.as_array().map(|entries| {
                                entries
                                    .iter()
                                    .filter_map(|e| {
                                        let col = e[0].as_u64()? as u32;
                                        let txt = e[1].as_str()?.to_string();
                                        Some((col, txt))
                                    })
                                    .collect::<Vec<_>>()
                            })
                        })
                        .collect()
                });
                if let Some(rows) = parsed {
                    if f.import_space(&wt, &rows).unwrap_or(false) {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    pub fn save(f: &mut FAlgebra, cartan: &str) {
        let Some(path) = cache_path(cartan) else { return };
        if let Some(dir) = path.parent() {
            let _ = fs::create_dir_all(dir);
        }
        let mut spaces = serde_json::Map::new();
        for wt in f.materialized_weights() {
            let key = wt
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            if let Ok(rows) = f.export_serre_rows(&wt) {
                let v: Value = rows
                    .into_iter()
                    .map(|r| {
                        Value::Array(
                            r.into_iter()
                                .map(|(c, t)| serde_json::json!([c, t]))
                                .collect(),
                        )
                    })
                    .collect();
                spaces.insert(key, v);
            }
        }
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "cartan": cartan,
            "spaces": spaces,
        });
        // atomic-ish write
        let tmp = path.with_extension("tmp");
        if fs::write(&tmp, serde_json::to_string(&doc).unwrap()).is_ok() {
            let _ = fs::rename(&tmp, &path);
        }
    }

    pub fn stats(f: &FAlgebra, loaded: usize) -> Value {
        let hits = f.cache_hits;
        let misses = f.cache_misses;
        let total = hits + misses;
        serde_json::json!({
            "memory_hits": hits,
            "memory_misses": misses,
            "hit_ratio": if total > 0 { hits as f64 / total as f64 } else { 1.0 },
            "disk_loaded": loaded,
        })
    }
}

/// `verify` suite runner used by `verify all`.
pub fn suites_for_all() -> Vec<&'static str> {
    vec!["integrality", "braid", "wp", "stabilize", "orthonormal"]
}

/// The i-divided-power certificate, reached through `verify all` on the types
/// with closed formulas.
pub fn idivided_check(job: &JobSpec) -> Result<bool> {
    let r = resolve_job(job)?;
    let mut f = new_algebra(&r.cartan_name, 64)?;
    let ctx = QSPContext::new(&mut f, r.diagram.clone(), r.params.clone())
        .map_err(|e| anyhow!("{e}"))?;
    let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
    let lambda = vec![1i64; f.rank()];
    let depth = iqsp_core::umod::depth_bound(&f.rd, &lambda) * 2;
    let theta = solve_theta(&mut f, depth).map_err(|e| anyhow!("{e}"))?;
    let upsilon = solve_upsilon(&ctx, &mut f, depth).map_err(|e| anyhow!("{e}"))?;
    let based = BasedModule::tensor(&mut f, &mut cbf, &theta, &lambda, &lambda)
        .map_err(|e| anyhow!("{e}"))?;
    let white = ctx.diagram.white()[0];
    let cert = i_divided_power_certificate(
        &ctx,
        &mut f,
        &based,
        &BarKind::Tensor(&theta),
        &upsilon,
        white,
        2,
    )
    .map_err(|e| anyhow!("{e}"))?;
    Ok(cert.pass)
}

/// Used by the T-map verification inside `verify all` for rank-one types.
pub fn tmap_check(job: &JobSpec) -> Result<bool> {
    let r = resolve_job(job)?;
    let mut f = new_algebra(&r.cartan_name, 64)?;
    let ctx = QSPContext::new(&mut f, r.diagram.clone(), r.params.clone())
        .map_err(|e| anyhow!("{e}"))?;
    let lambda = job
        .lambda
        .clone()
        .unwrap_or_else(|| default_braid_weight(&ctx, f.rank()));
    let m = Module::build(&mut f, &ModuleDesc::Highest(lambda.clone()))
        .map_err(|e| anyhow!("{e}"))?;
    let depth = iqsp_core::umod::depth_bound(&f.rd, &lambda);
    let upsilon = solve_upsilon(&ctx, &mut f, depth + 2).map_err(|e| anyhow!("{e}"))?;
    let mut tm = TMap::new(&ctx, &mut f, &m, &upsilon).map_err(|e| anyhow!("{e}"))?;
    let cert = verify_tmap_intertwines(&ctx, &mut f, &m, &upsilon, &mut tm)
        .map_err(|e| anyhow!("{e}"))?;
    let cyc = verify_ui_cyclic(&ctx, &mut f, &m).map_err(|e| anyhow!("{e}"))?;
    Ok(cert.pass && cyc.pass)
}

/// Helper used by tests and the `li` part of `compute cbtensor`.
pub fn li_dims(job: &JobSpec) -> Result<(usize, usize)> {
    let r = resolve_job(job)?;
    let lambda = job.lambda.clone().context("need --lambda")?;
    let mu = job.mu.clone().context("need --mu")?;
    let mut f = new_algebra(&r.cartan_name, 64)?;
    let ctx = QSPContext::new(&mut f, r.diagram.clone(), r.params.clone())
        .map_err(|e| anyhow!("{e}"))?;
    let mut cbf = CanonicalBasisF::new(&mut f).map_err(|e| anyhow!("{e}"))?;
    let depth = iqsp_core::umod::depth_bound(&f.rd, &lambda)
        + iqsp_core::umod::depth_bound(&f.rd, &mu);
    let theta = solve_theta(&mut f, depth).map_err(|e| anyhow!("{e}"))?;
    let based =
        BasedModule::tensor(&mut f, &mut cbf, &theta, &lambda, &mu).map_err(|e| anyhow!("{e}"))?;
    let (lm, _) = based.module.factors().expect("tensor");
    let etab = iqsp_core::umod::extremal_vector(&mut f, lm, &ctx.diagram.w_black)
        .map_err(|e| anyhow!("{e}"))?;
    let (_, rm) = based.module.factors().unwrap();
    let v0 = based.module.tensor_vector(&etab, &rm.cyclic_vector());
    let li = li_submodule(&mut f, &based, &v0).map_err(|e| anyhow!("{e}"))?;
    Ok((li.dim, li.cb_members.len()))
}
