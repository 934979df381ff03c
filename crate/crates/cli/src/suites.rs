use serde_json::{json, Value};
use std::collections::BTreeMap;
use susyj::index::{index_report, Verdict};
use susyj::jordan::{build_smatrix, jordan_form, susy_polynomial, JordanStructure};
use susyj::models::{
    confluence_limit, continuation_limits, probe_functions, resolution_of_identity, symmetry_check, ModelBundle,
    ModelKind, RoiSpec, RoiVariant,
};
use susyj::operators::{annihilation_residual, chain_residual, intertwining_residual, relative_residual, GridSpec};
use susyj::quadrature::{biorthogonality_matrix, binorm_integral, QuadratureSpec};
use susyj::{ComplexScalar, Expr, C64};

use crate::config::Suite;
use crate::report::{Check, SuiteResult};

pub struct Context {
    pub grid: GridSpec,
    pub quad: QuadratureSpec,
    pub tol: BTreeMap<String, f64>,
    pub roi: Option<RoiSpec>,
    pub k_values: Vec<f64>,
}

impl Context {
    fn tol(&self, key: &str) -> f64 {
        self.tol[key]
    }
}

type Outcome = susyj::Result<SuiteResult>;

pub fn run(suite: Suite, b: &ModelBundle, ctx: &Context) -> SuiteResult {
    let r = match suite {
        Suite::Intertwine => intertwine(b, ctx),
        Suite::Chains => chains(b, ctx),
        Suite::Binorms => binorms(b, ctx),
        Suite::Jordan => jordan(b, ctx),
        Suite::Index => index(b),
        Suite::Symmetry => symmetry(b, ctx),
        Suite::Roi => roi(b, ctx),
        Suite::Confluence => confluence(b, ctx),
    };
    r.unwrap_or_else(|e| SuiteResult::failed(format!("error: {e}")))
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

fn intertwine(b: &ModelBundle, ctx: &Context) -> Outcome {
    let g = &ctx.grid;
    let r = intertwining_residual(&b.h_plus, &b.h_minus, &b.q_minus, &probe_functions(), g)?;
    let mut checks = vec![Check::below("q_minus_intertwines", r, 0.0, ctx.tol("intertwine"))];
    let tol = ctx.tol("annihilation");
    for (i, e) in b.kernel_minus.entries.iter().enumerate() {
        let a = annihilation_residual(&b.q_minus, &e.expr, g)?;
        checks.push(Check::below(format!("q_minus_annihilates_kernel_minus[{i}]"), a, 0.0, tol));
    }
    for (i, e) in b.kernel_plus.entries.iter().enumerate() {
        let a = annihilation_residual(&b.q_plus, &e.expr, g)?;
        checks.push(Check::below(format!("q_plus_annihilates_kernel_plus[{i}]"), a, 0.0, tol));
    }
    Ok(SuiteResult::from_checks(checks, Value::Null))
}

fn chains(b: &ModelBundle, ctx: &Context) -> Outcome {
    let g = &ctx.grid;
    let tol = ctx.tol("chains");
    let mut checks = vec![
        Check::below("kernel_minus", b.kernel_minus.chain_residual(g)?, 0.0, tol),
        Check::below("kernel_plus", b.kernel_plus.chain_residual(g)?, 0.0, tol),
    ];
    for (i, c) in b.chains.iter().enumerate() {
        checks.push(Check::below(format!("chains[{i}]"), chain_residual(&b.h_minus, c, g)?, 0.0, tol));
    }
    for (i, c) in b.plus_chains.iter().enumerate() {
        checks.push(Check::below(format!("plus_chains[{i}]"), chain_residual(&b.h_plus, c, g)?, 0.0, tol));
    }
    Ok(SuiteResult::from_checks(checks, Value::Null))
}

fn binorms(b: &ModelBundle, ctx: &Context) -> Outcome {
    let tol = ctx.tol("binorms");
    let q = &ctx.quad;
    let mut checks = Vec::new();
    let mut matrices = Vec::new();
    let named = b
        .chains
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("chains[{i}]"), c))
        .chain(b.plus_chains.iter().enumerate().map(|(i, c)| (format!("plus_chains[{i}]"), c)));
    for (label, c) in named {
        let m = biorthogonality_matrix(&c.functions, q)?;
        let err = m.max_error();
        checks.push(Check::below(format!("{label}_vanishing"), m.vanishing_max, err, tol));
        checks.push(Check::below(format!("{label}_antidiagonal_spread"), m.antidiagonal_spread, err, tol));
        checks.push(Check::below(format!("{label}_asymmetry"), m.asymmetry, err, 2.0 * err + tol));
        matrices.push(json!({ "chain": label, "matrix": to_value(&m) }));
    }
    let mut extra = Vec::new();
    if let ModelKind::TwoLevel { alpha, beta, .. } = b.kind {
        let tp = &b.kernel_plus.entries[0].expr;
        let tm = &b.kernel_plus.entries[1].expr;
        let expected = [
            ("plus", tp, -beta / (2.0 * alpha * (alpha + beta))),
            ("minus", tm, beta / (2.0 * alpha * (alpha - beta))),
        ];
        for (label, f, e) in expected {
            let v = binorm_integral(f, f, q)?;
            checks.push(Check::below(format!("two_level_{label}_formula"), (v.value - e).norm(), v.error, tol));
            extra.push(json!({
                "state": label,
                "measured": ComplexScalar::from(v.value),
                "error": v.error,
                "expected": ComplexScalar::from(e),
            }));
        }
        let v = binorm_integral(tp, tm, q)?;
        checks.push(Check::below("two_level_cross", v.value.norm(), v.error, tol));
    }
    if let Some(p) = &b.threshold_state {
        let v = binorm_integral(p, p, q)?;
        checks.push(Check::below("threshold_state_self", v.value.norm(), v.error, tol));
    }
    Ok(SuiteResult::from_checks(
        checks,
        json!({ "matrices": matrices, "two_level": extra }),
    ))
}

fn structure(h: &susyj::operators::Hamiltonian, funcs: &[Expr], g: &GridSpec) -> susyj::Result<(f64, JordanStructure)> {
    let s = build_smatrix(h, funcs, g)?;
    let js = jordan_form(&s.entries, 1e-8)?;
    Ok((s.residual, js))
}

fn cell_list(js: &JordanStructure) -> Vec<(C64, usize)> {
    let mut v: Vec<(C64, usize)> = js.cells.iter().map(|c| (c.lambda, c.size)).collect();
    v.sort_by(|a, b| {
        a.0.re
            .total_cmp(&b.0.re)
            .then(a.0.im.total_cmp(&b.0.im))
            .then(a.1.cmp(&b.1))
    });
    v
}

fn jordan(b: &ModelBundle, ctx: &Context) -> Outcome {
    let g = &ctx.grid;
    let (fit_plus, js_plus) = structure(&b.h_plus, &b.kernel_minus.functions(), g)?;
    let (fit_minus, js_minus) = structure(&b.h_minus, &b.kernel_plus.functions(), g)?;
    let tol_fit = ctx.tol("smatrix");
    let mut checks = vec![
        Check::below("smatrix_plus_fit", fit_plus, 0.0, tol_fit),
        Check::below("smatrix_minus_fit", fit_minus, 0.0, tol_fit),
    ];
    // strip-off consistency: same eigenvalues and cell sizes from both sides
    let (a, c) = (cell_list(&js_plus), cell_list(&js_minus));
    let gap = if a.len() == c.len() && a.iter().zip(&c).all(|(x, y)| x.1 == y.1) {
        a.iter().zip(&c).map(|(x, y)| (x.0 - y.0).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    checks.push(Check::below("structures_agree", gap, 0.0, tol_fit));
    // q⁺q⁻ = P(h⁺) on probes
    let p = susy_polynomial(&js_plus);
    let mut closure: f64 = 0.0;
    for f in probe_functions() {
        let lhs = b.q_plus.apply(&b.q_minus.apply(&f));
        let mut rhs = f.scale(p[p.len() - 1]);
        for coef in p.iter().rev().skip(1) {
            rhs = b.h_plus.apply(&rhs).add(&f.scale(*coef));
        }
        closure = closure.max(relative_residual(&lhs, &rhs, g)?);
    }
    checks.push(Check::below("polynomial_closure", closure, 0.0, ctx.tol("jordan")));
    let poly: Vec<ComplexScalar> = p.iter().map(|&c| c.into()).collect();
    Ok(SuiteResult::from_checks(
        checks,
        json!({
            "structure_plus": to_value(&js_plus),
            "structure_minus": to_value(&js_minus),
            "susy_polynomial": poly,
        }),
    ))
}

fn index(b: &ModelBundle) -> Outcome {
    let r = index_report(b)?;
    let flag = |v: Verdict| if v == Verdict::Violated { 1.0 } else { 0.0 };
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for (i, l) in r.levels.iter().enumerate() {
        checks.push(Check::below(format!("level[{i}]_index_theorem"), flag(l.index_theorem), 0.0, 0.0));
        checks.push(Check::below(format!("level[{i}]_corollary4"), flag(l.corollary4), 0.0, 0.0));
        notes.extend(l.notes.iter().map(|n| format!("level[{i}]: {n}")));
    }
    let mut out = SuiteResult::from_checks(checks, to_value(&r));
    out.notes = notes;
    Ok(out)
}

fn symmetry(b: &ModelBundle, ctx: &Context) -> Outcome {
    if b.symmetry_op.is_none() {
        return Ok(SuiteResult::skipped("model has no symmetry operator"));
    }
    let s = symmetry_check(b, &ctx.k_values, &ctx.grid)?;
    let tol = ctx.tol("symmetry");
    let tz = ctx.tol("zero_modes");
    let mut checks = vec![
        Check::below("commutator", s.commutator_residual, 0.0, tz),
        Check::below("antisymmetry", s.antisymmetry_deviation, 0.0, 1e-9),
    ];
    for e in &s.eigen {
        checks.push(Check::below(format!("eigenvalue_k={}", e.k), e.relative_residual, 0.0, tol));
    }
    for z in &s.zero_modes {
        checks.push(Check::below(format!("annihilates_{}", z.label), z.residual, 0.0, tz));
    }
    if let Some(c) = s.zero_energy_constancy {
        checks.push(Check::below("zero_energy_constancy", c, 0.0, tz));
    }
    if let Some(c) = s.pt_anticommutator {
        checks.push(Check::below("pt_anticommutator", c, 0.0, tz));
    }
    Ok(SuiteResult::from_checks(checks, to_value(&s)))
}

fn roi(b: &ModelBundle, ctx: &Context) -> Outcome {
    if let (ModelKind::InverseSquare { .. }, Some(p)) = (&b.kind, &b.threshold_state) {
        let spec = ctx.roi.clone().unwrap_or_else(|| RoiSpec {
            grid: GridSpec {
                x_min: -4.0,
                x_max: 4.0,
                n_points: 9,
            },
            ..RoiSpec::default()
        });
        let tests = [("psi0".to_string(), p.clone())];
        let reg = resolution_of_identity(b, &tests, RoiVariant::ThresholdRegularized, &spec)?;
        let plain = resolution_of_identity(b, &tests, RoiVariant::ThresholdPlain, &spec)?;
        let (r, q) = (&reg.results[0], &plain.results[0]);
        let checks = vec![
            Check::below("regularized_reconstruction", r.extrapolated_residual, r.k_error, ctx.tol("roi_threshold")),
            // the unregularized form is expected to miss ψ₀
            Check::above("plain_form_fails", q.extrapolated_residual / q.norm, q.k_error / q.norm, 0.5),
        ];
        return Ok(SuiteResult::from_checks(
            checks,
            json!({ "regularized": to_value(&reg), "plain": to_value(&plain) }),
        ));
    }
    if let ModelKind::InverseSquare { n, .. } = b.kind {
        return Ok(SuiteResult::skipped(format!("resolution of identity is not supported for n = {n}")));
    }
    if b.continuum.is_none() {
        return Ok(SuiteResult::skipped("model has no continuum family for the discrete variant"));
    }
    let spec = ctx.roi.clone().unwrap_or_else(|| RoiSpec {
        grid: GridSpec {
            x_min: -3.0,
            x_max: 3.0,
            n_points: 13,
        },
        ..RoiSpec::default()
    });
    let f = Expr::x().powi(2).neg().exp();
    let rep = resolution_of_identity(b, &[("gaussian".into(), f)], RoiVariant::Discrete, &spec)?;
    let t = &rep.results[0];
    let checks = vec![Check::below("gaussian_reconstruction", t.extrapolated_residual, t.k_error, ctx.tol("roi"))];
    Ok(SuiteResult::from_checks(checks, to_value(&rep)))
}

fn confluence(b: &ModelBundle, ctx: &Context) -> Outcome {
    let limit_checks = |checks: &mut Vec<Check>| -> susyj::Result<Value> {
        let r = continuation_limits(b)?;
        for c in &r.checks {
            checks.push(Check::below(format!("limit_{}", c.label), c.error, c.spread, ctx.tol("limits")));
        }
        Ok(to_value(&r))
    };
    let mut checks = Vec::new();
    match b.kind {
        ModelKind::Rank2 { alpha, x0, z } => {
            let limits = limit_checks(&mut checks)?;
            let r = confluence_limit(alpha, x0, z, 1e-3)?;
            checks.push(Check::below("exact_route", r.exact_route_error, 0.0, ctx.tol("confluence_exact")));
            checks.push(Check::below(
                "finite_difference_route",
                r.finite_difference_error,
                r.finite_difference_spread,
                ctx.tol("confluence_fd"),
            ));
            checks.push(Check::below("dyad_limit", r.dyad_error, r.dyad_spread, ctx.tol("confluence_dyad")));
            Ok(SuiteResult::from_checks(
                checks,
                json!({ "limits": limits, "confluence": to_value(&r) }),
            ))
        }
        ModelKind::TwoLevel { .. } | ModelKind::InverseSquare { .. } => {
            let limits = limit_checks(&mut checks)?;
            Ok(SuiteResult::from_checks(checks, json!({ "limits": limits })))
        }
        _ => Ok(SuiteResult::skipped("no continuation limits for this model")),
    }
}
