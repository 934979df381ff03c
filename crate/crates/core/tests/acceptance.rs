//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on failure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};
use susyj::index::{census, corollary4_check, index_theorem_check, probe_for, Verdict};
use susyj::jordan::build_smatrix;
use susyj::models::{
    confluence_limit, model_inverse_square, model_rank2, model_single, model_two_level, probe_functions,
    resolution_of_identity, symmetry_check, ModelBundle, RoiSpec, RoiVariant,
};
use susyj::operators::{chain_residual, compose, intertwining_residual, relative_residual, DiffOperator, GridSpec};
use susyj::quadrature::{biorthogonality_matrix, binorm_integral, QuadratureSpec};
use susyj::{Expr, Result, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn z05() -> C64 {
    c(0.0, 0.5)
}

fn rank2() -> Result<ModelBundle> {
    model_rank2(1.0, 0.0, z05())
}

fn binorm(a: &Expr, b: &Expr) -> Result<C64> {
    Ok(binorm_integral(a, b, &QuadratureSpec::default())?.value)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn criterion1() -> Result<Outcome> {
    let b = rank2()?;
    let r = intertwining_residual(&b.h_plus, &b.h_minus, &b.q_minus, &probe_functions(), &b.grid)?;
    outcome(r < 1e-8, format!("intertwining residual {r:.2e}"))
}

fn criterion2() -> Result<Outcome> {
    let b = rank2()?;
    let r = chain_residual(&b.h_minus, &b.chains[0], &b.grid)?;
    outcome(r < 1e-9, format!("chain residual {r:.2e}"))
}

fn criterion3() -> Result<Outcome> {
    let b = rank2()?;
    let f = &b.chains[0].functions;
    let b00 = binorm(&f[0], &f[0])?.norm();
    let b11 = binorm(&f[1], &f[1])?.norm();
    let b01 = (binorm(&f[0], &f[1])? - 1.0).norm();
    outcome(
        b00 < 1e-8 && b11 < 1e-8 && b01 < 1e-6,
        format!("|B00| {b00:.2e}, |B11| {b11:.2e}, |B01 - 1| {b01:.2e}"),
    )
}

fn criterion4() -> Result<Outcome> {
    let a = 1.0;
    let mut worst: f64 = 0.0;
    let mut sizes = Vec::new();
    for beta in [0.5, 0.3, 0.1, 0.01] {
        let b = model_two_level(c(a, 0.0), beta, 0.0, z05())?;
        let tp = &b.kernel_plus.entries[0].expr;
        let tm = &b.kernel_plus.entries[1].expr;
        let vp = binorm(tp, tp)?;
        let vm = binorm(tm, tm)?;
        worst = worst.max((vp + beta / (2.0 * a * (a + beta))).norm());
        worst = worst.max((vm - beta / (2.0 * a * (a - beta))).norm());
        sizes.push(vp.norm().max(vm.norm()));
    }
    let shrinking = sizes.windows(2).all(|w| w[1] < w[0]) && sizes[3] < 1e-2;
    outcome(
        worst < 1e-6 && shrinking,
        format!("max formula error {worst:.2e}, |binorm| at beta=0.01 {:.2e}", sizes[3]),
    )
}

fn criterion5() -> Result<Outcome> {
    let a: f64 = 1.0;
    let b = rank2()?;
    let s = build_smatrix(&b.h_plus, &b.kernel_minus.functions(), &b.grid)?;
    let expected = [[c(-a * a, 0.0), c(0.0, 0.0)], [c(1.0, 0.0), c(-a * a, 0.0)]];
    let mut entry: f64 = 0.0;
    for (i, row) in expected.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            entry = entry.max((s.entries[(i, j)] - e).norm());
        }
    }
    let mut poly: f64 = 0.0;
    for k in [0.5, 1.0, 2.0] {
        let wave = Expr::x().scale(c(0.0, k)).exp();
        let lhs = b.q_plus.apply(&b.q_minus.apply(&wave));
        let rhs = wave.scale_re((k * k + a * a).powi(2));
        poly = poly.max(relative_residual(&lhs, &rhs, &b.grid)?);
    }
    outcome(
        entry < 1e-8 && poly < 1e-7,
        format!("S-matrix entry error {entry:.2e}, polynomial residual {poly:.2e}"),
    )
}

fn criterion6() -> Result<Outcome> {
    let b = rank2()?;
    let cen = census(&b, c(-1.0, 0.0), &probe_for(&b))?;
    let counts = [
        cen.k,
        cen.k_up_plus,
        cen.k_down_plus,
        cen.k_up_minus,
        cen.k_down_minus,
        cen.nu_minus,
        cen.n_minus,
        cen.n_zero,
        cen.nu_plus,
        cen.n_plus,
    ];
    let theorem = index_theorem_check(&cen);
    let corollary = corollary4_check(&cen)?;
    outcome(
        counts == [2, 0, 0, 2, 2, 2, 2, 0, 0, 0] && theorem == Verdict::Holds && corollary == Verdict::Holds,
        format!("counts {counts:?}, theorem {theorem:?}, corollary {corollary:?}"),
    )
}

fn criterion7() -> Result<Outcome> {
    let r = confluence_limit(1.0, 0.0, z05(), 1e-3)?;
    outcome(
        r.exact_route_error < 1e-9 && r.finite_difference_error < 1e-6 && r.dyad_error < 1e-5,
        format!(
            "exact {:.2e}, finite difference {:.2e}, dyads {:.2e}",
            r.exact_route_error, r.finite_difference_error, r.dyad_error
        ),
    )
}

fn criterion8() -> Result<Outcome> {
    let b = rank2()?;
    let s = symmetry_check(&b, &[0.7, 1.3], &b.grid)?;
    let eig = s.eigen.iter().map(|e| e.relative_residual).fold(0.0, f64::max);
    let zero = s.zero_modes.iter().map(|z| z.residual).fold(0.0, f64::max);
    let has_zero_energy = s.zero_modes.iter().any(|z| z.label == "psi(x;0)");
    outcome(
        s.eigen.len() == 2 && eig < 1e-7 && has_zero_energy && zero < 1e-8 && s.antisymmetry_deviation < 1e-9,
        format!(
            "eigen residual {eig:.2e}, zero modes {zero:.2e}, R^t + R {:.2e}",
            s.antisymmetry_deviation
        ),
    )
}

fn criterion9() -> Result<Outcome> {
    let b = model_inverse_square(c(0.0, 1.0), 1)?;
    let p = b.threshold_state.clone().expect("threshold state");
    let self_binorm = binorm(&p, &p)?.norm();
    let spec = RoiSpec {
        grid: GridSpec::new(-4.0, 4.0, 9)?,
        ..RoiSpec::default()
    };
    let tests = [("psi0".to_string(), p)];
    let reg = resolution_of_identity(&b, &tests, RoiVariant::ThresholdRegularized, &spec)?;
    let plain = resolution_of_identity(&b, &tests, RoiVariant::ThresholdPlain, &spec)?;
    let (r, q) = (&reg.results[0], &plain.results[0]);
    outcome(
        self_binorm < 1e-8 && r.extrapolated_residual < 1e-3 && q.extrapolated_residual > 0.5 * q.norm,
        format!(
            "binorm {self_binorm:.2e}, regularized error {:.2e}, plain error {:.2e} vs norm {:.2e}",
            r.extrapolated_residual, q.extrapolated_residual, q.norm
        ),
    )
}

fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.6) {
            Expr::x()
        } else {
            Expr::constant(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => a.add(&random_expr(rng, depth - 1)),
        1 => a.mul(&random_expr(rng, depth - 1)),
        2 => a.div(&random_expr(rng, depth - 1).powi(2).add(&Expr::real(2.0))),
        3 => a.neg(),
        4 => a.powi(rng.gen_range(2..4)),
        5 => a.scale_re(0.5).exp(),
        6 => a.sin(),
        7 => a.cos(),
        8 => a.scale_re(0.5).sinh(),
        9 => a.scale_re(0.5).cosh(),
        _ => a.tanh(),
    }
}

fn finite_difference(f: &Expr, x: f64, h: f64) -> Result<C64> {
    let v = |t: f64| f.value(x + t * h);
    Ok((v(-2.0)? - v(-1.0)? * 8.0 + v(1.0)? * 8.0 - v(2.0)?) / (12.0 * h))
}

fn random_operator(rng: &mut ChaCha8Rng) -> DiffOperator {
    let order = rng.gen_range(0..3usize);
    let mut coeffs = Vec::new();
    for _ in 0..order {
        let x = Expr::x();
        let mut r = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        coeffs.push(Expr::constant(r()).add(&x.scale(r())).add(&x.sin().scale(r())));
    }
    coeffs.push(Expr::constant(c(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0))));
    DiffOperator::new(coeffs).expect("constant leading coefficient")
}

fn random_bump(rng: &mut ChaCha8Rng) -> Expr {
    let x = Expr::x();
    let mut r = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (b0, b1) = (r(), r());
    let s = r().re;
    Expr::constant(b0)
        .add(&x.scale(b1))
        .mul(&x.sub(&Expr::real(s)).powi(2).neg().exp())
}

fn criterion10() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_517);
    // derivatives against five-point differences
    let (mut checked, mut fd_worst) = (0, 0.0f64);
    while checked < 100 {
        let f = random_expr(&mut rng, 4);
        let x = rng.gen_range(-1.0..1.0);
        let (Ok(d), Ok(approx)) = (f.derivative().value(x), finite_difference(&f, x, 1e-3)) else {
            continue;
        };
        if !d.re.is_finite() || !d.im.is_finite() || d.norm() > 1e4 {
            continue;
        }
        fd_worst = fd_worst.max((d - approx).norm() / d.norm().max(1.0));
        checked += 1;
    }
    // (ab)^t = b^t a^t through the pairing ∫(q f) g = ∫ f (q^t g)
    let mut pair_worst: f64 = 0.0;
    for _ in 0..20 {
        let a = random_operator(&mut rng);
        let b = random_operator(&mut rng);
        let f = random_bump(&mut rng);
        let g = random_bump(&mut rng);
        let lhs = binorm(&a.apply(&b.apply(&f)), &g)?;
        let via_product = binorm(&f, &compose(&a, &b).transpose().apply(&g))?;
        let via_factors = binorm(&f, &b.transpose().apply(&a.transpose().apply(&g)))?;
        let scale = 1.0 + lhs.norm();
        pair_worst = pair_worst.max((lhs - via_product).norm() / scale);
        pair_worst = pair_worst.max((lhs - via_factors).norm() / scale);
    }
    // binorm pattern on every built-in chain
    let bundles = [
        rank2()?,
        model_two_level(c(1.0, 0.0), 0.3, 0.0, z05())?,
        model_single(1.0, 0.0)?,
        model_inverse_square(c(0.0, 1.0), 1)?,
        model_inverse_square(c(0.0, 1.0), 3)?,
    ];
    let mut pattern_worst: f64 = 0.0;
    let mut chains = 0;
    for b in &bundles {
        for ch in b.chains.iter().chain(&b.plus_chains) {
            let m = biorthogonality_matrix(&ch.functions, &QuadratureSpec::default())?;
            pattern_worst = pattern_worst.max(m.vanishing_max).max(m.antidiagonal_spread);
            chains += 1;
        }
    }
    // PT preservation on the x0 = Re z = 0 configurations
    let mut pt_worst: f64 = 0.0;
    for b in &bundles {
        if b.is_pt_configuration() {
            let v = &b.h_minus.potential;
            pt_worst = pt_worst.max(relative_residual(&v.reflect().conj(), v, &b.grid)?);
        }
    }
    outcome(
        fd_worst < 1e-6 && pair_worst < 1e-7 && pattern_worst < 1e-6 && pt_worst < 1e-10,
        format!(
            "derivatives {fd_worst:.2e}, transpose pairing {pair_worst:.2e}, binorm pattern {pattern_worst:.2e} over {chains} chains, PT {pt_worst:.2e}"
        ),
    )
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion, Duration); 10] = [
        ("intertwining identity", criterion1, Duration::from_secs(1)),
        ("Jordan chain", criterion2, Duration::from_secs(1)),
        ("binorm table", criterion3, Duration::from_secs(5)),
        ("two-level binorms", criterion4, Duration::from_secs(60)),
        ("S-matrix and SUSY polynomial", criterion5, Duration::from_secs(60)),
        ("index census", criterion6, Duration::from_secs(10)),
        ("confluence", criterion7, Duration::from_secs(60)),
        ("symmetry operator", criterion8, Duration::from_secs(60)),
        ("threshold model", criterion9, Duration::from_secs(60)),
        ("property suite", criterion10, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = run();
        let took = start.elapsed();
        let (pass, detail) = match res {
            Ok(o) => (o.pass && took <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:2} ({name}): {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
