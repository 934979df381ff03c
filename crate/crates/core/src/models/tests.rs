use super::*;
use crate::operators::{relative_residual, sample};
use crate::quadrature::{binorm_integral, QuadratureSpec};

fn z05() -> C64 {
    C64::new(0.0, 0.5)
}

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn binorm(a: &Expr, b: &Expr) -> C64 {
    binorm_integral(a, b, &q()).unwrap().value
}

#[test]
fn rank2_potential_matches_closed_form() {
    let (a, x0, z) = (1.3, 0.2, C64::new(0.4, 0.7));
    let b = model_rank2(a, x0, z).unwrap();
    let x = Expr::x();
    let u = x.sub(&Expr::real(x0)).scale_re(a);
    let num = x
        .sub(&Expr::constant(z))
        .mul(&u.scale_re(2.0).sinh())
        .scale_re(a)
        .sub(&u.cosh().powi(2).scale_re(2.0));
    let v = num.div(&rank2_w(a, x0, z).powi(2)).scale_re(-16.0 * a * a);
    let r = relative_residual(&b.h_minus.potential, &v, &b.grid).unwrap();
    assert!(r < 1e-10, "{r}");
}

#[test]
fn rank2_pt_configuration() {
    let b = model_rank2(1.0, 0.0, z05()).unwrap();
    assert!(b.is_pt_configuration());
    let v = &b.h_minus.potential;
    let r = relative_residual(&v.reflect().conj(), v, &b.grid).unwrap();
    assert!(r < 1e-12, "{r}");
    let off = model_rank2(1.0, 0.3, z05()).unwrap();
    assert!(!off.is_pt_configuration());
    let v = &off.h_minus.potential;
    assert!(relative_residual(&v.reflect().conj(), v, &off.grid).unwrap() > 1e-3);
}

#[test]
fn rank2_factorized_zero_mode() {
    let a: f64 = 0.8;
    let b = model_rank2(a, 0.1, C64::new(0.2, 0.6)).unwrap();
    let th = Expr::x().sub(&Expr::real(0.1)).scale_re(a).tanh().scale_re(a);
    let qa = DiffOperator::first_order(1.0, th.neg());
    let phi1m = &b.kernel_minus.entries[1].expr;
    let phi0p = &b.kernel_plus.entries[0].expr;
    let expected = phi0p.recip().scale_re(-(a / 2.0).sqrt());
    let r = relative_residual(&qa.apply(phi1m), &expected, &b.grid).unwrap();
    assert!(r < 1e-10, "{r}");
}

#[test]
fn rank2_binorms() {
    let b = model_rank2(1.0, 0.0, z05()).unwrap();
    let f = &b.chains[0].functions;
    assert!(binorm(&f[0], &f[0]).norm() < 1e-8);
    assert!(binorm(&f[1], &f[1]).norm() < 1e-8);
    assert!((binorm(&f[0], &f[1]) - 1.0).norm() < 1e-6);
}

#[test]
fn rank2_parameter_domain() {
    assert!(matches!(model_rank2(1.0, 0.0, C64::new(0.3, 0.0)), Err(Error::ParameterDomain(_))));
    assert!(matches!(model_rank2(-1.0, 0.0, z05()), Err(Error::ParameterDomain(_))));
}

#[test]
fn two_level_binorm_formula() {
    let a = 1.0;
    for beta in [0.1, 0.3, 0.5] {
        let b = model_two_level(C64::new(a, 0.0), beta, 0.0, z05()).unwrap();
        let tp = &b.kernel_plus.entries[0].expr;
        let tm = &b.kernel_plus.entries[1].expr;
        let ep = -beta / (2.0 * a * (a + beta));
        let em = beta / (2.0 * a * (a - beta));
        assert!((binorm(tp, tp) - ep).norm() < 1e-6, "beta {beta}");
        assert!((binorm(tm, tm) - em).norm() < 1e-6, "beta {beta}");
        assert!(binorm(tp, tm).norm() < 1e-8);
        for c in &b.chains {
            let f = &c.functions[0];
            assert!((binorm(f, f) - 1.0).norm() < 1e-6);
        }
    }
}

#[test]
fn two_level_domain() {
    let a = C64::new(1.0, 0.0);
    assert!(matches!(model_two_level(a, 1.0, 0.0, z05()), Err(Error::ParameterDomain(_))));
    assert!(matches!(model_two_level(a, 0.2, 0.0, ZERO), Err(Error::ParameterDomain(_))));
    assert!(matches!(model_two_level(a, 4.0, 0.0, z05()), Err(Error::ParameterDomain(_))));
    assert!(matches!(model_two_level(a, -0.1, 0.0, z05()), Err(Error::ParameterDomain(_))));
    let b = model_two_level(a, 0.0, 0.0, z05()).unwrap();
    assert_eq!(b.chains[0].len(), 2);
    assert!(b.param("beta").is_some());
}

#[test]
fn two_level_branch_is_k_squared_at_infinity() {
    let a = C64::new(1.0, 0.0);
    for k in [50.0, -50.0, 1e3] {
        let f = two_level_branch(C64::new(k, 0.0), a, 0.3);
        assert!((f / (k * k) - 1.0).norm() < 1e-3);
    }
    // continuous along the real axis
    let mut prev = two_level_branch(C64::new(-20.0, 0.0), a, 0.3);
    for i in 1..=4000 {
        let k = -20.0 + 0.01 * i as f64;
        let f = two_level_branch(C64::new(k, 0.0), a, 0.3);
        assert!((f - prev).norm() < 0.5);
        prev = f;
    }
}

#[test]
fn single_well() {
    let b = model_single(1.0, 0.0).unwrap();
    let f = &b.chains[0].functions[0];
    assert!((binorm(f, f) - 1.0).norm() < 1e-8);
    let s = symmetry_check(&b, &[0.5], &b.grid).unwrap();
    assert!(s.eigen[0].relative_residual < 1e-7);
}

#[test]
fn symmetry_rank2() {
    let b = model_rank2(1.0, 0.0, z05()).unwrap();
    let s = symmetry_check(&b, &[1.0, 0.7, 1.3], &b.grid).unwrap();
    assert_eq!(s.order, 5);
    let m: C64 = s.eigen[0].measured.into();
    assert!((m - C64::new(0.0, 4.0)).norm() < 1e-7, "{m}");
    for e in &s.eigen {
        assert!(e.relative_residual < 1e-7);
    }
    for z in &s.zero_modes {
        assert!(z.residual < 1e-8, "{}: {}", z.label, z.residual);
    }
    assert!(s.antisymmetry_deviation < 1e-12);
    assert!(s.commutator_residual < 1e-8);
    assert!(s.zero_energy_constancy.unwrap() < 1e-8);
    assert!(s.pt_anticommutator.unwrap() < 1e-8);
}

#[test]
fn symmetry_two_level_and_inverse_square() {
    let b = model_two_level(C64::new(1.0, 0.0), 0.3, 0.2, z05()).unwrap();
    let s = symmetry_check(&b, &[0.9], &b.grid).unwrap();
    assert!(s.eigen[0].relative_residual < 1e-7);
    assert!(s.zero_modes.iter().all(|z| z.residual < 1e-8));
    assert!(s.pt_anticommutator.is_none());
    let b = model_inverse_square(C64::new(0.0, 1.0), 1).unwrap();
    let s = symmetry_check(&b, &[0.9], &b.grid).unwrap();
    assert_eq!(s.order, 3);
    let m: C64 = s.eigen[0].measured.into();
    assert!((m - I * 0.729).norm() < 1e-7);
}

#[test]
fn continuation_limits_rank2_two_level_inverse_square() {
    let b = model_rank2(1.0, 0.3, z05()).unwrap();
    let r = continuation_limits(&b).unwrap();
    assert_eq!(r.checks.len(), 4);
    assert!(r.worst() < 1e-6, "{:?}", r.checks);
    let b = model_two_level(C64::new(1.0, 0.0), 0.3, 0.1, z05()).unwrap();
    let r = continuation_limits(&b).unwrap();
    assert!(r.worst() < 1e-6, "{:?}", r.checks);
    let b = model_inverse_square(C64::new(0.0, 1.0), 1).unwrap();
    let r = continuation_limits(&b).unwrap();
    assert!(r.worst() < 1e-6, "{:?}", r.checks);
}

#[test]
fn confluence_to_rank2() {
    let r = confluence_limit(1.0, 0.0, z05(), 1e-3).unwrap();
    assert!(r.exact_route_error < 1e-9, "{}", r.exact_route_error);
    assert!(r.finite_difference_error < 1e-6, "{}", r.finite_difference_error);
    assert!(r.dyad_error < 1e-5, "{}", r.dyad_error);
    assert!(r.phi0_plus_errors.iter().all(|&e| e < 1e-5), "{:?}", r.phi0_plus_errors);
    assert!(r.phi1_plus_error < 1e-4, "{}", r.phi1_plus_error);
}

#[test]
fn inverse_square_threshold_state() {
    let b = model_inverse_square(C64::new(0.0, 1.0), 1).unwrap();
    let p = b.threshold_state.as_ref().unwrap();
    assert!(binorm(p, p).norm() < 1e-8);
    assert!(b.symmetry_op.is_some());
}

#[test]
fn inverse_square_n3_chain() {
    let b = model_inverse_square(C64::new(0.2, 1.0), 3).unwrap();
    let f = &b.chains[0].functions;
    assert_eq!(f.len(), 2);
    for i in 0..2 {
        for j in 0..2 {
            assert!(binorm(&f[i], &f[j]).norm() < 1e-8);
        }
    }
    assert!(b.validation.chain < 1e-9);
    assert!(b.notes.iter().any(|n| n.contains("not supported")));
    assert!(matches!(model_inverse_square(C64::new(0.0, 1.0), 7), Err(Error::ParameterDomain(_))));
}

#[test]
fn double_factorials_exact() {
    assert_eq!(double_factorial(-1), 1);
    assert_eq!(double_factorial(0), 1);
    assert_eq!(double_factorial(5), 15);
    assert_eq!(double_factorial(6), 48);
    assert_eq!(double_factorial(11), 10395);
}

fn mu() -> Expr {
    Expr::param("mu", ZERO)
}

fn free_level(s: f64, norm: Option<Expr>) -> (Expr, Expr) {
    let a = Expr::one().add(&mu().scale_re(s));
    let f = Expr::x().mul(&a).cosh();
    let f = match norm {
        Some(n) => n.mul(&f),
        None => f,
    };
    (f, a.powi(2).neg())
}

fn triple(scales: [f64; 3], first_norm: Expr) -> CoalescenceFamily {
    let (f1, l1) = free_level(scales[0], Some(first_norm));
    let (f2, l2) = free_level(scales[1], None);
    let (f3, l3) = free_level(scales[2], None);
    CoalescenceFamily {
        kind: CoalescenceKind::Triple,
        param: "mu".into(),
        mu0: 0.0,
        potential: Expr::zero(),
        functions: vec![f1, f2, f3],
        eigenvalues: vec![l1, l2, l3],
    }
}

#[test]
fn triple_coalescence() {
    let g = GridSpec::new(-3.0, 3.0, 61).unwrap();
    let r = coalesce(&triple([1.0, 2.0, 3.0], mu().exp()), &g, 1e-8).unwrap();
    assert_eq!(r.chain.len(), 3);
    assert!(r.residual < 1e-8, "{}", r.residual);
    let k: C64 = r.kappa.into();
    assert!((k + 1.0).norm() < 1e-10, "{k}");
}

#[test]
fn triple_kappa_mismatch_and_degenerate() {
    let g = GridSpec::new(-3.0, 3.0, 61).unwrap();
    // an x-dependent normalization cannot be absorbed by a constant
    let norm = Expr::one().add(&mu().mul(&Expr::x().sub(&Expr::constant(z05()))));
    assert!(matches!(
        coalesce(&triple([1.0, 2.0, 3.0], norm), &g, 1e-8),
        Err(Error::KappaMismatch { .. })
    ));
    assert!(matches!(
        coalesce(&triple([1.0, 1.0, 3.0], Expr::one()), &g, 1e-8),
        Err(Error::ParameterDomain(_))
    ));
}

#[test]
fn mixed_coalescence() {
    let a = Expr::one().add(&mu());
    let ax = Expr::x().mul(&a);
    let p10 = ax.cosh();
    let p11 = Expr::x().mul(&ax.sinh()).div(&a.scale_re(-2.0));
    let (p2, l2) = free_level(2.0, Some(mu().exp()));
    let fam = CoalescenceFamily {
        kind: CoalescenceKind::Mixed,
        param: "mu".into(),
        mu0: 0.0,
        potential: Expr::zero(),
        functions: vec![p10, p11, p2],
        eigenvalues: vec![a.powi(2).neg(), l2],
    };
    let g = GridSpec::new(-3.0, 3.0, 61).unwrap();
    let r = coalesce(&fam, &g, 1e-8).unwrap();
    assert!(r.residual < 1e-8, "{}", r.residual);
    let k: C64 = r.kappa.into();
    assert!((k + 1.0).norm() < 1e-10, "{k}");
}

#[test]
fn custom_model_matches_single() {
    let ch = Expr::x().cosh();
    let spec = CustomModel {
        source_potential: Expr::zero(),
        kernel: vec![crate::darboux::BasisEntry {
            expr: ch.clone(),
            lambda: C64::new(-1.0, 0.0),
            chain_position: 0,
        }],
        grid: None,
    };
    let b = model_custom(&spec).unwrap();
    let s = model_single(1.0, 0.0).unwrap();
    let r = relative_residual(&b.h_minus.potential, &s.h_minus.potential, &s.grid).unwrap();
    assert!(r < 1e-10);
}

#[test]
fn roi_rank2_gaussian() {
    let b = model_rank2(1.0, 0.0, z05()).unwrap();
    let f = Expr::x().powi(2).neg().exp();
    let spec = RoiSpec {
        grid: GridSpec::new(-3.0, 3.0, 13).unwrap(),
        ..RoiSpec::default()
    };
    let r = resolution_of_identity(&b, &[("gauss".into(), f)], RoiVariant::Discrete, &spec).unwrap();
    let t = &r.results[0];
    assert!(t.extrapolated_residual < 1e-4, "{t:?}");
    assert!(t.discrete_part > 1e-3);
    assert!(!t.class_mismatch);
}

#[test]
fn roi_threshold_variants() {
    let b = model_inverse_square(C64::new(0.0, 1.0), 1).unwrap();
    let p = b.threshold_state.clone().unwrap();
    let spec = RoiSpec {
        grid: GridSpec::new(-4.0, 4.0, 9).unwrap(),
        ..RoiSpec::default()
    };
    let tests = [("psi0".to_string(), p.clone())];
    let reg = resolution_of_identity(&b, &tests, RoiVariant::ThresholdRegularized, &spec).unwrap();
    let t = &reg.results[0];
    assert!(t.extrapolated_residual < 1e-3, "{t:?}");
    assert!(t.monotone);
    let plain = resolution_of_identity(&b, &tests, RoiVariant::ThresholdPlain, &spec).unwrap();
    let t = &plain.results[0];
    assert!(t.class_mismatch);
    assert!(t.extrapolated_residual > 0.5 * t.norm, "{t:?}");
    let strict = RoiSpec {
        strict_class: true,
        ..spec.clone()
    };
    assert!(matches!(
        resolution_of_identity(&b, &tests, RoiVariant::ThresholdPlain, &strict),
        Err(Error::ClassMismatch { .. })
    ));
    assert!(matches!(
        resolution_of_identity(&b, &tests, RoiVariant::Discrete, &spec),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn spectral_form_and_weak_orthonormality() {
    let b = model_rank2(1.0, 0.0, z05()).unwrap();
    let f = Expr::x().powi(2).neg().exp();
    let spec = RoiSpec {
        grid: GridSpec::new(-2.0, 2.0, 5).unwrap(),
        k_window: 90.0,
        ..RoiSpec::default()
    };
    let s = spectral_decomposition_check(&b, &f, &spec).unwrap();
    assert!(s.residual < 1e-4 * (1.0 + s.norm), "{s:?}");
    assert!(s.k_error < 1e-4 * (1.0 + s.norm), "{s:?}");
    let w = weak_orthonormality(&b, &[0.0, 0.5, 1.7]).unwrap();
    assert!(w.max_error < 1e-4, "{w:?}");
}

#[test]
fn bundle_invariants_on_construction() {
    let bundles = [
        model_rank2(1.0, 0.0, z05()).unwrap(),
        model_two_level(C64::new(1.0, 0.0), 0.3, 0.0, z05()).unwrap(),
        model_single(0.7, 0.4).unwrap(),
        model_inverse_square(C64::new(0.0, 1.0), 2).unwrap(),
    ];
    for b in &bundles {
        let v = b.validation;
        assert!(v.intertwining < INTERTWINING_TOL);
        assert!(v.kernel_minus_annihilation < ANNIHILATION_TOL);
        assert!(v.kernel_plus_annihilation < ANNIHILATION_TOL);
        assert!(v.chain < CHAIN_TOL);
        let xs = b.grid.points();
        assert!(sample(&b.h_minus.potential, &xs).unwrap().iter().all(|c| c.re.is_finite()));
    }
}
