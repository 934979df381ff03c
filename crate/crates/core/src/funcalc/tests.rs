use super::*;
use crate::complex::{C64, I};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Five-point central difference.
fn fd(f: &Expr, x: f64, h: f64) -> C64 {
    let t = Tape::new(f);
    let v = |s: f64| t.value(x + s * h).unwrap();
    (v(-2.0) - v(-1.0) * 8.0 + v(1.0) * 8.0 - v(2.0)) / (12.0 * h)
}

#[test]
fn sinh_at_zero() {
    let f = (Expr::x() * 2.0).sinh();
    let v = f.eval(0.0, 1).unwrap();
    assert_eq!(v.len(), 2);
    assert!(v[0].norm() < 1e-15);
    assert!((v[1] - c(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn wronskian_like_value_at_x0() {
    let (alpha, x0, z) = (0.8, 0.3, c(0.1, 0.5));
    let u = Expr::x() - x0;
    let w = (u.clone() * (2.0 * alpha)).sinh() + (Expr::x() - z) * (2.0 * alpha);
    let v = w.eval(x0, 0).unwrap()[0];
    assert!((v - (c(x0, 0.0) - z) * (2.0 * alpha)).norm() < 1e-14);
}

#[test]
fn tanh_times_phase_matches_finite_differences() {
    let f = Expr::x().tanh() * (Expr::x() * I).exp();
    let x = 0.7;
    let d = f.eval(x, 3).unwrap();
    let h = 1e-4;
    let g1 = f.derivative();
    let g2 = g1.derivative();
    let g3 = g2.derivative();
    for (k, g) in [(1, &f), (2, &g1), (3, &g2)] {
        let approx = fd(g, x, h);
        assert!((approx - d[k]).norm() <= 1e-6 * d[k].norm().max(1.0), "order {k}");
    }
    assert!((g3.value(x).unwrap() - d[3]).norm() < 1e-12);
}

#[test]
fn derivative_examples() {
    assert!(Expr::constant(c(3.0, 1.0)).derivative().is_zero());
    let alpha = 1.3;
    let f = (Expr::x() * (2.0 * alpha)).sinh();
    let expected = (Expr::x() * (2.0 * alpha)).cosh() * (2.0 * alpha);
    assert!(numerically_equal(&f.derivative(), &expected, -3.0, 3.0).unwrap());
}

#[test]
fn param_derivative_examples() {
    let beta = Expr::param("beta", c(0.4, 0.0));
    let f = (beta.clone() * Expr::x()).exp();
    let d = f.param_derivative("beta").unwrap();
    assert!(numerically_equal(&d, &(Expr::x() * &f), -2.0, 2.0).unwrap());

    assert!(matches!(
        Expr::x().sin().param_derivative("beta"),
        Err(Error::UnknownParameter(_))
    ));
    let g = Expr::x().sin() + Expr::param("a", c(1.0, 0.0)) * 0.0;
    assert!(g.param_derivative("a").is_err(), "folded away parameter is absent");
}

#[test]
fn param_derivative_confluent_cosh() {
    // d/dbeta cosh((a+b)(x - xi)) at b = 0 against a difference quotient in b
    let (a, xi) = (1.0, 0.4);
    let b = Expr::param("b", c(0.0, 0.0));
    let f = ((b.clone() + a) * (Expr::x() - xi)).cosh();
    let d = f.param_derivative("b").unwrap();
    let closed = (Expr::x() - xi) * ((Expr::x() - xi) * a).sinh();
    assert!(numerically_equal(&d, &closed, -3.0, 3.0).unwrap());
    let t = Tape::new(&f);
    let h = 1e-5;
    for x in [-1.0, 0.2, 2.5] {
        let q = (t.eval_with(x, 0, &[("b", c(h, 0.0))]).unwrap()[0]
            - t.eval_with(x, 0, &[("b", c(-h, 0.0))]).unwrap()[0])
            / (2.0 * h);
        assert!((q - d.value(x).unwrap()).norm() < 1e-8);
    }
}

#[test]
fn pole_is_reported() {
    let f = Expr::one() / (Expr::x() - 1.0);
    match f.value(1.0) {
        Err(Error::PoleProximity { x, .. }) => assert_eq!(x, 1.0),
        other => panic!("expected pole, got {other:?}"),
    }
    let g = (Expr::x() - 1.0).powi(-2);
    assert!(matches!(g.value(1.0), Err(Error::PoleProximity { .. })));
    assert!(g.value(1.0 + 1e-6).is_ok());
}

#[test]
fn powi_negative_jets() {
    let z = c(0.0, 1.0);
    let f = (Expr::x() - z).powi(-3);
    let x = 0.37;
    let d = f.eval(x, 4).unwrap();
    let u = c(x, 0.0) - z;
    let exact = [
        u.powi(-3),
        u.powi(-4) * -3.0,
        u.powi(-5) * 12.0,
        u.powi(-6) * -60.0,
        u.powi(-7) * 360.0,
    ];
    for k in 0..5 {
        assert!((d[k] - exact[k]).norm() < 1e-12 * exact[k].norm(), "k={k}");
    }
}

#[test]
fn affine_reflection_and_shift() {
    let f = Expr::x().sin() * Expr::x().exp();
    let r = f.reflect();
    let s = f.affine(2.0, -0.5);
    for x in [-0.8, 0.1, 1.7] {
        assert!((r.value(x).unwrap() - f.value(-x).unwrap()).norm() < 1e-15);
        assert!((s.value(x).unwrap() - f.value(2.0 * x - 0.5).unwrap()).norm() < 1e-15);
        let ds = s.eval(x, 2).unwrap();
        let df = f.eval(2.0 * x - 0.5, 2).unwrap();
        assert!((ds[2] - df[2] * 4.0).norm() < 1e-12);
    }
    let composed = f.compose(&(Expr::x() * 2.0 - 0.5));
    assert!(numerically_equal(&composed, &s, -2.0, 2.0).unwrap());
}

#[test]
fn json_round_trip() {
    let f = (Expr::param("alpha", c(1.0, 0.0)) * (Expr::x() - 0.5)).cosh().powi(-2)
        * (Expr::x() * I).exp().affine(-1.0, 0.25);
    let s = serde_json::to_string(&f).unwrap();
    let g: Expr = serde_json::from_str(&s).unwrap();
    assert!(numerically_equal(&f, &g, -4.0, 4.0).unwrap());
    assert!(g.contains_param("alpha"));
    let bad = r#"{"kind":"mul","children":[{"kind":"var"}]}"#;
    assert!(serde_json::from_str::<Expr>(bad).is_err());
    let unknown = r#"{"kind":"log","children":[{"kind":"var"}]}"#;
    assert!(serde_json::from_str::<Expr>(unknown).is_err());
}

#[test]
fn derivative_is_cached_and_shared() {
    let f = (Expr::x().sinh() / Expr::x().cosh()).exp();
    let a = f.derivative();
    let b = f.derivative();
    assert!(a.ptr_eq(&b));
    assert!(f.nth_derivative(4).node_count() < 400);
}

#[test]
fn with_param_and_freeze() {
    let b = Expr::param("b", c(0.5, 0.0));
    let f = (b.clone() * Expr::x()).sinh() / b;
    let g = f.with_param("b", c(0.25, 0.0));
    assert!((g.value(1.0).unwrap() - c(0.25f64.sinh() / 0.25, 0.0)).norm() < 1e-14);
    assert!(g.contains_param("b"));
    let h = f.freeze_param("b");
    assert!(!h.contains_param("b"));
    assert_eq!(f.params(), vec![("b".to_string(), c(0.5, 0.0))]);
}

#[derive(Debug, Clone)]
enum Shape {
    X,
    C(f64, f64),
    P(f64),
    Add(Box<Shape>, Box<Shape>),
    Mul(Box<Shape>, Box<Shape>),
    Div(Box<Shape>, Box<Shape>),
    Neg(Box<Shape>),
    Pow(Box<Shape>, i32),
    Un(u8, Box<Shape>),
}

fn shape() -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        Just(Shape::X),
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Shape::C(a, b)),
        (-1.0..1.0f64).prop_map(Shape::P),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Add(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Mul(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Div(a.into(), b.into())),
            inner.clone().prop_map(|a| Shape::Neg(a.into())),
            (inner.clone(), -3..4i32).prop_map(|(a, n)| Shape::Pow(a.into(), n)),
            (0u8..6, inner).prop_map(|(k, a)| Shape::Un(k, a.into())),
        ]
    })
}

fn build(s: &Shape) -> Expr {
    match s {
        Shape::X => Expr::x(),
        Shape::C(a, b) => Expr::constant(c(*a, *b)),
        Shape::P(v) => Expr::param("p", c(*v, 0.3)),
        Shape::Add(a, b) => build(a) + build(b),
        Shape::Mul(a, b) => build(a) * build(b),
        // keep denominators away from zero on the sample interval
        Shape::Div(a, b) => build(a) / (build(b).powi(2) + 2.0),
        Shape::Neg(a) => -build(a),
        Shape::Pow(a, n) if *n < 0 => (build(a).powi(2) + 1.5).powi(*n),
        Shape::Pow(a, n) => build(a).powi(*n),
        Shape::Un(k, a) => {
            let a = build(a).scale_re(0.5);
            match k {
                0 => a.exp(),
                1 => a.sin(),
                2 => a.cos(),
                3 => a.sinh(),
                4 => a.cosh(),
                _ => a.tanh(),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivative_matches_first_jet_order(s in shape(), x in -1.0..1.0f64) {
        let f = build(&s);
        if let Ok(j) = f.eval(x, 1) {
            if j.iter().all(|v| v.norm() < 1e6) {
                let d = f.derivative().value(x).unwrap();
                prop_assert!((d - j[1]).norm() <= 1e-9 * (1.0 + j[1].norm()));
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences(s in shape(), x in -1.0..1.0f64) {
        let f = build(&s);
        if let Ok(j) = f.eval(x, 1) {
            if j.iter().all(|v| v.norm() < 1e4) {
                let approx = fd(&f, x, 1e-3);
                prop_assert!((approx - j[1]).norm() <= 1e-6 * (1.0 + j[1].norm()));
            }
        }
    }

    #[test]
    fn conjugation_commutes_with_eval(s in shape(), x in -1.0..1.0f64) {
        let f = build(&s);
        if let (Ok(v), Ok(w)) = (f.value(x), f.conj().value(x)) {
            if v.norm() < 1e6 {
                prop_assert!((w - v.conj()).norm() <= 1e-12 * (1.0 + v.norm()));
            }
        }
    }

    #[test]
    fn jets_of_derivatives_agree(s in shape(), x in -1.0..1.0f64) {
        let f = build(&s);
        if let Ok(j) = f.eval(x, 3) {
            if j.iter().all(|v| v.norm() < 1e6) {
                let d2 = f.derivative().derivative().eval(x, 1).unwrap();
                prop_assert!((d2[0] - j[2]).norm() <= 1e-8 * (1.0 + j[2].norm()));
                prop_assert!((d2[1] - j[3]).norm() <= 1e-8 * (1.0 + j[3].norm()));
            }
        }
    }
}
