//! Integrals of complex products over the real line, binorms, continuum
//! overlaps and normalizability classification.

mod classify;
mod gk;

pub use classify::{
    classify, classify_both, classify_chain, classify_tape, decay_exponents, NormClass, ProbeSpec,
    Side, SideClass,
};
pub use gk::{integrate, Estimate};

use crate::complex::{ComplexScalar, C64, I, ZERO};
use crate::error::{Error, Result};
use crate::extrapolate::neville_zero;
use crate::funcalc::{Expr, Tape};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_levels: usize,
    /// Inner window half-width; `None` picks 8.
    pub window: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_levels: 15,
            window: None,
        }
    }
}

impl QuadratureSpec {
    pub fn base_window(&self) -> f64 {
        self.window.unwrap_or(8.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Integral {
    #[serde(with = "crate::complex::as_object")]
    pub value: C64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug)]
enum Tail {
    /// integrand negligible beyond `edge`
    Truncate { bound: f64 },
    /// algebraic decay, x = L + (1-t)/t
    Mapped,
    /// algebraic decay under e^{iωx}, integration by parts
    Asymptotic,
}

fn envelope(t: &Tape, s: f64, lo: f64, hi: f64, n: usize) -> Result<f64> {
    let mut m: f64 = 0.0;
    for j in 0..n {
        let x = lo + (hi - lo) * (j as f64 + 0.5) / n as f64;
        let v = t.value(s * x)?.norm();
        if !v.is_finite() {
            return Ok(f64::INFINITY);
        }
        m = m.max(v);
    }
    Ok(m)
}

fn tail_plan(t: &Tape, side: Side, omega: f64, spec: &QuadratureSpec) -> Result<(Tail, f64)> {
    let r0 = spec.base_window();
    let probe = ProbeSpec {
        r0,
        ..ProbeSpec::default()
    };
    let p = *decay_exponents(t, side, &probe)?
        .last()
        .unwrap_or(&f64::NEG_INFINITY);
    let s = side.sign();
    if p.is_nan() || p <= 0.0 {
        return Err(Error::NonIntegrable {
            side: side.label().into(),
            exponent: p,
        });
    }
    if p >= 8.0 {
        let mut x = r0;
        let limit = 64.0 * r0;
        loop {
            let env = envelope(t, s, x, 1.25 * x, 16)?;
            let bound = env * x / p.min(x).max(1.0);
            if bound < 1e-2 * spec.abs_tol || x >= limit || !env.is_finite() {
                let bound = if env.is_finite() { bound } else { f64::INFINITY };
                return Ok((Tail::Truncate { bound }, x));
            }
            x *= 1.25;
        }
    }
    if omega == 0.0 {
        if p < 1.2 {
            return Err(Error::TailUnbounded {
                side: side.label().into(),
                exponent: p,
            });
        }
        return Ok((Tail::Mapped, r0));
    }
    Ok((Tail::Asymptotic, r0.max(40.0 / omega.abs())))
}

/// `∫_L^∞ g e^{iωx}` (side +) or `∫_{-∞}^{-L}` (side -) by integration by parts.
fn asymptotic_tail(t: &Tape, side: Side, omega: f64, l: f64) -> Result<Integral> {
    const TERMS: usize = 24;
    let x = side.sign() * l;
    let d = t.eval(x, TERMS)?;
    let iw = I * omega;
    let phase = (I * omega * x).exp();
    let mut sum = ZERO;
    let mut prev = f64::INFINITY;
    let mut err = f64::INFINITY;
    let mut pow = iw;
    for (n, dn) in d.iter().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = dn * sign / pow;
        let m = term.norm();
        if m > prev {
            break;
        }
        sum += term;
        err = m;
        prev = m;
        pow *= iw;
        if m <= 1e-17 * sum.norm() {
            break;
        }
    }
    let value = match side {
        Side::Plus => -phase * sum,
        Side::Minus => phase * sum,
    };
    Ok(Integral { value, error: err })
}

fn mapped_tail(t: &Tape, side: Side, l: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let s = side.sign();
    let f = |u: f64| -> Result<Vec<C64>> {
        let x = s * (l + (1.0 - u) / u);
        Ok(vec![t.value(x)? / (u * u)])
    };
    let e = integrate(&f, 0.0, 1.0, 1, 4, spec, false)?;
    Ok(Integral {
        value: e.value[0],
        error: e.error,
    })
}

/// `∫_ℝ g(x) e^{iωx} dx` for a non-oscillatory amplitude `g`.
pub fn oscillatory_integral(g: &Expr, omega: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let t = Tape::new(g);
    let (plus, lp) = tail_plan(&t, Side::Plus, omega, spec)?;
    let (minus, lm) = tail_plan(&t, Side::Minus, omega, spec)?;
    let mut scale = 1.0;
    for attempt in 0..4 {
        let b = lp * scale_for(plus, scale);
        let a = -lm * scale_for(minus, scale);
        let core = core_integral(&t, a, b, omega, spec)?;
        let mut value = core.value;
        let mut error = core.error;
        for (tail, side, edge) in [(plus, Side::Plus, b), (minus, Side::Minus, -a)] {
            let part = match tail {
                Tail::Truncate { bound, .. } => Integral { value: ZERO, error: bound },
                Tail::Mapped => mapped_tail(&t, side, edge, spec)?,
                Tail::Asymptotic => asymptotic_tail(&t, side, omega, edge)?,
            };
            value += part.value;
            error += part.error;
        }
        let target = spec.abs_tol.max(spec.rel_tol * value.norm());
        let asym = matches!(plus, Tail::Asymptotic) || matches!(minus, Tail::Asymptotic);
        if error <= 10.0 * target || !asym {
            return Ok(Integral { value, error });
        }
        if attempt == 3 {
            return Err(Error::SlowConvergence { achieved: error });
        }
        scale *= 2.0;
    }
    unreachable!()
}

fn scale_for(t: Tail, scale: f64) -> f64 {
    match t {
        Tail::Asymptotic => scale,
        _ => 1.0,
    }
}

fn core_integral(t: &Tape, a: f64, b: f64, omega: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let h0 = if omega != 0.0 {
        2.0f64.min(2.0 * std::f64::consts::PI / omega.abs())
    } else {
        2.0
    };
    let n_init = (((b - a) / h0).ceil() as usize).clamp(1, 4000);
    let f = |x: f64| -> Result<Vec<C64>> {
        let v = t.value(x)?;
        Ok(vec![if omega == 0.0 { v } else { v * (I * omega * x).exp() }])
    };
    let e = integrate(&f, a, b, 1, n_init, spec, false)?;
    Ok(Integral {
        value: e.value[0],
        error: e.error,
    })
}

/// `∫ f g dx` (unconjugated).
pub fn binorm_integral(f: &Expr, g: &Expr, spec: &QuadratureSpec) -> Result<Integral> {
    oscillatory_integral(&f.mul(g), 0.0, spec)
}

/// Continuum eigenfunctions `ψ(x;k) = N(k) A(x;k) e^{ikx}`; `A` carries parameter `k`.
#[derive(Clone)]
pub struct ContinuumFamily {
    pub amplitude: Expr,
    pub param: String,
    prefactor: Arc<dyn Fn(C64) -> C64 + Send + Sync>,
}

impl fmt::Debug for ContinuumFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuumFamily")
            .field("amplitude", &self.amplitude)
            .field("param", &self.param)
            .finish()
    }
}

impl ContinuumFamily {
    pub fn new(amplitude: Expr, param: &str, prefactor: Arc<dyn Fn(C64) -> C64 + Send + Sync>) -> Self {
        ContinuumFamily {
            amplitude,
            param: param.to_string(),
            prefactor,
        }
    }

    pub fn prefactor(&self, k: C64) -> C64 {
        (self.prefactor)(k)
    }

    /// `N(k) A(x;k)` with `k` substituted (still a parameter node).
    pub fn amplitude_at(&self, k: C64) -> Expr {
        self.amplitude.with_param(&self.param, k).scale(self.prefactor(k))
    }

    /// `ψ(x;k)` as an expression.
    pub fn psi_at(&self, k: C64) -> Expr {
        self.amplitude_at(k).mul(&Expr::x().scale(I * k).exp())
    }

    /// Pointwise `ψ(x;k)` from a compiled amplitude tape.
    pub fn eval(&self, tape: &Tape, x: f64, k: C64) -> Result<C64> {
        let a = tape.eval_with(x, 0, &[(self.param.as_str(), k)])?[0];
        Ok(a * self.prefactor(k) * (I * k * x).exp())
    }
}

/// `∫ f(x) ψ(x;k) dx`.
pub fn continuum_overlap(f: &Expr, family: &ContinuumFamily, k: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let g = f.mul(&family.amplitude_at(C64::new(k, 0.0)));
    oscillatory_integral(&g, k, spec)
}

/// Same overlap through Gaussian damping `e^{-δx²}` extrapolated to `δ = 0`.
pub fn continuum_overlap_damped(
    f: &Expr,
    family: &ContinuumFamily,
    k: f64,
    deltas: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let amp = family.amplitude_at(C64::new(k, 0.0));
    let mut vals = Vec::with_capacity(deltas.len());
    let mut err: f64 = 0.0;
    for &d in deltas {
        let damp = Expr::x().powi(2).scale_re(-d).exp();
        let g = f.mul(&amp).mul(&damp);
        let t = Tape::new(&g);
        let l = (40.0 / d).sqrt().max(spec.base_window());
        let r = core_integral(&t, -l, l, k, spec)?;
        err = err.max(r.error);
        vals.push(r.value);
    }
    let e = neville_zero(deltas, &vals);
    Ok(Integral {
        value: e.value,
        error: err + e.spread,
    })
}

/// `B_ij = ∫ψ_i ψ_j` with error estimates and the pattern checks of a chain.
#[derive(Clone, Debug, Serialize)]
pub struct BinormMatrix {
    pub entries: Vec<Vec<ComplexScalar>>,
    pub errors: Vec<Vec<f64>>,
    /// max |B_ij| over i + j <= p - 2
    pub vanishing_max: f64,
    /// max |B_{i,p-1-i} - B_{0,p-1}|
    pub antidiagonal_spread: f64,
    /// max |B_ij - B_ji|
    pub asymmetry: f64,
}

impl BinormMatrix {
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i][j].into()
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Entries below the anti-diagonal vanish and the anti-diagonal is constant.
    pub fn pattern_holds(&self, tol: f64) -> bool {
        self.vanishing_max <= tol && self.antidiagonal_spread <= tol
    }
}

pub fn biorthogonality_matrix(funcs: &[Expr], spec: &QuadratureSpec) -> Result<BinormMatrix> {
    let p = funcs.len();
    let mut vals = vec![vec![ZERO; p]; p];
    let mut errs = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            let r = binorm_integral(&funcs[i], &funcs[j], spec)?;
            vals[i][j] = r.value;
            errs[i][j] = r.error;
        }
    }
    let mut vanishing: f64 = 0.0;
    let mut spread: f64 = 0.0;
    let mut asym: f64 = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i + j + 2 <= p {
                vanishing = vanishing.max(vals[i][j].norm());
            }
            if i + j + 1 == p {
                spread = spread.max((vals[i][j] - vals[0][p - 1]).norm());
            }
            asym = asym.max((vals[i][j] - vals[j][i]).norm());
        }
    }
    Ok(BinormMatrix {
        entries: vals
            .iter()
            .map(|r| r.iter().map(|&c| c.into()).collect())
            .collect(),
        errors: errs,
        vanishing_max: vanishing,
        antidiagonal_spread: spread,
        asymmetry: asym,
    })
}
