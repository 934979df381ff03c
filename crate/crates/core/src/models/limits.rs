use super::{
    model_rank2, rank2_kernel_minus, two_level_constants, two_level_kernel, two_level_w,
    ModelBundle, ModelKind,
};
use crate::complex::{C64, I, ONE};
use crate::error::{Error, Result};
use crate::extrapolate::neville_zero;
use crate::funcalc::{Expr, Tape};
use crate::operators::{relative_residual, GridSpec, JordanChain};
use serde::Serialize;
use std::f64::consts::PI;

/// An extrapolated limit compared with its closed form on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct LimitCheck {
    pub label: String,
    /// Offsets from the limit point used for extrapolation.
    pub offsets: Vec<f64>,
    /// `max |extrapolated - expected| / (1 + |expected|)`.
    pub error: f64,
    /// Largest change when the coarsest offset is dropped.
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub checks: Vec<LimitCheck>,
}

impl LimitReport {
    pub fn worst(&self) -> f64 {
        self.checks.iter().map(|c| c.error).fold(0.0, f64::max)
    }
}

/// Evaluate `sample(x, j)` (offset `hs[j]`) on a grid for every offset and extrapolate pointwise to `h = 0`.
fn extrapolate_on_grid<F>(xs: &[f64], hs: &[f64], sample: F) -> Result<(Vec<C64>, f64)>
where
    F: Fn(f64, usize) -> Result<C64>,
{
    let mut out = Vec::with_capacity(xs.len());
    let mut spread: f64 = 0.0;
    for &x in xs {
        let vals: Vec<C64> = (0..hs.len()).map(|j| sample(x, j)).collect::<Result<_>>()?;
        let e = neville_zero(hs, &vals);
        spread = spread.max(e.spread / (1.0 + e.value.norm()));
        out.push(e.value);
    }
    Ok((out, spread))
}

fn compare(label: &str, xs: &[f64], got: &[C64], expected: &Expr, hs: &[f64], spread: f64) -> Result<LimitCheck> {
    let t = Tape::new(expected);
    let mut err: f64 = 0.0;
    for (x, g) in xs.iter().zip(got) {
        let e = t.value(*x)?;
        err = err.max((g - e).norm() / (1.0 + e.norm()));
    }
    Ok(LimitCheck {
        label: label.to_string(),
        offsets: hs.to_vec(),
        error: err,
        spread,
    })
}

fn limit_grid(bundle: &ModelBundle) -> Vec<f64> {
    let g = bundle.grid;
    GridSpec::new(g.x_min / 2.0, g.x_max / 2.0, 121)
        .map(|g| g.points())
        .unwrap_or_default()
}

/// Bound states recovered from the continuum family by analytic continuation in `k`.
pub fn continuation_limits(bundle: &ModelBundle) -> Result<LimitReport> {
    let fam = bundle
        .continuum
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no continuum family", bundle.name)))?;
    let xs = limit_grid(bundle);
    let hs: Vec<f64> = (3..=6).map(|m| 10f64.powi(-m)).collect();
    let amp = Tape::new(&fam.amplitude);
    let kname = fam.param.as_str();
    // amplitude times e^{ikx}, without the k-dependent normalization
    let bare = |x: f64, k: C64| -> Result<C64> {
        Ok(amp.eval_with(x, 0, &[(kname, k)])?[0] * (I * k * x).exp())
    };
    let s2pi = (2.0 * PI).sqrt();
    let mut checks = Vec::new();
    match bundle.kind {
        ModelKind::Rank2 { alpha, x0, z } => {
            let phi0 = &bundle.chains[0].functions[0];
            let phi1 = &bundle.chains[0].functions[1];
            // (k²+α²)ψ(x;k) as an expression in the parameter k
            let k = Expr::param(kname, ONE);
            let f = fam
                .amplitude
                .mul(&k.powi(2).add(&Expr::real(alpha * alpha)))
                .mul(&Expr::x().mul(&k).scale(I).exp())
                .scale_re(1.0 / s2pi);
            let df = f.param_derivative(kname)?;
            let tf = Tape::new(&f);
            let tdf = Tape::new(&df);
            for s in [1.0, -1.0] {
                let k0 = I * alpha * s;
                let c = -s * (alpha / PI).sqrt() * (-s * alpha * x0).exp();
                let (got, spread) = extrapolate_on_grid(&xs, &hs, |x, j| {
                    Ok(tf.eval_with(x, 0, &[(kname, k0 * (1.0 - hs[j]))])?[0])
                })?;
                let expected = phi0.scale_re(c);
                checks.push(compare(&format!("(k^2+a^2)psi at k={}ia", s), &xs, &got, &expected, &hs, spread)?);
                let (got, spread) = extrapolate_on_grid(&xs, &hs, |x, j| {
                    let kk = k0 * (1.0 - hs[j]);
                    Ok(tdf.eval_with(x, 0, &[(kname, kk)])?[0] / (kk * 2.0))
                })?;
                let shift = (ONE - z * (2.0 * alpha * s)) / (4.0 * alpha * alpha);
                let expected = phi1.sub(&phi0.scale(shift)).scale_re(c);
                checks.push(compare(
                    &format!("(1/2k) d/dk (k^2+a^2)psi at k={}ia", s),
                    &xs,
                    &got,
                    &expected,
                    &hs,
                    spread,
                )?);
            }
        }
        ModelKind::TwoLevel { alpha, beta, x0, z } => {
            let psi_p = &bundle.chains[0].functions[0];
            let psi_m = &bundle.chains[1].functions[0];
            let sp = PI.sqrt();
            for s in [1.0, -1.0] {
                let k0 = I * (alpha + beta) * s;
                let (got, spread) =
                    extrapolate_on_grid(&xs, &hs, |x, j| Ok(bare(x, k0 * (1.0 - hs[j]))? / s2pi))?;
                let c = I * alpha * beta * 2.0 * s / sp
                    * (ONE / beta + ONE / alpha).sqrt()
                    * (-(alpha * x0 + z * beta) * s).exp();
                checks.push(compare(
                    &format!("f(k)psi at k={}i(a+b)", s),
                    &xs,
                    &got,
                    &psi_p.scale(c),
                    &hs,
                    spread,
                )?);
                let k0 = I * (alpha - beta) * s;
                let (got, spread) =
                    extrapolate_on_grid(&xs, &hs, |x, j| Ok(bare(x, k0 * (1.0 - hs[j]))? / s2pi))?;
                let c = -(alpha * beta * 2.0 * s) / sp
                    * (ONE / beta - ONE / alpha).sqrt()
                    * (-(alpha * x0 - z * beta) * s).exp();
                checks.push(compare(
                    &format!("f(k)psi at k={}i(a-b)", s),
                    &xs,
                    &got,
                    &psi_m.scale(c),
                    &hs,
                    spread,
                )?);
            }
        }
        ModelKind::InverseSquare { n: 1, .. } => {
            let psi0 = bundle.threshold_state.clone().expect("n = 1 carries psi0");
            let hs: Vec<f64> = (2..=5).map(|m| 10f64.powi(-m)).collect();
            let (got, spread) = extrapolate_on_grid(&xs, &hs, |x, j| {
                let k = C64::new(hs[j], 0.0);
                Ok(-s2pi * I * k * fam.prefactor(k) * bare(x, k)?)
            })?;
            checks.push(compare("-sqrt(2pi) ik psi at k=0", &xs, &got, &psi0, &hs, spread)?);
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "no continuation limits recorded for {}",
                bundle.name
            )))
        }
    }
    Ok(LimitReport { checks })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfluenceReport {
    /// `φ₀⁻, φ₁` at `β = 0` from the exact parameter derivative.
    pub chain: JordanChain,
    pub exact_route_error: f64,
    pub finite_difference_error: f64,
    pub finite_difference_spread: f64,
    /// Dyad limit against the rank-2 dyads at sample pairs.
    pub dyad_error: f64,
    pub dyad_spread: f64,
    pub phi0_plus_errors: [f64; 2],
    pub phi1_plus_error: f64,
    pub phi1_plus_spread: f64,
}

fn beta_family(alpha: f64, x0: f64, z: C64) -> (Expr, Expr) {
    let x = Expr::x();
    let b = Expr::param("beta", C64::new(0.0, 0.0));
    let a = Expr::real(alpha);
    let plus = x
        .mul(&a.add(&b))
        .sub(&Expr::real(alpha * x0).add(&b.scale(z)))
        .cosh();
    let minus = x
        .mul(&a.sub(&b))
        .sub(&Expr::real(alpha * x0).sub(&b.scale(z)))
        .cosh();
    (plus, minus)
}

/// `β ↓ 0` limits of the two-level model at fixed `α, x₀, z`.
pub fn confluence_limit(alpha: f64, x0: f64, z: C64, stability_tol: f64) -> Result<ConfluenceReport> {
    let rank2 = model_rank2(alpha, x0, z)?;
    let grid = rank2.grid;
    let (phi0m, phi1m) = rank2_kernel_minus(alpha, x0, z);
    let lambda = C64::new(-alpha * alpha, 0.0);
    let (plus, minus) = beta_family(alpha, x0, z);
    // ∂_β(λ₊ - λ₋) = -4α
    let dl = -4.0 * alpha;
    let exact = plus
        .sub(&minus)
        .param_derivative("beta")?
        .with_param("beta", C64::new(0.0, 0.0))
        .freeze_param("beta")
        .scale_re(1.0 / dl)
        .add(&phi0m.scale_re(0.25 / (alpha * alpha)));
    let exact_route_error = relative_residual(&exact, &phi1m, &grid)?;

    let xs = grid.points();
    let betas = [1e-2, 1e-3];
    let h2: Vec<f64> = betas.iter().map(|b| b * b).collect();
    let fd_exprs: Vec<Tape> = betas
        .iter()
        .map(|&b| {
            let (p, m) = two_level_kernel(C64::new(alpha, 0.0), b, x0, z);
            Tape::new(&p.sub(&m).scale_re(1.0 / (-4.0 * alpha * b)))
        })
        .collect();
    let shift = Tape::new(&phi0m.scale_re(0.25 / (alpha * alpha)));
    let (fd, fd_spread) = extrapolate_on_grid(&xs, &h2, |x, j| {
        Ok(fd_exprs[j].value(x)? + shift.value(x)?)
    })?;
    let fd_check = compare("finite difference", &xs, &fd, &phi1m, &h2, fd_spread)?;

    // normalized bound states; their dyad sum is even in β
    let dyad_betas = [0.04, 0.02, 0.01, 0.005];
    let bh2: Vec<f64> = dyad_betas.iter().map(|b| b * b).collect();
    let states: Vec<(Tape, Tape)> = dyad_betas
        .iter()
        .map(|&b| {
            let (php, phm) = two_level_kernel(C64::new(alpha, 0.0), b, x0, z);
            let w = two_level_w(C64::new(alpha, 0.0), b, x0, z);
            let (cp, cm) = two_level_constants(C64::new(alpha, 0.0), b);
            (Tape::new(&phm.div(&w).scale(cp)), Tape::new(&php.div(&w).scale(cm)))
        })
        .collect();
    let phi0p = Tape::new(&rank2.chains[0].functions[0]);
    let phi1p = Tape::new(&rank2.chains[0].functions[1]);
    let l = 0.5 * (grid.x_max - grid.x_min) / 4.0;
    let pairs: Vec<(f64, f64)> = (0..10)
        .map(|i| {
            let t = i as f64 / 9.0;
            (-l + 2.0 * l * t, l * (0.7 - 1.3 * t))
        })
        .collect();
    let (mut dyad_error, mut dyad_spread): (f64, f64) = (0.0, 0.0);
    for &(x, y) in &pairs {
        let vals: Vec<C64> = states
            .iter()
            .map(|(p, m)| Ok(p.value(x)? * p.value(y)? + m.value(x)? * m.value(y)?))
            .collect::<Result<_>>()?;
        let e = neville_zero(&bh2, &vals);
        let expected = phi0p.value(x)? * phi1p.value(y)? + phi1p.value(x)? * phi0p.value(y)?;
        dyad_error = dyad_error.max((e.value - expected).norm() / (1.0 + expected.norm()));
        dyad_spread = dyad_spread.max(e.spread / (1.0 + expected.norm()));
    }

    // √β ψ_{±β} → φ₀⁺ multiples, and √β(ψ₋ + iψ₊)/β → 2√α φ₁⁺
    let sa = alpha.sqrt();
    let mut phi0_errors = [0.0; 2];
    let mut g_vals: Vec<Vec<C64>> = vec![Vec::new(); xs.len()];
    let mut p_vals: Vec<Vec<C64>> = vec![Vec::new(); xs.len()];
    let mut m_vals: Vec<Vec<C64>> = vec![Vec::new(); xs.len()];
    for (j, (p, m)) in states.iter().enumerate() {
        let sb = dyad_betas[j].sqrt();
        for (i, &x) in xs.iter().enumerate() {
            let vp = p.value(x)? * sb;
            let vm = m.value(x)? * sb;
            p_vals[i].push(vp * C64::new(0.0, -2.0 * sa));
            m_vals[i].push(vm * (2.0 * sa));
            g_vals[i].push((vm + I * vp) / dyad_betas[j]);
        }
    }
    let t0 = Tape::new(&rank2.chains[0].functions[0]);
    let t1 = Tape::new(&rank2.chains[0].functions[1]);
    let (mut phi1_error, mut phi1_spread): (f64, f64) = (0.0, 0.0);
    let hs: Vec<f64> = dyad_betas.to_vec();
    for (i, &x) in xs.iter().enumerate() {
        let e0 = t0.value(x)?;
        let e1 = t1.value(x)?;
        // √β ψ_{±β} is analytic in β, not even
        let a = neville_zero(&hs, &p_vals[i]);
        let b = neville_zero(&hs, &m_vals[i]);
        phi0_errors[0] = f64::max(phi0_errors[0], (a.value - e0).norm() / (1.0 + e0.norm()));
        phi0_errors[1] = f64::max(phi0_errors[1], (b.value - e0).norm() / (1.0 + e0.norm()));
        let g = neville_zero(&bh2, &g_vals[i]);
        let v = g.value / (2.0 * sa);
        phi1_error = phi1_error.max((v - e1).norm() / (1.0 + e1.norm()));
        phi1_spread = phi1_spread.max(g.spread / (2.0 * sa) / (1.0 + e1.norm()));
    }
    let spread = fd_spread.max(dyad_spread).max(phi1_spread);
    if spread > stability_tol {
        return Err(Error::ExtrapolationUnstable { spread });
    }
    Ok(ConfluenceReport {
        chain: JordanChain::new(lambda, vec![phi0m, exact]),
        exact_route_error,
        finite_difference_error: fd_check.error,
        finite_difference_spread: fd_spread,
        dyad_error,
        dyad_spread,
        phi0_plus_errors: phi0_errors,
        phi1_plus_error: phi1_error,
        phi1_plus_spread: phi1_spread,
    })
}
