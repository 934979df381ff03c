use super::{ModelBundle, ModelKind};
use crate::complex::{ComplexScalar, C64, I, ZERO};
use crate::error::{Error, Result};
use crate::extrapolate::neville_zero;
use crate::funcalc::{Expr, Tape};
use crate::operators::{sample, GridSpec};
use crate::quadrature::{
    classify_both, continuum_overlap, integrate, oscillatory_integral, ContinuumFamily, ProbeSpec,
    QuadratureSpec,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoiVariant {
    /// Continuum integral over all real `k` plus bound-state dyads.
    Discrete,
    /// Threshold form with the `-ψ₀ψ₀/(πε)` counterterm only.
    ThresholdPlain,
    /// Threshold form with the `[1 - 2 sin²(ε(x-x')/2)]` modified counterterm.
    ThresholdRegularized,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RoiSpec {
    /// Regulators, largest first.
    pub eps: Vec<f64>,
    pub k_window: f64,
    pub grid: GridSpec,
    /// Tolerances of the outer `k` integral.
    pub k_quad: QuadratureSpec,
    /// Tolerances of the inner `x` overlaps.
    pub x_quad: QuadratureSpec,
    /// Fail with `ClassMismatch` instead of flagging it.
    pub strict_class: bool,
}

impl Default for RoiSpec {
    fn default() -> Self {
        RoiSpec {
            eps: vec![0.1, 0.05, 0.025],
            k_window: 40.0,
            grid: GridSpec {
                x_min: -4.0,
                x_max: 4.0,
                n_points: 81,
            },
            k_quad: QuadratureSpec {
                abs_tol: 1e-7,
                rel_tol: 1e-7,
                max_levels: 12,
                window: None,
            },
            x_quad: QuadratureSpec::default(),
            strict_class: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TestFunctionResult {
    pub label: String,
    /// The test function lies outside the class the variant is proven for.
    pub class_mismatch: bool,
    /// `sup |reconstruction - f|` on the grid, one per regulator (or one in total).
    pub residuals: Vec<f64>,
    /// Residual of the pointwise `ε → 0` extrapolation.
    pub extrapolated_residual: f64,
    pub monotone: bool,
    /// `sup |f|` on the grid.
    pub norm: f64,
    /// Sup norms of the three contributions at the smallest regulator.
    pub continuum_part: f64,
    pub discrete_part: f64,
    pub regulator_part: f64,
    /// Quadrature error estimate of the `k` integral, including the truncated tail.
    pub k_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoiReport {
    pub variant: RoiVariant,
    pub eps: Vec<f64>,
    pub k_window: f64,
    pub results: Vec<TestFunctionResult>,
}

impl RoiReport {
    pub fn worst_residual(&self) -> f64 {
        self.results
            .iter()
            .map(|r| r.extrapolated_residual)
            .fold(0.0, f64::max)
    }
}

fn family(bundle: &ModelBundle) -> Result<&ContinuumFamily> {
    bundle
        .continuum
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no continuum family", bundle.name)))
}

/// `∫_a^b w(k) ψ(x_j;k) c(k) dk` for all grid points, `c(k) = ∫ψ(x';-k) f(x') dx'`.
fn continuum_segment<W>(
    fam: &ContinuumFamily,
    f: &Expr,
    xs: &[f64],
    (a, b): (f64, f64),
    weight: &W,
    spec: &RoiSpec,
) -> Result<(Vec<C64>, f64)>
where
    W: Fn(f64) -> C64 + Sync,
{
    let tape = Tape::new(&fam.amplitude);
    let integrand = |k: f64| -> Result<Vec<C64>> {
        let c = continuum_overlap(f, fam, -k, &spec.x_quad)?.value * weight(k);
        let kc = C64::new(k, 0.0);
        xs.iter().map(|&x| Ok(fam.eval(&tape, x, kc)? * c)).collect()
    };
    let n_init = ((b - a).abs().ceil() as usize).max(2);
    let e = integrate(&integrand, a, b, xs.len(), n_init, &spec.k_quad, true)?;
    Ok((e.value, e.error))
}

/// Tail beyond `|k| = K` from the decay rate between `0.9K` and `K`:
/// `|F(K)| / r` for `|F| ~ e^{-r|k|}`, which also covers algebraic decay.
fn tail_estimate<W>(fam: &ContinuumFamily, f: &Expr, xs: &[f64], weight: &W, spec: &RoiSpec) -> Result<f64>
where
    W: Fn(f64) -> C64 + Sync,
{
    let tape = Tape::new(&fam.amplitude);
    let kw = spec.k_window;
    let size = |k: f64| -> Result<f64> {
        let c = continuum_overlap(f, fam, -k, &spec.x_quad)?.value * weight(k);
        let mut m: f64 = 0.0;
        for &x in xs {
            m = m.max((fam.eval(&tape, x, C64::new(k, 0.0))? * c).norm());
        }
        Ok(m)
    };
    let mut total = 0.0;
    for s in [1.0, -1.0] {
        let (outer, inner) = (size(s * kw)?, size(s * 0.9 * kw)?);
        let rate = (inner / outer).ln() / (0.1 * kw);
        total += if rate.is_finite() && rate > 0.0 {
            outer / rate
        } else {
            outer * kw
        };
    }
    Ok(total)
}

/// Bound-state part: `Σ_chains Σ_i (μ ψ_i + ν ψ_{i-1})(x) ∫ψ_{p-1-i} f`.
fn discrete_part(bundle: &ModelBundle, f: &Expr, xs: &[f64], weighted: bool, q: &QuadratureSpec) -> Result<Vec<C64>> {
    let mut out = vec![ZERO; xs.len()];
    for ch in &bundle.chains {
        let p = ch.functions.len();
        let vals: Vec<Vec<C64>> = ch
            .functions
            .iter()
            .map(|g| sample(g, xs))
            .collect::<Result<_>>()?;
        for i in 0..p {
            let coef = crate::quadrature::binorm_integral(&ch.functions[p - 1 - i], f, q)?.value;
            for (j, o) in out.iter_mut().enumerate() {
                let mut v = vals[i][j];
                if weighted {
                    v *= ch.eigenvalue;
                    if i > 0 {
                        v += vals[i - 1][j];
                    }
                }
                *o += v * coef;
            }
        }
    }
    Ok(out)
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn class_ok(f: &Expr, variant: RoiVariant) -> Result<bool> {
    let c = classify_both(f, &ProbeSpec::default())?;
    let p = c.plus.exponents[c.plus.exponents.len() - 1].min(c.minus.exponents[c.minus.exponents.len() - 1]);
    Ok(match variant {
        // weighted class |x|^γ, γ > 1: decay faster than 1/|x|
        RoiVariant::ThresholdPlain => p > 1.1,
        _ => c.whole_axis(),
    })
}

/// Reconstruct each test function from the eigenfunction expansion of `h⁻`.
pub fn resolution_of_identity(
    bundle: &ModelBundle,
    tests: &[(String, Expr)],
    variant: RoiVariant,
    spec: &RoiSpec,
) -> Result<RoiReport> {
    let fam = family(bundle)?;
    let threshold = matches!(bundle.kind, ModelKind::InverseSquare { .. });
    if let ModelKind::InverseSquare { n, .. } = bundle.kind {
        if n != 1 {
            return Err(Error::InvalidInput(
                "resolution of identity is only implemented for n = 1".into(),
            ));
        }
    }
    match (threshold, variant) {
        (true, RoiVariant::Discrete) => {
            return Err(Error::InvalidInput(
                "the continuum is singular at k = 0; use a threshold variant".into(),
            ))
        }
        (false, RoiVariant::ThresholdPlain | RoiVariant::ThresholdRegularized) => {
            return Err(Error::InvalidInput(format!(
                "{} has no threshold state; use the discrete variant",
                bundle.name
            )))
        }
        _ => {}
    }
    let mut eps = spec.eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    if threshold && (eps.is_empty() || eps.iter().any(|&e| !(e > 0.0))) {
        return Err(Error::InvalidInput("regulators must be positive".into()));
    }
    let xs = spec.grid.points();
    let one = |_: f64| C64::new(1.0, 0.0);
    let mut results = Vec::new();
    for (label, f) in tests {
        let ok = class_ok(f, variant)?;
        if !ok && spec.strict_class {
            return Err(Error::ClassMismatch {
                detail: format!("{label} is outside the class required by {variant:?}"),
            });
        }
        let fv = sample(f, &xs)?;
        let kw = spec.k_window;
        let tail = tail_estimate(fam, f, &xs, &one, spec)?;
        let res = if !threshold {
            let (cont, err) = continuum_segment(fam, f, &xs, (-kw, kw), &one, spec)?;
            let disc = discrete_part(bundle, f, &xs, false, &spec.x_quad)?;
            let total: Vec<C64> = cont.iter().zip(&disc).map(|(a, b)| a + b).collect();
            let r = sup_diff(&total, &fv);
            TestFunctionResult {
                label: label.clone(),
                class_mismatch: !ok,
                residuals: vec![r],
                extrapolated_residual: r,
                monotone: true,
                norm: sup(&fv),
                continuum_part: sup(&cont),
                discrete_part: sup(&disc),
                regulator_part: 0.0,
                k_error: err + tail,
            }
        } else {
            let psi0 = bundle.threshold_state.as_ref().expect("threshold state");
            let p0 = sample(psi0, &xs)?;
            let g = psi0.mul(f);
            let mut cont = vec![ZERO; xs.len()];
            let mut err = tail;
            let mut upper = kw;
            let mut recon: Vec<Vec<C64>> = Vec::new();
            let mut residuals = Vec::new();
            let (mut cpart, mut rpart) = (0.0, 0.0);
            for &e in &eps {
                for seg in [(e, upper), (-upper, -e)] {
                    let (v, er) = continuum_segment(fam, f, &xs, seg, &one, spec)?;
                    err += er;
                    for (c, d) in cont.iter_mut().zip(v) {
                        *c += d;
                    }
                }
                upper = e;
                let reg: Vec<C64> = match variant {
                    RoiVariant::ThresholdPlain => {
                        let j = oscillatory_integral(&g, 0.0, &spec.x_quad)?.value;
                        p0.iter().map(|p| -p * j / (PI * e)).collect()
                    }
                    _ => {
                        let jm = oscillatory_integral(&g, -e, &spec.x_quad)?.value;
                        let jp = oscillatory_integral(&g, e, &spec.x_quad)?.value;
                        xs.iter()
                            .zip(&p0)
                            .map(|(&x, p)| {
                                let cosine = ((I * e * x).exp() * jm + (-I * e * x).exp() * jp) * 0.5;
                                -p * cosine / (PI * e)
                            })
                            .collect()
                    }
                };
                let total: Vec<C64> = cont.iter().zip(&reg).map(|(a, b)| a + b).collect();
                residuals.push(sup_diff(&total, &fv));
                cpart = sup(&cont);
                rpart = sup(&reg);
                recon.push(total);
            }
            let extrap: Vec<C64> = (0..xs.len())
                .map(|j| {
                    let col: Vec<C64> = recon.iter().map(|r| r[j]).collect();
                    neville_zero(&eps, &col).value
                })
                .collect();
            let monotone = residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
            TestFunctionResult {
                label: label.clone(),
                class_mismatch: !ok,
                extrapolated_residual: sup_diff(&extrap, &fv),
                residuals,
                monotone,
                norm: sup(&fv),
                continuum_part: cpart,
                discrete_part: 0.0,
                regulator_part: rpart,
                k_error: err,
            }
        };
        results.push(res);
    }
    Ok(RoiReport {
        variant,
        eps: if threshold { eps } else { Vec::new() },
        k_window: spec.k_window,
        results,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralCheck {
    /// `sup |spectral form applied to f - h⁻ f|` on the grid.
    pub residual: f64,
    pub norm: f64,
    pub k_error: f64,
}

/// `h⁻ f` rebuilt from `k²` continuum dyads and the Jordan blocks of the bound states.
pub fn spectral_decomposition_check(bundle: &ModelBundle, f: &Expr, spec: &RoiSpec) -> Result<SpectralCheck> {
    let fam = family(bundle)?;
    if bundle.threshold_state.is_some() {
        return Err(Error::InvalidInput("spectral form needs a regular continuum at k = 0".into()));
    }
    let xs = spec.grid.points();
    let w = |k: f64| C64::new(k * k, 0.0);
    let kw = spec.k_window;
    let (cont, err) = continuum_segment(fam, f, &xs, (-kw, kw), &w, spec)?;
    let tail = tail_estimate(fam, f, &xs, &w, spec)?;
    let disc = discrete_part(bundle, f, &xs, true, &spec.x_quad)?;
    let target = sample(&bundle.h_minus.apply(f), &xs)?;
    let total: Vec<C64> = cont.iter().zip(&disc).map(|(a, b)| a + b).collect();
    Ok(SpectralCheck {
        residual: sup_diff(&total, &target),
        norm: sup(&target),
        k_error: err + tail,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakOrthoReport {
    pub k_values: Vec<f64>,
    pub measured: Vec<ComplexScalar>,
    pub expected: Vec<ComplexScalar>,
    pub max_error: f64,
}

/// `∫dx ψ(x;k) ∫dk' f̂(k') ψ(x;-k') = f̂(k)` for `f̂(k) = exp(-(k - 1/2)²)`.
pub fn weak_orthonormality(bundle: &ModelBundle, k_values: &[f64]) -> Result<WeakOrthoReport> {
    let fam = family(bundle)?;
    if bundle.threshold_state.is_some() {
        return Err(Error::InvalidInput("continuum is singular at k = 0".into()));
    }
    let fhat = |k: f64| (-(k - 0.5) * (k - 0.5)).exp();
    let tape = Tape::new(&fam.amplitude);
    let inner_spec = QuadratureSpec {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        ..QuadratureSpec::default()
    };
    let packet = |x: f64| -> Result<C64> {
        let g = |k: f64| -> Result<Vec<C64>> { Ok(vec![fam.eval(&tape, x, C64::new(-k, 0.0))? * fhat(k)]) };
        Ok(integrate(&g, -8.5, 9.5, 1, 18, &inner_spec, false)?.value[0])
    };
    let outer = |x: f64| -> Result<Vec<C64>> {
        let p = packet(x)?;
        k_values
            .iter()
            .map(|&k| Ok(fam.eval(&tape, x, C64::new(k, 0.0))? * p))
            .collect()
    };
    let outer_spec = QuadratureSpec {
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        ..QuadratureSpec::default()
    };
    let e = integrate(&outer, -16.0, 16.0, k_values.len(), 32, &outer_spec, true)?;
    let expected: Vec<C64> = k_values.iter().map(|&k| C64::new(fhat(k), 0.0)).collect();
    let max_error = e
        .value
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(WeakOrthoReport {
        k_values: k_values.to_vec(),
        measured: e.value.iter().map(|&c| c.into()).collect(),
        expected: expected.iter().map(|&c| c.into()).collect(),
        max_error,
    })
}
