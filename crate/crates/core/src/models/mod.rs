//! Exactly solvable partner pairs seeded by the free particle: kernels,
//! Jordan chains, continuum families and symmetry operators.

mod coalesce;
mod limits;
mod roi;
mod symmetry;

pub use coalesce::{coalesce, CoalescenceFamily, CoalescenceKind, CoalescenceResult};
pub use limits::{
    confluence_limit, continuation_limits, ConfluenceReport, LimitCheck, LimitReport,
};
pub use roi::{
    resolution_of_identity, spectral_decomposition_check, weak_orthonormality, RoiReport,
    RoiSpec, RoiVariant, SpectralCheck, TestFunctionResult, WeakOrthoReport,
};
pub use symmetry::{symmetry_check, SymmetryReport};

use crate::complex::{ComplexScalar, C64, I, ONE, ZERO};
use crate::darboux::{dual_kernel, intertwiner, log_second_derivative, BasisEntry, TransformationBasis};
use crate::error::{Error, Result};
use crate::funcalc::Expr;
use crate::jordan::{build_smatrix, jordan_form};
use crate::operators::{
    annihilation_residual, chain_residual, compose_all, intertwining_residual, DiffOperator,
    GridSpec, Hamiltonian, JordanChain,
};
use crate::quadrature::ContinuumFamily;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub const INTERTWINING_TOL: f64 = 1e-8;
pub const ANNIHILATION_TOL: f64 = 1e-9;
pub const CHAIN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelKind {
    Rank2 {
        alpha: f64,
        x0: f64,
        #[serde(with = "crate::complex::as_object")]
        z: C64,
    },
    TwoLevel {
        #[serde(with = "crate::complex::as_object")]
        alpha: C64,
        beta: f64,
        x0: f64,
        #[serde(with = "crate::complex::as_object")]
        z: C64,
    },
    Single {
        alpha: f64,
        x0: f64,
    },
    InverseSquare {
        #[serde(with = "crate::complex::as_object")]
        z: C64,
        n: u32,
    },
    Custom,
}

/// Self-check residuals recorded when a bundle is built.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Validation {
    pub intertwining: f64,
    pub kernel_minus_annihilation: f64,
    pub kernel_plus_annihilation: f64,
    pub chain: f64,
}

#[derive(Clone, Debug)]
pub struct ModelBundle {
    pub kind: ModelKind,
    pub name: String,
    pub params: BTreeMap<String, ComplexScalar>,
    pub h_plus: Hamiltonian,
    pub h_minus: Hamiltonian,
    /// Monic; `h⁻ q⁻ = q⁻ h⁺`.
    pub q_minus: DiffOperator,
    /// `(q⁻)^t`.
    pub q_plus: DiffOperator,
    /// Canonical basis of `ker q⁻` (functions of `h⁺`).
    pub kernel_minus: TransformationBasis,
    /// Canonical basis of `ker q⁺` (functions of `h⁻`).
    pub kernel_plus: TransformationBasis,
    /// Whole-axis chains of `h⁻`, binorm-normalized.
    pub chains: Vec<JordanChain>,
    /// Whole-axis chains of `h⁺`.
    pub plus_chains: Vec<JordanChain>,
    pub continuum: Option<ContinuumFamily>,
    /// `ψ(x;0)` when it is a bounded zero-energy solution.
    pub zero_energy: Option<Expr>,
    /// Normalizable state sitting at the continuum threshold.
    pub threshold_state: Option<Expr>,
    pub symmetry_op: Option<DiffOperator>,
    pub grid: GridSpec,
    pub notes: Vec<String>,
    pub validation: Validation,
}

pub fn probe_functions() -> Vec<Expr> {
    let x = Expr::x();
    vec![
        x.scale(C64::new(0.0, 1.1)).exp(),
        x.mul(&x.powi(2).neg().exp()),
        x.cosh().mul(&x.powi(2).scale_re(-0.25).exp()),
    ]
}

impl ModelBundle {
    /// `i k Π_j (k² - λ_j)`: eigenvalue of `q⁻ ∂ q⁺` on `ψ(x;k)`.
    pub fn symmetry_eigenvalue(&self, k: f64) -> C64 {
        let k2 = C64::new(k * k, 0.0);
        self.kernel_minus
            .entries
            .iter()
            .fold(I * k, |acc, e| acc * (k2 - e.lambda))
    }

    /// Distinct eigenvalues carried by the kernels.
    pub fn levels(&self) -> Vec<C64> {
        let mut out: Vec<C64> = Vec::new();
        for e in self.kernel_minus.entries.iter().chain(&self.kernel_plus.entries) {
            if !out.iter().any(|l| (l - e.lambda).norm() <= 1e-12 * (1.0 + l.norm())) {
                out.push(e.lambda);
            }
        }
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }

    pub fn param(&self, name: &str) -> Option<C64> {
        self.params.get(name).map(|&c| c.into())
    }

    /// PT-symmetric configuration: `x₀ = Re z = 0`.
    pub fn is_pt_configuration(&self) -> bool {
        let zero = |n: &str| self.param(n).is_none_or(|v| v.re == 0.0);
        !matches!(self.kind, ModelKind::Custom) && zero("x0") && zero("z")
    }

    /// Recompute the construction self-checks on a grid.
    pub fn validate(&self, grid: &GridSpec) -> Result<Validation> {
        let intertwining = intertwining_residual(
            &self.h_plus,
            &self.h_minus,
            &self.q_minus,
            &probe_functions(),
            grid,
        )?;
        let mut km: f64 = 0.0;
        for f in self.kernel_minus.functions() {
            km = km.max(annihilation_residual(&self.q_minus, &f, grid)?);
        }
        let mut kp: f64 = 0.0;
        for f in self.kernel_plus.functions() {
            kp = kp.max(annihilation_residual(&self.q_plus, &f, grid)?);
        }
        let mut chain = self
            .kernel_minus
            .chain_residual(grid)?
            .max(self.kernel_plus.chain_residual(grid)?);
        for c in &self.chains {
            chain = chain.max(chain_residual(&self.h_minus, c, grid)?);
        }
        for c in &self.plus_chains {
            chain = chain.max(chain_residual(&self.h_plus, c, grid)?);
        }
        Ok(Validation {
            intertwining,
            kernel_minus_annihilation: km,
            kernel_plus_annihilation: kp,
            chain,
        })
    }
}

fn entry(expr: Expr, lambda: C64, pos: usize) -> BasisEntry {
    BasisEntry {
        expr,
        lambda,
        chain_position: pos,
    }
}

fn domain(msg: impl Into<String>) -> Error {
    Error::ParameterDomain(msg.into())
}

fn param_map(pairs: &[(&str, C64)]) -> BTreeMap<String, ComplexScalar> {
    pairs.iter().map(|(k, v)| (k.to_string(), (*v).into())).collect()
}

struct Parts {
    kind: ModelKind,
    name: &'static str,
    params: BTreeMap<String, ComplexScalar>,
    kernel_minus: TransformationBasis,
    v_minus: Expr,
    kernel_plus: Vec<BasisEntry>,
    chains: Vec<JordanChain>,
    continuum: Option<ContinuumFamily>,
    zero_energy: Option<Expr>,
    threshold_state: Option<Expr>,
    symmetry: bool,
    grid: GridSpec,
    notes: Vec<String>,
}

fn assemble(p: Parts) -> Result<ModelBundle> {
    let q_minus = intertwiner(&p.kernel_minus, &p.grid)?;
    let q_plus = q_minus.transpose();
    let symmetry_op = p
        .symmetry
        .then(|| compose_all(&[q_minus.clone(), DiffOperator::d(), q_plus.clone()]));
    let h_minus = Hamiltonian::new(p.v_minus);
    let kernel_plus = TransformationBasis::new(h_minus.clone(), p.kernel_plus)?;
    let mut b = ModelBundle {
        kind: p.kind,
        name: p.name.to_string(),
        params: p.params,
        h_plus: p.kernel_minus.source.clone(),
        h_minus,
        q_minus,
        q_plus,
        kernel_minus: p.kernel_minus,
        kernel_plus,
        chains: p.chains,
        plus_chains: Vec::new(),
        continuum: p.continuum,
        zero_energy: p.zero_energy,
        threshold_state: p.threshold_state,
        symmetry_op,
        grid: p.grid,
        notes: p.notes,
        validation: Validation::default(),
    };
    let v = b.validate(&b.grid)?;
    if !(v.intertwining < INTERTWINING_TOL
        && v.kernel_minus_annihilation < ANNIHILATION_TOL
        && v.kernel_plus_annihilation < ANNIHILATION_TOL
        && v.chain < CHAIN_TOL)
    {
        return Err(Error::InvalidInput(format!(
            "{} bundle failed its construction checks: {v:?}",
            b.name
        )));
    }
    b.validation = v;
    Ok(b)
}

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

/// `sinh(2α(x-x₀)) + 2α(x-z)`.
pub fn rank2_w(alpha: f64, x0: f64, z: C64) -> Expr {
    let x = Expr::x();
    x.sub(&Expr::real(x0))
        .scale_re(2.0 * alpha)
        .sinh()
        .add(&x.sub(&Expr::constant(z)).scale_re(2.0 * alpha))
}

/// `φ₀⁻, φ₁⁻`: the confluent free-particle pair at `λ₀ = -α²`.
pub fn rank2_kernel_minus(alpha: f64, x0: f64, z: C64) -> (Expr, Expr) {
    let x = Expr::x();
    let u = x.sub(&Expr::real(x0)).scale_re(alpha);
    let ch = u.cosh();
    let phi1 = x
        .sub(&Expr::constant(z))
        .mul(&u.sinh())
        .scale_re(-0.5 / alpha)
        .add(&ch.scale_re(0.25 / (alpha * alpha)));
    (ch, phi1)
}

pub fn model_rank2(alpha: f64, x0: f64, z: C64) -> Result<ModelBundle> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("alpha must be positive, got {alpha}")));
    }
    if !x0.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
        return Err(domain("x0 and z must be finite"));
    }
    if z.im == 0.0 {
        return Err(domain("Im z = 0 puts a zero of W on the real axis"));
    }
    let lambda = C64::new(-alpha * alpha, 0.0);
    let (phi0m, phi1m) = rank2_kernel_minus(alpha, x0, z);
    let w = rank2_w(alpha, x0, z);
    let c = (2.0 * alpha).powf(1.5);
    let phi0p = phi0m.div(&w).scale_re(c);
    let phi1p = phi1m.div(&w).scale_re(-c);
    let grid = GridSpec::for_scale(alpha);
    let kernel_minus = TransformationBasis::new(
        Hamiltonian::free(),
        vec![entry(phi0m, lambda, 0), entry(phi1m, lambda, 1)],
    )?;
    let w1 = w.derivative();
    let w2 = w1.derivative();
    let k = Expr::param("k", ONE);
    let denom = k.powi(2).add(&Expr::real(alpha * alpha)).mul(&w);
    let amp = Expr::one().add(
        &k.scale(I)
            .mul(&w1)
            .sub(&w2.scale_re(0.5))
            .div(&denom),
    );
    let s = inv_sqrt_2pi();
    let continuum = ContinuumFamily::new(amp, "k", Arc::new(move |_| C64::new(s, 0.0)));
    let zero_energy = Expr::one()
        .sub(&w2.div(&w).scale_re(0.5 / (alpha * alpha)))
        .scale_re(s);
    let mut notes = Vec::new();
    if x0 == 0.0 && z.re == 0.0 {
        notes.push("PT-symmetric configuration (x0 = Re z = 0)".into());
    }
    assemble(Parts {
        kind: ModelKind::Rank2 { alpha, x0, z },
        name: "rank2",
        params: param_map(&[("alpha", alpha.into()), ("x0", x0.into()), ("z", z)]),
        kernel_minus,
        v_minus: log_second_derivative(&w).scale_re(-2.0),
        kernel_plus: vec![entry(phi0p.clone(), lambda, 0), entry(phi1p.clone(), lambda, 1)],
        chains: vec![JordanChain::new(lambda, vec![phi0p, phi1p])],
        continuum: Some(continuum),
        zero_energy: Some(zero_energy),
        threshold_state: None,
        symmetry: true,
        grid,
        notes,
    })
}

/// `sinh(2α(x-x₀)) + (α/β) sinh(2β(x-z))`.
pub fn two_level_w(alpha: C64, beta: f64, x0: f64, z: C64) -> Expr {
    let x = Expr::x();
    x.sub(&Expr::real(x0))
        .scale(alpha * 2.0)
        .sinh()
        .add(&x.sub(&Expr::constant(z)).scale_re(2.0 * beta).sinh().scale(alpha / beta))
}

/// `φ_{±β} = cosh((α±β)x - (αx₀ ± βz))`.
pub fn two_level_kernel(alpha: C64, beta: f64, x0: f64, z: C64) -> (Expr, Expr) {
    let x = Expr::x();
    let plus = x
        .scale(alpha + beta)
        .sub(&Expr::constant(alpha * x0 + z * beta))
        .cosh();
    let minus = x
        .scale(alpha - beta)
        .sub(&Expr::constant(alpha * x0 - z * beta))
        .cosh();
    (plus, minus)
}

/// `√((k²+α²+β²)² - 4α²β²)` on the branch `~ k²` at infinity with cuts
/// joining the branch points within each half-plane.
pub fn two_level_branch(k: C64, alpha: C64, beta: f64) -> C64 {
    let u = k - I * alpha;
    let v = k + I * alpha;
    let b2 = beta * beta;
    u * (ONE + b2 / (u * u)).sqrt() * v * (ONE + b2 / (v * v)).sqrt()
}

/// `ψ_{+β}` and `ψ_{-β}` normalization constants.
pub fn two_level_constants(alpha: C64, beta: f64) -> (C64, C64) {
    let s2 = 2f64.sqrt();
    let cp = I * alpha * s2 * (ONE / beta + ONE / alpha).sqrt();
    let cm = alpha * s2 * (ONE / beta - ONE / alpha).sqrt();
    (cp, cm)
}

pub fn model_two_level(alpha: C64, beta: f64, x0: f64, z: C64) -> Result<ModelBundle> {
    if z.im == 0.0 {
        return Err(domain("Im z must be nonzero"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(domain(format!("beta must be >= 0, got {beta}")));
    }
    if beta >= PI / (2.0 * z.im.abs()) {
        return Err(domain(format!(
            "beta must stay below pi/(2 Im z) = {}",
            PI / (2.0 * z.im.abs())
        )));
    }
    let mut notes = Vec::new();
    if alpha.im != 0.0 {
        if alpha.re == 0.0 && alpha.im < 0.0 {
            notes.push("imaginary alpha: admitted but not exercised by the reference results".into());
        } else {
            return Err(domain("alpha must be positive (or -i alpha > 0)"));
        }
    } else if !(alpha.re > 0.0) {
        return Err(domain("alpha must be positive (or -i alpha > 0)"));
    }
    if (alpha - beta).norm() <= 1e-12 * alpha.norm() {
        return Err(domain("beta = alpha is excluded"));
    }
    if beta == 0.0 {
        let mut b = model_rank2(alpha.re, x0, z)?;
        b.params.insert("beta".into(), ZERO.into());
        b.notes.push("beta = 0: confluent (rank-2) case".into());
        return Ok(b);
    }
    let lp = -(alpha + beta) * (alpha + beta);
    let lm = -(alpha - beta) * (alpha - beta);
    let (php, phm) = two_level_kernel(alpha, beta, x0, z);
    let w = two_level_w(alpha, beta, x0, z);
    let tp = phm.div(&w);
    let tm = php.div(&w);
    let (cp, cm) = two_level_constants(alpha, beta);
    let psi_p = tp.scale(cp);
    let psi_m = tm.scale(cm);
    let kernel_minus = TransformationBasis::new(
        Hamiltonian::free(),
        vec![entry(php, lp, 0), entry(phm, lm, 0)],
    )?;
    let w1 = w.derivative();
    let w2 = w1.derivative();
    let k = Expr::param("k", ONE);
    let a2b2 = alpha * alpha + beta * beta;
    let amp = k
        .powi(2)
        .add(&Expr::constant(a2b2))
        .add(&k.scale(I).mul(&w1).sub(&w2.scale_re(0.5)).div(&w));
    let s = inv_sqrt_2pi();
    let continuum = ContinuumFamily::new(
        amp,
        "k",
        Arc::new(move |k| s / two_level_branch(k, alpha, beta)),
    );
    let zero_energy = Expr::constant(a2b2)
        .sub(&w2.div(&w).scale_re(0.5))
        .scale(s / (alpha * alpha - beta * beta));
    if x0 == 0.0 && z.re == 0.0 {
        notes.push("PT-symmetric configuration (x0 = Re z = 0)".into());
    }
    let grid = GridSpec::for_scale(alpha.norm());
    assemble(Parts {
        kind: ModelKind::TwoLevel { alpha, beta, x0, z },
        name: "two_level",
        params: param_map(&[("alpha", alpha), ("beta", beta.into()), ("x0", x0.into()), ("z", z)]),
        kernel_minus,
        v_minus: log_second_derivative(&w).scale_re(-2.0),
        kernel_plus: vec![entry(tp, lp, 0), entry(tm, lm, 0)],
        chains: vec![
            JordanChain::new(lp, vec![psi_p]),
            JordanChain::new(lm, vec![psi_m]),
        ],
        continuum: Some(continuum),
        zero_energy: Some(zero_energy),
        threshold_state: None,
        symmetry: true,
        grid,
        notes,
    })
}

/// One Darboux step on `cosh(α(x-x₀))`: the Pöschl–Teller well with one bound state.
pub fn model_single(alpha: f64, x0: f64) -> Result<ModelBundle> {
    if !(alpha > 0.0 && alpha.is_finite()) || !x0.is_finite() {
        return Err(domain("alpha must be positive and x0 finite"));
    }
    let lambda = C64::new(-alpha * alpha, 0.0);
    let u = Expr::x().sub(&Expr::real(x0)).scale_re(alpha);
    let ch = u.cosh();
    let v = ch.powi(-2).scale_re(-2.0 * alpha * alpha);
    let dual = ch.recip();
    let psi0 = dual.scale_re((alpha / 2.0).sqrt());
    let k = Expr::param("k", ONE);
    let amp = k.scale(I).sub(&u.tanh().scale_re(alpha));
    let s = inv_sqrt_2pi();
    let continuum = ContinuumFamily::new(amp, "k", Arc::new(move |k| s / (I * k - alpha)));
    assemble(Parts {
        kind: ModelKind::Single { alpha, x0 },
        name: "single",
        params: param_map(&[("alpha", alpha.into()), ("x0", x0.into())]),
        kernel_minus: TransformationBasis::new(Hamiltonian::free(), vec![entry(ch, lambda, 0)])?,
        v_minus: v,
        kernel_plus: vec![entry(dual, lambda, 0)],
        chains: vec![JordanChain::new(lambda, vec![psi0])],
        continuum: Some(continuum),
        zero_energy: None,
        threshold_state: None,
        symmetry: true,
        grid: GridSpec::for_scale(alpha),
        notes: Vec::new(),
    })
}

pub fn double_factorial(n: i64) -> u128 {
    let mut r: u128 = 1;
    let mut k = n;
    while k > 1 {
        r *= k as u128;
        k -= 2;
    }
    r
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

/// `ψ_j = (2(n-j)-1)!! / ((2j)!! (2n-1)!! (x-z)^(n-2j))`, `j = 0..=⌊(n-1)/2⌋`.
pub fn inverse_square_chain(z: C64, n: u32) -> Vec<Expr> {
    let n = n as i64;
    let xz = Expr::x().sub(&Expr::constant(z));
    (0..=(n - 1) / 2)
        .map(|j| {
            let num = double_factorial(2 * (n - j) - 1) as f64;
            let den = (double_factorial(2 * j) * double_factorial(2 * n - 1)) as f64;
            xz.powi(-((n - 2 * j) as i32)).scale_re(num / den)
        })
        .collect()
}

pub fn model_inverse_square(z: C64, n: u32) -> Result<ModelBundle> {
    if z.im == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(domain("Im z must be nonzero"));
    }
    if n == 0 || n as usize > crate::darboux::MAX_BASIS {
        return Err(domain(format!(
            "n must be between 1 and {}",
            crate::darboux::MAX_BASIS
        )));
    }
    let xz = Expr::x().sub(&Expr::constant(z));
    let entries: Vec<BasisEntry> = (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign / factorial(2 * j + 1) as f64;
            entry(xz.powi(2 * j as i32 + 1).scale_re(c), ZERO, j as usize)
        })
        .collect();
    let kernel_minus = TransformationBasis::new(Hamiltonian::free(), entries)?;
    let v = xz.powi(-2).scale_re((n * (n + 1)) as f64);
    let grid = GridSpec::for_scale(1.0);
    let h_minus = Hamiltonian::new(v.clone());
    let dual = dual_kernel(&kernel_minus, &grid)?;
    let kernel_plus = chains_from_kernel(&h_minus, &dual, &grid)?;
    let chain = JordanChain::new(ZERO, inverse_square_chain(z, n));
    let (continuum, threshold, notes) = if n == 1 {
        let k = Expr::param("k", ONE);
        let amp = Expr::one().sub(&k.scale(I).mul(&xz).recip());
        let s = inv_sqrt_2pi();
        (
            Some(ContinuumFamily::new(amp, "k", Arc::new(move |_| C64::new(s, 0.0)))),
            Some(xz.recip()),
            Vec::new(),
        )
    } else {
        (
            None,
            Some(chain.functions[0].clone()),
            vec!["resolution of identity is not supported for n > 1".into()],
        )
    };
    let mut notes = notes;
    if z.re == 0.0 {
        notes.push("PT-symmetric configuration (Re z = 0)".into());
    }
    assemble(Parts {
        kind: ModelKind::InverseSquare { z, n },
        name: "inverse_square",
        params: param_map(&[("z", z), ("n", (n as f64).into())]),
        kernel_minus,
        v_minus: v,
        kernel_plus,
        chains: vec![chain],
        continuum,
        zero_energy: None,
        threshold_state: threshold,
        symmetry: n == 1,
        grid,
        notes,
    })
}

/// Regroup a basis of an `h`-invariant space into Jordan chains via its S-matrix.
pub fn chains_from_kernel(h: &Hamiltonian, funcs: &[Expr], grid: &GridSpec) -> Result<Vec<BasisEntry>> {
    let s = build_smatrix(h, funcs, grid)?;
    let js = jordan_form(&s.entries, 1e-8)?;
    let mut out = Vec::with_capacity(funcs.len());
    let mut row = 0;
    for cell in &js.cells {
        for pos in 0..cell.size {
            let mut g = Expr::zero();
            for (m, f) in funcs.iter().enumerate() {
                let c = js.transform[(row, m)];
                if c.norm() > 1e-14 {
                    g = g.add(&f.scale(c));
                }
            }
            out.push(entry(g, cell.lambda, pos));
            row += 1;
        }
    }
    Ok(out)
}

/// A custom pair: a source potential and a transformation basis, both as expression trees.
#[derive(Clone, Debug, Deserialize)]
pub struct CustomModel {
    pub source_potential: Expr,
    pub kernel: Vec<BasisEntry>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

pub fn model_custom(spec: &CustomModel) -> Result<ModelBundle> {
    let grid = spec.grid.unwrap_or_default();
    let h_plus = Hamiltonian::new(spec.source_potential.clone());
    let kernel_minus = TransformationBasis::new(h_plus, spec.kernel.clone())?;
    let v = crate::darboux::partner_potential(&spec.source_potential, &kernel_minus, &grid)?;
    let h_minus = Hamiltonian::new(v.clone());
    let dual = dual_kernel(&kernel_minus, &grid)?;
    let kernel_plus = chains_from_kernel(&h_minus, &dual, &grid)?;
    assemble(Parts {
        kind: ModelKind::Custom,
        name: "custom",
        params: BTreeMap::new(),
        kernel_minus,
        v_minus: v,
        kernel_plus,
        chains: Vec::new(),
        continuum: None,
        zero_energy: None,
        threshold_state: None,
        symmetry: false,
        grid,
        notes: Vec::new(),
    })
}

pub const MODEL_NAMES: [&str; 5] = ["rank2", "two_level", "single", "inverse_square", "custom"];

#[cfg(test)]
mod tests;
