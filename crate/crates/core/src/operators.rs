//! Schrödinger operators, finite-order differential operators and residuals.

use crate::complex::{C64, ZERO};
use crate::error::{Error, Result};
use crate::funcalc::{Expr, Tape};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `h = -d²/dx² + V(x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub potential: Expr,
}

impl Hamiltonian {
    pub fn new(potential: Expr) -> Self {
        Hamiltonian { potential }
    }

    pub fn free() -> Self {
        Hamiltonian::new(Expr::zero())
    }

    pub fn apply(&self, f: &Expr) -> Expr {
        apply_h(self, f)
    }

    /// `-∂² + V` as a [`DiffOperator`].
    pub fn operator(&self) -> DiffOperator {
        DiffOperator {
            coeffs: vec![self.potential.clone(), Expr::zero(), Expr::real(-1.0)],
        }
    }

    /// `h - c`.
    pub fn shifted(&self, c: C64) -> Hamiltonian {
        Hamiltonian::new(self.potential.sub(&Expr::constant(c)))
    }
}

pub fn apply_h(h: &Hamiltonian, f: &Expr) -> Expr {
    h.potential.mul(f).sub(&f.derivative().derivative())
}

/// `Σ_k w_k(x) ∂^k`, coefficients stored from `w_0` upward.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiffOperator {
    coeffs: Vec<Expr>,
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

impl DiffOperator {
    /// Leading coefficient must be x-independent and nonzero for order >= 1.
    pub fn new(coeffs: Vec<Expr>) -> Result<Self> {
        let op = DiffOperator::raw(coeffs);
        if op.order() >= 1 {
            let lead = op.leading();
            if lead.depends_on_x() {
                return Err(Error::InvalidInput(
                    "leading coefficient of a differential operator must be constant".into(),
                ));
            }
        }
        Ok(op)
    }

    fn raw(mut coeffs: Vec<Expr>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Expr::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Expr::zero());
        }
        DiffOperator { coeffs }
    }

    pub fn identity() -> Self {
        DiffOperator::raw(vec![Expr::one()])
    }

    pub fn d() -> Self {
        DiffOperator::raw(vec![Expr::zero(), Expr::one()])
    }

    /// Multiplication by `f`.
    pub fn mul_by(f: Expr) -> Self {
        DiffOperator::raw(vec![f])
    }

    /// `s ∂ + c(x)` for a first-order factor.
    pub fn first_order(s: f64, c: Expr) -> Self {
        DiffOperator::raw(vec![c, Expr::real(s)])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Expr {
        self.coeffs.get(k).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn leading(&self) -> Expr {
        self.coeffs[self.order()].clone()
    }

    /// Value of the (constant) leading coefficient.
    pub fn leading_value(&self) -> Result<C64> {
        self.leading().value(0.0)
    }

    pub fn apply(&self, f: &Expr) -> Expr {
        apply_op(self, f)
    }

    pub fn add(&self, other: &DiffOperator) -> DiffOperator {
        let n = self.coeffs.len().max(other.coeffs.len());
        DiffOperator::raw((0..n).map(|k| self.coeff(k).add(&other.coeff(k))).collect())
    }

    pub fn sub(&self, other: &DiffOperator) -> DiffOperator {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> DiffOperator {
        DiffOperator::raw(self.coeffs.iter().map(|w| w.scale(c)).collect())
    }

    pub fn transpose(&self) -> DiffOperator {
        transpose_op(self)
    }

    /// `self ∘ other`.
    pub fn then_after(&self, other: &DiffOperator) -> DiffOperator {
        compose(self, other)
    }
}

pub fn apply_op(q: &DiffOperator, f: &Expr) -> Expr {
    let mut out = Expr::zero();
    let mut fk = f.clone();
    for (k, w) in q.coeffs.iter().enumerate() {
        if k > 0 {
            fk = fk.derivative();
        }
        out = out.add(&w.mul(&fk));
    }
    out
}

/// Formal transpose: `q^t g = Σ_k (-1)^k ∂^k (w_k g)`.
pub fn transpose_op(q: &DiffOperator) -> DiffOperator {
    let n = q.order();
    // derivative tables of every coefficient
    let derivs: Vec<Vec<Expr>> = q
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let mut v = vec![w.clone()];
            for _ in 0..k {
                let next = v.last().map(Expr::derivative).unwrap_or_else(Expr::zero);
                v.push(next);
            }
            v
        })
        .collect();
    let coeffs = (0..=n)
        .map(|j| {
            let mut c = Expr::zero();
            for k in j..=n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                c = c.add(&derivs[k][k - j].scale_re(sign * binom(k, j)));
            }
            c
        })
        .collect();
    DiffOperator::raw(coeffs)
}

/// `a ∘ b`: `(a b) f = a (b f)`.
pub fn compose(a: &DiffOperator, b: &DiffOperator) -> DiffOperator {
    let (na, nb) = (a.order(), b.order());
    let derivs: Vec<Vec<Expr>> = b
        .coeffs
        .iter()
        .map(|w| {
            let mut v = vec![w.clone()];
            for _ in 0..na {
                let next = v.last().map(Expr::derivative).unwrap_or_else(Expr::zero);
                v.push(next);
            }
            v
        })
        .collect();
    let mut coeffs = vec![Expr::zero(); na + nb + 1];
    for (i, ai) in a.coeffs.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (k, dk) in derivs.iter().enumerate() {
            for l in 0..=i {
                let term = dk[i - l].scale_re(binom(i, l));
                if term.is_zero() {
                    continue;
                }
                coeffs[k + l] = coeffs[k + l].add(&ai.mul(&term));
            }
        }
    }
    DiffOperator::raw(coeffs)
}

/// Compose a list left to right: `ops[0] ∘ ops[1] ∘ ...`.
pub fn compose_all(ops: &[DiffOperator]) -> DiffOperator {
    ops.iter()
        .fold(DiffOperator::identity(), |acc, op| compose(&acc, op))
}

/// Uniform grid `{x_min, x_max, n_points}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min < x_max) || n_points < 2 || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid needs x_min < x_max and at least 2 points, got {x_min}:{x_max}:{n_points}"
            )));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            n_points,
        })
    }

    /// 401 points on `[-12/α, 12/α]`.
    pub fn for_scale(alpha: f64) -> Self {
        let l = 12.0 / alpha.abs();
        GridSpec {
            x_min: -l,
            x_max: l,
            n_points: 401,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.x_max - self.x_min) / (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| {
                if i + 1 == self.n_points {
                    self.x_max
                } else {
                    self.x_min + h * i as f64
                }
            })
            .collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::for_scale(1.0)
    }
}

/// Eigenvalue plus `ψ_0 .. ψ_{p-1}` with `(h-λ)ψ_i = ψ_{i-1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JordanChain {
    #[serde(with = "crate::complex::as_object")]
    pub eigenvalue: C64,
    pub functions: Vec<Expr>,
}

impl JordanChain {
    pub fn new(eigenvalue: C64, functions: Vec<Expr>) -> Self {
        JordanChain {
            eigenvalue,
            functions,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Evaluate on points in parallel; the first error in point order wins.
pub fn sample(f: &Expr, xs: &[f64]) -> Result<Vec<C64>> {
    let t = Tape::new(f);
    sample_tape(&t, xs)
}

pub fn sample_tape(t: &Tape, xs: &[f64]) -> Result<Vec<C64>> {
    let vals: Vec<Result<C64>> = xs.par_iter().map(|&x| t.value(x)).collect();
    vals.into_iter().collect()
}

/// `max |a - b| / (1 + |b|)` over the grid.
pub fn relative_residual(a: &Expr, b: &Expr, grid: &GridSpec) -> Result<f64> {
    let xs = grid.points();
    let va = sample(a, &xs)?;
    let vb = sample(b, &xs)?;
    Ok(va
        .iter()
        .zip(&vb)
        .map(|(a, b)| (a - b).norm() / (1.0 + b.norm()))
        .fold(0.0, f64::max))
}

/// `max_x |(h-λ)ψ - prev| / (1 + max(|ψ''|, |(V-λ)ψ|, |prev|))`, `prev = 0` for an eigenfunction.
pub fn link_residual(h: &Hamiltonian, lambda: C64, psi: &Expr, prev: Option<&Expr>, grid: &GridSpec) -> Result<f64> {
    let xs = grid.points();
    let v = Tape::new(&h.potential);
    let t = Tape::new(psi);
    let prev = prev.map(Tape::new);
    let res: Vec<Result<f64>> = xs
        .par_iter()
        .map(|&x| {
            let j = t.eval(x, 2)?;
            let pot = (v.value(x)? - lambda) * j[0];
            let rhs = match &prev {
                Some(p) => p.value(x)?,
                None => ZERO,
            };
            let scale = j[2].norm().max(pot.norm()).max(rhs.norm());
            Ok((pot - j[2] - rhs).norm() / (1.0 + scale))
        })
        .collect();
    res.into_iter().try_fold(0.0, |w: f64, r| Ok(w.max(r?)))
}

/// Worst [`link_residual`] along the chain.
pub fn chain_residual(h: &Hamiltonian, chain: &JordanChain, grid: &GridSpec) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, psi) in chain.functions.iter().enumerate() {
        let prev = i.checked_sub(1).map(|p| &chain.functions[p]);
        worst = worst.max(link_residual(h, chain.eigenvalue, psi, prev, grid)?);
    }
    Ok(worst)
}

/// `max |q(h⁺f) - h⁻(q f)| / (1 + |h⁻(q f)|)` over probes and grid.
pub fn intertwining_residual(
    h_plus: &Hamiltonian,
    h_minus: &Hamiltonian,
    q: &DiffOperator,
    probes: &[Expr],
    grid: &GridSpec,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in probes {
        let lhs = q.apply(&h_plus.apply(f));
        let rhs = h_minus.apply(&q.apply(f));
        worst = worst.max(relative_residual(&lhs, &rhs, grid)?);
    }
    Ok(worst)
}

/// `max |q f| / (1 + |f|)`: how well `q` annihilates `f`.
pub fn annihilation_residual(q: &DiffOperator, f: &Expr, grid: &GridSpec) -> Result<f64> {
    let xs = grid.points();
    let qf = sample(&q.apply(f), &xs)?;
    let fv = sample(f, &xs)?;
    Ok(qf
        .iter()
        .zip(&fv)
        .map(|(a, b)| a.norm() / (1.0 + b.norm()))
        .fold(0.0, f64::max))
}

/// Largest coefficient-wise relative deviation between two operators.
pub fn operator_deviation(a: &DiffOperator, b: &DiffOperator, grid: &GridSpec) -> Result<f64> {
    let n = a.order().max(b.order());
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        worst = worst.max(relative_residual(&a.coeff(k), &b.coeff(k), grid)?);
    }
    Ok(worst)
}
