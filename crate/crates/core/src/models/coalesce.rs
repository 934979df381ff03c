use crate::complex::{ComplexScalar, C64, ZERO};
use crate::error::{Error, Result};
use crate::funcalc::{Expr, Tape};
use crate::operators::{chain_residual, GridSpec, Hamiltonian, JordanChain};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalescenceKind {
    /// Three simple levels merging.
    Triple,
    /// A rank-2 cell merging with a simple level.
    Mixed,
}

/// Eigenpairs depending on a parameter `μ` that coalesce at `μ₀`.
#[derive(Clone, Debug)]
pub struct CoalescenceFamily {
    pub kind: CoalescenceKind,
    pub param: String,
    pub mu0: f64,
    pub potential: Expr,
    /// Triple: `ψ₁, ψ₂, ψ₃`. Mixed: `ψ₁₀, ψ₁₁, ψ₂`.
    pub functions: Vec<Expr>,
    /// Triple: `λ₁, λ₂, λ₃`. Mixed: `λ₁, λ₂`. Constant in `x`.
    pub eigenvalues: Vec<Expr>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoalescenceResult {
    pub chain: JordanChain,
    pub kappa: ComplexScalar,
    /// Disagreement of the two first-order functions after matching, relative, on the grid.
    pub kappa_mismatch: f64,
    pub residual: f64,
}

const KAPPA: &str = "kappa";
const FIT_POINTS: [f64; 2] = [0.31, 1.07];
const CHECK_POINT: f64 = -0.83;

fn at(e: &Expr, name: &str, v: f64) -> Expr {
    e.with_param(name, C64::new(v, 0.0)).freeze_param(name)
}

fn scalar(e: &Expr, name: &str, v: f64) -> Result<C64> {
    at(e, name, v).value(0.0)
}

/// Solve `d(x) = κ c(x)` by least squares on two points and test a third and the grid.
fn solve_kappa(d: &Expr, c: &Expr, grid: &GridSpec, tol: f64) -> Result<(C64, f64)> {
    let (td, tc) = (Tape::new(d), Tape::new(c));
    let (mut num, mut den) = (ZERO, 0.0);
    for &x in &FIT_POINTS {
        let cv = tc.value(x)?;
        num += cv.conj() * td.value(x)?;
        den += cv.norm_sqr();
    }
    let kappa = num / den;
    let check = |x: f64| -> Result<f64> {
        let dv = td.value(x)?;
        Ok((dv - kappa * tc.value(x)?).norm() / (1.0 + dv.norm()))
    };
    let mut mismatch = check(CHECK_POINT)?;
    for x in grid.points() {
        mismatch = mismatch.max(check(x)?);
    }
    if mismatch > tol {
        return Err(Error::KappaMismatch { mismatch });
    }
    Ok((kappa, mismatch))
}

pub fn coalesce(fam: &CoalescenceFamily, grid: &GridSpec, kappa_tol: f64) -> Result<CoalescenceResult> {
    let need = match fam.kind {
        CoalescenceKind::Triple => (3, 3),
        CoalescenceKind::Mixed => (3, 2),
    };
    if fam.functions.len() != need.0 || fam.eigenvalues.len() != need.1 {
        return Err(Error::InvalidInput(format!(
            "{:?} coalescence needs {} functions and {} eigenvalues",
            fam.kind, need.0, need.1
        )));
    }
    let p = fam.param.as_str();
    let mu0 = fam.mu0;
    let dl: Vec<Expr> = fam
        .eigenvalues
        .iter()
        .map(|l| l.param_derivative(p))
        .collect::<Result<_>>()?;
    let dl0: Vec<C64> = dl.iter().map(|e| scalar(e, p, mu0)).collect::<Result<_>>()?;
    for i in 0..dl0.len() {
        for j in i + 1..dl0.len() {
            let scale = 1.0 + dl0[i].norm().max(dl0[j].norm());
            if (dl0[i] - dl0[j]).norm() <= 1e-12 * scale {
                return Err(Error::ParameterDomain(format!(
                    "lambda'_{} = lambda'_{} at mu0: the construction divides by their difference",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let lambda0 = scalar(&fam.eigenvalues[0], p, mu0)?;
    let phi0 = at(&fam.functions[0], p, mu0);
    let kappa = Expr::param(KAPPA, ZERO);
    let ramp = Expr::one().add(&kappa.mul(&Expr::param(p, C64::new(mu0, 0.0)).sub(&Expr::real(mu0))));
    let d = |e: &Expr| e.param_derivative(p);
    let (first_a, first_b, num_factor, den) = match fam.kind {
        CoalescenceKind::Triple => {
            let p1 = ramp.mul(&fam.functions[0]);
            let p3 = &fam.functions[2];
            let a = d(&p1)?.sub(&d(p3)?).div(&dl[0].sub(&dl[2]));
            let b = d(&fam.functions[1])?.sub(&d(p3)?).div(&dl[1].sub(&dl[2]));
            // φ₂ = [∂ψ₁⁽¹⁾ - ∂ψ₂⁽¹⁾] / (2[λ'₁ - λ'₂])
            (a, b, 1.0, (dl0[0] - dl0[1]) * 2.0)
        }
        CoalescenceKind::Mixed => {
            let a = fam.functions[1].clone();
            let p2 = ramp.mul(&fam.functions[2]);
            let b = d(&fam.functions[0])?.sub(&d(&p2)?).div(&dl[0].sub(&dl[1]));
            // φ₂ = [∂ψ₂⁽¹⁾ - 2∂ψ₁⁽¹⁾] / (2[λ'₂ - λ'₁]); ordered as (b, a) below
            (b, a, 2.0, (dl0[1] - dl0[0]) * 2.0)
        }
    };
    // first_a and first_b must agree at μ₀; the κ-dependence is linear
    let a0 = at(&first_a, p, mu0);
    let b0 = at(&first_b, p, mu0);
    let diff = a0.sub(&b0);
    let offset = at(&diff, KAPPA, 0.0);
    let slope = at(&diff, KAPPA, 1.0).sub(&offset);
    let (k, mismatch) = solve_kappa(&offset.neg(), &slope, grid, kappa_tol)?;
    let phi1 = at(&first_a.with_param(KAPPA, k).freeze_param(KAPPA), p, mu0);
    let fix = |e: &Expr| -> Result<Expr> {
        Ok(at(&d(&e.with_param(KAPPA, k).freeze_param(KAPPA))?, p, mu0))
    };
    let phi2 = fix(&first_a)?
        .sub(&fix(&first_b)?.scale_re(num_factor))
        .scale(den.inv());
    let chain = JordanChain::new(lambda0, vec![phi0, phi1, phi2]);
    let h0 = Hamiltonian::new(at(&fam.potential, p, mu0));
    let residual = chain_residual(&h0, &chain, grid)?;
    Ok(CoalescenceResult {
        chain,
        kappa: k.into(),
        kappa_mismatch: mismatch,
        residual,
    })
}
