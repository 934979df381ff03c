//! Crum determinants, partner potentials, superpotentials, intertwiners and
//! ladder factorization.
//!
//! Basis entry 0 is the first transformation function applied, so
//! `w_j` is built from entries `0..j` and `χ_1 = -φ_0'/φ_0`.

use crate::complex::C64;
use crate::error::{Error, Result};
use crate::funcalc::{pole_radius, Expr, Tape};
use crate::operators::{
    compose_all, link_residual, relative_residual, DiffOperator, GridSpec, Hamiltonian,
    JordanChain,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const MAX_BASIS: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisEntry {
    pub expr: Expr,
    #[serde(with = "crate::complex::as_object")]
    pub lambda: C64,
    pub chain_position: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransformationBasis {
    pub source: Hamiltonian,
    pub entries: Vec<BasisEntry>,
}

impl TransformationBasis {
    pub fn new(source: Hamiltonian, entries: Vec<BasisEntry>) -> Result<Self> {
        if entries.is_empty() || entries.len() > MAX_BASIS {
            return Err(Error::InvalidInput(format!(
                "basis size must be between 1 and {MAX_BASIS}, got {}",
                entries.len()
            )));
        }
        Ok(TransformationBasis { source, entries })
    }

    /// Entries of a single chain, in chain order.
    pub fn from_chain(source: Hamiltonian, chain: &JordanChain) -> Result<Self> {
        let entries = chain
            .functions
            .iter()
            .enumerate()
            .map(|(i, f)| BasisEntry {
                expr: f.clone(),
                lambda: chain.eigenvalue,
                chain_position: i,
            })
            .collect();
        TransformationBasis::new(source, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn functions(&self) -> Vec<Expr> {
        self.entries.iter().map(|e| e.expr.clone()).collect()
    }

    /// Largest chain residual of entries against their predecessors in the same cell.
    pub fn chain_residual(&self, grid: &GridSpec) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, e) in self.entries.iter().enumerate() {
            let prev = if e.chain_position == 0 {
                None
            } else {
                let p = self.entries[..i]
                    .iter()
                    .chain(self.entries[i + 1..].iter())
                    .find(|p| p.lambda == e.lambda && p.chain_position + 1 == e.chain_position)
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "entry {i} has chain position {} but no predecessor",
                            e.chain_position
                        ))
                    })?;
                Some(p.expr.clone())
            };
            worst = worst.max(link_residual(&self.source, e.lambda, &e.expr, prev.as_ref(), grid)?);
        }
        Ok(worst)
    }
}

/// Determinant of `rows[r]^(cols[c])`, expanded symbolically.
fn wronskian_det(rows: &[Expr], cols: &[usize]) -> Expr {
    assert_eq!(rows.len(), cols.len());
    let maxc = cols.iter().copied().max().unwrap_or(0);
    let derivs: Vec<Vec<Expr>> = rows
        .iter()
        .map(|f| {
            let mut v = vec![f.clone()];
            for _ in 0..maxc {
                let next = v.last().map(Expr::derivative).unwrap_or_else(Expr::zero);
                v.push(next);
            }
            v
        })
        .collect();
    let mut memo: HashMap<u32, Expr> = HashMap::new();
    let full = (1u32 << rows.len()) - 1;
    det_rec(full, cols, &derivs, &mut memo)
}

// cofactor expansion along the last used column over the remaining rows
fn det_rec(mask: u32, cols: &[usize], d: &[Vec<Expr>], memo: &mut HashMap<u32, Expr>) -> Expr {
    let m = mask.count_ones() as usize;
    if m == 0 {
        return Expr::one();
    }
    if let Some(e) = memo.get(&mask) {
        return e.clone();
    }
    let col = cols[m - 1];
    let mut acc = Expr::zero();
    let mut pos = 0usize;
    for r in 0..d.len() {
        if mask & (1 << r) == 0 {
            continue;
        }
        // sign of moving row r (position pos among the m rows) to the last position
        let sign = if (m - 1 - pos) % 2 == 0 { 1.0 } else { -1.0 };
        let minor = det_rec(mask & !(1 << r), cols, d, memo);
        let term = d[r][col].mul(&minor);
        acc = if sign > 0.0 { acc.add(&term) } else { acc.sub(&term) };
        pos += 1;
    }
    memo.insert(mask, acc.clone());
    acc
}

/// Wronskian of a list of functions.
pub fn wronskian(funcs: &[Expr]) -> Expr {
    let cols: Vec<usize> = (0..funcs.len()).collect();
    wronskian_det(funcs, &cols)
}

/// `w_j` from the first `j` entries; `w_0 = 1`.
pub fn crum_wronskian(basis: &TransformationBasis, j: usize) -> Result<Expr> {
    if j > basis.len() {
        return Err(Error::InvalidInput(format!(
            "w_{j} requested for a basis of size {}",
            basis.len()
        )));
    }
    Ok(wronskian(&basis.functions()[..j]))
}

/// First grid point where `|f| < ρ_pole`, if any.
fn first_zero(f: &Expr, grid: &GridSpec) -> Result<Option<(f64, f64)>> {
    let t = Tape::new(f);
    let xs = grid.points();
    let vals: Vec<Result<C64>> = xs.par_iter().map(|&x| t.value(x)).collect();
    for (x, v) in xs.iter().zip(vals) {
        let v = match v {
            Ok(v) => v,
            Err(Error::PoleProximity { .. }) => return Ok(Some((*x, 0.0))),
            Err(e) => return Err(e),
        };
        if v.norm() < pole_radius(*x) {
            return Ok(Some((*x, v.norm())));
        }
    }
    Ok(None)
}

pub fn check_nonsingular(basis: &TransformationBasis, grid: &GridSpec) -> Result<()> {
    let w = crum_wronskian(basis, basis.len())?;
    if let Some((x, magnitude)) = first_zero(&w, grid)? {
        return Err(Error::SingularPartner { x, magnitude });
    }
    Ok(())
}

/// `V₂ = V₁ - 2 (ln w_N)''`.
pub fn partner_potential(v1: &Expr, basis: &TransformationBasis, grid: &GridSpec) -> Result<Expr> {
    check_nonsingular(basis, grid)?;
    let w = crum_wronskian(basis, basis.len())?;
    Ok(v1.sub(&log_second_derivative(&w).scale_re(2.0)))
}

/// `(ln w)'' = (w'' w - w'^2) / w^2`.
pub fn log_second_derivative(w: &Expr) -> Expr {
    let d1 = w.derivative();
    let d2 = d1.derivative();
    d2.mul(w).sub(&d1.powi(2)).div(&w.powi(2))
}

/// `χ_j = -w_j'/w_j + w_{j-1}'/w_{j-1}`, `j = 1..N`.
pub fn superpotentials(basis: &TransformationBasis, grid: &GridSpec) -> Result<Vec<Expr>> {
    let n = basis.len();
    let mut ws = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let w = crum_wronskian(basis, j)?;
        if j > 0 {
            if let Some((x, _)) = first_zero(&w, grid)? {
                return Err(Error::SingularIntermediate { index: j, x });
            }
        }
        ws.push(w);
    }
    let logd: Vec<Expr> = ws.iter().map(|w| w.derivative().div(w)).collect();
    Ok((1..=n).map(|j| logd[j - 1].sub(&logd[j])).collect())
}

/// Monic `q_N⁻ f = Wr(φ_0, ..., φ_{N-1}, f) / w_N`.
pub fn intertwiner(basis: &TransformationBasis, grid: &GridSpec) -> Result<DiffOperator> {
    check_nonsingular(basis, grid)?;
    let funcs = basis.functions();
    let n = funcs.len();
    let w = wronskian(&funcs);
    let mut coeffs = Vec::with_capacity(n + 1);
    for c in 0..n {
        let cols: Vec<usize> = (0..=n).filter(|&k| k != c).collect();
        let minor = wronskian_det(&funcs, &cols);
        let sign = if (n + c) % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(minor.div(&w).scale_re(sign));
    }
    coeffs.push(Expr::one());
    DiffOperator::new(coeffs)
}

/// Basis of `ker (q_N⁻)^t`: `Wr(all entries but i) / w_N`, in entry order.
pub fn dual_kernel(basis: &TransformationBasis, grid: &GridSpec) -> Result<Vec<Expr>> {
    check_nonsingular(basis, grid)?;
    let funcs = basis.functions();
    let w = wronskian(&funcs);
    Ok((0..funcs.len())
        .map(|i| {
            let rest: Vec<Expr> = funcs
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, f)| f.clone())
                .collect();
            wronskian(&rest).div(&w)
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct LadderDecomposition {
    /// `r_j⁻ = ∂ + χ_j`, `j = 1..N`; `q_N⁻ = r_N ∘ ... ∘ r_1`.
    pub factors: Vec<DiffOperator>,
    /// `h_0 = source, ..., h_N = partner`.
    pub intermediates: Vec<Hamiltonian>,
    pub superpotentials: Vec<Expr>,
    /// Largest disagreement between the two formulas for every `v_l`.
    pub formula_gap: f64,
}

impl LadderDecomposition {
    pub fn composed(&self) -> DiffOperator {
        let rev: Vec<DiffOperator> = self.factors.iter().rev().cloned().collect();
        compose_all(&rev)
    }
}

pub fn ladder(basis: &TransformationBasis, grid: &GridSpec) -> Result<LadderDecomposition> {
    let chis = superpotentials(basis, grid)?;
    let n = chis.len();
    let lam = |j: usize| Expr::constant(basis.entries[j - 1].lambda);
    // v_{l} = χ_{l+1}² - χ_{l+1}' + λ_{l+1}
    let from_above = |l: usize| {
        let c = &chis[l];
        c.powi(2).sub(&c.derivative()).add(&lam(l + 1))
    };
    // v_{l} = χ_l² + χ_l' + λ_l
    let from_below = |l: usize| {
        let c = &chis[l - 1];
        c.powi(2).add(&c.derivative()).add(&lam(l))
    };
    let mut gap: f64 = 0.0;
    let mut intermediates = vec![basis.source.clone()];
    gap = gap.max(relative_residual(&from_above(0), &basis.source.potential, grid)?);
    for l in 1..=n {
        let v = from_below(l);
        if l < n {
            gap = gap.max(relative_residual(&from_above(l), &v, grid)?);
        }
        intermediates.push(Hamiltonian::new(v));
    }
    let factors = chis
        .iter()
        .map(|c| DiffOperator::first_order(1.0, c.clone()))
        .collect();
    Ok(LadderDecomposition {
        factors,
        intermediates,
        superpotentials: chis,
        formula_gap: gap,
    })
}

/// Deviations from `f(-x)* = f(x)` and `f(-x)* = -f(x)` on the grid.
pub fn pt_deviation(f: &Expr, grid: &GridSpec) -> Result<(f64, f64)> {
    let t = Tape::new(f);
    let mut even: f64 = 0.0;
    let mut odd: f64 = 0.0;
    for x in grid.points() {
        let a = t.value(x)?;
        let b = t.value(-x)?.conj();
        let s = 1.0 + a.norm();
        even = even.max((b - a).norm() / s);
        odd = odd.max((b + a).norm() / s);
    }
    Ok((even, odd))
}
