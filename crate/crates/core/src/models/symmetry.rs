use super::{probe_functions, ModelBundle};
use crate::complex::{ComplexScalar, C64, ZERO};
use crate::error::{Error, Result};
use crate::funcalc::{Expr, Tape};
use crate::operators::{
    annihilation_residual, intertwining_residual, operator_deviation, sample, GridSpec,
};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct EigenCheck {
    pub k: f64,
    pub expected: ComplexScalar,
    /// Least-squares ratio `⟨ψ, Rψ⟩ / ⟨ψ, ψ⟩` on the grid.
    pub measured: ComplexScalar,
    /// `max |Rψ - μψ| / max |μψ|`.
    pub relative_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroModeCheck {
    pub label: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub order: usize,
    /// `R h⁻ - h⁻ R` on probes.
    pub commutator_residual: f64,
    /// `R^t + R`, coefficient-wise.
    pub antisymmetry_deviation: f64,
    pub eigen: Vec<EigenCheck>,
    pub zero_modes: Vec<ZeroModeCheck>,
    /// Relative size of `(q⁺ψ(x;0))'`.
    pub zero_energy_constancy: Option<f64>,
    /// `Rθ + θR` on probes, `θf(x) = f(-x)*`; PT configurations only.
    pub pt_anticommutator: Option<f64>,
}

fn pt(f: &Expr) -> Expr {
    f.reflect().conj()
}

pub fn symmetry_check(bundle: &ModelBundle, k_values: &[f64], grid: &GridSpec) -> Result<SymmetryReport> {
    let r = bundle
        .symmetry_op
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no symmetry operator", bundle.name)))?;
    let probes = probe_functions();
    let commutator = intertwining_residual(&bundle.h_minus, &bundle.h_minus, r, &probes, grid)?;
    let antisym = operator_deviation(&r.transpose(), &r.scale(C64::new(-1.0, 0.0)), grid)?;
    let xs = grid.points();
    let mut eigen = Vec::new();
    if let Some(fam) = &bundle.continuum {
        for &k in k_values {
            let psi = fam.psi_at(C64::new(k, 0.0));
            let mu = bundle.symmetry_eigenvalue(k);
            let rp = sample(&r.apply(&psi), &xs)?;
            let pv = sample(&psi, &xs)?;
            let (mut num, mut den) = (ZERO, 0.0);
            let (mut dev, mut scale): (f64, f64) = (0.0, 0.0);
            for (a, p) in rp.iter().zip(&pv) {
                num += p.conj() * a;
                den += p.norm_sqr();
                dev = dev.max((a - mu * p).norm());
                scale = scale.max((mu * p).norm());
            }
            eigen.push(EigenCheck {
                k,
                expected: mu.into(),
                measured: (num / den).into(),
                relative_residual: dev / scale.max(f64::MIN_POSITIVE),
            });
        }
    }
    let mut zero_modes = Vec::new();
    for (i, e) in bundle.kernel_plus.entries.iter().enumerate() {
        zero_modes.push(ZeroModeCheck {
            label: format!("kernel_plus[{i}]"),
            residual: annihilation_residual(r, &e.expr, grid)?,
        });
    }
    let mut constancy = None;
    if let Some(z) = &bundle.zero_energy {
        zero_modes.push(ZeroModeCheck {
            label: "psi(x;0)".into(),
            residual: annihilation_residual(r, z, grid)?,
        });
        let g = bundle.q_plus.apply(z);
        let t = Tape::new(&g);
        let (mut dmax, mut vmax): (f64, f64) = (0.0, 0.0);
        for &x in &xs {
            let j = t.eval(x, 1)?;
            vmax = vmax.max(j[0].norm());
            dmax = dmax.max(j[1].norm());
        }
        constancy = Some(dmax / vmax.max(f64::MIN_POSITIVE));
    }
    let pt_anticommutator = if bundle.is_pt_configuration() {
        let mut worst: f64 = 0.0;
        for f in &probes {
            let a = r.apply(&pt(f));
            let b = pt(&r.apply(f)).neg();
            worst = worst.max(crate::operators::relative_residual(&a, &b, grid)?);
        }
        Some(worst)
    } else {
        None
    };
    Ok(SymmetryReport {
        order: r.order(),
        commutator_residual: commutator,
        antisymmetry_deviation: antisym,
        eigen,
        zero_modes,
        zero_energy_constancy: constancy,
        pt_anticommutator,
    })
}
