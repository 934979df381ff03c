//! Per-level normalizability counts of both partners and the identities linking them.

use crate::complex::{ComplexScalar, C64};
use crate::darboux::{BasisEntry, TransformationBasis};
use crate::error::{Error, Result};
use crate::funcalc::{Expr, Tape};
use crate::models::ModelBundle;
use crate::operators::{DiffOperator, JordanChain};
use crate::quadrature::{classify_both, NormClass, ProbeSpec, Side};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct MemberClass {
    pub chain_position: usize,
    pub plus: bool,
    pub minus: bool,
    pub exponents_plus: Vec<f64>,
    pub exponents_minus: Vec<f64>,
}

impl MemberClass {
    fn new(pos: usize, c: &NormClass) -> Self {
        MemberClass {
            chain_position: pos,
            plus: c.plus.normalizable,
            minus: c.minus.normalizable,
            exponents_plus: c.plus.exponents.clone(),
            exponents_minus: c.minus.exponents.clone(),
        }
    }

    fn side(&self, s: Side) -> bool {
        match s {
            Side::Plus => self.plus,
            Side::Minus => self.minus,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelCensus {
    pub lambda: ComplexScalar,
    /// Number of `ker q⁻` members at the level.
    pub k: usize,
    /// `φ⁻` members normalizable at `+∞` / `-∞` (normalizable prefix of each cell).
    pub k_up_plus: usize,
    pub k_down_plus: usize,
    /// Same for the `φ⁺` basis of `ker q⁺`.
    pub k_up_minus: usize,
    pub k_down_minus: usize,
    /// Whole-axis normalizable members of the `φ⁻` / `φ⁺` bases.
    pub n_plus: usize,
    pub n_minus: usize,
    /// Members normalizable at exactly one end, counted on the `φ⁻` basis.
    pub n_zero: usize,
    /// Same count on the `φ⁺` basis; equal to `n_zero` whenever the duality holds.
    pub n_zero_dual: usize,
    /// Whole-axis normalizable chain lengths of `h⁺` / `h⁻` at the level.
    pub nu_plus: usize,
    pub nu_minus: usize,
    /// The level sits at the continuum threshold `λ = 0`.
    pub at_threshold: bool,
    /// Side-normalizable members form a prefix of every cell.
    pub prefix_property: bool,
    /// `φ⁻_j` normalizable at a side iff `φ⁺_{k-j-1}` is not.
    pub duality: bool,
    pub members_minus: Vec<MemberClass>,
    pub members_plus: Vec<MemberClass>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    OutOfScope,
}

impl Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub census: LevelCensus,
    pub index_theorem: Verdict,
    pub corollary4: Verdict,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub levels: Vec<LevelReport>,
}

impl IndexReport {
    /// No level violates either identity.
    pub fn holds(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.index_theorem != Verdict::Violated && l.corollary4 != Verdict::Violated)
    }
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

/// Entries at `λ`, split into cells (a new cell starts at chain position 0).
fn cells_at(basis: &TransformationBasis, lambda: C64) -> Vec<Vec<&BasisEntry>> {
    let mut at: Vec<&BasisEntry> = basis.entries.iter().filter(|e| close(e.lambda, lambda)).collect();
    at.sort_by_key(|e| e.chain_position);
    let mut cells: Vec<Vec<&BasisEntry>> = Vec::new();
    for e in at {
        match cells.iter_mut().find(|c| c.len() == e.chain_position) {
            Some(c) => c.push(e),
            None => cells.push(vec![e]),
        }
    }
    cells
}

struct Classified {
    cells: Vec<Vec<MemberClass>>,
}

impl Classified {
    fn new(cells: &[Vec<&BasisEntry>], probe: &ProbeSpec) -> Result<Self> {
        let cells = cells
            .iter()
            .map(|c| {
                c.iter()
                    .map(|e| Ok(MemberClass::new(e.chain_position, &classify_both(&e.expr, probe)?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Classified { cells })
    }

    fn all(&self) -> impl Iterator<Item = &MemberClass> {
        self.cells.iter().flatten()
    }

    fn prefix(&self, s: Side) -> usize {
        self.cells
            .iter()
            .map(|c| c.iter().take_while(|m| m.side(s)).count())
            .sum()
    }

    fn count(&self, s: Side) -> usize {
        self.all().filter(|m| m.side(s)).count()
    }

    fn whole(&self) -> usize {
        self.all().filter(|m| m.plus && m.minus).count()
    }

    fn one_end(&self) -> usize {
        self.all().filter(|m| m.plus != m.minus).count()
    }

    /// Longest run of whole-axis members from the head of each cell, summed.
    fn whole_prefix(&self) -> usize {
        self.cells
            .iter()
            .map(|c| c.iter().take_while(|m| m.plus && m.minus).count())
            .sum()
    }
}

/// Whole-axis normalizable prefix lengths of the given chains at `λ`, summed.
fn chain_nu(chains: &[JordanChain], lambda: C64, probe: &ProbeSpec) -> Result<usize> {
    let mut nu = 0;
    for c in chains.iter().filter(|c| close(c.eigenvalue, lambda)) {
        for f in &c.functions {
            if !classify_both(f, probe)?.whole_axis() {
                break;
            }
            nu += 1;
        }
    }
    Ok(nu)
}

/// Probe windows scaled to the bundle grid (`±12/α`).
pub fn probe_for(bundle: &ModelBundle) -> ProbeSpec {
    let half = 0.5 * (bundle.grid.x_max - bundle.grid.x_min);
    ProbeSpec::scaled(12.0 / half)
}

pub fn census(bundle: &ModelBundle, lambda: C64, probe: &ProbeSpec) -> Result<LevelCensus> {
    if lambda.im == 0.0 && lambda.re > 0.0 {
        return Err(Error::IneligibleLevel { lambda: lambda.into() });
    }
    let minus_cells = cells_at(&bundle.kernel_minus, lambda);
    let plus_cells = cells_at(&bundle.kernel_plus, lambda);
    let cm = Classified::new(&minus_cells, probe)?;
    let cp = Classified::new(&plus_cells, probe)?;
    let k = cm.all().count();
    let prefix_property = [Side::Plus, Side::Minus]
        .iter()
        .all(|&s| cm.prefix(s) == cm.count(s) && cp.prefix(s) == cp.count(s));
    let mm: Vec<MemberClass> = cm.all().cloned().collect();
    let mp: Vec<MemberClass> = cp.all().cloned().collect();
    let duality = mm.len() == mp.len()
        && mm.iter().enumerate().all(|(j, m)| {
            let d = &mp[mp.len() - 1 - j];
            m.plus != d.plus && m.minus != d.minus
        });
    // the kernels themselves are chains of h∓ at this level
    let nu_minus = chain_nu(&bundle.chains, lambda, probe)?.max(cp.whole_prefix());
    let nu_plus = chain_nu(&bundle.plus_chains, lambda, probe)?.max(cm.whole_prefix());
    let at_threshold = lambda.norm() == 0.0
        && (bundle.continuum.is_some() || bundle.threshold_state.is_some());
    Ok(LevelCensus {
        lambda: lambda.into(),
        k,
        k_up_plus: cm.prefix(Side::Plus),
        k_down_plus: cm.prefix(Side::Minus),
        k_up_minus: cp.prefix(Side::Plus),
        k_down_minus: cp.prefix(Side::Minus),
        n_plus: cm.whole(),
        n_minus: cp.whole(),
        n_zero: cm.one_end(),
        n_zero_dual: cp.one_end(),
        nu_plus,
        nu_minus,
        at_threshold,
        prefix_property,
        duality,
        members_minus: mm,
        members_plus: mp,
    })
}

/// `ν₊ - n₊ = ν₋ - n₋`, and both vanish when `n₀ > 0`.
pub fn index_theorem_check(c: &LevelCensus) -> Verdict {
    if c.at_threshold {
        return Verdict::OutOfScope;
    }
    let lhs = c.nu_plus as i64 - c.n_plus as i64;
    let rhs = c.nu_minus as i64 - c.n_minus as i64;
    let mut ok = lhs == rhs;
    if c.n_zero > 0 {
        ok &= lhs == 0;
    }
    Verdict::from(ok)
}

/// `k = max(k⁺↑, k⁺↓) + ν₋ = |k⁻↑ - k⁻↓| + ν₋`, under the hypothesis `ν₊ = 0`.
pub fn corollary4_check(c: &LevelCensus) -> Result<Verdict> {
    if c.nu_plus > 0 {
        return Err(Error::HypothesisUnmet { nu_plus: c.nu_plus });
    }
    if c.at_threshold {
        return Ok(Verdict::OutOfScope);
    }
    let a = c.k_up_plus.max(c.k_down_plus) + c.nu_minus;
    let b = c.k_up_minus.abs_diff(c.k_down_minus) + c.nu_minus;
    Ok(Verdict::from(c.k == a && c.k == b))
}

/// Census and both verdicts at every level carried by the kernels.
pub fn index_report(bundle: &ModelBundle) -> Result<IndexReport> {
    let probe = probe_for(bundle);
    let mut levels = Vec::new();
    for lambda in bundle.levels() {
        let census = census(bundle, lambda, &probe)?;
        let mut notes = Vec::new();
        if census.at_threshold {
            notes.push("level at the continuum threshold: outside the theorem's scope".into());
        }
        if !census.prefix_property {
            notes.push("normalizable members do not form a prefix of their cell".into());
        }
        if !census.duality {
            notes.push("kernel duality between the two bases fails".into());
        }
        let corollary4 = match corollary4_check(&census) {
            Ok(v) => v,
            Err(Error::HypothesisUnmet { nu_plus }) => {
                notes.push(format!("corollary hypothesis unmet (nu_plus = {nu_plus})"));
                Verdict::OutOfScope
            }
            Err(e) => return Err(e),
        };
        levels.push(LevelReport {
            index_theorem: index_theorem_check(&census),
            corollary4,
            census,
            notes,
        });
    }
    Ok(IndexReport { levels })
}

#[derive(Clone, Debug, Serialize)]
pub struct IntertwinedClass {
    pub before: [bool; 2],
    pub after: [bool; 2],
}

/// Side normalizability of `f` and `q f`; `q` should preserve it side by side.
pub fn intertwined_normalizability(q: &DiffOperator, funcs: &[Expr], probe: &ProbeSpec) -> Result<Vec<IntertwinedClass>> {
    funcs
        .iter()
        .map(|f| {
            let a = classify_both(f, probe)?;
            let b = classify_both(&q.apply(f), probe)?;
            Ok(IntertwinedClass {
                before: [a.plus.normalizable, a.minus.normalizable],
                after: [b.plus.normalizable, b.minus.normalizable],
            })
        })
        .collect()
}

/// Sampled membership test for the admissible potential class at both ends.
#[derive(Clone, Debug, Serialize)]
pub struct ClassKReport {
    /// Constant added to `V` (free-particle-based potentials vanish at infinity).
    pub shift: f64,
    pub r0: f64,
    /// `min Re V` beyond `R₀`, per side.
    pub min_re: [f64; 2],
    /// `max |Im V| / Re V` on the innermost and outermost windows, per side.
    pub im_ratio: [[f64; 2]; 2],
    /// Window maxima of the condition-4 expression, per side.
    pub window_max: [[f64; 3]; 2],
    pub positive_real_part: bool,
    pub soft_imaginary_part: bool,
    pub bounded_condition4: bool,
}

impl ClassKReport {
    pub fn member(&self) -> bool {
        self.positive_real_part && self.soft_imaginary_part && self.bounded_condition4
    }
}

pub fn class_k_check(v: &Expr, shift: f64, r0: f64) -> Result<ClassKReport> {
    let t = Tape::new(v);
    let n = 400;
    let mut min_re = [f64::INFINITY; 2];
    let mut im_ratio = [[0.0; 2]; 2];
    let mut window_max = [[0.0f64; 3]; 2];
    for (si, s) in [1.0, -1.0].into_iter().enumerate() {
        let mut integral = 0.0;
        let mut prev: Option<f64> = None;
        let mut ratio = [0.0f64; 3];
        for w in 0..3 {
            let lo = r0 * 2f64.powi(w);
            let h = lo / n as f64;
            for i in 0..=n {
                let x = lo + h * i as f64;
                let j = t.eval(s * x, 2)?;
                let val = j[0] + shift;
                let mag = val.norm();
                min_re[si] = min_re[si].min(val.re);
                ratio[w as usize] = ratio[w as usize].max(val.im.abs() / val.re.max(f64::MIN_POSITIVE));
                let root = mag.sqrt();
                if let Some(p) = prev {
                    integral += 0.5 * h * (p + root);
                }
                prev = Some(root);
                let e = integral * integral
                    * (j[1].norm_sqr() / mag.powi(3) + j[2].norm() / (mag * mag));
                window_max[si][w as usize] = window_max[si][w as usize].max(e);
            }
            // the next window starts where this one ended
            prev = None;
        }
        im_ratio[si] = [ratio[0], ratio[2]];
    }
    let positive_real_part = min_re.iter().all(|&m| m > 0.0);
    let soft_imaginary_part = im_ratio.iter().all(|r| r[1] <= r[0] && r[1] < 1e-2);
    let bounded_condition4 = window_max
        .iter()
        .all(|w| w.iter().all(|v| v.is_finite()) && w[2] <= w[1] * (1.0 + 1e-9) + 1e-12);
    Ok(ClassKReport {
        shift,
        r0,
        min_re,
        im_ratio,
        window_max,
        positive_real_part,
        soft_imaginary_part,
        bounded_condition4,
    })
}
