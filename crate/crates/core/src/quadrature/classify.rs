//! Normalizability at each infinity from block-maximum envelopes on nested windows.

use crate::error::{Error, Result};
use crate::funcalc::{Expr, Tape};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Plus => "+inf",
            Side::Minus => "-inf",
        }
    }
}

/// Windows `[r0 2^w, r0 2^(w+1)]`, each cut into blocks of samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub r0: f64,
    pub windows: usize,
    pub blocks: usize,
    pub samples_per_block: usize,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            r0: 8.0,
            windows: 3,
            blocks: 8,
            samples_per_block: 8,
        }
    }
}

impl ProbeSpec {
    pub fn scaled(alpha: f64) -> Self {
        ProbeSpec {
            r0: 8.0 / alpha.abs().max(1e-6),
            ..ProbeSpec::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideClass {
    pub side: Side,
    pub normalizable: bool,
    /// Power-law decay exponents `p` (|f| ~ |x|^-p) per window, innermost first.
    pub exponents: Vec<f64>,
    /// `p` in (0.5, 1.5): square integrable, but only barely.
    pub borderline: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormClass {
    pub plus: SideClass,
    pub minus: SideClass,
}

impl NormClass {
    pub fn whole_axis(&self) -> bool {
        self.plus.normalizable && self.minus.normalizable
    }

    pub fn one_end_only(&self) -> bool {
        self.plus.normalizable != self.minus.normalizable
    }

    pub fn get(&self, side: Side) -> &SideClass {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

const LN_TINY: f64 = -745.0;

/// Power exponents of the envelope of `|f|` on successive windows.
pub fn decay_exponents(t: &Tape, side: Side, probe: &ProbeSpec) -> Result<Vec<f64>> {
    let s = side.sign();
    let nb = probe.blocks.max(2);
    let ns = probe.samples_per_block.max(1);
    let mut out = Vec::with_capacity(probe.windows);
    for w in 0..probe.windows {
        let lo = probe.r0 * 2f64.powi(w as i32);
        let hi = 2.0 * lo;
        let bw = (hi - lo) / nb as f64;
        let mut pts = Vec::with_capacity(nb);
        let mut growth = false;
        let mut all_zero = true;
        for b in 0..nb {
            let mut env: f64 = 0.0;
            for j in 0..ns {
                let x = lo + bw * (b as f64 + (j as f64 + 0.5) / ns as f64);
                let v = t.value(s * x)?;
                let m = v.norm();
                if !m.is_finite() {
                    growth = true;
                }
                env = env.max(m);
            }
            if env > 0.0 {
                all_zero = false;
            }
            let ly = if env > 0.0 { env.ln() } else { LN_TINY };
            pts.push(((lo + bw * (b as f64 + 0.5)).ln(), ly));
        }
        let p = if growth {
            f64::NEG_INFINITY
        } else if all_zero {
            f64::INFINITY
        } else {
            -slope(&pts)
        };
        out.push(p);
    }
    Ok(out)
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn classify(f: &Expr, side: Side, probe: &ProbeSpec) -> Result<SideClass> {
    classify_tape(&Tape::new(f), side, probe)
}

pub fn classify_tape(t: &Tape, side: Side, probe: &ProbeSpec) -> Result<SideClass> {
    let exponents = decay_exponents(t, side, probe)?;
    let n = exponents.len();
    let last = exponents[n - 1];
    let normalizable = last > 0.5;
    if n >= 2 && (exponents[n - 2] > 0.5) != normalizable {
        return Err(Error::Inconclusive {
            side: side.label().into(),
            detail: format!("window exponents {exponents:?} straddle 0.5"),
        });
    }
    Ok(SideClass {
        side,
        normalizable,
        borderline: last > 0.5 && last < 1.5,
        exponents,
    })
}

pub fn classify_both(f: &Expr, probe: &ProbeSpec) -> Result<NormClass> {
    let t = Tape::new(f);
    Ok(NormClass {
        plus: classify_tape(&t, Side::Plus, probe)?,
        minus: classify_tape(&t, Side::Minus, probe)?,
    })
}

/// Length of the normalizable prefix of a chain at one side, with per-member classes.
pub fn classify_chain(funcs: &[Expr], side: Side, probe: &ProbeSpec) -> Result<(usize, Vec<SideClass>)> {
    let classes: Vec<SideClass> = funcs
        .iter()
        .map(|f| classify(f, side, probe))
        .collect::<Result<_>>()?;
    let prefix = classes.iter().take_while(|c| c.normalizable).count();
    Ok((prefix, classes))
}
