//! Globally adaptive Gauss-Kronrod (7/15) for vector-valued complex integrands.

use super::QuadratureSpec;
use crate::complex::{C64, ZERO};
use crate::error::Result;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Debug)]
pub struct Estimate {
    pub value: Vec<C64>,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    depth: usize,
    value: Vec<C64>,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error && self.a == o.a
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error
            .total_cmp(&o.error)
            .then(o.a.total_cmp(&self.a))
    }
}

fn nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    for i in 0..7 {
        x[i] = c - h * XGK[i];
        x[14 - i] = c + h * XGK[i];
    }
    x[7] = c;
    x
}

fn rule(vals: &[Vec<C64>], a: f64, b: f64, dim: usize) -> (Vec<C64>, f64) {
    let h = 0.5 * (b - a);
    let mut k = vec![ZERO; dim];
    let mut g = vec![ZERO; dim];
    for i in 0..7 {
        for d in 0..dim {
            k[d] += (vals[i][d] + vals[14 - i][d]) * WGK[i];
        }
        if i % 2 == 1 {
            for d in 0..dim {
                g[d] += (vals[i][d] + vals[14 - i][d]) * WG[i / 2];
            }
        }
    }
    for d in 0..dim {
        k[d] += vals[7][d] * WGK[7];
        g[d] += vals[7][d] * WG[3];
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        k[d] *= h;
        g[d] *= h;
        err = err.max((k[d] - g[d]).norm());
    }
    (k, err)
}

fn eval_piece<F>(f: &F, a: f64, b: f64, dim: usize, depth: usize, par: bool) -> Result<Piece>
where
    F: Fn(f64) -> Result<Vec<C64>> + Sync,
{
    let xs = nodes(a, b);
    let vals: Vec<Vec<C64>> = if par {
        let r: Vec<Result<Vec<C64>>> = xs.par_iter().map(|&x| f(x)).collect();
        r.into_iter().collect::<Result<_>>()?
    } else {
        xs.iter().map(|&x| f(x)).collect::<Result<_>>()?
    };
    let (value, error) = rule(&vals, a, b, dim);
    let error = if value.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        f64::INFINITY
    } else {
        error
    };
    Ok(Piece {
        a,
        b,
        depth,
        value,
        error,
    })
}

/// Integrate over `[a, b]`, starting from `n_init` equal pieces.
pub fn integrate<F>(f: &F, a: f64, b: f64, dim: usize, n_init: usize, spec: &QuadratureSpec, par: bool) -> Result<Estimate>
where
    F: Fn(f64) -> Result<Vec<C64>> + Sync,
{
    let n_init = n_init.max(1);
    let mut heap = BinaryHeap::new();
    let h = (b - a) / n_init as f64;
    for i in 0..n_init {
        let lo = a + h * i as f64;
        let hi = if i + 1 == n_init { b } else { lo + h };
        heap.push(eval_piece(f, lo, hi, dim, 0, par)?);
    }
    let mut evaluations = 15 * n_init;
    let budget = 2000 + 50 * n_init;
    let mut converged = false;
    // running sums drive the stopping test; the reported totals are re-summed in order
    let (mut run, mut run_err) = totals(&heap, dim);
    for _ in 0..budget {
        let scale = run.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if run_err <= spec.abs_tol.max(spec.rel_tol * scale) {
            converged = true;
            break;
        }
        let worst = match heap.peek() {
            Some(p) if p.depth < spec.max_levels => heap.pop(),
            _ => None,
        };
        let Some(p) = worst else { break };
        let m = 0.5 * (p.a + p.b);
        let l = eval_piece(f, p.a, m, dim, p.depth + 1, par)?;
        let r = eval_piece(f, m, p.b, dim, p.depth + 1, par)?;
        for d in 0..dim {
            run[d] += l.value[d] + r.value[d] - p.value[d];
        }
        run_err = if p.error.is_finite() {
            run_err + l.error + r.error - p.error
        } else {
            totals_err(&heap) + l.error + r.error
        };
        heap.push(l);
        heap.push(r);
        evaluations += 30;
    }
    let (value, error) = totals(&heap, dim);
    if !converged {
        let scale = value.iter().map(|v| v.norm()).fold(0.0, f64::max);
        converged = error <= spec.abs_tol.max(spec.rel_tol * scale);
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
        converged,
    })
}

// summed in interval order so the result does not depend on heap layout
fn totals(heap: &BinaryHeap<Piece>, dim: usize) -> (Vec<C64>, f64) {
    let mut pieces: Vec<&Piece> = heap.iter().collect();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut total = vec![ZERO; dim];
    let mut err = 0.0;
    for p in pieces {
        for d in 0..dim {
            total[d] += p.value[d];
        }
        err += p.error;
    }
    (total, err)
}

fn totals_err(heap: &BinaryHeap<Piece>) -> f64 {
    heap.iter().map(|p| p.error).sum()
}
