//! Compiled evaluation: one topologically ordered tape, truncated Taylor
//! series (jets) propagated through every node.

use super::{Expr, Kind};
use crate::complex::{C64, ONE, ZERO};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::Arc;

/// Denominators smaller than this at `x` are reported as poles.
pub fn pole_radius(x: f64) -> f64 {
    1e-10 * (1.0 + x.abs())
}

#[derive(Clone)]
enum Op {
    Const(C64),
    Var,
    Param(Arc<str>, C64),
    Add(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    PowI(usize, i32),
    Exp(usize),
    Sin(usize),
    Cos(usize),
    Sinh(usize),
    Cosh(usize),
    Tanh(usize),
    Affine(Box<Tape>, f64, f64),
}

#[derive(Clone)]
pub struct Tape {
    ops: Vec<Op>,
}

impl Tape {
    pub fn new(e: &Expr) -> Tape {
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut ops = Vec::new();
        // iterative post-order
        let mut stack: Vec<(Expr, bool)> = vec![(e.clone(), false)];
        while let Some((node, expanded)) = stack.pop() {
            if index.contains_key(&node.id()) {
                continue;
            }
            if !expanded {
                stack.push((node.clone(), true));
                if !matches!(node.kind(), Kind::Affine { .. }) {
                    for c in node.kind().children() {
                        if !index.contains_key(&c.id()) {
                            stack.push((c.clone(), false));
                        }
                    }
                }
                continue;
            }
            let ix = |c: &Expr| index[&c.id()];
            let op = match node.kind() {
                Kind::Const(c) => Op::Const(*c),
                Kind::Var => Op::Var,
                Kind::Param { name, value } => Op::Param(name.clone(), *value),
                Kind::Add(a, b) => Op::Add(ix(a), ix(b)),
                Kind::Mul(a, b) => Op::Mul(ix(a), ix(b)),
                Kind::Div(a, b) => Op::Div(ix(a), ix(b)),
                Kind::Neg(a) => Op::Neg(ix(a)),
                Kind::PowI(a, n) => Op::PowI(ix(a), *n),
                Kind::Exp(a) => Op::Exp(ix(a)),
                Kind::Sin(a) => Op::Sin(ix(a)),
                Kind::Cos(a) => Op::Cos(ix(a)),
                Kind::Sinh(a) => Op::Sinh(ix(a)),
                Kind::Cosh(a) => Op::Cosh(ix(a)),
                Kind::Tanh(a) => Op::Tanh(ix(a)),
                Kind::Affine {
                    inner,
                    scale,
                    shift,
                } => Op::Affine(Box::new(Tape::new(inner)), *scale, *shift),
            };
            index.insert(node.id(), ops.len());
            ops.push(op);
        }
        Tape { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn value(&self, x: f64) -> Result<C64> {
        Ok(self.eval(x, 0)?[0])
    }

    /// `(f(x), f'(x), ..., f^(order)(x))`.
    pub fn eval(&self, x: f64, order: usize) -> Result<Vec<C64>> {
        self.eval_with(x, order, &[])
    }

    /// As [`Tape::eval`] with parameter values overridden by name.
    pub fn eval_with(&self, x: f64, order: usize, overrides: &[(&str, C64)]) -> Result<Vec<C64>> {
        let mut jet = self.jet(x, order, overrides)?;
        let mut fact = 1.0;
        for (k, v) in jet.iter_mut().enumerate() {
            if k > 1 {
                fact *= k as f64;
            }
            *v *= fact;
        }
        Ok(jet)
    }

    /// Taylor coefficients f^(k)(x)/k!, k = 0..=order.
    pub fn jet(&self, x: f64, order: usize, overrides: &[(&str, C64)]) -> Result<Vec<C64>> {
        let m = order + 1;
        let mut buf = vec![ZERO; self.ops.len() * m];
        let mut out = vec![ZERO; m];
        let mut aux = vec![ZERO; m];
        for (i, op) in self.ops.iter().enumerate() {
            let (done, _) = buf.split_at(i * m);
            let get = |j: usize| &done[j * m..(j + 1) * m];
            out.iter_mut().for_each(|v| *v = ZERO);
            match op {
                Op::Const(c) => out[0] = *c,
                Op::Var => {
                    out[0] = C64::new(x, 0.0);
                    if m > 1 {
                        out[1] = ONE;
                    }
                }
                Op::Param(name, v) => {
                    out[0] = overrides
                        .iter()
                        .find(|(n, _)| *n == &**name)
                        .map(|(_, v)| *v)
                        .unwrap_or(*v);
                }
                Op::Add(a, b) => {
                    let (a, b) = (get(*a), get(*b));
                    for k in 0..m {
                        out[k] = a[k] + b[k];
                    }
                }
                Op::Mul(a, b) => mul_into(get(*a), get(*b), &mut out),
                Op::Div(a, b) => div_into(get(*a), get(*b), &mut out, x)?,
                Op::Neg(a) => {
                    let a = get(*a);
                    for k in 0..m {
                        out[k] = -a[k];
                    }
                }
                Op::PowI(a, n) => powi_into(get(*a), *n, &mut out, &mut aux, x)?,
                Op::Exp(a) => {
                    let u = get(*a);
                    out[0] = u[0].exp();
                    for n in 1..m {
                        let mut s = ZERO;
                        for j in 1..=n {
                            s += u[j] * out[n - j] * j as f64;
                        }
                        out[n] = s / n as f64;
                    }
                }
                Op::Sin(a) | Op::Cos(a) => {
                    let u = get(*a);
                    // out = sin, aux = cos
                    out[0] = u[0].sin();
                    aux[0] = u[0].cos();
                    for n in 1..m {
                        let (mut s, mut c) = (ZERO, ZERO);
                        for j in 1..=n {
                            s += u[j] * aux[n - j] * j as f64;
                            c -= u[j] * out[n - j] * j as f64;
                        }
                        out[n] = s / n as f64;
                        aux[n] = c / n as f64;
                    }
                    if matches!(op, Op::Cos(_)) {
                        out.copy_from_slice(&aux);
                    }
                }
                Op::Sinh(a) | Op::Cosh(a) => {
                    let u = get(*a);
                    out[0] = u[0].sinh();
                    aux[0] = u[0].cosh();
                    for n in 1..m {
                        let (mut s, mut c) = (ZERO, ZERO);
                        for j in 1..=n {
                            s += u[j] * aux[n - j] * j as f64;
                            c += u[j] * out[n - j] * j as f64;
                        }
                        out[n] = s / n as f64;
                        aux[n] = c / n as f64;
                    }
                    if matches!(op, Op::Cosh(_)) {
                        out.copy_from_slice(&aux);
                    }
                }
                Op::Tanh(a) => {
                    let u = get(*a);
                    // aux = 1 - tanh^2
                    out[0] = u[0].tanh();
                    aux[0] = ONE - out[0] * out[0];
                    for n in 1..m {
                        let mut s = ZERO;
                        for j in 1..=n {
                            s += u[j] * aux[n - j] * j as f64;
                        }
                        out[n] = s / n as f64;
                        let mut w = ZERO;
                        for i in 0..=n {
                            w += out[i] * out[n - i];
                        }
                        aux[n] = -w;
                    }
                }
                Op::Affine(inner, s, t) => {
                    let j = inner.jet(s * x + t, order, overrides)?;
                    let mut p = 1.0;
                    for k in 0..m {
                        out[k] = j[k] * p;
                        p *= s;
                    }
                }
            }
            buf[i * m..(i + 1) * m].copy_from_slice(&out);
        }
        let last = self.ops.len() - 1;
        Ok(buf[last * m..].to_vec())
    }
}

fn mul_into(a: &[C64], b: &[C64], out: &mut [C64]) {
    for n in 0..out.len() {
        let mut s = ZERO;
        for j in 0..=n {
            s += a[j] * b[n - j];
        }
        out[n] = s;
    }
}

fn div_into(a: &[C64], b: &[C64], out: &mut [C64], x: f64) -> Result<()> {
    let b0 = b[0];
    if b0.norm() < pole_radius(x) {
        return Err(Error::PoleProximity {
            x,
            magnitude: b0.norm(),
        });
    }
    div_unchecked(a, b, out);
    Ok(())
}

fn div_unchecked(a: &[C64], b: &[C64], out: &mut [C64]) {
    for n in 0..out.len() {
        let mut s = a[n];
        for j in 1..=n {
            s -= b[j] * out[n - j];
        }
        out[n] = s / b[0];
    }
}

fn powi_into(u: &[C64], n: i32, out: &mut [C64], aux: &mut [C64], x: f64) -> Result<()> {
    let m = out.len();
    let e = n.unsigned_abs();
    // binary exponentiation on jets
    let mut result = vec![ZERO; m];
    result[0] = ONE;
    let mut base = u.to_vec();
    let mut k = e;
    while k > 0 {
        if k & 1 == 1 {
            mul_into(&result, &base, aux);
            result.copy_from_slice(aux);
        }
        k >>= 1;
        if k > 0 {
            mul_into(&base.clone(), &base, aux);
            base.copy_from_slice(aux);
        }
    }
    if n > 0 {
        out.copy_from_slice(&result);
        return Ok(());
    }
    if u[0].norm() < pole_radius(x) {
        return Err(Error::PoleProximity {
            x,
            magnitude: u[0].norm(),
        });
    }
    let mut one = vec![ZERO; m];
    one[0] = ONE;
    div_unchecked(&one, &result, out);
    Ok(())
}
