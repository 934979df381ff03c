//! Smooth complex functions of a real variable as shared expression DAGs.
//!
//! Nodes are immutable and reference counted, so subexpressions produced by
//! differentiation are shared instead of copied. Each node caches its own
//! x-derivative.

mod json;
mod tape;

pub use json::ExprJson;
pub use tape::{pole_radius, Tape};

use crate::complex::{C64, ONE, ZERO};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone)]
pub struct Expr(Arc<Node>);

struct Node {
    id: u64,
    kind: Kind,
    derivative: OnceLock<Expr>,
}

#[derive(Clone)]
pub enum Kind {
    Const(C64),
    Var,
    Param { name: Arc<str>, value: C64 },
    Add(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    PowI(Expr, i32),
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
    Sinh(Expr),
    Cosh(Expr),
    Tanh(Expr),
    /// `inner(scale * x + shift)`
    Affine { inner: Expr, scale: f64, shift: f64 },
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Const(_) => "const",
            Kind::Var => "var",
            Kind::Param { .. } => "param",
            Kind::Add(..) => "add",
            Kind::Mul(..) => "mul",
            Kind::Div(..) => "div",
            Kind::Neg(_) => "neg",
            Kind::PowI(..) => "powi",
            Kind::Exp(_) => "exp",
            Kind::Sin(_) => "sin",
            Kind::Cos(_) => "cos",
            Kind::Sinh(_) => "sinh",
            Kind::Cosh(_) => "cosh",
            Kind::Tanh(_) => "tanh",
            Kind::Affine { .. } => "affine",
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Kind::Const(_) | Kind::Var | Kind::Param { .. } => vec![],
            Kind::Add(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => vec![a, b],
            Kind::Neg(a)
            | Kind::PowI(a, _)
            | Kind::Exp(a)
            | Kind::Sin(a)
            | Kind::Cos(a)
            | Kind::Sinh(a)
            | Kind::Cosh(a)
            | Kind::Tanh(a) => vec![a],
            Kind::Affine { inner, .. } => vec![inner],
        }
    }
}

impl Expr {
    fn raw(kind: Kind) -> Expr {
        Expr(Arc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            kind,
            derivative: OnceLock::new(),
        }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Identity of the node; shared subexpressions have equal ids.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn constant(c: C64) -> Expr {
        Expr::raw(Kind::Const(c))
    }

    pub fn real(r: f64) -> Expr {
        Expr::constant(C64::new(r, 0.0))
    }

    pub fn zero() -> Expr {
        Expr::constant(ZERO)
    }

    pub fn one() -> Expr {
        Expr::constant(ONE)
    }

    pub fn x() -> Expr {
        Expr::raw(Kind::Var)
    }

    pub fn param(name: &str, value: C64) -> Expr {
        Expr::raw(Kind::Param {
            name: Arc::from(name),
            value,
        })
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(ZERO)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(ONE)
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == ZERO => other.clone(),
            (_, Some(b)) if b == ZERO => self.clone(),
            _ => Expr::raw(Kind::Add(self.clone(), other.clone())),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => return Expr::constant(a * b),
            (Some(a), _) if a == ZERO => return Expr::zero(),
            (_, Some(b)) if b == ZERO => return Expr::zero(),
            (Some(a), _) if a == ONE => return other.clone(),
            (_, Some(b)) if b == ONE => return self.clone(),
            (Some(a), _) if a == -ONE => return other.neg(),
            (_, Some(b)) if b == -ONE => return self.neg(),
            _ => {}
        }
        // keep at most one constant factor in front
        if let (Some(a), Kind::Mul(c, rest)) = (self.as_const(), other.kind()) {
            if let Some(b) = c.as_const() {
                return Expr::constant(a * b).mul(rest);
            }
        }
        if other.as_const().is_some() && self.as_const().is_none() {
            return other.mul(self);
        }
        Expr::raw(Kind::Mul(self.clone(), other.clone()))
    }

    pub fn scale(&self, c: C64) -> Expr {
        Expr::constant(c).mul(self)
    }

    pub fn scale_re(&self, r: f64) -> Expr {
        self.scale(C64::new(r, 0.0))
    }

    pub fn div(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) if b != ZERO => Expr::constant(a / b),
            (Some(a), _) if a == ZERO => Expr::zero(),
            (_, Some(b)) if b != ZERO => self.scale(ONE / b),
            _ => Expr::raw(Kind::Div(self.clone(), other.clone())),
        }
    }

    pub fn neg(&self) -> Expr {
        match self.kind() {
            Kind::Const(c) => Expr::constant(-c),
            Kind::Neg(a) => a.clone(),
            _ => Expr::raw(Kind::Neg(self.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        match self.as_const() {
            Some(c) if c != ZERO || n > 0 => Expr::constant(c.powi(n)),
            _ => Expr::raw(Kind::PowI(self.clone(), n)),
        }
    }

    pub fn recip(&self) -> Expr {
        Expr::one().div(self)
    }

    pub fn exp(&self) -> Expr {
        self.unary(Kind::Exp, |c| c.exp())
    }

    pub fn sin(&self) -> Expr {
        self.unary(Kind::Sin, |c| c.sin())
    }

    pub fn cos(&self) -> Expr {
        self.unary(Kind::Cos, |c| c.cos())
    }

    pub fn sinh(&self) -> Expr {
        self.unary(Kind::Sinh, |c| c.sinh())
    }

    pub fn cosh(&self) -> Expr {
        self.unary(Kind::Cosh, |c| c.cosh())
    }

    pub fn tanh(&self) -> Expr {
        self.unary(Kind::Tanh, |c| c.tanh())
    }

    fn unary(&self, make: fn(Expr) -> Kind, fold: fn(C64) -> C64) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(fold(c)),
            None => Expr::raw(make(self.clone())),
        }
    }

    /// `self(scale * x + shift)`.
    pub fn affine(&self, scale: f64, shift: f64) -> Expr {
        if scale == 1.0 && shift == 0.0 {
            return self.clone();
        }
        if !self.depends_on_x() {
            return self.clone();
        }
        if let Kind::Affine {
            inner,
            scale: s2,
            shift: t2,
        } = self.kind()
        {
            // f(s2 (s x + t) + t2)
            return inner.affine(s2 * scale, s2 * shift + t2);
        }
        Expr::raw(Kind::Affine {
            inner: self.clone(),
            scale,
            shift,
        })
    }

    /// `self(-x)`.
    pub fn reflect(&self) -> Expr {
        self.affine(-1.0, 0.0)
    }

    /// Complex conjugate expression; parameters are conjugated as well.
    pub fn conj(&self) -> Expr {
        let mut memo = HashMap::new();
        self.map_nodes(&mut memo, &mut |e| match e.kind() {
            Kind::Const(c) => Some(Expr::constant(c.conj())),
            Kind::Param { name, value } => Some(Expr::param(name, value.conj())),
            _ => None,
        })
    }

    /// Structural walk that rebuilds the graph, replacing leaves via `leaf`.
    fn map_nodes(
        &self,
        memo: &mut HashMap<u64, Expr>,
        leaf: &mut dyn FnMut(&Expr) -> Option<Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.id()) {
            return e.clone();
        }
        let out = if let Some(rep) = leaf(self) {
            rep
        } else {
            match self.kind() {
                Kind::Const(_) | Kind::Var | Kind::Param { .. } => self.clone(),
                Kind::Add(a, b) => a.map_nodes(memo, leaf).add(&b.map_nodes(memo, leaf)),
                Kind::Mul(a, b) => a.map_nodes(memo, leaf).mul(&b.map_nodes(memo, leaf)),
                Kind::Div(a, b) => a.map_nodes(memo, leaf).div(&b.map_nodes(memo, leaf)),
                Kind::Neg(a) => a.map_nodes(memo, leaf).neg(),
                Kind::PowI(a, n) => a.map_nodes(memo, leaf).powi(*n),
                Kind::Exp(a) => a.map_nodes(memo, leaf).exp(),
                Kind::Sin(a) => a.map_nodes(memo, leaf).sin(),
                Kind::Cos(a) => a.map_nodes(memo, leaf).cos(),
                Kind::Sinh(a) => a.map_nodes(memo, leaf).sinh(),
                Kind::Cosh(a) => a.map_nodes(memo, leaf).cosh(),
                Kind::Tanh(a) => a.map_nodes(memo, leaf).tanh(),
                Kind::Affine {
                    inner,
                    scale,
                    shift,
                } => inner.map_nodes(memo, leaf).affine(*scale, *shift),
            }
        };
        memo.insert(self.id(), out.clone());
        out
    }

    /// Copy with every occurrence of parameter `name` set to `value` (still symbolic).
    pub fn with_param(&self, name: &str, value: C64) -> Expr {
        let mut memo = HashMap::new();
        self.map_nodes(&mut memo, &mut |e| match e.kind() {
            Kind::Param { name: n, .. } if &**n == name => Some(Expr::param(name, value)),
            _ => None,
        })
    }

    /// Copy with parameter `name` replaced by a constant, enabling folding.
    pub fn freeze_param(&self, name: &str) -> Expr {
        let mut memo = HashMap::new();
        self.map_nodes(&mut memo, &mut |e| match e.kind() {
            Kind::Param { name: n, value } if &**n == name => Some(Expr::constant(*value)),
            _ => None,
        })
    }

    /// Replace the variable `x` by an arbitrary expression.
    pub fn compose(&self, arg: &Expr) -> Expr {
        let mut memo = HashMap::new();
        let arg = arg.clone();
        self.map_nodes(&mut memo, &mut |e| match e.kind() {
            Kind::Var => Some(arg.clone()),
            Kind::Affine {
                inner,
                scale,
                shift,
            } => Some(inner.compose(&arg.scale_re(*scale).add(&Expr::real(*shift)))),
            _ => None,
        })
    }

    pub fn depends_on_x(&self) -> bool {
        let mut seen = HashMap::new();
        self.any_node(&mut seen, &|k| matches!(k, Kind::Var))
    }

    pub fn contains_param(&self, name: &str) -> bool {
        let mut seen = HashMap::new();
        self.any_node(&mut seen, &|k| matches!(k, Kind::Param { name: n, .. } if &**n == name))
    }

    /// Names and current values of all parameters, sorted by name.
    pub fn params(&self) -> Vec<(String, C64)> {
        let mut out: Vec<(String, C64)> = Vec::new();
        let mut seen = HashMap::new();
        self.collect_params(&mut seen, &mut out);
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out.dedup_by(|a, b| a.0 == b.0);
        out
    }

    fn collect_params(&self, seen: &mut HashMap<u64, ()>, out: &mut Vec<(String, C64)>) {
        if seen.insert(self.id(), ()).is_some() {
            return;
        }
        if let Kind::Param { name, value } = self.kind() {
            out.push((name.to_string(), *value));
        }
        for c in self.kind().children() {
            c.collect_params(seen, out);
        }
    }

    fn any_node(&self, seen: &mut HashMap<u64, bool>, pred: &dyn Fn(&Kind) -> bool) -> bool {
        if let Some(v) = seen.get(&self.id()) {
            return *v;
        }
        let v = pred(self.kind()) || self.kind().children().into_iter().any(|c| c.any_node(seen, pred));
        seen.insert(self.id(), v);
        v
    }

    /// Number of distinct nodes.
    pub fn node_count(&self) -> usize {
        let mut seen = HashMap::new();
        self.any_node(&mut seen, &|_| false);
        seen.len()
    }

    /// Symbolic d/dx. Cached per node.
    pub fn derivative(&self) -> Expr {
        if let Some(d) = self.0.derivative.get() {
            return d.clone();
        }
        let d = match self.kind() {
            Kind::Const(_) | Kind::Param { .. } => Expr::zero(),
            Kind::Var => Expr::one(),
            Kind::Add(a, b) => a.derivative().add(&b.derivative()),
            Kind::Mul(a, b) => a.derivative().mul(b).add(&a.mul(&b.derivative())),
            Kind::Div(a, b) => {
                // (a' - q b') / b with q = a/b reused
                a.derivative().sub(&self.mul(&b.derivative())).div(b)
            }
            Kind::Neg(a) => a.derivative().neg(),
            Kind::PowI(a, n) => a
                .powi(n - 1)
                .mul(&a.derivative())
                .scale_re(*n as f64),
            Kind::Exp(a) => self.mul(&a.derivative()),
            Kind::Sin(a) => a.cos().mul(&a.derivative()),
            Kind::Cos(a) => a.sin().mul(&a.derivative()).neg(),
            Kind::Sinh(a) => a.cosh().mul(&a.derivative()),
            Kind::Cosh(a) => a.sinh().mul(&a.derivative()),
            Kind::Tanh(a) => Expr::one().sub(&self.powi(2)).mul(&a.derivative()),
            Kind::Affine {
                inner,
                scale,
                shift,
            } => inner.derivative().affine(*scale, *shift).scale_re(*scale),
        };
        let _ = self.0.derivative.set(d.clone());
        self.0.derivative.get().cloned().unwrap_or(d)
    }

    /// m-th symbolic derivative.
    pub fn nth_derivative(&self, m: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..m {
            e = e.derivative();
        }
        e
    }

    /// Symbolic d/dp for the parameter named `p`.
    pub fn param_derivative(&self, p: &str) -> Result<Expr> {
        if !self.contains_param(p) {
            return Err(Error::UnknownParameter(p.to_string()));
        }
        let mut memo = HashMap::new();
        Ok(self.pd(p, &mut memo))
    }

    fn pd(&self, p: &str, memo: &mut HashMap<u64, Expr>) -> Expr {
        if let Some(e) = memo.get(&self.id()) {
            return e.clone();
        }
        let d = match self.kind() {
            Kind::Const(_) | Kind::Var => Expr::zero(),
            Kind::Param { name, .. } => {
                if &**name == p {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Add(a, b) => a.pd(p, memo).add(&b.pd(p, memo)),
            Kind::Mul(a, b) => a.pd(p, memo).mul(b).add(&a.mul(&b.pd(p, memo))),
            Kind::Div(a, b) => {
                let db = b.pd(p, memo);
                a.pd(p, memo).sub(&self.mul(&db)).div(b)
            }
            Kind::Neg(a) => a.pd(p, memo).neg(),
            Kind::PowI(a, n) => a.powi(n - 1).mul(&a.pd(p, memo)).scale_re(*n as f64),
            Kind::Exp(a) => self.mul(&a.pd(p, memo)),
            Kind::Sin(a) => a.cos().mul(&a.pd(p, memo)),
            Kind::Cos(a) => a.sin().mul(&a.pd(p, memo)).neg(),
            Kind::Sinh(a) => a.cosh().mul(&a.pd(p, memo)),
            Kind::Cosh(a) => a.sinh().mul(&a.pd(p, memo)),
            Kind::Tanh(a) => Expr::one().sub(&self.powi(2)).mul(&a.pd(p, memo)),
            Kind::Affine {
                inner,
                scale,
                shift,
            } => inner.pd(p, memo).affine(*scale, *shift),
        };
        memo.insert(self.id(), d.clone());
        d
    }

    /// `(f(x), f'(x), ..., f^(order)(x))`.
    pub fn eval(&self, x: f64, order: usize) -> Result<Vec<C64>> {
        Tape::new(self).eval(x, order)
    }

    pub fn value(&self, x: f64) -> Result<C64> {
        Tape::new(self).value(x)
    }

    /// Values on a list of points, compiled once.
    pub fn sample(&self, xs: &[f64]) -> Result<Vec<C64>> {
        let t = Tape::new(self);
        xs.iter().map(|&x| t.value(x)).collect()
    }
}

/// Numeric equality at 32 Chebyshev points of `[lo, hi]`, relative tolerance 1e-9.
pub fn numerically_equal(a: &Expr, b: &Expr, lo: f64, hi: f64) -> Result<bool> {
    Ok(max_deviation(a, b, lo, hi, 32)? <= 1e-9)
}

/// Largest |a-b| / (1 + max(|a|,|b|)) over `n` Chebyshev points.
pub fn max_deviation(a: &Expr, b: &Expr, lo: f64, hi: f64, n: usize) -> Result<f64> {
    let ta = Tape::new(a);
    let tb = Tape::new(b);
    let mut worst: f64 = 0.0;
    for x in chebyshev_points(lo, hi, n) {
        let d = crate::complex::rel_dev(ta.value(x)?, tb.value(x)?);
        worst = worst.max(d);
    }
    Ok(worst)
}

pub fn chebyshev_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let t = ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * t
        })
        .collect()
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $call:ident) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$call(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$call(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$call(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$call(self, &rhs)
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::$call(&self, &Expr::real(rhs))
            }
        }
        impl std::ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::$call(self, &Expr::real(rhs))
            }
        }
        impl std::ops::$tr<C64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: C64) -> Expr {
                Expr::$call(&self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<C64> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: C64) -> Expr {
                Expr::$call(self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$call(&Expr::real(self), &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$call(&Expr::real(self), rhs)
            }
        }
        impl std::ops::$tr<Expr> for C64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$call(&Expr::constant(self), &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for C64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$call(&Expr::constant(self), rhs)
            }
        }
    };
}

bin_op!(Add, add, add);
bin_op!(Sub, sub, sub);
bin_op!(Mul, mul, mul);
bin_op!(Div, div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<f64> for Expr {
    fn from(r: f64) -> Expr {
        Expr::real(r)
    }
}

impl From<C64> for Expr {
    fn from(c: C64) -> Expr {
        Expr::constant(c)
    }
}

fn fmt_c(c: C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{}i", c.im)
    } else {
        write!(f, "({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::Const(c) => fmt_c(*c, f),
            Kind::Var => write!(f, "x"),
            Kind::Param { name, .. } => write!(f, "{name}"),
            Kind::Add(a, b) => write!(f, "({a} + {b})"),
            Kind::Mul(a, b) => write!(f, "{a}*{b}"),
            Kind::Div(a, b) => write!(f, "({a})/({b})"),
            Kind::Neg(a) => write!(f, "-({a})"),
            Kind::PowI(a, n) => write!(f, "({a})^{n}"),
            Kind::Exp(a) => write!(f, "exp({a})"),
            Kind::Sin(a) => write!(f, "sin({a})"),
            Kind::Cos(a) => write!(f, "cos({a})"),
            Kind::Sinh(a) => write!(f, "sinh({a})"),
            Kind::Cosh(a) => write!(f, "cosh({a})"),
            Kind::Tanh(a) => write!(f, "tanh({a})"),
            Kind::Affine {
                inner,
                scale,
                shift,
            } => write!(f, "[{inner}]@({scale}*x{shift:+})"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests;
