//! JSON tree form `{kind, payload, children}`.

use super::{Expr, Kind};
use crate::complex::{ComplexScalar, C64};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExprJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ExprJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Param { name: String, value: ComplexScalar },
    Exponent { exponent: i32 },
    Affine { scale: f64, shift: f64 },
    Scalar(ComplexScalar),
}

impl From<&Expr> for ExprJson {
    fn from(e: &Expr) -> Self {
        let payload = match e.kind() {
            Kind::Const(c) => Some(Payload::Scalar((*c).into())),
            Kind::Param { name, value } => Some(Payload::Param {
                name: name.to_string(),
                value: (*value).into(),
            }),
            Kind::PowI(_, n) => Some(Payload::Exponent { exponent: *n }),
            Kind::Affine { scale, shift, .. } => Some(Payload::Affine {
                scale: *scale,
                shift: *shift,
            }),
            _ => None,
        };
        ExprJson {
            kind: e.kind().name().to_string(),
            payload,
            children: e.kind().children().into_iter().map(ExprJson::from).collect(),
        }
    }
}

impl TryFrom<&ExprJson> for Expr {
    type Error = Error;

    fn try_from(j: &ExprJson) -> Result<Expr> {
        let bad = |msg: &str| Error::InvalidInput(format!("expression node `{}`: {msg}", j.kind));
        let kids: Vec<Expr> = j.children.iter().map(Expr::try_from).collect::<Result<_>>()?;
        let arity = |n: usize| {
            if kids.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("expected {n} children, found {}", kids.len())))
            }
        };
        let e = match j.kind.as_str() {
            "const" => {
                arity(0)?;
                match &j.payload {
                    Some(Payload::Scalar(c)) => Expr::constant(C64::from(*c)),
                    _ => return Err(bad("payload must be {re, im}")),
                }
            }
            "var" => {
                arity(0)?;
                Expr::x()
            }
            "param" => {
                arity(0)?;
                match &j.payload {
                    Some(Payload::Param { name, value }) => Expr::param(name, (*value).into()),
                    _ => return Err(bad("payload must be {name, value}")),
                }
            }
            "add" | "sub" | "mul" | "div" => {
                arity(2)?;
                let (a, b) = (&kids[0], &kids[1]);
                match j.kind.as_str() {
                    "add" => a.add(b),
                    "sub" => a.sub(b),
                    "mul" => a.mul(b),
                    _ => a.div(b),
                }
            }
            "powi" => {
                arity(1)?;
                match &j.payload {
                    Some(Payload::Exponent { exponent }) => kids[0].powi(*exponent),
                    _ => return Err(bad("payload must be {exponent}")),
                }
            }
            "affine" => {
                arity(1)?;
                match &j.payload {
                    Some(Payload::Affine { scale, shift }) => kids[0].affine(*scale, *shift),
                    _ => return Err(bad("payload must be {scale, shift}")),
                }
            }
            "neg" | "exp" | "sin" | "cos" | "sinh" | "cosh" | "tanh" => {
                arity(1)?;
                let a = &kids[0];
                match j.kind.as_str() {
                    "neg" => a.neg(),
                    "exp" => a.exp(),
                    "sin" => a.sin(),
                    "cos" => a.cos(),
                    "sinh" => a.sinh(),
                    "cosh" => a.cosh(),
                    _ => a.tanh(),
                }
            }
            other => return Err(Error::InvalidInput(format!("unknown expression kind `{other}`"))),
        };
        Ok(e)
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExprJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Expr, D::Error> {
        let j = ExprJson::deserialize(d)?;
        Expr::try_from(&j).map_err(serde::de::Error::custom)
    }
}
