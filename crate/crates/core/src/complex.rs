//! Complex scalars and their `{re, im}` wire form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Serializable complex number. Never written as a string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexScalar {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexScalar {
    fn from(c: C64) -> Self {
        ComplexScalar { re: c.re, im: c.im }
    }
}

impl From<ComplexScalar> for C64 {
    fn from(c: ComplexScalar) -> Self {
        C64::new(c.re, c.im)
    }
}

/// `#[serde(with = "crate::complex::as_object")]` for bare `C64` fields.
pub mod as_object {
    use super::{ComplexScalar, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        ComplexScalar::from(*c).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        ComplexScalar::deserialize(d).map(C64::from)
    }
}

/// Same as [`as_object`] for `Vec<C64>`.
pub mod vec_as_object {
    use super::{ComplexScalar, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<ComplexScalar> = v.iter().copied().map(ComplexScalar::from).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Vec::<ComplexScalar>::deserialize(d).map(|v| v.into_iter().map(C64::from).collect())
    }
}

/// Parses `a+bi` / `a-bi`; both parts are mandatory.
pub fn parse_complex(text: &str) -> Result<C64, String> {
    let t = text.trim();
    let body = t
        .strip_suffix('i')
        .ok_or_else(|| format!("complex literal `{t}` must end in `i` (form a+bi)"))?;
    // split at the last sign that is not an exponent sign or the leading sign
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx];
        if (c == b'+' || c == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
            split = Some(idx);
            break;
        }
    }
    let idx = split.ok_or_else(|| format!("complex literal `{t}` needs both parts (form a+bi)"))?;
    let (re, im) = body.split_at(idx);
    let re: f64 = re
        .parse()
        .map_err(|_| format!("bad real part `{re}` in `{t}`"))?;
    let im_text = if im == "+" || im == "-" {
        return Err(format!("imaginary part of `{t}` needs explicit digits"));
    } else {
        im
    };
    let im: f64 = im_text
        .parse()
        .map_err(|_| format!("bad imaginary part `{im_text}` in `{t}`"))?;
    Ok(C64::new(re, im))
}

/// Largest relative deviation with a unit floor: |a-b| / (1 + max(|a|,|b|)).
pub fn rel_dev(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}
