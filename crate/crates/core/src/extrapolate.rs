//! Polynomial (Richardson/Neville) extrapolation to a zero step.

use crate::complex::C64;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Extrapolation {
    #[serde(with = "crate::complex::as_object")]
    pub value: C64,
    /// Distance to the estimate that drops the coarsest sample.
    pub spread: f64,
}

/// Value at `h = 0` of the interpolating polynomial through `(h_i, v_i)`.
pub fn neville_zero(h: &[f64], v: &[C64]) -> Extrapolation {
    assert_eq!(h.len(), v.len());
    assert!(!h.is_empty());
    let full = neville(h, v);
    let spread = if h.len() > 1 {
        (full - neville(&h[1..], &v[1..])).norm()
    } else {
        f64::INFINITY
    };
    Extrapolation {
        value: full,
        spread,
    }
}

fn neville(h: &[f64], v: &[C64]) -> C64 {
    let n = h.len();
    let mut p = v.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            let (hi, hj) = (h[i], h[i + m]);
            p[i] = (p[i + 1] * hi - p[i] * hj) / (hi - hj);
        }
    }
    p[0]
}

/// Componentwise [`neville_zero`] for vector samples.
pub fn neville_zero_vec(h: &[f64], v: &[Vec<C64>]) -> Vec<Extrapolation> {
    let dim = v.first().map_or(0, Vec::len);
    (0..dim)
        .map(|d| {
            let col: Vec<C64> = v.iter().map(|row| row[d]).collect();
            neville_zero(h, &col)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_quadratics() {
        let f = |h: f64| C64::new(1.5 - 2.0 * h + 0.7 * h * h, 0.3 * h);
        let hs = [0.4, 0.2, 0.1];
        let vs: Vec<C64> = hs.iter().map(|&h| f(h)).collect();
        let e = neville_zero(&hs, &vs);
        assert!((e.value - C64::new(1.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn spread_tracks_remaining_error() {
        let hs = [0.1, 0.05, 0.025];
        let vs: Vec<C64> = hs.iter().map(|&h: &f64| C64::new(h.exp(), 0.0)).collect();
        let e = neville_zero(&hs, &vs);
        assert!((e.value.re - 1.0).abs() < 1e-4);
        assert!(e.spread > (e.value.re - 1.0).abs());
    }
}
