//! S-matrices on zero-mode bases, Jordan structure by rank filtration,
//! strip-off bookkeeping, the closure polynomial and triangle transforms.

use crate::complex::{ComplexScalar, C64, ONE, ZERO};
use crate::error::{CellList, Error, Result};
use crate::funcalc::{Expr, Tape};
use crate::operators::{GridSpec, Hamiltonian, JordanChain};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type CMatrix = DMatrix<C64>;

/// `h φ_n = Σ_m S_nm φ_m`.
#[derive(Clone, Debug)]
pub struct SMatrix {
    pub entries: CMatrix,
    pub labels: Vec<String>,
    /// Relative weighted least-squares residual of the fit.
    pub residual: f64,
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<ComplexScalar>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<ComplexScalar>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("ragged matrix".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j].into()))
}

#[derive(Serialize)]
struct SMatrixWire<'a> {
    entries: Vec<Vec<ComplexScalar>>,
    labels: &'a [String],
    residual: f64,
}

impl Serialize for SMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SMatrixWire {
            entries: matrix_to_rows(&self.entries),
            labels: &self.labels,
            residual: self.residual,
        }
        .serialize(s)
    }
}

/// Weighted least-squares representation of `h` on the span of `funcs`.
pub fn build_smatrix(h: &Hamiltonian, funcs: &[Expr], grid: &GridSpec) -> Result<SMatrix> {
    let n = funcs.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty basis".into()));
    }
    let xs = grid.points();
    let half = 0.5 * (grid.x_max - grid.x_min);
    let center = 0.5 * (grid.x_max + grid.x_min);
    let vt = Tape::new(&h.potential);
    let tapes: Vec<Tape> = funcs.iter().map(Tape::new).collect();
    // rows: grid points; per point the values φ_n and hφ_n
    let samples: Vec<Result<(Vec<C64>, Vec<C64>)>> = xs
        .par_iter()
        .map(|&x| {
            let v = vt.value(x)?;
            let mut phi = Vec::with_capacity(n);
            let mut hphi = Vec::with_capacity(n);
            for t in &tapes {
                let j = t.eval(x, 2)?;
                phi.push(j[0]);
                hphi.push(-j[2] + v * j[0]);
            }
            Ok((phi, hphi))
        })
        .collect();
    let mut a = CMatrix::zeros(xs.len(), n);
    let mut b = CMatrix::zeros(xs.len(), n);
    for (i, (s, &x)) in samples.into_iter().zip(&xs).enumerate() {
        let (phi, hphi) = s?;
        let w = (-(x - center).abs() / half).exp().sqrt();
        for k in 0..n {
            a[(i, k)] = phi[k] * w;
            b[(i, k)] = hphi[k] * w;
        }
    }
    if a.iter().chain(b.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidInput("basis overflows on the grid".into()));
    }
    // column scaling
    let scales: Vec<f64> = (0..n).map(|k| a.column(k).norm().max(1e-300)).collect();
    let mut a_s = a.clone();
    for k in 0..n {
        a_s.column_mut(k).unscale_mut(scales[k]);
    }
    let svd = a_s.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::InvalidInput(format!(
            "basis functions are linearly dependent on the grid (condition {:.2e})",
            smax / smin
        )));
    }
    let y = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    // A_s y = B, S^T = diag(1/scale) y
    let mut s = CMatrix::zeros(n, n);
    for col in 0..n {
        for m in 0..n {
            s[(col, m)] = y[(m, col)] / scales[m];
        }
    }
    let fit = &a * s.transpose();
    let mut residual: f64 = 0.0;
    for k in 0..n {
        let r = (b.column(k) - fit.column(k)).norm();
        let denom = b.column(k).norm().max(a.column(k).norm());
        residual = residual.max(r / denom);
    }
    if residual > 1e-6 {
        return Err(Error::NotInvariantSubspace { residual });
    }
    Ok(SMatrix {
        entries: s,
        labels: (0..n).map(|k| format!("phi_{k}")).collect(),
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(rename = "lambda", with = "crate::complex::as_object")]
    pub lambda: C64,
    pub size: usize,
}

#[derive(Clone, Debug)]
pub struct JordanStructure {
    pub cells: Vec<Cell>,
    /// `Ω S Ω⁻¹ = J` with lower-bidiagonal blocks.
    pub transform: CMatrix,
    /// `‖Ω S Ω⁻¹ - J‖ / max(‖S‖, 1)`.
    pub residual: f64,
}

#[derive(Serialize)]
struct JordanWire<'a> {
    cells: &'a [Cell],
    transform: Vec<Vec<ComplexScalar>>,
    residual: f64,
}

impl Serialize for JordanStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JordanWire {
            cells: &self.cells,
            transform: matrix_to_rows(&self.transform),
            residual: self.residual,
        }
        .serialize(s)
    }
}

impl JordanStructure {
    pub fn order(&self) -> usize {
        self.cells.iter().map(|c| c.size).sum()
    }

    /// Block-diagonal Jordan matrix with 1 on the subdiagonal of each block.
    pub fn jordan_matrix(&self) -> CMatrix {
        jordan_matrix(&self.cells)
    }
}

pub fn jordan_matrix(cells: &[Cell]) -> CMatrix {
    let n: usize = cells.iter().map(|c| c.size).sum();
    let mut j = CMatrix::zeros(n, n);
    let mut o = 0;
    for c in cells {
        for i in 0..c.size {
            j[(o + i, o + i)] = c.lambda;
            if i > 0 {
                j[(o + i, o + i - 1)] = ONE;
            }
        }
        o += c.size;
    }
    j
}

fn to_cell_list(cells: &[Cell]) -> CellList {
    cells.iter().map(|c| (c.lambda.into(), c.size)).collect()
}

fn sort_cells(cells: &mut [Cell]) {
    cells.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
            .then(b.size.cmp(&a.size))
    });
}

fn matrix_norm(s: &CMatrix) -> f64 {
    s.clone().svd(false, false).singular_values.max()
}

/// Eigenvalue clusters: mean value and member count.
fn clusters(s: &CMatrix, tol: f64) -> Result<Vec<(C64, usize)>> {
    let n = s.nrows();
    let eig = s
        .clone()
        .eigenvalues()
        .ok_or_else(|| Error::InvalidInput("eigenvalue computation failed".into()))?;
    let scale = matrix_norm(s).max(1.0);
    let rel = (tol / scale).clamp(1e-15, 1e-2);
    let mut groups: Vec<Vec<C64>> = eig.iter().map(|&e| vec![e]).collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let mi = mean(&groups[i]);
                let mj = mean(&groups[j]);
                let m = (groups[i].len() + groups[j].len()) as f64;
                // a defective eigenvalue of multiplicity m splits by ~ rel^(1/m)
                let radius = 10.0 * scale * rel.powf(1.0 / m);
                let d = (mi - mj).norm();
                if d <= radius && best.is_none_or(|b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
        match best {
            Some((i, j, _)) => {
                let g = groups.remove(j);
                groups[i].extend(g);
            }
            None => break,
        }
    }
    let mut out: Vec<(C64, usize)> = groups.iter().map(|g| (mean(g), g.len())).collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    debug_assert_eq!(out.iter().map(|c| c.1).sum::<usize>(), n);
    Ok(out)
}

fn mean(v: &[C64]) -> C64 {
    v.iter().sum::<C64>() / v.len() as f64
}

fn rank_with(sv: &[f64], tau: f64) -> usize {
    sv.iter().filter(|&&s| s > tau).count()
}

/// Cell sizes from a rank sequence `r_0 = N, r_1, ...`.
fn sizes_from_ranks(ranks: &[usize]) -> Vec<usize> {
    // cells of size >= j: r_{j-1} - r_j
    let mut ge: Vec<usize> = Vec::new();
    for j in 1..ranks.len() {
        ge.push(ranks[j - 1] - ranks[j]);
    }
    let mut sizes = Vec::new();
    for j in 0..ge.len() {
        let next = ge.get(j + 1).copied().unwrap_or(0);
        for _ in 0..ge[j].saturating_sub(next) {
            sizes.push(j + 1);
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Jordan form by SVD rank filtration of `(S - λI)^j`.
pub fn jordan_form(s: &CMatrix, tol_cluster: f64) -> Result<JordanStructure> {
    let n = s.nrows();
    if n == 0 || n != s.ncols() {
        return Err(Error::InvalidInput("S must be square and nonempty".into()));
    }
    if n > 8 {
        return Err(Error::InvalidInput(format!("matrix order {n} exceeds 8")));
    }
    let scale = matrix_norm(s).max(1.0);
    let groups = clusters(s, tol_cluster)?;
    let mut cells = Vec::new();
    let mut low_cells = Vec::new();
    let mut high_cells = Vec::new();
    let mut ambiguous = false;
    for &(lambda, mult) in &groups {
        let shifted = s - CMatrix::identity(n, n) * lambda;
        let mut power = CMatrix::identity(n, n);
        let (mut r, mut r_lo, mut r_hi) = (vec![n], vec![n], vec![n]);
        for j in 1..=mult {
            power = &power * &shifted;
            let sv: Vec<f64> = power.clone().svd(false, false).singular_values.iter().copied().collect();
            let tau = tol_cluster.max(1e-14) * scale.powi(j as i32);
            if sv.iter().any(|&x| x > tau / 10.0 && x < tau * 10.0) {
                ambiguous = true;
            }
            r.push(rank_with(&sv, tau));
            r_lo.push(rank_with(&sv, tau * 10.0));
            r_hi.push(rank_with(&sv, tau / 10.0));
        }
        for (ranks, out) in [(&r, &mut cells), (&r_lo, &mut low_cells), (&r_hi, &mut high_cells)] {
            for size in sizes_from_ranks(ranks) {
                out.push(Cell { lambda, size });
            }
        }
    }
    let total: usize = cells.iter().map(|c| c.size).sum();
    if ambiguous || total != n {
        sort_cells(&mut low_cells);
        sort_cells(&mut high_cells);
        let mut candidates = vec![to_cell_list(&low_cells), to_cell_list(&high_cells)];
        if total != n {
            let mut c = cells.clone();
            sort_cells(&mut c);
            candidates.push(to_cell_list(&c));
        }
        candidates.dedup();
        return Err(Error::IllConditioned { candidates });
    }
    sort_cells(&mut cells);
    for &(lambda, _) in &groups {
        let count = cells.iter().filter(|c| c.lambda == lambda).count();
        if count > 2 {
            return Err(Error::TooManyCells {
                eigenvalue: lambda.into(),
                cells: count,
            });
        }
    }
    let transform = build_transform(s, &cells)?;
    let inv = transform
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("Jordan transform is singular".into()))?;
    let j = jordan_matrix(&cells);
    let residual = (&transform * s * inv - j).norm() / scale;
    Ok(JordanStructure {
        cells,
        transform,
        residual,
    })
}

fn null_space(m: &CMatrix, tau: f64) -> Vec<nalgebra::DVector<C64>> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = match svd.v_t {
        Some(v) => v,
        None => return vec![],
    };
    let mut out = Vec::new();
    for i in 0..n {
        let sv = svd.singular_values.get(i).copied().unwrap_or(0.0);
        if sv <= tau {
            out.push(vt.row(i).adjoint());
        }
    }
    out
}

fn min_singular(cols: &[nalgebra::DVector<C64>]) -> f64 {
    if cols.is_empty() {
        return 1.0;
    }
    let m = CMatrix::from_columns(cols);
    let k = cols.len();
    let sv = m.svd(false, false).singular_values;
    if sv.len() < k {
        return 0.0;
    }
    sv.min()
}

// rows of Ω: right Jordan chains of Sᵀ, (Sᵀ - λ) v_l = v_{l-1}
fn build_transform(s: &CMatrix, cells: &[Cell]) -> Result<CMatrix> {
    let n = s.nrows();
    let a = s.transpose();
    let scale = matrix_norm(s).max(1.0);
    let mut rows: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(n);
    let mut done = vec![false; cells.len()];
    // larger cells first for each eigenvalue, but keep output order of `cells`
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&i, &j| cells[j].size.cmp(&cells[i].size));
    let mut chains: Vec<Option<Vec<nalgebra::DVector<C64>>>> = vec![None; cells.len()];
    let weights = [
        C64::new(1.0, 0.0),
        C64::new(0.7, 0.3),
        C64::new(-0.4, 0.9),
        C64::new(0.2, -0.6),
    ];
    for &ci in &order {
        let c = cells[ci];
        let shifted = &a - CMatrix::identity(n, n) * c.lambda;
        let mut power = CMatrix::identity(n, n);
        for _ in 0..c.size {
            power = &power * &shifted;
        }
        let tau = 1e-7 * scale.powi(c.size as i32);
        let ns = null_space(&power, tau);
        let existing: Vec<nalgebra::DVector<C64>> = chains.iter().flatten().flatten().cloned().collect();
        let mut candidates = ns.clone();
        for (k, w) in weights.iter().enumerate() {
            let mut v = nalgebra::DVector::<C64>::zeros(n);
            for (i, b) in ns.iter().enumerate() {
                v += b * (w * C64::new(1.0 + 0.1 * (i + k) as f64, 0.0)).powi(i as i32 + 1);
            }
            candidates.push(v);
        }
        let mut best: Option<(f64, Vec<nalgebra::DVector<C64>>)> = None;
        for top in candidates {
            let nt = top.norm();
            if nt == 0.0 {
                continue;
            }
            let mut chain = vec![top.unscale(nt)];
            for _ in 1..c.size {
                let next = &shifted * chain.last().unwrap_or(&top);
                chain.push(next);
            }
            chain.reverse();
            let mut all = existing.clone();
            all.extend(chain.iter().cloned());
            let q = min_singular(&all);
            if best.as_ref().is_none_or(|b| q > b.0) {
                best = Some((q, chain));
            }
        }
        let (q, chain) = best.ok_or_else(|| Error::InvalidInput("no Jordan chain found".into()))?;
        if q < 1e-10 {
            return Err(Error::IllConditioned {
                candidates: vec![to_cell_list(cells)],
            });
        }
        chains[ci] = Some(chain);
        done[ci] = true;
    }
    for ch in chains.into_iter().flatten() {
        rows.extend(ch);
    }
    let mut omega = CMatrix::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..n {
            omega[(i, j)] = r[j];
        }
    }
    Ok(omega)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripPair {
    #[serde(with = "crate::complex::as_object")]
    pub lambda: C64,
    pub delta_k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StripReport {
    pub pairs: Vec<StripPair>,
    pub reduced_order: usize,
    /// `q = p_M ∏ (λ_l - h)^{δk_l}` spelled out.
    pub template: String,
}

pub fn strip_off_analysis(js: &JordanStructure) -> StripReport {
    let n = js.order();
    let mut pairs = Vec::new();
    let mut seen: Vec<C64> = Vec::new();
    for c in &js.cells {
        if seen.contains(&c.lambda) {
            continue;
        }
        seen.push(c.lambda);
        let same: Vec<&Cell> = js.cells.iter().filter(|d| d.lambda == c.lambda).collect();
        if same.len() == 2 {
            pairs.push(StripPair {
                lambda: c.lambda,
                delta_k: same[0].size.min(same[1].size),
            });
        }
    }
    let stripped: usize = pairs.iter().map(|p| p.delta_k).sum();
    let m = n - 2 * stripped;
    let mut template = format!("p_{m}");
    for p in &pairs {
        template.push_str(&format!(
            " * ({:+}{:+}i - h)^{}",
            p.lambda.re, p.lambda.im, p.delta_k
        ));
    }
    StripReport {
        pairs,
        reduced_order: m,
        template,
    }
}

/// Coefficients (ascending powers of E) of `∏ (E - λ_i)^{k_i}`.
pub fn susy_polynomial(js: &JordanStructure) -> Vec<C64> {
    let mut p = vec![ONE];
    for c in &js.cells {
        for _ in 0..c.size {
            p = poly_mul(&p, &[-c.lambda, ONE]);
        }
    }
    p
}

pub fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_eval(p: &[C64], e: C64) -> C64 {
    p.iter().rev().fold(ZERO, |acc, c| acc * e + c)
}

/// `det(E I - S)` by Faddeev-LeVerrier, ascending powers.
pub fn char_poly(s: &CMatrix) -> Vec<C64> {
    let n = s.nrows();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    let mut m = CMatrix::zeros(n, n);
    let id = CMatrix::identity(n, n);
    for k in 1..=n {
        m = s * &m + &id * coeffs[n - k + 1];
        let t = (s * &m).trace();
        coeffs[n - k] = -t / k as f64;
    }
    coeffs
}

/// `ψ'_i = Σ_{j≤i} α_{i-j} ψ_j`.
pub fn triangle_transform(chain: &JordanChain, alphas: &[C64]) -> Result<JordanChain> {
    if alphas.is_empty() || alphas[0] == ZERO {
        return Err(Error::DegenerateTransform);
    }
    if alphas.len() > chain.len() {
        return Err(Error::InvalidInput(format!(
            "{} coefficients for a chain of length {}",
            alphas.len(),
            chain.len()
        )));
    }
    let funcs = (0..chain.len())
        .map(|i| {
            let mut acc = Expr::zero();
            for j in 0..=i {
                if let Some(&a) = alphas.get(i - j) {
                    if a != ZERO {
                        acc = acc.add(&chain.functions[j].scale(a));
                    }
                }
            }
            acc
        })
        .collect();
    Ok(JordanChain::new(chain.eigenvalue, funcs))
}

/// Coefficients making the chain's binorm matrix exactly anti-diagonal unit.
///
/// `hankel[k] = ∫ψ_0 ψ_{p-1+k}`, k = 0..p-1.
pub fn binorm_normalizing_alphas(hankel: &[C64]) -> Result<Vec<C64>> {
    let b0 = *hankel.first().ok_or(Error::DegenerateTransform)?;
    if b0 == ZERO {
        return Err(Error::DegenerateTransform);
    }
    let p = hankel.len();
    // s = sqrt(b) as a power series, then a = 1/s
    let mut s = vec![ZERO; p];
    s[0] = b0.sqrt();
    for n in 1..p {
        let mut acc = hankel[n];
        for k in 1..n {
            acc -= s[k] * s[n - k];
        }
        s[n] = acc / (s[0] * 2.0);
    }
    Ok(series_inverse(&s))
}

fn series_inverse(s: &[C64]) -> Vec<C64> {
    let p = s.len();
    let mut a = vec![ZERO; p];
    a[0] = ONE / s[0];
    for n in 1..p {
        let mut acc = ZERO;
        for k in 1..=n {
            acc += s[k] * a[n - k];
        }
        a[n] = -acc / s[0];
    }
    a
}

/// Lower-triangular Toeplitz matrix of `alphas`.
pub fn toeplitz(alphas: &[C64], p: usize) -> CMatrix {
    CMatrix::from_fn(p, p, |i, j| {
        if i >= j {
            alphas.get(i - j).copied().unwrap_or(ZERO)
        } else {
            ZERO
        }
    })
}

/// Transform `(α̂⁻¹)†` of the conjugate basis that keeps biorthogonality.
pub fn conjugate_transform(alphas: &[C64], p: usize) -> Result<CMatrix> {
    if alphas.first().is_none_or(|a| *a == ZERO) {
        return Err(Error::DegenerateTransform);
    }
    let mut padded = alphas.to_vec();
    padded.resize(p, ZERO);
    Ok(toeplitz(&series_inverse(&padded), p).adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_has_simple_cells() {
        let s = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]));
        let js = jordan_form(&s, 1e-8).unwrap();
        assert_eq!(js.cells.len(), 3);
        assert!(js.cells.iter().all(|c| c.size == 1));
        assert!(js.residual < 1e-12);
    }

    #[test]
    fn lower_bidiagonal_block() {
        let l = c(-1.0, 0.0);
        let s = CMatrix::from_row_slice(2, 2, &[l, ZERO, ONE, l]);
        let js = jordan_form(&s, 1e-8).unwrap();
        assert_eq!(js.cells, vec![Cell { lambda: l, size: 2 }]);
        assert!(js.residual < 1e-12, "{}", js.residual);
        let p = susy_polynomial(&js);
        assert!((poly_eval(&p, c(0.5, 0.0)) - c(2.25, 0.0)).norm() < 1e-14);
        let strip = strip_off_analysis(&js);
        assert!(strip.pairs.is_empty());
        assert_eq!(strip.reduced_order, 2);
    }

    #[test]
    fn recover_random_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let structures: Vec<Vec<Cell>> = vec![
            vec![Cell { lambda: c(1.0, 0.5), size: 2 }, Cell { lambda: c(-2.0, 0.0), size: 2 }],
            vec![Cell { lambda: c(0.3, 0.0), size: 3 }, Cell { lambda: c(1.5, -1.0), size: 1 }],
            vec![Cell { lambda: c(0.0, 1.0), size: 2 }, Cell { lambda: c(0.0, 1.0), size: 1 }, Cell { lambda: c(2.0, 0.0), size: 1 }],
        ];
        for cells in structures {
            let j = jordan_matrix(&cells);
            let n = j.nrows();
            let omega = loop {
                let m = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    + CMatrix::identity(n, n) * c(2.0, 0.0);
                let sv = m.clone().svd(false, false).singular_values;
                if sv.max() / sv.min() < 1e3 {
                    break m;
                }
            };
            let s = omega.clone().try_inverse().unwrap() * &j * &omega;
            let js = jordan_form(&s, 1e-8).unwrap();
            let mut expect = cells.clone();
            sort_cells(&mut expect);
            assert_eq!(js.cells.len(), expect.len());
            for (a, b) in js.cells.iter().zip(&expect) {
                assert_eq!(a.size, b.size);
                assert!((a.lambda - b.lambda).norm() < 1e-6);
            }
            assert!(js.residual < 1e-6, "{}", js.residual);
        }
    }

    #[test]
    fn three_cells_for_one_eigenvalue_rejected() {
        let s = CMatrix::identity(3, 3) * c(2.0, 0.0);
        assert!(matches!(jordan_form(&s, 1e-8), Err(Error::TooManyCells { cells: 3, .. })));
    }

    #[test]
    fn near_defective_is_ambiguous() {
        let l = c(1.0, 0.0);
        let s = CMatrix::from_row_slice(2, 2, &[l, ZERO, c(1e-8, 0.0), l]);
        match jordan_form(&s, 1e-8) {
            Err(Error::IllConditioned { candidates }) => assert!(candidates.len() >= 2),
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn strip_pairs_from_two_cells() {
        let l = c(-1.0, 0.0);
        let js = JordanStructure {
            cells: vec![Cell { lambda: l, size: 3 }, Cell { lambda: l, size: 1 }],
            transform: CMatrix::identity(4, 4),
            residual: 0.0,
        };
        let r = strip_off_analysis(&js);
        assert_eq!(r.pairs, vec![StripPair { lambda: l, delta_k: 1 }]);
        assert_eq!(r.reduced_order, 2);
    }

    #[test]
    fn char_poly_matches_product_form() {
        let s = CMatrix::from_row_slice(3, 3, &[
            c(1.0, 0.0), c(2.0, 1.0), ZERO,
            c(0.0, -1.0), c(0.5, 0.0), c(1.0, 0.0),
            c(3.0, 0.0), ZERO, c(-1.0, 2.0),
        ]);
        let js = jordan_form(&s, 1e-8).unwrap();
        let a = char_poly(&s);
        let b = susy_polynomial(&js);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn triangle_transform_rules() {
        let ch = JordanChain::new(c(-1.0, 0.0), vec![Expr::x().cosh(), Expr::x().sinh()]);
        assert!(matches!(triangle_transform(&ch, &[ZERO]), Err(Error::DegenerateTransform)));
        let same = triangle_transform(&ch, &[ONE, ZERO]).unwrap();
        assert!(same.functions[1].value(0.3).unwrap() == ch.functions[1].value(0.3).unwrap());
        let shifted = triangle_transform(&ch, &[ONE, c(2.0, 0.0)]).unwrap();
        let v = shifted.functions[1].value(0.3).unwrap();
        assert!((v - (0.3f64.sinh() + 2.0 * 0.3f64.cosh())).norm() < 1e-15);
    }

    #[test]
    fn normalizing_alphas_flatten_hankel() {
        // b(t) = 2 + 3t + t², a² b must be 1 up to t²
        let b = [c(2.0, 0.0), c(3.0, 0.0), c(1.0, 0.5)];
        let a = binorm_normalizing_alphas(&b).unwrap();
        let a2 = poly_mul(&a, &a);
        let prod = poly_mul(&a2, &b);
        assert!((prod[0] - ONE).norm() < 1e-14);
        assert!(prod[1].norm() < 1e-14 && prod[2].norm() < 1e-14);
        let beta = conjugate_transform(&a, 3).unwrap();
        let check = toeplitz(&a, 3) * beta.adjoint();
        assert!((check - CMatrix::identity(3, 3)).norm() < 1e-13);
    }
}
