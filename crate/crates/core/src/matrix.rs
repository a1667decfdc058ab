//! Dense row-major matrices, Gram matrices and the row projections used by
//! every sampling round.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative factor for the zero-row threshold, applied to `‖A‖_F²`.
pub const ZERO_ROW_FACTOR: f64 = 1e-12;

/// A dense `rows × cols` matrix of finite reals stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(m * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(m, n, data)
    }

    /// Zero matrix. Panics on an empty shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix shape {rows}x{cols}");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut out = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            out.data[i * n + i] = d;
        }
        out
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &r) in dst.iter_mut().zip(rhs.row(l)) {
                    *d += a * r;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {}x{} from {}x{}",
                rhs.rows, rhs.cols, self.rows, self.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> RealMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Row submatrix `A_S`, rows taken in the order given.
    pub fn select_rows(&self, indices: &[usize]) -> Result<RealMatrix> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            self.check_row(i)?;
            data.extend_from_slice(self.row(i));
        }
        RealMatrix::new(indices.len(), self.cols, data)
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        dot(self.row(i), self.row(i))
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub(crate) fn check_row(&self, i: usize) -> Result<()> {
        if i >= self.rows {
            return Err(Error::IndexOutOfRange {
                index: i,
                rows: self.rows,
            });
        }
        Ok(())
    }
}

pub fn frobenius_norm(a: &RealMatrix) -> f64 {
    a.frobenius_norm_sq().sqrt()
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Symmetric positive semidefinite `n × n` matrix, typically `BᵀB`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    /// Wraps a square matrix, checking symmetry to `1e-12 · max|entry|`.
    ///
    /// Positive semidefiniteness is not checked here; see [`GramMatrix::is_psd`].
    pub fn from_matrix(m: RealMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        let scale = m.max_abs();
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((m.get(i, j) - m.get(j, i)).abs());
            }
        }
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self {
            dim: n,
            data: m.data,
        })
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn to_matrix(&self) -> RealMatrix {
        RealMatrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    /// `G v`
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.dim).map(|r| dot(r, v)).collect()
    }

    /// All eigenvalues at least `-1e-9 · trace`.
    pub fn is_psd(&self) -> Result<bool> {
        let eig = crate::eigen::symmetric_eigenvalues(self)?;
        let tol = 1e-9 * self.trace().abs();
        Ok(eig.iter().all(|&l| l >= -tol))
    }
}

/// Squared-norm level at or below which a row counts as zero.
///
/// Always derived from the original input of a multi-round algorithm, so it
/// does not shrink as the rows are projected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroThreshold(pub f64);

impl ZeroThreshold {
    pub fn for_matrix(a: &RealMatrix) -> Self {
        ZeroThreshold(ZERO_ROW_FACTOR * a.frobenius_norm_sq())
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Drop tolerance on a norm (not a squared norm).
    #[inline]
    pub fn norm_tolerance(self) -> f64 {
        self.0.sqrt()
    }

    #[inline]
    pub fn is_zero(self, norm_sq: f64) -> bool {
        norm_sq <= self.0
    }
}

/// `AᵀA`, assembled from the upper triangle and mirrored.
pub fn gram(a: &RealMatrix) -> GramMatrix {
    let n = a.cols;
    let mut g = vec![0.0; n * n];
    for r in a.iter_rows() {
        for p in 0..n {
            let rp = r[p];
            if rp == 0.0 {
                continue;
            }
            let dst = &mut g[p * n + p..(p + 1) * n];
            for (d, &rq) in dst.iter_mut().zip(&r[p..]) {
                *d += rp * rq;
            }
        }
    }
    for p in 0..n {
        for q in 0..p {
            g[p * n + q] = g[q * n + p];
        }
    }
    GramMatrix::from_raw(n, g)
}

/// `C_i = B − B b_i b_iᵀ / ‖b_i‖²`, with row `i` of the result set to zero.
pub fn project_out_row(b: &RealMatrix, i: usize) -> Result<RealMatrix> {
    project_out_row_with(b, i, ZeroThreshold::for_matrix(b))
}

pub fn project_out_row_with(b: &RealMatrix, i: usize, thr: ZeroThreshold) -> Result<RealMatrix> {
    b.check_row(i)?;
    let bi = b.row(i).to_vec();
    let nb = dot(&bi, &bi);
    if thr.is_zero(nb) {
        return Err(Error::ZeroRow {
            row: Some(i),
            norm_sq: nb,
        });
    }
    let mut out = b.clone();
    for r in 0..b.rows {
        let row = out.row_mut(r);
        let coef = dot(row, &bi) / nb;
        if coef != 0.0 {
            for (x, &y) in row.iter_mut().zip(&bi) {
                *x -= coef * y;
            }
        }
    }
    out.row_mut(i).fill(0.0);
    Ok(out)
}

/// `C_iᵀC_i` from `G = BᵀB` and `b_i` by the rank-one update
/// `G − (G b bᵀ + b bᵀ G)/‖b‖² + (bᵀ G b) b bᵀ/‖b‖⁴`.
pub fn gram_after_projection(g: &GramMatrix, b_i: &[f64]) -> Result<GramMatrix> {
    // Only the row itself is available here, so scale the threshold off G's trace.
    gram_after_projection_with(g, b_i, ZeroThreshold(ZERO_ROW_FACTOR * g.trace().abs()))
}

pub fn gram_after_projection_with(
    g: &GramMatrix,
    b_i: &[f64],
    thr: ZeroThreshold,
) -> Result<GramMatrix> {
    let n = g.dim;
    if b_i.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "row has {} entries, Gram matrix is {n}x{n}",
            b_i.len()
        )));
    }
    let nb = dot(b_i, b_i);
    if thr.is_zero(nb) {
        return Err(Error::ZeroRow {
            row: None,
            norm_sq: nb,
        });
    }
    let w = g.apply(b_i);
    let s = dot(b_i, &w) / (nb * nb);
    let inv = 1.0 / nb;
    let mut out = vec![0.0; n * n];
    for p in 0..n {
        let (bp, wp) = (b_i[p], w[p]);
        for q in p..n {
            let v = g.data[p * n + q] - (wp * b_i[q] + bp * w[q]) * inv + s * bp * b_i[q];
            out[p * n + q] = v;
            out[q * n + p] = v;
        }
    }
    Ok(GramMatrix::from_raw(n, out))
}

/// Orthonormal basis (as rows) of `span{a_i : i ∈ S}` by modified
/// Gram–Schmidt with one reorthogonalization pass. Rows whose residual norm
/// falls to `drop_tol` or below are skipped.
pub(crate) fn row_space_basis(a: &RealMatrix, subset: &[usize], drop_tol: f64) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(subset.len());
    for &i in subset {
        a.check_row(i)?;
        let mut v = a.row(i).to_vec();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                for (x, &y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > drop_tol {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    Ok(basis)
}

/// `π_S(A)`: every row of `A` projected onto the span of the rows in `S`.
///
/// Rank-deficient `A_S` is handled by the orthonormal basis; an empty `S`
/// gives the zero matrix.
pub fn project_onto_subset(a: &RealMatrix, subset: &[usize]) -> Result<RealMatrix> {
    let thr = ZeroThreshold::for_matrix(a);
    let basis = row_space_basis(a, subset, thr.norm_tolerance())?;
    let mut out = RealMatrix::zeros(a.rows, a.cols);
    for r in 0..a.rows {
        let src = a.row(r);
        let dst = out.row_mut(r);
        for q in &basis {
            let c = dot(src, q);
            for (x, &y) in dst.iter_mut().zip(q) {
                *x += c * y;
            }
        }
    }
    Ok(out)
}

/// `A − π_S(A)`
pub fn residual_after_subset(a: &RealMatrix, subset: &[usize]) -> Result<RealMatrix> {
    let p = project_onto_subset(a, subset)?;
    a.sub(&p)
}

/// `‖A − π_S(A)‖_F²`
pub fn residual_frobenius_sq(a: &RealMatrix, subset: &[usize]) -> Result<f64> {
    Ok(residual_after_subset(a, subset)?.frobenius_norm_sq())
}
