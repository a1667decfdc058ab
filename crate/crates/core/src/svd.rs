//! Thin SVD through the Jacobi eigendecomposition of the Gram matrix, plus the
//! norms and truncations built on it.

use serde::Serialize;

use crate::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::matrix::{dot, gram, RealMatrix, ZeroThreshold};

/// `A ≈ Σ_j σ_j u_j v_jᵀ` over the singular values above the drop level.
#[derive(Debug, Clone, Serialize)]
pub struct SvdFactors {
    /// Nonincreasing, all strictly above `sqrt(δ_zero)`.
    pub singular_values: Vec<f64>,
    /// `u_j`, each of length `m`.
    pub left_vectors: Vec<Vec<f64>>,
    /// `v_j`, each of length `n`.
    pub right_vectors: Vec<Vec<f64>>,
    /// Every eigenvalue of the Gram matrix (clipped at zero), nonincreasing,
    /// including those whose vectors were dropped. Length `min(m, n)`.
    pub squared_spectrum: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl SvdFactors {
    /// Numerical rank: the number of retained singular values.
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn sigma(&self, j: usize) -> f64 {
        self.squared_spectrum.get(j).map_or(0.0, |l| l.sqrt())
    }

    /// `‖A − A_k‖_F² = Σ_{j>k} σ_j²`
    pub fn tail_energy(&self, k: usize) -> f64 {
        self.squared_spectrum.iter().skip(k).sum()
    }

    /// `Σ_{j<k} σ_j u_j v_jᵀ`
    pub fn truncated(&self, k: usize) -> RealMatrix {
        let mut out = RealMatrix::zeros(self.rows, self.cols);
        for j in 0..k.min(self.rank()) {
            let s = self.singular_values[j];
            let (u, v) = (&self.left_vectors[j], &self.right_vectors[j]);
            for (i, &ui) in u.iter().enumerate() {
                let su = s * ui;
                for (c, &vc) in v.iter().enumerate() {
                    out.set(i, c, out.get(i, c) + su * vc);
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> RealMatrix {
        self.truncated(self.rank())
    }
}

pub fn thin_svd(a: &RealMatrix) -> Result<SvdFactors> {
    if a.rows() < a.cols() {
        let t = thin_svd(&a.transpose())?;
        return Ok(SvdFactors {
            singular_values: t.singular_values,
            left_vectors: t.right_vectors,
            right_vectors: t.left_vectors,
            squared_spectrum: t.squared_spectrum,
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let drop = ZeroThreshold::for_matrix(a).norm_tolerance();
    let eig = jacobi_eigen(&gram(a))?;
    let squared_spectrum: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();

    let mut singular_values = Vec::new();
    let mut left_vectors = Vec::new();
    let mut right_vectors = Vec::new();
    for (j, &lambda) in squared_spectrum.iter().enumerate() {
        let sigma = lambda.sqrt();
        if sigma <= drop {
            break;
        }
        let v = eig.vectors.column(j);
        let u: Vec<f64> = a.iter_rows().map(|r| dot(r, &v) / sigma).collect();
        singular_values.push(sigma);
        left_vectors.push(u);
        right_vectors.push(v);
    }
    Ok(SvdFactors {
        singular_values,
        left_vectors,
        right_vectors,
        squared_spectrum,
        rows: a.rows(),
        cols: a.cols(),
    })
}

pub fn spectral_norm(a: &RealMatrix) -> Result<f64> {
    Ok(thin_svd(a)?.sigma(0))
}

pub fn numerical_rank(a: &RealMatrix) -> Result<usize> {
    Ok(thin_svd(a)?.rank())
}

/// `A_k`, the truncated SVD. Requires `1 ≤ k ≤ rank(A)`.
pub fn best_rank_k(a: &RealMatrix, k: usize) -> Result<RealMatrix> {
    let svd = thin_svd(a)?;
    if k == 0 || k > svd.rank() {
        return Err(Error::RankError { k, rank: svd.rank() });
    }
    Ok(svd.truncated(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::symmetric_eigenvalues;
    use crate::matrix::frobenius_norm;
    use crate::random::gaussian_matrix;

    fn orthonormality_error(vs: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, x) in vs.iter().enumerate() {
            for (j, y) in vs.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(x, y) - id).abs());
            }
        }
        worst
    }

    #[test]
    fn diagonal_case() {
        let svd = thin_svd(&RealMatrix::from_diag(&[3.0, 2.0])).unwrap();
        assert_eq!(svd.singular_values, vec![3.0, 2.0]);
        assert_eq!(svd.left_vectors, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(svd.right_vectors, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn rank_one_case() {
        let u = [1.0, -2.0, 2.0];
        let v = [3.0, 4.0];
        let rows: Vec<Vec<f64>> = u.iter().map(|a| v.iter().map(|b| a * b).collect()).collect();
        let svd = thin_svd(&RealMatrix::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(svd.rank(), 1);
        assert!((svd.singular_values[0] - 15.0).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        for (m, n, seed) in [(8, 5, 1), (5, 8, 2), (30, 12, 3)] {
            let a = gaussian_matrix(m, n, seed);
            let svd = thin_svd(&a).unwrap();
            assert!(orthonormality_error(&svd.left_vectors) <= 1e-8);
            assert!(orthonormality_error(&svd.right_vectors) <= 1e-8);
            let err = frobenius_norm(&a.sub(&svd.reconstruct()).unwrap());
            assert!(err <= 1e-8 * frobenius_norm(&a), "{m}x{n}: {err}");
        }
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let a = gaussian_matrix(10, 6, 4);
        let svd = thin_svd(&a).unwrap();
        let eig = symmetric_eigenvalues(&gram(&a)).unwrap();
        for (s, l) in svd.singular_values.iter().zip(eig) {
            assert!((s - l.sqrt()).abs() <= 1e-8 * s);
        }
    }

    #[test]
    fn norms_and_truncation() {
        let i3 = RealMatrix::identity(3);
        assert!((frobenius_norm(&i3) - 3f64.sqrt()).abs() < 1e-15);
        assert!((spectral_norm(&i3).unwrap() - 1.0).abs() < 1e-15);

        let a2 = best_rank_k(&RealMatrix::from_diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        assert!(a2.sub(&RealMatrix::from_diag(&[3.0, 2.0, 0.0])).unwrap().max_abs() < 1e-14);

        let a = gaussian_matrix(6, 4, 8);
        let svd = thin_svd(&a).unwrap();
        let resid = a.sub(&best_rank_k(&a, 2).unwrap()).unwrap();
        let want = svd.sigma(2).powi(2) + svd.sigma(3).powi(2);
        assert!((resid.frobenius_norm_sq() - want).abs() <= 1e-10 * want);
        assert!((spectral_norm(&resid).unwrap() - svd.sigma(2)).abs() <= 1e-9 * svd.sigma(2));
    }

    #[test]
    fn rank_errors() {
        let a = RealMatrix::from_diag(&[1.0, 0.0]);
        assert_eq!(best_rank_k(&a, 2), Err(Error::RankError { k: 2, rank: 1 }));
        assert_eq!(spectral_norm(&RealMatrix::zeros(2, 3)).unwrap(), 0.0);
    }
}
