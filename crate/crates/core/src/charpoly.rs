//! Characteristic polynomials of PSD Gram matrices and sums of subset
//! determinants.
//!
//! For PSD `M` with eigenvalues `λ`, `det(xI − M) = Σ_j c_j x^j` has
//! `|c_{n−k}| = e_k(λ)`, the k-th elementary symmetric sum, which is also the
//! sum of all `k × k` principal minors. The coefficients here are built from
//! eigenvalues with the recurrence `e_k ← e_k + λ e_{k−1}`: every term is
//! nonnegative, so nothing cancels.

use serde::Serialize;

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::{gram, GramMatrix, RealMatrix};

/// Relative level below which a negative eigenvalue is treated as rounding noise.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-9;

/// Coefficients `c_0..c_n` of `det(xI − M)`, ascending; `c_n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharPolyCoeffs {
    coeffs: Vec<f64>,
}

impl CharPolyCoeffs {
    pub(crate) fn from_ascending(coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.last(), Some(&1.0));
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `c_j`, zero outside `0..=n`.
    pub fn coeff(&self, j: isize) -> f64 {
        usize::try_from(j)
            .ok()
            .and_then(|j| self.coeffs.get(j).copied())
            .unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `|c_{n−k}|`
    pub fn minor_sum(&self, k: usize) -> f64 {
        self.coeff(self.degree() as isize - k as isize).abs()
    }

    /// Evaluates the polynomial at `x` (Horner).
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Clips rounding-level negative eigenvalues to zero.
pub(crate) fn clip_eigenvalues(lambdas: &[f64]) -> Result<Vec<f64>> {
    clip_eigenvalues_with(lambdas, 0.0)
}

/// As [`clip_eigenvalues`], also accepting anything down to `-floor`. Residual
/// Gram matrices whose energy is already below the zero threshold of the
/// original input consist of rounding noise and need the absolute floor.
pub(crate) fn clip_eigenvalues_with(lambdas: &[f64], floor: f64) -> Result<Vec<f64>> {
    let scale: f64 = lambdas.iter().map(|l| l.abs()).sum();
    let tol = (NEGATIVE_EIGENVALUE_TOLERANCE * scale).max(floor);
    lambdas
        .iter()
        .map(|&l| {
            if l >= 0.0 {
                Ok(l)
            } else if l >= -tol {
                Ok(0.0)
            } else {
                Err(Error::DomainError(format!(
                    "eigenvalue {l:e} is negative beyond tolerance {tol:e}"
                )))
            }
        })
        .collect()
}

/// `e_0..e_order` of nonnegative values.
pub fn elementary_symmetric(values: &[f64], order: usize) -> Vec<f64> {
    let order = order.min(values.len());
    let mut e = vec![0.0; order + 1];
    e[0] = 1.0;
    for (l, &v) in values.iter().enumerate() {
        for k in (1..=order.min(l + 1)).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

pub fn charpoly_from_eigenvalues(lambdas: &[f64]) -> Result<CharPolyCoeffs> {
    let clipped = clip_eigenvalues(lambdas)?;
    let n = clipped.len();
    let e = elementary_symmetric(&clipped, n);
    let mut coeffs = vec![0.0; n + 1];
    for (k, ek) in e.iter().enumerate() {
        coeffs[n - k] = if k % 2 == 0 { *ek } else { -*ek };
    }
    Ok(CharPolyCoeffs::from_ascending(coeffs))
}

pub fn charpoly_direct(m: &GramMatrix) -> Result<CharPolyCoeffs> {
    charpoly_from_eigenvalues(&symmetric_eigenvalues(m)?)
}

/// Elementary symmetric sums `e_0..e_order` of the eigenvalues of `M`; entry `s`
/// equals `|c_{n−s}(M)|`.
pub fn minor_sums(m: &GramMatrix, order: usize) -> Result<Vec<f64>> {
    minor_sums_with(m, order, 0.0)
}

/// [`minor_sums`] with negative eigenvalues down to `-floor` treated as zero.
pub fn minor_sums_with(m: &GramMatrix, order: usize, floor: f64) -> Result<Vec<f64>> {
    let lambdas = clip_eigenvalues_with(&symmetric_eigenvalues(m)?, floor)?;
    let mut e = elementary_symmetric(&lambdas, order);
    e.resize(order + 1, 0.0);
    Ok(e)
}

/// `Σ_{|S|=k} det(A_S A_Sᵀ) = |c_{n−k}(AᵀA)|`.
pub fn subset_det_sum(a: &RealMatrix, k: usize) -> Result<f64> {
    let n = a.cols();
    if k > n {
        return Err(Error::DomainError(format!(
            "subset size {k} exceeds column count {n}"
        )));
    }
    Ok(minor_sums(&gram(a), k)?[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{faddeev_leverrier, subset_determinant};
    use crate::random::gaussian_matrix;
    use itertools::Itertools;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn two_factor_expansion() {
        let p = charpoly_from_eigenvalues(&[4.0, 9.0]).unwrap();
        assert_eq!(p.coeffs(), &[36.0, -13.0, 1.0]);
        assert_eq!(p.eval(4.0), 0.0);
    }

    #[test]
    fn zero_eigenvalues_give_monomial() {
        let p = charpoly_from_eigenvalues(&[0.0; 5]).unwrap();
        assert_eq!(p.coeffs(), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn negative_eigenvalues() {
        let p = charpoly_from_eigenvalues(&[1.0, -1e-12]).unwrap();
        assert_eq!(p.coeffs(), &[0.0, -1.0, 1.0]);
        assert!(matches!(
            charpoly_from_eigenvalues(&[1.0, -0.5]),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn eigenvalue_route_matches_faddeev_leverrier_on_diagonal() {
        let lambdas = [0.3, 2.0, 1.7, 0.05, 4.4, 0.9];
        let from_eig = charpoly_from_eigenvalues(&lambdas).unwrap();
        let fl = faddeev_leverrier(&RealMatrix::from_diag(&lambdas)).unwrap();
        for (x, y) in from_eig.coeffs().iter().zip(fl.coeffs()) {
            assert!(rel(*x, *y) <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn direct_examples() {
        let p = charpoly_direct(&gram(&RealMatrix::identity(2))).unwrap();
        assert!(p.coeffs().iter().zip([1.0, -2.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-14));

        let a = RealMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let p = charpoly_direct(&gram(&a)).unwrap();
        assert!(rel(p.coeff(0), 4.0) < 1e-12, "{}", p.coeff(0));
        assert!(rel(p.coeff(1), -30.0) < 1e-14);
        assert_eq!(p.coeff(2), 1.0);

        let d = GramMatrix::from_matrix(RealMatrix::from_diag(&[4.0, 9.0])).unwrap();
        let p = charpoly_direct(&d).unwrap();
        assert_eq!(p.coeffs(), &[36.0, -13.0, 1.0]);
    }

    #[test]
    fn subset_det_sum_examples() {
        assert!(rel(subset_det_sum(&RealMatrix::from_diag(&[2.0, 3.0]), 1).unwrap(), 13.0) < 1e-15);
        assert!(rel(subset_det_sum(&RealMatrix::identity(3), 2).unwrap(), 3.0) < 1e-15);
        assert!(subset_det_sum(&RealMatrix::identity(3), 4).is_err());
    }

    #[test]
    fn subset_det_sum_matches_enumeration() {
        let a = gaussian_matrix(6, 4, 21);
        for k in 1..=4 {
            let brute: f64 = (0..6)
                .combinations(k)
                .map(|s| subset_determinant(&a, &s).unwrap())
                .sum();
            let fast = subset_det_sum(&a, k).unwrap();
            assert!(rel(brute, fast) <= 1e-8, "k={k}: {brute} vs {fast}");
        }
    }

    #[test]
    fn trace_and_determinant_coefficients() {
        let a = gaussian_matrix(7, 5, 2);
        let g = gram(&a);
        let p = charpoly_direct(&g).unwrap();
        assert!(rel(p.minor_sum(1), g.trace()) <= 1e-9);
        let eig = symmetric_eigenvalues(&g).unwrap();
        assert!(rel(p.minor_sum(5), eig.iter().product()) <= 1e-9);
    }
}
