//! Symmetric eigensolvers.
//!
//! Two routes are provided:
//!
//! * [`jacobi_eigen`]: cyclic Jacobi with accumulated rotations. Used where the
//!   eigenvectors are needed (the thin SVD).
//! * [`symmetric_eigenvalues`]: Householder reduction to tridiagonal form
//!   followed by implicit QL, eigenvalues only. Used by the characteristic
//!   polynomial path, which runs once per row per round and dominates the
//!   sampler's cost.

use crate::error::{Error, Result};
use crate::matrix::{GramMatrix, RealMatrix};

/// Off-diagonal stopping tolerance, relative to `‖G‖_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

const QL_MAX_ITERATIONS: usize = 60;

/// Eigenpairs sorted by nonincreasing eigenvalue; `vectors` holds them as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: RealMatrix,
}

pub fn jacobi_eigen(g: &GramMatrix) -> Result<SymmetricEigen> {
    let n = g.dim();
    let mut a = g.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_TOLERANCE * norm;

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A ← A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                // A ← Jᵀ A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + dst] = v[k * n + src];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors: RealMatrix::new(n, n, vecs)?,
    })
}

/// Eigenvalues of a symmetric matrix in nonincreasing order.
pub fn symmetric_eigenvalues(g: &GramMatrix) -> Result<Vec<f64>> {
    let n = g.dim();
    let mut a = g.as_slice().to_vec();
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Householder reduction of the symmetric `n × n` matrix in `a` (destroyed).
/// Returns the diagonal and the subdiagonal, the latter stored in `e[1..]`.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[i * n + i];
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// On return `d` holds the (unsorted) eigenvalues.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITERATIONS {
                return Err(Error::ConvergenceFailure { sweeps: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::gram;
    use crate::random::{gaussian_matrix, random_orthogonal};

    fn spd_with_spectrum(spectrum: &[f64], seed: u64) -> GramMatrix {
        let n = spectrum.len();
        let q = random_orthogonal(n, seed);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = (0..n).map(|l| q.get(i, l) * spectrum[l] * q.get(j, l)).sum();
            }
        }
        for i in 0..n {
            for j in 0..i {
                m[i * n + j] = m[j * n + i];
            }
        }
        GramMatrix::from_matrix(RealMatrix::new(n, n, m).unwrap()).unwrap()
    }

    #[test]
    fn both_routes_recover_known_spectrum() {
        let spectrum = [9.0, 5.0, 2.5, 1.0, 0.25, 0.0];
        let g = spd_with_spectrum(&spectrum, 17);
        let jac = jacobi_eigen(&g).unwrap();
        let ql = symmetric_eigenvalues(&g).unwrap();
        for ((&want, &j), &q) in spectrum.iter().zip(&jac.values).zip(&ql) {
            assert!((want - j).abs() < 1e-12, "{want} vs {j}");
            assert!((want - q).abs() < 1e-12, "{want} vs {q}");
        }
    }

    #[test]
    fn jacobi_vectors_diagonalize() {
        let a = gaussian_matrix(9, 6, 5);
        let g = gram(&a);
        let eig = jacobi_eigen(&g).unwrap();
        let v = &eig.vectors;
        let vtv = v.transpose().matmul(v).unwrap();
        let gv = g.to_matrix().matmul(v).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((vtv.get(i, j) - id).abs() < 1e-12);
                assert!((gv.get(i, j) - eig.values[j] * v.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn routes_agree_on_random_grams() {
        for seed in 0..20 {
            let a = gaussian_matrix(12, 8, seed);
            let g = gram(&a);
            let jac = jacobi_eigen(&g).unwrap().values;
            let ql = symmetric_eigenvalues(&g).unwrap();
            let scale = jac[0];
            for (x, y) in jac.iter().zip(&ql) {
                assert!((x - y).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn trivial_sizes() {
        let z = gram(&RealMatrix::zeros(3, 3));
        assert_eq!(symmetric_eigenvalues(&z).unwrap(), vec![0.0; 3]);
        assert_eq!(jacobi_eigen(&z).unwrap().values, vec![0.0; 3]);
        let one = gram(&RealMatrix::from_rows(&[[2.0]]).unwrap());
        assert_eq!(symmetric_eigenvalues(&one).unwrap(), vec![4.0]);
        let two = GramMatrix::from_matrix(RealMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap()).unwrap();
        let ev = symmetric_eigenvalues(&two).unwrap();
        assert!((ev[0] - 3.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }
}
