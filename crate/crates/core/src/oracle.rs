//! Brute-force ground truth.
//!
//! Everything here works by direct enumeration of subsets and small dense
//! determinants, independently of the characteristic-polynomial machinery it
//! is used to check. Only intended for small inputs: enumeration is capped at
//! [`MAX_ENUMERATION`] subsets.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::Serialize;

use crate::charpoly::CharPolyCoeffs;
use crate::error::{Error, Result};
use crate::matrix::{residual_after_subset, residual_frobenius_sq, RealMatrix};
use crate::svd::{spectral_norm, thin_svd};

pub const MAX_ENUMERATION: u128 = 1_000_000;

/// Relative level (against `(‖A‖_F²)^k`) below which a subset determinant is zero.
pub const DET_ZERO_FACTOR: f64 = 1e-12;

/// Pass level for the lemma verifiers' relative residuals.
pub const LEMMA_TOLERANCE: f64 = 1e-8;

/// Condition-number guard for the matrix determinant lemma.
pub const CONDITION_LIMIT: f64 = 1e12;

pub const FADDEEV_LEVERRIER_MAX_DIM: usize = 12;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn guard(n: usize, k: usize) -> Result<()> {
    let count = binomial(n, k);
    if count > MAX_ENUMERATION {
        return Err(Error::TooLarge {
            count,
            limit: MAX_ENUMERATION,
        });
    }
    Ok(())
}

/// Determinant by LU with partial pivoting; `a` is overwritten.
fn lu_determinant(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for i in (col + 1)..n {
            let f = a[i * n + col] / p;
            if f != 0.0 {
                for j in col..n {
                    a[i * n + j] -= f * a[col * n + j];
                }
            }
        }
    }
    det
}

/// Inverse by Gauss–Jordan with partial pivoting, `None` if a pivot vanishes.
fn lu_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| work[i * n + col].abs().total_cmp(&work[j * n + col].abs()))
            .unwrap();
        if work[pivot * n + col] == 0.0 {
            return None;
        }
        for j in 0..n {
            work.swap(col * n + j, pivot * n + j);
            inv.swap(col * n + j, pivot * n + j);
        }
        let p = work[col * n + col];
        for j in 0..n {
            work[col * n + j] /= p;
            inv[col * n + j] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = work[i * n + col];
            if f != 0.0 {
                for j in 0..n {
                    work[i * n + j] -= f * work[col * n + j];
                    inv[i * n + j] -= f * inv[col * n + j];
                }
            }
        }
    }
    Some(inv)
}

fn one_norm(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `det(A_S A_Sᵀ)`; the empty subset gives 1.
pub fn subset_determinant(a: &RealMatrix, subset: &[usize]) -> Result<f64> {
    let k = subset.len();
    for &i in subset {
        if i >= a.rows() {
            return Err(Error::IndexOutOfRange {
                index: i,
                rows: a.rows(),
            });
        }
    }
    let mut g = vec![0.0; k * k];
    for (p, &i) in subset.iter().enumerate() {
        for (q, &j) in subset.iter().enumerate() {
            g[p * k + q] = crate::matrix::dot(a.row(i), a.row(j));
        }
    }
    Ok(lu_determinant(&mut g, k))
}

fn det_threshold(a: &RealMatrix, k: usize) -> f64 {
    DET_ZERO_FACTOR * a.frobenius_norm_sq().powi(k as i32)
}

/// Subset determinant with values at or below the zero threshold clipped to 0.
fn clipped_determinant(a: &RealMatrix, subset: &[usize], threshold: f64) -> Result<f64> {
    let d = subset_determinant(a, subset)?;
    Ok(if d > threshold { d } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetProbability {
    /// Sorted, 0-based.
    pub subset: Vec<usize>,
    pub determinant: f64,
    pub probability: f64,
}

/// The exact volume-sampling distribution over `k`-subsets.
#[derive(Debug, Clone, Serialize)]
pub struct SubsetDistribution {
    pub k: usize,
    /// Lexicographic subset order.
    pub entries: Vec<SubsetProbability>,
    /// `Σ_S det(A_S A_Sᵀ)`
    pub normalizer: f64,
}

impl SubsetDistribution {
    pub fn probability(&self, subset: &[usize]) -> f64 {
        let mut key = subset.to_vec();
        key.sort_unstable();
        self.entries
            .binary_search_by(|e| e.subset.as_slice().cmp(&key))
            .map_or(0.0, |pos| self.entries[pos].probability)
    }

    /// Total-variation distance to the empirical distribution of `counts`.
    pub fn tv_distance(&self, counts: &BTreeMap<Vec<usize>, u64>) -> f64 {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return 1.0;
        }
        let total = total as f64;
        let mut l1 = 0.0;
        for e in &self.entries {
            let c = counts.get(&e.subset).copied().unwrap_or(0) as f64;
            l1 += (c / total - e.probability).abs();
        }
        // mass on subsets outside the support
        for (s, &c) in counts {
            if self.entries.binary_search_by(|e| e.subset.cmp(s)).is_err() {
                l1 += c as f64 / total;
            }
        }
        0.5 * l1
    }
}

pub fn brute_force_distribution(a: &RealMatrix, k: usize) -> Result<SubsetDistribution> {
    guard(a.rows(), k)?;
    let thr = det_threshold(a, k);
    let mut entries = Vec::new();
    let mut normalizer = 0.0;
    for subset in (0..a.rows()).combinations(k) {
        let d = clipped_determinant(a, &subset, thr)?;
        normalizer += d;
        entries.push(SubsetProbability {
            subset,
            determinant: d,
            probability: 0.0,
        });
    }
    if normalizer <= 0.0 {
        return Err(Error::RankError {
            k,
            rank: thin_svd(a)?.rank(),
        });
    }
    for e in &mut entries {
        e.probability = e.determinant / normalizer;
    }
    Ok(SubsetDistribution {
        k,
        entries,
        normalizer,
    })
}

fn check_prefix(a: &RealMatrix, k: usize, prefix: &[usize]) -> Result<()> {
    if prefix.len() > k {
        return Err(Error::DomainError(format!(
            "prefix of length {} exceeds k = {k}",
            prefix.len()
        )));
    }
    for (p, &i) in prefix.iter().enumerate() {
        if i >= a.rows() {
            return Err(Error::IndexOutOfRange {
                index: i,
                rows: a.rows(),
            });
        }
        if prefix[..p].contains(&i) {
            return Err(Error::InfeasiblePrefix {
                prefix: prefix.to_vec(),
            });
        }
    }
    Ok(())
}

/// Sum of clipped determinants over all `k`-sets containing `fixed`.
fn completion_sum(
    a: &RealMatrix,
    k: usize,
    fixed: &[usize],
    thr: f64,
    mut weight: impl FnMut(&[usize]) -> Result<f64>,
) -> Result<f64> {
    let free: Vec<usize> = (0..a.rows()).filter(|i| !fixed.contains(i)).collect();
    let extra = k - fixed.len();
    guard(free.len(), extra)?;
    let mut total = 0.0;
    for t in free.into_iter().combinations(extra) {
        let mut s: Vec<usize> = fixed.iter().copied().chain(t).collect();
        s.sort_unstable();
        let d = clipped_determinant(a, &s, thr)?;
        if d > 0.0 {
            total += d * weight(&s)?;
        }
    }
    Ok(total)
}

/// `P(X_t = i | X_1..X_{t−1} = prefix)` for the ordered-tuple extension of
/// volume sampling, with `t = prefix.len() + 1`.
pub fn exact_marginal(a: &RealMatrix, k: usize, prefix: &[usize], i: usize) -> Result<f64> {
    check_prefix(a, k, prefix)?;
    if prefix.len() == k {
        return Err(Error::DomainError("prefix already has k entries".into()));
    }
    if i >= a.rows() {
        return Err(Error::IndexOutOfRange {
            index: i,
            rows: a.rows(),
        });
    }
    let thr = det_threshold(a, k);
    let den = completion_sum(a, k, prefix, thr, |_| Ok(1.0))?;
    if den <= 0.0 {
        return Err(Error::InfeasiblePrefix {
            prefix: prefix.to_vec(),
        });
    }
    if prefix.contains(&i) {
        return Ok(0.0);
    }
    let mut with_i = prefix.to_vec();
    with_i.push(i);
    let num = completion_sum(a, k, &with_i, thr, |_| Ok(1.0))?;
    let remaining = (k - prefix.len()) as f64;
    Ok(num / (remaining * den))
}

/// `E[‖A − π_S(A)‖_F² | X_1..X_{|prefix|} = prefix]` by enumeration.
pub fn conditional_expectation(a: &RealMatrix, k: usize, prefix: &[usize]) -> Result<f64> {
    check_prefix(a, k, prefix)?;
    let thr = det_threshold(a, k);
    let den = completion_sum(a, k, prefix, thr, |_| Ok(1.0))?;
    if den <= 0.0 {
        return Err(Error::InfeasiblePrefix {
            prefix: prefix.to_vec(),
        });
    }
    let num = completion_sum(a, k, prefix, thr, |s| residual_frobenius_sq(a, s))?;
    Ok(num / den)
}

/// `E_S ‖A − π_S(A)‖_F²` under volume sampling.
pub fn expected_residual(a: &RealMatrix, k: usize) -> Result<f64> {
    conditional_expectation(a, k, &[])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|, floor)`
    pub residual: f64,
    pub pass: bool,
}

impl DetCheck {
    fn new(lhs: f64, rhs: f64, floor: f64) -> Self {
        let residual = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(floor).max(f64::MIN_POSITIVE);
        Self {
            lhs,
            rhs,
            residual,
            pass: residual <= LEMMA_TOLERANCE,
        }
    }
}

/// `det(A_{S∪T}A_{S∪T}ᵀ) = det(A_S A_Sᵀ) · det(B_T B_Tᵀ)` with `B = A − π_S(A)`.
pub fn verify_det_division(a: &RealMatrix, s: &[usize], t: &[usize]) -> Result<DetCheck> {
    if s.iter().any(|i| t.contains(i)) {
        return Err(Error::DomainError("S and T must be disjoint".into()));
    }
    let union: Vec<usize> = s.iter().chain(t).copied().collect();
    let lhs = subset_determinant(a, &union)?;
    let b = residual_after_subset(a, s)?;
    let rhs = subset_determinant(a, s)? * subset_determinant(&b, t)?;
    let scale = a.select_rows(&union).map_or(0.0, |m| m.frobenius_norm_sq());
    let floor = DET_ZERO_FACTOR * scale.powi(union.len() as i32);
    Ok(DetCheck::new(lhs, rhs, floor))
}

/// `det(M + uvᵀ) = (1 + vᵀM⁻¹u) det(M)`.
pub fn verify_matrix_det_lemma(m: &RealMatrix, u: &[f64], v: &[f64]) -> Result<DetCheck> {
    let n = m.rows();
    if m.cols() != n || u.len() != n || v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "need square M and vectors of length {n}"
        )));
    }
    let data = m.as_slice();
    let inv = lu_inverse(data, n).ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let cond = one_norm(data, n) * one_norm(&inv, n);
    if cond.is_nan() || cond > CONDITION_LIMIT {
        return Err(Error::IllConditioned { cond });
    }
    let det_m = lu_determinant(&mut data.to_vec(), n);
    let minv_u: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| inv[i * n + j] * u[j]).sum())
        .collect();
    let quad = crate::matrix::dot(v, &minv_u);
    let mut updated = data.to_vec();
    for i in 0..n {
        for j in 0..n {
            updated[i * n + j] += u[i] * v[j];
        }
    }
    let lhs = lu_determinant(&mut updated, n);
    let rhs = (1.0 + quad) * det_m;
    let floor = DET_ZERO_FACTOR * det_m.abs() * (1.0 + quad.abs());
    Ok(DetCheck::new(lhs, rhs, floor))
}

/// The `n × (n+1)` matrix with a leading column of ones and `eps` on the
/// superdiagonal: row `i` is `e_0 + eps·e_{i+1}`.
pub fn lower_bound_matrix(n: usize, eps: f64) -> Result<RealMatrix> {
    if n < 2 {
        return Err(Error::DomainError(format!("need n >= 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!("need 0 < eps < 1, got {eps}")));
    }
    let mut a = RealMatrix::zeros(n, n + 1);
    for i in 0..n {
        a.set(i, 0, 1.0);
        a.set(i, i + 1, eps);
    }
    Ok(a)
}

/// `copies` block-diagonal copies of [`lower_bound_matrix`].
pub fn lower_bound_block_matrix(n: usize, eps: f64, copies: usize) -> Result<RealMatrix> {
    if copies == 0 {
        return Err(Error::DomainError("need at least one copy".into()));
    }
    let block = lower_bound_matrix(n, eps)?;
    let mut a = RealMatrix::zeros(n * copies, (n + 1) * copies);
    for c in 0..copies {
        for i in 0..n {
            for j in 0..=n {
                a.set(c * n + i, c * (n + 1) + j, block.get(i, j));
            }
        }
    }
    Ok(a)
}

/// Closed-form spectrum of [`lower_bound_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBoundClosedForm {
    pub sigma_1: f64,
    pub sigma_2: f64,
    pub frobenius_sq: f64,
    /// `‖A − π_{i}(A)‖_2`, the same for every row `i`.
    pub single_row_residual: f64,
    /// `single_row_residual / sigma_2`
    pub ratio: f64,
}

impl LowerBoundClosedForm {
    pub fn new(n: usize, eps: f64) -> Self {
        let nf = n as f64;
        let e2 = eps * eps;
        let single_row_residual = eps / (1.0 + e2).sqrt() * (nf + e2).sqrt();
        Self {
            sigma_1: (nf + e2).sqrt(),
            sigma_2: eps,
            frobenius_sq: nf + nf * e2,
            single_row_residual,
            ratio: single_row_residual / eps,
        }
    }
}

/// `‖A − π_{i}(A)‖_2 / ‖A − A_1‖_2` for every row `i`.
pub fn single_row_spectral_ratios(a: &RealMatrix) -> Result<Vec<f64>> {
    let sigma_2 = thin_svd(a)?.sigma(1);
    if sigma_2 <= 0.0 {
        return Err(Error::DomainError("matrix has rank one; ratio undefined".into()));
    }
    (0..a.rows())
        .map(|i| Ok(spectral_norm(&residual_after_subset(a, &[i])?)? / sigma_2))
        .collect()
}

/// Characteristic polynomial by the Faddeev–LeVerrier recurrence. Used only
/// as an independent cross-check on small matrices.
pub fn faddeev_leverrier(m: &RealMatrix) -> Result<CharPolyCoeffs> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "need a square matrix, got {}x{}",
            n,
            m.cols()
        )));
    }
    if n > FADDEEV_LEVERRIER_MAX_DIM {
        return Err(Error::DomainError(format!(
            "Faddeev-LeVerrier limited to n <= {FADDEEV_LEVERRIER_MAX_DIM}"
        )));
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut mk = RealMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = m.matmul(&mk)?;
        for i in 0..n {
            next.set(i, i, next.get(i, i) + c[n - k + 1]);
        }
        let am = m.matmul(&next)?;
        let tr: f64 = (0..n).map(|i| am.get(i, i)).sum();
        c[n - k] = -tr / k as f64;
        mk = next;
    }
    Ok(CharPolyCoeffs::from_ascending(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charpoly::charpoly_direct;
    use crate::matrix::{gram, GramMatrix};
    use crate::random::gaussian_matrix;

    fn rows(r: &[&[f64]]) -> RealMatrix {
        RealMatrix::from_rows(r).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 3), 35);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn subset_determinant_examples() {
        let a = gaussian_matrix(4, 3, 1);
        for i in 0..4 {
            let d = subset_determinant(&a, &[i]).unwrap();
            assert!((d - a.row_norm_sq(i)).abs() < 1e-12);
        }
        let dup = rows(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]]);
        assert_eq!(subset_determinant(&dup, &[0, 1]).unwrap(), 0.0);

        let (x, y) = (a.row(0), a.row(2));
        let dot = crate::matrix::dot;
        let want = dot(x, x) * dot(y, y) - dot(x, y).powi(2);
        assert!((subset_determinant(&a, &[0, 2]).unwrap() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn distributions() {
        let d = brute_force_distribution(&RealMatrix::identity(3), 2).unwrap();
        assert_eq!(d.entries.len(), 3);
        assert!(d.entries.iter().all(|e| (e.probability - 1.0 / 3.0).abs() < 1e-15));

        let a = rows(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let d = brute_force_distribution(&a, 2).unwrap();
        assert_eq!(d.probability(&[0, 1]), 0.0);
        assert_eq!(d.probability(&[0, 2]), 0.5);
        assert_eq!(d.probability(&[2, 1]), 0.5);

        let d = brute_force_distribution(&RealMatrix::from_diag(&[2.0, 3.0]), 1).unwrap();
        assert!((d.probability(&[0]) - 4.0 / 13.0).abs() < 1e-15);
        assert!((d.probability(&[1]) - 9.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn enumeration_guard() {
        let a = RealMatrix::zeros(60, 2);
        assert!(matches!(brute_force_distribution(&a, 30), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn tv_distance_of_exact_counts_is_zero() {
        let d = brute_force_distribution(&RealMatrix::identity(3), 2).unwrap();
        let counts: BTreeMap<Vec<usize>, u64> =
            d.entries.iter().map(|e| (e.subset.clone(), 10)).collect();
        assert!(d.tv_distance(&counts) < 1e-15);
        let skew: BTreeMap<Vec<usize>, u64> = [(vec![0, 1], 1)].into_iter().collect();
        assert!((d.tv_distance(&skew) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn marginal_examples() {
        let a = gaussian_matrix(5, 3, 6);
        let total: f64 = a.frobenius_norm_sq();
        for i in 0..5 {
            let p = exact_marginal(&a, 1, &[], i).unwrap();
            assert!((p - a.row_norm_sq(i) / total).abs() < 1e-14);
        }
        // after e_1 and e_2 are taken no third independent direction exists
        let b = rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            exact_marginal(&b, 3, &[0, 1], 2),
            Err(Error::InfeasiblePrefix { .. })
        ));
        // marginals sum to one and vanish on the prefix
        let s: f64 = (0..5).map(|i| exact_marginal(&a, 3, &[2], i).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(exact_marginal(&a, 3, &[2], 2).unwrap(), 0.0);
    }

    #[test]
    fn distribution_marginalizes_to_exact_marginal() {
        let a = gaussian_matrix(6, 4, 12);
        let k = 3;
        let d = brute_force_distribution(&a, k).unwrap();
        for i in 0..6 {
            // P(X_1 = i) = Σ_{S ∋ i} P(S) / k
            let from_dist: f64 = d
                .entries
                .iter()
                .filter(|e| e.subset.contains(&i))
                .map(|e| e.probability)
                .sum::<f64>()
                / k as f64;
            assert!((from_dist - exact_marginal(&a, k, &[], i).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_residual_examples() {
        let a = gaussian_matrix(5, 3, 3);
        assert!(expected_residual(&a, 3).unwrap() < 1e-20);

        let a = gaussian_matrix(6, 4, 8);
        let svd = thin_svd(&a).unwrap();
        let e = expected_residual(&a, 2).unwrap();
        assert!(e <= 3.0 * svd.tail_energy(2));
        let p = charpoly_direct(&gram(&a)).unwrap();
        let via_coeffs = 3.0 * p.minor_sum(3) / p.minor_sum(2);
        assert!((e - via_coeffs).abs() <= 1e-8 * e);
    }

    #[test]
    fn det_division_cases() {
        let a = gaussian_matrix(6, 5, 4);
        let chk = verify_det_division(&a, &[], &[1, 4]).unwrap();
        assert!(chk.pass && chk.lhs == chk.rhs);
        assert!(verify_det_division(&a, &[0, 3], &[1, 5]).unwrap().pass);

        let mut sing = a.clone();
        for j in 0..5 {
            sing.set(2, j, 2.0 * a.get(0, j));
        }
        let chk = verify_det_division(&sing, &[0, 2], &[4]).unwrap();
        assert!(chk.pass, "{chk:?}");
        assert!(chk.lhs.abs() < 1e-10 && chk.rhs.abs() < 1e-10);
        assert!(verify_det_division(&a, &[0], &[0]).is_err());
    }

    #[test]
    fn matrix_det_lemma_cases() {
        let m = gaussian_matrix(5, 5, 2);
        let u = vec![0.0; 5];
        let v = gaussian_matrix(1, 5, 3).row(0).to_vec();
        let chk = verify_matrix_det_lemma(&m, &u, &v).unwrap();
        assert!(chk.pass && chk.lhs == chk.rhs);

        let e1 = [1.0, 0.0, 0.0];
        let chk = verify_matrix_det_lemma(&RealMatrix::identity(3), &e1, &e1).unwrap();
        assert_eq!((chk.lhs, chk.rhs), (2.0, 2.0));

        let u = gaussian_matrix(1, 5, 4).row(0).to_vec();
        assert!(verify_matrix_det_lemma(&m, &u, &v).unwrap().pass);

        let singular = RealMatrix::from_diag(&[1.0, 0.0]);
        assert!(matches!(
            verify_matrix_det_lemma(&singular, &[1.0, 0.0], &[0.0, 1.0]),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn lower_bound_spectrum() {
        let a = lower_bound_matrix(2, 0.5).unwrap();
        let svd = thin_svd(&a).unwrap();
        assert!((svd.sigma(0) - 1.5).abs() < 1e-12);
        assert!((svd.sigma(1) - 0.5).abs() < 1e-12);

        for (n, eps) in [(3, 0.2), (7, 0.9), (10, 0.01)] {
            let a = lower_bound_matrix(n, eps).unwrap();
            let cf = LowerBoundClosedForm::new(n, eps);
            assert!((a.frobenius_norm_sq() - cf.frobenius_sq).abs() < 1e-12);
        }
        assert!(lower_bound_matrix(1, 0.5).is_err());
        assert!(lower_bound_matrix(3, 1.0).is_err());
    }

    #[test]
    fn lower_bound_ratio_is_row_independent() {
        let a = lower_bound_matrix(25, 0.1).unwrap();
        let ratios = single_row_spectral_ratios(&a).unwrap();
        let cf = LowerBoundClosedForm::new(25, 0.1);
        for r in &ratios {
            assert!((r - ratios[0]).abs() <= 1e-9 * ratios[0]);
            assert!((r - cf.ratio).abs() <= 1e-6 * cf.ratio);
            assert!(*r >= 2.5);
        }
    }

    #[test]
    fn block_lower_bound() {
        let a = lower_bound_block_matrix(4, 0.3, 2).unwrap();
        assert_eq!((a.rows(), a.cols()), (8, 10));
        assert_eq!(a.get(5, 5), 1.0);
        assert_eq!(a.get(5, 7), 0.3);
        assert_eq!(a.get(1, 5), 0.0);
    }

    #[test]
    fn faddeev_leverrier_examples() {
        let p = faddeev_leverrier(&RealMatrix::identity(2)).unwrap();
        assert_eq!(p.coeffs(), &[1.0, -2.0, 1.0]);
        let p = faddeev_leverrier(&RealMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert_eq!(p.coeffs(), &[36.0, -13.0, 1.0]);

        let g = gram(&gaussian_matrix(8, 6, 30));
        let fl = faddeev_leverrier(&g.to_matrix()).unwrap();
        let direct = charpoly_direct(&GramMatrix::from_matrix(g.to_matrix()).unwrap()).unwrap();
        for (x, y) in fl.coeffs().iter().zip(direct.coeffs()) {
            assert!((x - y).abs() <= 1e-7 * x.abs().max(y.abs()));
        }
        assert!(faddeev_leverrier(&RealMatrix::identity(13)).is_err());
    }
}
