//! Exact volume sampling of `k`-subsets of rows.
//!
//! Rows are drawn one at a time. In round `t`, with `B` the residual of `A`
//! after projecting out the rows chosen so far and `C_i` the residual of `B`
//! after also projecting out `b_i`, row `i` is drawn with probability
//! proportional to
//!
//! ```text
//! p_i = ‖b_i‖² · |c_{n−k+t}(C_iᵀ C_i)|
//! ```
//!
//! The coefficient can be obtained either from the Gram matrix `C_iᵀC_i`
//! (a rank-one update of `BᵀB`, see [`marginals_gram`]) or from the SVD of `B`
//! and the matrix determinant lemma (see [`marginals_svd`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::charpoly::{clip_eigenvalues_with, minor_sums_with};
use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::{
    gram, gram_after_projection_with, project_out_row_with, GramMatrix, RealMatrix, ZeroThreshold,
};
use crate::random::{rng_from_seed, Rng};
use crate::svd::thin_svd;

/// Memoized prefixes kept by [`VolumeSampler`] before it stops caching.
const MEMO_CAPACITY: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Subroutine {
    /// Rank-one Gram updates and one eigenvalue problem per row.
    #[default]
    Gram,
    /// One SVD per round and the matrix determinant lemma.
    Svd,
}

impl fmt::Display for Subroutine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subroutine::Gram => "gram",
            Subroutine::Svd => "svd",
        })
    }
}

impl FromStr for Subroutine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gram" => Ok(Subroutine::Gram),
            "svd" => Ok(Subroutine::Svd),
            other => Err(Error::DomainError(format!("unknown subroutine {other:?}"))),
        }
    }
}

/// Unnormalized per-row weights `p_1..p_m` for one round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalVector {
    pub weights: Vec<f64>,
    pub round: usize,
    pub target: usize,
}

impl MarginalVector {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weights divided by their sum (summed in index order).
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.total();
        self.weights.iter().map(|w| w / total).collect()
    }
}

/// Record of the dimensionality reduction applied before sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SketchInfo {
    /// Target dimension `d` from the configuration.
    pub dim: usize,
    /// Seed of the Gaussian sketch that was used.
    pub seed: u64,
    /// `false` when `d ≥ n` and the input was sampled directly.
    pub applied: bool,
    /// Number of sketches drawn (1, or 2 after a rank-deficient first draw).
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// Chosen rows in selection order, 0-based.
    pub indices: Vec<usize>,
    /// Normalized marginals of every round.
    pub per_round_marginals: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    pub sketch: Option<SketchInfo>,
}

impl SelectionResult {
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut s = self.indices.clone();
        s.sort_unstable();
        s
    }
}

fn check_round(t: usize, k: usize, n: usize) -> Result<()> {
    if k == 0 || t == 0 || t > k {
        return Err(Error::DomainError(format!("need 1 <= t <= k, got t = {t}, k = {k}")));
    }
    if k > n {
        return Err(Error::RankError { k, rank: n });
    }
    Ok(())
}

fn finish(weights: Vec<f64>, t: usize, k: usize) -> Result<MarginalVector> {
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::Degenerate { round: t });
    }
    Ok(MarginalVector {
        weights,
        round: t,
        target: k,
    })
}

/// Round-`t` weights from `G = BᵀB`, with the zero-row threshold taken from `B`.
pub fn marginals_gram(g: &GramMatrix, b: &RealMatrix, t: usize, k: usize) -> Result<MarginalVector> {
    marginals_gram_with(g, b, t, k, ZeroThreshold::for_matrix(b))
}

pub fn marginals_gram_with(
    g: &GramMatrix,
    b: &RealMatrix,
    t: usize,
    k: usize,
    thr: ZeroThreshold,
) -> Result<MarginalVector> {
    check_round(t, k, b.cols())?;
    if g.dim() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrix is {0}x{0} but B has {1} columns",
            g.dim(),
            b.cols()
        )));
    }
    // |c_{n−k+t}| = e_{k−t}
    let order = k - t;
    let weights = (0..b.rows())
        .into_par_iter()
        .map(|i| {
            let nb = b.row_norm_sq(i);
            if thr.is_zero(nb) {
                return Ok(0.0);
            }
            if order == 0 {
                return Ok(nb);
            }
            let c = gram_after_projection_with(g, b.row(i), thr)?;
            Ok(nb * minor_sums_with(&c, order, thr.value())?[order])
        })
        .collect::<Result<Vec<f64>>>()?;
    finish(weights, t, k)
}

/// Round-`t` weights from the SVD of `B`, with the zero-row threshold taken from `B`.
pub fn marginals_svd(b: &RealMatrix, t: usize, k: usize) -> Result<MarginalVector> {
    marginals_svd_with(b, t, k, ZeroThreshold::for_matrix(b))
}

/// Coefficients of `Π_l (x − r_l)`, ascending.
fn poly_from_roots<'a>(roots: impl Iterator<Item = &'a f64>) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        p.push(0.0);
        for j in (1..p.len()).rev() {
            p[j] = p[j - 1] - r * p[j];
        }
        p[0] *= -r;
    }
    p
}

pub fn marginals_svd_with(b: &RealMatrix, t: usize, k: usize, thr: ZeroThreshold) -> Result<MarginalVector> {
    let n = b.cols();
    check_round(t, k, n)?;
    let svd = thin_svd(b)?;
    let r = svd.rank();
    let lambdas: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();

    // det(xI_n − C_iᵀC_i) = x^{n−r} [ f(x) + ‖b_i‖⁻² Σ_j σ_j⁴ (u_j)_i² g_j(x) ]
    // with f = Π_{l≤r}(x − σ_l²) and g_j = f / (x − σ_j²). We want the
    // coefficient of x^{n−k+t}, i.e. of x^{r−k+t} inside the bracket.
    let target = r as isize - k as isize + t as isize;
    let weights = if target < 0 {
        vec![0.0; b.rows()]
    } else {
        let target = target as usize;
        let f = poly_from_roots(lambdas.iter());
        let f_coef = f[target];
        let g_coefs: Vec<f64> = (0..r)
            .map(|j| {
                let g = poly_from_roots(lambdas.iter().enumerate().filter(|&(l, _)| l != j).map(|(_, v)| v));
                g.get(target).copied().unwrap_or(0.0)
            })
            .collect();
        (0..b.rows())
            .map(|i| {
                let nb = b.row_norm_sq(i);
                if thr.is_zero(nb) {
                    return 0.0;
                }
                // (Bb_i)ᵀu_j = σ_j (b_i·v_j) = σ_j² (u_j)_i, so the weight on g_j is σ_j⁴ (u_j)_i².
                let update: f64 = (0..r)
                    .map(|j| lambdas[j] * lambdas[j] * svd.left_vectors[j][i].powi(2) * g_coefs[j])
                    .sum();
                nb * (f_coef + update / nb).abs()
            })
            .collect()
    };
    finish(weights, t, k)
}

/// Inverse-transform draw from normalized weights: the first index whose
/// cumulative mass reaches `u` (ties at a cut point go to the lower index).
pub(crate) fn pick(probabilities: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last_positive = i;
            if u <= cum {
                return i;
            }
        }
    }
    last_positive
}

/// One draw of the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub indices: Vec<usize>,
    pub marginals: Vec<Arc<Vec<f64>>>,
}

/// Reusable volume sampler for a fixed matrix and `k`.
///
/// The rank check runs once at construction. With memoization enabled the
/// normalized marginals of every visited prefix are cached, which makes
/// repeated draws from small matrices cheap; results are identical with and
/// without the cache.
pub struct VolumeSampler {
    a: RealMatrix,
    gram: GramMatrix,
    k: usize,
    subroutine: Subroutine,
    thr: ZeroThreshold,
    memo: Option<HashMap<Vec<usize>, Arc<Vec<f64>>>>,
}

impl VolumeSampler {
    pub fn new(a: &RealMatrix, k: usize, subroutine: Subroutine) -> Result<Self> {
        let rank = thin_svd(a)?.rank();
        if k == 0 || k > rank {
            return Err(Error::RankError { k, rank });
        }
        Ok(Self {
            a: a.clone(),
            gram: gram(a),
            k,
            subroutine,
            thr: ZeroThreshold::for_matrix(a),
            memo: None,
        })
    }

    pub fn with_memo(mut self) -> Self {
        self.memo = Some(HashMap::new());
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn threshold(&self) -> ZeroThreshold {
        self.thr
    }

    fn marginals(&self, b: &RealMatrix, g: &GramMatrix, t: usize) -> Result<Vec<f64>> {
        let mv = match self.subroutine {
            Subroutine::Gram => marginals_gram_with(g, b, t, self.k, self.thr)?,
            Subroutine::Svd => marginals_svd_with(b, t, self.k, self.thr)?,
        };
        Ok(mv.normalized())
    }

    pub fn draw(&mut self, rng: &mut Rng) -> Result<Draw> {
        let mut prefix: Vec<usize> = Vec::with_capacity(self.k);
        let mut marginals = Vec::with_capacity(self.k);
        // residual state, lazily advanced to match `prefix`
        let mut state: Option<(RealMatrix, GramMatrix)> = None;
        let mut applied = 0;
        for t in 1..=self.k {
            let cached = self.memo.as_ref().and_then(|m| m.get(&prefix).cloned());
            let probs = match cached {
                Some(p) => p,
                None => {
                    let (b, g) = state.get_or_insert_with(|| (self.a.clone(), self.gram.clone()));
                    while applied < prefix.len() {
                        let i = prefix[applied];
                        let next_g = gram_after_projection_with(g, b.row(i), self.thr)?;
                        *b = project_out_row_with(b, i, self.thr)?;
                        *g = next_g;
                        applied += 1;
                    }
                    let p = Arc::new(self.marginals(b, g, t)?);
                    if let Some(memo) = self.memo.as_mut() {
                        if memo.len() < MEMO_CAPACITY {
                            memo.insert(prefix.clone(), Arc::clone(&p));
                        }
                    }
                    p
                }
            };
            let u: f64 = rng.random();
            let i = pick(&probs, u);
            prefix.push(i);
            marginals.push(probs);
        }
        Ok(Draw {
            indices: prefix,
            marginals,
        })
    }

    /// Histogram of `trials` draws keyed by sorted subset.
    pub fn subset_counts(&mut self, trials: usize, rng: &mut Rng) -> Result<BTreeMap<Vec<usize>, u64>> {
        let mut counts = BTreeMap::new();
        for _ in 0..trials {
            let mut s = self.draw(rng)?.indices;
            s.sort_unstable();
            *counts.entry(s).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

pub fn volume_sample(a: &RealMatrix, k: usize, seed: u64, subroutine: Subroutine) -> Result<SelectionResult> {
    let mut sampler = VolumeSampler::new(a, k, subroutine)?;
    let mut rng = rng_from_seed(seed);
    let draw = sampler.draw(&mut rng)?;
    Ok(SelectionResult {
        indices: draw.indices,
        per_round_marginals: draw.marginals.iter().map(|p| p.as_ref().clone()).collect(),
        seed: Some(seed),
        sketch: None,
    })
}

/// Eigenvalues of `G` clipped at zero; shared with the derandomized selector.
pub(crate) fn clipped_spectrum(g: &GramMatrix, thr: ZeroThreshold) -> Result<Vec<f64>> {
    clip_eigenvalues_with(&symmetric_eigenvalues(g)?, thr.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_force_distribution, exact_marginal};
    use crate::random::gaussian_matrix;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn last_round_is_squared_length() {
        let b = gaussian_matrix(6, 4, 1);
        let g = gram(&b);
        for k in 1..=4 {
            let mv = marginals_gram(&g, &b, k, k).unwrap();
            let lens: Vec<f64> = (0..6).map(|i| b.row_norm_sq(i)).collect();
            assert_eq!(mv.weights, lens);
            let sv = marginals_svd(&b, k, k).unwrap();
            assert_vec_close(&sv.weights, &lens, 1e-12);
        }
    }

    #[test]
    fn diagonal_examples() {
        let a = RealMatrix::from_diag(&[2.0, 3.0]);
        let want = [4.0 / 13.0, 9.0 / 13.0];
        assert_vec_close(&marginals_gram(&gram(&a), &a, 1, 1).unwrap().normalized(), &want, 1e-15);
        assert_vec_close(&marginals_svd(&a, 1, 1).unwrap().normalized(), &want, 1e-15);

        let i3 = RealMatrix::identity(3);
        let third = [1.0 / 3.0; 3];
        assert_vec_close(&marginals_svd(&i3, 1, 2).unwrap().normalized(), &third, 1e-15);
        assert_vec_close(&marginals_gram(&gram(&i3), &i3, 1, 2).unwrap().normalized(), &third, 1e-15);
    }

    #[test]
    fn first_round_matches_oracle() {
        let a = gaussian_matrix(5, 4, 7);
        let mv = marginals_gram(&gram(&a), &a, 1, 2).unwrap().normalized();
        for (i, p) in mv.iter().enumerate() {
            assert!((p - exact_marginal(&a, 2, &[], i).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn subroutines_agree_after_projection() {
        let a = gaussian_matrix(6, 4, 13);
        let thr = ZeroThreshold::for_matrix(&a);
        let b = project_out_row_with(&a, 2, thr).unwrap();
        let g = gram(&b);
        let x = marginals_gram_with(&g, &b, 2, 3, thr).unwrap().normalized();
        let y = marginals_svd_with(&b, 2, 3, thr).unwrap().normalized();
        assert_vec_close(&x, &y, 1e-8);
    }

    #[test]
    fn degenerate_and_invalid_rounds() {
        let a = RealMatrix::from_rows(&[[1.0, 0.0], [2.0, 0.0]]).unwrap();
        let thr = ZeroThreshold::for_matrix(&a);
        let b = project_out_row_with(&a, 0, thr).unwrap();
        assert_eq!(
            marginals_gram_with(&gram(&b), &b, 2, 2, thr),
            Err(Error::Degenerate { round: 2 })
        );
        assert!(marginals_gram(&gram(&a), &a, 3, 2).is_err());
        assert_eq!(
            marginals_svd(&a, 1, 3),
            Err(Error::RankError { k: 3, rank: 2 })
        );
    }

    #[test]
    fn pick_handles_zeros_and_ties() {
        let p = [0.0, 0.5, 0.0, 0.5];
        assert_eq!(pick(&p, 0.0), 1);
        assert_eq!(pick(&p, 0.5), 1);
        assert_eq!(pick(&p, 0.5000001), 3);
        assert_eq!(pick(&p, 1.0), 3);
    }

    #[test]
    fn rank_is_checked() {
        let a = RealMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        assert_eq!(
            volume_sample(&a, 2, 0, Subroutine::Gram).unwrap_err(),
            Error::RankError { k: 2, rank: 1 }
        );
        assert!(volume_sample(&a, 0, 0, Subroutine::Gram).is_err());
    }

    #[test]
    fn dependent_rows_never_chosen_together() {
        let a = RealMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let mut sampler = VolumeSampler::new(&a, 2, Subroutine::Gram).unwrap().with_memo();
        let counts = sampler.subset_counts(4000, &mut rng_from_seed(5)).unwrap();
        assert!(!counts.contains_key(&vec![0, 1]));
        let c02 = counts[&vec![0, 2]] as f64 / 4000.0;
        assert!((c02 - 0.5).abs() < 0.05, "{c02}");
    }

    #[test]
    fn selection_is_deterministic_and_memo_transparent() {
        let a = gaussian_matrix(7, 4, 99);
        for sub in [Subroutine::Gram, Subroutine::Svd] {
            let x = volume_sample(&a, 3, 42, sub).unwrap();
            let y = volume_sample(&a, 3, 42, sub).unwrap();
            assert_eq!(x, y);
            for m in &x.per_round_marginals {
                assert!((m.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
        let mut plain = VolumeSampler::new(&a, 3, Subroutine::Gram).unwrap();
        let mut memo = VolumeSampler::new(&a, 3, Subroutine::Gram).unwrap().with_memo();
        let (mut r1, mut r2) = (rng_from_seed(8), rng_from_seed(8));
        for _ in 0..50 {
            assert_eq!(plain.draw(&mut r1).unwrap(), memo.draw(&mut r2).unwrap());
        }
    }

    #[test]
    fn identity_sampling_is_uniform() {
        let d = brute_force_distribution(&RealMatrix::identity(3), 2).unwrap();
        let mut sampler = VolumeSampler::new(&RealMatrix::identity(3), 2, Subroutine::Gram)
            .unwrap()
            .with_memo();
        let counts = sampler.subset_counts(30_000, &mut rng_from_seed(1)).unwrap();
        assert!(d.tv_distance(&counts) < 0.02);
    }

    #[test]
    fn subroutine_parses() {
        assert_eq!("gram".parse::<Subroutine>().unwrap(), Subroutine::Gram);
        assert_eq!("svd".parse::<Subroutine>().unwrap(), Subroutine::Svd);
        assert!("qr".parse::<Subroutine>().is_err());
        assert_eq!(Subroutine::Svd.to_string(), "svd");
    }
}
