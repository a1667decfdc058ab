//! Approximate volume sampling after a Gaussian random projection of the rows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::sampler::{volume_sample, SelectionResult, SketchInfo, Subroutine};

pub const DEFAULT_DIMENSION_CONSTANT: f64 = 4.0;

/// Added to the seed to obtain the replacement sketch after a rank-deficient draw.
const RESAMPLE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionConfig {
    pub k: usize,
    pub eps: f64,
    pub m: usize,
    pub c_dim: f64,
    pub seed: u64,
}

impl ProjectionConfig {
    pub fn new(k: usize, eps: f64, m: usize, seed: u64) -> Result<Self> {
        Self {
            k,
            eps,
            m,
            c_dim: DEFAULT_DIMENSION_CONSTANT,
            seed,
        }
        .validated()
    }

    pub fn with_c_dim(mut self, c_dim: f64) -> Result<Self> {
        self.c_dim = c_dim;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return Err(Error::DomainError(format!("eps must lie in (0, 1/2], got {}", self.eps)));
        }
        if self.k == 0 || self.m == 0 {
            return Err(Error::DomainError("k and m must be positive".into()));
        }
        if !(self.c_dim > 0.0 && self.c_dim.is_finite()) {
            return Err(Error::DomainError(format!("c_dim must be positive, got {}", self.c_dim)));
        }
        Ok(self)
    }

    /// `d = ceil(c_dim · k² · ln m / ε²)`, at least 1.
    pub fn target_dim(&self) -> usize {
        let k = self.k as f64;
        let d = (self.c_dim * k * k * (self.m as f64).ln() / (self.eps * self.eps)).ceil();
        (d as usize).max(1)
    }
}

/// `Ã = A·R` with `R` an `n × d` matrix of i.i.d. `N(0, 1/d)` entries.
///
/// Column `j` of `R` comes from its own ChaCha stream (`j + 1`) of the seed,
/// so the result does not depend on how the work is split across threads.
pub fn gaussian_sketch(a: &RealMatrix, cfg: &ProjectionConfig) -> Result<RealMatrix> {
    sketch_with_seed(a, cfg.target_dim(), cfg.seed)
}

fn sketch_with_seed(a: &RealMatrix, d: usize, seed: u64) -> Result<RealMatrix> {
    let n = a.cols();
    let normal = Normal::new(0.0, (1.0 / d as f64).sqrt()).expect("positive variance");
    // R stored column-major: column j is projection[j*n..(j+1)*n]
    let projection: Vec<f64> = (0..d)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64 + 1);
            (0..n).map(move |_| normal.sample(&mut rng)).collect::<Vec<_>>()
        })
        .collect();
    let data: Vec<f64> = a
        .iter_rows()
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|row| {
            projection
                .chunks_exact(n)
                .map(|col| crate::matrix::dot(row, col))
                .collect::<Vec<_>>()
        })
        .collect();
    RealMatrix::new(a.rows(), d, data)
}

/// Sketch (when it reduces the dimension), then exact volume sampling with the
/// Gram subroutine. Indices refer to rows of the original `A`.
pub fn approx_volume_sample(a: &RealMatrix, k: usize, eps: f64, seed: u64) -> Result<SelectionResult> {
    approx_volume_sample_with(a, &ProjectionConfig::new(k, eps, a.rows(), seed)?)
}

pub fn approx_volume_sample_with(a: &RealMatrix, cfg: &ProjectionConfig) -> Result<SelectionResult> {
    let d = cfg.target_dim();
    if d >= a.cols() {
        let mut res = volume_sample(a, cfg.k, cfg.seed, Subroutine::Gram)?;
        res.sketch = Some(SketchInfo {
            dim: d,
            seed: cfg.seed,
            applied: false,
            attempts: 0,
        });
        return Ok(res);
    }
    let mut sketch_seed = cfg.seed;
    for attempt in 1..=2 {
        let sketched = sketch_with_seed(a, d, sketch_seed)?;
        match volume_sample(&sketched, cfg.k, cfg.seed, Subroutine::Gram) {
            Ok(mut res) => {
                res.sketch = Some(SketchInfo {
                    dim: d,
                    seed: sketch_seed,
                    applied: true,
                    attempts: attempt,
                });
                return Ok(res);
            }
            Err(Error::RankError { .. }) if attempt == 1 => {
                sketch_seed = cfg.seed.wrapping_add(RESAMPLE_SEED_OFFSET);
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("second attempt always returns")
}

/// The matrix actually sampled by [`approx_volume_sample_with`] and its sketch
/// record; `None` for the record means the input is used unchanged.
pub fn sketched_input(a: &RealMatrix, cfg: &ProjectionConfig) -> Result<(RealMatrix, Option<u64>)> {
    let d = cfg.target_dim();
    if d >= a.cols() {
        return Ok((a.clone(), None));
    }
    let first = sketch_with_seed(a, d, cfg.seed)?;
    if crate::svd::numerical_rank(&first)? >= cfg.k {
        return Ok((first, Some(cfg.seed)));
    }
    let seed = cfg.seed.wrapping_add(RESAMPLE_SEED_OFFSET);
    Ok((sketch_with_seed(a, d, seed)?, Some(seed)))
}
