//! Per-round timing of the two marginal subroutines on random matrices.

use std::time::Instant;

use rand::Rng as _;
use serde::Serialize;

use crate::error::Result;
use crate::matrix::{gram, gram_after_projection_with, project_out_row_with, ZeroThreshold};
use crate::random::{gaussian_matrix, rng_from_seed};
use crate::sampler::{marginals_gram_with, marginals_svd_with, pick, Subroutine};

#[derive(Debug, Clone, Serialize)]
pub struct BenchRun {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub subroutine: Subroutine,
    pub round_seconds: Vec<f64>,
    pub total_seconds: f64,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub runs: Vec<BenchRun>,
    /// First size `(m, n)` at which the SVD subroutine beat the Gram one.
    pub crossover: Option<(usize, usize)>,
}

/// Runs `k` rounds of the sampler with `subroutine` on an `m × n` Gaussian
/// matrix, timing the marginal computation of each round.
pub fn time_rounds(m: usize, n: usize, k: usize, seed: u64, subroutine: Subroutine) -> Result<BenchRun> {
    let a = gaussian_matrix(m, n, seed);
    let thr = ZeroThreshold::for_matrix(&a);
    let mut rng = rng_from_seed(seed);
    let mut b = a.clone();
    let mut g = gram(&a);
    let mut round_seconds = Vec::with_capacity(k);
    let mut indices = Vec::with_capacity(k);
    for t in 1..=k {
        let start = Instant::now();
        let mv = match subroutine {
            Subroutine::Gram => marginals_gram_with(&g, &b, t, k, thr)?,
            Subroutine::Svd => marginals_svd_with(&b, t, k, thr)?,
        };
        round_seconds.push(start.elapsed().as_secs_f64());
        let probs = mv.normalized();
        let u: f64 = rng.random();
        let i = pick(&probs, u);
        indices.push(i);
        g = gram_after_projection_with(&g, b.row(i), thr)?;
        b = project_out_row_with(&b, i, thr)?;
    }
    Ok(BenchRun {
        m,
        n,
        k,
        subroutine,
        total_seconds: round_seconds.iter().sum(),
        round_seconds,
        indices,
    })
}

pub fn run_bench(sizes: &[(usize, usize)], k: usize, seed: u64) -> Result<BenchReport> {
    let mut runs = Vec::new();
    let mut crossover = None;
    for &(m, n) in sizes {
        let kk = k.min(n);
        let gram_run = time_rounds(m, n, kk, seed, Subroutine::Gram)?;
        let svd_run = time_rounds(m, n, kk, seed, Subroutine::Svd)?;
        if crossover.is_none() && svd_run.total_seconds < gram_run.total_seconds {
            crossover = Some((m, n));
        }
        runs.push(gram_run);
        runs.push(svd_run);
    }
    Ok(BenchReport { seed, runs, crossover })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_every_round_for_both_subroutines() {
        let report = run_bench(&[(20, 5), (40, 8)], 3, 1).unwrap();
        assert_eq!(report.runs.len(), 4);
        for r in &report.runs {
            assert_eq!(r.round_seconds.len(), 3);
            assert_eq!(r.indices.len(), 3);
        }
    }
}
