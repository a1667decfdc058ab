//! Deterministic row-subset selection by the method of conditional
//! expectations.
//!
//! Picking row `i` in round `t` fixes the conditional expectation of the final
//! residual `‖A − π_S(A)‖_F²` to `(k−t+1) · |c_{n−k+t−1}(C_iᵀC_i)| / |c_{n−k+t}(C_iᵀC_i)|`.
//! Each round takes the row minimizing it, so the expectation never increases
//! and the final residual is at most `(k+1)‖A − A_k‖_F²`.

use rayon::prelude::*;
use serde::Serialize;

use crate::charpoly::{elementary_symmetric, minor_sums_with};
use crate::error::{Error, Result};
use crate::matrix::{
    gram, gram_after_projection_with, project_out_row_with, GramMatrix, RealMatrix, ZeroThreshold,
};
use crate::sampler::{clipped_spectrum, SelectionResult};
use crate::svd::thin_svd;

/// Denominators at or below this fraction of `e_{k−t}(BᵀB)` are infeasible;
/// numerators below the same fraction of `e_{k−t+1}(BᵀB)` count as zero.
pub const COEFF_ZERO_FACTOR: f64 = 1e-12;

/// Ratios within this relative band of the current best count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalScore {
    pub row: usize,
    /// `|c_{n−k+t−1}(C_iᵀC_i)|`
    pub numerator: f64,
    /// `|c_{n−k+t}(C_iᵀC_i)|`
    pub denominator: f64,
    /// `numerator / denominator`, `+∞` when infeasible.
    pub ratio: f64,
    pub feasible: bool,
}

fn round_scale(g: &GramMatrix, order: usize, thr: ZeroThreshold) -> Result<Vec<f64>> {
    Ok(elementary_symmetric(&clipped_spectrum(g, thr)?, order + 2))
}

pub fn conditional_scores(g: &GramMatrix, b: &RealMatrix, t: usize, k: usize) -> Result<Vec<ConditionalScore>> {
    conditional_scores_with(g, b, t, k, ZeroThreshold::for_matrix(b))
}

pub fn conditional_scores_with(
    g: &GramMatrix,
    b: &RealMatrix,
    t: usize,
    k: usize,
    thr: ZeroThreshold,
) -> Result<Vec<ConditionalScore>> {
    if k == 0 || t == 0 || t > k {
        return Err(Error::DomainError(format!("need 1 <= t <= k, got t = {t}, k = {k}")));
    }
    if k > b.cols() {
        return Err(Error::RankError { k, rank: b.cols() });
    }
    let order = k - t;
    let mut scale = round_scale(g, order, thr)?;
    scale.resize(order + 3, 0.0);
    let coeff_floor = COEFF_ZERO_FACTOR * scale[order];
    // a numerator this small means the residual is already zero up to rounding
    let numerator_floor = COEFF_ZERO_FACTOR * scale[order + 1];

    let scores: Vec<ConditionalScore> = (0..b.rows())
        .into_par_iter()
        .map(|row| {
            let nb = b.row_norm_sq(row);
            if thr.is_zero(nb) {
                return Ok(ConditionalScore {
                    row,
                    numerator: 0.0,
                    denominator: 0.0,
                    ratio: f64::INFINITY,
                    feasible: false,
                });
            }
            let c = gram_after_projection_with(g, b.row(row), thr)?;
            let e = minor_sums_with(&c, order + 1, thr.value())?;
            let (mut numerator, denominator) = (e[order + 1], e[order]);
            if numerator <= numerator_floor {
                numerator = 0.0;
            }
            let feasible = denominator > coeff_floor;
            Ok(ConditionalScore {
                row,
                numerator,
                denominator,
                ratio: if feasible { numerator / denominator } else { f64::INFINITY },
                feasible,
            })
        })
        .collect::<Result<_>>()?;
    if !scores.iter().any(|s| s.feasible) {
        return Err(Error::Degenerate { round: t });
    }
    Ok(scores)
}

/// Smallest ratio by cross-multiplication; ties go to the lowest row index.
pub fn argmin_score(scores: &[ConditionalScore]) -> Option<usize> {
    let mut best: Option<&ConditionalScore> = None;
    for s in scores.iter().filter(|s| s.feasible) {
        best = match best {
            None => Some(s),
            Some(b) if s.numerator * b.denominator < b.numerator * s.denominator * (1.0 - TIE_TOLERANCE) => Some(s),
            keep => keep,
        };
    }
    best.map(|s| s.row)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTrace {
    pub round: usize,
    pub chosen: usize,
    /// `E[‖A − π_S(A)‖_F² | prefix]` at the start of the round.
    pub expectation_before: f64,
    /// `E[‖A − π_S(A)‖_F² | prefix, X_t = chosen]`
    pub expectation_after: f64,
    /// Rows within the tie band of the chosen ratio.
    pub tied_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derandomized {
    pub selection: SelectionResult,
    pub trace: Vec<RoundTrace>,
    /// `‖A − π_S(A)‖_F²`, the last round's conditional expectation.
    pub residual_frobenius_sq: f64,
}

pub fn derandomized_select(a: &RealMatrix, k: usize) -> Result<Derandomized> {
    let rank = thin_svd(a)?.rank();
    if k == 0 || k > rank {
        return Err(Error::RankError { k, rank });
    }
    let thr = ZeroThreshold::for_matrix(a);
    let mut b = a.clone();
    let mut g = gram(a);
    let mut indices = Vec::with_capacity(k);
    let mut marginals = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);

    for t in 1..=k {
        let remaining = (k - t + 1) as f64;
        let scale = round_scale(&g, k - t, thr)?;
        let at = |s: usize| scale.get(s).copied().unwrap_or(0.0);
        // (k−t+2) e_{k−t+2}(B) / e_{k−t+1}(B)
        let expectation_before = (remaining + 1.0) * at(k - t + 2) / at(k - t + 1);

        let scores = conditional_scores_with(&g, &b, t, k, thr)?;
        let chosen = argmin_score(&scores).ok_or(Error::Degenerate { round: t })?;
        let best = scores[chosen];
        let tied_rows = scores
            .iter()
            .filter(|s| s.feasible && (s.ratio - best.ratio).abs() <= TIE_TOLERANCE * best.ratio)
            .count();

        // volume-sampling marginals come for free: p_i = ‖b_i‖² · denominator_i
        let weights: Vec<f64> = scores
            .iter()
            .map(|s| if thr.is_zero(b.row_norm_sq(s.row)) { 0.0 } else { b.row_norm_sq(s.row) * s.denominator })
            .collect();
        let total: f64 = weights.iter().sum();
        marginals.push(weights.iter().map(|w| w / total).collect());

        trace.push(RoundTrace {
            round: t,
            chosen,
            expectation_before,
            expectation_after: remaining * best.ratio,
            tied_rows,
        });
        indices.push(chosen);
        g = gram_after_projection_with(&g, b.row(chosen), thr)?;
        b = project_out_row_with(&b, chosen, thr)?;
    }

    let residual_frobenius_sq = trace.last().map_or(0.0, |r| r.expectation_after);
    Ok(Derandomized {
        selection: SelectionResult {
            indices,
            per_round_marginals: marginals,
            seed: None,
            sketch: None,
        },
        trace,
        residual_frobenius_sq,
    })
}
