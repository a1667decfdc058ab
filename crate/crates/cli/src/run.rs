//! Command dispatch and the JSON report shapes. Row indices leave this module
//! 1-based.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use volsel_core::charpoly::minor_sums;
use volsel_core::matrix::residual_frobenius_sq;
use volsel_core::oracle::{
    brute_force_distribution, exact_marginal, expected_residual, lower_bound_matrix, single_row_spectral_ratios,
    LowerBoundClosedForm,
};
use volsel_core::random::rng_from_seed;
use volsel_core::sketch::approx_volume_sample_with;
use volsel_core::{
    derandomized_select, gram, marginals_gram, marginals_svd, subset_det_sum, thin_svd, ProjectionConfig,
    RealMatrix, Subroutine, VolumeSampler,
};

use crate::config::{CommandKind, RunConfig};
use crate::ingest::ingest_csv;

pub const TV_TOLERANCE: f64 = 0.02;

/// Result of one command: the report, the selected rows (1-based) when the
/// command selects any, and whether every check in the report passed.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub indices: Option<Vec<usize>>,
    pub passed: bool,
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

#[derive(Serialize)]
struct SubsetCount {
    subset: Vec<usize>,
    count: u64,
}

#[derive(Serialize)]
struct SampleReport {
    command: &'static str,
    rows: usize,
    cols: usize,
    k: usize,
    seed: u64,
    subroutine: Subroutine,
    indices: Vec<usize>,
    per_round_marginals: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subset_counts: Option<Vec<SubsetCount>>,
}

#[derive(Serialize)]
struct TraceRow {
    round: usize,
    chosen: usize,
    expectation_before: f64,
    expectation_after: f64,
    tied_rows: usize,
}

#[derive(Serialize)]
struct Bounds {
    /// ‖A − A_k‖_F²
    best_rank_k_residual_sq: f64,
    /// (k+1)‖A − A_k‖_F²
    frobenius_bound: f64,
    frobenius_certified: bool,
    spectral_residual_sq: f64,
    /// (k+1)(n−k)‖A − A_k‖_2²
    spectral_bound: f64,
    spectral_certified: bool,
}

#[derive(Serialize)]
struct SelectReport {
    command: &'static str,
    rows: usize,
    cols: usize,
    k: usize,
    indices: Vec<usize>,
    frobenius_residual_sq: f64,
    bounds: Bounds,
    trace: Vec<TraceRow>,
    per_round_marginals: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct ApproxReport {
    command: &'static str,
    rows: usize,
    cols: usize,
    k: usize,
    eps: f64,
    seed: u64,
    c_dim: f64,
    sketch_dim: usize,
    sketch_applied: bool,
    sketch_seed: u64,
    sketch_attempts: usize,
    indices: Vec<usize>,
    per_round_marginals: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SubsetRow {
    subset: Vec<usize>,
    determinant: f64,
    probability: f64,
    empirical: f64,
}

#[derive(Serialize)]
struct IdentityCheck {
    name: String,
    value: f64,
    reference: f64,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

impl IdentityCheck {
    fn relative(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        let residual = (value - reference).abs() / value.abs().max(reference.abs()).max(f64::MIN_POSITIVE);
        Self::with_residual(name, value, reference, residual, tolerance)
    }

    fn with_residual(name: impl Into<String>, value: f64, reference: f64, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    rows: usize,
    cols: usize,
    k: usize,
    seed: u64,
    subroutine: Subroutine,
    trials: usize,
    tv_distance: f64,
    tv_tolerance: f64,
    passed: bool,
    subsets: Vec<SubsetRow>,
    identities: Vec<IdentityCheck>,
}

#[derive(Serialize)]
struct LowerboundReport {
    command: &'static str,
    n: usize,
    eps: f64,
    ratios: Vec<f64>,
    min_ratio: f64,
    closed_form_ratio: f64,
    /// √n / 2
    guaranteed_ratio: f64,
    sigma_1: f64,
    sigma_2: f64,
    sigma_1_closed_form: f64,
    sigma_2_closed_form: f64,
    passed: bool,
}

#[derive(Serialize)]
struct BenchOutput {
    command: &'static str,
    k: usize,
    #[serde(flatten)]
    report: volsel_core::bench::BenchReport,
}

fn load(cfg: &RunConfig) -> Result<RealMatrix> {
    let path = cfg.input.as_ref().context("--input is required")?;
    Ok(ingest_csv(path)?)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        CommandKind::Sample => sample(cfg),
        CommandKind::Select => select(cfg),
        CommandKind::ApproxSample => approx_sample(cfg),
        CommandKind::Verify => verify(cfg),
        CommandKind::Lowerbound => lowerbound(cfg),
        CommandKind::Bench => bench(cfg),
    }
}

fn sample(cfg: &RunConfig) -> Result<Outcome> {
    let a = load(cfg)?;
    let mut sampler = VolumeSampler::new(&a, cfg.k, cfg.subroutine)?;
    if cfg.trials > 1 {
        sampler = sampler.with_memo();
    }
    let mut rng = rng_from_seed(cfg.seed);
    let first = sampler.draw(&mut rng)?;
    let subset_counts = if cfg.trials > 1 {
        let mut counts = sampler.subset_counts(cfg.trials - 1, &mut rng)?;
        let mut s = first.indices.clone();
        s.sort_unstable();
        *counts.entry(s).or_insert(0) += 1;
        Some(
            counts
                .into_iter()
                .map(|(subset, count)| SubsetCount {
                    subset: one_based(&subset),
                    count,
                })
                .collect(),
        )
    } else {
        None
    };
    let indices = one_based(&first.indices);
    let report = SampleReport {
        command: "sample",
        rows: a.rows(),
        cols: a.cols(),
        k: cfg.k,
        seed: cfg.seed,
        subroutine: cfg.subroutine,
        indices: indices.clone(),
        per_round_marginals: first.marginals.iter().map(|m| m.as_ref().clone()).collect(),
        subset_counts,
    };
    Ok(Outcome {
        report: serde_json::to_value(report)?,
        indices: Some(indices),
        passed: true,
    })
}

fn select(cfg: &RunConfig) -> Result<Outcome> {
    let a = load(cfg)?;
    let k = cfg.k;
    let d = derandomized_select(&a, k)?;
    let chosen = &d.selection.indices;
    let svd = thin_svd(&a)?;
    let resid = volsel_core::matrix::residual_after_subset(&a, chosen)?;
    let frobenius_residual_sq = residual_frobenius_sq(&a, chosen)?;
    let tail = svd.tail_energy(k);
    let spectral_residual_sq = volsel_core::spectral_norm(&resid)?.powi(2);
    let spectral_bound = ((k + 1) * a.cols().saturating_sub(k)) as f64 * svd.sigma(k).powi(2);
    // rounding slack relative to the input scale
    let slack = 1e-12 * a.frobenius_norm_sq();
    let bounds = Bounds {
        best_rank_k_residual_sq: tail,
        frobenius_bound: (k + 1) as f64 * tail,
        frobenius_certified: frobenius_residual_sq <= (k + 1) as f64 * tail * (1.0 + 1e-8) + slack,
        spectral_residual_sq,
        spectral_bound,
        spectral_certified: spectral_residual_sq <= spectral_bound * (1.0 + 1e-8) + slack,
    };
    let indices = one_based(chosen);
    let report = SelectReport {
        command: "select",
        rows: a.rows(),
        cols: a.cols(),
        k,
        indices: indices.clone(),
        frobenius_residual_sq,
        bounds,
        trace: d
            .trace
            .iter()
            .map(|r| TraceRow {
                round: r.round,
                chosen: r.chosen + 1,
                expectation_before: r.expectation_before,
                expectation_after: r.expectation_after,
                tied_rows: r.tied_rows,
            })
            .collect(),
        per_round_marginals: d.selection.per_round_marginals.clone(),
    };
    Ok(Outcome {
        report: serde_json::to_value(report)?,
        indices: Some(indices),
        passed: true,
    })
}

fn approx_sample(cfg: &RunConfig) -> Result<Outcome> {
    let a = load(cfg)?;
    let eps = cfg.eps.context("--eps is required")?;
    let pc = ProjectionConfig::new(cfg.k, eps, a.rows(), cfg.seed)?.with_c_dim(cfg.c_dim)?;
    let res = approx_volume_sample_with(&a, &pc)?;
    let info = res.sketch.expect("approximate sampler records its sketch");
    let indices = one_based(&res.indices);
    let report = ApproxReport {
        command: "approx-sample",
        rows: a.rows(),
        cols: a.cols(),
        k: cfg.k,
        eps,
        seed: cfg.seed,
        c_dim: cfg.c_dim,
        sketch_dim: info.dim,
        sketch_applied: info.applied,
        sketch_seed: info.seed,
        sketch_attempts: info.attempts,
        indices: indices.clone(),
        per_round_marginals: res.per_round_marginals,
    };
    Ok(Outcome {
        report: serde_json::to_value(report)?,
        indices: Some(indices),
        passed: true,
    })
}

fn identity_checks(a: &RealMatrix, k: usize) -> Result<Vec<IdentityCheck>> {
    let mut checks = Vec::new();
    for j in 1..=k {
        let enumerated: f64 = brute_force_distribution(a, j)?.entries.iter().map(|e| e.determinant).sum();
        checks.push(IdentityCheck::relative(
            format!("minor_sum_k{j}"),
            subset_det_sum(a, j)?,
            enumerated,
            1e-8,
        ));
    }

    let g = marginals_gram(&gram(a), a, 1, k)?.normalized();
    let s = marginals_svd(a, 1, k)?.normalized();
    let diff = g.iter().zip(&s).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    checks.push(IdentityCheck::with_residual("subroutine_agreement_round_1", diff, 0.0, diff, 1e-8));

    let oracle: Vec<f64> = (0..a.rows()).map(|i| exact_marginal(a, k, &[], i)).collect::<Result<_, _>>()?;
    let diff = g.iter().zip(&oracle).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    checks.push(IdentityCheck::with_residual("round_1_marginals_vs_enumeration", diff, 0.0, diff, 1e-9));

    if k < a.cols() {
        let e = minor_sums(&gram(a), k + 1)?;
        if e[k] > 0.0 {
            checks.push(IdentityCheck::relative(
                "expected_residual",
                (k + 1) as f64 * e[k + 1] / e[k],
                expected_residual(a, k)?,
                1e-8,
            ));
        }
    }
    Ok(checks)
}

fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let a = load(cfg)?;
    let exact = brute_force_distribution(&a, cfg.k)?;
    let mut sampler = VolumeSampler::new(&a, cfg.k, cfg.subroutine)?.with_memo();
    let counts = sampler.subset_counts(cfg.trials, &mut rng_from_seed(cfg.seed))?;
    let tv_distance = exact.tv_distance(&counts);
    let identities = identity_checks(&a, cfg.k)?;
    let passed = tv_distance <= TV_TOLERANCE && identities.iter().all(|c| c.pass);
    let subsets = exact
        .entries
        .iter()
        .map(|e| SubsetRow {
            subset: one_based(&e.subset),
            determinant: e.determinant,
            probability: e.probability,
            empirical: counts.get(&e.subset).copied().unwrap_or(0) as f64 / cfg.trials as f64,
        })
        .collect();
    let report = VerifyReport {
        command: "verify",
        rows: a.rows(),
        cols: a.cols(),
        k: cfg.k,
        seed: cfg.seed,
        subroutine: cfg.subroutine,
        trials: cfg.trials,
        tv_distance,
        tv_tolerance: TV_TOLERANCE,
        passed,
        subsets,
        identities,
    };
    Ok(Outcome {
        report: serde_json::to_value(report)?,
        indices: None,
        passed,
    })
}

fn lowerbound(cfg: &RunConfig) -> Result<Outcome> {
    let eps = cfg.eps.context("--eps is required")?;
    let a = lower_bound_matrix(cfg.n, eps)?;
    let closed = LowerBoundClosedForm::new(cfg.n, eps);
    let ratios = single_row_spectral_ratios(&a)?;
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let svd = thin_svd(&a)?;
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let guaranteed_ratio = (cfg.n as f64).sqrt() / 2.0;
    let passed = min_ratio >= guaranteed_ratio
        && ratios.iter().all(|r| rel(*r, closed.ratio) <= 1e-6)
        && rel(svd.sigma(0), closed.sigma_1) <= 1e-8
        && rel(svd.sigma(1), closed.sigma_2) <= 1e-8;
    let report = LowerboundReport {
        command: "lowerbound",
        n: cfg.n,
        eps,
        ratios,
        min_ratio,
        closed_form_ratio: closed.ratio,
        guaranteed_ratio,
        sigma_1: svd.sigma(0),
        sigma_2: svd.sigma(1),
        sigma_1_closed_form: closed.sigma_1,
        sigma_2_closed_form: closed.sigma_2,
        passed,
    };
    Ok(Outcome {
        report: serde_json::to_value(report)?,
        indices: None,
        passed,
    })
}

fn bench(cfg: &RunConfig) -> Result<Outcome> {
    let report = volsel_core::bench::run_bench(&cfg.sizes, cfg.k, cfg.seed)?;
    Ok(Outcome {
        report: serde_json::to_value(BenchOutput {
            command: "bench",
            k: cfg.k,
            report,
        })?,
        indices: None,
        passed: true,
    })
}
