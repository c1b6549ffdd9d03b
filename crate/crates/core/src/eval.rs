//! Synthetic recovery experiments.
//!
//! Ground truth follows the PPCA generative form: a shared `WWᵀ + σ²I`, with
//! an optional per-view PD perturbation so the views agree without being
//! identical. Objects are then hidden, completed, and scored on the hidden
//! entries only.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::engines::{run_completion, CompletionConfig, Method};
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::views::{apply_mask, random_mask, Fill, VisibilityPattern};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub ell: usize,
    pub views: usize,
    pub true_rank: usize,
    pub noise_sigma2: f64,
    pub per_view_jitter: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.views == 0 {
            return Err(Error::InvalidArgument("need at least one view".into()));
        }
        if self.true_rank == 0 || self.true_rank >= self.ell {
            return Err(Error::InvalidArgument(format!(
                "true rank {} outside [1, {}]",
                self.true_rank,
                self.ell.saturating_sub(1)
            )));
        }
        if !(self.noise_sigma2 > 0.0) {
            return Err(Error::InvalidArgument("noise variance must be positive".into()));
        }
        if !(self.per_view_jitter >= 0.0) {
            return Err(Error::InvalidArgument("jitter must be non-negative".into()));
        }
        Ok(())
    }
}

fn standard_normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    // Filled row by row so the draw order does not depend on storage layout.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// Draws `K` ground-truth kernels.
///
/// `W` (`ℓ × true_rank`) is standard normal, `M* = WWᵀ + σ²I`, and view `k`
/// is `M* + A_k A_kᵀ · jitter/ℓ` for a fresh standard-normal `ℓ × ℓ` matrix
/// `A_k` (skipped when jitter is zero). All draws come from one ChaCha8
/// stream seeded with `spec.seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<SymmetricMatrix>> {
    spec.validate()?;
    let ell = spec.ell;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w = standard_normal(ell, spec.true_rank, &mut rng);
    let mut shared = &w * w.transpose();
    for i in 0..ell {
        shared[(i, i)] += spec.noise_sigma2;
    }
    let shared = SymmetricMatrix::new(shared)?;
    (0..spec.views)
        .map(|_| {
            if spec.per_view_jitter == 0.0 {
                return Ok(shared.clone());
            }
            let a = standard_normal(ell, ell, &mut rng);
            let jitter = &a * a.transpose() * (spec.per_view_jitter / ell as f64);
            SymmetricMatrix::new(shared.as_matrix() + jitter)
        })
        .collect()
}

/// Relative Frobenius error over entries whose row or column is hidden.
///
/// Returns 0 when nothing is hidden, and infinity when the truth is zero on
/// those entries but the completion is not.
pub fn hidden_block_error(
    truth: &SymmetricMatrix,
    completed: &SymmetricMatrix,
    hidden: &[usize],
) -> Result<f64> {
    let ell = truth.dim();
    if completed.dim() != ell {
        return Err(Error::Dimension(format!(
            "truth is {ell}x{ell}, completion is {0}x{0}",
            completed.dim()
        )));
    }
    if let Some(&bad) = hidden.iter().find(|&&i| i >= ell) {
        return Err(Error::Dimension(format!("hidden index {bad} out of range for ell = {ell}")));
    }
    if hidden.is_empty() {
        return Ok(0.0);
    }
    let mut is_hidden = vec![false; ell];
    for &i in hidden {
        is_hidden[i] = true;
    }
    let (t, c) = (truth.as_matrix(), completed.as_matrix());
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..ell {
        for i in 0..ell {
            if is_hidden[i] || is_hidden[j] {
                let d = t[(i, j)] - c[(i, j)];
                num += d * d;
                den += t[(i, j)] * t[(i, j)];
            }
        }
    }
    Ok(match (num == 0.0, den == 0.0) {
        (true, _) => 0.0,
        (false, true) => f64::INFINITY,
        (false, false) => num.sqrt() / den.sqrt(),
    })
}

/// Recovery of one completion method against the ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryReport {
    pub method: String,
    pub per_view_relative_error: Vec<f64>,
    pub mean_relative_error: f64,
    /// Keyed by `"zero"` / `"mean"`; each is the mean over views.
    pub baseline_errors: BTreeMap<String, f64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

fn per_view_errors(
    truth: &[SymmetricMatrix],
    completed: &[SymmetricMatrix],
    pattern: &VisibilityPattern,
) -> Result<Vec<f64>> {
    if truth.len() != pattern.views() || completed.len() != pattern.views() {
        return Err(Error::Dimension(format!(
            "{} truth and {} completed kernels for a {}-view mask",
            truth.len(),
            completed.len(),
            pattern.views()
        )));
    }
    truth
        .iter()
        .zip(completed)
        .enumerate()
        .map(|(k, (t, c))| {
            if t.dim() != pattern.ell() {
                return Err(Error::Dimension(format!(
                    "view {k} is {0}x{0} but the mask has ell = {1}",
                    t.dim(),
                    pattern.ell()
                )));
            }
            hidden_block_error(t, c, pattern.hidden(k))
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean hidden-block error of the zero and mean fills.
pub fn baseline_errors(
    truth: &[SymmetricMatrix],
    pattern: &VisibilityPattern,
    baselines: crate::engines::Baselines,
) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (enabled, fill, name) in [(baselines.zero, Fill::Zero, "zero"), (baselines.mean, Fill::Mean, "mean")] {
        if !enabled {
            continue;
        }
        let filled: Vec<_> = truth
            .iter()
            .enumerate()
            .map(|(k, t)| apply_mask(t, pattern.hidden(k), fill))
            .collect::<Result<_>>()?;
        out.insert(name.to_string(), mean(&per_view_errors(truth, &filled, pattern)?));
    }
    Ok(out)
}

/// Assembles a report from completed kernels.
pub fn recovery_report(
    method: &str,
    truth: &[SymmetricMatrix],
    completed: &[SymmetricMatrix],
    pattern: &VisibilityPattern,
    objective_trace: Vec<f64>,
    iterations: usize,
    baselines: crate::engines::Baselines,
) -> Result<RecoveryReport> {
    let per_view = per_view_errors(truth, completed, pattern)?;
    Ok(RecoveryReport {
        method: method.to_string(),
        mean_relative_error: mean(&per_view),
        per_view_relative_error: per_view,
        baseline_errors: baseline_errors(truth, pattern, baselines)?,
        objective_trace,
        iterations,
    })
}

/// Generates truth, hides `fraction` of the objects per view with
/// `random_mask(ℓ, K, fraction, cfg.seed)`, and completes with each method.
pub fn compare_methods(
    spec: &SyntheticSpec,
    fraction: f64,
    methods: &[Method],
    cfg: &CompletionConfig,
) -> Result<Vec<RecoveryReport>> {
    let truth = generate_synthetic(spec)?;
    let pattern = random_mask(spec.ell, spec.views, fraction, cfg.seed)?;
    let masked: Vec<_> = truth
        .iter()
        .enumerate()
        .map(|(k, t)| apply_mask(t, pattern.hidden(k), Fill::Zero))
        .collect::<Result<_>>()?;
    methods
        .iter()
        .map(|&method| {
            let run_cfg = CompletionConfig {
                method,
                ..cfg.clone()
            };
            let result = run_completion(&masked, &pattern, &run_cfg)?;
            recovery_report(
                method.name(),
                &truth,
                &result.completed,
                &pattern,
                result.trace,
                result.iterations,
                cfg.baselines,
            )
        })
        .collect()
}
