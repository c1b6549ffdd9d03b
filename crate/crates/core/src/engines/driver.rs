use std::time::Instant;

use log::{debug, info};
use rayon::prelude::*;

use super::objective::descent_with_matrix;
use super::{
    average_kernel, degrees_of_freedom, fa_model_update, fc_model_update, impute_view,
    pca_model_update, regularize, select_rank, CompletionConfig, CompletionResult, FaParams,
    Method, ModelParams, RankPolicy, DEFAULT_REG_EPSILON,
};
use crate::error::{Error, Result};
use crate::matrix::{is_pd, SymmetricMatrix};
use crate::views::{apply_mask, partition, unpartition, Fill, PartitionedView, VisibilityPattern};

/// Snapshot handed to the observer after every iteration.
pub struct IterationState<'a> {
    /// 1-based.
    pub iteration: usize,
    pub completed: &'a [SymmetricMatrix],
    pub model: &'a ModelParams,
    pub model_matrix: &'a SymmetricMatrix,
    /// Descent objective, as recorded in [`CompletionResult::trace`].
    pub objective: f64,
}

/// Runs the completion loop to convergence.
pub fn run_completion(
    qs: &[SymmetricMatrix],
    pattern: &VisibilityPattern,
    cfg: &CompletionConfig,
) -> Result<CompletionResult> {
    run_completion_observed(qs, pattern, cfg, |_| {})
}

/// [`run_completion`] with a callback after each iteration.
///
/// Only the visible blocks of `qs` are read. Every iteration imputes all
/// views from the current model, then refits the model once to the
/// regularized average. The loop stops when the relative change of the
/// objective drops below `cfg.tol`, after the first iteration when nothing
/// is hidden, or at `cfg.max_iters`.
pub fn run_completion_observed<F>(
    qs: &[SymmetricMatrix],
    pattern: &VisibilityPattern,
    cfg: &CompletionConfig,
    mut observer: F,
) -> Result<CompletionResult>
where
    F: FnMut(&IterationState<'_>),
{
    cfg.validate()?;
    let views = qs.len();
    if views == 0 {
        return Err(Error::InvalidArgument("need at least one kernel".into()));
    }
    if pattern.views() != views {
        return Err(Error::Dimension(format!(
            "mask has {} views but {views} kernels were given",
            pattern.views()
        )));
    }
    let ell = pattern.ell();
    for (k, q) in qs.iter().enumerate() {
        if q.dim() != ell {
            return Err(Error::Dimension(format!(
                "kernel {k} is {0}x{0} but the mask has ell = {ell}",
                q.dim()
            )));
        }
    }

    let visible: Vec<SymmetricMatrix> = qs
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let vv = partition(q, pattern.hidden(k))?.vv;
            if is_pd(&vv) && vv.cholesky("visible block").is_ok() {
                Ok(vv)
            } else {
                Err(Error::VisibleBlockNotPd { view: k })
            }
        })
        .collect::<Result<_>>()?;

    let mut completed: Vec<SymmetricMatrix> = qs
        .iter()
        .enumerate()
        .map(|(k, q)| apply_mask(q, pattern.hidden(k), Fill::Zero))
        .collect::<Result<_>>()?;

    let eps = cfg.reg_epsilon;
    let s0 = average_kernel(&completed)?;
    let mut model_matrix = regularize(&s0, views, eps);
    if !is_pd(&model_matrix) {
        // Only reachable with eps = 0 and an object hidden in every view.
        debug!("initial average kernel is singular; regularizing it with {DEFAULT_REG_EPSILON}");
        model_matrix = regularize(&s0, views, DEFAULT_REG_EPSILON);
    }

    let rank = match (cfg.method, cfg.rank) {
        (Method::Fc, _) => None,
        (_, RankPolicy::Fixed(q)) => Some(q),
        (_, RankPolicy::Criterion(c)) => Some(select_rank(&model_matrix, c)?),
    };
    let dof = degrees_of_freedom(cfg.method, ell, rank.unwrap_or(0))?;
    let mut model = match cfg.method {
        Method::Fc => ModelParams::Full(model_matrix.clone()),
        Method::Pca | Method::Fa => {
            let q = rank.expect("rank is set for restricted models");
            let init = pca_model_update(&model_matrix, q).map_err(|e| e.at(0, None))?;
            if cfg.method == Method::Pca {
                ModelParams::Pca(init)
            } else {
                let psi = nalgebra::DVector::from_element(ell, init.sigma2);
                ModelParams::Fa(FaParams { w: init.w, psi })
            }
        }
    };
    info!(
        "completing {views} views of {ell} objects with {} (rank {rank:?}, dof {dof})",
        cfg.method
    );

    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let mut trace = Vec::new();
    let mut divergence_trace = Vec::new();
    let mut wall_clock_ms = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for t in 1..=cfg.max_iters {
        let started = Instant::now();
        iterations = t;

        let impute = |k: usize| -> Result<Option<SymmetricMatrix>> {
            let hidden = pattern.hidden(k);
            if hidden.is_empty() {
                return Ok(None);
            }
            let pm = partition(&model_matrix, hidden)?;
            let (vh, hh) = impute_view(&visible[k], &pm)?;
            let full = unpartition(&PartitionedView {
                vv: visible[k].clone(),
                vh,
                hh,
                order: pm.order,
            })?;
            Ok(Some(full))
        };
        let updates: Vec<Result<Option<SymmetricMatrix>>> = match &pool {
            Some(pool) => pool.install(|| (0..views).into_par_iter().map(impute).collect()),
            None => (0..views).map(impute).collect(),
        };
        for (k, update) in updates.into_iter().enumerate() {
            if let Some(full) = update.map_err(|e| e.at(t, Some(k)))? {
                completed[k] = full;
            }
        }

        let s = regularize(&average_kernel(&completed)?, views, eps);
        model = match &model {
            ModelParams::Full(_) => ModelParams::Full(fc_model_update(&s).map_err(|e| e.at(t, None))?),
            ModelParams::Pca(p) => ModelParams::Pca(
                pca_model_update(&s, p.w.ncols()).map_err(|e| e.at(t, None))?,
            ),
            ModelParams::Fa(prev) => {
                ModelParams::Fa(fa_model_update(&s, prev).map_err(|e| e.at(t, None))?)
            }
        };
        model_matrix = model.model_matrix();

        let (j, plain) = descent_with_matrix(&completed, &model_matrix, eps).map_err(|e| e.at(t, None))?;
        debug!("iteration {t}: objective {j:.12e}");
        trace.push(j);
        divergence_trace.push(plain);
        wall_clock_ms.push(started.elapsed().as_secs_f64() * 1e3);

        observer(&IterationState {
            iteration: t,
            completed: &completed,
            model: &model,
            model_matrix: &model_matrix,
            objective: j,
        });

        if !pattern.has_hidden() {
            converged = true;
            break;
        }
        if let [.., prev, cur] = trace[..] {
            if (cur - prev).abs() / prev.abs().max(1.0) < cfg.tol {
                converged = true;
                break;
            }
        }
    }
    info!(
        "{} after {iterations} iterations, objective {:.9e}",
        if converged { "converged" } else { "stopped" },
        trace.last().copied().unwrap_or(f64::NAN)
    );

    Ok(CompletionResult {
        completed,
        model,
        trace,
        divergence_trace,
        wall_clock_ms,
        iterations,
        converged,
        dof,
        rank,
    })
}
