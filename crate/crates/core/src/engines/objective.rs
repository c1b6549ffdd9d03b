use nalgebra::{Cholesky, DMatrix, Dyn};

use super::ModelParams;
use crate::error::{Error, Result};
use crate::matrix::{cholesky_logdet, inner, logdet, SymmetricMatrix};

/// `Σ_k LogDet(Q_k, M)` with `M` materialized from `model`.
pub fn objective(qs: &[SymmetricMatrix], model: &ModelParams) -> Result<f64> {
    let m = model.model_matrix();
    divergence_sum(qs, &m)
}

pub(crate) fn divergence_sum(qs: &[SymmetricMatrix], m: &SymmetricMatrix) -> Result<f64> {
    let chol = m.cholesky("objective, model matrix")?;
    divergence_sum_factored(qs, &Factored::new(&chol))
}

/// What every divergence against a fixed `M` needs.
struct Factored {
    m_inv: DMatrix<f64>,
    logdet_m: f64,
}

impl Factored {
    fn new(chol: &Cholesky<f64, Dyn>) -> Self {
        Factored {
            m_inv: chol.inverse(),
            logdet_m: cholesky_logdet(chol),
        }
    }

    fn dim(&self) -> usize {
        self.m_inv.nrows()
    }
}

fn divergence_sum_factored(qs: &[SymmetricMatrix], f: &Factored) -> Result<f64> {
    let ell = f.dim() as f64;
    let mut total = 0.0;
    for (k, q) in qs.iter().enumerate() {
        if q.dim() != f.dim() {
            return Err(Error::Dimension(format!(
                "kernel {k} is {0}x{0}, model is {1}x{1}",
                q.dim(),
                f.dim()
            )));
        }
        let ld = logdet(q).map_err(|_| {
            Error::NotPositiveDefinite(format!("objective, kernel {k}"))
        })?;
        total += 0.5 * (f.logdet_m - ld + inner(&f.m_inv, q.as_matrix()) - ell);
    }
    Ok(total)
}

/// The quantity the regularized loop actually descends:
/// `Σ_k LogDet(Q_k, M) + ε · LogDet(I, M)`.
///
/// Pulling `ε·I` into the averaged kernel is the same as adding a pseudo-view
/// equal to the identity with weight `ε`, so every update step minimizes this
/// sum exactly and its trace is non-increasing.
pub fn descent_objective(qs: &[SymmetricMatrix], model: &ModelParams, eps: f64) -> Result<f64> {
    let m = model.model_matrix();
    descent_with_matrix(qs, &m, eps).map(|(d, _)| d)
}

/// Returns `(descent objective, plain divergence sum)`.
pub(crate) fn descent_with_matrix(
    qs: &[SymmetricMatrix],
    m: &SymmetricMatrix,
    eps: f64,
) -> Result<(f64, f64)> {
    let chol = m.cholesky("objective, model matrix")?;
    let f = Factored::new(&chol);
    let plain = divergence_sum_factored(qs, &f)?;
    if eps == 0.0 {
        return Ok((plain, plain));
    }
    let penalty = 0.5 * (f.logdet_m + f.m_inv.trace() - f.dim() as f64);
    Ok((plain + eps * penalty, plain))
}
