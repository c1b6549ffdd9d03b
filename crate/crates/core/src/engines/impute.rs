use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{diagnostics, SymmetricMatrix};
use crate::views::PartitionedView;

/// Conditional re-estimation of the hidden blocks of one view.
///
/// With `A = M_vv⁻¹ M_vh`:
///
/// ```text
/// Q_vh = Q_vv A
/// Q_hh = M_hh − M_hv A + Aᵀ Q_vv A
/// ```
///
/// `model` is the model matrix partitioned under the view's hidden set.
pub fn impute_view(
    q_vv: &SymmetricMatrix,
    model: &PartitionedView,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = model.n_visible();
    let h = model.n_hidden();
    if q_vv.dim() != n {
        return Err(Error::Dimension(format!(
            "visible block is {0}x{0} but the model's is {n}x{n}",
            q_vv.dim()
        )));
    }
    if h == 0 {
        return Ok((DMatrix::zeros(n, 0), DMatrix::zeros(0, 0)));
    }
    let chol = nalgebra::Cholesky::new(model.vv.as_matrix().clone()).ok_or_else(|| {
        Error::numerical(
            "imputation",
            format!("model visible block is singular ({})", diagnostics(model.vv.as_matrix())),
        )
    })?;
    let a = chol.solve(&model.vh);
    let q_vh = q_vv.as_matrix() * &a;
    let mut q_hh = &model.hh - model.vh.transpose() * &a + a.transpose() * &q_vh;
    for i in 0..h {
        for j in (i + 1)..h {
            let v = 0.5 * (q_hh[(i, j)] + q_hh[(j, i)]);
            q_hh[(i, j)] = v;
            q_hh[(j, i)] = v;
        }
    }
    Ok((q_vh, q_hh))
}
