use super::{Method, RankCriterion};
use crate::error::{Error, Result};
use crate::matrix::{eigh, SymmetricMatrix};

/// Counts eigenvalues strictly above the spectrum mean (GK) or above one
/// (Kaiser), clamped into `[1, ℓ−1]`.
pub fn count_rank(eigenvalues: &[f64], criterion: RankCriterion) -> usize {
    let ell = eigenvalues.len();
    let threshold = match criterion {
        RankCriterion::Gk => eigenvalues.iter().sum::<f64>() / ell as f64,
        RankCriterion::Kaiser => 1.0,
    };
    let raw = eigenvalues.iter().filter(|&&l| l > threshold).count();
    raw.clamp(1, ell.saturating_sub(1).max(1))
}

pub fn select_rank(s: &SymmetricMatrix, criterion: RankCriterion) -> Result<usize> {
    let eig = eigh(s)?;
    Ok(count_rank(eig.eigenvalues.as_slice(), criterion))
}

/// Free parameters of a covariance model on `ell` objects.
///
/// FC: `(ℓ+1)ℓ/2`; PCA: `ℓq + 1 − (q−1)q/2`; FA: `ℓq + ℓ − (q−1)q/2`.
/// `q` is ignored for FC.
pub fn degrees_of_freedom(method: Method, ell: usize, q: usize) -> Result<usize> {
    if method != Method::Fc && (q == 0 || q >= ell) {
        return Err(Error::InvalidArgument(format!(
            "rank q = {q} outside [1, {}]",
            ell.saturating_sub(1)
        )));
    }
    let rotations = q.saturating_sub(1) * q / 2;
    Ok(match method {
        Method::Fc => (ell + 1) * ell / 2,
        Method::Pca => ell * q + 1 - rotations,
        Method::Fa => ell * q + ell - rotations,
    })
}
