use nalgebra::{Cholesky, DMatrix, DVector};

use super::{FaParams, PcaParams};
use crate::error::{Error, Result};
use crate::matrix::{diagnostics, eigh, SymmetricMatrix};

/// Entrywise mean of the views, summed in view order.
pub fn average_kernel(qs: &[SymmetricMatrix]) -> Result<SymmetricMatrix> {
    let first = qs
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one kernel".into()))?;
    let n = first.dim();
    let mut sum = DMatrix::zeros(n, n);
    for (k, q) in qs.iter().enumerate() {
        if q.dim() != n {
            return Err(Error::Dimension(format!(
                "kernel {k} is {0}x{0}, expected {n}x{n}",
                q.dim()
            )));
        }
        sum += q.as_matrix();
    }
    Ok(SymmetricMatrix::from_symmetric_unchecked(sum / qs.len() as f64))
}

/// `(K·S + ε·I)/(K + ε)`. Returns `s` unchanged when `eps == 0`.
pub fn regularize(s: &SymmetricMatrix, views: usize, eps: f64) -> SymmetricMatrix {
    if eps == 0.0 {
        return s.clone();
    }
    let k = views as f64;
    let denom = k + eps;
    let mut m = s.as_matrix() * k;
    for i in 0..m.nrows() {
        m[(i, i)] += eps;
    }
    SymmetricMatrix::from_symmetric_unchecked(m / denom)
}

/// Full-covariance fit: the model matrix is the averaged kernel itself.
pub fn fc_model_update(s: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    s.cholesky("full model update")?;
    Ok(s.clone())
}

/// Closed-form maximizer of the PPCA likelihood for a fixed averaged kernel.
///
/// `σ²` is the mean of the trailing `ℓ − q` eigenvalues and
/// `W = U_q (Λ_q − σ²I)^{1/2}`, with negative differences clamped to zero.
pub fn pca_model_update(s: &SymmetricMatrix, q: usize) -> Result<PcaParams> {
    let ell = s.dim();
    if q == 0 || q >= ell {
        return Err(Error::InvalidArgument(format!(
            "PCA rank q = {q} outside [1, {}]",
            ell.saturating_sub(1)
        )));
    }
    let eig = eigh(s)?;
    let sigma2 = eig.eigenvalues.rows(q, ell - q).sum() / (ell - q) as f64;
    if !(sigma2 > 0.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "PCA model update: trailing eigenvalues average to {sigma2:.3e} ({})",
            diagnostics(s.as_matrix())
        )));
    }
    let mut w = eig.eigenvectors.columns(0, q).into_owned();
    for (j, mut col) in w.column_iter_mut().enumerate() {
        col *= (eig.eigenvalues[j] - sigma2).max(0.0).sqrt();
    }
    Ok(PcaParams { w, sigma2 })
}

/// Second moments of the latent factors under the current FA parameters.
#[derive(Clone, Debug)]
pub struct FaMoments {
    /// `B = Wᵀ M⁻¹`, `q × ℓ`.
    pub b: DMatrix<f64>,
    /// `S_xz = S Bᵀ`, `ℓ × q`.
    pub s_xz: DMatrix<f64>,
    /// `S_zz = I − BW + B S_xz`, `q × q`.
    pub s_zz: DMatrix<f64>,
}

/// E-step of the factor-analysis fit.
///
/// `M⁻¹` is formed by the Woodbury identity around `diag(ψ)`, so only a
/// `q × q` matrix is factored.
pub fn fa_expected_moments(s: &SymmetricMatrix, prev: &FaParams) -> Result<FaMoments> {
    let ell = s.dim();
    let w = &prev.w;
    let q = w.ncols();
    if w.nrows() != ell || prev.psi.len() != ell {
        return Err(Error::Dimension(format!(
            "FA parameters are {}x{q} / {} for a {ell}x{ell} kernel",
            w.nrows(),
            prev.psi.len()
        )));
    }
    if let Some(bad) = prev.psi.iter().find(|&&p| !(p > 0.0)) {
        return Err(Error::InvalidArgument(format!("noise variance {bad} is not positive")));
    }
    let psi_inv = prev.psi.map(|p| 1.0 / p);

    // F = Wᵀ diag(ψ)⁻¹
    let mut f = w.transpose();
    for (i, mut col) in f.column_iter_mut().enumerate() {
        col *= psi_inv[i];
    }
    let c = DMatrix::identity(q, q) + &f * w;
    let chol_c = Cholesky::new(c).ok_or_else(|| {
        Error::numerical("FA update", "I + Wᵀdiag(ψ)⁻¹W is not positive definite")
    })?;
    // M⁻¹ = diag(ψ)⁻¹ − Fᵀ C⁻¹ F
    let mut m_inv = -(f.transpose() * chol_c.solve(&f));
    for i in 0..ell {
        m_inv[(i, i)] += psi_inv[i];
    }
    let b = w.transpose() * m_inv;
    let s_xz = s.as_matrix() * b.transpose();
    let mut s_zz = DMatrix::identity(q, q) - &b * w + &b * &s_xz;
    for i in 0..q {
        for j in (i + 1)..q {
            let v = 0.5 * (s_zz[(i, j)] + s_zz[(j, i)]);
            s_zz[(i, j)] = v;
            s_zz[(j, i)] = v;
        }
    }
    Ok(FaMoments { b, s_xz, s_zz })
}

/// One EM step of the factor-analysis fit.
///
/// `W = S_xz S_zz⁻¹` and `ψ = diag(S − S_xz S_zz⁻¹ S_xzᵀ)`, with `ψ` floored at
/// `1e-10 · trace(S)/ℓ`.
pub fn fa_model_update(s: &SymmetricMatrix, prev: &FaParams) -> Result<FaParams> {
    let ell = s.dim();
    let moments = fa_expected_moments(s, prev)?;
    let chol_zz = Cholesky::new(moments.s_zz.clone()).ok_or_else(|| {
        Error::numerical("FA update", "latent second moment S_zz is not positive definite")
    })?;
    // S_zz is symmetric, so W = (S_zz⁻¹ S_xzᵀ)ᵀ.
    let w = chol_zz.solve(&moments.s_xz.transpose()).transpose();

    let floor = 1e-10 * s.trace() / ell as f64;
    let psi = DVector::from_fn(ell, |i, _| {
        let explained = w.row(i).dot(&moments.s_xz.row(i));
        (s.get(i, i) - explained).max(floor)
    });
    Ok(FaParams { w, psi })
}
