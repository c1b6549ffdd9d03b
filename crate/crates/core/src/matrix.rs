//! Dense symmetric-matrix primitives.
//!
//! [`SymmetricMatrix`] is the currency of the whole crate: input kernels,
//! model matrices and the averaged kernel are all stored as one. Every
//! constructor symmetrizes via `(A + Aᵀ)/2`, which is exact on input that is
//! already symmetric, so round-tripping a symmetric matrix never perturbs it.
//!
//! Log-determinants and solves go through Cholesky; the eigensolver is only
//! used where the spectrum itself is needed (PCA model fits, rank selection,
//! diagnostics).

use std::cmp::Ordering;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Default relative floor for positive-definiteness checks, scaled by `trace/ℓ`.
pub const PD_RELATIVE_FLOOR: f64 = 1e-12;

/// A dense `ℓ×ℓ` real symmetric matrix with `ℓ ≥ 1`.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Symmetrizes `raw` as `(raw + rawᵀ)/2`.
    pub fn new(raw: DMatrix<f64>) -> Result<Self> {
        symmetrize(&raw)
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "symmetric matrices must have dim >= 1");
        SymmetricMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "symmetric matrices must have dim >= 1");
        SymmetricMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Builds from row-major entries, symmetrizing.
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        symmetrize(&DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Wraps a matrix the caller guarantees to be exactly symmetric.
    pub(crate) fn from_symmetric_unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square() && m.nrows() >= 1);
        debug_assert!(m == m.transpose(), "matrix is not exactly symmetric");
        SymmetricMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn diagonal(&self) -> DVector<f64> {
        self.0.diagonal()
    }

    /// Minimum eigenvalue, for diagnostics.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = eigh(self)?;
        Ok(eig.eigenvalues[self.dim() - 1])
    }

    /// Cholesky factor, or a [`Error::NotPositiveDefinite`] naming `context`.
    pub fn cholesky(&self, context: &str) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.0.clone()).ok_or_else(|| {
            Error::NotPositiveDefinite(format!("{context} ({})", diagnostics(&self.0)))
        })
    }
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymmetricMatrix{}", self.0)
    }
}

impl AsRef<DMatrix<f64>> for SymmetricMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Returns `(raw + rawᵀ)/2`.
pub fn symmetrize(raw: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    if !raw.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            raw.nrows(),
            raw.ncols()
        )));
    }
    if raw.nrows() == 0 {
        return Err(Error::Dimension("matrix has dimension 0".into()));
    }
    let n = raw.nrows();
    let mut out = raw.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (raw[(i, j)] + raw[(j, i)]) / 2.0;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(SymmetricMatrix(out))
}

/// Symmetric spectral decomposition with eigenvalues sorted non-increasing.
///
/// Each eigenvector is sign-canonicalized so that its largest-magnitude entry
/// is positive (first such entry on ties).
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// `U·diag(λ)·Uᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[j];
        }
        scaled * u.transpose()
    }
}

pub fn eigh(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let max_iters = 1000 * n.max(1);
    let eig = SymmetricEigen::try_new(a.0.clone(), f64::EPSILON, max_iters).ok_or_else(|| {
        Error::numerical("symmetric eigensolver", format!("no convergence ({})", diagnostics(&a.0)))
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    // `sort_by` is stable, so repeated eigenvalues keep solver order.
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(Ordering::Equal)
    });

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        eigenvectors.set_column(dst, &(col * sign));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// True iff the smallest eigenvalue of `a` exceeds `floor`.
pub fn is_positive_definite(a: &SymmetricMatrix, floor: f64) -> bool {
    match eigh(a) {
        Ok(eig) => eig.eigenvalues[a.dim() - 1] > floor,
        Err(_) => false,
    }
}

/// `PD_RELATIVE_FLOOR · |trace(a)|/ℓ`.
pub fn default_pd_floor(a: &SymmetricMatrix) -> f64 {
    PD_RELATIVE_FLOOR * a.trace().abs() / a.dim() as f64
}

/// `is_positive_definite` with [`default_pd_floor`].
pub fn is_pd(a: &SymmetricMatrix) -> bool {
    is_positive_definite(a, default_pd_floor(a))
}

pub(crate) fn cholesky_logdet(chol: &Cholesky<f64, Dyn>) -> f64 {
    let l = chol.l_dirty();
    (0..l.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum()
}

/// Log-determinant of a positive definite matrix, via Cholesky.
pub fn logdet(a: &SymmetricMatrix) -> Result<f64> {
    let chol = a.cholesky("logdet")?;
    Ok(cholesky_logdet(&chol))
}

/// Frobenius inner product `⟨A, B⟩ = tr(AᵀB)`.
pub fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

/// `½(logdet M − logdet Q + ⟨M⁻¹, Q − M⟩)`.
pub fn logdet_divergence(q: &SymmetricMatrix, m: &SymmetricMatrix) -> Result<f64> {
    if q.dim() != m.dim() {
        return Err(Error::Dimension(format!(
            "LogDet divergence between {0}x{0} and {1}x{1} matrices",
            q.dim(),
            m.dim()
        )));
    }
    let chol_m = m.cholesky("LogDet divergence, model argument")?;
    let logdet_q = logdet(q)?;
    Ok(divergence_with_factor(q, logdet_q, &chol_m))
}

/// Divergence from a pre-factored model matrix.
pub(crate) fn divergence_with_factor(
    q: &SymmetricMatrix,
    logdet_q: f64,
    chol_m: &Cholesky<f64, Dyn>,
) -> f64 {
    let n = q.dim();
    // ⟨M⁻¹, Q − M⟩ = tr(M⁻¹Q) − ℓ
    let m_inv_q = chol_m.solve(&q.0);
    let trace: f64 = (0..n).map(|i| m_inv_q[(i, i)]).sum();
    0.5 * (cholesky_logdet(chol_m) - logdet_q + trace - n as f64)
}

fn diagonal_range(m: &DMatrix<f64>) -> (f64, f64) {
    m.diagonal()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)))
}

/// Short condition summary for error messages.
pub(crate) fn diagnostics(m: &DMatrix<f64>) -> String {
    let (lo, hi) = diagonal_range(m);
    format!(
        "dim {}, frobenius norm {:.3e}, diagonal in [{:.3e}, {:.3e}]",
        m.nrows(),
        m.norm(),
        lo,
        hi
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        SymmetricMatrix::new(&a * a.transpose() / n as f64 + DMatrix::identity(n, n) * 0.1).unwrap()
    }

    #[test]
    fn symmetrize_examples() {
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert_eq!(symmetrize(&i3).unwrap().into_inner(), i3);

        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let s = symmetrize(&m).unwrap();
        assert_eq!(s.into_inner(), DMatrix::from_element(2, 2, 1.0));

        let err = symmetrize(&DMatrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    proptest! {
        #[test]
        fn symmetrize_is_exactly_symmetric(entries in proptest::collection::vec(-1e3f64..1e3, 25)) {
            let s = symmetrize(&DMatrix::from_row_slice(5, 5, &entries)).unwrap();
            let m = s.as_matrix();
            prop_assert_eq!((m - m.transpose()).amax(), 0.0);
        }
    }

    #[test]
    fn eigh_examples() {
        let eig = eigh(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(eig.eigenvalues.as_slice(), &[1.0, 1.0, 1.0]);

        let eig = eigh(&SymmetricMatrix::from_diagonal(&[1.0, 4.0, 1.0])).unwrap();
        assert_relative_eq!(eig.eigenvalues[0], 4.0);
        assert_relative_eq!(eig.eigenvalues[1], 1.0);
        assert_relative_eq!(eig.eigenvalues[2], 1.0);
        assert_relative_eq!(eig.eigenvectors[(1, 0)].abs(), 1.0);
    }

    #[test]
    fn eigh_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..120 {
            let n = 1 + trial % 50;
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-5.0..5.0));
            let s = SymmetricMatrix::new(a).unwrap();
            let eig = eigh(&s).unwrap();
            let scale = s.frobenius_norm();
            assert!((eig.reconstruct() - s.as_matrix()).amax() <= 1e-10 * scale);
            let gram = eig.eigenvectors.transpose() * &eig.eigenvectors;
            assert!((gram - DMatrix::identity(n, n)).amax() <= 1e-10);
            for w in eig.eigenvalues.as_slice().windows(2) {
                assert!(w[0] >= w[1]);
            }
            for col in eig.eigenvectors.column_iter() {
                let pivot = col.iamax();
                assert!(col[pivot] >= 0.0);
            }
        }
    }

    #[test]
    fn positive_definite_examples() {
        assert!(is_positive_definite(&SymmetricMatrix::identity(2), 0.0));
        assert!(!is_positive_definite(&SymmetricMatrix::from_diagonal(&[1.0, -1.0]), 0.0));
        assert!(!is_positive_definite(&SymmetricMatrix::from_diagonal(&[1e-12, 1.0]), 1e-9));
    }

    #[test]
    fn logdet_examples() {
        assert_eq!(logdet(&SymmetricMatrix::identity(4)).unwrap(), 0.0);
        assert_relative_eq!(
            logdet(&SymmetricMatrix::from_diagonal(&[2.0, 2.0])).unwrap(),
            1.386294361119890,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            logdet(&SymmetricMatrix::from_diagonal(&[1.0, 4.0, 9.0])).unwrap(),
            3.583518938456110,
            epsilon = 1e-12
        );
        let err = logdet(&SymmetricMatrix::from_diagonal(&[1.0, -1.0])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite(_)));
    }

    #[test]
    fn logdet_matches_eigenvalue_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..30 {
            let a = random_pd(n, &mut rng);
            let from_eig: f64 = eigh(&a).unwrap().eigenvalues.iter().map(|l| l.ln()).sum();
            let ld = logdet(&a).unwrap();
            assert!((ld - from_eig).abs() <= 1e-9 * ld.abs().max(1.0));
        }
    }

    #[test]
    fn divergence_examples() {
        let i3 = SymmetricMatrix::identity(3);
        assert_eq!(logdet_divergence(&i3, &i3).unwrap(), 0.0);

        let two_i = SymmetricMatrix::from_diagonal(&[2.0, 2.0]);
        let d = logdet_divergence(&two_i, &SymmetricMatrix::identity(2)).unwrap();
        assert_relative_eq!(d, 1.0 - 2f64.ln(), epsilon = 1e-12);

        let err = logdet_divergence(&i3, &two_i).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn divergence_is_nonnegative_and_zero_on_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..200 {
            let n = 1 + trial % 12;
            let q = random_pd(n, &mut rng);
            let m = random_pd(n, &mut rng);
            assert!(logdet_divergence(&q, &m).unwrap() >= -1e-12);
            assert!(logdet_divergence(&q, &q).unwrap().abs() <= 1e-10);
        }
    }
}
