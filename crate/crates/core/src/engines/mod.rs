//! Completion engines.
//!
//! All three methods share one block-coordinate-descent loop: impute the
//! hidden blocks of every view from the current model matrix, average the
//! completed kernels, then refit the model. They differ only in the model
//! family:
//!
//! | method | model matrix            | update                          |
//! |--------|-------------------------|---------------------------------|
//! | FC     | any PD `M`              | `M = S`                         |
//! | PCA    | `WWᵀ + σ²I`             | closed form from top-q eigenpairs |
//! | FA     | `WWᵀ + diag(ψ)`         | one EM step                     |

mod driver;
mod impute;
mod objective;
mod rank;
mod update;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

pub use driver::{run_completion, run_completion_observed, IterationState};
pub use impute::impute_view;
pub use objective::{descent_objective, objective};
pub use rank::{count_rank, degrees_of_freedom, select_rank};
pub use update::{
    average_kernel, fa_expected_moments, fa_model_update, fc_model_update, pca_model_update,
    regularize, FaMoments,
};

/// Regularization constant applied to the averaged kernel by default.
pub const DEFAULT_REG_EPSILON: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Full covariance model.
    Fc,
    /// Probabilistic PCA model, `WWᵀ + σ²I`.
    Pca,
    /// Factor analysis model, `WWᵀ + diag(ψ)`.
    Fa,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fc => "fc",
            Method::Pca => "pca",
            Method::Fa => "fa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Eigenvalue-counting rule for choosing `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RankCriterion {
    /// Guttman-Kaiser: eigenvalues above the spectrum mean.
    Gk,
    /// Kaiser: eigenvalues above one.
    Kaiser,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankPolicy {
    Fixed(usize),
    /// Applied to the initial regularized average kernel.
    Criterion(RankCriterion),
}

/// Which baselines `eval::compare_methods` reports next to each method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Baselines {
    pub zero: bool,
    pub mean: bool,
}

impl Default for Baselines {
    fn default() -> Self {
        Baselines {
            zero: true,
            mean: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionConfig {
    pub method: Method,
    pub rank: RankPolicy,
    /// Stop once `|J_t − J_{t−1}| / max(1, |J_{t−1}|) < tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Weight of the identity pulled into the averaged kernel each iteration.
    pub reg_epsilon: f64,
    /// Seed for masking in evaluation runs; the engines themselves are deterministic.
    pub seed: u64,
    pub baselines: Baselines,
    /// Worker threads for the per-view imputation step. Output does not depend on it.
    pub threads: usize,
}

impl CompletionConfig {
    pub fn new(method: Method) -> Self {
        CompletionConfig {
            method,
            rank: RankPolicy::Criterion(RankCriterion::Gk),
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            reg_epsilon: DEFAULT_REG_EPSILON,
            seed: 0,
            baselines: Baselines::default(),
            threads: 1,
        }
    }

    pub fn with_rank(mut self, rank: RankPolicy) -> Self {
        self.rank = rank;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.reg_epsilon >= 0.0) || !self.reg_epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "reg_epsilon must be finite and >= 0, got {}",
                self.reg_epsilon
            )));
        }
        if let RankPolicy::Fixed(0) = self.rank {
            return Err(Error::InvalidArgument("rank must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parameters of the `WWᵀ + σ²I` model.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaParams {
    /// `ℓ × q` loadings.
    pub w: DMatrix<f64>,
    pub sigma2: f64,
}

/// Parameters of the `WWᵀ + diag(ψ)` model.
#[derive(Clone, Debug, PartialEq)]
pub struct FaParams {
    /// `ℓ × q` loadings.
    pub w: DMatrix<f64>,
    pub psi: DVector<f64>,
}

impl PcaParams {
    pub fn model_matrix(&self) -> SymmetricMatrix {
        let mut m = &self.w * self.w.transpose();
        for i in 0..m.nrows() {
            m[(i, i)] += self.sigma2;
        }
        SymmetricMatrix::new(m).expect("WWᵀ is square")
    }
}

impl FaParams {
    pub fn model_matrix(&self) -> SymmetricMatrix {
        let mut m = &self.w * self.w.transpose();
        for i in 0..m.nrows() {
            m[(i, i)] += self.psi[i];
        }
        SymmetricMatrix::new(m).expect("WWᵀ is square")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    Full(SymmetricMatrix),
    Pca(PcaParams),
    Fa(FaParams),
}

impl ModelParams {
    pub fn method(&self) -> Method {
        match self {
            ModelParams::Full(_) => Method::Fc,
            ModelParams::Pca(_) => Method::Pca,
            ModelParams::Fa(_) => Method::Fa,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelParams::Full(m) => m.dim(),
            ModelParams::Pca(p) => p.w.nrows(),
            ModelParams::Fa(p) => p.w.nrows(),
        }
    }

    /// Number of latent components, `None` for the full model.
    pub fn rank(&self) -> Option<usize> {
        match self {
            ModelParams::Full(_) => None,
            ModelParams::Pca(p) => Some(p.w.ncols()),
            ModelParams::Fa(p) => Some(p.w.ncols()),
        }
    }

    pub fn model_matrix(&self) -> SymmetricMatrix {
        match self {
            ModelParams::Full(m) => m.clone(),
            ModelParams::Pca(p) => p.model_matrix(),
            ModelParams::Fa(p) => p.model_matrix(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompletionResult {
    /// One completed kernel per view, visible blocks untouched.
    pub completed: Vec<SymmetricMatrix>,
    pub model: ModelParams,
    /// Objective minimized by the loop, one value per iteration. Equals the
    /// plain sum of divergences plus `reg_epsilon · LogDet(I, M)`.
    pub trace: Vec<f64>,
    /// Plain `Σ_k LogDet(Q_k, M)` per iteration.
    pub divergence_trace: Vec<f64>,
    /// Wall-clock milliseconds per iteration. Not a numerical output.
    pub wall_clock_ms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub dof: usize,
    pub rank: Option<usize>,
}
