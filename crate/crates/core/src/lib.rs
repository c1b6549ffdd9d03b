//! Mutual completion of multiple incomplete kernel matrices.
//!
//! Given `K` kernel matrices over the same `ℓ` objects, each missing the rows
//! and columns of some objects, the completion engines fill in the missing
//! blocks by block coordinate descent on a sum of LogDet divergences to a
//! shared model matrix. Three model families are available: an unrestricted
//! full covariance, a probabilistic PCA covariance `WWᵀ + σ²I`, and a factor
//! analysis covariance `WWᵀ + diag(ψ)`. Completed kernels are always positive
//! definite.
//!
//! ```no_run
//! use mkmc::engines::{run_completion, CompletionConfig, Method, RankPolicy};
//! use mkmc::views::random_mask;
//! # fn kernels() -> Vec<mkmc::SymmetricMatrix> { unimplemented!() }
//!
//! let qs = kernels();
//! let pattern = random_mask(qs[0].dim(), qs.len(), 0.2, 7)?;
//! let cfg = CompletionConfig::new(Method::Pca).with_rank(RankPolicy::Fixed(3));
//! let result = run_completion(&qs, &pattern, &cfg)?;
//! println!("{} iterations, objective {:?}", result.iterations, result.trace.last());
//! # Ok::<(), mkmc::Error>(())
//! ```
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod cli;
pub mod engines;
mod error;
pub mod eval;
pub mod io;
pub mod matrix;
pub mod views;

pub use error::{Error, Result};
pub use matrix::SymmetricMatrix;
