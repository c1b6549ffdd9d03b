//! Completing kernels with a factor analysis model `WWᵀ + diag(ψ)`, on data
//! whose noise differs per object.
//!
//! Run with `cargo run --example complete_fa`.

use mkmc::engines::{run_completion, CompletionConfig, Method, ModelParams, RankPolicy};
use mkmc::eval::hidden_block_error;
use mkmc::views::{apply_mask, random_mask, Fill};
use mkmc::SymmetricMatrix;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> mkmc::Result<()> {
    let (ell, views, q) = (30, 3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = DMatrix::<f64>::from_fn(ell, q, |_, _| StandardNormal.sample(&mut rng));
    let psi = DVector::from_fn(ell, |i, _| 0.05 + 0.5 * (i % 5) as f64 / 4.0);
    let truth = SymmetricMatrix::new(&w * w.transpose() + DMatrix::from_diagonal(&psi))?;
    let truths = vec![truth; views];

    let pattern = random_mask(ell, views, 0.2, 3)?;
    let masked: Vec<_> = truths
        .iter()
        .enumerate()
        .map(|(k, t)| apply_mask(t, pattern.hidden(k), Fill::Zero))
        .collect::<mkmc::Result<_>>()?;

    for method in [Method::Pca, Method::Fa] {
        let cfg = CompletionConfig::new(method).with_rank(RankPolicy::Fixed(q));
        let result = run_completion(&masked, &pattern, &cfg)?;
        let errs: Vec<f64> = (0..views)
            .map(|k| hidden_block_error(&truths[k], &result.completed[k], pattern.hidden(k)))
            .collect::<mkmc::Result<_>>()?;
        println!("{method}: {} iterations, errors {errs:.4?}", result.iterations);
        if let ModelParams::Fa(p) = &result.model {
            println!("fitted psi[..5] {:.3?}", &p.psi.as_slice()[..5]);
            println!("true   psi[..5] {:.3?}", &psi.as_slice()[..5]);
        }
    }
    Ok(())
}
