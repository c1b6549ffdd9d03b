//! Completing kernels with a probabilistic PCA model `WWᵀ + σ²I`.
//!
//! Run with `cargo run --example complete_pca`.

use mkmc::engines::{run_completion, CompletionConfig, Method, ModelParams, RankPolicy};
use mkmc::eval::{generate_synthetic, hidden_block_error, SyntheticSpec};
use mkmc::views::{apply_mask, random_mask, Fill};

fn main() -> mkmc::Result<()> {
    let spec = SyntheticSpec {
        ell: 40,
        views: 4,
        true_rank: 3,
        noise_sigma2: 0.1,
        per_view_jitter: 0.05,
        seed: 2,
    };
    let truth = generate_synthetic(&spec)?;
    let pattern = random_mask(spec.ell, spec.views, 0.2, 2)?;
    let masked: Vec<_> = truth
        .iter()
        .enumerate()
        .map(|(k, t)| apply_mask(t, pattern.hidden(k), Fill::Zero))
        .collect::<mkmc::Result<_>>()?;

    let cfg = CompletionConfig::new(Method::Pca).with_rank(RankPolicy::Fixed(3));
    let result = run_completion(&masked, &pattern, &cfg)?;
    if let ModelParams::Pca(p) = &result.model {
        println!("fitted noise variance {:.4} (true {})", p.sigma2, spec.noise_sigma2);
    }
    println!("{} iterations, dof {}", result.iterations, result.dof);
    for (k, c) in result.completed.iter().enumerate() {
        let err = hidden_block_error(&truth[k], c, pattern.hidden(k))?;
        let zero = hidden_block_error(&truth[k], &masked[k], pattern.hidden(k))?;
        println!("view {k}: error {err:.4}, zero fill {zero:.4}");
    }
    Ok(())
}
