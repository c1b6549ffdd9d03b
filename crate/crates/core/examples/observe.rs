//! Watching the descent iteration by iteration, with per-view imputation
//! spread over several threads.
//!
//! Run with `cargo run --example observe`.

use mkmc::engines::{run_completion_observed, CompletionConfig, Method, RankPolicy};
use mkmc::eval::{generate_synthetic, SyntheticSpec};
use mkmc::views::{apply_mask, random_mask, Fill};

fn main() -> mkmc::Result<()> {
    let spec = SyntheticSpec {
        ell: 25,
        views: 6,
        true_rank: 2,
        noise_sigma2: 0.2,
        per_view_jitter: 0.1,
        seed: 5,
    };
    let truth = generate_synthetic(&spec)?;
    let pattern = random_mask(spec.ell, spec.views, 0.3, 5)?;
    let masked: Vec<_> = truth
        .iter()
        .enumerate()
        .map(|(k, t)| apply_mask(t, pattern.hidden(k), Fill::Zero))
        .collect::<mkmc::Result<_>>()?;

    let mut cfg = CompletionConfig::new(Method::Fa).with_rank(RankPolicy::Fixed(2));
    cfg.threads = 4;
    cfg.max_iters = 40;
    let result = run_completion_observed(&masked, &pattern, &cfg, |st| {
        if st.iteration <= 5 || st.iteration % 10 == 0 {
            println!("iter {:>3}  objective {:.8}", st.iteration, st.objective);
        }
    })?;
    println!(
        "stopped after {} iterations (converged: {}), plain divergence {:.8}",
        result.iterations,
        result.converged,
        result.divergence_trace.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}
