//! Comparing the three models and the fill baselines on synthetic data.
//!
//! Run with `cargo run --release --example recovery`.

use mkmc::engines::{CompletionConfig, Method, RankPolicy};
use mkmc::eval::{compare_methods, SyntheticSpec};

fn main() -> mkmc::Result<()> {
    let spec = SyntheticSpec {
        ell: 40,
        views: 4,
        true_rank: 3,
        noise_sigma2: 0.1,
        per_view_jitter: 0.05,
        seed: 0,
    };
    let cfg = CompletionConfig::new(Method::Pca).with_rank(RankPolicy::Fixed(3));
    let reports = compare_methods(&spec, 0.2, &[Method::Fc, Method::Pca, Method::Fa], &cfg)?;

    println!("{:<8} {:>10} {:>6}", "method", "error", "iters");
    for r in &reports {
        println!("{:<8} {:>10.4} {:>6}", r.method, r.mean_relative_error, r.iterations);
    }
    for (name, err) in &reports[0].baseline_errors {
        println!("{name:<8} {err:>10.4}");
    }
    println!("\n{}", serde_json::to_string_pretty(&reports[1]).unwrap());
    Ok(())
}
