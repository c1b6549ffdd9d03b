//! Choosing the latent dimension from the eigenvalues of the average kernel,
//! and the resulting model sizes.
//!
//! Run with `cargo run --example rank_selection`.

use mkmc::engines::{average_kernel, count_rank, degrees_of_freedom, select_rank, Method, RankCriterion};
use mkmc::eval::{generate_synthetic, SyntheticSpec};
use mkmc::matrix::eigh;

fn main() -> mkmc::Result<()> {
    let spec = SyntheticSpec {
        ell: 20,
        views: 3,
        true_rank: 4,
        noise_sigma2: 0.5,
        per_view_jitter: 0.1,
        seed: 4,
    };
    let s = average_kernel(&generate_synthetic(&spec)?)?;
    let eig = eigh(&s)?;
    println!("leading eigenvalues {:.3?}", &eig.eigenvalues.as_slice()[..6]);

    for criterion in [RankCriterion::Gk, RankCriterion::Kaiser] {
        let q = select_rank(&s, criterion)?;
        assert_eq!(q, count_rank(eig.eigenvalues.as_slice(), criterion));
        println!(
            "{criterion:?}: q = {q}, dof pca {} fa {} (full {})",
            degrees_of_freedom(Method::Pca, spec.ell, q)?,
            degrees_of_freedom(Method::Fa, spec.ell, q)?,
            degrees_of_freedom(Method::Fc, spec.ell, q)?,
        );
    }
    Ok(())
}
