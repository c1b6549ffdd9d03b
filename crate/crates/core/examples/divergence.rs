//! LogDet divergence between kernel matrices.
//!
//! Run with `cargo run --example divergence`.

use mkmc::matrix::{eigh, logdet, logdet_divergence};
use mkmc::SymmetricMatrix;

fn main() -> mkmc::Result<()> {
    let q = SymmetricMatrix::from_row_slice(3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 1.5])?;
    let m = SymmetricMatrix::identity(3);

    println!("logdet Q          = {:.6}", logdet(&q)?);
    println!("LogDet(Q, I)      = {:.6}", logdet_divergence(&q, &m)?);
    println!("LogDet(I, Q)      = {:.6}", logdet_divergence(&m, &q)?);
    println!("LogDet(Q, Q)      = {:.6}", logdet_divergence(&q, &q)?);

    let eig = eigh(&q)?;
    println!("eigenvalues       = {:.6?}", eig.eigenvalues.as_slice());
    let err = (eig.reconstruct() - q.as_matrix()).amax();
    println!("reconstruction    = {err:.2e}");
    Ok(())
}
