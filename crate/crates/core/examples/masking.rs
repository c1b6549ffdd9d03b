//! Generating missingness and splitting a kernel into visible and hidden
//! blocks.
//!
//! Run with `cargo run --example masking`.

use mkmc::views::{apply_mask, partition, random_mask, random_mask_with, unpartition, Fill, MaskScheme};
use mkmc::SymmetricMatrix;

fn main() -> mkmc::Result<()> {
    let ell = 6;
    let pattern = random_mask(ell, 3, 0.34, 7)?;
    for (k, hidden) in pattern.hidden_sets().iter().enumerate() {
        println!("view {k}: hidden {hidden:?}");
    }
    let shared = random_mask_with(ell, 3, 0.34, 7, MaskScheme::Shared)?;
    println!("shared mask hides {:?} in every view", shared.hidden(0));
    println!("mask JSON: {}", serde_json::to_string(&pattern).unwrap());

    let q = SymmetricMatrix::new(nalgebra::DMatrix::from_fn(ell, ell, |i, j| {
        if i == j { 2.0 } else { 1.0 / (1.0 + (i as f64 - j as f64).abs()) }
    }))?;
    let hidden = pattern.hidden(0);

    let zeroed = apply_mask(&q, hidden, Fill::Zero)?;
    let mean_filled = apply_mask(&q, hidden, Fill::Mean)?;
    println!("zero fill:\n{:.3}", zeroed.as_matrix());
    println!("mean fill:\n{:.3}", mean_filled.as_matrix());

    // Visible objects first, hidden last; `order` maps positions back.
    let blocks = partition(&q, hidden)?;
    println!("order {:?}, visible block {}x{}", blocks.order, blocks.vv.dim(), blocks.vv.dim());
    assert_eq!(unpartition(&blocks)?, q);
    Ok(())
}
