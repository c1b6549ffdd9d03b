//! Writes synthetic ground-truth kernels to disk for the `mkmc` command line.
//!
//! ```text
//! cargo run --example cli_pipeline -- /tmp/mkmc-demo
//! cargo run --bin mkmc -- mask --inputs /tmp/mkmc-demo/truth_*.csv --fraction 0.2 --seed 7 --out-dir /tmp/mkmc-demo/masked
//! cargo run --bin mkmc -- complete --method pca --rank 3 --mask /tmp/mkmc-demo/masked/mask.json \
//!     --inputs /tmp/mkmc-demo/masked/masked_*.csv --output-dir /tmp/mkmc-demo/out
//! cargo run --bin mkmc -- evaluate --label pca --mask /tmp/mkmc-demo/masked/mask.json \
//!     --truth /tmp/mkmc-demo/truth_*.csv --completed /tmp/mkmc-demo/out/completed_*.csv \
//!     --trace /tmp/mkmc-demo/out/trace.json --out /tmp/mkmc-demo/report.json
//! ```

use std::path::PathBuf;

use mkmc::eval::{generate_synthetic, SyntheticSpec};
use mkmc::io::{read_kernel, write_matrix, MatrixFormat};

fn main() -> mkmc::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "mkmc-demo".into()));
    std::fs::create_dir_all(&dir).map_err(|source| mkmc::Error::Io {
        path: dir.clone(),
        source,
    })?;
    let spec = SyntheticSpec {
        ell: 40,
        views: 4,
        true_rank: 3,
        noise_sigma2: 0.1,
        per_view_jitter: 0.05,
        seed: 7,
    };
    for (k, q) in generate_synthetic(&spec)?.iter().enumerate() {
        let csv = dir.join(format!("truth_{k}.csv"));
        let bin = dir.join(format!("truth_{k}.bin"));
        write_matrix(&csv, q.as_matrix(), MatrixFormat::Csv)?;
        write_matrix(&bin, q.as_matrix(), MatrixFormat::Binary)?;
        assert_eq!(&read_kernel(&csv)?.0, q);
        assert_eq!(&read_kernel(&bin)?.0, q);
        println!("wrote {} and {}", csv.display(), bin.display());
    }
    Ok(())
}
