//! Test-only oracles. Nothing here calls into the solver paths it checks.
#![allow(dead_code)]

use mkmc::SymmetricMatrix;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `AAᵀ/n + floor·I` for a standard-normal `A`.
pub fn random_pd(n: usize, floor: f64, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    let a = normal(n, n, rng);
    let mut m = &a * a.transpose() / n as f64;
    for i in 0..n {
        m[(i, i)] += floor;
    }
    SymmetricMatrix::new(m).unwrap()
}

/// Correlated views: a shared rank-4 factor plus a per-view Wishart term.
pub fn random_views(ell: usize, views: usize, rng: &mut ChaCha8Rng) -> Vec<SymmetricMatrix> {
    let f = normal(ell, 4.min(ell), rng);
    let shared = &f * f.transpose();
    (0..views)
        .map(|_| {
            let g = normal(ell, ell, rng);
            let mut m = &shared + &g * g.transpose() * (0.5 / ell as f64);
            for i in 0..ell {
                m[(i, i)] += 0.05;
            }
            SymmetricMatrix::new(m).unwrap()
        })
        .collect()
}

/// `count` distinct indices from `0..ell`, sorted.
pub fn random_subset(ell: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ell).collect();
    for i in 0..count {
        let j = rng.random_range(i..ell);
        idx.swap(i, j);
    }
    let mut out = idx[..count].to_vec();
    out.sort_unstable();
    out
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut aug = DMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)];
        }
        aug[(i, n + i)] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| aug[(x, col)].abs().partial_cmp(&aug[(y, col)].abs()).unwrap())
            .unwrap();
        aug.swap_rows(col, pivot);
        let p = aug[(col, col)];
        assert!(p.abs() > 1e-300, "singular matrix");
        for j in 0..2 * n {
            aug[(col, j)] /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = aug[(r, col)];
                if factor != 0.0 {
                    for j in 0..2 * n {
                        aug[(r, j)] -= factor * aug[(col, j)];
                    }
                }
            }
        }
    }
    aug.columns(n, n).into_owned()
}

fn block(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Conditional-moment imputation written out directly, returning the full
/// completed matrix in original index order.
pub fn impute_oracle(q: &DMatrix<f64>, m: &DMatrix<f64>, hidden: &[usize]) -> DMatrix<f64> {
    let ell = q.nrows();
    let vis: Vec<usize> = (0..ell).filter(|i| !hidden.contains(i)).collect();
    let m_vv_inv = gauss_jordan_inverse(&block(m, &vis, &vis));
    let q_vv = block(q, &vis, &vis);
    let m_vh = block(m, &vis, hidden);
    let m_hv = block(m, hidden, &vis);
    let m_hh = block(m, hidden, hidden);

    let q_vh = &q_vv * &m_vv_inv * &m_vh;
    let q_hh = &m_hh - &m_hv * &m_vv_inv * &m_vh + &m_hv * &m_vv_inv * &q_vv * &m_vv_inv * &m_vh;

    let mut out = q.clone();
    for (a, &i) in vis.iter().enumerate() {
        for (b, &j) in hidden.iter().enumerate() {
            out[(i, j)] = q_vh[(a, b)];
            out[(j, i)] = q_vh[(a, b)];
        }
    }
    for (a, &i) in hidden.iter().enumerate() {
        for (b, &j) in hidden.iter().enumerate() {
            out[(i, j)] = q_hh[(a, b)];
        }
    }
    out
}

/// `ln|det A|` by LU elimination with partial pivoting.
pub fn logdet_lu(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut m = a.clone();
    let mut acc = 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[(x, col)].abs().partial_cmp(&m[(y, col)].abs()).unwrap())
            .unwrap();
        m.swap_rows(col, pivot);
        let p = m[(col, col)];
        acc += p.abs().ln();
        for r in (col + 1)..n {
            let f = m[(r, col)] / p;
            for j in col..n {
                m[(r, j)] -= f * m[(col, j)];
            }
        }
    }
    acc
}

/// `½(logdet M − logdet Q + tr(M⁻¹Q) − ℓ)`, via LU and Gauss-Jordan.
pub fn divergence_oracle(q: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let n = q.nrows() as f64;
    let tr = (gauss_jordan_inverse(m) * q).trace();
    0.5 * (logdet_lu(m) - logdet_lu(q) + tr - n)
}

/// PPCA fit objective `LogDet(S, WWᵀ + σ²I)`.
pub fn pca_fit_objective(s: &DMatrix<f64>, w: &DMatrix<f64>, sigma2: f64) -> f64 {
    let n = s.nrows();
    let m = w * w.transpose() + DMatrix::identity(n, n) * sigma2;
    divergence_oracle(s, &m)
}

/// FA expected complete-data log-likelihood for `K` views with averaged
/// moments `S` (diagonal only), `S_xz`, `S_zz`, as a function of `W` and the
/// noise precisions `φ = ψ⁻¹`. Constants are dropped.
pub fn fa_q_function(
    views: f64,
    s_diag: &DVector<f64>,
    s_xz: &DMatrix<f64>,
    s_zz: &DMatrix<f64>,
    w: &DMatrix<f64>,
    phi: &DVector<f64>,
) -> f64 {
    let wzw = w * s_zz * w.transpose();
    let mut total = 0.0;
    for i in 0..w.nrows() {
        let cross: f64 = (0..w.ncols()).map(|j| w[(i, j)] * s_xz[(i, j)]).sum();
        total += phi[i] * cross - 0.5 * phi[i] * wzw[(i, i)] - 0.5 * phi[i] * s_diag[i]
            + 0.5 * phi[i].ln();
    }
    views * total
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = rel_step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Backtracking gradient descent on `f` using finite-difference gradients.
/// Steps that leave the region where `feasible` holds are rejected.
pub fn descend(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    steps: usize,
    feasible: impl Fn(&[f64]) -> bool,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    for _ in 0..steps {
        let g = fd_gradient(&f, &x, 1e-6);
        let mut step = 1e-2;
        while step > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            if feasible(&trial) {
                let ft = f(&trial);
                if ft < fx {
                    x = trial;
                    fx = ft;
                    break;
                }
            }
            step /= 2.0;
        }
    }
    (x, fx)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

pub mod cli {
    use std::path::{Path, PathBuf};
    use std::process::{Command, Output};

    use mkmc::engines::{CompletionConfig, Method, RankPolicy};
    use mkmc::eval::{generate_synthetic, RecoveryReport, SyntheticSpec};
    use mkmc::io::{read_json, write_matrix, MatrixFormat};

    pub fn mkmc(args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_mkmc"))
            .args(args)
            .env("MKMC_LOG", "off")
            .output()
            .expect("spawn mkmc")
    }

    pub fn mkmc_ok(args: &[&str]) -> Output {
        let out = mkmc(args);
        assert!(
            out.status.success(),
            "mkmc {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    pub fn s(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    pub fn pipeline_spec() -> SyntheticSpec {
        SyntheticSpec {
            ell: 24,
            views: 3,
            true_rank: 3,
            noise_sigma2: 0.1,
            per_view_jitter: 0.05,
            seed: 11,
        }
    }

    pub fn pipeline_config() -> CompletionConfig {
        let mut cfg = CompletionConfig::new(Method::Pca).with_rank(RankPolicy::Fixed(3));
        cfg.seed = 5;
        cfg
    }

    /// Writes the synthetic truth, then runs mask, complete and evaluate
    /// through the binary. Returns the parsed report.
    pub fn run_pipeline(dir: &Path, format: MatrixFormat, fraction: f64) -> RecoveryReport {
        let spec = pipeline_spec();
        let cfg = pipeline_config();
        let truth = generate_synthetic(&spec).unwrap();
        let truth_paths: Vec<PathBuf> = truth
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let p = dir.join(format!("truth_{k}.{}", format.extension()));
                write_matrix(&p, t.as_matrix(), format).unwrap();
                p
            })
            .collect();
        let masked_dir = dir.join("masked");
        let out_dir = dir.join("out");

        let fraction = fraction.to_string();
        let seed = cfg.seed.to_string();
        let mut args = vec!["mask", "--fraction", &fraction, "--seed", &seed, "--out-dir", s(&masked_dir), "--inputs"];
        args.extend(truth_paths.iter().map(|p| s(p)));
        mkmc_ok(&args);

        let masked: Vec<PathBuf> = (0..spec.views)
            .map(|k| mkmc::cli::masked_path(&masked_dir, k, format))
            .collect();
        let mask = masked_dir.join(mkmc::cli::MASK_FILE);
        let mut args = vec!["complete", "--method", "pca", "--rank", "3", "--mask", s(&mask), "--output-dir", s(&out_dir), "--inputs"];
        args.extend(masked.iter().map(|p| s(p)));
        mkmc_ok(&args);

        let completed: Vec<PathBuf> = (0..spec.views)
            .map(|k| mkmc::cli::completed_path(&out_dir, k, format))
            .collect();
        let report = dir.join("report.json");
        let trace = out_dir.join(mkmc::cli::TRACE_FILE);
        let mut args = vec!["evaluate", "--label", "pca", "--mask", s(&mask), "--trace", s(&trace), "--out", s(&report), "--truth"];
        args.extend(truth_paths.iter().map(|p| s(p)));
        args.push("--completed");
        args.extend(completed.iter().map(|p| s(p)));
        mkmc_ok(&args);

        read_json(&report).unwrap()
    }
}
