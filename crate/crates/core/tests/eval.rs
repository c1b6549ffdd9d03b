mod common;

use common::*;
use mkmc::engines::{CompletionConfig, Method, RankPolicy};
use mkmc::eval::{compare_methods, hidden_block_error, SyntheticSpec};
use mkmc::SymmetricMatrix;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn two_loop_error(t: &DMatrix<f64>, c: &DMatrix<f64>, hidden: &[usize]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..t.nrows() {
        for j in 0..t.ncols() {
            if hidden.contains(&i) || hidden.contains(&j) {
                num += (t[(i, j)] - c[(i, j)]).powi(2);
                den += t[(i, j)].powi(2);
            }
        }
    }
    (num / den).sqrt()
}

#[test]
fn hidden_block_error_matches_two_loop_sum() {
    let mut r = rng(1);
    for n in 3..15 {
        let t = random_pd(n, 0.1, &mut r);
        let c = random_pd(n, 0.1, &mut r);
        let hidden = random_subset(n, 1 + n / 3, &mut r);
        let got = hidden_block_error(&t, &c, &hidden).unwrap();
        let want = two_loop_error(t.as_matrix(), c.as_matrix(), &hidden);
        assert!((got - want).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn hidden_block_error_is_permutation_invariant(seed in any::<u64>(), n in 3usize..10) {
        let mut r = rng(seed);
        let t = random_pd(n, 0.1, &mut r);
        let c = random_pd(n, 0.1, &mut r);
        let hidden = random_subset(n, 1 + n / 4, &mut r);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let permute = |m: &SymmetricMatrix| {
            let mut out = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    out[(perm[i], perm[j])] = m.get(i, j);
                }
            }
            SymmetricMatrix::new(out).unwrap()
        };
        let mut ph: Vec<usize> = hidden.iter().map(|&i| perm[i]).collect();
        ph.sort_unstable();
        let a = hidden_block_error(&t, &c, &hidden).unwrap();
        let b = hidden_block_error(&permute(&t), &permute(&c), &ph).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

#[test]
fn compare_methods_is_pure() {
    let spec = SyntheticSpec {
        ell: 20,
        views: 3,
        true_rank: 2,
        noise_sigma2: 0.2,
        per_view_jitter: 0.1,
        seed: 4,
    };
    let cfg = CompletionConfig::new(Method::Fa).with_rank(RankPolicy::Fixed(2));
    let methods = [Method::Fc, Method::Pca, Method::Fa];
    let a = compare_methods(&spec, 0.2, &methods, &cfg).unwrap();
    let b = compare_methods(&spec, 0.2, &methods, &cfg).unwrap();
    assert_eq!(a, b);
    for r in &a {
        assert!(r.per_view_relative_error.iter().all(|&e| e >= 0.0));
        assert_eq!(r.baseline_errors.len(), 2);
    }
}

#[test]
fn high_jitter_reports_have_monotone_traces() {
    let spec = SyntheticSpec {
        ell: 16,
        views: 2,
        true_rank: 2,
        noise_sigma2: 0.05,
        per_view_jitter: 2.0,
        seed: 8,
    };
    let cfg = CompletionConfig::new(Method::Pca).with_rank(RankPolicy::Fixed(2));
    for report in compare_methods(&spec, 0.3, &[Method::Fc, Method::Pca], &cfg).unwrap() {
        assert_eq!(report.objective_trace.len(), report.iterations);
        for w in report.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-8, "{}", report.method);
        }
    }
}

#[test]
fn report_json_round_trips() {
    let spec = SyntheticSpec {
        ell: 10,
        views: 2,
        true_rank: 1,
        noise_sigma2: 0.3,
        per_view_jitter: 0.1,
        seed: 2,
    };
    let cfg = CompletionConfig::new(Method::Fc);
    let report = compare_methods(&spec, 0.2, &[Method::Fc], &cfg).unwrap().remove(0);
    let text = serde_json::to_string(&report).unwrap();
    assert_eq!(serde_json::from_str::<mkmc::eval::RecoveryReport>(&text).unwrap(), report);
}
