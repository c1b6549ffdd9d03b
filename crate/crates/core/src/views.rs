//! Per-view visibility bookkeeping.
//!
//! Each view hides a set of objects (rows and the matching columns). For the
//! completion formulas the kernel is permuted so that visible objects come
//! first, giving the block layout
//!
//! ```text
//! [ Q_vv  Q_vh ]
//! [ Q_hv  Q_hh ]
//! ```
//!
//! Visible and hidden objects each keep their original relative order.

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Which objects are hidden in each of the `K` views.
///
/// Serializes as the mask file format
/// `{"ell": int, "views": [{"hidden": [int, ...]}, ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MaskFile", into = "MaskFile")]
pub struct VisibilityPattern {
    ell: usize,
    hidden: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskFile {
    ell: usize,
    views: Vec<ViewMask>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ViewMask {
    hidden: Vec<usize>,
}

impl TryFrom<MaskFile> for VisibilityPattern {
    type Error = Error;

    fn try_from(file: MaskFile) -> Result<Self> {
        VisibilityPattern::new(file.ell, file.views.into_iter().map(|v| v.hidden).collect())
    }
}

impl From<VisibilityPattern> for MaskFile {
    fn from(p: VisibilityPattern) -> Self {
        MaskFile {
            ell: p.ell,
            views: p.hidden.into_iter().map(|hidden| ViewMask { hidden }).collect(),
        }
    }
}

impl VisibilityPattern {
    /// Validates and sorts the per-view hidden sets.
    pub fn new(ell: usize, mut hidden: Vec<Vec<usize>>) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidArgument("mask has ell = 0".into()));
        }
        for (k, set) in hidden.iter_mut().enumerate() {
            set.sort_unstable();
            validate_hidden(ell, set).map_err(|e| match e {
                Error::InvalidArgument(msg) => Error::InvalidArgument(format!("view {k}: {msg}")),
                other => other,
            })?;
        }
        Ok(VisibilityPattern { ell, hidden })
    }

    /// Pattern with nothing hidden.
    pub fn complete(ell: usize, views: usize) -> Self {
        VisibilityPattern {
            ell,
            hidden: vec![Vec::new(); views],
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn views(&self) -> usize {
        self.hidden.len()
    }

    pub fn hidden(&self, view: usize) -> &[usize] {
        &self.hidden[view]
    }

    pub fn hidden_sets(&self) -> &[Vec<usize>] {
        &self.hidden
    }

    /// `n_k`, the number of visible objects in `view`.
    pub fn visible_count(&self, view: usize) -> usize {
        self.ell - self.hidden[view].len()
    }

    pub fn has_hidden(&self) -> bool {
        self.hidden.iter().any(|h| !h.is_empty())
    }

    /// Applies an object relabeling: object `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.ell {
            return Err(Error::Dimension(format!(
                "permutation of length {} for ell = {}",
                perm.len(),
                self.ell
            )));
        }
        let hidden = self
            .hidden
            .iter()
            .map(|set| set.iter().map(|&i| perm[i]).collect())
            .collect();
        VisibilityPattern::new(self.ell, hidden)
    }
}

fn validate_hidden(ell: usize, sorted: &[usize]) -> Result<()> {
    if let Some(&bad) = sorted.iter().find(|&&i| i >= ell) {
        return Err(Error::InvalidArgument(format!(
            "hidden index {bad} out of range for ell = {ell}"
        )));
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("duplicate hidden index".into()));
    }
    if sorted.len() >= ell {
        return Err(Error::InvalidArgument(
            "every object is hidden; at least one must stay visible".into(),
        ));
    }
    Ok(())
}

fn sorted_hidden(ell: usize, hidden: &[usize]) -> Result<Vec<usize>> {
    let mut set = hidden.to_vec();
    set.sort_unstable();
    validate_hidden(ell, &set)?;
    Ok(set)
}

/// A kernel split into its visible and hidden blocks.
#[derive(Clone, Debug)]
pub struct PartitionedView {
    /// `n_k × n_k`.
    pub vv: SymmetricMatrix,
    /// `n_k × (ℓ − n_k)`; `Q_hv` is its transpose.
    pub vh: DMatrix<f64>,
    /// `(ℓ − n_k) × (ℓ − n_k)`, symmetric.
    pub hh: DMatrix<f64>,
    /// `order[p]` is the original index of the object at permuted position `p`.
    pub order: Vec<usize>,
}

impl PartitionedView {
    pub fn n_visible(&self) -> usize {
        self.vv.dim()
    }

    pub fn n_hidden(&self) -> usize {
        self.order.len() - self.vv.dim()
    }
}

/// Visible-first ordering of `0..ell` for a sorted hidden set.
pub fn visible_first_order(ell: usize, sorted_hidden: &[usize]) -> Vec<usize> {
    let mut is_hidden = vec![false; ell];
    for &i in sorted_hidden {
        is_hidden[i] = true;
    }
    (0..ell)
        .filter(|&i| !is_hidden[i])
        .chain(sorted_hidden.iter().copied())
        .collect()
}

/// Extracts the `vv`, `vh` and `hh` blocks of `full` for a hidden set.
pub fn partition(full: &SymmetricMatrix, hidden: &[usize]) -> Result<PartitionedView> {
    let ell = full.dim();
    let hidden = sorted_hidden(ell, hidden)?;
    let order = visible_first_order(ell, &hidden);
    let n = ell - hidden.len();
    let m = full.as_matrix();

    let vv = DMatrix::from_fn(n, n, |i, j| m[(order[i], order[j])]);
    let vh = DMatrix::from_fn(n, ell - n, |i, j| m[(order[i], order[n + j])]);
    let hh = DMatrix::from_fn(ell - n, ell - n, |i, j| m[(order[n + i], order[n + j])]);
    Ok(PartitionedView {
        vv: SymmetricMatrix::from_symmetric_unchecked(vv),
        vh,
        hh,
        order,
    })
}

/// Reassembles the full matrix in original index order.
pub fn unpartition(view: &PartitionedView) -> Result<SymmetricMatrix> {
    let n = view.vv.dim();
    let ell = view.order.len();
    let h = ell.checked_sub(n).ok_or_else(|| {
        Error::Dimension(format!("visible block {n}x{n} larger than ell = {ell}"))
    })?;
    if view.vh.shape() != (n, h) || view.hh.shape() != (h, h) {
        return Err(Error::Dimension(format!(
            "inconsistent blocks: vv {n}x{n}, vh {:?}, hh {:?}, ell {ell}",
            view.vh.shape(),
            view.hh.shape()
        )));
    }
    let mut seen = vec![false; ell];
    for &i in &view.order {
        if i >= ell || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Dimension("order is not a permutation".into()));
        }
    }

    let o = &view.order;
    let mut out = DMatrix::zeros(ell, ell);
    let vv = view.vv.as_matrix();
    for i in 0..n {
        for j in 0..n {
            out[(o[i], o[j])] = vv[(i, j)];
        }
        for j in 0..h {
            out[(o[i], o[n + j])] = view.vh[(i, j)];
            out[(o[n + j], o[i])] = view.vh[(i, j)];
        }
    }
    for i in 0..h {
        for j in 0..h {
            out[(o[n + i], o[n + j])] = view.hh[(i, j)];
        }
    }
    SymmetricMatrix::new(out)
}

/// How hidden sets are drawn across views.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskScheme {
    /// Each view draws its own hidden set.
    #[default]
    Independent,
    /// One hidden set, shared by every view.
    Shared,
}

/// Uniform integer in `0..n` by 128-bit multiply-shift of one 64-bit draw.
fn bounded(rng: &mut ChaCha8Rng, n: usize) -> usize {
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Draws `⌊fraction·ℓ⌋` hidden objects per view.
///
/// The generator is ChaCha8 seeded with `seed` through
/// `SeedableRng::seed_from_u64`. Views are drawn in order from one stream;
/// each draw is a partial Fisher-Yates shuffle of `0..ℓ` where step `i` swaps
/// position `i` with `i + ⌊u·(ℓ−i)/2⁶⁴⌋` for a fresh 64-bit word `u`.
pub fn random_mask(ell: usize, views: usize, fraction: f64, seed: u64) -> Result<VisibilityPattern> {
    random_mask_with(ell, views, fraction, seed, MaskScheme::Independent)
}

pub fn random_mask_with(
    ell: usize,
    views: usize,
    fraction: f64,
    seed: u64,
    scheme: MaskScheme,
) -> Result<VisibilityPattern> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ell must be positive".into()));
    }
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} outside [0, 1)"
        )));
    }
    if fraction * ell as f64 > (ell - 1) as f64 {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} of {ell} objects leaves no visible object"
        )));
    }
    // Tolerate products like 0.29·100 = 28.999999999999996.
    let count = ((fraction * ell as f64 + 1e-9).floor() as usize).min(ell - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let mut idx: Vec<usize> = (0..ell).collect();
        for i in 0..count {
            let j = i + bounded(&mut rng, ell - i);
            idx.swap(i, j);
        }
        let mut set = idx[..count].to_vec();
        set.sort_unstable();
        set
    };
    let hidden = match scheme {
        MaskScheme::Independent => (0..views).map(|_| draw()).collect(),
        MaskScheme::Shared => {
            let set = draw();
            vec![set; views]
        }
    };
    VisibilityPattern::new(ell, hidden)
}

/// Baseline fill for hidden entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    Zero,
    /// Scalar mean of all entries of the visible block.
    Mean,
}

/// Overwrites every entry whose row or column is hidden.
///
/// The result need not be positive definite.
pub fn apply_mask(full: &SymmetricMatrix, hidden: &[usize], fill: Fill) -> Result<SymmetricMatrix> {
    let ell = full.dim();
    let hidden = sorted_hidden(ell, hidden)?;
    if hidden.is_empty() {
        return Ok(full.clone());
    }
    let mut is_hidden = vec![false; ell];
    for &i in &hidden {
        is_hidden[i] = true;
    }
    let m = full.as_matrix();
    let value = match fill {
        Fill::Zero => 0.0,
        Fill::Mean => {
            let mut sum = 0.0;
            let mut count = 0usize;
            for j in 0..ell {
                for i in 0..ell {
                    if !is_hidden[i] && !is_hidden[j] {
                        sum += m[(i, j)];
                        count += 1;
                    }
                }
            }
            sum / count as f64
        }
    };
    let mut out = m.clone();
    for j in 0..ell {
        for i in 0..ell {
            if is_hidden[i] || is_hidden[j] {
                out[(i, j)] = value;
            }
        }
    }
    Ok(SymmetricMatrix::from_symmetric_unchecked(out))
}
