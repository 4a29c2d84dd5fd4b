use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition of `0..n` into `k` test folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub n: usize,
    pub folds: Vec<Vec<usize>>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Fold index of every item, indexed by item.
    pub fn fold_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (f, fold) in self.folds.iter().enumerate() {
            for &i in fold {
                out[i] = f;
            }
        }
        out
    }

    /// Training indices for `fold`, in ascending order.
    pub fn train(&self, fold: usize) -> Vec<usize> {
        let of = self.fold_of();
        (0..self.n).filter(|&i| of[i] != fold).collect()
    }
}

/// Seeded shuffle of `0..n` cut into `k` contiguous folds. The first
/// `n mod k` folds hold one extra item.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Domain(format!("k-fold split needs k >= 2, got {k}")));
    }
    if n < k {
        return Err(Error::Domain(format!("cannot split {n} items into {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(FoldAssignment { n, folds })
}
