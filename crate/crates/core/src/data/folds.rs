//! Fold planning for cross-fitting.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::numerics::RandomSource;

/// Stream id reserved for fold shuffling.
const FOLD_STREAM: u64 = 0xF01D;

/// A deterministic partition of `{0..n}` into `j` folds of near-equal size,
/// plus a per-sample half flag used to carve an independent training
/// subsample for the nested regression out of each fold complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    j: usize,
    assignment: Vec<usize>,
    eta_half: Vec<bool>,
}

impl FoldPlan {
    pub fn j(&self) -> usize {
        self.j
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Fold index of sample `i`, in `0..j`.
    #[inline]
    pub fn fold_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    #[inline]
    pub fn eta_half(&self, i: usize) -> bool {
        self.eta_half[i]
    }

    /// Indices of evaluation fold `k`.
    pub fn fold(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] == k).collect()
    }

    /// Indices outside fold `k` (the training complement).
    pub fn complement(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] != k).collect()
    }

    /// The complement of fold `k`, split into the main training half and the
    /// half reserved for the nested regression. The flag is balanced within
    /// every fold, so both halves stay near-equal for every complement.
    pub fn split_complement(&self, k: usize) -> (Vec<usize>, Vec<usize>) {
        let mut main = Vec::new();
        let mut eta = Vec::new();
        for i in 0..self.len() {
            if self.assignment[i] != k {
                if self.eta_half[i] {
                    eta.push(i);
                } else {
                    main.push(i);
                }
            }
        }
        (main, eta)
    }
}

/// Plan `j` folds over `n` samples. Deterministic given `seed`; fold sizes
/// differ by at most one.
pub fn make_folds(n: usize, j: usize, seed: u64) -> Result<FoldPlan> {
    if j < 2 || j > n {
        return Err(Error::InvalidFoldCount { j, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = RandomSource::new(seed).stream(FOLD_STREAM).rng();
    order.shuffle(&mut rng);

    let mut assignment = vec![0usize; n];
    let mut eta_half = vec![false; n];
    let mut per_fold_count = vec![0usize; j];
    for (pos, &i) in order.iter().enumerate() {
        let fold = pos % j;
        assignment[i] = fold;
        // Alternate the half flag within each fold.
        eta_half[i] = per_fold_count[fold] % 2 == 0;
        per_fold_count[fold] += 1;
    }
    Ok(FoldPlan { j, assignment, eta_half })
}
