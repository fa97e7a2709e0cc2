use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Label;
use crate::seed;

pub const DEFAULT_FOLDS: usize = 10;

/// Assignment of every record to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Random folds whose sizes differ by at most one.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self, EvalError> {
        check(n, k)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seed::rng_for(seed, 0xF01D));
        let mut assignments = alloc::vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            assignments[i] = pos % k;
        }
        Ok(FoldPlan { k, seed, stratified: false, assignments })
    }

    /// Folds that also spread each class evenly: classes are shuffled
    /// separately and dealt round-robin with one running counter.
    pub fn stratified(labels: &[Label], k: usize, seed: u64) -> Result<Self, EvalError> {
        check(labels.len(), k)?;
        let mut rng = seed::rng_for(seed, 0x57A7);
        let mut assignments = alloc::vec![0; labels.len()];
        let mut pos = 0;
        for class in [Label::Security, Label::NonSecurity] {
            let mut members: Vec<usize> =
                (0..labels.len()).filter(|&i| labels[i] == class).collect();
            members.shuffle(&mut rng);
            for i in members {
                assignments[i] = pos % k;
                pos += 1;
            }
        }
        Ok(FoldPlan { k, seed, stratified: true, assignments })
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = alloc::vec![0; self.k];
        for &f in &self.assignments {
            s[f] += 1;
        }
        s
    }

    /// Seed for work done on one fold.
    pub fn fold_seed(&self, fold: usize) -> u64 {
        seed::derive(self.seed, fold as u64 + 1)
    }
}

fn check(n: usize, k: usize) -> Result<(), EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    if n < k {
        return Err(EvalError::DatasetSmallerThanFolds { n, k });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_records_ten_folds() {
        let p = FoldPlan::random(10, 10, 1).unwrap();
        assert_eq!(p.sizes(), [1; 10]);
    }

    #[test]
    fn full_dataset_sizes() {
        let p = FoldPlan::random(17_277, 10, 42).unwrap();
        let mut s = p.sizes();
        s.sort_unstable();
        assert_eq!(s, [1727, 1727, 1727, 1728, 1728, 1728, 1728, 1728, 1728, 1728]);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(FoldPlan::random(100, 10, 3), FoldPlan::random(100, 10, 3));
        assert_ne!(FoldPlan::random(100, 10, 3), FoldPlan::random(100, 10, 4));
    }

    #[test]
    fn too_small() {
        assert_eq!(
            FoldPlan::random(5, 10, 0),
            Err(EvalError::DatasetSmallerThanFolds { n: 5, k: 10 })
        );
    }

    #[test]
    fn stratified_spreads_classes() {
        let labels: Vec<Label> = (0..103).map(|i| Label::from_bool(i % 3 == 0)).collect();
        let p = FoldPlan::stratified(&labels, 10, 9).unwrap();
        let sizes = p.sizes();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let pos: Vec<usize> = (0..10)
            .map(|f| p.test_indices(f).iter().filter(|&&i| labels[i].is_security()).count())
            .collect();
        assert!(pos.iter().max().unwrap() - pos.iter().min().unwrap() <= 1);
    }
}
