//! Random forests and gradient-boosted trees.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_classification_tree, grow, GradStat, GrowParams, Newton, Tree};
use crate::features::SparseRow;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_estimators: 100, max_depth: None, min_samples_split: 2, min_samples_leaf: 1 }
    }
}

/// Bagged Gini trees, `floor(sqrt(width))` candidate features per split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(
        rows: &[SparseRow],
        width: usize,
        labels: &[bool],
        params: &ForestParams,
        seed_value: u64,
    ) -> Self {
        let n = rows.len();
        let max_features = (libm::sqrt(width as f64) as usize).max(1);
        let grow_params = GrowParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split as f64,
        };
        let trees = (0..params.n_estimators)
            .map(|t| {
                let mut rng = seed::rng_for(seed_value, t as u64);
                let mut weights = vec![0.0; n];
                for _ in 0..n {
                    weights[rng.gen_range(0..n)] += 1.0;
                }
                let mut choose = |features: Vec<usize>| -> Vec<usize> {
                    if features.len() <= max_features {
                        return features;
                    }
                    let mut picked: Vec<usize> = index::sample(&mut rng, features.len(), max_features)
                        .into_iter()
                        .map(|k| features[k])
                        .collect();
                    picked.sort_unstable();
                    picked
                };
                fit_classification_tree(
                    rows,
                    width,
                    labels,
                    &weights,
                    grow_params,
                    params.min_samples_leaf as f64,
                    &mut choose,
                )
            })
            .collect();
        RandomForest { trees }
    }

    /// Mean of the trees' leaf positive fractions.
    pub fn score(&self, row: &SparseRow) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostingParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub min_child_weight: f64,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            n_estimators: 100,
            learning_rate: 0.3,
            max_depth: 6,
            lambda: 1.0,
            min_child_weight: 1.0,
        }
    }
}

/// Logistic-loss boosting with Newton-step regression trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    pub trees: Vec<Tree>,
    pub learning_rate: f64,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

impl BoostedTrees {
    pub fn fit(rows: &[SparseRow], width: usize, labels: &[bool], params: &BoostingParams) -> Self {
        let n = rows.len();
        let crit = Newton { lambda: params.lambda, min_child_weight: params.min_child_weight };
        let grow_params = GrowParams { max_depth: Some(params.max_depth), min_samples_split: 2.0 };
        let mut margin = vec![0.0f64; n];
        let mut trees = Vec::with_capacity(params.n_estimators);
        for _ in 0..params.n_estimators {
            let stats: Vec<GradStat> = (0..n)
                .map(|i| {
                    let p = sigmoid(margin[i]);
                    let y = if labels[i] { 1.0 } else { 0.0 };
                    GradStat { grad: p - y, hess: (p * (1.0 - p)).max(1e-16), count: 1.0 }
                })
                .collect();
            let mut tree =
                grow(&crit, rows, width, (0..n).collect(), &stats, grow_params, &mut |f| f);
            for node in tree.nodes.iter_mut() {
                if let super::tree::Node::Leaf { value } = node {
                    *value *= params.learning_rate;
                }
            }
            for (m, r) in margin.iter_mut().zip(rows) {
                *m += tree.predict(r);
            }
            trees.push(tree);
        }
        BoostedTrees { trees, learning_rate: params.learning_rate }
    }

    pub fn margin(&self, row: &SparseRow) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum()
    }

    pub fn score(&self, row: &SparseRow) -> f64 {
        sigmoid(self.margin(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<SparseRow>, Vec<bool>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let pos = i % 2 == 0;
            let mut d = [0.0; 4];
            d[if pos { 0 } else { 1 }] = 1.0 + (i % 5) as f64;
            d[2 + i % 2] = 0.5;
            rows.push(SparseRow::from_dense(&d));
            y.push(pos);
        }
        (rows, y)
    }

    #[test]
    fn forest_separates_toy_data() {
        let (x, y) = toy();
        let f = RandomForest::fit(&x, 4, &y, &ForestParams { n_estimators: 15, ..Default::default() }, 5);
        for (r, &l) in x.iter().zip(&y) {
            let s = f.score(r);
            assert!((0.0..=1.0).contains(&s));
            assert_eq!(s > 0.5, l);
        }
        let g = RandomForest::fit(&x, 4, &y, &ForestParams { n_estimators: 15, ..Default::default() }, 5);
        assert_eq!(f, g);
    }

    #[test]
    fn boosting_separates_toy_data() {
        let (x, y) = toy();
        let b = BoostedTrees::fit(&x, 4, &y, &BoostingParams { n_estimators: 20, ..Default::default() });
        for (r, &l) in x.iter().zip(&y) {
            assert_eq!(b.score(r) > 0.5, l);
        }
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }
}
