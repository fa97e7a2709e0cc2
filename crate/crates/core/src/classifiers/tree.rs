//! Binary decision trees over sparse rows.
//!
//! Split search only touches the non-zero entries of the samples in a node:
//! every feature that does not appear there is constant zero and cannot split.
//! The same grower serves Gini classification trees and the second-order
//! regression trees used by boosting.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::SparseRow;

/// Additive per-node statistics.
pub(crate) trait NodeStat: Copy + Default {
    fn add(&mut self, other: &Self);
    fn minus(&self, other: &Self) -> Self;
    fn weight(&self) -> f64;
}

pub(crate) trait Criterion {
    type Stat: NodeStat;
    /// Gain of splitting `parent` into `left` and `right`, or `None` when the
    /// split is not admissible.
    fn gain(&self, parent: &Self::Stat, left: &Self::Stat, right: &Self::Stat) -> Option<f64>;
    fn leaf_value(&self, stat: &Self::Stat) -> f64;
    fn is_pure(&self, stat: &Self::Stat) -> bool;
    /// Smallest gain that still produces a split.
    fn min_gain(&self) -> f64;
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct GiniStat {
    pub positive: f64,
    pub weight: f64,
}

impl NodeStat for GiniStat {
    fn add(&mut self, o: &Self) {
        self.positive += o.positive;
        self.weight += o.weight;
    }
    fn minus(&self, o: &Self) -> Self {
        GiniStat { positive: self.positive - o.positive, weight: self.weight - o.weight }
    }
    fn weight(&self) -> f64 {
        self.weight
    }
}

pub(crate) struct Gini {
    pub min_samples_leaf: f64,
}

fn gini_impurity(s: &GiniStat) -> f64 {
    if s.weight <= 0.0 {
        return 0.0;
    }
    let p = s.positive / s.weight;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

impl Criterion for Gini {
    type Stat = GiniStat;

    fn gain(&self, parent: &GiniStat, left: &GiniStat, right: &GiniStat) -> Option<f64> {
        if left.weight < self.min_samples_leaf || right.weight < self.min_samples_leaf {
            return None;
        }
        Some(
            parent.weight * gini_impurity(parent)
                - left.weight * gini_impurity(left)
                - right.weight * gini_impurity(right),
        )
    }

    fn leaf_value(&self, s: &GiniStat) -> f64 {
        if s.weight > 0.0 {
            s.positive / s.weight
        } else {
            0.0
        }
    }

    fn is_pure(&self, s: &GiniStat) -> bool {
        s.positive <= 0.0 || s.positive >= s.weight
    }

    fn min_gain(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct GradStat {
    pub grad: f64,
    pub hess: f64,
    pub count: f64,
}

impl NodeStat for GradStat {
    fn add(&mut self, o: &Self) {
        self.grad += o.grad;
        self.hess += o.hess;
        self.count += o.count;
    }
    fn minus(&self, o: &Self) -> Self {
        GradStat { grad: self.grad - o.grad, hess: self.hess - o.hess, count: self.count - o.count }
    }
    fn weight(&self) -> f64 {
        self.count
    }
}

/// Second-order gain with L2 leaf regularization.
pub(crate) struct Newton {
    pub lambda: f64,
    pub min_child_weight: f64,
}

impl Newton {
    fn score(&self, s: &GradStat) -> f64 {
        s.grad * s.grad / (s.hess + self.lambda)
    }
}

impl Criterion for Newton {
    type Stat = GradStat;

    fn gain(&self, parent: &GradStat, left: &GradStat, right: &GradStat) -> Option<f64> {
        if left.hess < self.min_child_weight || right.hess < self.min_child_weight {
            return None;
        }
        Some(0.5 * (self.score(left) + self.score(right) - self.score(parent)))
    }

    fn leaf_value(&self, s: &GradStat) -> f64 {
        -s.grad / (s.hess + self.lambda)
    }

    fn is_pure(&self, _s: &GradStat) -> bool {
        false
    }

    fn min_gain(&self) -> f64 {
        1e-12
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub width: usize,
}

impl Tree {
    pub fn predict(&self, row: &SparseRow) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row.get(feature as usize) <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + go(nodes, left as usize).max(go(nodes, right as usize))
                }
            }
        }
        go(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct GrowParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: f64,
}

pub(crate) struct Split {
    pub feature: usize,
    pub threshold: f64,
}

/// Best split of the node holding `samples`. `choose` receives the
/// non-constant features in ascending order and returns those to evaluate.
pub(crate) fn best_split<C: Criterion>(
    crit: &C,
    rows: &[SparseRow],
    samples: &[usize],
    stats: &[C::Stat],
    parent: &C::Stat,
    choose: &mut dyn FnMut(Vec<usize>) -> Vec<usize>,
) -> Option<Split> {
    let mut entries: Vec<(u32, f64, usize)> = Vec::new();
    for &s in samples {
        for (j, v) in rows[s].iter() {
            entries.push((j as u32, v, s));
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));

    // (feature, start, end) ranges over `entries`
    let mut groups: Vec<(usize, usize, usize)> = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let f = entries[start].0;
        let mut end = start;
        while end < entries.len() && entries[end].0 == f {
            end += 1;
        }
        let constant = end - start == samples.len() && entries[start].1 == entries[end - 1].1;
        if !constant {
            groups.push((f as usize, start, end));
        }
        start = end;
    }
    let candidates = choose(groups.iter().map(|g| g.0).collect());
    let mut best: Option<(f64, Split)> = None;
    let mut gi = 0;
    for f in candidates {
        while gi < groups.len() && groups[gi].0 < f {
            gi += 1;
        }
        let Some(&(_, s, e)) = groups.get(gi).filter(|g| g.0 == f) else { continue };
        let group = &entries[s..e];

        // blocks of equal value with the implicit zeros slotted in
        let mut nonzero_sum = C::Stat::default();
        for &(_, _, smp) in group {
            nonzero_sum.add(&stats[smp]);
        }
        let zero_stat = parent.minus(&nonzero_sum);
        let n_zero = samples.len() - group.len();
        let mut blocks: Vec<(f64, C::Stat)> = Vec::new();
        let mut zero_placed = n_zero == 0;
        for &(_, v, smp) in group {
            if !zero_placed && v > 0.0 {
                blocks.push((0.0, zero_stat));
                zero_placed = true;
            }
            match blocks.last_mut() {
                Some((bv, st)) if *bv == v => st.add(&stats[smp]),
                _ => blocks.push((v, stats[smp])),
            }
        }
        if !zero_placed {
            blocks.push((0.0, zero_stat));
        }

        let mut left = C::Stat::default();
        for w in 0..blocks.len().saturating_sub(1) {
            left.add(&blocks[w].1);
            let right = parent.minus(&left);
            if let Some(g) = crit.gain(parent, &left, &right) {
                if g >= crit.min_gain() && best.as_ref().is_none_or(|(bg, _)| g > *bg) {
                    let threshold = blocks[w].0 + (blocks[w + 1].0 - blocks[w].0) / 2.0;
                    best = Some((g, Split { feature: f, threshold }));
                }
            }
        }
    }
    best.map(|(_, s)| s)
}

pub(crate) fn grow<C: Criterion>(
    crit: &C,
    rows: &[SparseRow],
    width: usize,
    samples: Vec<usize>,
    stats: &[C::Stat],
    params: GrowParams,
    choose: &mut dyn FnMut(Vec<usize>) -> Vec<usize>,
) -> Tree {
    let mut nodes = Vec::new();
    // (node slot, samples, depth)
    let mut stack = alloc::vec![(0usize, samples, 0usize)];
    nodes.push(Node::Leaf { value: 0.0 });
    while let Some((slot, samples, depth)) = stack.pop() {
        let mut total = C::Stat::default();
        for &s in &samples {
            total.add(&stats[s]);
        }
        let leaf = Node::Leaf { value: crit.leaf_value(&total) };
        let stop = crit.is_pure(&total)
            || total.weight() < params.min_samples_split
            || params.max_depth.is_some_and(|d| depth >= d);
        let split =
            if stop { None } else { best_split(crit, rows, &samples, stats, &total, choose) };
        let Some(split) = split else {
            nodes[slot] = leaf;
            continue;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&s| rows[s].get(split.feature) <= split.threshold);
        let li = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[slot] = Node::Split {
            feature: split.feature as u32,
            threshold: split.threshold,
            left: li as u32,
            right: li as u32 + 1,
        };
        stack.push((li + 1, r, depth + 1));
        stack.push((li, l, depth + 1));
    }
    Tree { nodes, width }
}

/// CART classification tree with Gini impurity; leaves hold the positive
/// fraction of their training samples.
pub(crate) fn fit_classification_tree(
    rows: &[SparseRow],
    width: usize,
    labels: &[bool],
    weights: &[f64],
    params: GrowParams,
    min_samples_leaf: f64,
    choose: &mut dyn FnMut(Vec<usize>) -> Vec<usize>,
) -> Tree {
    let stats: Vec<GiniStat> = labels
        .iter()
        .zip(weights)
        .map(|(&y, &w)| GiniStat { positive: if y { w } else { 0.0 }, weight: w })
        .collect();
    let samples: Vec<usize> = (0..rows.len()).filter(|&i| weights[i] > 0.0).collect();
    grow(&Gini { min_samples_leaf }, rows, width, samples, &stats, params, choose)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(dense: &[&[f64]]) -> Vec<SparseRow> {
        dense.iter().map(|r| SparseRow::from_dense(r)).collect()
    }

    fn all(f: Vec<usize>) -> Vec<usize> {
        f
    }

    const DEEP: GrowParams = GrowParams { max_depth: None, min_samples_split: 2.0 };

    #[test]
    fn memorizes_separable_data() {
        let x = rows(&[&[0.0, 1.0], &[0.0, 2.0], &[3.0, 0.0], &[1.0, 0.0], &[0.0, 0.0]]);
        let y = [true, true, false, false, false];
        let t = fit_classification_tree(&x, 2, &y, &[1.0; 5], DEEP, 1.0, &mut all);
        for (r, &l) in x.iter().zip(&y) {
            assert_eq!(t.predict(r) > 0.5, l);
        }
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = rows(&[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let y = [false, true, true, false];
        let t = fit_classification_tree(&x, 2, &y, &[1.0; 4], DEEP, 1.0, &mut all);
        assert_eq!(t.depth(), 2);
        for (r, &l) in x.iter().zip(&y) {
            assert_eq!(t.predict(r) > 0.5, l);
        }
    }

    #[test]
    fn negative_values_split_around_zero() {
        let x = rows(&[&[-2.0], &[-1.0], &[0.0], &[1.5]]);
        let y = [true, true, false, false];
        let t = fit_classification_tree(&x, 1, &y, &[1.0; 4], DEEP, 1.0, &mut all);
        assert_eq!(t.n_leaves(), 2);
        assert!(t.predict(&SparseRow::from_dense(&[-0.7])) > 0.5);
        assert!(t.predict(&SparseRow::from_dense(&[0.2])) < 0.5);
    }

    #[test]
    fn depth_limit_and_constant_features() {
        let x = rows(&[&[1.0], &[1.0], &[1.0]]);
        let y = [true, false, true];
        let t = fit_classification_tree(&x, 1, &y, &[1.0; 3], DEEP, 1.0, &mut all);
        assert_eq!(t.nodes.len(), 1);
        assert!((t.predict(&x[0]) - 2.0 / 3.0).abs() < 1e-12);

        let x = rows(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let y = [true, false, true, false];
        let p = GrowParams { max_depth: Some(1), min_samples_split: 2.0 };
        let t = fit_classification_tree(&x, 1, &y, &[1.0; 4], p, 1.0, &mut all);
        assert!(t.depth() <= 1);
    }

    #[test]
    fn zero_weight_samples_are_ignored() {
        let x = rows(&[&[0.0], &[1.0], &[1.0]]);
        let y = [true, false, true];
        let t = fit_classification_tree(&x, 1, &y, &[1.0, 0.0, 2.0], DEEP, 1.0, &mut all);
        assert_eq!(t.predict(&x[1]), 1.0);
    }
}
