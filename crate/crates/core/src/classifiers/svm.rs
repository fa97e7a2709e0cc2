//! L2-regularized, squared-hinge linear SVM trained by dual coordinate descent.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ensemble::sigmoid;
use crate::features::SparseRow;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, max_iter: 1000, tol: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

impl LinearSvm {
    pub fn fit(
        rows: &[SparseRow],
        width: usize,
        labels: &[bool],
        params: &SvmParams,
        seed_value: u64,
    ) -> Self {
        let n = rows.len();
        let diag = 1.0 / (2.0 * params.c);
        // bias handled as an extra constant feature of value 1
        let q: Vec<f64> = rows.iter().map(|r| r.norm_sq() + 1.0 + diag).collect();
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        let mut alpha = vec![0.0; n];
        let mut w = vec![0.0; width];
        let mut b = 0.0;
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = seed::rng(seed_value);
        let mut iterations = 0;
        while iterations < params.max_iter {
            iterations += 1;
            order.shuffle(&mut rng);
            let mut pg_max = f64::NEG_INFINITY;
            let mut pg_min = f64::INFINITY;
            for &i in &order {
                let g = y[i] * (rows[i].dot(&w) + b) - 1.0 + diag * alpha[i];
                let pg = if alpha[i] == 0.0 { g.min(0.0) } else { g };
                pg_max = pg_max.max(pg);
                pg_min = pg_min.min(pg);
                if pg.abs() > 1e-12 {
                    let old = alpha[i];
                    alpha[i] = (alpha[i] - g / q[i]).max(0.0);
                    let d = (alpha[i] - old) * y[i];
                    for (j, v) in rows[i].iter() {
                        w[j] += d * v;
                    }
                    b += d;
                }
            }
            if pg_max - pg_min <= params.tol {
                break;
            }
        }
        LinearSvm { weights: w, bias: b, iterations }
    }

    pub fn decision(&self, row: &SparseRow) -> f64 {
        row.dot(&self.weights) + self.bias
    }

    /// Signed margin squashed through the logistic function.
    pub fn score(&self, row: &SparseRow) -> f64 {
        sigmoid(self.decision(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_linear_data() {
        let rows: Vec<SparseRow> = (0..30)
            .map(|i| {
                let x = i as f64 / 10.0 - 1.5;
                SparseRow::from_dense(&[x, 0.3 * (i % 3) as f64])
            })
            .collect();
        let y: Vec<bool> = (0..30).map(|i| i >= 15).collect();
        let m = LinearSvm::fit(&rows, 2, &y, &SvmParams::default(), 1);
        for (r, &l) in rows.iter().zip(&y) {
            assert_eq!(m.score(r) > 0.5, l, "{r:?}");
        }
        assert!(m.weights[0] > 0.0);
    }
}
