//! K-nearest-neighbor classifier over Euclidean distance.
//!
//! Brute-force search: the datasets this serves are a few thousand rows,
//! where a scan beats any index. Tie-breaking is fully specified so
//! predictions are reproducible: equal distances prefer earlier-stored
//! rows, equal vote counts prefer the lowest class code.

use std::collections::BTreeMap;

/// Stores the training data verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    pub fn fit(x: &[Vec<f64>], y: &[usize], k: usize) -> KnnModel {
        KnnModel {
            k,
            rows: x.to_vec(),
            labels: y.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn predict_one(&self, row: &[f64]) -> usize {
        let mut ranked: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d: f64 = r
                    .iter()
                    .zip(row)
                    .map(|(a, b)| {
                        let d = a - b;
                        d * d
                    })
                    .sum();
                (d, i)
            })
            .collect();

        // Partial selection of the k nearest under the (distance, stored
        // index) order; the comparator is a total order, so the front
        // block is exactly the k smallest.
        let k = self.k.min(ranked.len());
        if k < ranked.len() {
            ranked.select_nth_unstable_by(k - 1, |a, b| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
            });
        }

        let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
        for &(_, idx) in &ranked[..k] {
            *votes.entry(self.labels[idx]).or_insert(0) += 1;
        }
        // Ascending key iteration + strictly-greater keeps the lowest
        // class code on vote ties.
        let mut best = (usize::MAX, 0usize);
        for (&label, &count) in &votes {
            if count > best.1 {
                best = (label, count);
            }
        }
        best.0
    }
}
