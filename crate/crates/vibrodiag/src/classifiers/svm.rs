//! RBF-kernel support vector classifier trained by sequential minimal
//! optimization, one-vs-one for multiclass.
//!
//! The solver works on the dual problem
//!
//! ```text
//! min ½·αᵀQα − Σαᵢ   s.t.  yᵀα = 0,  0 ≤ αᵢ ≤ C,   Q_ij = yᵢyⱼK(xᵢ,xⱼ)
//! ```
//!
//! selecting at every step the maximal-violating pair (first-order
//! heuristic) and solving the two-variable subproblem exactly, so the
//! dual objective never decreases.

use crate::error::{Error, Result};

/// Default KKT tolerance at which SMO declares optimality.
pub const SMO_TOLERANCE: f64 = 1e-3;
/// Hard cap on optimization passes (each pass is `n` pair updates).
pub const SMO_MAX_PASSES: usize = 10_000;

pub fn rbf_kernel(u: &[f64], v: &[f64], gamma: f64) -> f64 {
    let dist_sq: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    (-gamma * dist_sq).exp()
}

/// Kernel scale used when no explicit gamma is given:
/// `1 / (dim · Var(X))` with the variance pooled over every entry of `x`.
pub fn auto_gamma(x: &[Vec<f64>]) -> f64 {
    let dim = x.first().map_or(1, Vec::len).max(1);
    let count = (x.len() * dim) as f64;
    let mean: f64 = x.iter().flatten().sum::<f64>() / count;
    let var: f64 = x
        .iter()
        .flatten()
        .map(|v| {
            let d = v - mean;
            d * d
        })
        .sum::<f64>()
        / count;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0 / dim as f64
    }
}

/// Result of one binary SMO solve.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective (maximization form, Σα − ½αᵀQα) after every pair
    /// update; non-decreasing.
    pub objective_curve: Vec<f64>,
    pub converged: bool,
    pub pair_updates: usize,
}

impl SmoSolution {
    pub fn final_objective(&self) -> f64 {
        self.objective_curve.last().copied().unwrap_or(0.0)
    }
}

/// Solves the binary dual on a precomputed kernel matrix. `y` must be
/// ±1. Terminates when no pair violates the KKT conditions by more than
/// `tol`, or after `max_passes · n` pair updates.
pub fn smo_solve(
    gram: &[Vec<f64>],
    y: &[f64],
    c: f64,
    tol: f64,
    max_passes: usize,
) -> SmoSolution {
    let n = y.len();
    debug_assert_eq!(gram.len(), n);
    debug_assert!(y.iter().all(|&v| v == 1.0 || v == -1.0));

    let mut alpha = vec![0.0f64; n];
    // g_i = (Qα)_i − 1; all α start at zero.
    let mut g = vec![-1.0f64; n];
    let mut curve = Vec::new();
    let mut converged = false;
    let mut updates = 0usize;
    let max_updates = max_passes.saturating_mul(n.max(1));

    let objective = |alpha: &[f64], g: &[f64]| -> f64 {
        // Σα − ½αᵀQα, using (Qα)_i = g_i + 1.
        alpha
            .iter()
            .zip(g)
            .map(|(&a, &gi)| 0.5 * a * (1.0 - gi))
            .sum()
    };

    loop {
        // Maximal violating pair: i maximizes −y·g over the set still
        // movable upward, j minimizes it over the set movable downward.
        let mut i = usize::MAX;
        let mut m = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut big_m = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * g[t];
            let in_up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
            if in_up && v > m {
                m = v;
                i = t;
            }
            if in_low && v < big_m {
                big_m = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || m - big_m <= tol {
            converged = true;
            break;
        }
        if updates >= max_updates {
            break;
        }

        // Move along d = yᵢeᵢ − yⱼeⱼ (preserves yᵀα) by the exact
        // unconstrained minimizer, clipped to the box.
        let mut quad = gram[i][i] + gram[j][j] - 2.0 * gram[i][j];
        if quad <= 0.0 {
            quad = 1e-12;
        }
        let unconstrained = (m - big_m) / quad;
        let bound_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let bound_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        let step = unconstrained.min(bound_i).min(bound_j);

        alpha[i] += y[i] * step;
        alpha[j] -= y[j] * step;
        for t in 0..n {
            g[t] += step * y[t] * (gram[t][i] - gram[t][j]);
        }
        updates += 1;
        curve.push(objective(&alpha, &g));
    }

    // Bias from the KKT conditions: for free vectors b = −y·g exactly;
    // otherwise the midpoint of the feasible interval.
    let free: Vec<usize> = (0..n)
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c)
        .collect();
    let bias = if !free.is_empty() {
        free.iter().map(|&t| -y[t] * g[t]).sum::<f64>() / free.len() as f64
    } else {
        let mut m = f64::NEG_INFINITY;
        let mut big_m = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * g[t];
            if (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0) {
                m = m.max(v);
            }
            if (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0) {
                big_m = big_m.min(v);
            }
        }
        (m + big_m) / 2.0
    };

    SmoSolution {
        alpha,
        bias,
        objective_curve: curve,
        converged,
        pair_updates: updates,
    }
}

/// One binary machine of the one-vs-one ensemble. The lower class code
/// is the +1 side, so `decision > 0` votes for `class_pos`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSvm {
    pub class_pos: usize,
    pub class_neg: usize,
    pub support_vectors: Vec<Vec<f64>>,
    /// αᵢ·yᵢ per support vector.
    pub alpha_y: Vec<f64>,
    pub bias: f64,
}

impl PairwiseSvm {
    pub fn decision(&self, row: &[f64], gamma: f64) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alpha_y)
            .map(|(sv, ay)| ay * rbf_kernel(sv, row, gamma))
            .sum::<f64>()
            + self.bias
    }
}

/// Trained one-vs-one RBF SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub gamma: f64,
    pub dim: usize,
    /// Sorted distinct class codes seen at fit time.
    pub classes: Vec<usize>,
    /// Pairs in (i, j), i < j order over `classes`.
    pub pairs: Vec<PairwiseSvm>,
    /// Number of pairwise solves that hit the pass cap before reaching
    /// the KKT tolerance.
    pub convergence_warnings: usize,
}

impl SvmModel {
    pub fn fit(x: &[Vec<f64>], y: &[usize], c: f64, gamma: f64) -> Result<SvmModel> {
        let dim = x[0].len();
        let mut classes: Vec<usize> = y.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::SingleClass);
        }

        let mut pairs = Vec::new();
        let mut warnings = 0usize;
        for a in 0..classes.len() {
            for b in a + 1..classes.len() {
                let (pos, neg) = (classes[a], classes[b]);
                let idx: Vec<usize> = (0..x.len())
                    .filter(|&t| y[t] == pos || y[t] == neg)
                    .collect();
                let rows: Vec<&Vec<f64>> = idx.iter().map(|&t| &x[t]).collect();
                let labels: Vec<f64> = idx
                    .iter()
                    .map(|&t| if y[t] == pos { 1.0 } else { -1.0 })
                    .collect();

                let n = rows.len();
                let mut gram = vec![vec![0.0f64; n]; n];
                for p in 0..n {
                    gram[p][p] = 1.0;
                    for q in p + 1..n {
                        let k = rbf_kernel(rows[p], rows[q], gamma);
                        gram[p][q] = k;
                        gram[q][p] = k;
                    }
                }

                let sol = smo_solve(&gram, &labels, c, SMO_TOLERANCE, SMO_MAX_PASSES);
                if !sol.converged {
                    warnings += 1;
                }

                let mut support_vectors = Vec::new();
                let mut alpha_y = Vec::new();
                for (t, &a_t) in sol.alpha.iter().enumerate() {
                    if a_t > 0.0 {
                        support_vectors.push(rows[t].clone());
                        alpha_y.push(a_t * labels[t]);
                    }
                }
                pairs.push(PairwiseSvm {
                    class_pos: pos,
                    class_neg: neg,
                    support_vectors,
                    alpha_y,
                    bias: sol.bias,
                });
            }
        }

        Ok(SvmModel {
            gamma,
            dim,
            classes,
            pairs,
            convergence_warnings: warnings,
        })
    }

    /// Raw pairwise decision values for one row, in pair order.
    pub fn decision_values(&self, row: &[f64]) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|p| p.decision(row, self.gamma))
            .collect()
    }

    /// Majority vote over the pairwise machines. Vote ties are broken by
    /// the summed decision magnitudes collected by each class, remaining
    /// ties by the lowest class code.
    pub fn predict_one(&self, row: &[f64]) -> usize {
        let mut votes: Vec<usize> = vec![0; self.classes.len()];
        let mut magnitude: Vec<f64> = vec![0.0; self.classes.len()];
        for pair in &self.pairs {
            let f = pair.decision(row, self.gamma);
            let winner = if f >= 0.0 {
                pair.class_pos
            } else {
                pair.class_neg
            };
            let slot = self.classes.iter().position(|&c| c == winner).unwrap();
            votes[slot] += 1;
            magnitude[slot] += f.abs();
        }
        let mut best = 0usize;
        for s in 1..self.classes.len() {
            let better = votes[s] > votes[best]
                || (votes[s] == votes[best] && magnitude[s] > magnitude[best]);
            if better {
                best = s;
            }
        }
        self.classes[best]
    }
}
