//! Gaussian naive Bayes with variance smoothing.
//!
//! Per class c and feature f the model keeps the class mean μ_cf and the
//! smoothed class variance σ²_cf = Var_cf + ε, where
//! ε = smoothing · max_f Var_pooled(f). Variances use the population
//! (1/N) divisor.

/// Per-class Gaussian statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GnbModel {
    pub dim: usize,
    /// Sorted distinct class codes.
    pub classes: Vec<usize>,
    /// Class priors, summing to 1.
    pub priors: Vec<f64>,
    /// Per class, per feature.
    pub means: Vec<Vec<f64>>,
    /// Smoothed; strictly positive.
    pub variances: Vec<Vec<f64>>,
}

fn column_mean_var(rows: &[&Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; dim];
    for row in rows {
        for (f, (v, m)) in row.iter().zip(&mean).enumerate() {
            let d = v - m;
            var[f] += d * d;
        }
    }
    for v in &mut var {
        *v /= n;
    }
    (mean, var)
}

impl GnbModel {
    pub fn fit(x: &[Vec<f64>], y: &[usize], smoothing: f64) -> GnbModel {
        let dim = x[0].len();
        let mut classes: Vec<usize> = y.to_vec();
        classes.sort_unstable();
        classes.dedup();

        let all_rows: Vec<&Vec<f64>> = x.iter().collect();
        let (_, pooled_var) = column_mean_var(&all_rows, dim);
        let max_pooled = pooled_var.iter().copied().fold(0.0f64, f64::max);
        let epsilon = (smoothing * max_pooled).max(f64::MIN_POSITIVE);

        let mut priors = Vec::with_capacity(classes.len());
        let mut means = Vec::with_capacity(classes.len());
        let mut variances = Vec::with_capacity(classes.len());
        for &class in &classes {
            let rows: Vec<&Vec<f64>> = x
                .iter()
                .zip(y)
                .filter(|(_, &l)| l == class)
                .map(|(r, _)| r)
                .collect();
            priors.push(rows.len() as f64 / x.len() as f64);
            let (mean, mut var) = column_mean_var(&rows, dim);
            for v in &mut var {
                *v += epsilon;
            }
            means.push(mean);
            variances.push(var);
        }

        GnbModel {
            dim,
            classes,
            priors,
            means,
            variances,
        }
    }

    /// Unnormalized log-posterior of each class:
    /// log prior + Σ_f log N(x_f; μ_cf, σ²_cf).
    pub fn log_joint(&self, row: &[f64]) -> Vec<f64> {
        const LN_2PI: f64 = 1.8378770664093453;
        self.classes
            .iter()
            .enumerate()
            .map(|(c, _)| {
                let mut acc = self.priors[c].ln();
                for f in 0..self.dim {
                    let var = self.variances[c][f];
                    let d = row[f] - self.means[c][f];
                    acc += -0.5 * (LN_2PI + var.ln()) - d * d / (2.0 * var);
                }
                acc
            })
            .collect()
    }

    pub fn predict_one(&self, row: &[f64]) -> usize {
        let scores = self.log_joint(row);
        let mut best = 0usize;
        for c in 1..scores.len() {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        // Classes are sorted ascending and the comparison is strict, so
        // score ties resolve to the lowest class code.
        self.classes[best]
    }
}
