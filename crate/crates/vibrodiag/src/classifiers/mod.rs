//! The three classifiers behind one fit/predict contract.

pub mod gnb;
pub mod io;
pub mod knn;
pub mod svm;

pub use gnb::GnbModel;
pub use knn::KnnModel;
pub use svm::{auto_gamma, rbf_kernel, smo_solve, PairwiseSvm, SmoSolution, SvmModel};

use crate::error::{Error, Result};

/// RBF kernel scale: explicit, or derived from the training data as
/// `1 / (dim · Var(X))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GammaSpec {
    #[default]
    Auto,
    Fixed(f64),
}

/// Classifier choice plus its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassifierSpec {
    /// One-vs-one RBF SVM trained by SMO.
    Svm { c: f64, gamma: GammaSpec },
    /// K-nearest neighbors, Euclidean.
    Knn { k: usize },
    /// Gaussian naive Bayes; `smoothing` is the fraction of the largest
    /// pooled feature variance added to every class variance.
    Gnb { smoothing: f64 },
}

impl ClassifierSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ClassifierSpec::Svm { .. } => "svm",
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::Gnb { .. } => "gnb",
        }
    }

    /// The swept hyperparameter as a plain number (C, K, or the
    /// smoothing exponent), for parameter curves.
    pub fn param_value(&self) -> f64 {
        match self {
            ClassifierSpec::Svm { c, .. } => *c,
            ClassifierSpec::Knn { k } => *k as f64,
            ClassifierSpec::Gnb { smoothing } => -smoothing.log10(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClassifierSpec::Svm { c, gamma } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter(format!("svm C must be > 0, got {c}")));
                }
                if let GammaSpec::Fixed(g) = gamma {
                    if !(g > 0.0 && g.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "svm gamma must be > 0, got {g}"
                        )));
                    }
                }
            }
            ClassifierSpec::Knn { k } => {
                if k == 0 {
                    return Err(Error::InvalidParameter("knn K must be >= 1".into()));
                }
            }
            ClassifierSpec::Gnb { smoothing } => {
                if !(smoothing > 0.0 && smoothing <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gnb smoothing must be in (0, 1], got {smoothing}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A fitted classifier. Immutable after fit; safe to share across
/// threads for batch scoring.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Svm(SvmModel),
    Knn(KnnModel),
    Gnb(GnbModel),
}

/// Trains the classifier described by `spec` on rows `x` with class
/// codes `y`. The rows are used as-is: normalization is the caller's
/// responsibility.
pub fn fit(spec: &ClassifierSpec, x: &[Vec<f64>], y: &[usize]) -> Result<TrainedModel> {
    spec.validate()?;
    if x.is_empty() {
        return Err(Error::TooFewRows { need: 2, got: 0 });
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let dim = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(i));
        }
    }
    let mut distinct: Vec<usize> = y.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::SingleClass);
    }

    match *spec {
        ClassifierSpec::Svm { c, gamma } => {
            let gamma = match gamma {
                GammaSpec::Auto => auto_gamma(x),
                GammaSpec::Fixed(g) => g,
            };
            Ok(TrainedModel::Svm(SvmModel::fit(x, y, c, gamma)?))
        }
        ClassifierSpec::Knn { k } => {
            if k > x.len() {
                return Err(Error::KTooLarge { k, n: x.len() });
            }
            Ok(TrainedModel::Knn(KnnModel::fit(x, y, k)))
        }
        ClassifierSpec::Gnb { smoothing } => Ok(TrainedModel::Gnb(GnbModel::fit(x, y, smoothing))),
    }
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Svm(_) => "svm",
            TrainedModel::Knn(_) => "knn",
            TrainedModel::Gnb(_) => "gnb",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TrainedModel::Svm(m) => m.dim,
            TrainedModel::Knn(m) => m.dim(),
            TrainedModel::Gnb(m) => m.dim,
        }
    }

    pub fn predict_one(&self, row: &[f64]) -> Result<usize> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        Ok(match self {
            TrainedModel::Svm(m) => m.predict_one(row),
            TrainedModel::Knn(m) => m.predict_one(row),
            TrainedModel::Gnb(m) => m.predict_one(row),
        })
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        x.iter().map(|row| self.predict_one(row)).collect()
    }

    /// Raw pairwise decision values (SVM only), one value per one-vs-one
    /// machine in pair order.
    pub fn decision_values(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let TrainedModel::Svm(m) = self else {
            return Err(Error::WrongModelKind {
                expected: "svm",
                got: self.kind(),
            });
        };
        x.iter()
            .map(|row| {
                if row.len() != m.dim {
                    return Err(Error::DimensionMismatch {
                        expected: m.dim,
                        got: row.len(),
                    });
                }
                Ok(m.decision_values(row))
            })
            .collect()
    }
}
