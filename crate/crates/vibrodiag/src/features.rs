//! Statistical descriptors over magnitude spectra, feature-matrix
//! normalization, and the feature CSV interchange format.
//!
//! Each axis of a spectrum reduces to nine descriptors (population 1/N
//! divisors throughout):
//!
//! ```text
//! mean   = (1/N)·Σ xᵢ
//! std    = sqrt((1/N)·Σ (xᵢ−x̄)²)
//! rms    = sqrt((1/N)·Σ xᵢ²)
//! pp     = x_max − x_min
//! if     = x_max / x̄
//! skew   = (1/N)·Σ ((xᵢ−x̄)³/σ³)
//! kurt   = (1/N)·Σ ((xᵢ−x̄)⁴/σ⁴)
//! crest  = |x_max| / rms
//! shape  = 1 / ((1/N)·Σ xᵢ)
//! ```
//!
//! The shape factor above is the reciprocal-mean form; the conventional
//! rms/mean(|x|) definition is available as [`ShapeFactorMode::Conventional`].
//! Undefined descriptors (zero variance, zero mean) become NaN and mark
//! the whole row as filterable; [`FeatureMatrix::drop_missing`] removes
//! such rows before training.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::ConditionLabel;
use crate::spectrum::Spectrum;

/// Features per axis.
pub const FEATURES_PER_AXIS: usize = 9;
/// Total feature dimensionality: 9 descriptors × 3 axes.
pub const DIM: usize = 27;

/// Column-name stems, in feature order.
pub const FEATURE_NAMES: [&str; FEATURES_PER_AXIS] = [
    "mean", "std", "rms", "pp", "if", "skew", "kurt", "crest", "shape",
];
pub const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// Variance floor below which skewness/kurtosis are treated as undefined.
const DEGENERATE_STD: f64 = 1e-12;

/// Which shape-factor formula to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapeFactorMode {
    /// Reciprocal of the mean (the dataset baseline's published form).
    #[default]
    Printed,
    /// rms divided by the mean absolute value.
    Conventional,
}

/// One labeled 27-dimensional feature row.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub values: [f64; DIM],
    pub label: ConditionLabel,
    pub source_path: String,
}

impl FeatureVector {
    /// True when any descriptor is non-finite; such rows are removed by
    /// [`FeatureMatrix::drop_missing`] rather than propagated.
    pub fn is_filterable(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }
}

/// Per-column (min, max) pairs recorded by min-max normalization, enough
/// to re-apply the exact same mapping to unseen rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxStats {
    pub columns: Vec<(f64, f64)>,
}

/// Normalization state of a feature matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Normalization {
    #[default]
    Raw,
    MinMax(MinMaxStats),
}

/// Row-major collection of feature vectors.
#[derive(Debug, Clone, Default)]
pub struct FeatureMatrix {
    pub rows: Vec<FeatureVector>,
    pub normalization: Normalization,
}

/// Computes the nine descriptors of one axis' magnitude bins.
pub fn axis_descriptors(bins: &[f64], mode: ShapeFactorMode) -> [f64; FEATURES_PER_AXIS] {
    let n = bins.len() as f64;
    if bins.is_empty() {
        return [f64::NAN; FEATURES_PER_AXIS];
    }

    let mean = bins.iter().sum::<f64>() / n;
    let max = bins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = bins.iter().copied().fold(f64::INFINITY, f64::min);
    let var = bins.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let rms = (bins.iter().map(|&x| x * x).sum::<f64>() / n).sqrt();
    let pp = max - min;

    let impulse = if mean == 0.0 { f64::NAN } else { max / mean };

    let (skew, kurt) = if std < DEGENERATE_STD {
        (f64::NAN, f64::NAN)
    } else {
        let skew = bins
            .iter()
            .map(|&x| {
                let d = (x - mean) / std;
                d * d * d
            })
            .sum::<f64>()
            / n;
        let kurt = bins
            .iter()
            .map(|&x| {
                let d = (x - mean) / std;
                d * d * d * d
            })
            .sum::<f64>()
            / n;
        (skew, kurt)
    };

    let crest = if rms == 0.0 { f64::NAN } else { max.abs() / rms };

    let shape = match mode {
        ShapeFactorMode::Printed => {
            if mean == 0.0 {
                f64::NAN
            } else {
                1.0 / mean
            }
        }
        ShapeFactorMode::Conventional => {
            let mean_abs = bins.iter().map(|x| x.abs()).sum::<f64>() / n;
            if mean_abs == 0.0 {
                f64::NAN
            } else {
                rms / mean_abs
            }
        }
    };

    [mean, std, rms, pp, impulse, skew, kurt, crest, shape]
}

/// Reduces a spectrum to the 27 descriptors, ordered x → y → z.
pub fn extract_features(spec: &Spectrum, mode: ShapeFactorMode) -> [f64; DIM] {
    let mut out = [0.0; DIM];
    for (a, bins) in [&spec.magnitudes_x, &spec.magnitudes_y, &spec.magnitudes_z]
        .into_iter()
        .enumerate()
    {
        out[a * FEATURES_PER_AXIS..(a + 1) * FEATURES_PER_AXIS]
            .copy_from_slice(&axis_descriptors(bins, mode));
    }
    out
}

impl FeatureMatrix {
    pub fn new(rows: Vec<FeatureVector>) -> FeatureMatrix {
        FeatureMatrix {
            rows,
            normalization: Normalization::Raw,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Per-column (min, max) over the clean (non-filterable) rows.
    pub fn minmax_stats(&self) -> Result<MinMaxStats> {
        if self.rows.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let clean: Vec<&FeatureVector> =
            self.rows.iter().filter(|r| !r.is_filterable()).collect();
        if clean.is_empty() {
            return Err(Error::AllRowsDropped(self.rows.len()));
        }
        let mut columns = vec![(f64::INFINITY, f64::NEG_INFINITY); DIM];
        for row in clean {
            for (c, &v) in row.values.iter().enumerate() {
                columns[c].0 = columns[c].0.min(v);
                columns[c].1 = columns[c].1.max(v);
            }
        }
        Ok(MinMaxStats { columns })
    }

    /// Maps every row through `(x − min) / (max − min)` per column.
    /// Constant columns (max = min) map to 0.
    pub fn apply_minmax(&self, stats: &MinMaxStats) -> FeatureMatrix {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut values = row.values;
                for (v, &(lo, hi)) in values.iter_mut().zip(&stats.columns) {
                    *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.0 };
                }
                FeatureVector {
                    values,
                    label: row.label,
                    source_path: row.source_path.clone(),
                }
            })
            .collect();
        FeatureMatrix {
            rows,
            normalization: Normalization::MinMax(stats.clone()),
        }
    }

    /// Min-max normalization over the merged matrix, per feature column.
    pub fn normalize_minmax(&self) -> Result<FeatureMatrix> {
        let stats = self.minmax_stats()?;
        Ok(self.apply_minmax(&stats))
    }

    /// Removes every row containing a non-finite value, preserving order.
    /// Returns the retained matrix and the number of rows dropped.
    pub fn drop_missing(&self) -> Result<(FeatureMatrix, usize)> {
        let rows: Vec<FeatureVector> = self
            .rows
            .iter()
            .filter(|r| !r.is_filterable())
            .cloned()
            .collect();
        let dropped = self.rows.len() - rows.len();
        if rows.is_empty() {
            return Err(Error::AllRowsDropped(self.rows.len()));
        }
        Ok((
            FeatureMatrix {
                rows,
                normalization: self.normalization.clone(),
            },
            dropped,
        ))
    }

    /// Feature values as plain rows, for the classifiers.
    pub fn value_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.to_vec()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label.code()).collect()
    }
}

/// Header of the feature CSV: `label,source,` then the 27 descriptor
/// columns `mean_x,std_x,...,shape_z`.
pub fn feature_csv_header() -> Vec<String> {
    let mut cols = vec!["label".to_string(), "source".to_string()];
    for axis in AXIS_NAMES {
        for feat in FEATURE_NAMES {
            cols.push(format!("{feat}_{axis}"));
        }
    }
    cols
}

/// Renders the matrix in the feature CSV format. Finite values use
/// shortest round-trip formatting; non-finite cells are written `NaN`.
pub fn feature_csv_to_string(matrix: &FeatureMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", feature_csv_header().join(","));
    for row in &matrix.rows {
        let _ = write!(out, "{},{}", row.label.code(), csv_quote(&row.source_path));
        for v in row.values {
            if v.is_finite() {
                let _ = write!(out, ",{v}");
            } else {
                out.push_str(",NaN");
            }
        }
        out.push('\n');
    }
    out
}

fn csv_quote(field: &str) -> String {
    if field.contains(['"', ',', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn write_feature_csv(matrix: &FeatureMatrix, path: &Path) -> Result<()> {
    fs::write(path, feature_csv_to_string(matrix)).map_err(|e| Error::io(path, e))
}

/// Parses a feature CSV produced by [`write_feature_csv`] (or compatible
/// external tooling). This is an untrusted-input entry point: it must
/// never panic, only error.
pub fn parse_feature_csv(text: &str, origin: &Path) -> Result<FeatureMatrix> {
    let malformed = |reason: String| Error::MalformedCsv {
        path: origin.to_path_buf(),
        reason,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let expected = feature_csv_header();
    let headers = reader
        .headers()
        .map_err(|e| malformed(format!("unreadable header: {e}")))?
        .clone();
    if headers.len() != expected.len() {
        return Err(malformed(format!(
            "expected {} header columns, found {}",
            expected.len(),
            headers.len()
        )));
    }
    for (got, want) in headers.iter().zip(&expected) {
        if !got.eq_ignore_ascii_case(want) {
            return Err(malformed(format!(
                "expected header column {want:?}, found {got:?}"
            )));
        }
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(format!("row {}: {e}", i + 1)))?;
        if record.len() != expected.len() {
            return Err(malformed(format!(
                "row {} has {} columns, expected {}",
                i + 1,
                record.len(),
                expected.len()
            )));
        }
        let code: usize = record[0]
            .parse()
            .map_err(|_| malformed(format!("row {}: bad label {:?}", i + 1, &record[0])))?;
        let label = ConditionLabel::from_code(code)
            .ok_or_else(|| malformed(format!("row {}: label code {code} out of range", i + 1)))?;
        let mut values = [0.0; DIM];
        for (c, v) in values.iter_mut().enumerate() {
            *v = record[c + 2].parse::<f64>().map_err(|_| {
                malformed(format!(
                    "row {}: bad value {:?} in column {}",
                    i + 1,
                    &record[c + 2],
                    expected[c + 2]
                ))
            })?;
        }
        rows.push(FeatureVector {
            values,
            label,
            source_path: record[1].to_string(),
        });
    }
    Ok(FeatureMatrix::new(rows))
}

pub fn read_feature_csv(path: &Path) -> Result<FeatureMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_csv(&text, path)
}
