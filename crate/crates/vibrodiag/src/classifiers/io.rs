//! Versioned plain-text model files.
//!
//! Layout: a header line `vibrodiag-model v1 <kind>` followed by a
//! line-oriented numeric payload. Floats are written with 17 significant
//! digits, so decimal text round-trips bit-faithfully.
//!
//! ```text
//! vibrodiag-model v1 svm          vibrodiag-model v1 knn    vibrodiag-model v1 gnb
//! gamma <g>                       k <k>                     dim <d>
//! dim <d>                         dim <d>                   classes <n>
//! classes <c0> <c1> ...           rows <n>                  class <code> <prior>
//! pairs <n>                       row <label> <d values>    mean <d values>
//! pair <pos> <neg> <nsv> <bias>   ...                       var <d values>
//! sv <alpha_y> <d values>                                   ...
//! ...
//! ```

use std::fs;
use std::path::Path;

use crate::classifiers::{GnbModel, KnnModel, PairwiseSvm, SvmModel, TrainedModel};
use crate::error::{Error, Result};

const MAGIC: &str = "vibrodiag-model";
const VERSION: &str = "v1";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a model in the versioned flat-file format.
pub fn model_to_string(model: &TrainedModel) -> String {
    let mut out = String::new();
    match model {
        TrainedModel::Svm(m) => {
            out.push_str(&format!("{MAGIC} {VERSION} svm\n"));
            out.push_str(&format!("gamma {}\n", fmt(m.gamma)));
            out.push_str(&format!("dim {}\n", m.dim));
            out.push_str("classes");
            for c in &m.classes {
                out.push_str(&format!(" {c}"));
            }
            out.push('\n');
            out.push_str(&format!("pairs {}\n", m.pairs.len()));
            for pair in &m.pairs {
                out.push_str(&format!(
                    "pair {} {} {} {}\n",
                    pair.class_pos,
                    pair.class_neg,
                    pair.support_vectors.len(),
                    fmt(pair.bias)
                ));
                for (sv, ay) in pair.support_vectors.iter().zip(&pair.alpha_y) {
                    out.push_str(&format!("sv {}", fmt(*ay)));
                    for v in sv {
                        out.push_str(&format!(" {}", fmt(*v)));
                    }
                    out.push('\n');
                }
            }
        }
        TrainedModel::Knn(m) => {
            out.push_str(&format!("{MAGIC} {VERSION} knn\n"));
            out.push_str(&format!("k {}\n", m.k));
            out.push_str(&format!("dim {}\n", m.dim()));
            out.push_str(&format!("rows {}\n", m.rows.len()));
            for (row, label) in m.rows.iter().zip(&m.labels) {
                out.push_str(&format!("row {label}"));
                for v in row {
                    out.push_str(&format!(" {}", fmt(*v)));
                }
                out.push('\n');
            }
        }
        TrainedModel::Gnb(m) => {
            out.push_str(&format!("{MAGIC} {VERSION} gnb\n"));
            out.push_str(&format!("dim {}\n", m.dim));
            out.push_str(&format!("classes {}\n", m.classes.len()));
            for (c, &code) in m.classes.iter().enumerate() {
                out.push_str(&format!("class {code} {}\n", fmt(m.priors[c])));
                out.push_str("mean");
                for v in &m.means[c] {
                    out.push_str(&format!(" {}", fmt(*v)));
                }
                out.push('\n');
                out.push_str("var");
                for v in &m.variances[c] {
                    out.push_str(&format!(" {}", fmt(*v)));
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_model(model: &TrainedModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

struct Lines<'a> {
    origin: &'a Path,
    iter: std::str::Lines<'a>,
    lineno: usize,
}

impl<'a> Lines<'a> {
    fn bad(&self, reason: impl std::fmt::Display) -> Error {
        Error::MalformedModel {
            path: self.origin.to_path_buf(),
            reason: format!("line {}: {reason}", self.lineno),
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        self.lineno += 1;
        self.iter
            .next()
            .ok_or_else(|| self.bad("unexpected end of file"))
    }

    /// Next line split on spaces, with the expected tag up front.
    fn tagged(&mut self, tag: &str) -> Result<Vec<&'a str>> {
        let line = self.next_line()?;
        let fields: Vec<&str> = line.split_ascii_whitespace().collect();
        match fields.first() {
            Some(&first) if first == tag => Ok(fields[1..].to_vec()),
            _ => Err(self.bad(format!("expected a `{tag}` line, got {line:?}"))),
        }
    }
}

fn parse_usize(lines: &Lines<'_>, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| lines.bad(format!("bad integer {s:?}")))
}

fn parse_f64(lines: &Lines<'_>, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| lines.bad(format!("bad number {s:?}")))?;
    if v.is_nan() {
        return Err(lines.bad("NaN not allowed in model payload"));
    }
    Ok(v)
}

fn parse_vector(lines: &Lines<'_>, fields: &[&str], dim: usize) -> Result<Vec<f64>> {
    if fields.len() != dim {
        return Err(lines.bad(format!("expected {dim} values, got {}", fields.len())));
    }
    fields.iter().map(|s| parse_f64(lines, s)).collect()
}

// Keeps a hostile header from forcing huge preallocations.
const MAX_DIM: usize = 1 << 16;
const MAX_COUNT: usize = 1 << 24;

/// Parses the model file format. Untrusted-input entry point: returns an
/// error on any deviation, never panics.
pub fn parse_model_str(text: &str, origin: &Path) -> Result<TrainedModel> {
    let mut lines = Lines {
        origin,
        iter: text.lines(),
        lineno: 0,
    };

    let header = lines.next_line()?;
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    if fields.len() != 3 || fields[0] != MAGIC || fields[1] != VERSION {
        return Err(lines.bad(format!(
            "expected header `{MAGIC} {VERSION} <kind>`, got {header:?}"
        )));
    }
    let kind = fields[2];

    let bounded = |lines: &Lines<'_>, v: usize, what: &str, max: usize| -> Result<usize> {
        if v > max {
            Err(lines.bad(format!("{what} {v} exceeds limit {max}")))
        } else {
            Ok(v)
        }
    };

    match kind {
        "svm" => {
            let g = lines.tagged("gamma")?;
            if g.len() != 1 {
                return Err(lines.bad("gamma takes one value"));
            }
            let gamma = parse_f64(&lines, g[0])?;
            let d = lines.tagged("dim")?;
            if d.len() != 1 {
                return Err(lines.bad("dim takes one value"));
            }
            let dim = bounded(&lines, parse_usize(&lines, d[0])?, "dim", MAX_DIM)?;
            let cls = lines.tagged("classes")?;
            let classes: Vec<usize> = cls
                .iter()
                .map(|s| parse_usize(&lines, s))
                .collect::<Result<_>>()?;
            if classes.len() < 2 {
                return Err(lines.bad("svm model needs at least 2 classes"));
            }
            let p = lines.tagged("pairs")?;
            if p.len() != 1 {
                return Err(lines.bad("pairs takes one value"));
            }
            let n_pairs = parse_usize(&lines, p[0])?;
            if n_pairs != classes.len() * (classes.len() - 1) / 2 {
                return Err(lines.bad(format!(
                    "{} classes require {} pairs, file claims {n_pairs}",
                    classes.len(),
                    classes.len() * (classes.len() - 1) / 2
                )));
            }

            let mut pairs = Vec::new();
            for _ in 0..n_pairs {
                let p = lines.tagged("pair")?;
                if p.len() != 4 {
                    return Err(lines.bad("pair takes `pos neg nsv bias`"));
                }
                let class_pos = parse_usize(&lines, p[0])?;
                let class_neg = parse_usize(&lines, p[1])?;
                if class_pos >= class_neg
                    || !classes.contains(&class_pos)
                    || !classes.contains(&class_neg)
                {
                    return Err(lines.bad(format!("bad pair ({class_pos}, {class_neg})")));
                }
                let n_sv = bounded(&lines, parse_usize(&lines, p[2])?, "nsv", MAX_COUNT)?;
                let bias = parse_f64(&lines, p[3])?;
                let mut support_vectors = Vec::new();
                let mut alpha_y = Vec::new();
                for _ in 0..n_sv {
                    let sv = lines.tagged("sv")?;
                    if sv.is_empty() {
                        return Err(lines.bad("sv line is empty"));
                    }
                    alpha_y.push(parse_f64(&lines, sv[0])?);
                    support_vectors.push(parse_vector(&lines, &sv[1..], dim)?);
                }
                pairs.push(PairwiseSvm {
                    class_pos,
                    class_neg,
                    support_vectors,
                    alpha_y,
                    bias,
                });
            }
            Ok(TrainedModel::Svm(SvmModel {
                gamma,
                dim,
                classes,
                pairs,
                convergence_warnings: 0,
            }))
        }
        "knn" => {
            let kf = lines.tagged("k")?;
            if kf.len() != 1 {
                return Err(lines.bad("k takes one value"));
            }
            let k = parse_usize(&lines, kf[0])?;
            let d = lines.tagged("dim")?;
            if d.len() != 1 {
                return Err(lines.bad("dim takes one value"));
            }
            let dim = bounded(&lines, parse_usize(&lines, d[0])?, "dim", MAX_DIM)?;
            let r = lines.tagged("rows")?;
            if r.len() != 1 {
                return Err(lines.bad("rows takes one value"));
            }
            let n_rows = bounded(&lines, parse_usize(&lines, r[0])?, "rows", MAX_COUNT)?;
            if k == 0 || k > n_rows {
                return Err(lines.bad(format!("k = {k} out of range for {n_rows} rows")));
            }
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            for _ in 0..n_rows {
                let row = lines.tagged("row")?;
                if row.is_empty() {
                    return Err(lines.bad("row line is empty"));
                }
                labels.push(parse_usize(&lines, row[0])?);
                rows.push(parse_vector(&lines, &row[1..], dim)?);
            }
            Ok(TrainedModel::Knn(KnnModel { k, rows, labels }))
        }
        "gnb" => {
            let d = lines.tagged("dim")?;
            if d.len() != 1 {
                return Err(lines.bad("dim takes one value"));
            }
            let dim = bounded(&lines, parse_usize(&lines, d[0])?, "dim", MAX_DIM)?;
            let c = lines.tagged("classes")?;
            if c.len() != 1 {
                return Err(lines.bad("classes takes one value"));
            }
            let n_classes = bounded(&lines, parse_usize(&lines, c[0])?, "classes", MAX_DIM)?;
            if n_classes < 2 {
                return Err(lines.bad("gnb model needs at least 2 classes"));
            }
            let mut classes = Vec::new();
            let mut priors = Vec::new();
            let mut means = Vec::new();
            let mut variances = Vec::new();
            for _ in 0..n_classes {
                let cl = lines.tagged("class")?;
                if cl.len() != 2 {
                    return Err(lines.bad("class takes `code prior`"));
                }
                classes.push(parse_usize(&lines, cl[0])?);
                let prior = parse_f64(&lines, cl[1])?;
                if !(prior >= 0.0 && prior <= 1.0) {
                    return Err(lines.bad(format!("prior {prior} outside [0, 1]")));
                }
                priors.push(prior);
                let mean = lines.tagged("mean")?;
                means.push(parse_vector(&lines, &mean, dim)?);
                let var = lines.tagged("var")?;
                let var = parse_vector(&lines, &var, dim)?;
                if var.iter().any(|&v| v <= 0.0) {
                    return Err(lines.bad("variances must be strictly positive"));
                }
                variances.push(var);
            }
            Ok(TrainedModel::Gnb(GnbModel {
                dim,
                classes,
                priors,
                means,
                variances,
            }))
        }
        other => Err(lines.bad(format!("unknown model kind {other:?}"))),
    }
}

pub fn read_model(path: &Path) -> Result<TrainedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, ClassifierSpec, GammaSpec};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sample_data() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for class in 0..3usize {
            for _ in 0..8 {
                x.push(vec![
                    class as f64 * 3.0 + rng.gen_range(-0.3..0.3),
                    class as f64 * -2.0 + rng.gen_range(-0.3..0.3),
                    rng.gen_range(-1.0..1.0),
                ]);
                y.push(class);
            }
        }
        (x, y)
    }

    #[test]
    fn round_trip_is_bit_faithful_for_all_kinds() {
        let (x, y) = sample_data();
        for spec in [
            ClassifierSpec::Svm {
                c: 4.0,
                gamma: GammaSpec::Auto,
            },
            ClassifierSpec::Knn { k: 3 },
            ClassifierSpec::Gnb { smoothing: 1e-7 },
        ] {
            let model = fit(&spec, &x, &y).unwrap();
            let text = model_to_string(&model);
            let parsed = parse_model_str(&text, Path::new("m.txt")).unwrap();
            match (&model, &parsed) {
                (TrainedModel::Svm(a), TrainedModel::Svm(b)) => {
                    assert_eq!(a.gamma.to_bits(), b.gamma.to_bits());
                    assert_eq!(a.classes, b.classes);
                    assert_eq!(a.pairs.len(), b.pairs.len());
                    for (pa, pb) in a.pairs.iter().zip(&b.pairs) {
                        assert_eq!(pa.bias.to_bits(), pb.bias.to_bits());
                        assert_eq!(pa.alpha_y.len(), pb.alpha_y.len());
                        for (va, vb) in pa.alpha_y.iter().zip(&pb.alpha_y) {
                            assert_eq!(va.to_bits(), vb.to_bits());
                        }
                        for (sa, sb) in pa.support_vectors.iter().zip(&pb.support_vectors) {
                            for (va, vb) in sa.iter().zip(sb) {
                                assert_eq!(va.to_bits(), vb.to_bits());
                            }
                        }
                    }
                }
                (TrainedModel::Knn(a), TrainedModel::Knn(b)) => {
                    assert_eq!(a.k, b.k);
                    assert_eq!(a.labels, b.labels);
                    for (ra, rb) in a.rows.iter().zip(&b.rows) {
                        for (va, vb) in ra.iter().zip(rb) {
                            assert_eq!(va.to_bits(), vb.to_bits());
                        }
                    }
                }
                (TrainedModel::Gnb(a), TrainedModel::Gnb(b)) => {
                    assert_eq!(a.classes, b.classes);
                    for (pa, pb) in a.priors.iter().zip(&b.priors) {
                        assert_eq!(pa.to_bits(), pb.to_bits());
                    }
                    for (ma, mb) in a.means.iter().zip(&b.means) {
                        for (va, vb) in ma.iter().zip(mb) {
                            assert_eq!(va.to_bits(), vb.to_bits());
                        }
                    }
                    for (va_, vb_) in a.variances.iter().zip(&b.variances) {
                        for (va, vb) in va_.iter().zip(vb_) {
                            assert_eq!(va.to_bits(), vb.to_bits());
                        }
                    }
                }
                _ => panic!("model kind changed across round trip"),
            }
            // Round-tripped model must predict identically.
            assert_eq!(model.predict(&x).unwrap(), parsed.predict(&x).unwrap());
        }
    }

    #[test]
    fn rejects_corrupt_files() {
        for text in [
            "",
            "not a model",
            "vibrodiag-model v2 svm\n",
            "vibrodiag-model v1 tree\n",
            "vibrodiag-model v1 knn\nk 1\ndim 2\nrows 1\n",
            "vibrodiag-model v1 knn\nk 5\ndim 2\nrows 1\nrow 0 1.0 2.0\n",
            "vibrodiag-model v1 knn\nk 1\ndim 2\nrows 1\nrow 0 1.0\n",
            "vibrodiag-model v1 gnb\ndim 1\nclasses 2\nclass 0 0.5\nmean 0.0\nvar -1.0\nclass 1 0.5\nmean 1.0\nvar 1.0\n",
            "vibrodiag-model v1 svm\ngamma 0.5\ndim 808464432\nclasses 0 1\npairs 1\n",
        ] {
            assert!(
                parse_model_str(text, Path::new("m.txt")).is_err(),
                "accepted corrupt input {text:?}"
            );
        }
    }

    #[test]
    fn huge_claimed_dim_is_rejected() {
        let text = format!(
            "vibrodiag-model v1 knn\nk 1\ndim {}\nrows 1\nrow 0 1.0\n",
            usize::MAX
        );
        let err = parse_model_str(&text, Path::new("m.txt")).unwrap_err();
        assert_eq!(err.name(), "MalformedModel");
    }
}
