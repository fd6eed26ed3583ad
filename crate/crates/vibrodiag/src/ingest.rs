//! Discovery, parsing, and labeling of raw vibration records.
//!
//! A dataset is a directory tree with one subdirectory per machine
//! condition, each holding CSV files of the form
//!
//! ```text
//! Time,X,Y,Z
//! 0.004516,-0.102961,0.030537,0.114270
//! ...
//! ```
//!
//! Time is in seconds and strictly increasing; X/Y/Z are accelerations in
//! g. Rows with unparseable or non-finite cells are kept but marked
//! missing, and filtered later in the pipeline rather than failing the
//! file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Nominal recording rate of the supported dataset, in Hz.
pub const NOMINAL_SAMPLE_RATE_HZ: f64 = 20_000.0;
/// Nominal record duration of the supported dataset, in seconds.
pub const NOMINAL_DURATION_S: f64 = 5.0;

/// The four machine conditions, with fixed integer codes 0–3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionLabel {
    Normal = 0,
    Misalignment = 1,
    Unbalance = 2,
    BearingFault = 3,
}

impl ConditionLabel {
    pub const ALL: [ConditionLabel; 4] = [
        ConditionLabel::Normal,
        ConditionLabel::Misalignment,
        ConditionLabel::Unbalance,
        ConditionLabel::BearingFault,
    ];

    pub const COUNT: usize = 4;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<ConditionLabel> {
        ConditionLabel::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ConditionLabel::Normal => "normal",
            ConditionLabel::Misalignment => "misalignment",
            ConditionLabel::Unbalance => "unbalance",
            ConditionLabel::BearingFault => "bearing",
        }
    }
}

impl fmt::Display for ConditionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConditionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(ConditionLabel::Normal),
            "misalignment" => Ok(ConditionLabel::Misalignment),
            "unbalance" => Ok(ConditionLabel::Unbalance),
            "bearing" | "bearing_fault" | "bearingfault" => Ok(ConditionLabel::BearingFault),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// One triaxial sample. `missing` is set when any cell of the source row
/// failed to parse or was non-finite; such samples never reach the
/// transform stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSample {
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub missing: bool,
}

impl AxisSample {
    pub fn new(time: f64, x: f64, y: f64, z: f64) -> AxisSample {
        let missing =
            !(time.is_finite() && x.is_finite() && y.is_finite() && z.is_finite());
        AxisSample {
            time,
            x,
            y,
            z,
            missing,
        }
    }
}

/// One labeled vibration record: an ordered triaxial time series plus the
/// sample rate derived from its time column.
#[derive(Debug, Clone)]
pub struct VibrationRecord {
    pub samples: Vec<AxisSample>,
    pub label: ConditionLabel,
    pub source_path: String,
    pub sample_rate_hz: f64,
}

impl VibrationRecord {
    /// Builds a record, deriving the sample rate as `(n_t - 1) / (t_last -
    /// t_first)` over the rows with a finite time cell. Fails if fewer
    /// than 2 rows are fully usable or if time is not strictly increasing.
    pub fn new(
        samples: Vec<AxisSample>,
        label: ConditionLabel,
        source_path: impl Into<String>,
    ) -> Result<VibrationRecord> {
        let source_path = source_path.into();
        let path = PathBuf::from(&source_path);

        let mut prev_time: Option<f64> = None;
        for (i, s) in samples.iter().enumerate() {
            if !s.time.is_finite() {
                continue;
            }
            if s.time < 0.0 {
                return Err(Error::MalformedCsv {
                    path,
                    reason: format!("negative time {} at data row {}", s.time, i + 1),
                });
            }
            if let Some(prev) = prev_time {
                if s.time <= prev {
                    return Err(Error::MalformedCsv {
                        path,
                        reason: format!(
                            "time not strictly increasing at data row {} ({} after {})",
                            i + 1,
                            s.time,
                            prev
                        ),
                    });
                }
            }
            prev_time = Some(s.time);
        }

        if samples.iter().filter(|s| !s.missing).count() < 2 {
            return Err(Error::TooShort(path));
        }

        let timed: Vec<f64> = samples
            .iter()
            .filter(|s| s.time.is_finite())
            .map(|s| s.time)
            .collect();
        let span = timed[timed.len() - 1] - timed[0];
        let sample_rate_hz = (timed.len() - 1) as f64 / span;

        Ok(VibrationRecord {
            samples,
            label,
            source_path,
            sample_rate_hz,
        })
    }

    pub fn duration_s(&self) -> f64 {
        let mut times = self.samples.iter().filter(|s| s.time.is_finite());
        match (times.next(), times.last()) {
            (Some(first), Some(last)) => last.time - first.time,
            _ => 0.0,
        }
    }

    pub fn missing_count(&self) -> usize {
        self.samples.iter().filter(|s| s.missing).count()
    }

    /// True when the record deviates more than 5% from the dataset's
    /// nominal 20 kHz / 5 s recording convention. Advisory only:
    /// synthetic records may legitimately use any rate.
    pub fn off_nominal(&self) -> bool {
        let rate_dev = (self.sample_rate_hz - NOMINAL_SAMPLE_RATE_HZ).abs()
            / NOMINAL_SAMPLE_RATE_HZ;
        let dur_dev = (self.duration_s() - NOMINAL_DURATION_S).abs() / NOMINAL_DURATION_S;
        rate_dev > 0.05 || dur_dev > 0.05
    }
}

/// Maps each condition label to the directory names holding its records.
/// Several directories may feed one label (the dataset stores the two
/// unbalance severities separately but they form a single class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    dirs: BTreeMap<ConditionLabel, Vec<String>>,
}

impl Default for Manifest {
    fn default() -> Manifest {
        let mut dirs = BTreeMap::new();
        for label in ConditionLabel::ALL {
            dirs.insert(label, vec![label.name().to_string()]);
        }
        Manifest { dirs }
    }
}

impl Manifest {
    /// Parses `label = dir[,dir...]` lines. Blank lines and `#` comments
    /// are ignored. Labels not mentioned keep their default directory.
    pub fn parse(text: &str) -> Result<Manifest> {
        let mut manifest = Manifest::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::MalformedManifest(format!(
                    "line {}: expected `label = dir[,dir...]`",
                    lineno + 1
                ))
            })?;
            let label: ConditionLabel = key.parse()?;
            let dirs: Vec<String> = value
                .split(',')
                .map(|d| d.trim().to_string())
                .filter(|d| !d.is_empty())
                .collect();
            if dirs.is_empty() {
                return Err(Error::MalformedManifest(format!(
                    "line {}: no directory given for {}",
                    lineno + 1,
                    label
                )));
            }
            manifest.dirs.insert(label, dirs);
        }
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Manifest::parse(&text)
    }

    pub fn dirs_for(&self, label: ConditionLabel) -> &[String] {
        &self.dirs[&label]
    }
}

/// Lists every record file under `root_dir`, labeled by its condition
/// directory, sorted lexicographically by path. The listing is a pure
/// function of the directory contents.
pub fn scan_dataset(
    root_dir: &Path,
    manifest: &Manifest,
) -> Result<Vec<(PathBuf, ConditionLabel)>> {
    let mut entries: Vec<(PathBuf, ConditionLabel)> = Vec::new();
    for label in ConditionLabel::ALL {
        for dir_name in manifest.dirs_for(label) {
            let dir = root_dir.join(dir_name);
            if !dir.is_dir() {
                return Err(Error::MissingConditionDir(
                    dir_name.clone(),
                    root_dir.to_path_buf(),
                ));
            }
            let mut dir_files = 0usize;
            for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
                let entry = entry.map_err(|e| Error::io(&dir, e))?;
                let path = entry.path();
                if path.is_file() {
                    entries.push((path, label));
                    dir_files += 1;
                }
            }
            if dir_files == 0 {
                return Err(Error::EmptyConditionDir(dir));
            }
        }
    }
    entries.sort_by(|a, b| a.0.as_os_str().cmp(b.0.as_os_str()));
    Ok(entries)
}

/// Parses one record file. Structural problems (missing header, wrong
/// column count) are errors; bad cell values only mark their row missing.
pub fn parse_record(file_path: &Path, label: ConditionLabel) -> Result<VibrationRecord> {
    let text = fs::read_to_string(file_path).map_err(|e| Error::io(file_path, e))?;
    parse_record_str(&text, label, file_path)
}

/// CSV-text form of [`parse_record`]; `origin` is only used in error
/// messages. This is the untrusted-input entry point the fuzz targets
/// drive.
pub fn parse_record_str(
    text: &str,
    label: ConditionLabel,
    origin: &Path,
) -> Result<VibrationRecord> {
    let malformed = |reason: String| Error::MalformedCsv {
        path: origin.to_path_buf(),
        reason,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| malformed(format!("unreadable header: {e}")))?
        .clone();
    if headers.len() != 4 {
        return Err(malformed(format!(
            "expected 4 header columns Time,X,Y,Z, found {}",
            headers.len()
        )));
    }
    for (got, want) in headers.iter().zip(["time", "x", "y", "z"]) {
        if !got.eq_ignore_ascii_case(want) {
            return Err(malformed(format!(
                "expected header column {want:?}, found {got:?}"
            )));
        }
    }

    let mut samples = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| malformed(format!("data row {}: {e}", i + 1)))?;
        if row.len() != 4 {
            return Err(malformed(format!(
                "data row {} has {} columns, expected 4",
                i + 1,
                row.len()
            )));
        }
        let cell = |idx: usize| row[idx].parse::<f64>().unwrap_or(f64::NAN);
        samples.push(AxisSample::new(cell(0), cell(1), cell(2), cell(3)));
    }

    if samples.is_empty() {
        return Err(Error::TooShort(origin.to_path_buf()));
    }
    VibrationRecord::new(samples, label, origin.to_string_lossy().into_owned())
}

/// Renders a record back to the CSV format `parse_record` accepts.
/// Finite values round-trip exactly (shortest-representation formatting);
/// non-finite cells are written as `NaN`.
pub fn serialize_record(record: &VibrationRecord) -> String {
    let mut out = String::with_capacity(record.samples.len() * 32 + 16);
    out.push_str("Time,X,Y,Z\n");
    for s in &record.samples {
        let cell = |v: f64| {
            if v.is_finite() {
                v.to_string()
            } else {
                "NaN".to_string()
            }
        };
        out.push_str(&cell(s.time));
        out.push(',');
        out.push_str(&cell(s.x));
        out.push(',');
        out.push_str(&cell(s.y));
        out.push(',');
        out.push_str(&cell(s.z));
        out.push('\n');
    }
    out
}

/// Writes a record as CSV at `path`.
pub fn write_record(record: &VibrationRecord, path: &Path) -> Result<()> {
    fs::write(path, serialize_record(record)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmpdir() -> tempfile::TempDir {
        tempfile::tempdir().expect("tempdir")
    }

    // First five data rows of the dataset's documented excerpt.
    const EXCERPT: &str = "Time,X,Y,Z\n\
        0.004516,-0.102961,0.030537,0.114270\n\
        0.004566,-0.118802,-0.020894,0.123060\n\
        0.004616,-0.110881,-0.046609,0.114270\n\
        0.004666,-0.102961,-0.053038,0.105480\n\
        0.004716,-0.087121,-0.059466,0.096690\n";

    #[test]
    fn parses_dataset_excerpt() {
        let rec =
            parse_record_str(EXCERPT, ConditionLabel::Normal, Path::new("excerpt.csv"))
                .unwrap();
        assert_eq!(rec.samples.len(), 5);
        let first = rec.samples[0];
        assert_eq!(first.time, 0.004516);
        assert_eq!(first.x, -0.102961);
        assert_eq!(first.y, 0.030537);
        assert_eq!(first.z, 0.114270);
        assert!(!first.missing);
        // 50 us steps -> 20 kHz
        assert!((rec.sample_rate_hz - 20_000.0).abs() / 20_000.0 < 0.05);
    }

    #[test]
    fn header_is_case_insensitive() {
        let text = "time,x,Y,z\n0.0,1.0,2.0,3.0\n0.1,1.0,2.0,3.0\n";
        let rec =
            parse_record_str(text, ConditionLabel::Normal, Path::new("t.csv")).unwrap();
        assert_eq!(rec.samples.len(), 2);
    }

    #[test]
    fn single_data_row_is_too_short() {
        let text = "Time,X,Y,Z\n0.0,1.0,2.0,3.0\n";
        let err = parse_record_str(text, ConditionLabel::Normal, Path::new("t.csv"))
            .unwrap_err();
        assert_eq!(err.name(), "TooShort");
    }

    #[test]
    fn bad_cells_mark_rows_missing_not_fatal() {
        let text = "Time,X,Y,Z\n\
            0.00,0.1,0.2,0.3\n\
            0.01,oops,0.2,0.3\n\
            0.02,0.1,NaN,0.3\n\
            0.03,0.1,0.2,0.3\n";
        let rec =
            parse_record_str(text, ConditionLabel::Normal, Path::new("t.csv")).unwrap();
        assert_eq!(rec.samples.len(), 4);
        assert_eq!(rec.missing_count(), 2);
        assert!(rec.samples[1].missing);
        assert!(rec.samples[2].missing);
    }

    #[test]
    fn wrong_column_count_is_malformed() {
        let text = "Time,X,Y,Z\n0.0,1.0,2.0\n0.1,1.0,2.0,3.0\n";
        let err = parse_record_str(text, ConditionLabel::Normal, Path::new("t.csv"))
            .unwrap_err();
        assert_eq!(err.name(), "MalformedCsv");
    }

    #[test]
    fn missing_header_is_malformed() {
        let err = parse_record_str("", ConditionLabel::Normal, Path::new("t.csv"))
            .unwrap_err();
        assert_eq!(err.name(), "MalformedCsv");
        let err = parse_record_str(
            "0.0,1.0,2.0,3.0\n0.1,1.0,2.0,3.0\n",
            ConditionLabel::Normal,
            Path::new("t.csv"),
        )
        .unwrap_err();
        assert_eq!(err.name(), "MalformedCsv");
    }

    #[test]
    fn non_increasing_time_is_malformed() {
        let text = "Time,X,Y,Z\n0.0,1.0,2.0,3.0\n0.0,1.0,2.0,3.0\n";
        let err = parse_record_str(text, ConditionLabel::Normal, Path::new("t.csv"))
            .unwrap_err();
        assert_eq!(err.name(), "MalformedCsv");
    }

    #[test]
    fn rate_derived_from_time_column() {
        // 100k rows at 50 us steps, as a full-length record would have.
        let mut text = String::from("Time,X,Y,Z\n");
        for i in 0..100_000u32 {
            text.push_str(&format!("{},0.0,0.0,0.0\n", i as f64 * 0.00005));
        }
        let rec =
            parse_record_str(&text, ConditionLabel::Normal, Path::new("t.csv")).unwrap();
        assert!((rec.sample_rate_hz - 20_000.0).abs() / 20_000.0 < 0.05);
        assert!(!rec.off_nominal());
    }

    #[test]
    fn scan_finds_and_sorts_all_files() {
        let dir = tmpdir();
        let root = dir.path();
        let mut expected = Vec::new();
        for label in ConditionLabel::ALL {
            let sub = root.join(label.name());
            fs::create_dir(&sub).unwrap();
            for i in 0..3 {
                let p = sub.join(format!("rec{i}.csv"));
                fs::write(&p, EXCERPT).unwrap();
                expected.push((p, label));
            }
        }
        // Independent ordering oracle: sort the expectation list the same
        // way the contract states (lexicographic by path).
        expected.sort_by(|a, b| a.0.as_os_str().cmp(b.0.as_os_str()));

        let listing = scan_dataset(root, &Manifest::default()).unwrap();
        assert_eq!(listing.len(), 12);
        assert_eq!(listing, expected);

        // Pure function of directory contents.
        let again = scan_dataset(root, &Manifest::default()).unwrap();
        assert_eq!(listing, again);
    }

    #[test]
    fn scan_missing_dir_errors() {
        let dir = tmpdir();
        for name in ["normal", "misalignment", "unbalance"] {
            fs::create_dir(dir.path().join(name)).unwrap();
        }
        let err = scan_dataset(dir.path(), &Manifest::default()).unwrap_err();
        assert_eq!(err.name(), "MissingConditionDir");
    }

    #[test]
    fn scan_empty_dir_errors() {
        let dir = tmpdir();
        for label in ConditionLabel::ALL {
            fs::create_dir(dir.path().join(label.name())).unwrap();
        }
        for label in &ConditionLabel::ALL[1..] {
            fs::write(dir.path().join(label.name()).join("r.csv"), EXCERPT).unwrap();
        }
        let err = scan_dataset(dir.path(), &Manifest::default()).unwrap_err();
        assert_eq!(err.name(), "EmptyConditionDir");
    }

    #[test]
    fn manifest_merges_split_unbalance_dirs() {
        let dir = tmpdir();
        let root = dir.path();
        let manifest = Manifest::parse(
            "# VBL layout with split unbalance severities\n\
             unbalance = unbalance_6g, unbalance_27g\n",
        )
        .unwrap();
        for name in ["normal", "misalignment", "unbalance_6g", "unbalance_27g", "bearing"] {
            let sub = root.join(name);
            fs::create_dir(&sub).unwrap();
            fs::write(sub.join("r.csv"), EXCERPT).unwrap();
        }
        let listing = scan_dataset(root, &manifest).unwrap();
        assert_eq!(listing.len(), 5);
        let unbalance = listing
            .iter()
            .filter(|(_, l)| *l == ConditionLabel::Unbalance)
            .count();
        assert_eq!(unbalance, 2);
    }

    #[test]
    fn manifest_rejects_garbage() {
        assert_eq!(
            Manifest::parse("normal missing-equals\n").unwrap_err().name(),
            "MalformedManifest"
        );
        assert_eq!(
            Manifest::parse("sideways = dir\n").unwrap_err().name(),
            "UnknownLabel"
        );
        assert_eq!(
            Manifest::parse("normal =\n").unwrap_err().name(),
            "MalformedManifest"
        );
    }

    #[test]
    fn label_codes_are_fixed() {
        assert_eq!(ConditionLabel::Normal.code(), 0);
        assert_eq!(ConditionLabel::Misalignment.code(), 1);
        assert_eq!(ConditionLabel::Unbalance.code(), 2);
        assert_eq!(ConditionLabel::BearingFault.code(), 3);
        for label in ConditionLabel::ALL {
            assert_eq!(ConditionLabel::from_code(label.code()), Some(label));
            assert_eq!(label.name().parse::<ConditionLabel>().unwrap(), label);
        }
        assert_eq!(ConditionLabel::from_code(4), None);
    }

    proptest! {
        // serialize -> parse is the identity on finite-valued records.
        #[test]
        fn roundtrip_identity(
            rows in prop::collection::vec((any::<f64>(), any::<f64>(), any::<f64>()), 2..40)
        ) {
            let samples: Vec<AxisSample> = rows
                .iter()
                .enumerate()
                .map(|(i, &(x, y, z))| {
                    let clamp = |v: f64| if v.is_finite() { v } else { 0.0 };
                    AxisSample::new(i as f64 * 0.00005, clamp(x), clamp(y), clamp(z))
                })
                .collect();
            let rec = VibrationRecord::new(samples, ConditionLabel::Unbalance, "mem.csv")
                .unwrap();
            let parsed = parse_record_str(
                &serialize_record(&rec),
                rec.label,
                Path::new("mem.csv"),
            )
            .unwrap();
            prop_assert_eq!(parsed.samples.len(), rec.samples.len());
            for (a, b) in parsed.samples.iter().zip(&rec.samples) {
                prop_assert_eq!(a.time, b.time);
                prop_assert_eq!(a.x, b.x);
                prop_assert_eq!(a.y, b.y);
                prop_assert_eq!(a.z, b.z);
            }
        }
    }
}
