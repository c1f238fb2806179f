//! CSV and JSON file formats.
//!
//! * Scores: `sample_id,score_<class>,...`, one row per sample.
//! * Evidence: `sample_id,mass_<class>,...,mass_ignorance`.
//! * Confusion: `n_c` rows of `n_c` counts, predicted class per row and true
//!   class per column; an optional header row is skipped.
//! * Dataset: feature columns, then a final `label` column. Class names map
//!   to indices in order of first appearance.
//! * Fused output: `sample_id,mass_<class>,...,mass_ignorance,predicted`.

use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::Path;

use dsfusion_core::boe::{BodyOfEvidence, ConfusionMatrix, ScoreMatrix};
use dsfusion_core::{FocalSet, Frame, FusionResult, MassFunction};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::harness::ExperimentReport;

const SCORE_PREFIX: &str = "score_";
const MASS_PREFIX: &str = "mass_";
const IGNORANCE_COLUMN: &str = "mass_ignorance";
const LABEL_COLUMN: &str = "label";

/// A score or evidence file: sample ids with one value row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub sample_ids: Vec<String>,
    pub scores: ScoreMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceFile {
    pub sample_ids: Vec<String>,
    pub boe: BodyOfEvidence,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn open(path: &Path, trim: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let trim = if trim { csv::Trim::All } else { csv::Trim::None };
    Ok(csv::ReaderBuilder::new().trim(trim).from_reader(file))
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn parse_error(path: &Path, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: display(path),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

/// 1-based line of a record in its file.
fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn parse_f64(path: &Path, record: &csv::StringRecord, headers: &csv::StringRecord, col: usize) -> Result<f64> {
    let raw = record.get(col).unwrap_or("");
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_error(path, line_of(record), &headers[col], format!("expected a number, found {raw:?}")))
}

/// Reads every record, checking each has as many fields as the header.
fn records(path: &Path, reader: &mut csv::Reader<File>) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let headers = reader.headers()?.clone();
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => parse_error(
                path,
                pos.as_ref().map_or(0, |p| p.line() as usize),
                "*",
                format!("expected {expected_len} fields, found {len}"),
            ),
            _ => Error::Csv(e),
        })?;
        out.push(rec);
    }
    Ok((headers, out))
}

/// Class names from prefixed headers after the `sample_id` column.
fn class_columns<'h>(path: &Path, headers: &'h csv::StringRecord, prefix: &str) -> Result<Vec<&'h str>> {
    if headers.get(0) != Some("sample_id") {
        return Err(parse_error(path, 1, headers.get(0).unwrap_or(""), "first column must be sample_id"));
    }
    headers
        .iter()
        .skip(1)
        .map(|h| {
            h.strip_prefix(prefix)
                .filter(|c| !c.is_empty())
                .ok_or_else(|| parse_error(path, 1, h, format!("expected a {prefix}<class> column")))
        })
        .collect()
}

/// The classifier id is the file stem.
pub fn read_scores(path: &Path) -> Result<ScoreFile> {
    let mut reader = open(path, true)?;
    let (headers, recs) = records(path, &mut reader)?;
    let classes: Vec<String> = class_columns(path, &headers, SCORE_PREFIX)?
        .into_iter()
        .map(String::from)
        .collect();
    if classes.is_empty() {
        return Err(parse_error(path, 1, "*", "no score columns"));
    }
    let mut ids = Vec::with_capacity(recs.len());
    let mut rows = Vec::with_capacity(recs.len());
    for rec in &recs {
        ids.push(rec[0].to_string());
        let row = (1..headers.len())
            .map(|c| {
                let v = parse_f64(path, rec, &headers, c)?;
                if v < 0.0 {
                    return Err(parse_error(path, line_of(rec), &headers[c], format!("negative score {v}")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let id = path.file_stem().map_or_else(|| display(path), |s| s.to_string_lossy().into_owned());
    Ok(ScoreFile {
        sample_ids: ids,
        scores: ScoreMatrix::new(id, classes, rows)?,
    })
}

pub fn write_scores(path: &Path, sample_ids: &[String], scores: &ScoreMatrix) -> Result<()> {
    check_ids(sample_ids, scores.n_samples())?;
    let mut w = create(path)?;
    let mut header = vec!["sample_id".to_string()];
    header.extend(scores.classes().iter().map(|c| format!("{SCORE_PREFIX}{c}")));
    w.write_record(&header)?;
    for (id, row) in sample_ids.iter().zip(scores.rows()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn check_ids(ids: &[String], n: usize) -> Result<()> {
    if ids.len() != n {
        return Err(Error::Shape(format!("{} sample ids for {n} rows", ids.len())));
    }
    Ok(())
}

/// Singleton masses plus ignorance, one mass function per row.
pub fn read_evidence(path: &Path) -> Result<EvidenceFile> {
    let mut reader = open(path, true)?;
    let (headers, recs) = records(path, &mut reader)?;
    let n = headers.len();
    if n < 3 || &headers[n - 1] != IGNORANCE_COLUMN {
        return Err(parse_error(
            path,
            1,
            headers.get(n.saturating_sub(1)).unwrap_or(""),
            format!("last column must be {IGNORANCE_COLUMN}"),
        ));
    }
    let mut trimmed = headers.clone();
    trimmed.truncate(n - 1);
    let classes = class_columns(path, &trimmed, MASS_PREFIX)?;
    let frame = Frame::new(classes.iter().map(|c| c.to_string()))?;
    let mut ids = Vec::with_capacity(recs.len());
    let mut masses = Vec::with_capacity(recs.len());
    for rec in &recs {
        ids.push(rec[0].to_string());
        let values = (1..n)
            .map(|c| parse_f64(path, rec, &headers, c))
            .collect::<Result<Vec<f64>>>()?;
        let m = MassFunction::from_singletons(frame.clone(), &values[..n - 2], values[n - 2])
            .map_err(|e| parse_error(path, line_of(rec), "*", e.to_string()))?;
        masses.push(m);
    }
    let id = path.file_stem().map_or_else(|| display(path), |s| s.to_string_lossy().into_owned());
    Ok(EvidenceFile {
        sample_ids: ids,
        boe: BodyOfEvidence::new(id, frame, masses)?,
    })
}

fn mass_header(frame: &Frame) -> Vec<String> {
    let mut h = vec!["sample_id".to_string()];
    h.extend(frame.labels().iter().map(|c| format!("{MASS_PREFIX}{c}")));
    h.push(IGNORANCE_COLUMN.to_string());
    h
}

fn mass_row(m: &MassFunction) -> Vec<String> {
    let mut row: Vec<String> = m.singleton_masses().iter().map(f64::to_string).collect();
    row.push(m.ignorance().to_string());
    row
}

pub fn write_evidence(path: &Path, sample_ids: &[String], boe: &BodyOfEvidence) -> Result<()> {
    check_ids(sample_ids, boe.n_samples())?;
    if let Some(m) = boe.per_sample.iter().find(|m| {
        m.focal_sets()
            .any(|(s, _)| !(s.is_singleton() || s == boe.frame.full()))
    }) {
        return Err(Error::Shape(format!(
            "evidence files hold singletons and ignorance only, found {}",
            m.frame().describe(m.focal_sets().map(|(s, _)| s).find(|s| !s.is_singleton()).unwrap_or(FocalSet::EMPTY))
        )));
    }
    let mut w = create(path)?;
    w.write_record(mass_header(&boe.frame))?;
    for (id, m) in sample_ids.iter().zip(&boe.per_sample) {
        let mut rec = vec![id.clone()];
        rec.extend(mass_row(m));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Accepts an optional header: a first row that is not all integers.
pub fn read_confusion(path: &Path) -> Result<ConfusionMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: Vec<std::result::Result<u64, _>> = rec.iter().map(str::parse::<u64>).collect();
        if i == 0 && parsed.iter().any(|p| p.is_err()) && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let row = parsed
            .into_iter()
            .enumerate()
            .map(|(c, p)| {
                p.map_err(|_| {
                    parse_error(path, line_of(&rec), &(c + 1).to_string(), format!("expected a count, found {:?}", &rec[c]))
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    Ok(ConfusionMatrix::new(rows)?)
}

pub fn write_confusion(path: &Path, cm: &ConfusionMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    for row in cm.rows() {
        w.write_record(row.iter().map(u64::to_string))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut reader = open(path, true)?;
    let (headers, recs) = records(path, &mut reader)?;
    let n = headers.len();
    if n < 2 || &headers[n - 1] != LABEL_COLUMN {
        return Err(parse_error(path, 1, headers.get(n.saturating_sub(1)).unwrap_or(""), "last column must be label"));
    }
    let mut classes: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(recs.len());
    let mut labels = Vec::with_capacity(recs.len());
    for rec in &recs {
        rows.push(
            (0..n - 1)
                .map(|c| parse_f64(path, rec, &headers, c))
                .collect::<Result<Vec<f64>>>()?,
        );
        let name = &rec[n - 1];
        if name.is_empty() {
            return Err(parse_error(path, line_of(rec), LABEL_COLUMN, "empty label"));
        }
        let idx = classes.iter().position(|c| c == name).unwrap_or_else(|| {
            classes.push(name.to_string());
            classes.len() - 1
        });
        labels.push(idx);
    }
    let name = path.file_stem().map_or_else(|| display(path), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, classes, rows, labels)
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = create(path)?;
    let mut header: Vec<String> = (0..ds.n_features()).map(|j| format!("f{j}")).collect();
    header.push(LABEL_COLUMN.to_string());
    w.write_record(&header)?;
    for (row, &l) in ds.rows().zip(ds.labels()) {
        let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
        rec.push(ds.classes()[l].clone());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_fused(path: &Path, sample_ids: &[String], result: &FusionResult) -> Result<()> {
    check_ids(sample_ids, result.samples.len())?;
    let mut w = create(path)?;
    let mut header = mass_header(&result.frame);
    header.push("predicted".into());
    w.write_record(&header)?;
    for (id, s) in sample_ids.iter().zip(&result.samples) {
        let mut rec = vec![id.clone()];
        rec.extend(mass_row(&s.fused));
        rec.push(result.frame.labels()[s.predicted].clone());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per (sample, classifier) with every intermediate of the fusion.
/// Single-evidence samples have no diagnostics and are skipped.
pub fn write_diagnostics(
    path: &Path,
    sample_ids: &[String],
    classifier_ids: &[String],
    result: &FusionResult,
) -> Result<()> {
    check_ids(sample_ids, result.samples.len())?;
    let frame = &result.frame;
    let mut w = create(path)?;
    let mut header: Vec<String> = [
        "sample_id",
        "classifier",
        "average_bjs",
        "scatter",
        "scatter_without",
        "disagreement",
        "support",
        "support_norm",
        "deng_entropy",
        "credibility",
        "credibility_norm",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    header.extend(frame.labels().iter().map(|c| format!("weighted_{c}")));
    header.push("weighted_ignorance".into());
    w.write_record(&header)?;
    let mut columns: Vec<FocalSet> = (0..frame.len()).map(FocalSet::singleton).collect();
    columns.push(frame.full());
    for (id, s) in sample_ids.iter().zip(&result.samples) {
        let Some(d) = &s.diagnostics else { continue };
        if classifier_ids.len() != d.average_bjs.len() {
            return Err(Error::Shape(format!(
                "{} classifier ids for {} evidences",
                classifier_ids.len(),
                d.average_bjs.len()
            )));
        }
        for (i, name) in classifier_ids.iter().enumerate() {
            let mut rec = vec![
                id.clone(),
                name.clone(),
                d.average_bjs[i].to_string(),
                d.scatter.to_string(),
                d.scatter_without[i].to_string(),
                d.disagreement[i].to_string(),
                d.support[i].to_string(),
                d.support_norm[i].to_string(),
                d.deng_entropy[i].to_string(),
                d.credibility[i].to_string(),
                d.credibility_norm[i].to_string(),
            ];
            rec.extend(columns.iter().map(|set| {
                d.basis
                    .iter()
                    .position(|b| b == set)
                    .map_or(0.0, |p| d.weighted[i][p])
                    .to_string()
            }));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = open(path, false)?;
    let mut out = Vec::new();
    for r in reader.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

pub const REPORT_FILES: [&str; 5] = [
    "cells.csv",
    "summary.csv",
    "size_stats.csv",
    "noise_stats.csv",
    "report.json",
];

/// Writes the report tables and the full JSON document into `dir`.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_records(&dir.join(REPORT_FILES[0]), &report.cells)?;
    write_records(&dir.join(REPORT_FILES[1]), &report.summary)?;
    write_records(&dir.join(REPORT_FILES[2]), &report.size_stats)?;
    write_records(&dir.join(REPORT_FILES[3]), &report.noise_stats)?;
    let path = dir.join(REPORT_FILES[4]);
    let mut file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer_pretty(&mut file, report)?;
    file.write_all(b"\n").map_err(|e| Error::io(&path, e))
}

pub fn read_report_json(path: &Path) -> Result<ExperimentReport> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{two_blobs, BlobSpec};
    use crate::harness::{ApproachSummary, CellRecord};
    use proptest::prelude::*;
    use std::path::PathBuf;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn put(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn scores_round_trip() {
        let dir = tmp();
        let p = put(dir.path(), "clf.csv", "sample_id,score_a,score_b\ns1,0.25,0.75\ns2,3,1\n");
        let f = read_scores(&p).unwrap();
        assert_eq!(f.scores.classifier_id, "clf");
        assert_eq!(f.sample_ids, ["s1", "s2"]);
        assert_eq!(f.scores.row(1), &[0.75, 0.25]);
        let out = dir.path().join("clf.csv");
        write_scores(&out, &f.sample_ids, &f.scores).unwrap();
        assert_eq!(read_scores(&out).unwrap(), f);
    }

    #[test]
    fn parse_errors_name_row_and_column() {
        let dir = tmp();
        let p = put(dir.path(), "s.csv", "sample_id,score_a,score_b\ns1,0.2,0.8\ns2,oops,0.5\n");
        match read_scores(&p) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column.as_str()), (3, "score_a")),
            other => panic!("{other:?}"),
        }
        let p = put(dir.path(), "s.csv", "sample_id,score_a,score_b\ns1,0.2\n");
        assert!(matches!(read_scores(&p), Err(Error::Parse { row: 2, .. })));
        let p = put(dir.path(), "s.csv", "sample_id,a,score_b\ns1,0.2,0.8\n");
        match read_scores(&p) {
            Err(Error::Parse { column, .. }) => assert_eq!(column, "a"),
            other => panic!("{other:?}"),
        }
        let p = put(dir.path(), "s.csv", "sample_id,score_a\ns1,-1\n");
        assert!(matches!(read_scores(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn evidence_round_trip() {
        let dir = tmp();
        let p = put(
            dir.path(),
            "e.csv",
            "sample_id,mass_a,mass_b,mass_ignorance\n1,0.5,0.2,0.3\n2,0,0,1\n",
        );
        let f = read_evidence(&p).unwrap();
        assert_eq!(f.boe.per_sample[0].ignorance(), 0.3);
        assert!(f.boe.per_sample[1].is_vacuous());
        let out = dir.path().join("out.csv");
        write_evidence(&out, &f.sample_ids, &f.boe).unwrap();
        let back = read_evidence(&out).unwrap();
        assert_eq!(back.boe.per_sample, f.boe.per_sample);

        let bad = put(dir.path(), "bad.csv", "sample_id,mass_a,mass_b,mass_ignorance\n1,0.5,0.2,0.9\n");
        assert!(matches!(read_evidence(&bad), Err(Error::Parse { row: 2, .. })));
    }

    #[test]
    fn confusion_with_and_without_header() {
        let dir = tmp();
        let a = put(dir.path(), "a.csv", "40,5\n10,45\n");
        let b = put(dir.path(), "b.csv", "healthy,defect\n40,5\n10,45\n");
        let cm = read_confusion(&a).unwrap();
        assert_eq!(cm, read_confusion(&b).unwrap());
        assert_eq!(cm.get(1, 0), 10);
        let out = dir.path().join("c.csv");
        write_confusion(&out, &cm).unwrap();
        assert_eq!(read_confusion(&out).unwrap(), cm);
        let bad = put(dir.path(), "d.csv", "1,2\n3,x\n");
        assert!(matches!(read_confusion(&bad), Err(Error::Parse { row: 2, .. })));
        let ragged = put(dir.path(), "e.csv", "1,2\n3\n");
        assert!(read_confusion(&ragged).is_err());
    }

    #[test]
    fn dataset_labels_follow_first_appearance() {
        let dir = tmp();
        let p = put(dir.path(), "d.csv", "x,y,label\n1,2,zeta\n3,4,alpha\n5,6,zeta\n");
        let ds = read_dataset(&p).unwrap();
        assert_eq!(ds.classes(), ["zeta", "alpha"]);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        let out = dir.path().join("o.csv");
        let blobs = two_blobs(&BlobSpec::default()).unwrap();
        write_dataset(&out, &blobs).unwrap();
        let back = read_dataset(&out).unwrap();
        assert_eq!(back.labels(), blobs.labels());
        assert!(back.rows().zip(blobs.rows()).all(|(a, b)| a == b));
        let bad = put(dir.path(), "b.csv", "x,y\n1,2\n");
        assert!(read_dataset(&bad).is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let dir = tmp();
        let report = ExperimentReport {
            dataset: "d".into(),
            pool: vec!["knn5".into()],
            defect_class: "defect".into(),
            cells: vec![],
            summary: vec![ApproachSummary {
                rep: 0,
                noise: 0.01,
                scheme: "w0".into(),
                max_acc: 1.0 / 3.0,
                spc: 0.1,
                occurrences: 2,
                first_ensemble: "1+2".into(),
            }],
            size_stats: vec![],
            noise_stats: vec![],
        };
        write_report(dir.path(), &report).unwrap();
        assert_eq!(read_report_json(&dir.path().join("report.json")).unwrap(), report);
        let summary: Vec<ApproachSummary> = read_records(&dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary, report.summary);
    }

    fn opt<T: std::fmt::Debug + Clone + 'static>(s: impl Strategy<Value = T>) -> impl Strategy<Value = Option<T>> {
        prop_oneof![Just(None), s.prop_map(Some)]
    }

    prop_compose! {
        fn cell()(
            rep in 0usize..50,
            noise in prop_oneof![Just(0.0), Just(0.01), Just(0.05), 0.0f64..1.0],
            ensemble in "[1-9](\\+[1-9]){0,3}",
            scheme in prop_oneof![Just("w0".to_string()), Just("w5".to_string()), Just("best".to_string())],
            valid_acc in opt(0.0f64..=1.0),
            test_acc in opt(0.0f64..=1.0),
            test_spc in opt(0.0f64..=1.0),
            undecided in opt(0usize..1000),
            selected in opt("w[0-5]"),
            error in opt("[a-z][a-z ,]{0,20}"),
        ) -> CellRecord {
            let size = ensemble.split('+').count();
            CellRecord { rep, noise, ensemble, size, scheme, valid_acc, test_acc, test_spc, undecided, selected, error }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cell_csv_round_trip(cells in proptest::collection::vec(cell(), 0..20)) {
            let dir = tmp();
            let p = dir.path().join("cells.csv");
            write_records(&p, &cells).unwrap();
            let back: Vec<CellRecord> = read_records(&p).unwrap();
            prop_assert_eq!(back, cells);
        }

        #[test]
        fn score_csv_round_trip(rows in proptest::collection::vec(proptest::collection::vec(0.0f64..10.0, 3), 1..20)) {
            let dir = tmp();
            let classes = vec!["a".to_string(), "b".to_string(), "c".to_string()];
            let scores = ScoreMatrix::new("x", classes, rows).unwrap();
            let ids: Vec<String> = (0..scores.n_samples()).map(|i| i.to_string()).collect();
            let p = dir.path().join("x.csv");
            write_scores(&p, &ids, &scores).unwrap();
            // rows are already normalized, so re-reading divides by an exact or near-exact 1
            let back = read_scores(&p).unwrap();
            for (a, b) in back.scores.rows().zip(scores.rows()) {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).abs() < 1e-15);
                }
            }
        }
    }
}
