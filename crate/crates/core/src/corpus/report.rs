use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::Split;
use crate::cider::CiderParams;
use crate::error::Error;

/// Scores of one generated caption.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRow {
    pub image_id: String,
    pub caption: String,
    pub cider: f64,
    pub ciderbtw: f64,
    /// Number of (candidate, similar-set caption) pairs behind `ciderbtw`.
    pub btw_pairs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemReport {
    pub name: String,
    pub rows: Vec<ImageRow>,
    /// Recall@k in percent, `None` when no query embeddings were available.
    pub recall: Option<BTreeMap<usize, f64>>,
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = values.len();
    (n > 0).then(|| values.sum::<f64>() / n as f64)
}

impl SystemReport {
    pub fn cider_mean(&self) -> Option<f64> {
        mean(self.rows.iter().map(|r| r.cider))
    }

    pub fn ciderbtw_mean(&self) -> Option<f64> {
        mean(self.rows.iter().map(|r| r.ciderbtw))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    /// Similar images per target.
    pub k: usize,
    /// Ground-truth captions per image, when uniform across the split.
    pub n: Option<usize>,
    pub split: Split,
    pub cider: CiderParams,
    pub ks: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub meta: ReportMeta,
    pub systems: Vec<SystemReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidParams(format!("unknown report format `{other}`"))),
        }
    }
}

#[derive(Serialize)]
struct JsonSystem<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    cider_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ciderbtw_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recall: Option<RecallKeys<'a>>,
    rows: &'a [ImageRow],
}

/// Serializes recall as `{"R@1": .., "R@5": ..}` in ascending k.
struct RecallKeys<'a>(&'a BTreeMap<usize, f64>);

impl Serialize for RecallKeys<'_> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_map(self.0.iter().map(|(k, v)| (format!("R@{k}"), v)))
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    metadata: &'a ReportMeta,
    systems: Vec<JsonSystem<'a>>,
}

pub fn write_report(report: &EvalReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Csv => to_csv(report),
        ReportFormat::Markdown => to_markdown(report).into_bytes(),
    }
}

fn to_json(report: &EvalReport) -> Vec<u8> {
    let doc = JsonReport {
        metadata: &report.meta,
        systems: report
            .systems
            .iter()
            .map(|s| JsonSystem {
                name: &s.name,
                cider_mean: s.cider_mean(),
                ciderbtw_mean: s.ciderbtw_mean(),
                recall: s.recall.as_ref().map(RecallKeys),
                rows: &s.rows,
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("report serializes");
    out.push(b'\n');
    out
}

fn to_csv(report: &EvalReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["system", "image_id", "caption", "cider", "ciderbtw", "btw_pairs"]).expect("in-memory write");
    for s in &report.systems {
        for r in &s.rows {
            w.write_record([
                s.name.as_str(),
                &r.image_id,
                &r.caption,
                &r.cider.to_string(),
                &r.ciderbtw.to_string(),
                &r.btw_pairs.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"))
}

fn to_markdown(report: &EvalReport) -> String {
    let mut out = String::from("| Method | CIDEr | CIDErBtw |");
    for k in &report.meta.ks {
        let _ = write!(out, " R@{k} |");
    }
    out.push_str("\n|---|---:|---:|");
    for _ in &report.meta.ks {
        out.push_str("---:|");
    }
    out.push('\n');
    for s in report.systems.iter().filter(|s| !s.rows.is_empty()) {
        let _ = write!(out, "| {} | {} | {} |", s.name, cell(s.cider_mean()), cell(s.ciderbtw_mean()));
        for k in &report.meta.ks {
            let r = s.recall.as_ref().and_then(|r| r.get(k)).copied();
            let _ = write!(out, " {} |", r.map_or_else(|| "-".to_owned(), |v| format!("{v:.2}")));
        }
        out.push('\n');
    }
    out
}
