//! JSON-lines files for similar sets, weight tables and candidate captions.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cider::Variant;
use crate::distinct::{WeightEntry, WeightParams, WeightTable};
use crate::error::{Error, Result};
use crate::retrieval::SimilarSet;

fn json_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(Error::from))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

fn parse_line<T: for<'de> Deserialize<'de>>(line_no: usize, line: &str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::parse(Some(line_no), e.to_string()))
}

fn open(path: &Path) -> Result<BufReader<std::fs::File>> {
    Ok(BufReader::new(std::fs::File::open(path).map_err(Error::unreadable(path))?))
}

pub fn write_similar_sets<W: Write>(mut out: W, sets: &[SimilarSet]) -> Result<()> {
    for s in sets {
        writeln!(out, "{}", serde_json::to_string(s).expect("similar set serializes"))?;
    }
    Ok(())
}

/// Reads `{"target_id", "neighbors", "scores"}` lines, checking that each set
/// is well formed and that no target repeats.
pub fn read_similar_sets<R: BufRead>(reader: R) -> Result<Vec<SimilarSet>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in json_lines(reader) {
        let (line_no, line) = item?;
        let set: SimilarSet = parse_line(line_no, &line)?;
        if set.neighbor_ids.len() != set.scores.len() {
            return Err(Error::parse(Some(line_no), format!("{} neighbors but {} scores", set.neighbor_ids.len(), set.scores.len())));
        }
        if set.neighbor_ids.is_empty() {
            return Err(Error::parse(Some(line_no), "empty neighbor list"));
        }
        let distinct: HashSet<&String> = set.neighbor_ids.iter().collect();
        if distinct.len() != set.neighbor_ids.len() || distinct.contains(&set.target_id) {
            return Err(Error::parse(Some(line_no), format!("invalid neighbors for `{}`", set.target_id)));
        }
        if !seen.insert(set.target_id.clone()) {
            return Err(Error::DuplicateId(set.target_id));
        }
        out.push(set);
    }
    Ok(out)
}

pub fn load_similar_sets(path: impl AsRef<Path>) -> Result<Vec<SimilarSet>> {
    read_similar_sets(open(path.as_ref())?)
}

pub const WEIGHT_FORMAT: &str = "dcwt1";

/// First line of a weight-table file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFileMeta {
    pub format: String,
    pub lambda_w: f64,
    pub alpha_w: f64,
    pub df_split: String,
    pub variant: Variant,
    pub sigma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightLine {
    image_id: String,
    entries: Vec<WeightEntry>,
}

pub fn write_weight_table<W: Write>(mut out: W, meta: &WeightFileMeta, table: &WeightTable) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string(meta).expect("meta serializes"))?;
    for (id, entries) in table.iter() {
        let line = WeightLine { image_id: id.to_owned(), entries: entries.to_vec() };
        writeln!(out, "{}", serde_json::to_string(&line).expect("weights serialize"))?;
    }
    Ok(())
}

pub fn read_weight_table<R: BufRead>(reader: R) -> Result<(WeightFileMeta, WeightTable)> {
    let mut lines = json_lines(reader);
    let (line_no, first) = lines.next().ok_or_else(|| Error::parse(None, "weight table is empty"))??;
    let meta: WeightFileMeta = parse_line(line_no, &first)?;
    if meta.format != WEIGHT_FORMAT {
        return Err(Error::parse(Some(line_no), format!("unsupported format `{}`", meta.format)));
    }
    let params = WeightParams::new(meta.lambda_w, meta.alpha_w)?;
    let mut table = WeightTable::new(params);
    for item in lines {
        let (line_no, line) = item?;
        let wl: WeightLine = parse_line(line_no, &line)?;
        table.insert(wl.image_id, wl.entries)?;
    }
    Ok((meta, table))
}

pub fn load_weight_table(path: impl AsRef<Path>) -> Result<(WeightFileMeta, WeightTable)> {
    read_weight_table(open(path.as_ref())?)
}

pub const DEFAULT_SYSTEM: &str = "system";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateLine {
    image_id: String,
    caption: String,
    #[serde(default)]
    system: Option<String>,
}

/// Generated captions of one captioning system, keyed by image id.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub system: String,
    pub captions: HashMap<String, String>,
}

/// Reads `{"image_id", "caption", "system"?}` lines. Systems keep their order
/// of first appearance; lines without `system` belong to `"system"`.
pub fn read_candidates<R: BufRead>(reader: R) -> Result<Vec<CandidateSet>> {
    let mut sets: Vec<CandidateSet> = Vec::new();
    for item in json_lines(reader) {
        let (line_no, line) = item?;
        let c: CandidateLine = parse_line(line_no, &line)?;
        let system = c.system.unwrap_or_else(|| DEFAULT_SYSTEM.to_owned());
        let idx = match sets.iter().position(|s| s.system == system) {
            Some(i) => i,
            None => {
                sets.push(CandidateSet { system: system.clone(), captions: HashMap::new() });
                sets.len() - 1
            }
        };
        if sets[idx].captions.insert(c.image_id.clone(), c.caption).is_some() {
            return Err(Error::DuplicateId(format!("{system}/{}", c.image_id)));
        }
    }
    Ok(sets)
}

pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<CandidateSet>> {
    read_candidates(open(path.as_ref())?)
}
