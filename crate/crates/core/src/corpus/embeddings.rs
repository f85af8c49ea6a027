use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::{Embedding, EmbeddingKind, EmbeddingStore};

pub const EMBEDDING_FORMAT: &str = "dcev1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    kind: EmbeddingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    caption_index: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    system: Option<String>,
    vector: Vec<f32>,
}

/// Parses the JSON-lines embedding format: a `{"format":"dcev1","dim":D}`
/// header followed by one record per line. Blank lines are ignored.
pub fn read_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingStore> {
    let mut dim = None;
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some(d) = dim else {
            let header: Header = serde_json::from_str(&line).map_err(|_| Error::MissingHeader)?;
            if header.format != EMBEDDING_FORMAT {
                return Err(Error::parse(Some(line_no), format!("unsupported format `{}`", header.format)));
            }
            dim = Some(header.dim);
            continue;
        };
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::parse(Some(line_no), e.to_string()))?;
        if rec.vector.len() != d {
            return Err(Error::DimensionMismatch { line: Some(line_no), expected: d, found: rec.vector.len() });
        }
        records.push((
            line_no,
            Embedding { id: rec.id, kind: rec.kind, caption_index: rec.caption_index, system: rec.system, vector: rec.vector },
        ));
    }
    let dim = dim.ok_or(Error::MissingHeader)?;
    EmbeddingStore::from_numbered(dim, records)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    read_embeddings(BufReader::new(std::fs::File::open(path.as_ref()).map_err(Error::unreadable(path.as_ref()))?))
}

pub fn write_embeddings<W: Write>(mut out: W, dim: usize, embeddings: &[Embedding]) -> Result<()> {
    let header = Header { format: EMBEDDING_FORMAT.into(), dim };
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for e in embeddings {
        let rec =
            Record { id: e.id.clone(), kind: e.kind, caption_index: e.caption_index, system: e.system.clone(), vector: e.vector.clone() };
        writeln!(out, "{}", serde_json::to_string(&rec).map_err(|e| Error::parse(None, e.to_string()))?)?;
    }
    Ok(())
}
