//! Dataset, embedding and table files, and evaluation reports.

mod dataset;
mod embeddings;
mod report;
mod tables;

pub use dataset::{load_dataset, Dataset, ImageRecord, Split, SplitCounts};
pub use embeddings::{load_embeddings, read_embeddings, write_embeddings, EMBEDDING_FORMAT};
pub use report::{write_report, EvalReport, ImageRow, ReportFormat, ReportMeta, SystemReport};
pub use tables::{
    load_candidates, load_similar_sets, load_weight_table, read_candidates, read_similar_sets, read_weight_table, write_similar_sets,
    write_weight_table, CandidateSet, WeightFileMeta, DEFAULT_SYSTEM, WEIGHT_FORMAT,
};
