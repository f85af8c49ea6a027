//! Runs the `ciderbtw` binary on the bundled fixture corpus.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn run(args: &[&str], threads: Option<usize>, stdin: Option<&[u8]>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ciderbtw"));
    cmd.args(args).env_remove("SOURCE_DATE_EPOCH");
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t.to_string());
    }
    cmd.stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() });
    cmd.stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("binary runs");
    if let Some(input) = stdin {
        let mut pipe = child.stdin.take().unwrap();
        let input = input.to_vec();
        // Write from a thread so a full stdout pipe cannot deadlock us.
        std::thread::spawn(move || {
            let _ = pipe.write_all(&input);
        });
    }
    child.wait_with_output().expect("binary exits")
}

pub fn ok(args: &[&str], threads: Option<usize>) -> Output {
    let out = run(args, threads, None);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Every file produced by build-sets (train, test), weights and eval.
#[derive(Debug, PartialEq)]
pub struct Artifacts {
    pub train_sets: Vec<u8>,
    pub test_sets: Vec<u8>,
    pub weights: Vec<u8>,
    pub report_json: Vec<u8>,
    pub report_csv: Vec<u8>,
    pub report_md: Vec<u8>,
}

pub fn pipeline(dir: &Path, threads: Option<usize>) -> Artifacts {
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    let dataset = s(&fixture("dataset.json"));
    let embeddings = s(&fixture("embeddings.jsonl"));
    let candidates = s(&fixture("candidates.jsonl"));
    let out = |name: &str| s(&dir.join(name));
    for split in ["train", "test"] {
        ok(
            &[
                "build-sets",
                "--dataset",
                &dataset,
                "--embeddings",
                &embeddings,
                "--split",
                split,
                "--k",
                "5",
                "--output",
                &out(&format!("{split}_sets.jsonl")),
            ],
            threads,
        );
    }
    ok(
        &[
            "weights",
            "--dataset",
            &dataset,
            "--similar-sets",
            &out("train_sets.jsonl"),
            "--split",
            "train",
            "--output",
            &out("weights.jsonl"),
        ],
        threads,
    );
    for format in ["json", "csv", "markdown"] {
        ok(
            &[
                "eval",
                "--dataset",
                &dataset,
                "--embeddings",
                &embeddings,
                "--similar-sets",
                &out("test_sets.jsonl"),
                "--candidates",
                &candidates,
                "--split",
                "test",
                "--format",
                format,
                "--output",
                &out(&format!("report.{format}")),
            ],
            threads,
        );
    }
    let read = |name: &str| std::fs::read(dir.join(name)).unwrap();
    Artifacts {
        train_sets: read("train_sets.jsonl"),
        test_sets: read("test_sets.jsonl"),
        weights: read("weights.jsonl"),
        report_json: read("report.json"),
        report_csv: read("report.csv"),
        report_md: read("report.markdown"),
    }
}
