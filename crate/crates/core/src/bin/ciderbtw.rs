use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ciderbtw::corpus::{self, ReportFormat, Split};
use ciderbtw::pipeline::{self, EvalOptions};
use ciderbtw::reward::RewardService;
use ciderbtw::{CiderParams, Error, RewardParams, Variant, WeightParams};

#[derive(Parser)]
#[command(name = "ciderbtw", version, about = "CIDEr / CIDErBtw evaluation and reward tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build similar-image sets for one split from precomputed embeddings.
    BuildSets {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitArg::Train)]
        split: SplitArg,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute ground-truth CIDErBtw weights.
    Weights {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        similar_sets: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitArg::Train)]
        split: SplitArg,
        /// Split whose captions provide document frequencies (defaults to --split).
        #[arg(long, value_enum)]
        df_split: Option<SplitArg>,
        #[arg(long, default_value_t = 1.5)]
        lambda_w: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha_w: f64,
        #[command(flatten)]
        cider: CiderArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate generated captions: CIDEr, CIDErBtw and recall@K.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        similar_sets: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitArg::Test)]
        split: SplitArg,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        ks: Vec<usize>,
        #[command(flatten)]
        cider: CiderArgs,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        /// Recorded in report metadata; falls back to SOURCE_DATE_EPOCH.
        #[arg(long)]
        timestamp: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Answer JSON-lines reward requests on stdin until end of input.
    RewardServe {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        similar_sets: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitArg::Train)]
        split: SplitArg,
        #[arg(long, default_value_t = 0.4)]
        alpha_r: f64,
        #[command(flatten)]
        cider: CiderArgs,
    },
}

#[derive(Args, Clone, Copy)]
struct CiderArgs {
    #[arg(long, default_value_t = 6.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::CiderD)]
    variant: VariantArg,
}

impl CiderArgs {
    fn params(self) -> CiderParams {
        CiderParams {
            sigma: self.sigma,
            variant: match self.variant {
                VariantArg::CiderD => Variant::CiderD,
                VariantArg::Cider => Variant::Plain,
            },
            ..CiderParams::default()
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum VariantArg {
    CiderD,
    Cider,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
    Markdown,
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_dataset(path: &Path) -> Result<corpus::Dataset, Error> {
    let ds = corpus::load_dataset(path)?;
    eprintln!("dataset: {} images ({})", ds.len(), ds.split_counts());
    Ok(ds)
}

fn timestamp(flag: Option<String>) -> Option<String> {
    flag.or_else(|| {
        let secs: i64 = std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()?;
        chrono::DateTime::from_timestamp(secs, 0).map(|t| t.to_rfc3339())
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::BuildSets { dataset, embeddings, split, k, output } => {
            let ds = load_dataset(&dataset)?;
            let store = corpus::load_embeddings(&embeddings)?;
            eprintln!(
                "embeddings: dim {} | {} images, {} captions, {} candidate queries",
                store.dimension(),
                store.num_images(),
                store.num_captions(),
                store.num_queries()
            );
            let sets = pipeline::build_sets(&ds, &store, split.into(), k)?;
            let mut out = open_output(output.as_deref())?;
            corpus::write_similar_sets(&mut out, &sets)?;
            out.flush()?;
        }
        Command::Weights { dataset, similar_sets, split, df_split, lambda_w, alpha_w, cider, output } => {
            let ds = load_dataset(&dataset)?;
            let sets = corpus::load_similar_sets(&similar_sets)?;
            let wparams = WeightParams::new(lambda_w, alpha_w)?;
            let df_split = df_split.unwrap_or(split);
            let (meta, table) = pipeline::build_weight_table(&ds, &sets, split.into(), df_split.into(), wparams, cider.params())?;
            let mut out = open_output(output.as_deref())?;
            corpus::write_weight_table(&mut out, &meta, &table)?;
            out.flush()?;
        }
        Command::Eval { dataset, embeddings, similar_sets, candidates, split, ks, cider, format, timestamp: ts, output } => {
            let ds = load_dataset(&dataset)?;
            let store = embeddings.as_deref().map(corpus::load_embeddings).transpose()?;
            let sets = corpus::load_similar_sets(&similar_sets)?;
            let cands = corpus::load_candidates(&candidates)?;
            let opts = EvalOptions { split: split.into(), ks, cider: cider.params(), timestamp: timestamp(ts) };
            let eval = pipeline::evaluate(&ds, store.as_ref(), &sets, &cands, &opts)?;
            for w in &eval.warnings {
                eprintln!("warning: {w}");
            }
            let format = match format {
                FormatArg::Json => ReportFormat::Json,
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Markdown => ReportFormat::Markdown,
            };
            let mut out = open_output(output.as_deref())?;
            out.write_all(&corpus::write_report(&eval.report, format))?;
            out.flush()?;
        }
        Command::RewardServe { dataset, similar_sets, weights, split, alpha_r, cider } => {
            let ds = load_dataset(&dataset)?;
            let sets = corpus::load_similar_sets(&similar_sets)?;
            let (_, table) = corpus::load_weight_table(&weights)?;
            let rparams = RewardParams { alpha_r, ..RewardParams::default() };
            let service = RewardService::new(&ds, &sets, &table, split.into(), cider.params(), rparams)?;
            eprintln!("reward-serve: {} images ready", service.num_images());
            let served = service.serve(BufReader::new(io::stdin()), io::stdout().lock())?;
            eprintln!("reward-serve: {served} requests answered");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
