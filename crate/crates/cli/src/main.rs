//! `kgqa`: command-line front end for the KGQA logic-query pipeline.
//!
//! Exit codes: 0 success, 2 usage, 3 parse, 4 schema, 5 alignment, 6 I/O,
//! 7 configuration.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use kgqa_core::annotate::{
    mask_question, read_meta, sample_training_set, stratum_sizes, write_annotated, write_meta, AnnotateError,
    InferencePath, QAExample,
};
use kgqa_core::dataset::{load_split, DatasetError, Split, HOPS};
use kgqa_core::eval::{evaluate, variance_run, EvalConfig, EvalError, Hit1Mode, PredictionSource};
use kgqa_core::kb::KbError;
use kgqa_core::query::QueryError;
use kgqa_core::translate::{FileTranslator, GoldTranslator, PredictionsError, PredictionsFile, Translator};
use kgqa_core::{execute, ErrorKind, ExecOptions, FactBase, Query};

/// Default seed for every command that samples.
const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(
    name = "kgqa",
    version,
    about = "Logic-query KGQA pipeline over MetaQA-style data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Add `_reverse` facts to a KB and write the sorted dump.
    Augment {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Annotate one split: writes annotated_{split}.tsv and meta_{split}.tsv.
    Annotate {
        #[arg(long)]
        dataset_root: PathBuf,
        #[arg(long)]
        split: Split,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a hop-stratified training sample from a meta file.
    Sample {
        /// meta_train.tsv written by `annotate`.
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output directory; receives s{n}_seed{seed}.tsv and its meta file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer one question and print the proof tree.
    Answer {
        #[arg(long)]
        kb: PathBuf,
        /// Question with the topic entity in brackets.
        #[arg(long)]
        question: String,
        /// Inference path label, compiled to the gold query.
        #[arg(long, conflicts_with = "query", required_unless_present = "query")]
        path: Option<String>,
        /// Explicit query text using ENT for the topic entity.
        #[arg(long)]
        query: Option<String>,
        #[arg(long, default_value = "on")]
        exclude_seed: Switch,
        #[arg(long, default_value_t = kgqa_core::engine::DEFAULT_PROOF_CAP)]
        proof_cap: usize,
    },
    /// Evaluate a translator on a meta file.
    Eval {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long, default_value = "gold")]
        translator: TranslatorKind,
        /// Predictions TSV (`example_id<TAB>query`), required for `--translator file`.
        #[arg(long, required_if_eq("translator", "file"))]
        predictions: Option<PathBuf>,
        #[arg(long, default_value = "on")]
        exclude_seed: Switch,
        #[arg(long, default_value = "expected")]
        hit1: Hit1Arg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = kgqa_core::engine::DEFAULT_PROOF_CAP)]
        proof_cap: usize,
        #[arg(long, default_value = "all")]
        hop: HopArg,
        /// Output directory; receives report.json and summary.tsv.
        #[arg(long)]
        out: PathBuf,
    },
    /// hit@1 spread over training-sample sizes and sampling repeats.
    Variance {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        meta: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "100,250,500,1000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Repeat r uses seed + r.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Directory of s{n}_seed{seed}_predictions.tsv files; the gold
        /// translator is used when omitted.
        #[arg(long)]
        predictions_dir: Option<PathBuf>,
        #[arg(long, default_value = "on")]
        exclude_seed: Switch,
        #[arg(long, default_value = "expected")]
        hit1: Hit1Arg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        matches!(self, Switch::On)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Hit1Arg {
    Expected,
    Sampled,
}

impl From<Hit1Arg> for Hit1Mode {
    fn from(arg: Hit1Arg) -> Hit1Mode {
        match arg {
            Hit1Arg::Expected => Hit1Mode::Expected,
            Hit1Arg::Sampled => Hit1Mode::Sampled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum TranslatorKind {
    Gold,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum HopArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

impl HopArg {
    fn selects(self, hop: u8) -> bool {
        match self {
            HopArg::One => hop == 1,
            HopArg::Two => hop == 2,
            HopArg::Three => hop == 3,
            HopArg::All => true,
        }
    }
}

/// An error raised by the CLI itself, tagged with its exit category.
#[derive(Debug)]
struct CliError {
    kind: ErrorKind,
    message: String,
}

fn fail(kind: ErrorKind, message: impl Into<String>) -> anyhow::Error {
    CliError {
        kind,
        message: message.into(),
    }
    .into()
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn kind_of(err: &anyhow::Error) -> ErrorKind {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return e.kind;
        }
        if let Some(e) = cause.downcast_ref::<KbError>() {
            return e.kind();
        }
        if let Some(e) = cause.downcast_ref::<AnnotateError>() {
            return e.kind();
        }
        if let Some(e) = cause.downcast_ref::<DatasetError>() {
            return e.kind();
        }
        if let Some(e) = cause.downcast_ref::<QueryError>() {
            return e.kind();
        }
        if let Some(e) = cause.downcast_ref::<PredictionsError>() {
            return e.kind();
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return e.kind();
        }
        if cause.is::<std::io::Error>() {
            return ErrorKind::Io;
        }
    }
    ErrorKind::Config
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| fail(ErrorKind::Io, format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| fail(ErrorKind::Io, format!("{}: {e}", path.display())))
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| fail(ErrorKind::Io, format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Loads a KB and adds reverse facts unless it already has them.
fn load_kb(path: &Path) -> Result<FactBase> {
    let fb = FactBase::load(open(path)?)?;
    let fb = if fb.is_augmented() {
        fb
    } else {
        fb.augment_reverse()?
    };
    tracing::info!(facts = fb.len(), path = %path.display(), "loaded KB");
    Ok(fb)
}

fn load_meta(path: &Path) -> Result<Vec<QAExample>> {
    Ok(read_meta(open(path)?)?)
}

fn by_hop(examples: &[QAExample]) -> [Vec<QAExample>; 3] {
    HOPS.map(|hop| examples.iter().filter(|ex| ex.hop() == hop).cloned().collect())
}

fn cmd_augment(kb: &Path, out: &Path) -> Result<()> {
    let base = FactBase::load(open(kb)?)?;
    let augmented = base.augment_reverse()?;
    let written = augmented.dump(create(out)?)?;
    println!("base facts\t{}", base.len());
    println!("augmented facts\t{written}");
    Ok(())
}

fn cmd_annotate(root: &Path, split: Split, out: &Path) -> Result<()> {
    let hops = load_split(root, split)?;
    let all = hops.concat();
    ensure_dir(out)?;
    write_annotated(&all, create(&out.join(format!("annotated_{split}.tsv")))?)?;
    write_meta(&all, create(&out.join(format!("meta_{split}.tsv")))?)?;
    for (hop, examples) in HOPS.iter().zip(&hops) {
        println!("{hop}-hop\t{}", examples.len());
    }
    Ok(())
}

fn cmd_sample(meta: &Path, n: usize, seed: u64, out: &Path) -> Result<()> {
    let pool = by_hop(&load_meta(meta)?);
    let sample = sample_training_set([&pool[0], &pool[1], &pool[2]], n, seed)?;
    ensure_dir(out)?;
    let stem = format!("s{n}_seed{seed}");
    write_annotated(&sample, create(&out.join(format!("{stem}.tsv")))?)?;
    write_meta(&sample, create(&out.join(format!("{stem}_meta.tsv")))?)?;
    for (hop, size) in HOPS.iter().zip(stratum_sizes(n)) {
        println!("{hop}-hop\t{size}");
    }
    Ok(())
}

fn cmd_answer(
    kb: &Path,
    question: &str,
    path: Option<&str>,
    query: Option<&str>,
    options: ExecOptions,
) -> Result<()> {
    let (_, entity) = mask_question(question)?;
    let query = match (path, query) {
        (Some(label), _) => InferencePath::parse(label)?.to_query()?,
        (None, Some(text)) => Query::parse(text)?,
        (None, None) => return Err(fail(ErrorKind::Config, "need --path or --query")),
    };
    let grounded = query.ground(&entity)?;
    let fb = load_kb(kb)?;
    let result = execute(&grounded, &fb, options);

    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "query: {grounded}")?;
    let answers: Vec<&str> = result.answers().map(|a| a.as_str()).collect();
    writeln!(stdout, "answers ({}): {}", answers.len(), answers.join(" | "))?;
    if let Some(seed) = result.excluded_seed() {
        writeln!(stdout, "excluded seed: {seed}")?;
    }
    let answer_var = grounded.query().answer_var();
    for (answer, proofs) in result.iter() {
        writeln!(stdout, "{answer_var} = {answer}")?;
        for proof in proofs {
            for (depth, step) in proof.steps.iter().enumerate() {
                writeln!(stdout, "{:indent$}{step}", "", indent = 2 * (depth + 1))?;
            }
        }
    }
    Ok(())
}

struct EvalArgs<'a> {
    kb: &'a Path,
    meta: &'a Path,
    translator: TranslatorKind,
    predictions: Option<&'a Path>,
    hop: HopArg,
    out: &'a Path,
    cfg: EvalConfig,
}

fn cmd_eval(args: EvalArgs<'_>) -> Result<()> {
    let translator: Box<dyn Translator> = match (args.translator, args.predictions) {
        (TranslatorKind::Gold, _) => Box::new(GoldTranslator),
        (TranslatorKind::File, Some(path)) => {
            let preds = PredictionsFile::read(open(path)?)?;
            Box::new(FileTranslator::new(path.display().to_string(), preds))
        }
        (TranslatorKind::File, None) => {
            return Err(fail(ErrorKind::Config, "--translator file needs --predictions"))
        }
    };
    let examples: Vec<QAExample> = load_meta(args.meta)?
        .into_iter()
        .filter(|ex| args.hop.selects(ex.hop()))
        .collect();
    let fb = load_kb(args.kb)?;
    let report = evaluate(&examples, translator.as_ref(), &fb, &args.cfg)?;

    ensure_dir(args.out)?;
    write_text(&args.out.join("report.json"), &report.to_json())?;
    write_text(&args.out.join("summary.tsv"), &report.summary_tsv())?;
    let label = match args.translator {
        TranslatorKind::Gold => "gold",
        TranslatorKind::File => "file",
    };
    println!("{}", report.table_row(label));
    let o = &report.overall;
    println!(
        "examples {} parse_failures {} absent {} exact_set {}",
        o.examples,
        o.parse_failures,
        o.absent_predictions,
        kgqa_core::eval::format_percent(o.exact_set_accuracy)
    );
    Ok(())
}

fn cmd_variance(
    kb: &Path,
    meta: &Path,
    sizes: &[usize],
    seed: u64,
    source: PredictionSource,
    cfg: EvalConfig,
    out: &Path,
) -> Result<()> {
    let examples = load_meta(meta)?;
    let fb = load_kb(kb)?;
    let table = variance_run(&examples, &fb, &cfg, sizes, seed, &source)?;
    ensure_dir(out)?;
    write_text(&out.join("variance_cells.tsv"), &table.cells_tsv())?;
    let summary = table.summary_tsv();
    write_text(&out.join("variance_summary.tsv"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Augment { kb, out } => cmd_augment(&kb, &out),
        Command::Annotate {
            dataset_root,
            split,
            out,
        } => cmd_annotate(&dataset_root, split, &out),
        Command::Sample { meta, n, seed, out } => cmd_sample(&meta, n, seed, &out),
        Command::Answer {
            kb,
            question,
            path,
            query,
            exclude_seed,
            proof_cap,
        } => cmd_answer(
            &kb,
            &question,
            path.as_deref(),
            query.as_deref(),
            ExecOptions {
                exclude_seed: exclude_seed.on(),
                proof_cap,
            },
        ),
        Command::Eval {
            kb,
            meta,
            translator,
            predictions,
            exclude_seed,
            hit1,
            seed,
            proof_cap,
            hop,
            out,
        } => cmd_eval(EvalArgs {
            kb: &kb,
            meta: &meta,
            translator,
            predictions: predictions.as_deref(),
            hop,
            out: &out,
            cfg: EvalConfig {
                exclude_seed: exclude_seed.on(),
                rng_seed: seed,
                hit1_mode: hit1.into(),
                proof_cap,
                ..EvalConfig::default()
            },
        }),
        Command::Variance {
            kb,
            meta,
            sizes,
            repeats,
            seed,
            predictions_dir,
            exclude_seed,
            hit1,
            out,
        } => {
            let source = match predictions_dir {
                Some(dir) => PredictionSource::Directory(dir),
                None => PredictionSource::Gold,
            };
            let cfg = EvalConfig {
                exclude_seed: exclude_seed.on(),
                rng_seed: seed,
                hit1_mode: hit1.into(),
                repeats,
                ..EvalConfig::default()
            };
            cmd_variance(&kb, &meta, &sizes, seed, source, cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = kind_of(&err);
            eprintln!("error ({kind}): {err:#}");
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}
