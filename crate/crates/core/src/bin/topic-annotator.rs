use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use topic_annotator::classifier::ClassifierConfig;
use topic_annotator::eval::{evaluate, parse_topic_sets, Averaging};
use topic_annotator::history::AnnotationStore;
use topic_annotator::ingest::parse_upload;
use topic_annotator::pipeline::{to_stable_json, Engine, EngineConfig};
use topic_annotator::service::{self, AppState};

const EXIT_PARSE: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Parser)]
#[command(name = "topic-annotator", version, about = "Annotate proceedings metadata with research topics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a ZIP archive (or single book XML) and print the JSON report.
    Classify(ClassifyArgs),
    /// Score predicted topic sets against a gold standard.
    Eval(EvalArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct Resources {
    /// Ontology JSON file.
    #[arg(long, env = "ANNOTATOR_ONTOLOGY")]
    ontology: Option<PathBuf>,
    /// Plain-text embedding model; without it only the syntactic module runs.
    #[arg(long, env = "ANNOTATOR_MODEL")]
    model: Option<PathBuf>,
    /// Code scheme JSON with its topic mapping.
    #[arg(long, env = "ANNOTATOR_SCHEME")]
    scheme: Option<PathBuf>,
    /// JSON-lines annotation history.
    #[arg(long, env = "ANNOTATOR_HISTORY")]
    history: Option<PathBuf>,
    #[arg(long, env = "ANNOTATOR_LEV_THRESHOLD", default_value_t = 0.94)]
    lev_threshold: f64,
    #[arg(long, env = "ANNOTATOR_KNN_K", default_value_t = 10)]
    knn_k: usize,
    #[arg(long, env = "ANNOTATOR_KNN_MIN_SIM", default_value_t = 0.7, allow_negative_numbers = true)]
    knn_min_sim: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Args)]
struct ClassifyArgs {
    archive: PathBuf,
    #[command(flatten)]
    resources: Resources,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    min_chapters: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Classify chapters on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct EvalArgs {
    gold: PathBuf,
    predictions: PathBuf,
    /// Headline scores averaged per paper instead of pooled.
    #[arg(long = "macro")]
    macro_avg: bool,
    /// Include per-paper counts and scores.
    #[arg(long)]
    per_paper: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "ANNOTATOR_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    #[command(flatten)]
    resources: Resources,
    /// Default slider value for taxonomy requests.
    #[arg(long, env = "ANNOTATOR_MIN_CHAPTERS", default_value_t = 1)]
    min_chapters: usize,
    /// Seconds before an idle session is dropped.
    #[arg(long, env = "ANNOTATOR_IDLE_TIMEOUT", default_value_t = 7200)]
    idle_timeout: u64,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl Resources {
    fn engine(&self) -> Result<Engine, Failure> {
        let ontology = self
            .ontology
            .clone()
            .ok_or_else(|| fail(EXIT_RESOURCE, "no ontology given: pass --ontology or set ANNOTATOR_ONTOLOGY"))?;
        let cfg = EngineConfig {
            ontology,
            model: self.model.clone(),
            scheme: self.scheme.clone(),
            classifier: ClassifierConfig {
                lev_threshold: self.lev_threshold,
                knn_k: self.knn_k,
                knn_min_sim: self.knn_min_sim,
                ..Default::default()
            },
        };
        Engine::load(&cfg).map_err(|e| match e {
            topic_annotator::pipeline::LoadError::Config(c) => fail(2, c.to_string()),
            other => fail(EXIT_RESOURCE, other.to_string()),
        })
    }

    fn store(&self) -> Result<Option<AnnotationStore>, Failure> {
        self.history
            .as_ref()
            .map(|p| AnnotationStore::open(p).map_err(|e| fail(EXIT_RESOURCE, e.to_string())))
            .transpose()
    }
}

fn read(path: &Path, code: u8) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| fail(code, format!("cannot read {}: {e}", path.display())))
}

fn classify(args: ClassifyArgs) -> Result<(), Failure> {
    let engine = args.resources.engine()?;
    let store = args.resources.store()?;
    let bytes = read(&args.archive, EXIT_PARSE)?;
    let contents = parse_upload(&bytes).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", args.archive.display())))?;
    for e in &contents.errors {
        eprintln!("warning: skipped {e}");
    }
    if contents.books.is_empty() {
        return Err(fail(EXIT_PARSE, format!("{}: no books", args.archive.display())));
    }
    let analysis = engine.analyze(contents.books, contents.errors, !args.sequential);
    let previous = match (&store, analysis.conf_series_id()) {
        (Some(s), Some(series)) => s
            .previous_annotations(series, analysis.year())
            .map_err(|e| fail(EXIT_RESOURCE, e.to_string()))?,
        _ => None,
    };
    let Format::Json = args.format;
    let out = to_stable_json(&analysis.report(args.min_chapters as usize, previous.as_ref()));
    match &args.output {
        Some(p) => std::fs::write(p, out).map_err(|e| fail(1, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let load = |p: &Path| -> Result<_, Failure> {
        let text = String::from_utf8(read(p, EXIT_RESOURCE)?)
            .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", p.display())))?;
        parse_topic_sets(&text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", p.display())))
    };
    let gold = load(&args.gold)?;
    let predicted = load(&args.predictions)?;
    let averaging = if args.macro_avg { Averaging::Macro } else { Averaging::Micro };
    let report = evaluate(&gold, &predicted, averaging, args.per_paper);
    for id in &report.only_in_gold {
        eprintln!("warning: {id} has no prediction");
    }
    for id in &report.only_in_predictions {
        eprintln!("warning: {id} is not in the gold standard");
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let engine = Arc::new(args.resources.engine()?);
    let store = match args.resources.store()? {
        Some(s) => s,
        None => {
            log::warn!("no --history given; annotations are kept in memory only");
            AnnotationStore::in_memory()
        }
    };
    let state = AppState::new(engine, Arc::new(store))
        .with_idle_timeout(Duration::from_secs(args.idle_timeout))
        .with_default_min_chapters(args.min_chapters);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| fail(1, e.to_string()))?;
    runtime
        .block_on(service::serve(Arc::new(state), args.bind))
        .map_err(|e| fail(1, format!("server error: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve(_)) { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level)).init();
    let result = match cli.command {
        Command::Classify(a) => classify(a),
        Command::Eval(a) => eval(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
