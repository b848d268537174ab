//! Command-line front end. `run` is what the binary calls; tests drive it
//! in-process with scripted input.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::annotate::{
    consensus_filter, inter_annotator_agreement, read_records, record_path, render_agreement_table, restrict_records,
    run_session, sample_messages, system_clock, validity_report, AgreementReport, AnnotationTask,
};
use crate::classify::{Algorithm, AlgorithmKind};
use crate::config::PipelineConfig;
use crate::corpus::{ingest, load_dump, write_dump, Message};
use crate::error::{Error, Result};
use crate::eval::{delta_summary, grid_search, render_best_table, stratified_kfold, write_delta_csv, write_grid_csv, GridResult, LabeledDocs};
use crate::features::Representation;
use crate::label::Label;
use crate::lexsent::{agreement_stats, read_labels_csv, write_labels_csv, AgreementStats, ConsensusRecord};

pub const COVID_CORPUS: &str = "covid.jsonl";
pub const IN_BAND_CORPUS: &str = "in_band.jsonl";
pub const CORPUS_STATS: &str = "corpus_stats.csv";
pub const LABELS_ALL: &str = "labels_all.csv";
pub const LABELS_IN_BAND: &str = "labels_in_band.csv";
pub const LABEL_AGREEMENT: &str = "label_agreement.csv";
pub const ANNOTATION_DIR: &str = "annotation";
pub const GRID_CSV: &str = "grid.csv";
pub const DELTA_CSV: &str = "delta.csv";
pub const TABLES_TXT: &str = "tables.txt";
pub const REPORT_TXT: &str = "report.txt";

#[derive(Debug, Parser)]
#[command(name = "sentiment-pipeline", version, about = "Length-filtered sentiment labeling and classification pipeline")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a comment dump into the all-covid and in-band corpora.
    Ingest(IngestArgs),
    /// Label both corpora with the two scorers and report their agreement.
    Label(LabelArgs),
    /// Sample annotation tasks or run an annotation session.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
    /// Agreement between two annotators' records.
    Agree(AgreeArgs),
    /// Grid search over algorithms, representations and min word frequency.
    Eval(EvalArgs),
    /// Collect existing outputs into one text report.
    Report,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// JSONL comment dump.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Inclusive word-count band, `MIN:MAX`.
    #[arg(long)]
    pub band: Option<String>,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Valence scorer thresholds, `POS:NEG`.
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Polarity scorer thresholds, `POS:NEG`.
    #[arg(long)]
    pub polarity_thresholds: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusChoice {
    All,
    InBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConsensusChoice {
    Positive,
    Negative,
}

#[derive(Debug, Subcommand)]
pub enum AnnotateCommand {
    /// Draw a random group of messages into a task file.
    Sample {
        #[arg(long)]
        task_id: String,
        /// Number of messages to draw.
        #[arg(long)]
        n: usize,
        /// Corpus to draw from.
        #[arg(long, value_enum, default_value = "all")]
        from: CorpusChoice,
        /// Only messages both scorers labeled this way.
        #[arg(long, value_enum)]
        consensus: Option<ConsensusChoice>,
    },
    /// Label a task's messages interactively; resumes an interrupted session.
    Session {
        /// Task file written by `annotate sample`.
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        annotator: String,
        /// Timestamp written into records instead of the wall clock.
        #[arg(long)]
        fixed_timestamp: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    /// Record CSV of the first annotator.
    #[arg(long)]
    pub first: PathBuf,
    /// Record CSV of the second annotator.
    #[arg(long)]
    pub second: PathBuf,
    /// Group name used in the table and output file name.
    #[arg(long, default_value = "group")]
    pub group: String,
    /// Tool label CSV; adds counts of annotator agreement with the tool.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Corpus file; adds a row recomputed on the messages it contains.
    #[arg(long)]
    pub band_corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Comma-separated subset of nb, svm, rf.
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Option<Vec<AlgorithmKind>>,
    /// Comma-separated subset of bow, tfidf.
    #[arg(long, value_delimiter = ',')]
    pub representations: Option<Vec<Representation>>,
    /// Comma-separated minimum word frequencies, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',')]
    pub min_freqs: Option<Vec<usize>>,
}

fn resolve_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn load_messages(path: &Path) -> Result<Vec<Message>> {
    Ok(load_dump(path)?.records.iter().map(Message::from_raw).collect())
}

fn load_labels(path: &Path) -> Result<Vec<ConsensusRecord>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_labels_csv(f, path)
}

/// Runs one parsed command. `input` and `output` stand in for the terminal.
pub fn run<R: BufRead, W: Write>(cli: Cli, input: R, mut output: W) -> Result<()> {
    let mut cfg = resolve_config(&cli)?;
    let term = |e| Error::io("<stdout>", e);
    match cli.command {
        Command::Ingest(args) => {
            if let Some(p) = args.input {
                cfg.input.dump = Some(p);
            }
            if let Some(b) = args.band {
                cfg.corpus.band = b;
            }
            cfg.validate()?;
            cfg.echo()?;
            let dump_path = cfg
                .input
                .dump
                .clone()
                .ok_or_else(|| Error::Config("no input dump: pass --input or set input.dump".into()))?;
            let dump = load_dump(&dump_path)?;
            let outcome = ingest(dump.records, &cfg.ingest_filters()?);
            write_with(&cfg.out.join(COVID_CORPUS), |w| write_dump(w, &outcome.covid))?;
            write_with(&cfg.out.join(IN_BAND_CORPUS), |w| write_dump(w, &outcome.in_band))?;
            write_with(&cfg.out.join(CORPUS_STATS), |w| {
                writeln!(w, "stat,count")?;
                for (k, v) in outcome.stats.rows() {
                    writeln!(w, "{k},{v}")?;
                }
                writeln!(w, "bot_removed,{}", outcome.bot_removed)?;
                writeln!(w, "out_of_date_range,{}", outcome.out_of_range)?;
                writeln!(w, "malformed_skipped,{}", dump.skipped)
            })?;
            writeln!(
                output,
                "covid-related {} (in band {}), bots removed {}, malformed lines {}",
                outcome.stats.covid_related, outcome.stats.in_band, outcome.bot_removed, dump.skipped
            )
            .map_err(term)?;
        }
        Command::Label(args) => {
            if let Some(t) = args.thresholds {
                cfg.labeling.valence_thresholds = t;
            }
            if let Some(t) = args.polarity_thresholds {
                cfg.labeling.polarity_thresholds = t;
            }
            cfg.validate()?;
            let labeler = cfg.labeler()?;
            cfg.echo()?;
            let mut rows: Vec<(&str, AgreementStats)> = Vec::new();
            for (name, corpus, labels) in [("all", COVID_CORPUS, LABELS_ALL), ("in_band", IN_BAND_CORPUS, LABELS_IN_BAND)] {
                let messages = load_messages(&cfg.out.join(corpus))?;
                let records = labeler.label_messages(&messages)?;
                let path = cfg.out.join(labels);
                let w = create(&path)?;
                write_labels_csv(w, &records)?;
                let stats = if records.is_empty() {
                    AgreementStats {
                        agreed_positive: 0,
                        agreed_negative: 0,
                        inconsistent: 0,
                        total: 0,
                        agreement_pct: 0.0,
                    }
                } else {
                    agreement_stats(&records)?
                };
                rows.push((name, stats));
            }
            write_with(&cfg.out.join(LABEL_AGREEMENT), |w| {
                writeln!(w, "corpus,agreed_positive,agreed_negative,inconsistent,total,agreement_pct,positive_share,negative_share")?;
                for (name, s) in &rows {
                    writeln!(
                        w,
                        "{name},{},{},{},{},{:.2},{:.2},{:.2}",
                        s.agreed_positive,
                        s.agreed_negative,
                        s.inconsistent,
                        s.total,
                        s.agreement_pct,
                        share(s, Label::Positive),
                        share(s, Label::Negative)
                    )?;
                }
                Ok(())
            })?;
            for (name, s) in &rows {
                writeln!(output, "{name}: agreement {:.2}% of {}", s.agreement_pct, s.total).map_err(term)?;
            }
        }
        Command::Annotate(AnnotateCommand::Sample {
            task_id,
            n,
            from,
            consensus,
        }) => {
            cfg.echo()?;
            let (corpus_file, labels_file) = match from {
                CorpusChoice::All => (COVID_CORPUS, LABELS_ALL),
                CorpusChoice::InBand => (IN_BAND_CORPUS, LABELS_IN_BAND),
            };
            let messages = load_messages(&cfg.out.join(corpus_file))?;
            let task = match consensus {
                None => sample_messages(&task_id, &messages, n, cfg.seed, None, |_| true)?,
                Some(c) => {
                    let wanted = match c {
                        ConsensusChoice::Positive => Label::Positive,
                        ConsensusChoice::Negative => Label::Negative,
                    };
                    let labels: HashMap<String, Option<Label>> = load_labels(&cfg.out.join(labels_file))?
                        .into_iter()
                        .map(|r| (r.message_id, r.consensus))
                        .collect();
                    sample_messages(
                        &task_id,
                        &messages,
                        n,
                        cfg.seed,
                        Some(format!("consensus={wanted}")),
                        consensus_filter(&labels, wanted),
                    )?
                }
            };
            let path = cfg.out.join(ANNOTATION_DIR).join(format!("{task_id}.task.json"));
            std::fs::create_dir_all(cfg.out.join(ANNOTATION_DIR)).map_err(|e| Error::io(&cfg.out, e))?;
            task.save(&path)?;
            writeln!(output, "wrote {} ({} messages)", path.display(), task.message_ids.len()).map_err(term)?;
        }
        Command::Annotate(AnnotateCommand::Session {
            task,
            annotator,
            fixed_timestamp,
        }) => {
            if fixed_timestamp.is_some() {
                cfg.annotate.fixed_timestamp = fixed_timestamp;
            }
            cfg.echo()?;
            let task = AnnotationTask::load(&task)?;
            let mut messages = load_messages(&cfg.out.join(COVID_CORPUS))?;
            let known: HashSet<String> = messages.iter().map(|m| m.id.clone()).collect();
            if task.message_ids.iter().any(|id| !known.contains(id)) {
                messages.extend(load_messages(&cfg.out.join(IN_BAND_CORPUS))?);
            }
            let dir = cfg.out.join(ANNOTATION_DIR);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let store = record_path(&dir, &task.task_id, annotator.trim());
            let fixed = cfg.annotate.fixed_timestamp.clone();
            let clock = move || fixed.clone().unwrap_or_else(system_clock);
            let outcome = run_session(&task, &messages, &annotator, &store, input, &mut output, &clock)?;
            writeln!(
                output,
                "{} of {} labeled; records in {}",
                outcome.records.len(),
                task.message_ids.len(),
                store.display()
            )
            .map_err(term)?;
        }
        Command::Agree(args) => {
            cfg.echo()?;
            let a = read_records(&args.first)?;
            let b = read_records(&args.second)?;
            let mut rows: Vec<(String, AgreementReport)> = vec![(args.group.clone(), inter_annotator_agreement(&a, &b)?)];
            let mut extra = String::new();
            if let Some(p) = &args.labels {
                let ids: HashSet<&str> = a.iter().map(|r| r.message_id.as_str()).collect();
                let tool: HashMap<String, Label> = load_labels(p)?
                    .into_iter()
                    .filter(|r| ids.contains(r.message_id.as_str()))
                    .filter_map(|r| r.consensus.map(|c| (r.message_id, c)))
                    .collect();
                let v = validity_report(&a, &b, &tool)?;
                extra.push_str(&format!(
                    "tool label confirmed by both annotators: {}\ntool label contradicted by both annotators: {}\n",
                    v.confirmed, v.contradicted
                ));
            }
            if let Some(p) = &args.band_corpus {
                let keep: HashSet<String> = load_messages(p)?.into_iter().map(|m| m.id).collect();
                let (ra, rb) = (restrict_records(&a, &keep), restrict_records(&b, &keep));
                rows.push((format!("{} (band)", args.group), inter_annotator_agreement(&ra, &rb)?));
            }
            let text = format!("{}{extra}", render_agreement_table(&rows));
            let path = cfg.out.join(format!("agreement_{}.txt", args.group));
            write_with(&path, |w| w.write_all(text.as_bytes()))?;
            output.write_all(text.as_bytes()).map_err(term)?;
        }
        Command::Eval(args) => {
            if let Some(a) = args.algorithms {
                cfg.classify.algorithms = a;
            }
            if let Some(r) = args.representations {
                cfg.features.representations = r;
            }
            if let Some(m) = args.min_freqs {
                cfg.features.min_freqs = m;
            }
            cfg.validate()?;
            cfg.echo()?;
            let grids = eval_grids(&cfg)?;
            let refs: Vec<&GridResult> = grids.iter().collect();
            write_with(&cfg.out.join(GRID_CSV), |w| write_grid_csv(w, &refs))?;
            let delta = delta_summary(&grids[0], &grids[1]);
            write_with(&cfg.out.join(DELTA_CSV), |w| write_delta_csv(w, &delta))?;
            let mut tables = String::new();
            for g in &grids {
                tables.push_str(&render_best_table(g));
                tables.push('\n');
            }
            write_with(&cfg.out.join(TABLES_TXT), |w| w.write_all(tables.as_bytes()))?;
            output.write_all(tables.as_bytes()).map_err(term)?;
            if grids.iter().all(|g| g.rows.iter().all(|r| r.outcome.is_err())) {
                let reason = grids
                    .iter()
                    .flat_map(|g| &g.rows)
                    .find_map(|r| r.outcome.as_ref().err().cloned())
                    .unwrap_or_else(|| "empty grid".into());
                return Err(Error::Model(format!("every grid cell failed: {reason}")));
            }
        }
        Command::Report => {
            let mut report = String::new();
            for (title, file) in [
                ("Corpus", CORPUS_STATS),
                ("Scorer agreement", LABEL_AGREEMENT),
                ("Best classifiers", TABLES_TXT),
                ("F-score change after length filtering", DELTA_CSV),
            ] {
                let path = cfg.out.join(file);
                if let Ok(text) = std::fs::read_to_string(&path) {
                    report.push_str(&format!("== {title} ({file})\n{text}\n"));
                }
            }
            if report.is_empty() {
                return Err(Error::Config(format!("no pipeline outputs found in {}", cfg.out.display())));
            }
            write_with(&cfg.out.join(REPORT_TXT), |w| w.write_all(report.as_bytes()))?;
            output.write_all(report.as_bytes()).map_err(term)?;
        }
    }
    Ok(())
}

fn share(s: &AgreementStats, l: Label) -> f64 {
    if s.total == 0 {
        return 0.0;
    }
    match l {
        Label::Positive => s.positive_share(),
        Label::Negative => s.negative_share(),
    }
}

/// Grid search on the all-covid corpus and on the in-band corpus.
pub fn eval_grids(cfg: &PipelineConfig) -> Result<Vec<GridResult>> {
    let hyper = cfg.hyperparams();
    let learners: Vec<Algorithm> = cfg
        .classify
        .algorithms
        .iter()
        .map(|&k| Algorithm::new(k, hyper.clone()))
        .collect();
    let spec = cfg.grid_spec();
    let mut grids = Vec::new();
    for (name, corpus, labels) in [("all", COVID_CORPUS, LABELS_ALL), ("in_band", IN_BAND_CORPUS, LABELS_IN_BAND)] {
        let messages = load_messages(&cfg.out.join(corpus))?;
        let records = load_labels(&cfg.out.join(labels))?;
        let docs = LabeledDocs::from_consensus(&messages, &records);
        let plan = stratified_kfold(&docs.labels, cfg.cv.k, crate::seed::derive(cfg.seed, &format!("cv/{name}")))?;
        grids.push(grid_search(&format!("{}-{name}", cfg.dataset), &docs, &learners, &spec, &plan));
    }
    Ok(grids)
}

/// Parses `args` (including the program name) and runs against the
/// process's stdin and stdout. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdin = std::io::stdin();
    match run(cli, stdin.lock(), std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
