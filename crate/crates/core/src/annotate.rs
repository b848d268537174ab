//! Sampling messages for manual annotation, blind terminal sessions and
//! two-annotator agreement.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::OpenOptions;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Message;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub task_id: String,
    pub message_ids: Vec<String>,
    /// Human-readable description of the filter used when sampling.
    pub source_filter: Option<String>,
    pub created_from_seed: u64,
}

impl AnnotationTask {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("task serializes");
        json.push('\n');
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let task: AnnotationTask = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let distinct: HashSet<&String> = task.message_ids.iter().collect();
        if distinct.len() != task.message_ids.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: "task lists a message id twice".into(),
            });
        }
        Ok(task)
    }
}

/// Uniform sample of `n` messages passing `filter`, without replacement.
/// Candidates are taken in corpus order before the seeded shuffle.
pub fn sample_messages<F>(
    task_id: &str,
    corpus: &[Message],
    n: usize,
    seed: u64,
    filter_description: Option<String>,
    filter: F,
) -> Result<AnnotationTask>
where
    F: Fn(&Message) -> bool,
{
    let mut seen = HashSet::new();
    let mut candidates: Vec<&str> = corpus
        .iter()
        .filter(|m| filter(m))
        .map(|m| m.id.as_str())
        .filter(|id| seen.insert(*id))
        .collect();
    if candidates.len() < n {
        return Err(Error::InsufficientMessages {
            requested: n,
            available: candidates.len(),
        });
    }
    let mut rng = seed::derived_rng(seed, &format!("sample/{task_id}"));
    let (picked, _) = candidates.partial_shuffle(&mut rng, n);
    Ok(AnnotationTask {
        task_id: task_id.to_string(),
        message_ids: picked.iter().map(|s| s.to_string()).collect(),
        source_filter: filter_description,
        created_from_seed: seed,
    })
}

/// Predicate keeping messages whose tool consensus equals `wanted`.
pub fn consensus_filter(consensus: &HashMap<String, Option<Label>>, wanted: Label) -> impl Fn(&Message) -> bool + '_ {
    move |m| consensus.get(&m.id).copied().flatten() == Some(wanted)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub task_id: String,
    pub message_id: String,
    pub annotator_id: String,
    pub label: Label,
    pub timestamp: String,
}

/// One append-only CSV per (task, annotator).
pub fn record_path(dir: &Path, task_id: &str, annotator_id: &str) -> PathBuf {
    dir.join(format!("{task_id}.{annotator_id}.csv"))
}

pub fn read_records(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<AnnotationRecord>, _>>()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })
}

fn append_record(path: &Path, record: &AnnotationRecord) -> Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(record).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Seconds since the Unix epoch, as written into record timestamps.
pub fn system_clock() -> String {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    /// All records for this (task, annotator), including earlier runs.
    pub records: Vec<AnnotationRecord>,
    pub completed: bool,
}

enum Answer {
    Label(Label),
    Quit,
    Invalid,
}

fn parse_answer(line: &str) -> Answer {
    match line.trim().to_ascii_lowercase().as_str() {
        "q" | "quit" => Answer::Quit,
        "p" | "pos" | "positive" => Answer::Label(Label::Positive),
        "n" | "neg" | "negative" => Answer::Label(Label::Negative),
        _ => Answer::Invalid,
    }
}

/// Runs a blind labeling session. Each message body is shown followed by
/// `label [p/n]:`; only the message text is displayed. Every answer is
/// appended to `store` immediately, so an interrupted session resumes at the
/// first unlabeled message. `q` or end of input stops early.
pub fn run_session<R: BufRead, W: Write>(
    task: &AnnotationTask,
    corpus: &[Message],
    annotator_id: &str,
    store: &Path,
    mut input: R,
    mut output: W,
    clock: &dyn Fn() -> String,
) -> Result<SessionOutcome> {
    let annotator_id = annotator_id.trim();
    if annotator_id.is_empty() {
        return Err(Error::InvalidParameter("annotator id must not be empty".into()));
    }
    let bodies: HashMap<&str, &str> = corpus.iter().map(|m| (m.id.as_str(), m.body.as_str())).collect();
    for id in &task.message_ids {
        if !bodies.contains_key(id.as_str()) {
            return Err(Error::UnknownMessage(id.clone()));
        }
    }

    let mut records = if store.exists() { read_records(store)? } else { Vec::new() };
    let done: HashSet<String> = records.iter().map(|r| r.message_id.clone()).collect();
    let pending: Vec<&String> = task.message_ids.iter().filter(|id| !done.contains(*id)).collect();
    if pending.is_empty() {
        return Err(Error::SessionComplete {
            task_id: task.task_id.clone(),
            annotator: annotator_id.to_string(),
        });
    }

    let out_err = |e| Error::io("<terminal>", e);
    let total = task.message_ids.len();
    let mut line = String::new();
    for id in pending {
        let position = task.message_ids.iter().position(|m| m == id).expect("id from task") + 1;
        writeln!(output, "\n[{position}/{total}]\n{}", bodies[id.as_str()]).map_err(out_err)?;
        let label = loop {
            write!(output, "label [p/n]: ").map_err(out_err)?;
            output.flush().map_err(out_err)?;
            line.clear();
            if input.read_line(&mut line).map_err(out_err)? == 0 {
                writeln!(output).map_err(out_err)?;
                return Ok(SessionOutcome {
                    records,
                    completed: false,
                });
            }
            match parse_answer(&line) {
                Answer::Label(l) => break l,
                Answer::Quit => {
                    writeln!(output, "saved; rerun to resume").map_err(out_err)?;
                    return Ok(SessionOutcome {
                        records,
                        completed: false,
                    });
                }
                Answer::Invalid => writeln!(output, "answer p or n (q to quit)").map_err(out_err)?,
            }
        };
        let record = AnnotationRecord {
            task_id: task.task_id.clone(),
            message_id: id.clone(),
            annotator_id: annotator_id.to_string(),
            label,
            timestamp: clock(),
        };
        append_record(store, &record)?;
        records.push(record);
    }
    writeln!(output, "done").map_err(out_err)?;
    Ok(SessionOutcome {
        records,
        completed: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementReport {
    pub group_size: usize,
    pub both_positive: usize,
    pub both_negative: usize,
    pub disagreed: usize,
    pub agreement: f64,
}

impl AgreementReport {
    pub fn from_counts(both_positive: usize, both_negative: usize, group_size: usize) -> Result<Self> {
        if group_size == 0 {
            return Err(Error::EmptyInput);
        }
        let agreed = both_positive + both_negative;
        if agreed > group_size {
            return Err(Error::InvalidParameter(format!(
                "{agreed} agreed labels exceed group size {group_size}"
            )));
        }
        Ok(AgreementReport {
            group_size,
            both_positive,
            both_negative,
            disagreed: group_size - agreed,
            agreement: agreed as f64 / group_size as f64,
        })
    }
}

impl fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}", self.agreement)
    }
}

fn labels_by_id(records: &[AnnotationRecord]) -> Result<HashMap<&str, Label>> {
    let mut map = HashMap::with_capacity(records.len());
    for r in records {
        if map.insert(r.message_id.as_str(), r.label).is_some() {
            return Err(Error::InvalidParameter(format!(
                "message {} labeled twice by {}",
                r.message_id, r.annotator_id
            )));
        }
    }
    Ok(map)
}

fn check_same_ids<A, B>(a: &HashMap<&str, A>, b: &HashMap<&str, B>) -> Result<()> {
    let only_first: BTreeSet<&str> = a.keys().filter(|k| !b.contains_key(*k)).copied().collect();
    let only_second: BTreeSet<&str> = b.keys().filter(|k| !a.contains_key(*k)).copied().collect();
    if only_first.is_empty() && only_second.is_empty() {
        return Ok(());
    }
    Err(Error::MismatchedIds {
        only_first: only_first.into_iter().map(String::from).collect(),
        only_second: only_second.into_iter().map(String::from).collect(),
    })
}

/// Share of messages on which both annotators chose the same label.
pub fn inter_annotator_agreement(a: &[AnnotationRecord], b: &[AnnotationRecord]) -> Result<AgreementReport> {
    let (la, lb) = (labels_by_id(a)?, labels_by_id(b)?);
    check_same_ids(&la, &lb)?;
    let (mut pos, mut neg) = (0, 0);
    for (id, l) in &la {
        match (l, lb[id]) {
            (Label::Positive, Label::Positive) => pos += 1,
            (Label::Negative, Label::Negative) => neg += 1,
            _ => {}
        }
    }
    AgreementReport::from_counts(pos, neg, la.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub agreement: AgreementReport,
    /// Both annotators agree with the tool label.
    pub confirmed: usize,
    /// Both annotators agree with each other and against the tool label.
    pub contradicted: usize,
}

/// Annotator agreement on a group that also carries tool consensus labels.
pub fn validity_report(a: &[AnnotationRecord], b: &[AnnotationRecord], tool: &HashMap<String, Label>) -> Result<ValidityReport> {
    let agreement = inter_annotator_agreement(a, b)?;
    let (la, lb) = (labels_by_id(a)?, labels_by_id(b)?);
    let tool_ref: HashMap<&str, Label> = tool.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    check_same_ids(&la, &tool_ref)?;
    let (mut confirmed, mut contradicted) = (0, 0);
    for (id, l) in &la {
        if *l != lb[id] {
            continue;
        }
        if *l == tool_ref[id] {
            confirmed += 1;
        } else {
            contradicted += 1;
        }
    }
    Ok(ValidityReport {
        agreement,
        confirmed,
        contradicted,
    })
}

/// Keeps only records whose message is in `keep`; used to recompute
/// agreement on the length-band subset of an annotated group.
pub fn restrict_records(records: &[AnnotationRecord], keep: &HashSet<String>) -> Vec<AnnotationRecord> {
    records.iter().filter(|r| keep.contains(&r.message_id)).cloned().collect()
}

/// Plain-text table: one row per group with both-agree counts and agreement.
pub fn render_agreement_table(rows: &[(String, AgreementReport)]) -> String {
    let width = rows.iter().map(|(g, _)| g.len()).max().unwrap_or(5).max(5);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>8}  {:>9}  {:>5}  {:>9}\n",
        "group", "both pos", "both neg", "disagreed", "size", "agreement"
    );
    for (group, r) in rows {
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>8}  {:>9}  {:>5}  {:>9}\n",
            group,
            r.both_positive,
            r.both_negative,
            r.disagreed,
            r.group_size,
            r.to_string()
        ));
    }
    out
}
