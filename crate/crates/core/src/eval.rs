//! Stratified k-fold cross-validation, macro metrics and the min-frequency
//! grid search.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{Classifier, Learner};
use crate::corpus::Message;
use crate::error::{Error, Result};
use crate::features::{build_vocabulary, tokenize, FeatureMatrix, Representation};
use crate::label::Label;
use crate::lexsent::ConsensusRecord;
use crate::seed;

/// Counts indexed `[truth][prediction]` by [`Label::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (t, p) in pairs {
            cm.add(t, p);
        }
        cm
    }

    pub fn add(&mut self, truth: Label, predicted: Label) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn get(&self, truth: Label, predicted: Label) -> usize {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn merge(mut self, other: &ConfusionMatrix) -> Self {
        for t in 0..2 {
            for p in 0..2 {
                self.counts[t][p] += other.counts[t][p];
            }
        }
        self
    }

    /// The same matrix with the class names exchanged.
    pub fn swapped(&self) -> Self {
        let c = self.counts;
        ConfusionMatrix {
            counts: [[c[1][1], c[1][0]], [c[0][1], c[0][0]]],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Indexed by [`Label::index`].
    pub per_class: [ClassMetrics; 2],
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// Mean of the per-class F1 scores.
    pub macro_f1: f64,
    pub accuracy: f64,
}

impl MetricsReport {
    pub fn class(&self, label: Label) -> ClassMetrics {
        self.per_class[label.index()]
    }

    fn mean(reports: &[MetricsReport]) -> MetricsReport {
        let n = reports.len() as f64;
        let avg = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let class = |c: usize| ClassMetrics {
            precision: avg(&|r| r.per_class[c].precision),
            recall: avg(&|r| r.per_class[c].recall),
            f1: avg(&|r| r.per_class[c].f1),
        };
        MetricsReport {
            per_class: [class(0), class(1)],
            macro_precision: avg(&|r| r.macro_precision),
            macro_recall: avg(&|r| r.macro_recall),
            macro_f1: avg(&|r| r.macro_f1),
            accuracy: avg(&|r| r.accuracy),
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let mut per_class = [ClassMetrics::default(); 2];
    for c in 0..2 {
        let o = 1 - c;
        let tp = cm.counts[c][c];
        let precision = ratio(tp, tp + cm.counts[o][c]);
        let recall = ratio(tp, tp + cm.counts[c][o]);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class[c] = ClassMetrics { precision, recall, f1 };
    }
    Ok(MetricsReport {
        per_class,
        macro_precision: (per_class[0].precision + per_class[1].precision) / 2.0,
        macro_recall: (per_class[0].recall + per_class[1].recall) / 2.0,
        macro_f1: (per_class[0].f1 + per_class[1].f1) / 2.0,
        accuracy: ratio(cm.counts[0][0] + cm.counts[1][1], total),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvPlan {
    pub k: usize,
    pub seed: u64,
    pub fold_of: Vec<usize>,
}

impl CvPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

/// Per class, indices are shuffled with a seeded RNG and dealt round-robin.
/// The second class continues dealing where the first stopped, so total
/// fold sizes also differ by at most one.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<CvPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for class in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class: class.as_str(),
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut seed::derived_rng(seed, &format!("cv/{class}")));
        for i in members {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(CvPlan { k, seed, fold_of })
}

/// Tokenized documents with their consensus labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDocs {
    pub ids: Vec<String>,
    pub tokens: Vec<Vec<String>>,
    pub labels: Vec<Label>,
}

impl LabeledDocs {
    /// Keeps messages that have a consensus label, in corpus order.
    pub fn from_consensus(messages: &[Message], records: &[ConsensusRecord]) -> Self {
        let by_id: HashMap<&str, Option<Label>> =
            records.iter().map(|r| (r.message_id.as_str(), r.consensus)).collect();
        let mut docs = LabeledDocs::default();
        for m in messages {
            if let Some(Some(label)) = by_id.get(m.id.as_str()) {
                docs.ids.push(m.id.clone());
                docs.tokens.push(tokenize(&m.body));
                docs.labels.push(*label);
            }
        }
        docs
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn select(&self, idx: &[usize]) -> (Vec<Vec<String>>, Vec<Label>) {
        (
            idx.iter().map(|&i| self.tokens[i].clone()).collect(),
            idx.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// One confusion matrix over all held-out predictions.
    #[default]
    Pooled,
    /// Mean of per-fold metrics.
    PerFold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub representation: Representation,
    pub min_freq: usize,
    /// Build one vocabulary over the whole corpus instead of per training split.
    pub global_vocabulary: bool,
    pub pooling: Pooling,
    /// Master seed for training; each fold derives its own.
    pub seed: u64,
}

impl CvOptions {
    pub fn new(representation: Representation, min_freq: usize, seed: u64) -> Self {
        CvOptions {
            representation,
            min_freq,
            global_vocabulary: false,
            pooling: Pooling::Pooled,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub report: MetricsReport,
    pub confusion: ConfusionMatrix,
    pub fold_confusions: Vec<ConfusionMatrix>,
}

fn run_fold<L: Learner>(docs: &LabeledDocs, learner: &L, opts: &CvOptions, plan: &CvPlan, fold: usize) -> Result<ConfusionMatrix> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    let (train_tokens, train_labels) = docs.select(&train_idx);
    let (test_tokens, test_labels) = docs.select(&test_idx);
    let vocab = if opts.global_vocabulary {
        build_vocabulary(&docs.tokens, opts.min_freq)?
    } else {
        build_vocabulary(&train_tokens, opts.min_freq)?
    };
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary { min_freq: opts.min_freq });
    }
    let vocab = Arc::new(vocab);
    let train = FeatureMatrix::from_tokens(&train_tokens, train_labels, vocab.clone(), opts.representation)?;
    let test = FeatureMatrix::from_tokens(&test_tokens, test_labels, vocab, opts.representation)?;
    let model = learner.fit(&train, seed::derive(opts.seed, &format!("fold/{fold}")))?;
    let mut cm = ConfusionMatrix::default();
    for (v, truth) in test.vectors.iter().zip(&test.labels) {
        cm.add(*truth, model.predict(v)?.label);
    }
    Ok(cm)
}

/// Trains on each training split and predicts its held-out fold. Folds run
/// in parallel; results are combined in fold order.
pub fn cross_validate<L: Learner>(docs: &LabeledDocs, learner: &L, opts: &CvOptions, plan: &CvPlan) -> Result<CvResult> {
    if plan.fold_of.len() != docs.len() {
        return Err(Error::InvalidParameter(format!(
            "plan covers {} documents, corpus has {}",
            plan.fold_of.len(),
            docs.len()
        )));
    }
    let fold_confusions = (0..plan.k)
        .into_par_iter()
        .map(|f| run_fold(docs, learner, opts, plan, f))
        .collect::<Result<Vec<_>>>()?;
    let confusion = fold_confusions
        .iter()
        .fold(ConfusionMatrix::default(), |acc, cm| acc.merge(cm));
    let report = match opts.pooling {
        Pooling::Pooled => compute_metrics(&confusion)?,
        Pooling::PerFold => {
            let per = fold_confusions
                .iter()
                .map(compute_metrics)
                .collect::<Result<Vec<_>>>()?;
            MetricsReport::mean(&per)
        }
    };
    Ok(CvResult {
        report,
        confusion,
        fold_confusions,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub representations: Vec<Representation>,
    pub min_freqs: Vec<usize>,
    pub global_vocabulary: bool,
    pub pooling: Pooling,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            representations: vec![Representation::Bow, Representation::Tfidf],
            min_freqs: (1..=10).collect(),
            global_vocabulary: false,
            pooling: Pooling::Pooled,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub dataset: String,
    pub algorithm: String,
    pub representation: Representation,
    pub min_freq: usize,
    /// `Err` holds the reason the cell was skipped.
    pub outcome: std::result::Result<MetricsReport, String>,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub dataset: String,
    pub rows: Vec<GridRow>,
}

impl GridResult {
    pub fn best_per_algorithm(&self) -> Vec<&GridRow> {
        self.rows.iter().filter(|r| r.best).collect()
    }

    pub fn best_for(&self, algorithm: &str) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.best && r.algorithm == algorithm)
    }
}

/// Marks, per algorithm, the row with the highest macro F1; ties go to the
/// smaller min_freq, then to the earlier row.
pub fn mark_best(rows: &mut [GridRow]) {
    let mut best: HashMap<String, usize> = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        let Ok(m) = &row.outcome else { continue };
        let replace = match best.get(&row.algorithm) {
            None => true,
            Some(&j) => {
                let (cur, cur_freq) = match &rows[j].outcome {
                    Ok(c) => (c.macro_f1, rows[j].min_freq),
                    Err(_) => unreachable!("only ok rows are recorded"),
                };
                m.macro_f1 > cur || (m.macro_f1 == cur && row.min_freq < cur_freq)
            }
        };
        if replace {
            best.insert(row.algorithm.clone(), i);
        }
    }
    for row in rows.iter_mut() {
        row.best = false;
    }
    for i in best.into_values() {
        rows[i].best = true;
    }
}

/// Evaluates every learner x representation x min_freq cell with the same
/// fold plan. Failing cells are kept as skipped rows.
pub fn grid_search<L: Learner>(dataset: &str, docs: &LabeledDocs, learners: &[L], spec: &GridSpec, plan: &CvPlan) -> GridResult {
    let mut cells = Vec::new();
    for (li, _) in learners.iter().enumerate() {
        for &rep in &spec.representations {
            for &mf in &spec.min_freqs {
                cells.push((li, rep, mf));
            }
        }
    }
    let mut rows: Vec<GridRow> = cells
        .par_iter()
        .map(|&(li, rep, mf)| {
            let learner = &learners[li];
            let opts = CvOptions {
                representation: rep,
                min_freq: mf,
                global_vocabulary: spec.global_vocabulary,
                pooling: spec.pooling,
                seed: seed::derive(spec.seed, &format!("grid/{}/{}/{}", learner.name(), rep.as_str(), mf)),
            };
            GridRow {
                dataset: dataset.to_string(),
                algorithm: learner.name(),
                representation: rep,
                min_freq: mf,
                outcome: cross_validate(docs, learner, &opts, plan)
                    .map(|r| r.report)
                    .map_err(|e| e.to_string()),
                best: false,
            }
        })
        .collect();
    mark_best(&mut rows);
    GridResult {
        dataset: dataset.to_string(),
        rows,
    }
}

pub const GRID_CSV_HEADER: &str = "dataset,algorithm,representation,min_freq,precision,recall,f1,accuracy,status,best";

/// Precision, recall and F1 columns are macro averages.
pub fn write_grid_csv<W: Write>(mut w: W, grids: &[&GridResult]) -> std::io::Result<()> {
    writeln!(w, "{GRID_CSV_HEADER}")?;
    for grid in grids {
        for r in &grid.rows {
            let (metrics, status) = match &r.outcome {
                Ok(m) => (
                    format!("{:.6},{:.6},{:.6},{:.6}", m.macro_precision, m.macro_recall, m.macro_f1, m.accuracy),
                    "ok".to_string(),
                ),
                Err(e) => (",,,".to_string(), format!("skipped: {}", e.replace([',', '\n'], ";"))),
            };
            writeln!(
                w,
                "{},{},{},{},{metrics},{status},{}",
                r.dataset,
                r.algorithm,
                r.representation.as_str(),
                r.min_freq,
                u8::from(r.best)
            )?;
        }
    }
    Ok(())
}

/// Best row per algorithm in the layout of a results table: min word
/// frequency, then macro precision, recall, F-score and accuracy.
pub fn render_best_table(grid: &GridResult) -> String {
    let mut out = format!("{}\n", grid.dataset);
    out.push_str("Algorithm  Representation  Min. word frequency  Macro precision  Macro recall  Macro F-score  Accuracy\n");
    for r in grid.best_per_algorithm() {
        let Ok(m) = &r.outcome else { continue };
        writeln!(
            out,
            "{:<9}  {:<14}  {:>19}  {:>15.3}  {:>12.3}  {:>13.3}  {:>8.3}",
            r.algorithm.to_uppercase(),
            r.representation.as_str(),
            r.min_freq,
            m.macro_precision,
            m.macro_recall,
            m.macro_f1,
            m.accuracy
        )
        .expect("write to string");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub algorithm: String,
    pub baseline_f1: Option<f64>,
    pub filtered_f1: Option<f64>,
    pub delta: Option<f64>,
}

/// Per-algorithm change in best macro F1 from `baseline` to `filtered`.
pub fn delta_summary(baseline: &GridResult, filtered: &GridResult) -> Vec<DeltaRow> {
    let mut algorithms: Vec<String> = Vec::new();
    for r in baseline.rows.iter().chain(&filtered.rows) {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm.clone());
        }
    }
    algorithms
        .into_iter()
        .map(|a| {
            let f = |g: &GridResult| g.best_for(&a).and_then(|r| r.outcome.as_ref().ok()).map(|m| m.macro_f1);
            let (b, t) = (f(baseline), f(filtered));
            DeltaRow {
                delta: b.zip(t).map(|(b, t)| t - b),
                algorithm: a,
                baseline_f1: b,
                filtered_f1: t,
            }
        })
        .collect()
}

pub fn write_delta_csv<W: Write>(mut w: W, rows: &[DeltaRow]) -> std::io::Result<()> {
    let cell = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    writeln!(w, "algorithm,baseline_f1,filtered_f1,delta")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.algorithm,
            cell(r.baseline_f1),
            cell(r.filtered_f1),
            cell(r.delta)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::DocVector;
    use proptest::prelude::*;
    use std::collections::HashSet;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn hand_computed_confusion() {
        let mut cm = ConfusionMatrix::default();
        cm.counts = [[8, 2], [3, 7]];
        let m = compute_metrics(&cm).unwrap();
        assert!((m.macro_precision - (8.0 / 11.0 + 7.0 / 9.0) / 2.0).abs() < 1e-15);
        assert!((m.macro_precision - 0.7525).abs() < 1e-4);
        assert_eq!(m.accuracy, 0.75);
    }

    #[test]
    fn perfect_and_all_positive() {
        let cm = ConfusionMatrix { counts: [[5, 0], [0, 5]] };
        let m = compute_metrics(&cm).unwrap();
        assert_eq!((m.macro_precision, m.macro_recall, m.macro_f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
        let cm = ConfusionMatrix { counts: [[5, 0], [5, 0]] };
        let m = compute_metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.class(N).recall, 0.0);
        assert_eq!(m.class(N).f1, 0.0);
        assert!(compute_metrics(&ConfusionMatrix::default()).is_err());
    }

    fn labels(pos: usize, neg: usize) -> Vec<Label> {
        std::iter::repeat(P).take(pos).chain(std::iter::repeat(N).take(neg)).collect()
    }

    fn class_fold_sizes(plan: &CvPlan, labels: &[Label], class: Label) -> Vec<usize> {
        let mut sizes = vec![0; plan.k];
        for (i, l) in labels.iter().enumerate() {
            if *l == class {
                sizes[plan.fold_of[i]] += 1;
            }
        }
        sizes
    }

    #[test]
    fn folds_are_stratified() {
        let l = labels(20, 20);
        let plan = stratified_kfold(&l, 10, 1).unwrap();
        for c in Label::ALL {
            assert!(class_fold_sizes(&plan, &l, c).iter().all(|&s| s == 2));
        }
        let l = labels(21, 20);
        let plan = stratified_kfold(&l, 10, 1).unwrap();
        let sizes = class_fold_sizes(&plan, &l, P);
        assert!(sizes.iter().all(|s| (2..=3).contains(s)));
        assert_eq!(plan, stratified_kfold(&l, 10, 1).unwrap());
        assert!(matches!(stratified_kfold(&labels(9, 20), 10, 1), Err(Error::ClassTooSmall { count: 9, .. })));
    }

    struct OracleModel {
        truth: HashMap<Vec<(usize, u64)>, Label>,
    }

    fn key(v: &DocVector) -> Vec<(usize, u64)> {
        v.entries.iter().map(|&(i, w)| (i, w.to_bits())).collect()
    }

    impl Classifier for OracleModel {
        fn predict(&self, v: &DocVector) -> Result<crate::classify::Prediction> {
            Ok(crate::classify::Prediction {
                label: self.truth[&key(v)],
                score: 0.0,
            })
        }
    }

    /// Test stub that sees the whole corpus, so it answers held-out documents
    /// with their true label.
    struct OracleLearner<'a>(&'a LabeledDocs);

    impl Learner for OracleLearner<'_> {
        type Model = OracleModel;

        fn name(&self) -> String {
            "oracle".into()
        }

        fn fit(&self, train: &FeatureMatrix, _seed: u64) -> Result<OracleModel> {
            let vocab = &train.vocabulary;
            let rep = train.vectors.first().map(|v| v.representation).unwrap_or(Representation::Bow);
            let truth = self
                .0
                .tokens
                .iter()
                .zip(&self.0.labels)
                .map(|(t, l)| (key(&crate::features::vectorize(t, vocab, rep)), *l))
                .collect();
            Ok(OracleModel { truth })
        }
    }

    fn distinct_docs(n: usize) -> LabeledDocs {
        let mut d = LabeledDocs::default();
        for i in 0..n {
            d.ids.push(i.to_string());
            d.tokens.push(vec![format!("w{i}"), "shared".into(), "shared".into()]);
            d.labels.push(if i % 2 == 0 { P } else { N });
        }
        d
    }

    #[test]
    fn oracle_stub_scores_one_and_pools_every_document() {
        let docs = distinct_docs(40);
        let plan = stratified_kfold(&docs.labels, 10, 3).unwrap();
        let opts = CvOptions {
            global_vocabulary: true,
            ..CvOptions::new(Representation::Bow, 1, 0)
        };
        let r = cross_validate(&docs, &OracleLearner(&docs), &opts, &plan).unwrap();
        assert_eq!(r.report.macro_f1, 1.0);
        assert_eq!(r.confusion.total(), 40);
    }

    #[test]
    fn grid_marks_skipped_rows_and_breaks_ties_low() {
        // Every term occurs once, so min_freq >= 2 empties the vocabulary.
        let mut docs = distinct_docs(20);
        for t in &mut docs.tokens {
            t.truncate(1);
        }
        let plan = stratified_kfold(&docs.labels, 10, 0).unwrap();
        let spec = GridSpec {
            representations: vec![Representation::Bow],
            min_freqs: vec![1, 2, 3],
            global_vocabulary: true,
            ..GridSpec::default()
        };
        let grid = grid_search("toy", &docs, &[OracleLearner(&docs)], &spec, &plan);
        assert_eq!(grid.rows.len(), 3);
        assert!(grid.rows[0].outcome.is_ok());
        assert!(grid.rows[1].outcome.is_err() && grid.rows[2].outcome.is_err());
        let best = grid.best_per_algorithm();
        assert_eq!(best.len(), 1);
        assert_eq!(best[0].min_freq, 1);

        // Each distinctive term now occurs three times, so all cells survive.
        let mut docs = distinct_docs(20);
        for t in &mut docs.tokens {
            *t = vec![t[0].clone(); 3];
        }
        let grid = grid_search("toy", &docs, &[OracleLearner(&docs)], &spec, &plan);
        assert!(grid.rows.iter().all(|r| r.outcome.as_ref().unwrap().macro_f1 == 1.0));
        assert_eq!(grid.best_per_algorithm()[0].min_freq, 1);
        let mut csv = Vec::new();
        write_grid_csv(&mut csv, &[&grid]).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with(GRID_CSV_HEADER));
        assert_eq!(text.lines().filter(|l| l.ends_with(",1")).count(), 1);
    }

    #[test]
    fn delta_summary_subtracts_best_rows() {
        let row = |f: f64, best| GridRow {
            dataset: "d".into(),
            algorithm: "nb".into(),
            representation: Representation::Bow,
            min_freq: 1,
            outcome: Ok(MetricsReport {
                macro_f1: f,
                ..MetricsReport::default()
            }),
            best,
        };
        let a = GridResult {
            dataset: "all".into(),
            rows: vec![row(0.7, true)],
        };
        let b = GridResult {
            dataset: "band".into(),
            rows: vec![row(0.75, true)],
        };
        let d = delta_summary(&a, &b);
        assert!((d[0].delta.unwrap() - 0.05).abs() < 1e-12);
    }

    fn brute(cm: &ConfusionMatrix) -> (f64, f64, f64, f64) {
        let c = cm.counts;
        let f = |p: f64, r: f64| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (pp, pr) = (div(c[0][0], c[0][0] + c[1][0]), div(c[0][0], c[0][0] + c[0][1]));
        let (np, nr) = (div(c[1][1], c[1][1] + c[0][1]), div(c[1][1], c[1][1] + c[1][0]));
        let total = c[0][0] + c[0][1] + c[1][0] + c[1][1];
        ((pp + np) / 2.0, (pr + nr) / 2.0, (f(pp, pr) + f(np, nr)) / 2.0, div(c[0][0] + c[1][1], total))
    }

    proptest! {
        #[test]
        fn metrics_match_brute_force_and_class_swap(c in prop::array::uniform4(0usize..50)) {
            prop_assume!(c.iter().sum::<usize>() > 0);
            let cm = ConfusionMatrix { counts: [[c[0], c[1]], [c[2], c[3]]] };
            let m = compute_metrics(&cm).unwrap();
            let (p, r, f, a) = brute(&cm);
            prop_assert!((m.macro_precision - p).abs() < 1e-12);
            prop_assert!((m.macro_recall - r).abs() < 1e-12);
            prop_assert!((m.macro_f1 - f).abs() < 1e-12);
            prop_assert!((m.accuracy - a).abs() < 1e-12);
            let s = compute_metrics(&cm.swapped()).unwrap();
            prop_assert!((s.macro_f1 - m.macro_f1).abs() < 1e-12);
            prop_assert!((s.accuracy - m.accuracy).abs() < 1e-12);
        }

        #[test]
        fn folds_partition_with_bounded_spread(
            bits in prop::collection::vec(any::<bool>(), 20..200),
            k in 2usize..10,
            seed in any::<u64>(),
        ) {
            let l: Vec<Label> = bits.iter().map(|&b| if b { P } else { N }).collect();
            let counts = [l.iter().filter(|x| **x == P).count(), l.iter().filter(|x| **x == N).count()];
            prop_assume!(counts.iter().all(|&c| c >= k));
            let plan = stratified_kfold(&l, k, seed).unwrap();
            let mut covered = HashSet::new();
            for f in 0..k {
                let test: HashSet<usize> = plan.test_indices(f).into_iter().collect();
                let train: HashSet<usize> = plan.train_indices(f).into_iter().collect();
                prop_assert!(test.is_disjoint(&train));
                prop_assert_eq!(test.len() + train.len(), l.len());
                covered.extend(test);
            }
            prop_assert_eq!(covered.len(), l.len());
            for c in Label::ALL {
                let s = class_fold_sizes(&plan, &l, c);
                prop_assert!(s.iter().max().unwrap() - s.iter().min().unwrap() <= 1);
            }
        }
    }
}
