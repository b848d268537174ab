//! Multinomial naive Bayes, linear soft-margin SVM and a Gini random forest
//! over sparse document vectors.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{DocVector, FeatureMatrix};
use crate::label::Label;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// NB: log-odds. SVM: margin. RF: fraction of positive votes.
    pub score: f64,
}

pub trait Classifier: Send + Sync {
    fn predict(&self, vector: &DocVector) -> Result<Prediction>;
}

/// Something that trains a [`Classifier`] from a feature matrix.
pub trait Learner: Sync {
    type Model: Classifier;

    fn name(&self) -> String;

    fn fit(&self, train: &FeatureMatrix, seed: u64) -> Result<Self::Model>;
}

fn check_dims(vector: &DocVector, n_features: usize) -> Result<()> {
    match vector.max_index() {
        Some(i) if i >= n_features => Err(Error::DimensionMismatch {
            index: i,
            vocab_size: n_features,
        }),
        _ => Ok(()),
    }
}

fn require_both_classes(m: &FeatureMatrix) -> Result<[usize; 2]> {
    let counts = m.class_counts();
    if counts.contains(&0) {
        return Err(Error::SingleClass);
    }
    Ok(counts)
}

// ---------------------------------------------------------------------------
// Naive Bayes

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    /// Indexed by [`Label::index`].
    pub class_log_priors: [f64; 2],
    pub term_log_likelihoods: [Vec<f64>; 2],
    pub smoothing_alpha: f64,
}

pub fn train_nb(matrix: &FeatureMatrix, alpha: f64) -> Result<NbModel> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("smoothing alpha must be positive, got {alpha}")));
    }
    let counts = require_both_classes(matrix)?;
    let d = matrix.n_features();
    let mut mass = [vec![0.0; d], vec![0.0; d]];
    for (v, l) in matrix.vectors.iter().zip(&matrix.labels) {
        for &(i, w) in &v.entries {
            mass[l.index()][i] += w;
        }
    }
    let n = matrix.len() as f64;
    let mut priors = [0.0; 2];
    let mut liks = [Vec::new(), Vec::new()];
    for c in 0..2 {
        priors[c] = (counts[c] as f64 / n).ln();
        let total: f64 = mass[c].iter().sum();
        let denom = (total + alpha * d as f64).ln();
        liks[c] = mass[c].iter().map(|&m| (m + alpha).ln() - denom).collect();
    }
    Ok(NbModel {
        class_log_priors: priors,
        term_log_likelihoods: liks,
        smoothing_alpha: alpha,
    })
}

impl NbModel {
    pub fn n_features(&self) -> usize {
        self.term_log_likelihoods[0].len()
    }

    /// Unnormalized log joint per class.
    pub fn log_scores(&self, vector: &DocVector) -> Result<[f64; 2]> {
        check_dims(vector, self.n_features())?;
        let mut s = self.class_log_priors;
        for (c, sc) in s.iter_mut().enumerate() {
            for &(i, w) in &vector.entries {
                *sc += w * self.term_log_likelihoods[c][i];
            }
        }
        Ok(s)
    }

    /// Normalized class posteriors.
    pub fn posterior(&self, vector: &DocVector) -> Result<[f64; 2]> {
        let s = self.log_scores(vector)?;
        let m = s[0].max(s[1]);
        let z = (s[0] - m).exp() + (s[1] - m).exp();
        Ok([(s[0] - m).exp() / z, (s[1] - m).exp() / z])
    }
}

impl Classifier for NbModel {
    fn predict(&self, vector: &DocVector) -> Result<Prediction> {
        let s = self.log_scores(vector)?;
        let score = s[Label::Positive.index()] - s[Label::Negative.index()];
        Ok(Prediction {
            label: Label::from_score(score),
            score,
        })
    }
}

// ---------------------------------------------------------------------------
// Linear SVM

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Objective of the retained averaged iterate after each epoch.
    pub objective_trace: Vec<f64>,
}

/// `(||w||^2 + b^2) / (2 c n) + mean hinge loss`. The bias rides along as a
/// weight on a constant feature, so it is regularized with `w`.
pub fn svm_objective(matrix: &FeatureMatrix, weights: &[f64], bias: f64, c: f64) -> f64 {
    let n = matrix.len() as f64;
    let norm2: f64 = weights.iter().map(|w| w * w).sum::<f64>() + bias * bias;
    let hinge: f64 = matrix
        .vectors
        .iter()
        .zip(&matrix.labels)
        .map(|(v, l)| (1.0 - l.sign() * (dot(weights, v) + bias)).max(0.0))
        .sum();
    norm2 / (2.0 * c * n) + hinge / n
}

fn dot(w: &[f64], v: &DocVector) -> f64 {
    v.entries.iter().map(|&(i, x)| w[i] * x).sum()
}

/// Stochastic subgradient descent on the primal with step `1 / (lambda t)`,
/// `lambda = 1 / (c n)`, one seeded shuffle per epoch and iterate averaging.
///
/// With that step the iterate is exactly `w_t = v_t / t`, where `v_t` is
/// `c n` times the sum of `y x` over margin violations so far, so the update
/// stays sparse. The running average is kept as `(u + h v) / t` with `h` the
/// harmonic number, following the usual lazy-averaging identity. After each
/// epoch the averaged iterate replaces the current model only if it does not
/// increase the objective.
pub fn train_svm(matrix: &FeatureMatrix, c: f64, epochs: usize, seed: u64) -> Result<SvmModel> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("svm c must be positive, got {c}")));
    }
    if epochs == 0 {
        return Err(Error::InvalidParameter("svm epochs must be at least 1".into()));
    }
    require_both_classes(matrix)?;
    let n = matrix.len();
    let d = matrix.n_features();
    let step = c * n as f64;

    // Slot d holds the bias.
    let mut v = vec![0.0; d + 1];
    let mut u = vec![0.0; d + 1];
    let mut harmonic = 0.0;
    let mut t = 0usize;

    let mut rng = seed::rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut trace = Vec::with_capacity(epochs);

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            t += 1;
            let x = &matrix.vectors[k];
            let y = matrix.labels[k].sign();
            // w_t = v / (t - 1); at t = 1 the iterate is zero.
            let margin = if t == 1 {
                0.0
            } else {
                y * (dot(&v, x) + v[d]) / (t - 1) as f64
            };
            if margin < 1.0 {
                let delta = step * y;
                for &(i, xi) in &x.entries {
                    u[i] -= harmonic * delta * xi;
                    v[i] += delta * xi;
                }
                u[d] -= harmonic * delta;
                v[d] += delta;
            }
            harmonic += 1.0 / t as f64;
        }
        let avg: Vec<f64> = u
            .iter()
            .zip(&v)
            .map(|(ui, vi)| (ui + harmonic * vi) / t as f64)
            .collect();
        let (w_avg, b_avg) = (&avg[..d], avg[d]);
        let obj = svm_objective(matrix, w_avg, b_avg, c);
        match &best {
            Some((_, _, best_obj)) if obj > *best_obj => {}
            _ => best = Some((w_avg.to_vec(), b_avg, obj)),
        }
        trace.push(best.as_ref().map(|b| b.2).expect("set above"));
    }

    let (weights, bias, _) = best.expect("at least one epoch");
    Ok(SvmModel {
        weights,
        bias,
        c,
        epochs,
        seed,
        objective_trace: trace,
    })
}

impl SvmModel {
    pub fn decision_value(&self, vector: &DocVector) -> Result<f64> {
        check_dims(vector, self.weights.len())?;
        Ok(dot(&self.weights, vector) + self.bias)
    }
}

impl Classifier for SvmModel {
    fn predict(&self, vector: &DocVector) -> Result<Prediction> {
        let score = self.decision_value(vector)?;
        Ok(Prediction {
            label: Label::from_score(score),
            score,
        })
    }
}

// ---------------------------------------------------------------------------
// Random forest

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub n_trees: usize,
    /// Features tried per node; `None` means `floor(sqrt(n_features))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub min_samples_split: usize,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 100,
            max_features: None,
            bootstrap: true,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: Label,
        counts: [usize; 2],
    },
}

/// Flat decision tree; node 0 is the root. Samples go left when
/// `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, vector: &DocVector) -> Label {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label, .. } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if vector.get(*feature) <= *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub max_features: usize,
    pub params: RfParams,
    pub seed: u64,
}

fn majority(counts: [usize; 2]) -> Label {
    if counts[Label::Positive.index()] > counts[Label::Negative.index()] {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// `n * gini` for a node with the given class counts.
fn weighted_gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (a, b) = (counts[0] as f64, counts[1] as f64);
    n - (a * a + b * b) / n
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Best Gini split on one feature. `nonzero` holds the feature's nonzero
/// values in the node; the remaining samples share the value 0. Returns
/// `None` when the feature is constant over the node.
fn best_split_on(feature: usize, nonzero: &mut [(f64, Label)], node_counts: [usize; 2]) -> Option<SplitCandidate> {
    nonzero.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_node = node_counts[0] + node_counts[1];
    let mut zeros = node_counts;
    for (_, l) in nonzero.iter() {
        zeros[l.index()] -= 1;
    }
    let n_zero = n_node - nonzero.len();
    if n_zero == 0 && nonzero.first()?.0 == nonzero.last()?.0 {
        return None;
    }

    // Walk distinct values in ascending order, with the zero block placed
    // before the first positive value.
    let split_at = nonzero.partition_point(|(v, _)| *v < 0.0);
    let mut groups: Vec<(f64, [usize; 2])> = Vec::new();
    let mut push = |v: f64, c: [usize; 2]| match groups.last_mut() {
        Some((last, acc)) if *last == v => {
            acc[0] += c[0];
            acc[1] += c[1];
        }
        _ => groups.push((v, c)),
    };
    let one = |l: Label| {
        let mut c = [0; 2];
        c[l.index()] = 1;
        c
    };
    for &(v, l) in &nonzero[..split_at] {
        push(v, one(l));
    }
    if n_zero > 0 {
        push(0.0, zeros);
    }
    for &(v, l) in &nonzero[split_at..] {
        push(v, one(l));
    }

    let mut left = [0usize; 2];
    let mut best: Option<SplitCandidate> = None;
    for w in groups.windows(2) {
        left[0] += w[0].1[0];
        left[1] += w[0].1[1];
        let right = [node_counts[0] - left[0], node_counts[1] - left[1]];
        let impurity = weighted_gini(left) + weighted_gini(right);
        if best.as_ref().map_or(true, |b| impurity < b.impurity) {
            best = Some(SplitCandidate {
                feature,
                threshold: 0.5 * (w[0].0 + w[1].0),
                impurity,
            });
        }
    }
    best
}

fn grow_tree(matrix: &FeatureMatrix, samples: Vec<usize>, max_features: usize, params: &RfParams, seed: u64) -> Tree {
    let d = matrix.n_features();
    let mut rng = seed::rng(seed);
    let mut nodes: Vec<Node> = Vec::new();
    // Per-feature bucket bounds into `values`, reset after each node.
    let mut count = vec![0usize; d];
    let mut offset = vec![0usize; d];
    let mut cursor = vec![0usize; d];
    let mut values: Vec<(f64, Label)> = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
    nodes.push(Node::Leaf {
        label: Label::Negative,
        counts: [0, 0],
    });
    stack.push((0, samples));

    while let Some((slot, idx)) = stack.pop() {
        let mut counts = [0usize; 2];
        for &s in &idx {
            counts[matrix.labels[s].index()] += 1;
        }
        let leaf = Node::Leaf {
            label: majority(counts),
            counts,
        };
        if counts[0] == 0 || counts[1] == 0 || idx.len() < params.min_samples_split {
            nodes[slot] = leaf;
            continue;
        }

        // Bucket the node's nonzero entries by feature. Only features that
        // occur here can vary inside the node.
        let mut present = Vec::new();
        for &s in &idx {
            for &(f, _) in &matrix.vectors[s].entries {
                if count[f] == 0 {
                    present.push(f);
                }
                count[f] += 1;
            }
        }
        present.sort_unstable();
        let mut total = 0;
        for &f in &present {
            offset[f] = total;
            total += count[f];
        }
        values.clear();
        values.resize(total, (0.0, Label::Negative));
        for &f in &present {
            cursor[f] = offset[f];
        }
        for &s in &idx {
            let l = matrix.labels[s];
            for &(f, w) in &matrix.vectors[s].entries {
                values[cursor[f]] = (w, l);
                cursor[f] += 1;
            }
        }
        present.shuffle(&mut rng);

        let mut best: Option<SplitCandidate> = None;
        let mut tried = 0;
        for &f in &present {
            if tried == max_features {
                break;
            }
            let bucket = &mut values[offset[f]..offset[f] + count[f]];
            let Some(cand) = best_split_on(f, bucket, counts) else {
                continue;
            };
            tried += 1;
            let better = match &best {
                None => true,
                Some(b) => cand.impurity < b.impurity || (cand.impurity == b.impurity && cand.feature < b.feature),
            };
            if better {
                best = Some(cand);
            }
        }
        for &f in &present {
            count[f] = 0;
        }
        let Some(split) = best else {
            nodes[slot] = leaf;
            continue;
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&s| matrix.vectors[s].get(split.feature) <= split.threshold);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(leaf.clone());
        nodes.push(leaf);
        nodes[slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        stack.push((right, right_idx));
        stack.push((left, left_idx));
    }
    Tree { nodes }
}

pub fn train_rf(matrix: &FeatureMatrix, params: &RfParams, seed: u64) -> Result<RfModel> {
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    if params.max_features == Some(0) {
        return Err(Error::InvalidParameter("max_features must be at least 1".into()));
    }
    require_both_classes(matrix)?;
    let d = matrix.n_features();
    let max_features = params
        .max_features
        .unwrap_or_else(|| ((d as f64).sqrt().floor() as usize).max(1))
        .min(d.max(1));
    let n = matrix.len();

    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_seed = seed::derive(seed, &format!("tree/{t}"));
            let samples: Vec<usize> = if params.bootstrap {
                use rand::Rng as _;
                let mut rng = seed::rng(seed::derive(tree_seed, "bootstrap"));
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(matrix, samples, max_features, params, seed::derive(tree_seed, "features"))
        })
        .collect();
    Ok(RfModel {
        trees,
        n_features: d,
        max_features,
        params: *params,
        seed,
    })
}

impl Classifier for RfModel {
    fn predict(&self, vector: &DocVector) -> Result<Prediction> {
        check_dims(vector, self.n_features)?;
        let pos = self
            .trees
            .iter()
            .filter(|t| t.predict(vector) == Label::Positive)
            .count();
        let neg = self.trees.len() - pos;
        Ok(Prediction {
            label: if pos > neg { Label::Positive } else { Label::Negative },
            score: pos as f64 / self.trees.len() as f64,
        })
    }
}

// ---------------------------------------------------------------------------
// Algorithm selection

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Nb,
    Svm,
    Rf,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [AlgorithmKind::Rf, AlgorithmKind::Nb, AlgorithmKind::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::Nb => "nb",
            AlgorithmKind::Svm => "svm",
            AlgorithmKind::Rf => "rf",
        }
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nb" | "naive_bayes" => Ok(AlgorithmKind::Nb),
            "svm" => Ok(AlgorithmKind::Svm),
            "rf" | "random_forest" => Ok(AlgorithmKind::Rf),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub nb_alpha: f64,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub rf: RfParams,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            nb_alpha: 1.0,
            svm_c: 0.3,
            svm_epochs: 20,
            rf: RfParams::default(),
        }
    }
}

/// An algorithm bound to its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Algorithm {
    pub kind: AlgorithmKind,
    pub hyper: Hyperparams,
}

impl Algorithm {
    pub fn new(kind: AlgorithmKind, hyper: Hyperparams) -> Self {
        Algorithm { kind, hyper }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Nb(NbModel),
    Svm(SvmModel),
    Rf(RfModel),
}

impl Classifier for AnyModel {
    fn predict(&self, vector: &DocVector) -> Result<Prediction> {
        match self {
            AnyModel::Nb(m) => m.predict(vector),
            AnyModel::Svm(m) => m.predict(vector),
            AnyModel::Rf(m) => m.predict(vector),
        }
    }
}

impl Learner for Algorithm {
    type Model = AnyModel;

    fn name(&self) -> String {
        self.kind.as_str().to_string()
    }

    fn fit(&self, train: &FeatureMatrix, seed: u64) -> Result<AnyModel> {
        if train.n_features() == 0 {
            return Err(Error::EmptyVocabulary {
                min_freq: train.vocabulary.min_word_frequency(),
            });
        }
        Ok(match self.kind {
            AlgorithmKind::Nb => AnyModel::Nb(train_nb(train, self.hyper.nb_alpha)?),
            AlgorithmKind::Svm => AnyModel::Svm(train_svm(train, self.hyper.svm_c, self.hyper.svm_epochs, seed)?),
            AlgorithmKind::Rf => AnyModel::Rf(train_rf(train, &self.hyper.rf, seed)?),
        })
    }
}

// ---------------------------------------------------------------------------
// Text model format

const MAGIC: &str = "sentiment-pipeline-model";
const FORMAT_VERSION: u32 = 1;

fn join_floats(xs: &[f64]) -> String {
    let mut s = String::with_capacity(xs.len() * 8);
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{x}").expect("write to string");
    }
    s
}

impl AnyModel {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            AnyModel::Nb(_) => AlgorithmKind::Nb,
            AnyModel::Svm(_) => AlgorithmKind::Svm,
            AnyModel::Rf(_) => AlgorithmKind::Rf,
        }
    }

    fn n_features(&self) -> usize {
        match self {
            AnyModel::Nb(m) => m.n_features(),
            AnyModel::Svm(m) => m.weights.len(),
            AnyModel::Rf(m) => m.n_features,
        }
    }

    /// Writes the versioned text format: a header of `key value` lines, a
    /// `---` separator, then the parameters.
    pub fn save<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{MAGIC} {FORMAT_VERSION}")?;
        writeln!(w, "kind {}", self.kind().as_str())?;
        writeln!(w, "vocab_size {}", self.n_features())?;
        match self {
            AnyModel::Nb(m) => {
                writeln!(w, "alpha {}", m.smoothing_alpha)?;
                writeln!(w, "---")?;
                for l in Label::ALL {
                    writeln!(w, "prior {l} {}", m.class_log_priors[l.index()])?;
                }
                for l in Label::ALL {
                    writeln!(w, "loglik {l} {}", join_floats(&m.term_log_likelihoods[l.index()]))?;
                }
            }
            AnyModel::Svm(m) => {
                writeln!(w, "c {}", m.c)?;
                writeln!(w, "epochs {}", m.epochs)?;
                writeln!(w, "seed {}", m.seed)?;
                writeln!(w, "---")?;
                writeln!(w, "bias {}", m.bias)?;
                writeln!(w, "weights {}", join_floats(&m.weights))?;
                writeln!(w, "objective {}", join_floats(&m.objective_trace))?;
            }
            AnyModel::Rf(m) => {
                writeln!(w, "n_trees {}", m.trees.len())?;
                writeln!(w, "max_features {}", m.max_features)?;
                writeln!(w, "bootstrap {}", m.params.bootstrap)?;
                writeln!(w, "min_samples_split {}", m.params.min_samples_split)?;
                writeln!(w, "seed {}", m.seed)?;
                writeln!(w, "---")?;
                for tree in &m.trees {
                    writeln!(w, "tree {}", tree.nodes.len())?;
                    for node in &tree.nodes {
                        match node {
                            Node::Split {
                                feature,
                                threshold,
                                left,
                                right,
                            } => writeln!(w, "split {feature} {threshold} {left} {right}")?,
                            Node::Leaf { label, counts } => writeln!(w, "leaf {label} {} {}", counts[0], counts[1])?,
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<AnyModel> {
        let bad = |m: &str| Error::Model(m.to_string());
        let lines: Vec<String> = r
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::Model(e.to_string()))?;
        let mut it = lines.iter().map(String::as_str);

        let first = it.next().ok_or_else(|| bad("empty file"))?;
        if first != format!("{MAGIC} {FORMAT_VERSION}") {
            return Err(bad("unsupported header"));
        }
        let mut header = std::collections::HashMap::new();
        for line in it.by_ref() {
            if line == "---" {
                break;
            }
            let (k, v) = line.split_once(' ').ok_or_else(|| bad("bad header line"))?;
            header.insert(k, v);
        }
        let get = |k: &str| header.get(k).copied().ok_or_else(|| Error::Model(format!("missing header {k}")));
        fn num<T: FromStr>(s: &str) -> Result<T> {
            s.parse().map_err(|_| Error::Model(format!("bad number {s:?}")))
        }
        let floats = |s: &str| -> Result<Vec<f64>> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(' ').map(num::<f64>).collect()
        };
        let field = |line: Option<&str>, key: &str| -> Result<String> {
            let line = line.ok_or_else(|| Error::Model(format!("missing {key}")))?;
            let rest = line
                .strip_prefix(key)
                .ok_or_else(|| Error::Model(format!("expected {key}")))?;
            Ok(rest.strip_prefix(' ').unwrap_or(rest).to_string())
        };
        let vocab_size: usize = num(get("vocab_size")?)?;
        let kind: AlgorithmKind = get("kind")?.parse().map_err(|e: String| Error::Model(e))?;

        let model = match kind {
            AlgorithmKind::Nb => {
                let mut priors = [0.0; 2];
                for l in Label::ALL {
                    priors[l.index()] = num(&field(it.next(), &format!("prior {l}"))?)?;
                }
                let mut liks = [Vec::new(), Vec::new()];
                for l in Label::ALL {
                    liks[l.index()] = floats(&field(it.next(), &format!("loglik {l}"))?)?;
                }
                AnyModel::Nb(NbModel {
                    class_log_priors: priors,
                    term_log_likelihoods: liks,
                    smoothing_alpha: num(get("alpha")?)?,
                })
            }
            AlgorithmKind::Svm => {
                let bias = num(&field(it.next(), "bias")?)?;
                let weights = floats(&field(it.next(), "weights")?)?;
                let objective_trace = floats(&field(it.next(), "objective")?)?;
                AnyModel::Svm(SvmModel {
                    weights,
                    bias,
                    c: num(get("c")?)?,
                    epochs: num(get("epochs")?)?,
                    seed: num(get("seed")?)?,
                    objective_trace,
                })
            }
            AlgorithmKind::Rf => {
                let n_trees: usize = num(get("n_trees")?)?;
                let mut trees = Vec::with_capacity(n_trees);
                for _ in 0..n_trees {
                    let n_nodes: usize = num(&field(it.next(), "tree")?)?;
                    let mut nodes = Vec::with_capacity(n_nodes);
                    for _ in 0..n_nodes {
                        let line = it.next().ok_or_else(|| bad("truncated tree"))?;
                        let parts: Vec<&str> = line.split(' ').collect();
                        let node = match parts.as_slice() {
                            ["split", f, t, l, r] => Node::Split {
                                feature: num(f)?,
                                threshold: num(t)?,
                                left: num(l)?,
                                right: num(r)?,
                            },
                            ["leaf", label, p, n] => Node::Leaf {
                                label: label.parse().map_err(|e: String| Error::Model(e))?,
                                counts: [num(p)?, num(n)?],
                            },
                            _ => return Err(bad("bad node line")),
                        };
                        nodes.push(node);
                    }
                    for node in &nodes {
                        if let Node::Split { left, right, .. } = node {
                            if *left >= n_nodes || *right >= n_nodes {
                                return Err(bad("child index out of range"));
                            }
                        }
                    }
                    trees.push(Tree { nodes });
                }
                AnyModel::Rf(RfModel {
                    trees,
                    n_features: vocab_size,
                    max_features: num(get("max_features")?)?,
                    params: RfParams {
                        n_trees,
                        max_features: Some(num(get("max_features")?)?),
                        bootstrap: num(get("bootstrap")?)?,
                        min_samples_split: num(get("min_samples_split")?)?,
                    },
                    seed: num(get("seed")?)?,
                })
            }
        };
        if model.n_features() != vocab_size {
            return Err(bad("parameter length does not match vocab_size"));
        }
        Ok(model)
    }
}
