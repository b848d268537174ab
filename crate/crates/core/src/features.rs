//! Tokenization, vocabulary construction and document vectorization.
//!
//! The vocabulary keeps a term only when its collection frequency (total
//! occurrences over the documents it was built from) reaches the configured
//! minimum. Indices are assigned in lexicographic term order, so the same
//! documents and threshold always produce the same index.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// Lowercases and splits on every character that is neither alphanumeric
/// nor an apostrophe.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Bow,
    Tfidf,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Bow => "bow",
            Representation::Tfidf => "tfidf",
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bow" => Ok(Representation::Bow),
            "tfidf" | "tf-idf" => Ok(Representation::Tfidf),
            other => Err(format!("unknown representation {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    coll_freq: Vec<usize>,
    n_documents: usize,
    min_word_frequency: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self, index: usize) -> usize {
        self.doc_freq[index]
    }

    pub fn coll_freq(&self, index: usize) -> usize {
        self.coll_freq[index]
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn min_word_frequency(&self) -> usize {
        self.min_word_frequency
    }

    /// `1 + ln(n_documents / doc_freq)`.
    pub fn idf(&self, index: usize) -> f64 {
        1.0 + (self.n_documents as f64 / self.doc_freq[index] as f64).ln()
    }

    /// Writes `term<TAB>index<TAB>doc_freq<TAB>coll_freq` rows.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, term) in self.terms.iter().enumerate() {
            writeln!(w, "{term}\t{i}\t{}\t{}", self.doc_freq[i], self.coll_freq[i])?;
        }
        Ok(())
    }
}

/// Builds a vocabulary from tokenized training documents.
///
/// Returns an empty vocabulary when `min_freq` exceeds every term's
/// collection frequency; training on it is what fails.
pub fn build_vocabulary<S: AsRef<str>>(documents: &[Vec<S>], min_freq: usize) -> Result<Vocabulary> {
    if documents.is_empty() {
        return Err(Error::EmptyInput);
    }
    if min_freq == 0 {
        return Err(Error::InvalidParameter("min_freq must be at least 1".into()));
    }
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for doc in documents {
        let mut seen: Vec<&str> = Vec::with_capacity(doc.len());
        for tok in doc {
            let tok = tok.as_ref();
            counts.entry(tok).or_default().1 += 1;
            seen.push(tok);
        }
        seen.sort_unstable();
        seen.dedup();
        for tok in seen {
            counts.get_mut(tok).expect("counted above").0 += 1;
        }
    }

    let mut vocab = Vocabulary {
        terms: Vec::new(),
        index: HashMap::new(),
        doc_freq: Vec::new(),
        coll_freq: Vec::new(),
        n_documents: documents.len(),
        min_word_frequency: min_freq,
    };
    for (term, (df, cf)) in counts {
        if cf >= min_freq {
            vocab.index.insert(term.to_string(), vocab.terms.len());
            vocab.terms.push(term.to_string());
            vocab.doc_freq.push(df);
            vocab.coll_freq.push(cf);
        }
    }
    Ok(vocab)
}

/// Sparse document vector with entries sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub entries: Vec<(usize, f64)>,
    pub representation: Representation,
}

impl DocVector {
    pub fn empty(representation: Representation) -> Self {
        DocVector {
            entries: Vec::new(),
            representation,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    pub fn scaled(&self, factor: f64) -> DocVector {
        DocVector {
            entries: self.entries.iter().map(|&(i, w)| (i, w * factor)).collect(),
            representation: self.representation,
        }
    }
}

fn term_counts<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<(usize, f64)> {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for tok in tokens {
        if let Some(i) = vocab.index_of(tok.as_ref()) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    counts.into_iter().collect()
}

pub fn vectorize_bow<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> DocVector {
    DocVector {
        entries: term_counts(tokens, vocab),
        representation: Representation::Bow,
    }
}

/// TF-IDF with raw term frequency and `idf = 1 + ln(N / df)` from the
/// vocabulary's frozen document frequencies.
pub fn vectorize_tfidf<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> DocVector {
    let mut entries = term_counts(tokens, vocab);
    for (i, w) in &mut entries {
        *w *= vocab.idf(*i);
    }
    DocVector {
        entries,
        representation: Representation::Tfidf,
    }
}

pub fn vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, representation: Representation) -> DocVector {
    match representation {
        Representation::Bow => vectorize_bow(tokens, vocab),
        Representation::Tfidf => vectorize_tfidf(tokens, vocab),
    }
}

#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub vectors: Vec<DocVector>,
    pub labels: Vec<Label>,
    pub vocabulary: Arc<Vocabulary>,
}

impl FeatureMatrix {
    pub fn new(vectors: Vec<DocVector>, labels: Vec<Label>, vocabulary: Arc<Vocabulary>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        for v in &vectors {
            if let Some(i) = v.max_index() {
                if i >= vocabulary.len() {
                    return Err(Error::DimensionMismatch {
                        index: i,
                        vocab_size: vocabulary.len(),
                    });
                }
            }
        }
        Ok(FeatureMatrix {
            vectors,
            labels,
            vocabulary,
        })
    }

    /// Vectorizes tokenized documents against `vocabulary`.
    pub fn from_tokens<S: AsRef<str>>(
        documents: &[Vec<S>],
        labels: Vec<Label>,
        vocabulary: Arc<Vocabulary>,
        representation: Representation,
    ) -> Result<Self> {
        let vectors = documents
            .iter()
            .map(|d| vectorize(d, &vocabulary, representation))
            .collect();
        FeatureMatrix::new(vectors, labels, vocabulary)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Sparse triplet CSV `doc_index,term_index,weight`.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "doc_index,term_index,weight")?;
        for (d, v) in self.vectors.iter().enumerate() {
            for &(t, weight) in &v.entries {
                writeln!(w, "{d},{t},{weight}")?;
            }
        }
        Ok(())
    }

    /// Labels CSV `doc_index,label`.
    pub fn write_labels<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "doc_index,label")?;
        for (d, l) in self.labels.iter().enumerate() {
            writeln!(w, "{d},{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(raw: &[&[&str]]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    // Independent character-class scan used as the tokenizer oracle.
    fn scan_tokens(text: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = String::new();
        for c in text.chars() {
            if c.is_alphanumeric() || c == '\'' {
                cur.extend(c.to_lowercase());
            } else if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Covid-19 vaccines!"), vec!["covid", "19", "vaccines"]);
        assert_eq!(tokenize("Covid-19 vaccines!"), scan_tokens("Covid-19 vaccines!"));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("don't"), vec!["don't"]);
    }

    #[test]
    fn vocabulary_prunes_by_collection_frequency() {
        let d = docs(&[&["a", "a", "b"], &["b", "c"]]);
        let v = build_vocabulary(&d, 2).unwrap();
        assert_eq!(v.terms(), &["a".to_string(), "b".to_string()]);
        assert_eq!(v.coll_freq(0), 2);
        assert_eq!(v.doc_freq(0), 1);
        assert_eq!(v.doc_freq(1), 2);

        let all = build_vocabulary(&d, 1).unwrap();
        assert_eq!(all.len(), 3);

        let none = build_vocabulary(&d, 5).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn vocabulary_rejects_empty_corpus_and_zero_threshold() {
        let empty: Vec<Vec<String>> = Vec::new();
        assert!(build_vocabulary(&empty, 1).is_err());
        assert!(build_vocabulary(&docs(&[&["a"]]), 0).is_err());
    }

    #[test]
    fn bow_counts() {
        let v = build_vocabulary(&docs(&[&["a", "b"]]), 1).unwrap();
        let x = vectorize_bow(&["a", "a", "b"], &v);
        assert_eq!(x.entries, vec![(0, 2.0), (1, 1.0)]);
        assert!(vectorize_bow(&["zzz"], &v).is_empty());
    }

    #[test]
    fn bow_matches_nested_loop_tally() {
        let d = docs(&[&["x", "y", "x"], &["y", "z"], &["z", "z", "x", "w"]]);
        let v = build_vocabulary(&d, 1).unwrap();
        for doc in &d {
            let x = vectorize_bow(doc, &v);
            for (t, term) in v.terms().iter().enumerate() {
                let mut n = 0.0;
                for tok in doc {
                    if tok == term {
                        n += 1.0;
                    }
                }
                assert_eq!(x.get(t), n);
            }
        }
    }

    #[test]
    fn tfidf_examples() {
        // "a" in all four docs, "b" in one.
        let d = docs(&[&["a", "b"], &["a"], &["a"], &["a"]]);
        let v = build_vocabulary(&d, 1).unwrap();
        let x = vectorize_tfidf(&["a", "a", "a"], &v);
        assert_eq!(x.entries, vec![(0, 3.0)]);
        let y = vectorize_tfidf(&["b", "b"], &v);
        assert!((y.get(1) - 4.772588722239781).abs() < 1e-12);
        assert!(vectorize_tfidf::<&str>(&[], &v).is_empty());
    }

    proptest! {
        #[test]
        fn tokenizer_matches_scan(text in "\\PC{0,40}") {
            prop_assert_eq!(tokenize(&text), scan_tokens(&text));
        }

        #[test]
        fn vocabulary_is_deterministic_and_monotone(
            raw in prop::collection::vec(prop::collection::vec(0u8..12, 0..15), 1..12),
            lo in 1usize..5,
            extra in 0usize..4,
        ) {
            let d: Vec<Vec<String>> = raw.iter()
                .map(|doc| doc.iter().map(|t| format!("t{t}")).collect())
                .collect();
            let a = build_vocabulary(&d, lo).unwrap();
            let b = build_vocabulary(&d, lo).unwrap();
            prop_assert_eq!(&a, &b);
            let hi = build_vocabulary(&d, lo + extra).unwrap();
            for t in hi.terms() {
                prop_assert!(a.index_of(t).is_some());
            }
            for i in 0..a.len() {
                prop_assert!(a.coll_freq(i) >= lo);
            }
            // BOW mass equals the in-vocabulary token count.
            for doc in &d {
                let in_vocab = doc.iter().filter(|t| a.index_of(t).is_some()).count();
                prop_assert_eq!(vectorize_bow(doc, &a).total_weight(), in_vocab as f64);
            }
        }
    }

    #[test]
    fn tfidf_monotone_in_tf_and_df() {
        // term "r" has df 1, "c" has df 3, both in a 4-document corpus
        let d = docs(&[&["r", "c"], &["c"], &["c"], &["q"]]);
        let v = build_vocabulary(&d, 1).unwrap();
        let r = v.index_of("r").unwrap();
        let c = v.index_of("c").unwrap();
        let one = vectorize_tfidf(&["r"], &v).get(r);
        let two = vectorize_tfidf(&["r", "r"], &v).get(r);
        assert!(two > one);
        let common = vectorize_tfidf(&["c"], &v).get(c);
        assert!(common < one);
    }
}
