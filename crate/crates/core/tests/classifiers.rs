use std::sync::Arc;

use proptest::prelude::*;
use sentiment_pipeline::classify::{train_nb, train_rf, train_svm, Classifier, RfParams};
use sentiment_pipeline::features::{build_vocabulary, FeatureMatrix, Representation};
use sentiment_pipeline::Label;

fn matrix(docs: &[Vec<String>], labels: &[bool], rep: Representation) -> FeatureMatrix {
    let vocab = Arc::new(build_vocabulary(docs, 1).unwrap());
    let labels = labels.iter().map(|&p| if p { Label::Positive } else { Label::Negative }).collect();
    FeatureMatrix::from_tokens(docs, labels, vocab, rep).unwrap()
}

/// Random corpora over a 6-term alphabet with both classes present.
fn corpus() -> impl Strategy<Value = (Vec<Vec<String>>, Vec<bool>)> {
    (4usize..24)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(0u8..6, 1..8), n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_filter("both classes", |(_, l)| l.iter().any(|&p| p) && l.iter().any(|&p| !p))
        .prop_map(|(docs, labels)| {
            let docs = docs
                .into_iter()
                .map(|d| d.into_iter().map(|t| format!("t{t}")).collect())
                .collect();
            (docs, labels)
        })
}

fn flipped(m: &FeatureMatrix) -> FeatureMatrix {
    FeatureMatrix::new(m.vectors.clone(), m.labels.iter().map(|l| l.flipped()).collect(), m.vocabulary.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nb_matches_smoothed_counts((docs, labels) in corpus(), alpha in 0.1f64..3.0) {
        let m = matrix(&docs, &labels, Representation::Bow);
        let model = train_nb(&m, alpha).unwrap();
        let v = m.vocabulary.len() as f64;
        for (class, positive) in [(Label::Positive, true), (Label::Negative, false)] {
            let members: Vec<&Vec<String>> = docs.iter().zip(&labels).filter(|(_, &l)| l == positive).map(|(d, _)| d).collect();
            let prior = (members.len() as f64 / docs.len() as f64).ln();
            prop_assert!((model.class_log_priors[class.index()] - prior).abs() < 1e-12);
            let total: usize = members.iter().map(|d| d.len()).sum();
            for term in m.vocabulary.terms() {
                let count = members.iter().flat_map(|d| d.iter()).filter(|t| *t == term).count();
                let want = ((count as f64 + alpha) / (total as f64 + alpha * v)).ln();
                let j = m.vocabulary.index_of(term).unwrap();
                prop_assert!((model.term_log_likelihoods[class.index()][j] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svm_label_flip_negates_the_model((docs, labels) in corpus(), c in 0.05f64..5.0, seed in any::<u64>()) {
        let m = matrix(&docs, &labels, Representation::Tfidf);
        let a = train_svm(&m, c, 8, seed).unwrap();
        let b = train_svm(&flipped(&m), c, 8, seed).unwrap();
        prop_assert_eq!(a.bias, -b.bias);
        for (x, y) in a.weights.iter().zip(&b.weights) {
            prop_assert_eq!(*x, -*y);
        }
        prop_assert_eq!(a.objective_trace, b.objective_trace);
    }

    #[test]
    fn svm_trace_never_increases((docs, labels) in corpus(), c in 0.05f64..5.0, seed in any::<u64>()) {
        let m = matrix(&docs, &labels, Representation::Bow);
        let model = train_svm(&m, c, 10, seed).unwrap();
        prop_assert_eq!(model.objective_trace.len(), 10);
        prop_assert!(model.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

fn exhaustive_forest() -> RfParams {
    RfParams {
        n_trees: 5,
        max_features: Some(usize::MAX),
        bootstrap: false,
        min_samples_split: 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unbootstrapped_forest_fits_distinct_training_vectors((docs, labels) in corpus(), seed in any::<u64>()) {
        let m = matrix(&docs, &labels, Representation::Bow);
        let model = train_rf(&m, &exhaustive_forest(), seed).unwrap();
        for (i, v) in m.vectors.iter().enumerate() {
            let twins = m.vectors.iter().zip(&m.labels).filter(|(w, _)| *w == v).map(|(_, l)| *l);
            if twins.clone().all(|l| l == m.labels[i]) {
                prop_assert_eq!(model.predict(v).unwrap().label, m.labels[i]);
            }
        }
    }

    #[test]
    fn unbootstrapped_forest_ignores_duplication((docs, labels) in corpus(), seed in any::<u64>()) {
        let m = matrix(&docs, &labels, Representation::Bow);
        let doubled = FeatureMatrix::new(
            m.vectors.iter().chain(&m.vectors).cloned().collect(),
            m.labels.iter().chain(&m.labels).copied().collect(),
            m.vocabulary.clone(),
        )
        .unwrap();
        let a = train_rf(&m, &exhaustive_forest(), seed).unwrap();
        let b = train_rf(&doubled, &exhaustive_forest(), seed).unwrap();
        for v in &m.vectors {
            prop_assert_eq!(a.predict(v).unwrap(), b.predict(v).unwrap());
        }
    }
}

#[test]
fn forest_does_not_depend_on_thread_count() {
    let docs: Vec<Vec<String>> = (0..60)
        .map(|i| (0..6).map(|j| format!("t{}", (i * 7 + j * 3) % 13)).collect())
        .collect();
    let labels: Vec<bool> = (0..60).map(|i| (i * 7) % 13 < 6).collect();
    let m = matrix(&docs, &labels, Representation::Tfidf);
    let train = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| train_rf(&m, &RfParams { n_trees: 40, ..RfParams::default() }, 9).unwrap())
    };
    assert_eq!(train(1), train(4));
}
