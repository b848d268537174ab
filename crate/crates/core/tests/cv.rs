use rand::seq::SliceRandom;
use sentiment_pipeline::classify::{Algorithm, AlgorithmKind, Hyperparams};
use sentiment_pipeline::corpus::{filter_by_length, LengthBand, Message};
use sentiment_pipeline::eval::{cross_validate, stratified_kfold, CvOptions, CvPlan, LabeledDocs, Pooling};
use sentiment_pipeline::features::Representation;
use sentiment_pipeline::lexsent::Labeler;
use sentiment_pipeline::seed::rng;
use sentiment_pipeline::synth::{planted_corpus, PlantedParams};

fn planted_docs(n: usize, seed: u64) -> LabeledDocs {
    let labeler = Labeler::demo();
    let params = PlantedParams {
        n_messages: n,
        ..PlantedParams::default()
    };
    let planted = planted_corpus(&params, &labeler.valence, &labeler.polarity, seed);
    let messages: Vec<Message> = planted.records.iter().map(Message::from_raw).collect();
    let in_band = filter_by_length(messages, LengthBand::default()).retained;
    let records = labeler.label_messages(&in_band).unwrap();
    LabeledDocs::from_consensus(&in_band, &records)
}

#[test]
fn planted_signal_svm_bow() {
    let docs = planted_docs(600, 5);
    let plan = stratified_kfold(&docs.labels, 10, 5).unwrap();
    let svm = Algorithm::new(AlgorithmKind::Svm, Hyperparams::default());
    let r = cross_validate(&docs, &svm, &CvOptions::new(Representation::Bow, 1, 5), &plan).unwrap();
    assert!(r.report.macro_f1 >= 0.9, "{:?}", r.report);
    assert_eq!(r.confusion.total(), docs.len());
}

/// Reordering documents, with their fold assignments, leaves an
/// order-independent learner's pooled confusion unchanged.
#[test]
fn document_order_does_not_change_naive_bayes_results() {
    let docs = planted_docs(300, 8);
    let plan = stratified_kfold(&docs.labels, 5, 8).unwrap();
    let nb = Algorithm::new(AlgorithmKind::Nb, Hyperparams::default());
    let opts = CvOptions::new(Representation::Tfidf, 2, 8);
    let base = cross_validate(&docs, &nb, &opts, &plan).unwrap();

    let mut order: Vec<usize> = (0..docs.len()).collect();
    for round in 0..3 {
        order.shuffle(&mut rng(round));
        let permuted = LabeledDocs {
            ids: order.iter().map(|&i| docs.ids[i].clone()).collect(),
            tokens: order.iter().map(|&i| docs.tokens[i].clone()).collect(),
            labels: order.iter().map(|&i| docs.labels[i]).collect(),
        };
        let permuted_plan = CvPlan {
            k: plan.k,
            seed: plan.seed,
            fold_of: order.iter().map(|&i| plan.fold_of[i]).collect(),
        };
        let r = cross_validate(&permuted, &nb, &opts, &permuted_plan).unwrap();
        assert_eq!(r.confusion, base.confusion);
        assert_eq!(r.fold_confusions, base.fold_confusions);
    }
}

#[test]
fn per_fold_pooling_averages_fold_metrics() {
    let docs = planted_docs(300, 13);
    let plan = stratified_kfold(&docs.labels, 4, 13).unwrap();
    let nb = Algorithm::new(AlgorithmKind::Nb, Hyperparams::default());
    let mut opts = CvOptions::new(Representation::Bow, 1, 13);
    opts.pooling = Pooling::PerFold;
    let r = cross_validate(&docs, &nb, &opts, &plan).unwrap();
    let mean = r
        .fold_confusions
        .iter()
        .map(|cm| sentiment_pipeline::eval::compute_metrics(cm).unwrap().macro_f1)
        .sum::<f64>()
        / 4.0;
    assert!((r.report.macro_f1 - mean).abs() < 1e-12);
}
