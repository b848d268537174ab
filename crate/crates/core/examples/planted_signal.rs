//! Generates the planted-signal corpus, labels it with both scorers and
//! cross-validates all three classifiers on the in-band subset.
//!
//! cargo run --release --example planted_signal -- [seed]

use std::time::Instant;

use sentiment_pipeline::classify::{Algorithm, AlgorithmKind, Hyperparams};
use sentiment_pipeline::corpus::{filter_by_length, LengthBand, Message};
use sentiment_pipeline::eval::{cross_validate, stratified_kfold, CvOptions, LabeledDocs};
use sentiment_pipeline::features::Representation;
use sentiment_pipeline::lexsent::{agreement_stats, Labeler};
use sentiment_pipeline::synth::{planted_corpus, PlantedParams};

fn main() -> sentiment_pipeline::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let labeler = Labeler::demo();
    let planted = planted_corpus(&PlantedParams::default(), &labeler.valence, &labeler.polarity, seed);
    let all: Vec<Message> = planted.records.iter().map(Message::from_raw).collect();
    let in_band = filter_by_length(all.clone(), LengthBand::default()).retained;

    let all_records = labeler.label_messages(&all)?;
    let band_records = labeler.label_messages(&in_band)?;
    let all_stats = agreement_stats(&all_records)?;
    let band_stats = agreement_stats(&band_records)?;
    println!("agreement all     {:.2}%  ({} messages)", all_stats.agreement_pct, all_stats.total);
    println!("agreement in-band {:.2}%  ({} messages)", band_stats.agreement_pct, band_stats.total);

    let docs = LabeledDocs::from_consensus(&in_band, &band_records);
    let plan = stratified_kfold(&docs.labels, 10, seed)?;
    for kind in [AlgorithmKind::Nb, AlgorithmKind::Svm, AlgorithmKind::Rf] {
        let hyper = Hyperparams::default();
        let start = Instant::now();
        let r = cross_validate(&docs, &Algorithm::new(kind, hyper), &CvOptions::new(Representation::Bow, 1, seed), &plan)?;
        println!(
            "{:<3} macro-F {:.4}  accuracy {:.4}  ({:.1?})",
            kind.as_str(),
            r.report.macro_f1,
            r.report.accuracy,
            start.elapsed()
        );
    }
    Ok(())
}
