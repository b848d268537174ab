//! Trains each classifier on a planted corpus, saves it in the text model
//! format, loads it back and checks the predictions survive the round trip.
//!
//! cargo run --release --example train_and_save

use std::sync::Arc;

use sentiment_pipeline::classify::{AlgorithmKind, AnyModel, Algorithm, Classifier, Hyperparams, Learner, RfParams};
use sentiment_pipeline::corpus::{filter_by_length, LengthBand, Message};
use sentiment_pipeline::eval::LabeledDocs;
use sentiment_pipeline::features::{build_vocabulary, FeatureMatrix, Representation};
use sentiment_pipeline::lexsent::Labeler;
use sentiment_pipeline::synth::{planted_corpus, PlantedParams};

fn main() -> sentiment_pipeline::Result<()> {
    let labeler = Labeler::demo();
    let params = PlantedParams {
        n_messages: 400,
        ..PlantedParams::default()
    };
    let planted = planted_corpus(&params, &labeler.valence, &labeler.polarity, 1);
    let messages: Vec<Message> = planted.records.iter().map(Message::from_raw).collect();
    let in_band = filter_by_length(messages, LengthBand::default()).retained;
    let docs = LabeledDocs::from_consensus(&in_band, &labeler.label_messages(&in_band)?);
    let vocab = Arc::new(build_vocabulary(&docs.tokens, 2)?);
    let matrix = FeatureMatrix::from_tokens(&docs.tokens, docs.labels.clone(), vocab, Representation::Tfidf)?;
    println!("{} documents, {} features", matrix.len(), matrix.n_features());

    let hyper = Hyperparams {
        rf: RfParams {
            n_trees: 30,
            ..RfParams::default()
        },
        ..Hyperparams::default()
    };
    for kind in AlgorithmKind::ALL {
        let model: AnyModel = Algorithm::new(kind, hyper.clone()).fit(&matrix, 7)?;
        let mut text = Vec::new();
        model.save(&mut text).map_err(|e| sentiment_pipeline::Error::io("<memory>", e))?;
        let loaded = AnyModel::load(text.as_slice())?;
        let mut correct = 0;
        for (v, &l) in matrix.vectors.iter().zip(&matrix.labels) {
            let p = model.predict(v)?;
            assert_eq!(p, loaded.predict(v)?);
            correct += usize::from(p.label == l);
        }
        println!(
            "{:<3} saved {:>7} bytes, training accuracy {:.3}",
            kind.as_str(),
            text.len(),
            correct as f64 / matrix.len() as f64
        );
    }
    Ok(())
}
