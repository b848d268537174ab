//! Runs the algorithm x representation x min-frequency grid on the full and
//! in-band planted corpora and prints the best rows and the F-score change.
//!
//! cargo run --release --example grid_search

use sentiment_pipeline::classify::{Algorithm, AlgorithmKind, Hyperparams, RfParams};
use sentiment_pipeline::corpus::{filter_by_length, LengthBand, Message};
use sentiment_pipeline::eval::{delta_summary, grid_search, render_best_table, stratified_kfold, write_delta_csv, GridSpec, LabeledDocs};
use sentiment_pipeline::features::Representation;
use sentiment_pipeline::lexsent::Labeler;
use sentiment_pipeline::synth::{planted_corpus, PlantedParams};

fn main() -> sentiment_pipeline::Result<()> {
    let seed = 11;
    let labeler = Labeler::demo();
    let params = PlantedParams {
        n_messages: 500,
        ..PlantedParams::default()
    };
    let planted = planted_corpus(&params, &labeler.valence, &labeler.polarity, seed);
    let all: Vec<Message> = planted.records.iter().map(Message::from_raw).collect();
    let in_band = filter_by_length(all.clone(), LengthBand::default()).retained;

    let hyper = Hyperparams {
        rf: RfParams {
            n_trees: 25,
            ..RfParams::default()
        },
        ..Hyperparams::default()
    };
    let learners: Vec<Algorithm> = AlgorithmKind::ALL.iter().map(|&k| Algorithm::new(k, hyper.clone())).collect();
    let spec = GridSpec {
        representations: vec![Representation::Bow, Representation::Tfidf],
        min_freqs: vec![1, 2, 3],
        seed,
        ..GridSpec::default()
    };
    let mut grids = Vec::new();
    for (name, corpus) in [("all", &all), ("in_band", &in_band)] {
        let docs = LabeledDocs::from_consensus(corpus, &labeler.label_messages(corpus)?);
        let plan = stratified_kfold(&docs.labels, 10, seed)?;
        let grid = grid_search(name, &docs, &learners, &spec, &plan);
        print!("{}\n", render_best_table(&grid));
        grids.push(grid);
    }
    let delta = delta_summary(&grids[0], &grids[1]);
    write_delta_csv(std::io::stdout().lock(), &delta).map_err(|e| sentiment_pipeline::Error::io("<stdout>", e))?;
    Ok(())
}
