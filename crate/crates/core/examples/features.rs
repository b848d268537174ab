//! Builds vocabularies at several minimum word frequencies and shows the
//! BOW and TF-IDF vectors of one document.
//!
//! cargo run --example features

use sentiment_pipeline::features::{build_vocabulary, tokenize, vectorize, Representation};

fn main() -> sentiment_pipeline::Result<()> {
    let docs: Vec<Vec<String>> = [
        "Covid vaccine appointments are open, great news",
        "The covid lockdown news is terrible",
        "Great staff at the vaccine clinic today",
        "Terrible queue at the covid testing site",
    ]
    .iter()
    .map(|t| tokenize(t))
    .collect();

    for min_freq in 1..=3 {
        let vocab = build_vocabulary(&docs, min_freq)?;
        println!("min_freq {min_freq}: {} terms {:?}", vocab.len(), vocab.terms());
    }

    let vocab = build_vocabulary(&docs, 1)?;
    for rep in [Representation::Bow, Representation::Tfidf] {
        let v = vectorize(&docs[0], &vocab, rep);
        let shown: Vec<String> = v
            .entries
            .iter()
            .map(|&(i, w)| format!("{}={w:.3}", vocab.term(i).unwrap_or("?")))
            .collect();
        println!("{:<5} {}", rep.as_str(), shown.join(" "));
    }
    Ok(())
}
