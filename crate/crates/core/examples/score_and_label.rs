//! Scores a few sentences with both lexicon scorers and shows how the two
//! binary labels combine into a consensus label.
//!
//! cargo run --example score_and_label -- "some text to score"

use sentiment_pipeline::lexsent::{binarize, consensus, score_polarity, score_valence, Labeler};

fn main() -> sentiment_pipeline::Result<()> {
    let labeler = Labeler::demo();
    let mut texts: Vec<String> = std::env::args().skip(1).collect();
    if texts.is_empty() {
        texts = [
            "The vaccine clinic was great, staff were kind and helpful!",
            "Another lockdown. This is terrible and I am so tired of it.",
            "Not bad at all, the booster appointment was quick.",
            "Cases are up again this week.",
            "I love the new testing site but the queue was awful.",
        ]
        .map(String::from)
        .to_vec();
    }
    println!("{:>8} {:>8}  {:<8} {:<8} {:<10} text", "valence", "polarity", "label a", "label b", "consensus");
    for text in &texts {
        let a = score_valence(text, &labeler.valence, &labeler.params)?;
        let b = score_polarity(text, &labeler.polarity)?;
        let la = binarize(a, labeler.valence_thresholds);
        let lb = binarize(b, labeler.polarity_thresholds);
        let c = consensus(la, lb).map_or("-", |l| l.as_str());
        println!("{:>8.4} {:>8.4}  {:<8} {:<8} {:<10} {text}", a.value, b.value, la.as_str(), lb.as_str(), c);
    }
    Ok(())
}
