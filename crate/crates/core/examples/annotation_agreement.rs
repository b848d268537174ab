//! Samples an annotation task, runs two scripted annotators through it and
//! reports their agreement, overall and on the in-band part.
//!
//! cargo run --example annotation_agreement

use std::collections::HashSet;

use sentiment_pipeline::annotate::{inter_annotator_agreement, render_agreement_table, restrict_records, run_session, sample_messages};
use sentiment_pipeline::corpus::{load_dump, Message};

fn main() -> sentiment_pipeline::Result<()> {
    let dump = load_dump(concat!(env!("CARGO_MANIFEST_DIR"), "/data/demo/demo_dump.jsonl"))?;
    let corpus: Vec<Message> = dump.records.iter().map(Message::from_raw).collect();
    let task = sample_messages("demo", &corpus, 30, 42, None, |m| m.body.contains("covid"))?;

    let dir = std::env::temp_dir().join(format!("annotation-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| sentiment_pipeline::Error::io(&dir, e))?;
    let clock = || "0".to_string();
    // Scripted answers stand in for the interactive prompt.
    let mut records = Vec::new();
    for (annotator, every) in [("alice", 3), ("bob", 4)] {
        let answers: String = (0..task.message_ids.len()).map(|i| if i % every == 0 { "p\n" } else { "n\n" }).collect();
        let store = dir.join(format!("demo.{annotator}.csv"));
        let outcome = run_session(&task, &corpus, annotator, &store, answers.as_bytes(), std::io::sink(), &clock)?;
        records.push(outcome.records);
    }

    let in_band: HashSet<String> = corpus.iter().filter(|m| (11..=249).contains(&m.word_count)).map(|m| m.id.clone()).collect();
    let rows = vec![
        ("all".to_string(), inter_annotator_agreement(&records[0], &records[1])?),
        (
            "in band".to_string(),
            inter_annotator_agreement(&restrict_records(&records[0], &in_band), &restrict_records(&records[1], &in_band))?,
        ),
    ];
    print!("{}", render_agreement_table(&rows));
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
