//! Filters the bundled demo dump into the covid corpus and the length band,
//! then prints the corpus table.
//!
//! cargo run --example ingest_dump -- [dump.jsonl] [MIN:MAX]

use sentiment_pipeline::corpus::{ingest, load_dump, IngestFilters, LengthBand};

fn main() -> sentiment_pipeline::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/demo/demo_dump.jsonl").into());
    let band: LengthBand = args.next().as_deref().unwrap_or("11:249").parse()?;

    let dump = load_dump(&path)?;
    println!("read {} records, skipped {} malformed lines", dump.records.len(), dump.skipped);
    let filters = IngestFilters {
        band,
        ..IngestFilters::default()
    };
    let outcome = ingest(dump.records, &filters);
    for (name, value) in outcome.stats.rows() {
        println!("{name:<16} {value:>6}");
    }
    println!("{:<16} {:>6}", "bots_removed", outcome.bot_removed);
    if let Some(m) = outcome.in_band.first() {
        println!("\nfirst in-band message ({}): {}", m.id, m.body);
    }
    Ok(())
}
