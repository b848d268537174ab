#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Parser;
use sentiment_pipeline::cli::{run, Cli};

pub fn demo_dump() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo/demo_dump.jsonl")
}

/// Runs the CLI in-process; returns captured stdout.
pub fn cli(args: &[&str], stdin: &str) -> sentiment_pipeline::Result<String> {
    let mut full = vec!["sentiment-pipeline"];
    full.extend_from_slice(args);
    let parsed = Cli::try_parse_from(full).unwrap_or_else(|e| panic!("bad test args {args:?}: {e}"));
    let mut out = Vec::new();
    run(parsed, stdin.as_bytes(), &mut out)?;
    Ok(String::from_utf8(out).expect("utf-8 output"))
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, acc);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                acc.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(dir, dir, &mut acc);
    acc
}

/// A reduced configuration so the whole pipeline runs in seconds.
pub fn small_config(out: &Path) -> String {
    format!(
        r#"seed = 7
out = "{out}"
dataset = "canada"

[input]
dump = "{dump}"

[features]
min_freqs = [1, 2, 3]

[classify.hyperparams.rf]
n_trees = 25

[annotate]
fixed_timestamp = "1622505600"
"#,
        out = out.display(),
        dump = demo_dump().display()
    )
}

/// Scripted answers: positive when `pattern(i)` holds.
pub fn answers(n: usize, pattern: impl Fn(usize) -> bool) -> String {
    (0..n).map(|i| if pattern(i) { "p\n" } else { "n\n" }).collect()
}

/// Every subcommand once, in pipeline order, driven by `config`.
pub fn run_pipeline(config: &Path, out: &Path) {
    let c = config.to_str().unwrap();
    let task = out.join("annotation/grp.task.json");
    let task = task.to_str().unwrap();
    let steps: Vec<(Vec<&str>, String)> = vec![
        (vec!["--config", c, "ingest"], String::new()),
        (vec!["--config", c, "label"], String::new()),
        (vec!["--config", c, "annotate", "sample", "--task-id", "grp", "--n", "30"], String::new()),
        (vec!["--config", c, "annotate", "session", "--task", task, "--annotator", "a1"], answers(30, |i| i % 3 == 0)),
        (vec!["--config", c, "annotate", "session", "--task", task, "--annotator", "a2"], answers(30, |i| i % 3 == 0 || i % 7 == 0)),
        (
            vec!["--config", c, "annotate", "sample", "--task-id", "neg", "--n", "20", "--from", "in-band", "--consensus", "negative"],
            String::new(),
        ),
        (vec!["--config", c, "eval"], String::new()),
        (vec!["--config", c, "report"], String::new()),
    ];
    for (args, stdin) in steps {
        cli(&args, &stdin).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
    let a1 = out.join("annotation/grp.a1.csv");
    let a2 = out.join("annotation/grp.a2.csv");
    let band = out.join("in_band.jsonl");
    let labels = out.join("labels_all.csv");
    cli(
        &[
            "--config",
            c,
            "agree",
            "--first",
            a1.to_str().unwrap(),
            "--second",
            a2.to_str().unwrap(),
            "--group",
            "grp",
            "--labels",
            labels.to_str().unwrap(),
            "--band-corpus",
            band.to_str().unwrap(),
        ],
        "",
    )
    .unwrap();
}
