//! Seeded synthetic corpora with a planted sentiment signal, used by the
//! end-to-end tests and the demo data.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus::{LengthBand, RawComment};
use crate::label::Label;
use crate::lexsent::{PolarityLexicon, ValenceLexicon};
use crate::seed;

const FILLER: &[&str] = &[
    "covid", "vaccine", "lockdown", "people", "week", "government", "today", "city", "news", "case",
    "numbers", "school", "work", "home", "family", "doctor", "clinic", "shop", "train", "street",
    "report", "update", "policy", "minister", "council", "data", "rules", "mask", "testing", "queue",
    "pharmacy", "hospital", "staff", "winter", "summer", "travel", "office", "children", "parents", "county",
    "province", "border", "flight", "schedule", "appointment", "dose", "variant", "region", "weekend", "morning",
];

/// Seed the bundled demo dump was generated with.
pub const DEMO_SEED: u64 = 2021;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedParams {
    pub n_messages: usize,
    /// Share of messages made length outliers with mixed sentiment.
    pub outlier_share: f64,
    pub band: LengthBand,
    /// Inclusive word-count range for in-band messages.
    pub in_band_words: (usize, usize),
    /// Inclusive count of sentiment terms in an in-band message.
    pub sentiment_terms: (usize, usize),
    /// Inclusive word-count range for long outliers.
    pub long_words: (usize, usize),
}

impl Default for PlantedParams {
    fn default() -> Self {
        PlantedParams {
            n_messages: 2000,
            outlier_share: 0.10,
            band: LengthBand::default(),
            in_band_words: (15, 60),
            sentiment_terms: (2, 4),
            long_words: (260, 320),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    pub records: Vec<RawComment>,
    /// Planted class of each record. Long outliers hold one extra term of
    /// this class; short outliers carry an arbitrary class.
    pub truth: Vec<Label>,
    pub outlier: Vec<bool>,
    pub positive_pool: Vec<String>,
    pub negative_pool: Vec<String>,
}

/// Terms whose valence and polarity share a sign, split by that sign and
/// sorted. The two pools are disjoint by construction.
pub fn sentiment_pools(valence: &ValenceLexicon, polarity: &PolarityLexicon) -> (Vec<String>, Vec<String>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (term, &v) in &valence.entries {
        if !term.chars().all(|c| c.is_ascii_alphabetic()) || valence.negators.contains(term) {
            continue;
        }
        let Some(&p) = polarity.entries.get(term) else { continue };
        if v > 0.0 && p > 0.1 {
            pos.push(term.clone());
        } else if v < 0.0 && p < -0.1 {
            neg.push(term.clone());
        }
    }
    pos.sort();
    neg.sort();
    (pos, neg)
}

fn filler(valence: &ValenceLexicon, polarity: &PolarityLexicon) -> Vec<&'static str> {
    FILLER
        .iter()
        .copied()
        .filter(|w| {
            !valence.entries.contains_key(*w)
                && !valence.boosters.contains_key(*w)
                && !valence.negators.contains(*w)
                && !polarity.entries.contains_key(*w)
                && !polarity.negators.contains(*w)
        })
        .collect()
}

/// Generates the corpus. Every message mentions "covid" so it passes the
/// default keyword filter. In-band messages draw sentiment terms from one
/// pool; outliers are either very short or very long and mix both pools.
pub fn planted_corpus(params: &PlantedParams, valence: &ValenceLexicon, polarity: &PolarityLexicon, master_seed: u64) -> PlantedCorpus {
    let (pos_pool, neg_pool) = sentiment_pools(valence, polarity);
    assert!(!pos_pool.is_empty() && !neg_pool.is_empty(), "lexicons share no signed terms");
    let filler = filler(valence, polarity);
    let mut rng = seed::derived_rng(master_seed, "planted");
    let n_outliers = (params.n_messages as f64 * params.outlier_share).round() as usize;
    let mut is_outlier: Vec<bool> = (0..params.n_messages).map(|i| i < n_outliers).collect();
    is_outlier.shuffle(&mut rng);

    let pool = |l: Label| if l == Label::Positive { &pos_pool } else { &neg_pool };
    let mut records = Vec::with_capacity(params.n_messages);
    let mut truth = Vec::with_capacity(params.n_messages);

    for (i, &outlier) in is_outlier.iter().enumerate() {
        let class = if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative };
        let mut words: Vec<String> = Vec::new();
        if !outlier {
            let len = rng.gen_range(params.in_band_words.0..=params.in_band_words.1);
            let k = rng.gen_range(params.sentiment_terms.0..=params.sentiment_terms.1);
            for _ in 0..k {
                words.push(pool(class).choose(&mut rng).expect("non-empty").clone());
            }
            while words.len() + 1 < len {
                words.push(filler.choose(&mut rng).expect("non-empty").to_string());
            }
        } else if rng.gen_bool(0.5) {
            // Short: one term from each pool plus a little filler.
            let max_short = params.band.min_words.saturating_sub(1).max(3);
            let len = rng.gen_range(3..=max_short);
            words.push(pos_pool.choose(&mut rng).expect("non-empty").clone());
            words.push(neg_pool.choose(&mut rng).expect("non-empty").clone());
            while words.len() + 1 < len {
                words.push(filler.choose(&mut rng).expect("non-empty").to_string());
            }
        } else {
            let lo = params.long_words.0.max(params.band.max_words + 1);
            let len = rng.gen_range(lo..=params.long_words.1.max(lo));
            let k = rng.gen_range(4..=8);
            for _ in 0..k {
                words.push(pool(class).choose(&mut rng).expect("non-empty").clone());
                words.push(pool(class.flipped()).choose(&mut rng).expect("non-empty").clone());
            }
            words.push(pool(class).choose(&mut rng).expect("non-empty").clone());
            while words.len() + 1 < len {
                words.push(filler.choose(&mut rng).expect("non-empty").to_string());
            }
        }
        words.push("covid".into());
        words.shuffle(&mut rng);
        records.push(RawComment {
            id: format!("p{i:05}"),
            author: format!("user{:03}", rng.gen_range(0..400)),
            body: words.join(" "),
            created_utc: 1_609_459_200 + i as i64 * 60,
            subreddit: if i % 2 == 0 { "unitedkingdom" } else { "canada" }.into(),
        });
        truth.push(class);
    }
    PlantedCorpus {
        records,
        truth,
        outlier: is_outlier,
        positive_pool: pos_pool,
        negative_pool: neg_pool,
    }
}

const CHATTER: &[&str] = &[
    "weather", "football", "match", "train", "weekend", "city", "news", "shop", "music", "film", "holiday",
    "council", "election", "house", "prices", "garden", "coffee", "traffic", "bridge", "museum",
];

/// Text of the bundled demo dump: planted covid messages, off-topic
/// chatter, bot posts and two malformed lines, 200 lines in all.
pub fn demo_dump_text(master_seed: u64) -> String {
    let valence = ValenceLexicon::demo();
    let polarity = PolarityLexicon::demo();
    let params = PlantedParams {
        n_messages: 160,
        ..PlantedParams::default()
    };
    let mut records = planted_corpus(&params, &valence, &polarity, master_seed).records;
    let mut rng = seed::derived_rng(master_seed, "demo-dump");
    for i in 0..28 {
        let len = rng.gen_range(5..40);
        let body: Vec<&str> = (0..len).map(|_| *CHATTER.choose(&mut rng).expect("non-empty")).collect();
        records.push(RawComment {
            id: format!("c{i:04}"),
            author: format!("user{:03}", rng.gen_range(0..400)),
            body: body.join(" "),
            created_utc: 1_609_459_200 + rng.gen_range(0..86_400),
            subreddit: "canada".into(),
        });
    }
    let bots = [
        ("AutoModerator", "Reminder: covid threads are collected in the weekly megathread."),
        ("vaccine_stats_bot", "Daily covid vaccine update: figures for the province are posted below."),
        ("helpful_user", "covid numbers summary for today. I am a bot, this action was performed automatically."),
        ("automoderator", "Please keep lockdown discussion civil."),
        ("LinkFixerBot", "Fixed link for the coronavirus dashboard."),
        ("remindmebot", "I will remind you about the booster appointment in 7 days."),
        ("helper", "Pandemic resources list. *I am a bot*, contact the moderators with questions."),
        ("QuarantineBot", "Quarantine rules for travellers have been updated."),
        ("uk_covid_bot", "Covid case counts for the region, automated post."),
        ("AutoModerator", "Your post about the vaccine was removed for missing a source."),
    ];
    for (i, (author, body)) in bots.iter().enumerate() {
        records.push(RawComment {
            id: format!("b{i:04}"),
            author: author.to_string(),
            body: body.to_string(),
            created_utc: 1_609_459_200 + i as i64,
            subreddit: "unitedkingdom".into(),
        });
    }
    records.shuffle(&mut rng);
    let mut text = String::new();
    for r in &records {
        text.push_str(&serde_json::to_string(r).expect("record serializes"));
        text.push('\n');
    }
    text.push_str("{\"id\": \"broken\", \"body\": \n");
    text.push_str("not json at all\n");
    text
}
