//! Comment dumps, topic and bot filtering, and length bands.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::features::tokenize;

/// The default topic phrases.
pub const DEFAULT_KEYWORDS: [&str; 14] = [
    "lockdown",
    "pandemic",
    "coronavirus",
    "quarantine",
    "covid",
    "vaccine",
    "first dose",
    "second dose",
    "third dose",
    "booster",
    "vaccination",
    "first shot",
    "second shot",
    "third shot",
];

pub const DEFAULT_BOT_BLOCKLIST: [&str; 1] = ["AutoModerator"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawComment {
    pub id: String,
    pub author: String,
    pub body: String,
    #[serde(deserialize_with = "epoch_seconds")]
    pub created_utc: i64,
    pub subreddit: String,
}

// Dumps from different eras store created_utc as a number or a numeric string.
fn epoch_seconds<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Epoch {
        Int(i64),
        Float(f64),
        Text(String),
    }
    match Epoch::deserialize(d)? {
        Epoch::Int(i) => Ok(i),
        Epoch::Float(f) => Ok(f as i64),
        Epoch::Text(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    Canada,
    UK,
    Other(String),
}

impl Source {
    pub fn from_subreddit(name: &str) -> Source {
        match name.trim().trim_start_matches("r/").to_ascii_lowercase().as_str() {
            "canada" => Source::Canada,
            "unitedkingdom" | "uk" => Source::UK,
            _ => Source::Other(name.to_string()),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Canada => f.write_str("canada"),
            Source::UK => f.write_str("unitedkingdom"),
            Source::Other(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub id: String,
    pub body: String,
    pub word_count: usize,
    pub source: Source,
}

impl Message {
    pub fn new(id: impl Into<String>, body: impl Into<String>, source: Source) -> Self {
        let body = body.into();
        Message {
            id: id.into(),
            word_count: word_count(&body),
            body,
            source,
        }
    }

    pub fn from_raw(raw: &RawComment) -> Self {
        Message::new(raw.id.clone(), raw.body.clone(), Source::from_subreddit(&raw.subreddit))
    }
}

/// Number of maximal non-whitespace runs.
pub fn word_count(body: &str) -> usize {
    body.split_whitespace().count()
}

/// Streaming reader over a line-delimited JSON dump.
///
/// Malformed lines (bad JSON, invalid UTF-8, missing or empty id, duplicate
/// id) are skipped and counted. Only I/O failures surface as errors.
pub struct DumpReader<R> {
    reader: R,
    buf: Vec<u8>,
    seen: HashSet<String>,
    skipped: usize,
    path: String,
}

impl<R: BufRead> DumpReader<R> {
    pub fn new(reader: R) -> Self {
        DumpReader {
            reader,
            buf: Vec::new(),
            seen: HashSet::new(),
            skipped: 0,
            path: "<stream>".into(),
        }
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    fn parse_line(&mut self) -> Option<RawComment> {
        let line = std::str::from_utf8(&self.buf).ok()?;
        let line = line.trim();
        if line.is_empty() {
            return None;
        }
        let rec: RawComment = serde_json::from_str(line).ok()?;
        if rec.id.is_empty() || !self.seen.insert(rec.id.clone()) {
            return None;
        }
        Some(rec)
    }
}

impl DumpReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = DumpReader::new(BufReader::new(file));
        reader.path = path.display().to_string();
        Ok(reader)
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<RawComment>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            }
            let blank = self.buf.iter().all(u8::is_ascii_whitespace);
            match self.parse_line() {
                Some(rec) => return Some(Ok(rec)),
                None if blank => continue,
                None => self.skipped += 1,
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Dump {
    pub records: Vec<RawComment>,
    pub skipped: usize,
}

/// Reads a whole dump file into memory.
pub fn load_dump(path: impl AsRef<Path>) -> Result<Dump> {
    let mut reader = DumpReader::open(path)?;
    let records = reader.by_ref().collect::<Result<Vec<_>>>()?;
    Ok(Dump {
        records,
        skipped: reader.skipped(),
    })
}

pub fn write_dump<'a, W: Write>(mut w: W, records: impl IntoIterator<Item = &'a RawComment>) -> std::io::Result<()> {
    for rec in records {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Topic filter over tokenized phrases.
#[derive(Debug, Clone)]
pub struct KeywordFilter {
    phrases: Vec<Vec<String>>,
}

impl KeywordFilter {
    pub fn new<S: AsRef<str>>(keywords: &[S]) -> Result<Self> {
        let phrases: Vec<Vec<String>> = keywords
            .iter()
            .map(|k| tokenize(k.as_ref()))
            .filter(|p| !p.is_empty())
            .collect();
        if phrases.is_empty() {
            return Err(Error::InvalidParameter("keyword list is empty".into()));
        }
        Ok(KeywordFilter { phrases })
    }

    pub fn matches(&self, body: &str) -> bool {
        let tokens = tokenize(body);
        self.phrases.iter().any(|p| phrase_occurs(&tokens, p))
    }
}

impl Default for KeywordFilter {
    fn default() -> Self {
        KeywordFilter::new(&DEFAULT_KEYWORDS).expect("default keywords are non-empty")
    }
}

fn phrase_occurs(tokens: &[String], phrase: &[String]) -> bool {
    if let [single] = phrase {
        return tokens.iter().any(|t| t.starts_with(single.as_str()));
    }
    tokens.windows(phrase.len()).any(|w| w == phrase)
}

pub fn is_covid_related<S: AsRef<str>>(body: &str, keywords: &[S]) -> bool {
    KeywordFilter::new(keywords).map(|f| f.matches(body)).unwrap_or(false)
}

#[derive(Debug, Clone)]
pub struct BotFilter {
    blocklist: HashSet<String>,
}

impl BotFilter {
    pub fn new<S: AsRef<str>>(blocklist: &[S]) -> Self {
        BotFilter {
            blocklist: blocklist.iter().map(|s| s.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn is_bot(&self, author: &str, body: &str) -> bool {
        let author = author.to_lowercase();
        author.ends_with("bot")
            || self.blocklist.contains(&author)
            || strip_markup(body).contains("i am a bot")
    }
}

impl Default for BotFilter {
    fn default() -> Self {
        BotFilter::new(&DEFAULT_BOT_BLOCKLIST)
    }
}

pub fn is_bot(author: &str, body: &str) -> bool {
    BotFilter::default().is_bot(author, body)
}

/// Lowercases, drops markdown emphasis/superscript characters and collapses
/// whitespace.
fn strip_markup(body: &str) -> String {
    let cleaned: String = body
        .chars()
        .filter(|c| !matches!(c, '^' | '*' | '_' | '~' | '`' | '#' | '>'))
        .collect::<String>()
        .to_lowercase();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Inclusive word-count band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBand {
    pub min_words: usize,
    pub max_words: usize,
}

impl LengthBand {
    pub fn new(min_words: usize, max_words: usize) -> Result<Self> {
        if min_words > max_words {
            return Err(Error::InvalidParameter(format!(
                "length band {min_words}:{max_words} has min > max"
            )));
        }
        Ok(LengthBand { min_words, max_words })
    }

    pub fn contains(&self, word_count: usize) -> bool {
        (self.min_words..=self.max_words).contains(&word_count)
    }
}

impl Default for LengthBand {
    fn default() -> Self {
        LengthBand {
            min_words: 11,
            max_words: 249,
        }
    }
}

impl fmt::Display for LengthBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.min_words, self.max_words)
    }
}

impl FromStr for LengthBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("band {s:?} is not MIN:MAX")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("band {s:?} is not MIN:MAX")))
        };
        LengthBand::new(parse(lo)?, parse(hi)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LengthSplit<T> {
    pub retained: Vec<T>,
    pub dropped_short: usize,
    pub dropped_long: usize,
}

pub trait WordCounted {
    fn words(&self) -> usize;
}

impl WordCounted for Message {
    fn words(&self) -> usize {
        self.word_count
    }
}

impl WordCounted for RawComment {
    fn words(&self) -> usize {
        word_count(&self.body)
    }
}

pub fn filter_by_length<T: WordCounted>(messages: impl IntoIterator<Item = T>, band: LengthBand) -> LengthSplit<T> {
    let mut split = LengthSplit {
        retained: Vec::new(),
        dropped_short: 0,
        dropped_long: 0,
    };
    for m in messages {
        let n = m.words();
        if n < band.min_words {
            split.dropped_short += 1;
        } else if n > band.max_words {
            split.dropped_long += 1;
        } else {
            split.retained.push(m);
        }
    }
    split
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub contributors: usize,
    pub messages_posted: usize,
    pub covid_related: usize,
    pub below_band: usize,
    pub above_band: usize,
    pub in_band: usize,
}

impl CorpusStats {
    /// Combines stats of disjoint shards. `contributors` is summed, so it is
    /// exact only when shards do not share authors.
    pub fn merge(self, other: CorpusStats) -> CorpusStats {
        CorpusStats {
            contributors: self.contributors + other.contributors,
            messages_posted: self.messages_posted + other.messages_posted,
            covid_related: self.covid_related + other.covid_related,
            below_band: self.below_band + other.below_band,
            above_band: self.above_band + other.above_band,
            in_band: self.in_band + other.in_band,
        }
    }

    pub fn rows(&self) -> [(&'static str, usize); 6] {
        [
            ("contributors", self.contributors),
            ("messages_posted", self.messages_posted),
            ("covid_related", self.covid_related),
            ("below_band", self.below_band),
            ("above_band", self.above_band),
            ("in_band", self.in_band),
        ]
    }
}

pub fn corpus_stats(raw: &[RawComment], covid: &[Message], band: LengthBand) -> CorpusStats {
    let contributors: HashSet<&str> = raw.iter().map(|r| r.author.as_str()).collect();
    let mut stats = CorpusStats {
        contributors: contributors.len(),
        messages_posted: raw.len(),
        covid_related: covid.len(),
        ..CorpusStats::default()
    };
    for m in covid {
        if m.word_count < band.min_words {
            stats.below_band += 1;
        } else if m.word_count > band.max_words {
            stats.above_band += 1;
        } else {
            stats.in_band += 1;
        }
    }
    stats
}

/// Optional inclusive `[start, end]` epoch window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: i64,
    pub end: i64,
}

impl DateRange {
    pub fn contains(&self, t: i64) -> bool {
        (self.start..=self.end).contains(&t)
    }
}

#[derive(Debug, Clone)]
pub struct IngestFilters {
    pub keywords: KeywordFilter,
    pub bots: BotFilter,
    pub band: LengthBand,
    pub date_range: Option<DateRange>,
}

impl Default for IngestFilters {
    fn default() -> Self {
        IngestFilters {
            keywords: KeywordFilter::default(),
            bots: BotFilter::default(),
            band: LengthBand::default(),
            date_range: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOutcome {
    pub covid: Vec<RawComment>,
    pub in_band: Vec<RawComment>,
    pub stats: CorpusStats,
    pub bot_removed: usize,
    pub out_of_range: usize,
}

/// Date window, keyword filter, bot filter, then the length band.
pub fn ingest(records: Vec<RawComment>, filters: &IngestFilters) -> IngestOutcome {
    let total = records.len();
    let posted: Vec<RawComment> = match filters.date_range {
        Some(r) => records.into_iter().filter(|c| r.contains(c.created_utc)).collect(),
        None => records,
    };
    let out_of_range = total - posted.len();

    let mut bot_removed = 0;
    let covid: Vec<RawComment> = posted
        .iter()
        .filter(|c| filters.keywords.matches(&c.body))
        .filter(|c| {
            let bot = filters.bots.is_bot(&c.author, &c.body);
            bot_removed += usize::from(bot);
            !bot
        })
        .cloned()
        .collect();
    let messages: Vec<Message> = covid.iter().map(Message::from_raw).collect();
    let stats = corpus_stats(&posted, &messages, filters.band);
    let in_band = filter_by_length(covid.iter().cloned(), filters.band).retained;
    IngestOutcome {
        covid,
        in_band,
        stats,
        bot_removed,
        out_of_range,
    }
}
