//! Two independent lexicon scorers, binarization and consensus labeling.
//!
//! The valence scorer sums rule-adjusted term valences (capitalization,
//! degree modifiers, negation, contrastive "but", punctuation emphasis) and
//! squashes the sum with `s / sqrt(s^2 + alpha)`. The polarity scorer
//! averages term polarities with a fixed negation multiplier. Both are pure
//! functions of text and an immutable lexicon.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::tokenize;
use crate::label::Label;

const DEMO_VALENCE: &str = include_str!("../data/lexicon/valence.tsv");
const DEMO_BOOSTERS: &str = include_str!("../data/lexicon/boosters.tsv");
const DEMO_NEGATORS: &str = include_str!("../data/lexicon/negators.txt");
const DEMO_POLARITY: &str = include_str!("../data/lexicon/polarity.tsv");
const DEMO_POLARITY_NEGATORS: &str = include_str!("../data/lexicon/polarity_negators.txt");

/// Phrase idioms whose valence replaces the rule-adjusted one.
pub const DEFAULT_IDIOMS: [(&str, f64); 9] = [
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

/// ASCII punctuation, as stripped from token edges.
const PUNCTUATION: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

/// Rule constants of the valence scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValenceParams {
    pub alpha: f64,
    /// Increment for booster-list entries that carry no explicit value.
    pub booster_increment: f64,
    /// Multipliers for a booster 1, 2 and 3 tokens before the scored term.
    pub booster_decay: [f64; 3],
    pub negation_factor: f64,
    pub caps_boost: f64,
    pub exclamation_weight: f64,
    pub exclamation_cap: usize,
    pub question_weight: f64,
    /// Question-mark counts above this use `question_flood`.
    pub question_cap: usize,
    pub question_flood: f64,
    pub but_before: f64,
    pub but_after: f64,
    /// Multiplier for "never so/this" style intensification.
    pub never_so_boost: f64,
    /// Treat any token containing "n't" as a negator.
    pub contraction_negation: bool,
}

impl Default for ValenceParams {
    fn default() -> Self {
        ValenceParams {
            alpha: 15.0,
            booster_increment: 0.293,
            booster_decay: [1.0, 0.95, 0.9],
            negation_factor: -0.74,
            caps_boost: 0.733,
            exclamation_weight: 0.292,
            exclamation_cap: 4,
            question_weight: 0.18,
            question_cap: 3,
            question_flood: 0.96,
            but_before: 0.5,
            but_after: 1.5,
            never_so_boost: 1.25,
            contraction_negation: true,
        }
    }
}

impl ValenceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParameter("valence alpha must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValenceLexicon {
    pub entries: HashMap<String, f64>,
    pub boosters: HashMap<String, f64>,
    pub negators: HashSet<String>,
    pub idioms: HashMap<String, f64>,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// Parses `term<TAB>value` rows; extra columns are ignored.
fn parse_term_values(text: &str, origin: &Path, default: Option<f64>) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (line, row) in data_lines(text) {
        let mut cols = row.split('\t');
        let term = cols.next().unwrap_or("").trim();
        let value = match (cols.next().map(str::trim), default) {
            (Some(v), _) if !v.is_empty() => v.parse::<f64>().map_err(|_| Error::Parse {
                path: origin.into(),
                line,
                message: format!("bad value {v:?}"),
            })?,
            (_, Some(d)) => d,
            _ => {
                return Err(Error::Parse {
                    path: origin.into(),
                    line,
                    message: "expected term<TAB>value".into(),
                })
            }
        };
        if term.is_empty() {
            return Err(Error::Parse {
                path: origin.into(),
                line,
                message: "empty term".into(),
            });
        }
        out.insert(term.to_lowercase(), value);
    }
    Ok(out)
}

fn parse_term_list(text: &str) -> HashSet<String> {
    data_lines(text).map(|(_, l)| l.trim().to_lowercase()).collect()
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn check_disjoint<'a>(
    a: impl Iterator<Item = &'a String>,
    b: &dyn Fn(&str) -> bool,
    first: &'static str,
    second: &'static str,
) -> Result<()> {
    let mut hits: Vec<&String> = a.filter(|t| b(t)).collect();
    hits.sort();
    match hits.first() {
        Some(term) => Err(Error::LexiconOverlap {
            term: term.to_string(),
            first,
            second,
        }),
        None => Ok(()),
    }
}

impl ValenceLexicon {
    pub fn new(
        entries: HashMap<String, f64>,
        boosters: HashMap<String, f64>,
        negators: HashSet<String>,
    ) -> Result<Self> {
        check_disjoint(entries.keys(), &|t| boosters.contains_key(t), "entries", "boosters")?;
        check_disjoint(entries.keys(), &|t| negators.contains(t), "entries", "negators")?;
        check_disjoint(boosters.keys(), &|t| negators.contains(t), "boosters", "negators")?;
        Ok(ValenceLexicon {
            entries,
            boosters,
            negators,
            idioms: DEFAULT_IDIOMS.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        })
    }

    pub fn parse(valence: &str, boosters: &str, negators: &str, params: &ValenceParams) -> Result<Self> {
        let origin = Path::new("<inline>");
        ValenceLexicon::new(
            parse_term_values(valence, origin, None)?,
            parse_term_values(boosters, origin, Some(params.booster_increment))?,
            parse_term_list(negators),
        )
    }

    /// Loads the valence TSV plus optional booster and negator lists. Absent
    /// lists fall back to the bundled ones.
    pub fn load(
        valence: &Path,
        boosters: Option<&Path>,
        negators: Option<&Path>,
        params: &ValenceParams,
    ) -> Result<Self> {
        let entries = parse_term_values(&read_file(valence)?, valence, None)?;
        let boosters = match boosters {
            Some(p) => parse_term_values(&read_file(p)?, p, Some(params.booster_increment))?,
            None => parse_term_values(DEMO_BOOSTERS, Path::new("<bundled>"), Some(params.booster_increment))?,
        };
        let negators = match negators {
            Some(p) => parse_term_list(&read_file(p)?),
            None => parse_term_list(DEMO_NEGATORS),
        };
        ValenceLexicon::new(entries, boosters, negators)
    }

    /// The small lexicon bundled with the crate.
    pub fn demo() -> Self {
        ValenceLexicon::parse(DEMO_VALENCE, DEMO_BOOSTERS, DEMO_NEGATORS, &ValenceParams::default())
            .expect("bundled valence lexicon is valid")
    }
}

#[derive(Debug, Clone, Default)]
pub struct PolarityLexicon {
    pub entries: HashMap<String, f64>,
    pub negators: HashSet<String>,
}

impl PolarityLexicon {
    pub fn new(entries: HashMap<String, f64>, negators: HashSet<String>) -> Result<Self> {
        let mut bad: Vec<(&String, &f64)> = entries.iter().filter(|(_, p)| !(-1.0..=1.0).contains(*p)).collect();
        bad.sort_by(|a, b| a.0.cmp(b.0));
        if let Some((term, p)) = bad.first() {
            return Err(Error::InvalidParameter(format!(
                "polarity of {term:?} is {p}, outside [-1, 1]"
            )));
        }
        check_disjoint(entries.keys(), &|t| negators.contains(t), "entries", "negators")?;
        Ok(PolarityLexicon { entries, negators })
    }

    pub fn parse(polarity: &str, negators: &str) -> Result<Self> {
        PolarityLexicon::new(
            parse_term_values(polarity, Path::new("<inline>"), None)?,
            parse_term_list(negators),
        )
    }

    pub fn load(polarity: &Path, negators: Option<&Path>) -> Result<Self> {
        let entries = parse_term_values(&read_file(polarity)?, polarity, None)?;
        let negators = match negators {
            Some(p) => parse_term_list(&read_file(p)?),
            None => parse_term_list(DEMO_POLARITY_NEGATORS),
        };
        PolarityLexicon::new(entries, negators)
    }

    pub fn demo() -> Self {
        PolarityLexicon::parse(DEMO_POLARITY, DEMO_POLARITY_NEGATORS).expect("bundled polarity lexicon is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scorer {
    Valence,
    Polarity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentScore {
    pub value: f64,
    pub scorer: Scorer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
}

impl SentimentLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
        }
    }

    pub fn binary(self) -> Option<Label> {
        match self {
            SentimentLabel::Positive => Some(Label::Positive),
            SentimentLabel::Negative => Some(Label::Negative),
            SentimentLabel::Neutral => None,
        }
    }
}

impl From<Label> for SentimentLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::Positive => SentimentLabel::Positive,
            Label::Negative => SentimentLabel::Negative,
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neutral" => Ok(SentimentLabel::Neutral),
            other => other.parse::<Label>().map(SentimentLabel::from),
        }
    }
}

fn strip_punct_if_word(token: &str) -> &str {
    let stripped = token.trim_matches(|c| PUNCTUATION.contains(c));
    if stripped.chars().count() <= 2 {
        token
    } else {
        stripped
    }
}

/// At least one cased character and no lowercase ones.
fn is_upper(word: &str) -> bool {
    let mut cased = false;
    for c in word.chars() {
        if c.is_lowercase() {
            return false;
        }
        cased |= c.is_uppercase();
    }
    cased
}

/// Largest f64 strictly below 1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

struct ValenceRules<'a> {
    lex: &'a ValenceLexicon,
    params: &'a ValenceParams,
    words: Vec<&'a str>,
    lower: Vec<String>,
    cap_diff: bool,
}

impl ValenceRules<'_> {
    fn in_lexicon(&self, i: usize) -> bool {
        self.lex.entries.contains_key(&self.lower[i])
    }

    fn is_negator(&self, word: &str) -> bool {
        self.lex.negators.contains(word) || (self.params.contraction_negation && word.contains("n't"))
    }

    fn booster_scalar(&self, j: usize, valence: f64) -> f64 {
        let Some(&inc) = self.lex.boosters.get(&self.lower[j]) else {
            return 0.0;
        };
        let mut scalar = if valence < 0.0 { -inc } else { inc };
        if is_upper(self.words[j]) && self.cap_diff {
            if valence > 0.0 {
                scalar += self.params.caps_boost;
            } else {
                scalar -= self.params.caps_boost;
            }
        }
        scalar
    }

    fn negation(&self, mut v: f64, dist: usize, i: usize) -> f64 {
        let w = &self.lower;
        let so_this = |s: &str| s == "so" || s == "this";
        match dist {
            0 => {
                if self.is_negator(&w[i - 1]) {
                    v *= self.params.negation_factor;
                }
            }
            1 => {
                if w[i - 2] == "never" && so_this(&w[i - 1]) {
                    v *= self.params.never_so_boost;
                } else if w[i - 2] == "without" && w[i - 1] == "doubt" {
                } else if self.is_negator(&w[i - 2]) {
                    v *= self.params.negation_factor;
                }
            }
            _ => {
                // The reference groups this condition as
                // (never && so/this two back) || so/this one back.
                if (w[i - 3] == "never" && so_this(&w[i - 2])) || so_this(&w[i - 1]) {
                    v *= self.params.never_so_boost;
                } else if w[i - 3] == "without" && (w[i - 2] == "doubt" || w[i - 1] == "doubt") {
                } else if self.is_negator(&w[i - 3]) {
                    v *= self.params.negation_factor;
                }
            }
        }
        v
    }

    fn idioms(&self, mut v: f64, i: usize) -> f64 {
        let w = &self.lower;
        let onezero = format!("{} {}", w[i - 1], w[i]);
        let twoonezero = format!("{} {} {}", w[i - 2], w[i - 1], w[i]);
        let twoone = format!("{} {}", w[i - 2], w[i - 1]);
        let threetwoone = format!("{} {} {}", w[i - 3], w[i - 2], w[i - 1]);
        let threetwo = format!("{} {}", w[i - 3], w[i - 2]);
        for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
            if let Some(&iv) = self.lex.idioms.get(seq.as_str()) {
                v = iv;
                break;
            }
        }
        if w.len() - 1 > i {
            if let Some(&iv) = self.lex.idioms.get(&format!("{} {}", w[i], w[i + 1])) {
                v = iv;
            }
        }
        if w.len() - 1 > i + 1 {
            if let Some(&iv) = self.lex.idioms.get(&format!("{} {} {}", w[i], w[i + 1], w[i + 2])) {
                v = iv;
            }
        }
        for gram in [&threetwoone, &threetwo, &twoone] {
            if let Some(&inc) = self.lex.boosters.get(gram.as_str()) {
                v += inc;
            }
        }
        v
    }

    fn least(&self, mut v: f64, i: usize) -> f64 {
        let w = &self.lower;
        if i > 1 && !self.in_lexicon(i - 1) && w[i - 1] == "least" {
            if w[i - 2] != "at" && w[i - 2] != "very" {
                v *= self.params.negation_factor;
            }
        } else if i > 0 && !self.in_lexicon(i - 1) && w[i - 1] == "least" {
            v *= self.params.negation_factor;
        }
        v
    }

    fn term_valence(&self, i: usize, base: f64) -> f64 {
        let w = &self.lower;
        let n = w.len();
        let p = self.params;
        let mut v = base;
        if w[i] == "no" && i != n - 1 && self.in_lexicon(i + 1) {
            v = 0.0;
        }
        if (i > 0 && w[i - 1] == "no")
            || (i > 1 && w[i - 2] == "no")
            || (i > 2 && w[i - 3] == "no" && (w[i - 1] == "or" || w[i - 1] == "nor"))
        {
            v = base * p.negation_factor;
        }
        if is_upper(self.words[i]) && self.cap_diff {
            if v > 0.0 {
                v += p.caps_boost;
            } else {
                v -= p.caps_boost;
            }
        }
        for dist in 0..3 {
            if i > dist && !self.in_lexicon(i - dist - 1) {
                let s = self.booster_scalar(i - dist - 1, v);
                v += s * p.booster_decay[dist];
                v = self.negation(v, dist, i);
                if dist == 2 {
                    v = self.idioms(v, i);
                }
            }
        }
        self.least(v, i)
    }

    fn punctuation_emphasis(&self, text: &str) -> f64 {
        let p = self.params;
        let ep = text.matches('!').count().min(p.exclamation_cap);
        let qm = text.matches('?').count();
        let qm_amp = if qm > 1 {
            if qm <= p.question_cap {
                qm as f64 * p.question_weight
            } else {
                p.question_flood
            }
        } else {
            0.0
        };
        ep as f64 * p.exclamation_weight + qm_amp
    }
}

/// Per-token adjusted valences before aggregation, aligned with the
/// whitespace tokens of `text`.
pub fn valence_terms(text: &str, lexicon: &ValenceLexicon, params: &ValenceParams) -> Vec<f64> {
    let words: Vec<&str> = text.split_whitespace().map(strip_punct_if_word).collect();
    let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    let allcaps = words.iter().filter(|w| is_upper(w)).count();
    let cap_diff = allcaps > 0 && allcaps < words.len();
    let rules = ValenceRules {
        lex: lexicon,
        params,
        words,
        lower,
        cap_diff,
    };

    let n = rules.lower.len();
    let mut sentiments = Vec::with_capacity(n);
    for i in 0..n {
        let lw = &rules.lower[i];
        if lexicon.boosters.contains_key(lw) || (i + 1 < n && lw == "kind" && rules.lower[i + 1] == "of") {
            sentiments.push(0.0);
            continue;
        }
        let v = match lexicon.entries.get(lw) {
            Some(&base) => rules.term_valence(i, base),
            None => 0.0,
        };
        sentiments.push(v);
    }

    if let Some(bi) = rules.lower.iter().position(|w| w == "but") {
        for (si, s) in sentiments.iter_mut().enumerate() {
            if si < bi {
                *s *= params.but_before;
            } else if si > bi {
                *s *= params.but_after;
            }
        }
    }
    sentiments
}

/// Compound valence score in the open interval (-1, 1).
pub fn score_valence(text: &str, lexicon: &ValenceLexicon, params: &ValenceParams) -> Result<SentimentScore> {
    if lexicon.entries.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    let terms = valence_terms(text, lexicon, params);
    let mut sum: f64 = terms.iter().sum();
    if !terms.is_empty() {
        let amp = ValenceRules {
            lex: lexicon,
            params,
            words: Vec::new(),
            lower: Vec::new(),
            cap_diff: false,
        }
        .punctuation_emphasis(text);
        if sum > 0.0 {
            sum += amp;
        } else if sum < 0.0 {
            sum -= amp;
        }
    }
    let compound = (sum / (sum * sum + params.alpha).sqrt()).clamp(-BELOW_ONE, BELOW_ONE);
    Ok(SentimentScore {
        value: compound,
        scorer: Scorer::Valence,
    })
}

/// Multiplier applied to a polarity preceded by a negator.
pub const POLARITY_NEGATION: f64 = -0.5;
/// How many preceding tokens are checked for a negator.
pub const POLARITY_NEGATION_WINDOW: usize = 2;

/// Mean polarity of matched lexicon terms, 0.0 when nothing matches.
pub fn score_polarity(text: &str, lexicon: &PolarityLexicon) -> Result<SentimentScore> {
    if lexicon.entries.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    let tokens = tokenize(text);
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, tok) in tokens.iter().enumerate() {
        let Some(&p) = lexicon.entries.get(tok) else {
            continue;
        };
        let negated = tokens[i.saturating_sub(POLARITY_NEGATION_WINDOW)..i]
            .iter()
            .any(|t| lexicon.negators.contains(t));
        sum += if negated { p * POLARITY_NEGATION } else { p };
        n += 1;
    }
    let value = if n == 0 { 0.0 } else { (sum / n as f64).clamp(-1.0, 1.0) };
    Ok(SentimentScore {
        value,
        scorer: Scorer::Polarity,
    })
}

/// Decision thresholds: `value >= t_pos` is Positive, `value <= t_neg` Negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t_pos: f64,
    pub t_neg: f64,
}

/// Half-width of the polarity scorer's neutral band around zero.
pub const POLARITY_EPSILON: f64 = 1e-9;

impl Thresholds {
    pub fn new(t_pos: f64, t_neg: f64) -> Result<Self> {
        if t_neg > t_pos {
            return Err(Error::InvalidParameter(format!(
                "threshold t_neg={t_neg} exceeds t_pos={t_pos}"
            )));
        }
        Ok(Thresholds { t_pos, t_neg })
    }

    pub fn valence_default() -> Self {
        Thresholds {
            t_pos: 0.05,
            t_neg: -0.05,
        }
    }

    pub fn polarity_default() -> Self {
        Thresholds {
            t_pos: POLARITY_EPSILON,
            t_neg: -POLARITY_EPSILON,
        }
    }
}

impl FromStr for Thresholds {
    type Err = Error;

    /// `T_POS:T_NEG`; a single value `T` means `T:-T`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("thresholds {s:?} are not T_POS:T_NEG"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        match s.split_once(':') {
            Some((p, n)) => Thresholds::new(num(p)?, num(n)?),
            None => {
                let t = num(s)?;
                Thresholds::new(t, -t)
            }
        }
    }
}

pub fn binarize(score: SentimentScore, thresholds: Thresholds) -> SentimentLabel {
    if score.value >= thresholds.t_pos {
        SentimentLabel::Positive
    } else if score.value <= thresholds.t_neg {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    }
}

pub fn consensus(label_a: SentimentLabel, label_b: SentimentLabel) -> Option<Label> {
    if label_a == label_b {
        label_a.binary()
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusRecord {
    pub message_id: String,
    pub label_a: SentimentLabel,
    pub label_b: SentimentLabel,
    pub consensus: Option<Label>,
}

impl ConsensusRecord {
    pub fn new(message_id: impl Into<String>, label_a: SentimentLabel, label_b: SentimentLabel) -> Self {
        ConsensusRecord {
            message_id: message_id.into(),
            label_a,
            label_b,
            consensus: consensus(label_a, label_b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementStats {
    pub agreed_positive: usize,
    pub agreed_negative: usize,
    pub inconsistent: usize,
    pub total: usize,
    pub agreement_pct: f64,
}

impl AgreementStats {
    /// Builds stats from published counts; everything not agreed is inconsistent.
    pub fn from_counts(agreed_positive: usize, agreed_negative: usize, total: usize) -> Result<Self> {
        if total == 0 {
            return Err(Error::EmptyInput);
        }
        let agreed = agreed_positive + agreed_negative;
        if agreed > total {
            return Err(Error::InvalidParameter(format!(
                "{agreed} agreed labels exceed total {total}"
            )));
        }
        Ok(AgreementStats {
            agreed_positive,
            agreed_negative,
            inconsistent: total - agreed,
            total,
            agreement_pct: 100.0 * agreed as f64 / total as f64,
        })
    }

    /// Percentage of all records that are agreed Positive.
    pub fn positive_share(&self) -> f64 {
        100.0 * self.agreed_positive as f64 / self.total as f64
    }

    pub fn negative_share(&self) -> f64 {
        100.0 * self.agreed_negative as f64 / self.total as f64
    }
}

pub fn agreement_stats(records: &[ConsensusRecord]) -> Result<AgreementStats> {
    let pos = records.iter().filter(|r| r.consensus == Some(Label::Positive)).count();
    let neg = records.iter().filter(|r| r.consensus == Some(Label::Negative)).count();
    AgreementStats::from_counts(pos, neg, records.len())
}

/// Both scorers with their lexicons, parameters and thresholds.
#[derive(Debug, Clone)]
pub struct Labeler {
    pub valence: ValenceLexicon,
    pub polarity: PolarityLexicon,
    pub params: ValenceParams,
    pub valence_thresholds: Thresholds,
    pub polarity_thresholds: Thresholds,
}

impl Labeler {
    pub fn demo() -> Self {
        Labeler {
            valence: ValenceLexicon::demo(),
            polarity: PolarityLexicon::demo(),
            params: ValenceParams::default(),
            valence_thresholds: Thresholds::valence_default(),
            polarity_thresholds: Thresholds::polarity_default(),
        }
    }

    pub fn label(&self, message_id: &str, text: &str) -> Result<ConsensusRecord> {
        let a = score_valence(text, &self.valence, &self.params)?;
        let b = score_polarity(text, &self.polarity)?;
        Ok(ConsensusRecord::new(
            message_id,
            binarize(a, self.valence_thresholds),
            binarize(b, self.polarity_thresholds),
        ))
    }

    /// Labels `(id, text)` pairs in parallel; output order follows input order.
    pub fn label_all<'a, I>(&self, items: I) -> Result<Vec<ConsensusRecord>>
    where
        I: IntoParallelIterator<Item = (&'a str, &'a str)>,
        I::Iter: IndexedParallelIterator,
    {
        items
            .into_par_iter()
            .map(|(id, text)| self.label(id, text))
            .collect()
    }

    pub fn label_messages(&self, messages: &[crate::corpus::Message]) -> Result<Vec<ConsensusRecord>> {
        messages.par_iter().map(|m| self.label(&m.id, &m.body)).collect()
    }
}

/// Writes `message_id,label_a,label_b,consensus` with a blank consensus for None.
pub fn write_labels_csv<W: Write>(w: W, records: &[ConsensusRecord]) -> Result<()> {
    let origin = Path::new("<labels>");
    let csv_err = |e| Error::Csv {
        path: origin.into(),
        source: e,
    };
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["message_id", "label_a", "label_b", "consensus"]).map_err(csv_err)?;
    for r in records {
        wtr.write_record([
            r.message_id.as_str(),
            r.label_a.as_str(),
            r.label_b.as_str(),
            r.consensus.map(Label::as_str).unwrap_or(""),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::io(origin, e))?;
    Ok(())
}

pub fn read_labels_csv<R: Read>(r: R, origin: &Path) -> Result<Vec<ConsensusRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Csv {
            path: origin.into(),
            source: e,
        })?;
        let bad = |m: String| Error::Parse {
            path: origin.into(),
            line: i + 2,
            message: m,
        };
        let field = |k: usize| row.get(k).ok_or_else(|| bad(format!("missing column {k}")));
        let a: SentimentLabel = field(1)?.parse().map_err(bad)?;
        let b: SentimentLabel = field(2)?.parse().map_err(bad)?;
        let rec = ConsensusRecord::new(field(0)?, a, b);
        let stated = field(3)?.trim();
        let stated = if stated.is_empty() {
            None
        } else {
            Some(stated.parse::<Label>().map_err(bad)?)
        };
        if stated != rec.consensus {
            return Err(bad("consensus column contradicts label_a/label_b".into()));
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex() -> ValenceLexicon {
        ValenceLexicon::demo()
    }

    fn compound(text: &str) -> f64 {
        score_valence(text, &lex(), &ValenceParams::default()).unwrap().value
    }

    #[test]
    fn empty_text_scores_zero() {
        assert_eq!(compound(""), 0.0);
        assert_eq!(compound("   "), 0.0);
    }

    #[test]
    fn single_term_is_normalized_valence() {
        let v = lex().entries["good"];
        assert_eq!(compound("good"), v / (v * v + 15.0).sqrt());
    }

    #[test]
    fn negation_flips_and_shrinks() {
        let pos = compound("The food is good");
        let neg = compound("The food is not good");
        assert!(pos > 0.0 && neg < 0.0);
        assert!(neg.abs() < pos.abs());
        // -0.74 * 1.9 = -1.406
        let s: f64 = -0.74 * 1.9;
        assert!((neg - s / (s * s + 15.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn booster_caps_and_exclamation_raise_intensity() {
        let base = compound("the food is good");
        assert!(compound("the food is very good") > base);
        assert!(compound("the food is GOOD") > base);
        assert!(compound("the food is good!") > base);
        // Capped at four exclamation marks.
        assert_eq!(compound("good!!!!"), compound("good!!!!!!!"));
    }

    #[test]
    fn but_reweights_clauses() {
        let terms = valence_terms("good but bad", &lex(), &ValenceParams::default());
        assert_eq!(terms, vec![1.9 * 0.5, 0.0, -2.5 * 1.5]);
    }

    #[test]
    fn empty_lexicon_is_an_error() {
        let empty = ValenceLexicon::default();
        assert!(matches!(
            score_valence("good", &empty, &ValenceParams::default()),
            Err(Error::EmptyLexicon)
        ));
        assert!(matches!(
            score_polarity("good", &PolarityLexicon::default()),
            Err(Error::EmptyLexicon)
        ));
    }

    #[test]
    fn lexicon_categories_must_be_disjoint() {
        let err = ValenceLexicon::parse("very\t1.0\n", "very\t0.293\n", "not\n", &ValenceParams::default());
        assert!(matches!(err, Err(Error::LexiconOverlap { .. })));
        let err = PolarityLexicon::parse("great\t1.5\n", "not\n");
        assert!(err.is_err());
    }

    #[test]
    fn lexicon_parsing_ignores_comments_and_extra_columns() {
        let l = ValenceLexicon::parse("# c\ngood\t1.9\t0.9\t[1, 2]\n\n", "very\n", "not\n", &ValenceParams::default())
            .unwrap();
        assert_eq!(l.entries["good"], 1.9);
        assert_eq!(l.boosters["very"], 0.293);
        assert!(ValenceLexicon::parse("good\n", "", "", &ValenceParams::default()).is_err());
    }

    #[test]
    fn polarity_examples() {
        let l = PolarityLexicon::parse("great\t0.8\nbad\t-0.7\n", "not\n").unwrap();
        let p = |t: &str| score_polarity(t, &l).unwrap().value;
        assert_eq!(p("nothing here"), 0.0);
        assert_eq!(p("great"), 0.8);
        assert_eq!(p("not great"), -0.4);
        assert_eq!(p("not a great"), -0.4);
        assert_eq!(p("not a very great"), 0.8);
        assert!((p("great and bad") - 0.05).abs() < 1e-12);
    }

    #[test]
    fn binarize_examples() {
        let v = |x| SentimentScore {
            value: x,
            scorer: Scorer::Valence,
        };
        let d = Thresholds::valence_default();
        assert_eq!(binarize(v(0.9), d), SentimentLabel::Positive);
        assert_eq!(binarize(v(0.0), d), SentimentLabel::Neutral);
        assert_eq!(binarize(v(-0.05), d), SentimentLabel::Negative);
        assert_eq!(binarize(v(0.0), Thresholds::polarity_default()), SentimentLabel::Neutral);
        assert_eq!(binarize(v(0.01), Thresholds::polarity_default()), SentimentLabel::Positive);
        assert!(Thresholds::new(-0.1, 0.1).is_err());
        assert_eq!("0:0".parse::<Thresholds>().unwrap(), Thresholds::new(0.0, 0.0).unwrap());
    }

    #[test]
    fn consensus_examples() {
        use SentimentLabel::*;
        assert_eq!(consensus(Positive, Positive), Some(Label::Positive));
        assert_eq!(consensus(Positive, Negative), None);
        assert_eq!(consensus(Neutral, Neutral), None);
        assert_eq!(consensus(Neutral, Negative), None);
    }

    #[test]
    fn agreement_examples() {
        let uk = AgreementStats::from_counts(1570, 1001, 4218).unwrap();
        assert!((uk.agreement_pct - 60.95).abs() < 0.01);
        assert_eq!(uk.inconsistent, 1647);
        let uk_band = AgreementStats::from_counts(1390, 956, 3886).unwrap();
        assert!((uk_band.positive_share() - 35.77).abs() < 0.01);

        let all_pos: Vec<_> = (0..5)
            .map(|i| ConsensusRecord::new(i.to_string(), SentimentLabel::Positive, SentimentLabel::Positive))
            .collect();
        let s = agreement_stats(&all_pos).unwrap();
        assert_eq!(s.agreement_pct, 100.0);
        assert_eq!(s.agreed_negative, 0);
        assert!(agreement_stats(&[]).is_err());
    }

    #[test]
    fn labels_csv_round_trip() {
        use SentimentLabel::*;
        let recs = vec![
            ConsensusRecord::new("a,1", Positive, Positive),
            ConsensusRecord::new("b", Neutral, Negative),
        ];
        let mut buf = Vec::new();
        write_labels_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("message_id,label_a,label_b,consensus\n"));
        assert!(text.contains("b,neutral,negative,\n"));
        assert_eq!(read_labels_csv(&buf[..], Path::new("x")).unwrap(), recs);
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec![
            "good", "bad", "not", "very", "but", "the", "GREAT", "least", "no", "never", "so", "kind", "of",
            "virus", "!", "?", "horrible", "happy", "without", "doubt", "sux",
        ])
        .prop_map(str::to_string)
    }

    proptest! {
        #[test]
        fn scores_stay_in_range_and_are_deterministic(words in prop::collection::vec(word(), 0..30)) {
            let text = words.join(" ");
            let a = compound(&text);
            prop_assert!(a > -1.0 && a < 1.0);
            prop_assert_eq!(a.to_bits(), compound(&text).to_bits());
            let p = score_polarity(&text, &PolarityLexicon::demo()).unwrap().value;
            prop_assert!((-1.0..=1.0).contains(&p));
        }

        #[test]
        fn adding_positive_term_never_lowers_compound(
            words in prop::collection::vec(prop::sample::select(vec!["the", "virus", "good", "happy", "bad", "news"]), 0..20)
        ) {
            let text = words.join(" ");
            let more = format!("{text} the happy");
            prop_assert!(compound(&more) >= compound(&text));
        }

        #[test]
        fn consensus_is_symmetric(a in 0usize..3, b in 0usize..3) {
            let l = [SentimentLabel::Positive, SentimentLabel::Negative, SentimentLabel::Neutral];
            prop_assert_eq!(consensus(l[a], l[b]), consensus(l[b], l[a]));
        }
    }
}
