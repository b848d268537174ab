//! Pipeline configuration, read from TOML and echoed next to every output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{AlgorithmKind, Hyperparams};
use crate::corpus::{BotFilter, DateRange, IngestFilters, KeywordFilter, LengthBand, DEFAULT_BOT_BLOCKLIST, DEFAULT_KEYWORDS};
use crate::error::{Error, Result};
use crate::eval::{GridSpec, Pooling};
use crate::features::Representation;
use crate::lexsent::{Labeler, PolarityLexicon, Thresholds, ValenceLexicon, ValenceParams};

pub const EFFECTIVE_CONFIG_FILE: &str = "effective-config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Dataset name; selects the per-dataset SVM soft margin.
    pub dataset: String,
    pub input: InputConfig,
    pub corpus: CorpusConfig,
    pub lexicon: LexiconConfig,
    pub labeling: LabelingConfig,
    pub valence: ValenceParams,
    pub features: FeatureConfig,
    pub classify: ClassifyConfig,
    pub cv: CvConfig,
    pub annotate: AnnotateConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// JSONL comment dump read by `ingest`.
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub keywords: Vec<String>,
    pub bot_blocklist: Vec<String>,
    /// `MIN:MAX` inclusive word counts.
    pub band: String,
    pub date_start: Option<i64>,
    pub date_end: Option<i64>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            keywords: DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            bot_blocklist: DEFAULT_BOT_BLOCKLIST.iter().map(|s| s.to_string()).collect(),
            band: LengthBand::default().to_string(),
            date_start: None,
            date_end: None,
        }
    }
}

/// Lexicon files; unset entries use the bundled demo lexicons.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconConfig {
    pub valence: Option<PathBuf>,
    pub boosters: Option<PathBuf>,
    pub negators: Option<PathBuf>,
    pub polarity: Option<PathBuf>,
    pub polarity_negators: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelingConfig {
    /// `POS:NEG` thresholds for the valence scorer.
    pub valence_thresholds: String,
    /// `POS:NEG` thresholds for the polarity scorer.
    pub polarity_thresholds: String,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        let fmt = |t: Thresholds| format!("{}:{}", t.t_pos, t.t_neg);
        LabelingConfig {
            valence_thresholds: fmt(Thresholds::valence_default()),
            polarity_thresholds: fmt(Thresholds::polarity_default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub representations: Vec<Representation>,
    pub min_freqs: Vec<usize>,
    pub global_vocabulary: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            representations: vec![Representation::Bow, Representation::Tfidf],
            min_freqs: (1..=10).collect(),
            global_vocabulary: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub algorithms: Vec<AlgorithmKind>,
    pub hyperparams: Hyperparams,
    /// Soft margin by dataset name; overrides `hyperparams.svm_c`.
    pub svm_c_by_dataset: BTreeMap<String, f64>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            algorithms: AlgorithmKind::ALL.to_vec(),
            hyperparams: Hyperparams::default(),
            svm_c_by_dataset: [("canada".to_string(), 0.3), ("uk".to_string(), 0.4)].into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub pooling: Pooling,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            pooling: Pooling::Pooled,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateConfig {
    /// Timestamp written into every record instead of the wall clock.
    pub fixed_timestamp: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            out: PathBuf::from("out"),
            dataset: "uk".into(),
            input: InputConfig::default(),
            corpus: CorpusConfig::default(),
            lexicon: LexiconConfig::default(),
            labeling: LabelingConfig::default(),
            valence: ValenceParams::default(),
            features: FeatureConfig::default(),
            classify: ClassifyConfig::default(),
            cv: CvConfig::default(),
            annotate: AnnotateConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PipelineConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Writes the effective configuration into the output directory.
    pub fn echo(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        let path = self.out.join(EFFECTIVE_CONFIG_FILE);
        std::fs::write(&path, self.to_toml()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        self.band()?;
        self.valence_thresholds()?;
        self.polarity_thresholds()?;
        self.valence.validate()?;
        if self.cv.k < 2 {
            return Err(Error::Config(format!("cv.k must be at least 2, got {}", self.cv.k)));
        }
        if self.features.min_freqs.iter().any(|&m| m == 0) {
            return Err(Error::Config("features.min_freqs must be positive".into()));
        }
        if self.date_range().is_some_and(|r| r.start > r.end) {
            return Err(Error::Config("corpus.date_start is after corpus.date_end".into()));
        }
        Ok(())
    }

    pub fn band(&self) -> Result<LengthBand> {
        self.corpus.band.parse()
    }

    pub fn valence_thresholds(&self) -> Result<Thresholds> {
        self.labeling.valence_thresholds.parse()
    }

    pub fn polarity_thresholds(&self) -> Result<Thresholds> {
        self.labeling.polarity_thresholds.parse()
    }

    pub fn date_range(&self) -> Option<DateRange> {
        match (self.corpus.date_start, self.corpus.date_end) {
            (None, None) => None,
            (s, e) => Some(DateRange {
                start: s.unwrap_or(i64::MIN),
                end: e.unwrap_or(i64::MAX),
            }),
        }
    }

    pub fn ingest_filters(&self) -> Result<IngestFilters> {
        Ok(IngestFilters {
            keywords: KeywordFilter::new(&self.corpus.keywords)?,
            bots: BotFilter::new(&self.corpus.bot_blocklist),
            band: self.band()?,
            date_range: self.date_range(),
        })
    }

    pub fn labeler(&self) -> Result<Labeler> {
        let l = &self.lexicon;
        let valence = match &l.valence {
            Some(p) => ValenceLexicon::load(p, l.boosters.as_deref(), l.negators.as_deref(), &self.valence)?,
            None if l.boosters.is_none() && l.negators.is_none() => ValenceLexicon::demo(),
            None => {
                return Err(Error::Config(
                    "lexicon.boosters or lexicon.negators set without lexicon.valence".into(),
                ))
            }
        };
        let polarity = match &l.polarity {
            Some(p) => PolarityLexicon::load(p, l.polarity_negators.as_deref())?,
            None if l.polarity_negators.is_none() => PolarityLexicon::demo(),
            None => {
                return Err(Error::Config(
                    "lexicon.polarity_negators set without lexicon.polarity".into(),
                ))
            }
        };
        Ok(Labeler {
            valence,
            polarity,
            params: self.valence.clone(),
            valence_thresholds: self.valence_thresholds()?,
            polarity_thresholds: self.polarity_thresholds()?,
        })
    }

    /// Hyperparameters with the dataset's SVM soft margin applied.
    pub fn hyperparams(&self) -> Hyperparams {
        let mut h = self.classify.hyperparams.clone();
        if let Some(&c) = self.classify.svm_c_by_dataset.get(&self.dataset.to_ascii_lowercase()) {
            h.svm_c = c;
        }
        h
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            representations: self.features.representations.clone(),
            min_freqs: self.features.min_freqs.clone(),
            global_vocabulary: self.features.global_vocabulary,
            pooling: self.cv.pooling,
            seed: self.seed,
        }
    }
}
