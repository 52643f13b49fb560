use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::corpus::{ScorerConfig, DEFAULT_MASK, DEFAULT_SPIKE_THRESHOLD};
use crate::dynamics::{DEFAULT_NULL_RESAMPLES, DEFAULT_PERMUTATION_RESAMPLES};
use crate::psychosocial::Node2vecParams;

/// Analyses in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Ingest,
    Salient,
    DialogueLevel,
    TurnLevel,
    PostSpike,
    Style,
    Harm,
    Psychosocial,
    Topics,
}

impl Analysis {
    pub const ALL: [Analysis; 9] = [
        Analysis::Ingest,
        Analysis::Salient,
        Analysis::DialogueLevel,
        Analysis::TurnLevel,
        Analysis::PostSpike,
        Analysis::Style,
        Analysis::Harm,
        Analysis::Psychosocial,
        Analysis::Topics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Ingest => "ingest",
            Analysis::Salient => "salient",
            Analysis::DialogueLevel => "dialogue_level",
            Analysis::TurnLevel => "turn_level",
            Analysis::PostSpike => "post_spike",
            Analysis::Style => "style",
            Analysis::Harm => "harm",
            Analysis::Psychosocial => "psychosocial",
            Analysis::Topics => "topics",
        }
    }

    pub fn parse(s: &str) -> Option<Analysis> {
        let s = s.trim().replace('-', "_");
        Analysis::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Consumes the dialogue corpus.
    pub fn needs_corpus(self) -> bool {
        !matches!(self, Analysis::Psychosocial | Analysis::Topics)
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Analysis::DialogueLevel | Analysis::PostSpike | Analysis::Psychosocial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    CsvBundle,
    Markdown,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<ReportFormat> {
        match s.trim() {
            "json" => Some(ReportFormat::Json),
            "csv-bundle" | "csv" => Some(ReportFormat::CsvBundle),
            "markdown" | "md" => Some(ReportFormat::Markdown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StyleConfig {
    /// Function-word lexicon file; the bundled one when absent.
    pub lexicon: Option<PathBuf>,
    pub top_terms: usize,
}

impl Default for StyleConfig {
    fn default() -> Self {
        StyleConfig { lexicon: None, top_terms: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsychosocialConfig {
    pub interactions: Option<PathBuf>,
    /// Bundled seed pairs when absent.
    pub seed_pairs: Option<PathBuf>,
    /// Bundled community groups when absent.
    pub groups: Option<PathBuf>,
    /// The run seed replaces `node2vec.seed`.
    pub node2vec: Node2vecParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsConfig {
    pub embeddings: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub keywords: usize,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        TopicsConfig { embeddings: None, lambda: None, keywords: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub scorer: ScorerConfig,
    pub mask: f64,
    pub spike_threshold: f64,
    pub harm_threshold: f64,
    pub dtw_resamples: usize,
    pub permutation_resamples: usize,
    pub seed: Option<u64>,
    pub analyses: Vec<Analysis>,
    pub out_dir: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
    /// Worker threads; rayon's default when absent.
    pub jobs: Option<usize>,
    pub style: StyleConfig,
    pub psychosocial: PsychosocialConfig,
    pub topics: TopicsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            scorer: ScorerConfig::default(),
            mask: DEFAULT_MASK,
            spike_threshold: DEFAULT_SPIKE_THRESHOLD,
            harm_threshold: 0.5,
            dtw_resamples: DEFAULT_NULL_RESAMPLES,
            permutation_resamples: DEFAULT_PERMUTATION_RESAMPLES,
            seed: None,
            analyses: Analysis::ALL[..7].to_vec(),
            out_dir: None,
            formats: vec![ReportFormat::Json],
            jobs: None,
            style: StyleConfig::default(),
            psychosocial: PsychosocialConfig::default(),
            topics: TopicsConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a TOML file; relative input paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<RunConfig, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(x) = p.as_mut().filter(|x| x.is_relative()) {
                *x = base.join(&*x);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.out_dir);
        fix(&mut self.style.lexicon);
        fix(&mut self.psychosocial.interactions);
        fix(&mut self.psychosocial.seed_pairs);
        fix(&mut self.psychosocial.groups);
        fix(&mut self.topics.embeddings);
    }

    pub fn enabled(&self, a: Analysis) -> bool {
        self.analyses.contains(&a)
    }

    /// Enabled analyses in execution order, without repeats.
    pub fn ordered_analyses(&self) -> Vec<Analysis> {
        Analysis::ALL.into_iter().filter(|a| self.enabled(*a)).collect()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        for (name, v) in [("mask", self.mask), ("spike_threshold", self.spike_threshold), ("harm_threshold", self.harm_threshold)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.dtw_resamples == 0 || self.permutation_resamples == 0 {
            return bad("resample counts must be positive".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive".into());
        }
        let order = self.ordered_analyses();
        if self.seed.is_none() && order.iter().any(|a| a.is_stochastic()) {
            return bad("a seed is required when dialogue_level, post_spike or psychosocial is enabled".into());
        }
        if self.corpus.is_none() && order.iter().any(|a| a.needs_corpus()) {
            return bad("no corpus path given".into());
        }
        if self.enabled(Analysis::Psychosocial) {
            if self.psychosocial.interactions.is_none() {
                return bad("psychosocial needs an interactions file".into());
            }
            self.psychosocial.node2vec.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        if self.enabled(Analysis::Topics) {
            if self.topics.embeddings.is_none() {
                return bad("topics needs an embeddings file".into());
            }
            match self.topics.lambda {
                Some(l) if l > 0.0 && l.is_finite() => {}
                Some(l) => return bad(format!("topics lambda must be positive, got {l}")),
                None => return bad("topics needs a lambda".into()),
            }
        }
        self.scorer.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded. Fields that cannot
    /// change results (`jobs`, `out_dir`, `formats`) are left out.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { jobs: None, out_dir: None, formats: Vec::new(), ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
