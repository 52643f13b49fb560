use std::fs::File;
use std::path::Path;

use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{Analysis, RunConfig};
use super::PipelineError;
use crate::corpus::{
    detect_spikes, extract_turn_pairs, fetch_scores, filter_salient, load_corpus, mask_corpus, Corpus, CorpusFormat,
    ScorerMode, Speaker,
};
use crate::dynamics::{
    coupling_regression, dialogue_mean_comparison, dominant_emotion_association, dtw_null_test, post_spike_analysis,
    post_spike_elevation, AssociationResult, CouplingMatrix, DialogueMeanResult, DtwNullResult, ElevationRow,
    SpikeAnalysisResult,
};
use crate::harm::{emotion_harm_correlation, harm_prevalence, response_type_distribution, EmotionHarmCorrelation, HarmPrevalence, ResponseDistribution};
use crate::psychosocial::{self, PsychosocialResult};
use crate::style::{delta_tfidf, self_reference_shift, style_matching_test, DistinctiveTerms, Lexicon, SelfReferenceResult, StyleMatchingResult};
use crate::topics::{cluster_topics, EmbeddingMatrix, TopicModel};
use crate::Warning;

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// JSON Schema (draft 2020-12) of `report.json`.
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config_hash: String,
    pub seed: Option<u64>,
    pub version: String,
    pub analyses: Vec<Analysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub dialogues: usize,
    pub turns: usize,
    pub user_turns: usize,
    pub chatbot_turns: usize,
    pub scored_turns: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalientStats {
    pub threshold: f64,
    pub before: usize,
    pub after: usize,
    pub spike_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueLevel {
    pub means: DialogueMeanResult,
    pub dtw: DtwNullResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnLevel {
    pub pairs: usize,
    pub association: AssociationResult,
    pub coupling: CouplingMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostSpike {
    pub analysis: SpikeAnalysisResult,
    pub elevation: Vec<ElevationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSection {
    pub self_reference: SelfReferenceResult,
    pub matching: StyleMatchingResult,
    pub distinctive_terms: DistinctiveTerms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmSection {
    pub prevalence: HarmPrevalence,
    pub correlation: EmotionHarmCorrelation,
    pub responses: Vec<ResponseDistribution>,
}

/// Everything one run produced. Sections of analyses that were not enabled
/// are absent; section warnings are gathered into `warnings`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub salient: Option<SalientStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dialogue_level: Option<DialogueLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_level: Option<TurnLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_spike: Option<PostSpike>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<StyleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harm: Option<HarmSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psychosocial: Option<PsychosocialResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topics: Option<TopicModel>,
    pub warnings: Vec<Warning>,
}

impl Report {
    /// A report with metadata only.
    pub fn empty(cfg: &RunConfig) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            metadata: RunMetadata {
                config_hash: cfg.hash(),
                seed: cfg.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                analyses: cfg.ordered_analyses(),
                corpus_sha256: None,
            },
            corpus: None,
            salient: None,
            dialogue_level: None,
            turn_level: None,
            post_spike: None,
            style: None,
            harm: None,
            psychosocial: None,
            topics: None,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn load_report(path: &Path) -> Result<Report, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::input("report", e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::input("report", e))
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn corpus_stats(c: &Corpus) -> CorpusStats {
    let turns = c.dialogues.iter().flat_map(|d| &d.turns);
    let (mut user, mut bot, mut scored) = (0, 0, 0);
    for t in turns {
        match t.speaker {
            Speaker::User => user += 1,
            Speaker::Chatbot => bot += 1,
        }
        scored += t.emotions.is_some() as usize;
    }
    CorpusStats {
        dialogues: c.len(),
        turns: c.total_turns(),
        user_turns: user,
        chatbot_turns: bot,
        scored_turns: scored,
        rejected: c.rejects.len(),
    }
}

/// Loads the corpus, scores it when a scorer other than `precomputed` is
/// configured, and applies the mask.
pub fn ingest(cfg: &RunConfig) -> Result<(Corpus, String), PipelineError> {
    let path = cfg.corpus.as_ref().ok_or_else(|| PipelineError::Config("no corpus path given".into()))?;
    let bytes = std::fs::read(path).map_err(|e| PipelineError::input("ingest", format!("{}: {e}", path.display())))?;
    let digest = hex(&bytes);
    let mut corpus = load_corpus(path, CorpusFormat::Auto).map_err(|e| PipelineError::input("ingest", e))?;
    if cfg.scorer.mode != ScorerMode::Precomputed {
        let mut scorer = cfg.scorer.clone();
        scorer.mask = cfg.mask;
        for d in &mut corpus.dialogues {
            d.turns = fetch_scores(&d.turns, &scorer).map_err(|e| PipelineError::input("score", e))?;
        }
    }
    mask_corpus(&mut corpus, cfg.mask);
    Ok((corpus, digest))
}

fn analysis_err(module: &'static str) -> impl Fn(Box<dyn std::error::Error + Send + Sync>) -> PipelineError {
    move |source| PipelineError::Analysis { module, source }
}

/// Runs the enabled analyses in their fixed order. Equal inputs, config and
/// seed give an equal report.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Report, PipelineError> {
    cfg.validate()?;
    match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?
            .install(|| run_inner(cfg)),
        None => run_inner(cfg),
    }
}

fn run_inner(cfg: &RunConfig) -> Result<Report, PipelineError> {
    let mut report = Report::empty(cfg);
    let seed = cfg.seed.unwrap_or(0);
    let order = cfg.ordered_analyses();
    let mut warnings: Vec<Warning> = Vec::new();

    let mut corpus = None;
    if order.iter().any(|a| a.needs_corpus()) {
        let (c, digest) = ingest(cfg)?;
        info!("loaded {} dialogues ({} rejected)", c.len(), c.rejects.len());
        for r in &c.rejects {
            let id = r.id.clone().unwrap_or_else(|| format!("line {}", r.line));
            warnings.push(Warning::new(&id, "rejected", r.reason.clone()));
        }
        report.metadata.corpus_sha256 = Some(digest);
        corpus = Some(c);
    }

    for a in order {
        info!("running {}", a.name());
        match a {
            Analysis::Ingest => report.corpus = corpus.as_ref().map(corpus_stats),
            Analysis::Salient => {
                let c = corpus.take().expect("corpus loaded");
                let salient = filter_salient(&c, cfg.spike_threshold);
                let spike_events = salient.dialogues.iter().map(|d| detect_spikes(d, cfg.spike_threshold).len()).sum();
                report.salient =
                    Some(SalientStats { threshold: cfg.spike_threshold, before: c.len(), after: salient.len(), spike_events });
                corpus = Some(salient);
            }
            Analysis::DialogueLevel => {
                let c = corpus.as_ref().expect("corpus loaded");
                let err = analysis_err("dialogue_level");
                let mut means = dialogue_mean_comparison(c).map_err(|e| err(e.into()))?;
                let mut dtw = dtw_null_test(c, cfg.dtw_resamples, seed).map_err(|e| err(e.into()))?;
                warnings.append(&mut means.warnings);
                // Both report the same missing-speaker dialogues.
                dtw.warnings.clear();
                report.dialogue_level = Some(DialogueLevel { means, dtw });
            }
            Analysis::TurnLevel => {
                let c = corpus.as_ref().expect("corpus loaded");
                let err = analysis_err("turn_level");
                let pairs: Vec<_> = c.dialogues.iter().flat_map(extract_turn_pairs).collect();
                let association = dominant_emotion_association(&pairs).map_err(|e| err(e.into()))?;
                let coupling = coupling_regression(&pairs).map_err(|e| err(e.into()))?;
                report.turn_level = Some(TurnLevel { pairs: pairs.len(), association, coupling });
            }
            Analysis::PostSpike => {
                let c = corpus.as_ref().expect("corpus loaded");
                let err = analysis_err("post_spike");
                let mut analysis = post_spike_analysis(c, cfg.spike_threshold, cfg.permutation_resamples, seed)
                    .map_err(|e| err(e.into()))?;
                let (elevation, _) = post_spike_elevation(c, cfg.spike_threshold);
                warnings.append(&mut analysis.warnings);
                report.post_spike = Some(PostSpike { analysis, elevation });
            }
            Analysis::Style => {
                let c = corpus.as_ref().expect("corpus loaded");
                let err = analysis_err("style");
                let owned;
                let lex = match &cfg.style.lexicon {
                    Some(p) => {
                        owned = Lexicon::load(p).map_err(|e| PipelineError::input("style", e))?;
                        &owned
                    }
                    None => Lexicon::function_words(),
                };
                let mut self_reference = self_reference_shift(c, lex, cfg.spike_threshold).map_err(|e| err(e.into()))?;
                let matching = style_matching_test(c, lex, cfg.spike_threshold).map_err(|e| err(e.into()))?;
                let distinctive_terms =
                    delta_tfidf(c, cfg.style.top_terms, cfg.spike_threshold).map_err(|e| err(e.into()))?;
                warnings.append(&mut self_reference.warnings);
                report.style = Some(StyleSection { self_reference, matching, distinctive_terms });
            }
            Analysis::Harm => {
                let c = corpus.as_ref().expect("corpus loaded");
                let mut prevalence = harm_prevalence(c, cfg.harm_threshold);
                let correlation =
                    emotion_harm_correlation(c, cfg.spike_threshold).map_err(|e| analysis_err("harm")(e.into()))?;
                let responses = response_type_distribution(c, cfg.harm_threshold);
                warnings.append(&mut prevalence.warnings);
                report.harm = Some(HarmSection { prevalence, correlation, responses });
            }
            Analysis::Psychosocial => {
                let p = &cfg.psychosocial;
                let open = |path: &Path| File::open(path).map_err(|e| PipelineError::input("psychosocial", format!("{}: {e}", path.display())));
                let interactions_path = p.interactions.as_ref().expect("validated");
                let interactions = psychosocial::read_interactions(open(interactions_path)?)
                    .map_err(|e| PipelineError::input("psychosocial", e))?;
                let seeds = match &p.seed_pairs {
                    Some(path) => psychosocial::read_seed_pairs(open(path)?).map_err(|e| PipelineError::input("psychosocial", e))?,
                    None => psychosocial::default_seed_pairs(),
                };
                let groups = match &p.groups {
                    Some(path) => psychosocial::read_groups(open(path)?).map_err(|e| PipelineError::input("psychosocial", e))?,
                    None => psychosocial::default_groups(),
                };
                let params = psychosocial::Node2vecParams { seed, ..p.node2vec.clone() };
                let mut result = psychosocial::analyze(&interactions, &params, &seeds, &groups)
                    .map_err(|e| analysis_err("psychosocial")(e.into()))?;
                warnings.append(&mut result.warnings);
                report.psychosocial = Some(result);
            }
            Analysis::Topics => {
                let path = cfg.topics.embeddings.as_ref().expect("validated");
                let m = EmbeddingMatrix::load(path).map_err(|e| PipelineError::input("topics", e))?;
                let lambda = cfg.topics.lambda.expect("validated");
                let model = cluster_topics(&m, lambda, cfg.topics.keywords).map_err(|e| analysis_err("topics")(e.into()))?;
                report.topics = Some(model);
            }
        }
    }
    warnings.sort();
    warnings.dedup();
    report.warnings = warnings;
    Ok(report)
}
