//! Run configuration, orchestration, report emission and synthetic
//! fixtures.

mod config;
mod emit;
mod fixtures;
mod run;

use std::error::Error;
use std::path::PathBuf;

use thiserror::Error;

pub use config::{Analysis, PsychosocialConfig, ReportFormat, RunConfig, StyleConfig, TopicsConfig};
pub use emit::{emit_report, markdown, write_grid};
pub use fixtures::{
    fixture_embeddings, fixture_interactions, generate_fixture, write_fixture_bundle, FixtureKind, FIRST_PERSON_BASE,
    FIRST_PERSON_LIFT, FIXTURE_USER_TURNS, SPIKE_BOOST,
};
pub use run::{
    ingest, load_report, run_pipeline, CorpusStats, DialogueLevel, HarmSection, PostSpike, Report, RunMetadata,
    SalientStats, StyleSection, TurnLevel, REPORT_SCHEMA, SCHEMA_VERSION,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{module}: {source}")]
    Input { module: &'static str, source: Box<dyn Error + Send + Sync> },
    #[error("{module} failed: {source}")]
    Analysis { module: &'static str, source: Box<dyn Error + Send + Sync> },
    #[error("cannot write {}: {reason}", path.display())]
    Output { path: PathBuf, reason: String },
}

impl PipelineError {
    pub(crate) fn input(module: &'static str, e: impl Into<Box<dyn Error + Send + Sync>>) -> Self {
        PipelineError::Input { module, source: e.into() }
    }

    /// 1 input or configuration, 2 analysis, 3 output.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Input { .. } => 1,
            PipelineError::Analysis { .. } => 2,
            PipelineError::Output { .. } => 3,
        }
    }
}
