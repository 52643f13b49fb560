use std::path::Path;

use affectdyn::pipeline::{
    emit_report, load_report, run_pipeline, write_fixture_bundle, Analysis, FixtureKind, PipelineError, Report,
    ReportFormat, RunConfig,
};

fn bundle(dir: &Path, kind: FixtureKind, n: usize, seed: u64) -> RunConfig {
    let path = write_fixture_bundle(dir, kind, n, seed).unwrap();
    let mut cfg = RunConfig::load(&path).unwrap();
    cfg.dtw_resamples = 200;
    cfg.permutation_resamples = 500;
    cfg.psychosocial.node2vec.epochs = 1;
    cfg.psychosocial.node2vec.walks_per_node = 4;
    cfg
}

#[test]
fn ingest_only_gives_corpus_section_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = bundle(dir.path(), FixtureKind::Mirroring, 20, 1);
    cfg.analyses = vec![Analysis::Ingest];
    cfg.seed = None;
    let r = run_pipeline(&cfg).unwrap();
    let stats = r.corpus.as_ref().unwrap();
    assert_eq!(stats.dialogues, 20);
    assert_eq!(stats.user_turns, stats.chatbot_turns);
    assert!(r.salient.is_none() && r.turn_level.is_none() && r.harm.is_none());
    assert!(r.psychosocial.is_none() && r.topics.is_none());
    assert_eq!(r.metadata.analyses, vec![Analysis::Ingest]);
    assert!(r.metadata.corpus_sha256.is_some());
}

#[test]
fn every_enabled_analysis_appears_once() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundle(dir.path(), FixtureKind::SpikeAmplify, 40, 2);
    let r = run_pipeline(&cfg).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for a in Analysis::ALL {
        let key = if a == Analysis::Ingest { "corpus" } else { a.name() };
        assert!(v.get(key).is_some(), "{key} missing");
    }
    assert_eq!(v["schema_version"], 1);
    for w in &r.warnings {
        assert!(!w.dialogue_id.is_empty() && !w.code.is_empty());
    }
}

#[test]
fn same_seed_same_bytes_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = bundle(dir.path(), FixtureKind::Mirroring, 40, 9);
    let a = run_pipeline(&cfg).unwrap().to_json();
    let b = run_pipeline(&cfg).unwrap().to_json();
    assert_eq!(a, b);
    cfg.jobs = Some(1);
    let c = run_pipeline(&cfg).unwrap().to_json();
    cfg.jobs = Some(4);
    let d = run_pipeline(&cfg).unwrap().to_json();
    assert_eq!(a, c);
    assert_eq!(a, d);
    cfg.seed = Some(10);
    assert_ne!(a, run_pipeline(&cfg).unwrap().to_json());
}

#[test]
fn emits_all_formats_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundle(dir.path(), FixtureKind::Mirroring, 40, 4);
    let r = run_pipeline(&cfg).unwrap();
    let out = dir.path().join("out");
    let json = emit_report(&r, ReportFormat::Json, &out).unwrap();
    assert_eq!(load_report(&json[0]).unwrap(), r);

    let files = emit_report(&r, ReportFormat::CsvBundle, &out).unwrap();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for want in ["residuals.csv", "coupling.csv", "prevalence.csv", "axis_scores.csv", "group_comparisons.csv"] {
        assert!(names.iter().any(|n| n == want), "{want} not written");
    }
    let coupling = std::fs::read_to_string(out.join("csv/coupling.csv")).unwrap();
    let rows: Vec<&str> = coupling.lines().collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.split(',').count() == 9));

    let md = emit_report(&r, ReportFormat::Markdown, &out).unwrap();
    let text = std::fs::read_to_string(&md[0]).unwrap();
    assert!(text.contains("* p<0.05, ** p<0.01, *** p<0.001"));
    assert!(text.contains("## Turn level"));
}

#[test]
fn empty_report_is_metadata_only_json() {
    let cfg = RunConfig { seed: Some(3), ..Default::default() };
    let r = Report::empty(&cfg);
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["metadata", "schema_version", "warnings"]);
    let dir = tempfile::tempdir().unwrap();
    let p = emit_report(&r, ReportFormat::Json, dir.path()).unwrap();
    assert_eq!(load_report(&p[0]).unwrap(), r);
    assert!(emit_report(&r, ReportFormat::CsvBundle, dir.path()).unwrap().is_empty());
}

#[test]
fn unwritable_directory_is_an_output_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let r = Report::empty(&RunConfig::default());
    let e = emit_report(&r, ReportFormat::Json, &blocker.join("sub")).unwrap_err();
    assert!(matches!(e, PipelineError::Output { .. }));
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        corpus: Some(dir.path().join("absent.jsonl")),
        seed: Some(1),
        ..Default::default()
    };
    let e = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(e, PipelineError::Input { module: "ingest", .. }), "{e}");
    assert_eq!(e.exit_code(), 1);

    let e = run_pipeline(&RunConfig { seed: None, ..cfg }).unwrap_err();
    assert!(matches!(e, PipelineError::Config(_)));
    assert_eq!(e.exit_code(), 1);

    // A corpus with no user/chatbot pairs cannot support the turn-level tests.
    let p = dir.path().join("solo.jsonl");
    std::fs::write(
        &p,
        r#"{"id":"d1","turns":[{"index":0,"speaker":"user","text":"hi","emotions":{"anger":0,"disgust":0,"fear":0,"sadness":0,"surprise":0,"joy":0.9,"optimism":0,"love":0}}]}
"#,
    )
    .unwrap();
    let cfg = RunConfig { corpus: Some(p), seed: Some(1), analyses: vec![Analysis::Ingest, Analysis::TurnLevel], ..Default::default() };
    let e = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(e, PipelineError::Analysis { module: "turn_level", .. }), "{e}");
    assert_eq!(e.exit_code(), 2);
}
