//! `affectdyn` command-line driver.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 analysis error,
//! 3 output error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use affectdyn::corpus::{fetch_scores, load_corpus, mask_corpus, save_corpus, CorpusFormat, ScorerMode, SCORER_URL_ENV};
use affectdyn::pipeline::{
    emit_report, load_report, run_pipeline, write_fixture_bundle, Analysis, FixtureKind, PipelineError, ReportFormat,
    RunConfig,
};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

#[derive(Parser, Debug)]
#[command(name = "affectdyn", version, about = "Emotional dynamics analysis for human-chatbot dialogue corpora")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a corpus and a run configuration without analysing anything.
    Validate(RunArgs),
    /// Score turns with the configured scorer and write a scored corpus.
    Score(ScoreArgs),
    /// Run the enabled analyses and write the report.
    Analyze(RunArgs),
    /// Write a synthetic fixture bundle (corpus, side inputs, run.toml).
    Fixtures(FixtureArgs),
    /// Re-emit a saved report.json in other formats.
    Report(ReportArgs),
}

fn parse_analysis(s: &str) -> Result<Analysis, String> {
    Analysis::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Analysis::ALL.iter().map(|a| a.name()).collect();
        format!("unknown analysis `{s}` (expected one of {})", names.join(", "))
    })
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    ReportFormat::parse(s).ok_or_else(|| format!("unknown format `{s}` (json, csv-bundle, markdown)"))
}

fn parse_mode(s: &str) -> Result<ScorerMode, String> {
    match s.replace('-', "_").as_str() {
        "precomputed" => Ok(ScorerMode::Precomputed),
        "remote_service" | "remote" => Ok(ScorerMode::RemoteService),
        "lexicon" => Ok(ScorerMode::Lexicon),
        _ => Err(format!("unknown scorer `{s}` (precomputed, remote-service, lexicon)")),
    }
}

fn parse_kind(s: &str) -> Result<FixtureKind, String> {
    FixtureKind::parse(s).ok_or_else(|| format!("unknown fixture kind `{s}`"))
}

/// Every flag mirrors a `RunConfig` field and overrides the config file.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(short, long)]
    jobs: Option<usize>,
    /// Comma-separated analyses to enable.
    #[arg(long, value_delimiter = ',', value_parser = parse_analysis)]
    analyses: Option<Vec<Analysis>>,
    /// Comma-separated report formats.
    #[arg(long = "format", value_delimiter = ',', value_parser = parse_format)]
    formats: Option<Vec<ReportFormat>>,
    #[arg(long)]
    mask: Option<f64>,
    #[arg(long)]
    spike_threshold: Option<f64>,
    #[arg(long)]
    harm_threshold: Option<f64>,
    #[arg(long)]
    dtw_resamples: Option<usize>,
    #[arg(long)]
    permutation_resamples: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    scorer: Option<ScorerMode>,
    #[arg(long, env = SCORER_URL_ENV)]
    scorer_url: Option<String>,
    #[arg(long)]
    interactions: Option<PathBuf>,
    #[arg(long)]
    seed_pairs: Option<PathBuf>,
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// DP-Means penalty.
    #[arg(long)]
    lambda: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, PipelineError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:expr => $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v.into();
                }
            };
        }
        set!(self.corpus => cfg.corpus);
        set!(self.out => cfg.out_dir);
        set!(self.seed => cfg.seed);
        set!(self.jobs => cfg.jobs);
        set!(self.analyses => cfg.analyses);
        set!(self.formats => cfg.formats);
        set!(self.mask => cfg.mask);
        set!(self.spike_threshold => cfg.spike_threshold);
        set!(self.harm_threshold => cfg.harm_threshold);
        set!(self.dtw_resamples => cfg.dtw_resamples);
        set!(self.permutation_resamples => cfg.permutation_resamples);
        set!(self.scorer => cfg.scorer.mode);
        set!(self.scorer_url => cfg.scorer.endpoint);
        set!(self.interactions => cfg.psychosocial.interactions);
        set!(self.seed_pairs => cfg.psychosocial.seed_pairs);
        set!(self.groups => cfg.psychosocial.groups);
        set!(self.embeddings => cfg.topics.embeddings);
        set!(self.lambda => cfg.topics.lambda);
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Scored corpus (JSON lines).
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_mode, default_value = "lexicon")]
    scorer: ScorerMode,
    #[arg(long, env = SCORER_URL_ENV)]
    scorer_url: Option<String>,
    #[arg(long)]
    with_harms: bool,
    #[arg(long, default_value_t = 0.05)]
    mask: f64,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    /// mirroring, independent, spike-amplify, style-null or first-person.
    #[arg(long, value_parser = parse_kind)]
    kind: FixtureKind,
    #[arg(short = 'n', long, default_value_t = 200)]
    dialogues: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// A report.json written by `analyze`.
    input: PathBuf,
    #[arg(long = "format", value_delimiter = ',', value_parser = parse_format, default_value = "markdown")]
    formats: Vec<ReportFormat>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn validate(args: &RunArgs) -> Result<(), PipelineError> {
    let cfg = args.config()?;
    if let Some(path) = &cfg.corpus {
        let c = load_corpus(path, CorpusFormat::Auto).map_err(|e| PipelineError::Input { module: "ingest", source: e.into() })?;
        for r in &c.rejects {
            warn!("line {}: {}", r.line, r.reason);
        }
        println!("{}: {} dialogues, {} turns, {} rejected", path.display(), c.len(), c.total_turns(), c.rejects.len());
    }
    cfg.validate()?;
    println!("config ok ({})", cfg.hash());
    Ok(())
}

fn score(args: &ScoreArgs) -> Result<(), PipelineError> {
    let input = |e: Box<dyn std::error::Error + Send + Sync>| PipelineError::Input { module: "score", source: e };
    let mut c = load_corpus(&args.corpus, CorpusFormat::Auto).map_err(|e| input(e.into()))?;
    let cfg = affectdyn::corpus::ScorerConfig {
        mode: args.scorer,
        endpoint: args.scorer_url.clone(),
        with_harms: args.with_harms,
        mask: args.mask,
        batch_size: args.batch_size,
        ..Default::default()
    };
    cfg.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
    for d in &mut c.dialogues {
        d.turns = fetch_scores(&d.turns, &cfg).map_err(|e| input(e.into()))?;
    }
    mask_corpus(&mut c, args.mask);
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::Output { path: dir.to_path_buf(), reason: e.to_string() })?;
    }
    save_corpus(&c, &args.out).map_err(|e| PipelineError::Output { path: args.out.clone(), reason: e.to_string() })?;
    println!("scored {} dialogues -> {}", c.len(), args.out.display());
    Ok(())
}

fn emit_all(report: &affectdyn::pipeline::Report, formats: &[ReportFormat], dir: &Path) -> Result<(), PipelineError> {
    for f in formats {
        for p in emit_report(report, *f, dir)? {
            println!("{}", p.display());
        }
    }
    Ok(())
}

fn analyze(args: &RunArgs) -> Result<(), PipelineError> {
    let cfg = args.config()?;
    let report = run_pipeline(&cfg)?;
    if !report.warnings.is_empty() {
        info!("{} warnings", report.warnings.len());
    }
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
    emit_all(&report, &cfg.formats, &dir)
}

fn fixtures(args: &FixtureArgs) -> Result<(), PipelineError> {
    let path = write_fixture_bundle(&args.out, args.kind, args.dialogues, args.seed)?;
    println!("{}", path.display());
    Ok(())
}

fn report(args: &ReportArgs) -> Result<(), PipelineError> {
    let r = load_report(&args.input)?;
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => args.input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    emit_all(&r, &args.formats, &dir)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Score(a) => score(a),
        Command::Analyze(a) => analyze(a),
        Command::Fixtures(a) => fixtures(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
