use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::ReportFormat;
use super::run::Report;
use super::PipelineError;
use crate::corpus::{Emotion, Harm};
use crate::stats::significance_stars;

fn out_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Output { path: path.to_path_buf(), reason: e.to_string() }
}

fn fmt(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// Square or rectangular grid with a labelled header row and first column.
pub fn write_grid(path: &Path, corner: &str, rows: &[&str], cols: &[&str], cells: &[Vec<String>]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| out_err(path, e))?;
    let header: Vec<&str> = std::iter::once(corner).chain(cols.iter().copied()).collect();
    w.write_record(&header).map_err(|e| out_err(path, e))?;
    for (label, row) in rows.iter().zip(cells) {
        let rec: Vec<&str> = std::iter::once(*label).chain(row.iter().map(String::as_str)).collect();
        w.write_record(&rec).map_err(|e| out_err(path, e))?;
    }
    w.flush().map_err(|e| out_err(path, e))
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| out_err(path, e))?;
    w.write_record(header).map_err(|e| out_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| out_err(path, e))?;
    }
    w.flush().map_err(|e| out_err(path, e))
}

/// Writes the report in one format under `dir` and returns the files made.
pub fn emit_report(r: &Report, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| out_err(dir, e))?;
    match format {
        ReportFormat::Json => {
            let p = dir.join("report.json");
            std::fs::write(&p, r.to_json()).map_err(|e| out_err(&p, e))?;
            Ok(vec![p])
        }
        ReportFormat::Markdown => {
            let p = dir.join("report.md");
            std::fs::write(&p, markdown(r)).map_err(|e| out_err(&p, e))?;
            Ok(vec![p])
        }
        ReportFormat::CsvBundle => csv_bundle(r, &dir.join("csv")),
    }
}

fn csv_bundle(r: &Report, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| out_err(dir, e))?;
    let emo: Vec<&str> = Emotion::ALL.iter().map(|e| e.name()).collect();
    let harms: Vec<&str> = Harm::ALL.iter().map(|h| h.name()).collect();
    let mut files = Vec::new();
    let mut add = |name: &str| {
        let p = dir.join(name);
        files.push(p.clone());
        p
    };

    if let Some(d) = &r.dialogue_level {
        let rows = d
            .means
            .rows
            .iter()
            .map(|row| {
                let t = row.test.as_ref();
                vec![
                    row.emotion.name().to_string(),
                    fmt(row.user_mean),
                    fmt(row.bot_mean),
                    fmt(row.mean_diff),
                    opt(t.map(|t| t.statistic)),
                    opt(t.map(|t| t.p_value)),
                    opt(t.and_then(|t| t.effect_size)),
                ]
            })
            .collect();
        write_table(&add("dialogue_means.csv"), &["emotion", "user_mean", "bot_mean", "mean_diff", "w", "p_value", "cliffs_delta"], rows)?;
    }
    if let Some(t) = &r.turn_level {
        let counts: Vec<Vec<String>> = t.association.table.iter().map(|r| r.iter().map(|x| fmt(*x)).collect()).collect();
        write_grid(&add("association_counts.csv"), "user\\bot", &emo, &emo, &counts)?;
        let res: Vec<Vec<String>> = t.association.residuals.iter().map(|r| r.iter().map(|x| opt(*x)).collect()).collect();
        write_grid(&add("residuals.csv"), "user\\bot", &emo, &emo, &res)?;
        let beta: Vec<Vec<String>> = t.coupling.beta.iter().map(|r| r.iter().map(|x| fmt(*x)).collect()).collect();
        write_grid(&add("coupling.csv"), "user\\bot", &emo, &emo, &beta)?;
        let p: Vec<Vec<String>> = t.coupling.p_values.iter().map(|r| r.iter().map(|x| fmt(*x)).collect()).collect();
        write_grid(&add("coupling_p.csv"), "user\\bot", &emo, &emo, &p)?;
    }
    if let Some(s) = &r.post_spike {
        let rows = s
            .analysis
            .rows
            .iter()
            .map(|row| {
                vec![
                    row.emotion.name().to_string(),
                    row.n.to_string(),
                    fmt(row.matched_delta),
                    fmt(row.nonmatched_delta),
                    fmt(row.contrast),
                    opt(row.baseline_test.as_ref().map(|t| t.p_value)),
                    opt(row.contrast_test.as_ref().map(|t| t.p_value)),
                ]
            })
            .collect();
        write_table(
            &add("post_spike.csv"),
            &["emotion", "n", "matched_delta", "nonmatched_delta", "contrast", "baseline_p", "contrast_p"],
            rows,
        )?;
        let rows = s
            .elevation
            .iter()
            .map(|e| vec![e.emotion.name().to_string(), e.n.to_string(), fmt(e.mean_delta), opt(e.test.as_ref().map(|t| t.p_value))])
            .collect();
        write_table(&add("elevation.csv"), &["emotion", "n", "mean_delta", "p_value"], rows)?;
    }
    if let Some(s) = &r.style {
        let rows = s
            .self_reference
            .rows
            .iter()
            .map(|row| {
                let t = row.test.as_ref();
                vec![
                    row.category.clone(),
                    fmt(row.baseline_rate),
                    fmt(row.spike_rate),
                    fmt(row.diff_pp),
                    opt(t.map(|t| t.p_value)),
                    opt(t.and_then(|t| t.effect_size)),
                ]
            })
            .collect();
        write_table(&add("self_reference.csv"), &["category", "baseline_rate", "spike_rate", "diff_pp", "p_value", "d_z"], rows)?;
        let p = add("distinctive_terms.csv");
        let f = std::fs::File::create(&p).map_err(|e| out_err(&p, e))?;
        s.distinctive_terms.write_csv(f).map_err(|e| out_err(&p, e))?;
    }
    if let Some(h) = &r.harm {
        let mut rows: Vec<Vec<String>> = h
            .prevalence
            .categories
            .iter()
            .map(|c| vec![c.harm.name().to_string(), fmt(c.percent), c.dialogues.to_string()])
            .collect();
        rows.push(vec!["any".into(), fmt(h.prevalence.any_percent), h.prevalence.any_dialogues.to_string()]);
        write_table(&add("prevalence.csv"), &["harm", "percent", "dialogues"], rows)?;
        let cells: Vec<Vec<String>> =
            h.correlation.cells.iter().map(|r| r.iter().map(|c| if c.masked { String::new() } else { opt(c.r) }).collect()).collect();
        write_grid(&add("emotion_harm_r.csv"), "emotion\\harm", &emo, &harms, &cells)?;
        let mut rows = Vec::new();
        for d in &h.responses {
            for (label, pct) in &d.percent {
                rows.push(vec![d.harm.name().to_string(), label.clone(), fmt(*pct), d.responses.to_string()]);
            }
        }
        write_table(&add("response_types.csv"), &["harm", "response_type", "percent", "responses"], rows)?;
    }
    if let Some(p) = &r.psychosocial {
        let path = add("axis_scores.csv");
        let f = std::fs::File::create(&path).map_err(|e| out_err(&path, e))?;
        crate::psychosocial::write_scores(f, &p.scores).map_err(|e| out_err(&path, e))?;
        let rows = p
            .comparisons
            .iter()
            .map(|c| {
                let t = c.test.as_ref();
                vec![
                    c.axis.clone(),
                    c.against.clone(),
                    opt(c.human_ai_median),
                    opt(c.other_median),
                    opt(t.map(|t| t.statistic)),
                    opt(t.map(|t| t.p_value)),
                    c.stars.clone(),
                    c.skipped.clone().unwrap_or_default(),
                ]
            })
            .collect();
        write_table(
            &add("group_comparisons.csv"),
            &["axis", "against", "human_ai_median", "other_median", "u", "p_value", "stars", "skipped"],
            rows,
        )?;
    }
    if let Some(t) = &r.topics {
        let mut rows = Vec::new();
        for c in &t.clusters {
            for m in &c.members {
                rows.push(vec![c.id.to_string(), m.clone()]);
            }
        }
        write_table(&add("topic_members.csv"), &["cluster", "item"], rows)?;
        let mut rows = Vec::new();
        for c in &t.clusters {
            for k in &c.keywords {
                let method = serde_json::to_value(k.method).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
                rows.push(vec![c.id.to_string(), method, k.term.clone(), fmt(k.score)]);
            }
        }
        write_table(&add("topic_keywords.csv"), &["cluster", "method", "term", "score"], rows)?;
    }
    Ok(files)
}

fn p_cell(p: Option<f64>) -> String {
    match p {
        Some(p) if p < 0.001 => format!("<0.001{}", significance_stars(p)),
        Some(p) => format!("{p:.3}{}", significance_stars(p)),
        None => "n/a".into(),
    }
}

/// Human summary. Stars: * p<0.05, ** p<0.01, *** p<0.001.
pub fn markdown(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Emotional dynamics report\n");
    let _ = writeln!(s, "- schema version: {}", r.schema_version);
    let _ = writeln!(s, "- config hash: `{}`", r.metadata.config_hash);
    if let Some(seed) = r.metadata.seed {
        let _ = writeln!(s, "- seed: {seed}");
    }
    let names: Vec<&str> = r.metadata.analyses.iter().map(|a| a.name()).collect();
    let _ = writeln!(s, "- analyses: {}\n", names.join(", "));
    let _ = writeln!(s, "Significance: * p<0.05, ** p<0.01, *** p<0.001\n");

    if let Some(c) = &r.corpus {
        let _ = writeln!(s, "## Corpus\n\n{} dialogues, {} turns ({} user, {} chatbot), {} scored, {} rejected records.\n",
            c.dialogues, c.turns, c.user_turns, c.chatbot_turns, c.scored_turns, c.rejected);
    }
    if let Some(x) = &r.salient {
        let _ = writeln!(s, "## Salient dialogues\n\n{} of {} dialogues have a user emotion above {}; {} spike events.\n",
            x.after, x.before, x.threshold, x.spike_events);
    }
    if let Some(d) = &r.dialogue_level {
        let _ = writeln!(s, "## Dialogue level\n\n| emotion | user | chatbot | diff | p | Cliff's δ |\n|---|---|---|---|---|---|");
        for row in &d.means.rows {
            let t = row.test.as_ref();
            let _ = writeln!(s, "| {} | {:.3} | {:.3} | {:+.3} | {} | {} |", row.emotion.name(), row.user_mean, row.bot_mean, row.mean_diff,
                p_cell(t.map(|t| t.p_value)), t.and_then(|t| t.effect_size).map_or("n/a".into(), |e| format!("{e:.3}")));
        }
        let _ = writeln!(s, "\nDTW: real mean {:.4} vs shuffled {:.4} over {} dialogues and {} rounds, p = {}, d = {:.3}\n",
            d.dtw.real_mean, d.dtw.null_mean, d.dtw.dialogues, d.dtw.resamples, p_cell(Some(d.dtw.test.p_value)), d.dtw.test.effect_size.unwrap_or(0.0));
    }
    if let Some(t) = &r.turn_level {
        let a = &t.association;
        let _ = writeln!(s, "## Turn level\n\nDominant-emotion association over {} pairs: χ² = {:.2} (df {}), p = {}, V = {:.3}; {} cells beyond |z| > {:.3}.\n",
            a.retained, a.chi2, a.df, p_cell(Some(a.p_value)), a.cramers_v, a.flagged.iter().flatten().filter(|f| **f).count(), a.z_cutoff);
        let sig = t.coupling.significant.iter().flatten().filter(|x| **x).count();
        let _ = writeln!(s, "Coupling regression on {} pairs: {} of 64 coefficients below α = {:.6}.\n", t.coupling.pairs, sig, t.coupling.corrected_alpha);
    }
    if let Some(p) = &r.post_spike {
        let _ = writeln!(s, "## Post-spike response\n\n| emotion | n | matched Δ | non-matched Δ | baseline p | contrast p |\n|---|---|---|---|---|---|");
        for row in &p.analysis.rows {
            let _ = writeln!(s, "| {} | {} | {:+.3} | {:+.3} | {} | {} |", row.emotion.name(), row.n, row.matched_delta, row.nonmatched_delta,
                p_cell(row.baseline_test.as_ref().map(|t| t.p_value)), p_cell(row.contrast_test.as_ref().map(|t| t.p_value)));
        }
        let _ = writeln!(s);
    }
    if let Some(st) = &r.style {
        let _ = writeln!(s, "## Style\n\n| category | baseline % | spike % | Δ pp | p | d_z |\n|---|---|---|---|---|---|");
        for row in &st.self_reference.rows {
            let t = row.test.as_ref();
            let _ = writeln!(s, "| {} | {:.2} | {:.2} | {:+.2} | {} | {} |", row.category, row.baseline_rate, row.spike_rate, row.diff_pp,
                p_cell(t.map(|t| t.p_value)), t.and_then(|t| t.effect_size).map_or("n/a".into(), |e| format!("{e:.3}")));
        }
        let _ = writeln!(s, "\nLSM: spike pairs {:.3} vs baseline pairs {:.3}, p = {}\n", st.matching.spike_mean_lsm, st.matching.baseline_mean_lsm, p_cell(Some(st.matching.test.p_value)));
    }
    if let Some(h) = &r.harm {
        let _ = writeln!(s, "## Explicit content\n\nAny category: {:.2}% of {} dialogues.\n", h.prevalence.any_percent, h.prevalence.included);
        for c in &h.prevalence.categories {
            let _ = writeln!(s, "- {}: {:.2}%", c.harm.name(), c.percent);
        }
        let _ = writeln!(s);
    }
    if let Some(p) = &r.psychosocial {
        let _ = writeln!(s, "## Psychosocial axes\n\n| axis | human-AI vs | median (AI) | median (other) | p |\n|---|---|---|---|---|");
        for c in &p.comparisons {
            let p = match (&c.test, &c.skipped) {
                (Some(t), _) => p_cell(Some(t.p_value)),
                (None, Some(why)) => format!("skipped: {why}"),
                _ => "n/a".into(),
            };
            let _ = writeln!(s, "| {} | {} | {} | {} | {} |", c.axis, c.against,
                c.human_ai_median.map_or("n/a".into(), |m| format!("{m:.3}")), c.other_median.map_or("n/a".into(), |m| format!("{m:.3}")), p);
        }
        let _ = writeln!(s);
    }
    if let Some(t) = &r.topics {
        let _ = writeln!(s, "## Topics\n\n{} clusters at λ = {} after {} iterations.\n", t.clusters.len(), t.lambda, t.iterations);
        for c in &t.clusters {
            let terms: Vec<&str> = c.keywords.iter().take(5).map(|k| k.term.as_str()).collect();
            let _ = writeln!(s, "- cluster {} ({} items): {}", c.id, c.members.len(), terms.join(", "));
        }
        let _ = writeln!(s);
    }
    if !r.warnings.is_empty() {
        let _ = writeln!(s, "## Warnings\n\n{} warnings; see the JSON report.", r.warnings.len());
    }
    s
}
