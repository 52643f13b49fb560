use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::node2vec::EmbeddingTable;
use super::PsychosocialError;
use crate::stats::{mann_whitney_u, median, significance_stars, TestResult};

/// A named axis and its (low pole, high pole) seed communities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub pairs: Vec<(String, String)>,
}

impl AxisSpec {
    pub fn new(name: &str, pairs: &[(&str, &str)]) -> Self {
        AxisSpec { name: name.to_string(), pairs: pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect() }
    }

    /// The same axis with every pair's poles swapped.
    pub fn reversed(&self) -> Self {
        AxisSpec { name: self.name.clone(), pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }
}

/// Unit direction in embedding space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub direction: Vec<f64>,
    pub seed_pairs: usize,
}

/// Normalised mean of `v(high) − v(low)` over the seed pairs.
pub fn build_axis(emb: &EmbeddingTable, spec: &AxisSpec) -> Result<Axis, PsychosocialError> {
    if spec.pairs.is_empty() {
        return Err(PsychosocialError::NoSeedPairs(spec.name.clone()));
    }
    let lookup = |c: &str| {
        emb.community(c).ok_or_else(|| PsychosocialError::MissingSeed { axis: spec.name.clone(), community: c.to_string() })
    };
    let mut sum = vec![0.0; emb.dimensions];
    for (low, high) in &spec.pairs {
        let (a, b) = (lookup(low)?, lookup(high)?);
        for ((s, x), y) in sum.iter_mut().zip(a).zip(b) {
            *s += y - x;
        }
    }
    let k = spec.pairs.len() as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / k).collect();
    let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(PsychosocialError::DegenerateAxis(spec.name.clone()));
    }
    Ok(Axis { name: spec.name.clone(), direction: mean.iter().map(|x| x / norm).collect(), seed_pairs: spec.pairs.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommunityGroup {
    HumanAi,
    Romantic,
    NonRomantic,
    Other,
}

impl CommunityGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            CommunityGroup::HumanAi => "human_ai",
            CommunityGroup::Romantic => "romantic",
            CommunityGroup::NonRomantic => "non_romantic",
            CommunityGroup::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<CommunityGroup> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "human_ai" => Some(CommunityGroup::HumanAi),
            "romantic" => Some(CommunityGroup::Romantic),
            "non_romantic" => Some(CommunityGroup::NonRomantic),
            "other" => Some(CommunityGroup::Other),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisScore {
    pub community: String,
    pub axis: String,
    pub score: f64,
    pub group: CommunityGroup,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisScoreTable {
    pub rows: Vec<AxisScore>,
    /// Requested communities that have no embedding.
    pub missing: Vec<String>,
}

impl AxisScoreTable {
    pub fn axes(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.axis.as_str()) {
                seen.push(&r.axis);
            }
        }
        seen
    }

    pub fn scores(&self, axis: &str, group: CommunityGroup) -> Vec<f64> {
        self.rows.iter().filter(|r| r.axis == axis && r.group == group).map(|r| r.score).collect()
    }

    pub fn score(&self, axis: &str, community: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.axis == axis && r.community == community).map(|r| r.score)
    }
}

/// Dot product of each community vector with each axis. Communities absent
/// from `groups` are tagged `Other`.
pub fn project_scores(
    emb: &EmbeddingTable,
    axes: &[Axis],
    communities: &[String],
    groups: &BTreeMap<String, CommunityGroup>,
) -> AxisScoreTable {
    let mut table = AxisScoreTable::default();
    for c in communities {
        if emb.community(c).is_none() && !table.missing.contains(c) {
            table.missing.push(c.clone());
        }
    }
    for axis in axes {
        for c in communities {
            if let Some(v) = emb.community(c) {
                let score = v.iter().zip(&axis.direction).map(|(x, y)| x * y).sum();
                let group = groups.get(c).copied().unwrap_or(CommunityGroup::Other);
                table.rows.push(AxisScore { community: c.clone(), axis: axis.name.clone(), score, group });
            }
        }
    }
    table
}

/// Minimum communities per side of a comparison.
pub const MIN_GROUP_SIZE: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub axis: String,
    /// `romantic`, `non_romantic` or `combined_human` (the two pooled).
    pub against: String,
    pub human_ai_median: Option<f64>,
    pub other_median: Option<f64>,
    /// Mann-Whitney U of human-AI scores against the other group.
    pub test: Option<TestResult>,
    /// `min(U, n1·n2 − U)`.
    pub u_min: Option<f64>,
    pub stars: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// Human-AI communities against romantic, non-romantic and pooled human
/// communities on every axis in the table.
pub fn compare_groups(scores: &AxisScoreTable) -> Vec<GroupComparison> {
    let mut out = Vec::new();
    for axis in scores.axes() {
        let ai = scores.scores(axis, CommunityGroup::HumanAi);
        let romantic = scores.scores(axis, CommunityGroup::Romantic);
        let non_romantic = scores.scores(axis, CommunityGroup::NonRomantic);
        let combined: Vec<f64> = romantic.iter().chain(&non_romantic).copied().collect();
        for (against, other) in [("romantic", romantic), ("non_romantic", non_romantic), ("combined_human", combined)] {
            let mut row = GroupComparison {
                axis: axis.to_string(),
                against: against.to_string(),
                human_ai_median: median(&ai),
                other_median: median(&other),
                test: None,
                u_min: None,
                stars: String::new(),
                skipped: None,
            };
            if ai.len() < MIN_GROUP_SIZE || other.len() < MIN_GROUP_SIZE {
                row.skipped = Some(format!(
                    "need {MIN_GROUP_SIZE} communities per group, got {} human_ai and {} {against}",
                    ai.len(),
                    other.len()
                ));
            } else {
                match mann_whitney_u(&ai, &other) {
                    Ok(t) => {
                        let total = (ai.len() * other.len()) as f64;
                        row.u_min = Some(t.statistic.min(total - t.statistic));
                        row.stars = significance_stars(t.p_value).to_string();
                        row.test = Some(t);
                    }
                    Err(e) => row.skipped = Some(e.to_string()),
                }
            }
            out.push(row);
        }
    }
    out
}
