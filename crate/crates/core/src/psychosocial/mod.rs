//! Community embedding from user co-engagement, seed-pair axes and group
//! comparisons.
//!
//! Walks run on the bipartite user–community graph itself; the
//! community–community projection is exposed for inspection only. Only
//! community nodes are scored.

mod axis;
mod graph;
mod node2vec;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use axis::{
    build_axis, compare_groups, project_scores, Axis, AxisScore, AxisScoreTable, AxisSpec, CommunityGroup,
    GroupComparison, MIN_GROUP_SIZE,
};
pub use graph::{cooccurrence_projection, BipartiteGraph, CoEngagement, Interaction, NodeKind};
pub use node2vec::{node2vec_embed, random_walk, transition_probabilities, EmbeddingTable, Node2vecParams};

use crate::Warning;

#[derive(Debug, Error)]
pub enum PsychosocialError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid node2vec parameters: {0}")]
    InvalidParams(String),
    #[error("vector dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite vector for {0}")]
    NonFinite(String),
    #[error("axis {0} has no seed pairs")]
    NoSeedPairs(String),
    #[error("axis {axis}: seed community {community} has no embedding")]
    MissingSeed { axis: String, community: String },
    #[error("axis {0}: seed differences average to the zero vector")]
    DegenerateAxis(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

const SEED_PAIRS: &str = include_str!("../../data/seed_pairs.csv");
const COMMUNITY_GROUPS: &str = include_str!("../../data/community_groups.csv");

/// The bundled seed pairs for age, gender, extroversion, coping and
/// addiction.
pub fn default_seed_pairs() -> Vec<AxisSpec> {
    read_seed_pairs(SEED_PAIRS.as_bytes()).expect("bundled seed pairs parse")
}

/// The bundled human-AI, romantic and non-romantic community lists.
pub fn default_groups() -> BTreeMap<String, CommunityGroup> {
    read_groups(COMMUNITY_GROUPS.as_bytes()).expect("bundled groups parse")
}

#[derive(Deserialize)]
struct SeedRow {
    axis: String,
    low_community: String,
    high_community: String,
}

/// `axis,low_community,high_community`; axes keep first-appearance order.
pub fn read_seed_pairs(r: impl Read) -> Result<Vec<AxisSpec>, PsychosocialError> {
    let mut specs: Vec<AxisSpec> = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: SeedRow = row?;
        let pair = (row.low_community.trim().to_string(), row.high_community.trim().to_string());
        match specs.iter_mut().find(|s| s.name == row.axis) {
            Some(s) => s.pairs.push(pair),
            None => specs.push(AxisSpec { name: row.axis, pairs: vec![pair] }),
        }
    }
    Ok(specs)
}

#[derive(Deserialize)]
struct GroupRow {
    community: String,
    group: String,
}

/// `community,group`.
pub fn read_groups(r: impl Read) -> Result<BTreeMap<String, CommunityGroup>, PsychosocialError> {
    let mut out = BTreeMap::new();
    for (i, row) in csv::Reader::from_reader(r).deserialize().enumerate() {
        let row: GroupRow = row?;
        let g = CommunityGroup::parse(&row.group)
            .ok_or_else(|| PsychosocialError::Parse { line: i + 2, reason: format!("unknown group {:?}", row.group) })?;
        out.insert(row.community.trim().to_string(), g);
    }
    Ok(out)
}

/// `user_id,community,count`. Counts must be at least 1.
pub fn read_interactions(r: impl Read) -> Result<Vec<Interaction>, PsychosocialError> {
    let mut out = Vec::new();
    for (i, row) in csv::Reader::from_reader(r).deserialize().enumerate() {
        let row: Interaction = row?;
        if row.count == 0 {
            return Err(PsychosocialError::Parse { line: i + 2, reason: "count must be at least 1".into() });
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_interactions(w: impl Write, rows: &[Interaction]) -> Result<(), PsychosocialError> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `axis,low_community,high_community`.
pub fn write_seed_pairs(w: impl Write, specs: &[AxisSpec]) -> Result<(), PsychosocialError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["axis", "low_community", "high_community"])?;
    for s in specs {
        for (a, b) in &s.pairs {
            out.write_record([s.name.as_str(), a, b])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `community,group`.
pub fn write_groups(w: impl Write, groups: &BTreeMap<String, CommunityGroup>) -> Result<(), PsychosocialError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["community", "group"])?;
    for (c, g) in groups {
        out.write_record([c.as_str(), g.as_str()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `community,axis,score,group`.
pub fn write_scores(w: impl Write, table: &AxisScoreTable) -> Result<(), PsychosocialError> {
    let mut out = csv::Writer::from_writer(w);
    for r in &table.rows {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Two blocks of communities (`a00…`, `b00…`) whose users engage mostly
/// within their own block. Each user touches `links_per_user` communities,
/// each link crossing to the other block with probability `cross_rate`.
pub fn planted_partition(
    communities_per_block: usize,
    users_per_block: usize,
    links_per_user: usize,
    cross_rate: f64,
    seed: u64,
) -> Vec<Interaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = |block: usize, i: usize| format!("{}{i:02}", if block == 0 { 'a' } else { 'b' });
    let mut rows = Vec::new();
    for block in 0..2 {
        for u in 0..users_per_block {
            let user = format!("user_{block}_{u}");
            for _ in 0..links_per_user {
                let target = if rng.random::<f64>() < cross_rate { 1 - block } else { block };
                let c = rng.random_range(0..communities_per_block);
                rows.push(Interaction::new(&user, &name(target, c), rng.random_range(1..=5)));
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsychosocialResult {
    pub communities: usize,
    pub users: usize,
    pub edges: usize,
    pub axes: Vec<Axis>,
    pub scores: AxisScoreTable,
    pub comparisons: Vec<GroupComparison>,
    pub warnings: Vec<Warning>,
}

/// Embed, build every axis whose seeds are present, score the grouped
/// communities (or every community when `groups` is empty) and compare
/// groups. Axes with missing or degenerate seeds become warnings.
pub fn analyze(
    interactions: &[Interaction],
    params: &Node2vecParams,
    seeds: &[AxisSpec],
    groups: &BTreeMap<String, CommunityGroup>,
) -> Result<PsychosocialResult, PsychosocialError> {
    let g = BipartiteGraph::build(interactions);
    let emb = node2vec_embed(&g, params)?;
    let mut warnings = Vec::new();
    let mut axes = Vec::new();
    for spec in seeds {
        match build_axis(&emb, spec) {
            Ok(a) => axes.push(a),
            Err(e @ (PsychosocialError::MissingSeed { .. } | PsychosocialError::DegenerateAxis(_) | PsychosocialError::NoSeedPairs(_))) => {
                warnings.push(Warning::new(Warning::CORPUS, "axis_skipped", e.to_string()))
            }
            Err(e) => return Err(e),
        }
        for (a, b) in &spec.pairs {
            for c in [a, b] {
                if emb.is_disconnected(c) {
                    warnings.push(Warning::new(Warning::CORPUS, "disconnected_seed", format!("{}: {c}", spec.name)));
                }
            }
        }
    }
    let communities: Vec<String> =
        if groups.is_empty() { g.communities().to_vec() } else { groups.keys().cloned().collect() };
    let scores = project_scores(&emb, &axes, &communities, groups);
    for c in &scores.missing {
        warnings.push(Warning::new(Warning::CORPUS, "community_missing", c.clone()));
    }
    let comparisons = compare_groups(&scores);
    Ok(PsychosocialResult {
        communities: g.communities().len(),
        users: g.users().len(),
        edges: g.edge_count(),
        axes,
        scores,
        comparisons,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_parse() {
        let seeds = default_seed_pairs();
        let names: Vec<&str> = seeds.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["age", "gender", "extroversion", "coping", "addiction"]);
        assert_eq!(seeds.iter().map(|s| s.pairs.len()).collect::<Vec<_>>(), [4, 9, 5, 3, 3]);
        let groups = default_groups();
        let count = |g| groups.values().filter(|v| **v == g).count();
        assert_eq!(count(CommunityGroup::HumanAi), 11);
        assert_eq!(count(CommunityGroup::Romantic), 25);
        assert_eq!(count(CommunityGroup::NonRomantic), 14);
    }

    #[test]
    fn interactions_round_trip() {
        let rows = planted_partition(4, 5, 3, 0.1, 1);
        let mut buf = Vec::new();
        write_interactions(&mut buf, &rows).unwrap();
        assert!(buf.starts_with(b"user_id,community,count\n"));
        assert_eq!(read_interactions(buf.as_slice()).unwrap(), rows);
        assert!(matches!(
            read_interactions("user_id,community,count\nu,c,0\n".as_bytes()),
            Err(PsychosocialError::Parse { line: 2, .. })
        ));
        assert!(read_groups("community,group\nx,martian\n".as_bytes()).is_err());

        let mut buf = Vec::new();
        write_seed_pairs(&mut buf, &default_seed_pairs()).unwrap();
        assert_eq!(read_seed_pairs(buf.as_slice()).unwrap(), default_seed_pairs());
        let mut buf = Vec::new();
        write_groups(&mut buf, &default_groups()).unwrap();
        assert_eq!(read_groups(buf.as_slice()).unwrap(), default_groups());
    }

    #[test]
    fn analyze_reports_skipped_axes() {
        let rows = planted_partition(6, 30, 4, 0.05, 2);
        let seeds = vec![AxisSpec::new("ab", &[("a00", "b00")]), AxisSpec::new("ghost", &[("a00", "nowhere")])];
        let groups: BTreeMap<String, CommunityGroup> = (0..6)
            .flat_map(|i| {
                [(format!("a{i:02}"), CommunityGroup::HumanAi), (format!("b{i:02}"), CommunityGroup::Romantic)]
            })
            .collect();
        let params = Node2vecParams { dimensions: 16, epochs: 2, ..Default::default() };
        let r = analyze(&rows, &params, &seeds, &groups).unwrap();
        assert_eq!(r.axes.len(), 1);
        assert!(r.warnings.iter().any(|w| w.code == "axis_skipped"));
        assert_eq!(r.scores.rows.len(), 12);
        let ab = &r.comparisons[0];
        assert_eq!(ab.against, "romantic");
        assert!(ab.test.as_ref().unwrap().p_value < 0.01, "{ab:?}");
        assert!(r.comparisons[1].skipped.is_some());

        let mut buf = Vec::new();
        write_scores(&mut buf, &r.scores).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("community,axis,score,group\n"));
    }
}
