use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::{Analysis, RunConfig};
use super::PipelineError;
use crate::corpus::{save_corpus, Corpus, Dialogue, Emotion, EmotionVector, HarmVector, ResponseType, Turn};
use crate::psychosocial::{planted_partition, write_groups, write_interactions, write_seed_pairs, AxisSpec, CommunityGroup, Interaction};
use crate::topics::EmbeddingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    /// Chatbot emotions copy the user's plus N(0, 0.01²) noise.
    Mirroring,
    /// Chatbot emotions drawn independently; every dialogue has the same length.
    Independent,
    /// One user spike per dialogue (emotion `i mod 8`); the reply adds 0.1
    /// to that channel over a dialogue-level chatbot baseline.
    SpikeAmplify,
    /// Both speakers' texts come from one word distribution.
    StyleNull,
    /// Spike turns carry three more first-person tokens per hundred.
    FirstPerson,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 5] = [
        FixtureKind::Mirroring,
        FixtureKind::Independent,
        FixtureKind::SpikeAmplify,
        FixtureKind::StyleNull,
        FixtureKind::FirstPerson,
    ];

    pub fn parse(s: &str) -> Option<FixtureKind> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "mirroring" => Some(FixtureKind::Mirroring),
            "independent" => Some(FixtureKind::Independent),
            "spike_amplify" | "spikeamplify" => Some(FixtureKind::SpikeAmplify),
            "style_null" | "stylenull" => Some(FixtureKind::StyleNull),
            "first_person" | "firstperson" => Some(FixtureKind::FirstPerson),
            _ => None,
        }
    }
}

/// User turns per fixture dialogue; every user turn gets a chatbot reply.
pub const FIXTURE_USER_TURNS: usize = 5;
/// Base first-person token share of fixture user texts.
pub const FIRST_PERSON_BASE: f64 = 0.06;
pub const FIRST_PERSON_LIFT: f64 = 0.03;
/// Chatbot boost on the spiked channel in `SpikeAmplify`.
pub const SPIKE_BOOST: f64 = 0.1;

const FUNCTION_WORDS: &[&str] = &[
    "the", "a", "an", "of", "in", "on", "to", "with", "for", "and", "but", "or", "is", "was", "be", "have", "will",
    "can", "not", "no", "very", "really", "just", "all", "some", "many", "you", "we", "they", "it", "this", "that",
];
const CONTENT_WORDS: &[&str] = &[
    "day", "night", "home", "work", "friend", "story", "music", "game", "coffee", "rain", "city", "dream", "book",
    "movie", "phone", "dog", "cat", "dinner", "plan", "weekend", "garden", "train", "letter", "window",
];
const FIRST_PERSON: &[&str] = &["i", "me", "my"];

fn word(rng: &mut ChaCha8Rng) -> &'static str {
    if rng.random::<bool>() {
        FUNCTION_WORDS[rng.random_range(0..FUNCTION_WORDS.len())]
    } else {
        CONTENT_WORDS[rng.random_range(0..CONTENT_WORDS.len())]
    }
}

fn text(rng: &mut ChaCha8Rng, len: usize, first_person: f64) -> String {
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < first_person {
                FIRST_PERSON[rng.random_range(0..FIRST_PERSON.len())]
            } else {
                word(rng)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Low background on every channel with one dominant channel.
fn dominant_vector(rng: &mut ChaCha8Rng) -> [f64; 8] {
    let mut v: [f64; 8] = std::array::from_fn(|_| rng.random_range(0.0..0.3));
    v[rng.random_range(0..8)] = rng.random_range(0.3..1.0);
    v
}

fn calm_vector(rng: &mut ChaCha8Rng) -> [f64; 8] {
    std::array::from_fn(|_| rng.random_range(0.0..0.45))
}

fn user_harms(rng: &mut ChaCha8Rng) -> HarmVector {
    let mut h: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..0.2));
    if rng.random::<f64>() < 0.15 {
        h[rng.random_range(0..4)] = rng.random_range(0.55..0.95);
    }
    HarmVector::clamped(h)
}

/// Synthetic scored corpus of `n ≥ 10` dialogues. Identical arguments give
/// identical corpora.
pub fn generate_fixture(kind: FixtureKind, n: usize, seed: u64) -> Result<Corpus, PipelineError> {
    if n < 10 {
        return Err(PipelineError::Config(format!("fixtures need at least 10 dialogues, got {n}")));
    }
    let noise = Normal::new(0.0, 0.01).expect("valid normal");
    let dialogues = (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let spike_at = rng.random_range(0..FIXTURE_USER_TURNS);
            let spike_emotion = Emotion::ALL[i % 8];
            let bot_base: [f64; 8] = std::array::from_fn(|_| rng.random_range(0.1..0.4));
            let mut turns = Vec::with_capacity(2 * FIXTURE_USER_TURNS);
            for k in 0..FIXTURE_USER_TURNS {
                let planted = matches!(kind, FixtureKind::SpikeAmplify | FixtureKind::FirstPerson);
                let user: [f64; 8] = if planted {
                    let mut v = calm_vector(&mut rng);
                    if k == spike_at {
                        v[spike_emotion.index()] = rng.random_range(0.6..1.0);
                    }
                    v
                } else {
                    dominant_vector(&mut rng)
                };
                let bot: [f64; 8] = match kind {
                    FixtureKind::Mirroring => std::array::from_fn(|c| user[c] + noise.sample(&mut rng)),
                    FixtureKind::Independent | FixtureKind::StyleNull => dominant_vector(&mut rng),
                    FixtureKind::SpikeAmplify | FixtureKind::FirstPerson => {
                        let mut v: [f64; 8] = std::array::from_fn(|c| bot_base[c] + rng.random_range(-0.02..0.02));
                        if kind == FixtureKind::SpikeAmplify && k == spike_at {
                            v[spike_emotion.index()] += SPIKE_BOOST;
                        }
                        v
                    }
                };
                let fp = match kind {
                    FixtureKind::FirstPerson if k == spike_at => FIRST_PERSON_BASE + FIRST_PERSON_LIFT,
                    _ => FIRST_PERSON_BASE,
                };
                let user_len = if kind == FixtureKind::FirstPerson { 40 } else { rng.random_range(12..30) };
                let harms = user_harms(&mut rng);
                let harmful = harms.max_score() > 0.5;
                turns.push(
                    Turn::user(2 * k)
                        .with_text(text(&mut rng, user_len, fp))
                        .with_emotions(EmotionVector::clamped(user))
                        .with_harms(harms),
                );
                let bot_len = rng.random_range(12..30);
                let mut reply = Turn::chatbot(2 * k + 1)
                    .with_text(text(&mut rng, bot_len, 0.0))
                    .with_emotions(EmotionVector::clamped(bot));
                if harmful {
                    reply = reply.with_response_type(ResponseType::ALL[rng.random_range(0..ResponseType::ALL.len())]);
                }
                turns.push(reply);
            }
            Dialogue::new(format!("fx{i:05}"), turns)
        })
        .collect();
    Ok(Corpus::new(dialogues))
}

/// Planted two-block community graph with one seed pair across the blocks
/// (`a00` low, `b00` high). Block `a` is tagged human-AI, the first half of
/// block `b` romantic and the rest non-romantic.
pub fn fixture_interactions(seed: u64) -> (Vec<Interaction>, Vec<AxisSpec>, BTreeMap<String, CommunityGroup>) {
    let rows = planted_partition(20, 100, 5, 0.05, seed);
    let seeds = vec![AxisSpec::new("block", &[("a00", "b00")])];
    let mut groups = BTreeMap::new();
    for i in 0..20 {
        groups.insert(format!("a{i:02}"), CommunityGroup::HumanAi);
        groups.insert(
            format!("b{i:02}"),
            if i < 10 { CommunityGroup::Romantic } else { CommunityGroup::NonRomantic },
        );
    }
    (rows, seeds, groups)
}

/// Three tight blobs of 8-dimensional embeddings, 20 items each, with texts
/// drawn from blob-specific phrases.
pub fn fixture_embeddings(seed: u64) -> EmbeddingMatrix {
    const THEMES: [&str; 3] = [
        "my companion said good morning and i felt loved",
        "the filter blocked the roleplay again so annoying",
        "lonely tonight talking to the bot about grief",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ids, mut rows, mut texts) = (Vec::new(), Vec::new(), Vec::new());
    for (b, theme) in THEMES.iter().enumerate() {
        for j in 0..20 {
            ids.push(format!("post{b}_{j:02}"));
            rows.push((0..8).map(|d| if d == b { 10.0 } else { 0.0 } + rng.random_range(-0.3..0.3)).collect());
            texts.push(format!("{theme} {}", text(&mut rng, 6, 0.0)));
        }
    }
    EmbeddingMatrix::new(ids, rows, Some(texts)).expect("fixture matrix is valid")
}

/// Writes a corpus plus every side input and a `run.toml` enabling all
/// analyses. Returns the config path.
pub fn write_fixture_bundle(dir: &Path, kind: FixtureKind, n: usize, seed: u64) -> Result<PathBuf, PipelineError> {
    let out = |p: &Path, e: &dyn std::fmt::Display| PipelineError::Output { path: p.to_path_buf(), reason: e.to_string() };
    std::fs::create_dir_all(dir).map_err(|e| out(dir, &e))?;
    let corpus = generate_fixture(kind, n, seed)?;
    let corpus_path = dir.join("corpus.jsonl");
    save_corpus(&corpus, &corpus_path).map_err(|e| out(&corpus_path, &e))?;

    let (rows, seeds, groups) = fixture_interactions(seed);
    let file = |name: &str| {
        let p = dir.join(name);
        std::fs::File::create(&p).map(|f| (p.clone(), f)).map_err(|e| out(&p, &e))
    };
    let (p, f) = file("interactions.csv")?;
    write_interactions(f, &rows).map_err(|e| out(&p, &e))?;
    let (p, f) = file("seed_pairs.csv")?;
    write_seed_pairs(f, &seeds).map_err(|e| out(&p, &e))?;
    let (p, f) = file("groups.csv")?;
    write_groups(f, &groups).map_err(|e| out(&p, &e))?;
    let (p, f) = file("embeddings.csv")?;
    fixture_embeddings(seed).write_csv(f).map_err(|e| out(&p, &e))?;

    let mut cfg = RunConfig {
        corpus: Some("corpus.jsonl".into()),
        seed: Some(seed),
        analyses: Analysis::ALL.to_vec(),
        out_dir: Some("results".into()),
        ..Default::default()
    };
    cfg.psychosocial.interactions = Some("interactions.csv".into());
    cfg.psychosocial.seed_pairs = Some("seed_pairs.csv".into());
    cfg.psychosocial.groups = Some("groups.csv".into());
    cfg.topics.embeddings = Some("embeddings.csv".into());
    cfg.topics.lambda = Some(20.0);
    let cfg_path = dir.join("run.toml");
    std::fs::write(&cfg_path, cfg.to_toml()).map_err(|e| out(&cfg_path, &e))?;
    Ok(cfg_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible_and_valid() {
        for kind in FixtureKind::ALL {
            let a = generate_fixture(kind, 12, 3).unwrap();
            assert_eq!(a, generate_fixture(kind, 12, 3).unwrap());
            assert_ne!(a, generate_fixture(kind, 12, 4).unwrap());
            for d in &a.dialogues {
                d.validate().unwrap();
                assert_eq!(d.turns.len(), 2 * FIXTURE_USER_TURNS);
            }
        }
        assert!(generate_fixture(FixtureKind::Mirroring, 9, 0).is_err());
    }

    #[test]
    fn spike_amplify_has_one_spike_per_dialogue() {
        let c = generate_fixture(FixtureKind::SpikeAmplify, 16, 1).unwrap();
        for (i, d) in c.dialogues.iter().enumerate() {
            let spikes: Vec<_> = crate::corpus::detect_spikes(d, 0.5);
            assert_eq!(spikes.len(), 1);
            assert_eq!(spikes[0].emotion, Emotion::ALL[i % 8]);
        }
    }

    #[test]
    fn kinds_parse() {
        for (s, k) in [("mirroring", FixtureKind::Mirroring), ("spike-amplify", FixtureKind::SpikeAmplify), ("StyleNull", FixtureKind::StyleNull)] {
            assert_eq!(FixtureKind::parse(s), Some(k));
        }
    }
}
