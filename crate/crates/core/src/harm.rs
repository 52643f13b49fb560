//! Explicit-content analysis: harm prevalence, emotion/harm correlation
//! during spikes and the distribution of chatbot response types.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{extract_turn_pairs, Corpus, Emotion, Harm, ResponseType};
use crate::stats::pearson_correlation;
use crate::Warning;

/// Spiked user turns required by [`emotion_harm_correlation`].
pub const MIN_SPIKE_TURNS: usize = 10;

/// Bucket for chatbot replies without a response-type label.
pub const UNLABELED: &str = "unlabeled";

#[derive(Debug, Error)]
pub enum HarmError {
    #[error("need at least {needed} spiked user turns with emotion and harm scores, got {got}")]
    TooFewSpikes { needed: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prevalence {
    pub harm: Harm,
    /// Percent of included dialogues.
    pub percent: f64,
    pub dialogues: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmPrevalence {
    pub categories: Vec<Prevalence>,
    pub any_percent: f64,
    pub any_dialogues: usize,
    /// Dialogues with at least one harm-scored user turn.
    pub included: usize,
    pub excluded: usize,
    pub warnings: Vec<Warning>,
}

/// Percentage of dialogues with a user turn scoring above `t` per harm
/// category and for any category. Dialogues with no harm-scored user turn
/// are excluded.
pub fn harm_prevalence(c: &Corpus, t: f64) -> HarmPrevalence {
    let per: Vec<Option<[bool; 4]>> = c
        .dialogues
        .par_iter()
        .map(|d| {
            let mut scored = false;
            let mut hit = [false; 4];
            for h in d.user_turns().filter_map(|u| u.harms) {
                scored = true;
                for (flag, v) in hit.iter_mut().zip(h.as_array()) {
                    *flag |= *v > t;
                }
            }
            scored.then_some(hit)
        })
        .collect();
    let warnings: Vec<Warning> = c
        .dialogues
        .iter()
        .zip(&per)
        .filter(|(_, p)| p.is_none())
        .map(|(d, _)| Warning::new(&d.id, "missing_harms", "no user turn carries harm scores"))
        .collect();
    let hits: Vec<[bool; 4]> = per.into_iter().flatten().collect();
    let included = hits.len();
    let pct = |k: usize| if included == 0 { 0.0 } else { 100.0 * k as f64 / included as f64 };
    let categories = Harm::ALL
        .iter()
        .map(|&h| {
            let k = hits.iter().filter(|x| x[h.index()]).count();
            Prevalence { harm: h, percent: pct(k), dialogues: k }
        })
        .collect();
    let any = hits.iter().filter(|x| x.iter().any(|b| *b)).count();
    HarmPrevalence {
        categories,
        any_percent: pct(any),
        any_dialogues: any,
        included,
        excluded: warnings.len(),
        warnings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub r: Option<f64>,
    pub p_value: Option<f64>,
    /// `true` when `p >= 0.05` or `r` is undefined.
    pub masked: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionHarmCorrelation {
    /// Indexed `[emotion][harm]`.
    pub cells: Vec<Vec<CorrelationCell>>,
    pub turns: usize,
}

/// Pearson correlation of each emotion with each harm score across user
/// turns with any emotion above `t`.
pub fn emotion_harm_correlation(c: &Corpus, t: f64) -> Result<EmotionHarmCorrelation, HarmError> {
    let rows: Vec<([f64; 8], [f64; 4])> = c
        .dialogues
        .iter()
        .flat_map(|d| d.user_turns())
        .filter_map(|u| match (u.emotions, u.harms) {
            (Some(e), Some(h)) if e.max_score() > t => Some((*e.as_array(), *h.as_array())),
            _ => None,
        })
        .collect();
    if rows.len() < MIN_SPIKE_TURNS {
        return Err(HarmError::TooFewSpikes { needed: MIN_SPIKE_TURNS, got: rows.len() });
    }
    let cells = Emotion::ALL
        .iter()
        .map(|e| {
            let x: Vec<f64> = rows.iter().map(|r| r.0[e.index()]).collect();
            Harm::ALL
                .iter()
                .map(|h| {
                    let y: Vec<f64> = rows.iter().map(|r| r.1[h.index()]).collect();
                    match pearson_correlation(&x, &y) {
                        Ok(res) => CorrelationCell {
                            r: Some(res.statistic),
                            p_value: Some(res.p_value),
                            masked: res.p_value >= 0.05,
                            note: None,
                        },
                        Err(err) => CorrelationCell {
                            r: None,
                            p_value: None,
                            masked: true,
                            note: Some(err.to_string()),
                        },
                    }
                })
                .collect()
        })
        .collect();
    Ok(EmotionHarmCorrelation { cells, turns: rows.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseDistribution {
    pub harm: Harm,
    /// Chatbot replies to user turns above the threshold for this category.
    pub responses: usize,
    /// Percent per label name plus [`UNLABELED`]; empty when `responses == 0`.
    pub percent: BTreeMap<String, f64>,
}

/// Distribution of response-type labels on chatbot replies to harmful user
/// turns, per harm category. A turn above `t` in several categories counts
/// toward each of them.
pub fn response_type_distribution(c: &Corpus, t: f64) -> Vec<ResponseDistribution> {
    let mut counts: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); Harm::COUNT];
    for d in &c.dialogues {
        for p in extract_turn_pairs(d) {
            let Some(h) = p.user_turn.harms else { continue };
            let label = p.bot_turn.response_type.map_or(UNLABELED, ResponseType::name);
            for harm in Harm::ALL.iter().filter(|x| h.get(**x) > t) {
                *counts[harm.index()].entry(label.to_string()).or_insert(0) += 1;
            }
        }
    }
    Harm::ALL
        .iter()
        .zip(counts)
        .map(|(&harm, m)| {
            let total: usize = m.values().sum();
            let percent = m.into_iter().map(|(k, v)| (k, 100.0 * v as f64 / total as f64)).collect();
            ResponseDistribution { harm, responses: total, percent }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Dialogue, EmotionVector, HarmVector, Turn};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn harms(v: [f64; 4]) -> HarmVector {
        HarmVector::new(v).unwrap()
    }

    fn dialogue(id: usize, user_harm: [f64; 4], label: Option<ResponseType>) -> Dialogue {
        let mut bot = Turn::chatbot(1).with_text("ok");
        if let Some(l) = label {
            bot = bot.with_response_type(l);
        }
        Dialogue::new(
            format!("d{id}"),
            vec![Turn::user(0).with_text("x").with_harms(harms(user_harm)), bot],
        )
    }

    #[test]
    fn prevalence_examples() {
        let quiet: Vec<Dialogue> = (0..10).map(|i| dialogue(i, [0.4; 4], None)).collect();
        let r = harm_prevalence(&Corpus::new(quiet), 0.5);
        assert!(r.categories.iter().all(|p| p.percent == 0.0));
        assert_eq!(r.any_percent, 0.0);

        let mixed: Vec<Dialogue> =
            (0..10).map(|i| dialogue(i, if i < 4 { [0.9, 0.0, 0.0, 0.0] } else { [0.0; 4] }, None)).collect();
        let r = harm_prevalence(&Corpus::new(mixed), 0.5);
        assert_eq!(r.categories[Harm::Harassment.index()].percent, 40.0);
        assert_eq!(r.any_percent, 40.0);
    }

    #[test]
    fn unscored_dialogues_are_excluded() {
        let mut ds = vec![dialogue(0, [0.9, 0.0, 0.0, 0.0], None)];
        ds.push(Dialogue::new("bare", vec![Turn::user(0).with_text("hi")]));
        let r = harm_prevalence(&Corpus::new(ds), 0.5);
        assert_eq!((r.included, r.excluded), (1, 1));
        assert_eq!(r.warnings[0].dialogue_id, "bare");
        assert_eq!(r.any_percent, 100.0);
    }

    fn random_corpus(seed: u64) -> Corpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Corpus::new(
            (0..30)
                .map(|i| {
                    let turns = (0..3)
                        .map(|k| {
                            Turn::user(k)
                                .with_text("x")
                                .with_harms(HarmVector::clamped(std::array::from_fn(|_| rng.random_range(0.0..1.0))))
                        })
                        .collect();
                    Dialogue::new(format!("d{i}"), turns)
                })
                .collect(),
        )
    }

    proptest! {
        #[test]
        fn any_harm_matches_channel_max_and_is_monotone(seed in 0u64..500, t in 0.1f64..0.9, dt in 0.0f64..0.3) {
            let c = random_corpus(seed);
            let r = harm_prevalence(&c, t);
            let by_max = c.dialogues.iter()
                .filter(|d| d.user_turns().any(|u| u.harms.unwrap().max_score() > t))
                .count();
            prop_assert_eq!(r.any_dialogues, by_max);
            let max_cat = r.categories.iter().map(|p| p.percent).fold(0.0, f64::max);
            prop_assert!(r.any_percent >= max_cat);
            let higher = harm_prevalence(&c, t + dt);
            prop_assert!(higher.any_percent <= r.any_percent);
            for (a, b) in higher.categories.iter().zip(&r.categories) {
                prop_assert!(a.percent <= b.percent);
            }
        }
    }

    fn spike_turns(rows: &[([f64; 8], [f64; 4])]) -> Corpus {
        Corpus::new(
            rows.iter()
                .enumerate()
                .map(|(i, (e, h))| {
                    Dialogue::new(
                        format!("d{i}"),
                        vec![Turn::user(0).with_emotions(EmotionVector::new(*e).unwrap()).with_harms(harms(*h))],
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn copied_anger_correlates_perfectly_and_constants_are_masked() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<([f64; 8], [f64; 4])> = (0..30)
            .map(|_| {
                let mut e: [f64; 8] = std::array::from_fn(|_| rng.random_range(0.0..0.5));
                e[Emotion::Anger.index()] = rng.random_range(0.55..1.0);
                (e, [e[Emotion::Anger.index()], 0.2, 0.2, 0.2])
            })
            .collect();
        let r = emotion_harm_correlation(&spike_turns(&rows), 0.5).unwrap();
        let cell = &r.cells[Emotion::Anger.index()][Harm::Harassment.index()];
        assert!((cell.r.unwrap() - 1.0).abs() < 1e-12);
        assert!(!cell.masked);
        for e in 0..8 {
            for h in 1..4 {
                assert!(r.cells[e][h].masked && r.cells[e][h].r.is_none());
            }
        }
    }

    #[test]
    fn planted_correlation_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = Normal::new(0.0, 1.0).unwrap();
        let rho: f64 = 0.4;
        let rows: Vec<([f64; 8], [f64; 4])> = (0..500)
            .map(|_| {
                let (a, b): (f64, f64) = (z.sample(&mut rng), z.sample(&mut rng));
                let anger = 0.75 + 0.05 * a;
                let violence = 0.5 + 0.05 * (rho * a + (1.0 - rho * rho).sqrt() * b);
                let mut e: [f64; 8] = std::array::from_fn(|_| rng.random_range(0.0..0.3));
                e[Emotion::Anger.index()] = anger;
                (e, [0.1, 0.1, 0.1, violence])
            })
            .collect();
        let r = emotion_harm_correlation(&spike_turns(&rows), 0.5).unwrap();
        let got = r.cells[Emotion::Anger.index()][Harm::Violence.index()].r.unwrap();
        assert!((got - 0.4).abs() < 0.1, "{got}");
    }

    #[test]
    fn too_few_spikes() {
        let rows = vec![([0.9; 8], [0.1; 4]); 5];
        assert!(matches!(emotion_harm_correlation(&spike_turns(&rows), 0.5), Err(HarmError::TooFewSpikes { .. })));
    }

    #[test]
    fn response_distribution_examples() {
        let all: Vec<Dialogue> = (0..5).map(|i| dialogue(i, [0.9; 4], Some(ResponseType::PoliteRefusal))).collect();
        for dist in response_type_distribution(&Corpus::new(all), 0.5) {
            assert_eq!(dist.percent[ResponseType::PoliteRefusal.name()], 100.0);
        }

        let planted: Vec<Dialogue> = (0..10)
            .map(|i| {
                let label = if i < 6 { ResponseType::PlayAlongFlirtation } else { ResponseType::Deflection };
                dialogue(i, [0.0, 0.0, 0.8, 0.0], Some(label))
            })
            .chain([dialogue(10, [0.0, 0.0, 0.0, 0.7], None)])
            .collect();
        let r = response_type_distribution(&Corpus::new(planted), 0.5);
        let sexual = &r[Harm::Sexual.index()];
        assert_eq!(sexual.responses, 10);
        assert_eq!(sexual.percent[ResponseType::PlayAlongFlirtation.name()], 60.0);
        assert_eq!(sexual.percent[ResponseType::Deflection.name()], 40.0);
        assert_eq!(r[Harm::Violence.index()].percent[UNLABELED], 100.0);
        assert_eq!(r[Harm::Harassment.index()].responses, 0);
        assert!(r[Harm::Harassment.index()].percent.is_empty());
        for d in &r {
            if d.responses > 0 {
                assert!((d.percent.values().sum::<f64>() - 100.0).abs() < 1e-9);
            }
        }
    }
}
