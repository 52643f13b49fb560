use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::corpus::{dominant_emotion, Emotion, TurnPair};
use crate::stats::{bonferroni_alpha, bonferroni_z_cutoff, chi_squared_independence, icc_oneway, ols_fit_named};

/// Smallest number of complete pairs accepted by [`coupling_regression`].
pub const MIN_COUPLING_PAIRS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationResult {
    /// Counts; rows are the user's dominant emotion, columns the chatbot's.
    pub table: Vec<Vec<f64>>,
    pub retained: usize,
    /// Pairs dropped because a turn lacked scores or a dominant emotion.
    pub dropped: usize,
    pub chi2: f64,
    pub df: usize,
    pub p_value: f64,
    pub cramers_v: f64,
    /// Adjusted residuals; `None` for emotions that never occur on that side.
    pub residuals: Vec<Vec<Option<f64>>>,
    pub z_cutoff: f64,
    /// `|z| > z_cutoff`, the cutoff being Bonferroni over the 8 cells of a column.
    pub flagged: Vec<Vec<bool>>,
}

/// Chi-squared association of user and chatbot dominant emotions.
///
/// Emotions absent on one side (all-zero row or column) are removed before
/// the test; their residuals are reported as `None`.
pub fn dominant_emotion_association(pairs: &[TurnPair<'_>]) -> Result<AssociationResult, DynamicsError> {
    let mut table = vec![vec![0.0; Emotion::COUNT]; Emotion::COUNT];
    let mut dropped = 0;
    for p in pairs {
        let u = p.user_turn.emotions.as_ref().and_then(dominant_emotion);
        let b = p.bot_turn.emotions.as_ref().and_then(dominant_emotion);
        match (u, b) {
            (Some(u), Some(b)) => table[u.index()][b.index()] += 1.0,
            _ => dropped += 1,
        }
    }
    let retained = pairs.len() - dropped;
    if retained == 0 {
        return Err(DynamicsError::EmptyTable);
    }
    let rows: Vec<usize> = (0..Emotion::COUNT).filter(|&i| table[i].iter().sum::<f64>() > 0.0).collect();
    let cols: Vec<usize> = (0..Emotion::COUNT).filter(|&j| table.iter().map(|r| r[j]).sum::<f64>() > 0.0).collect();
    let reduced: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| table[i][j]).collect()).collect();
    let res = chi_squared_independence(&reduced)?;

    let z_cutoff = bonferroni_z_cutoff(0.05, Emotion::COUNT)?;
    let mut residuals = vec![vec![None; Emotion::COUNT]; Emotion::COUNT];
    for (ri, &i) in rows.iter().enumerate() {
        for (cj, &j) in cols.iter().enumerate() {
            residuals[i][j] = res.residuals[ri][cj];
        }
    }
    let flagged = residuals
        .iter()
        .map(|r| r.iter().map(|z| z.is_some_and(|z| z.abs() > z_cutoff)).collect())
        .collect();
    Ok(AssociationResult {
        table,
        retained,
        dropped,
        chi2: res.chi2,
        df: res.df,
        p_value: res.p_value,
        cramers_v: res.cramers_v,
        residuals,
        z_cutoff,
        flagged,
    })
}

/// Regression of each chatbot emotion on all eight user emotions.
/// Matrices are indexed `[user emotion][bot emotion]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    pub beta: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
    pub t_values: Vec<Vec<f64>>,
    pub p_values: Vec<Vec<f64>>,
    /// `p < alpha / 64`.
    pub significant: Vec<Vec<bool>>,
    pub corrected_alpha: f64,
    /// Coefficients with `p < 0.05` before correction.
    pub uncorrected_significant: usize,
    /// Per bot emotion.
    pub intercepts: Vec<f64>,
    pub r_squared: Vec<f64>,
    /// Per bot emotion: share of variance lying between dialogues.
    pub between_dialogue_share: Vec<Option<f64>>,
    pub pairs: usize,
}

/// Fits the eight regressions on raw vectors. `groups` assigns each row to a
/// dialogue for the between-dialogue variance diagnostic.
pub fn fit_coupling(user: &[[f64; 8]], bot: &[[f64; 8]], groups: Option<&[usize]>) -> Result<CouplingMatrix, DynamicsError> {
    if user.len() != bot.len() {
        return Err(DynamicsError::InvalidArgument("user and bot rows differ in number".into()));
    }
    let names: Vec<&str> = Emotion::ALL.iter().map(|e| e.name()).collect();
    let x: Vec<Vec<f64>> = user.iter().map(|r| r.to_vec()).collect();
    let k = Emotion::COUNT;
    let corrected_alpha = bonferroni_alpha(0.05, k * k)?;
    let mut m = CouplingMatrix {
        beta: vec![vec![0.0; k]; k],
        std_errors: vec![vec![0.0; k]; k],
        t_values: vec![vec![0.0; k]; k],
        p_values: vec![vec![1.0; k]; k],
        significant: vec![vec![false; k]; k],
        corrected_alpha,
        uncorrected_significant: 0,
        intercepts: Vec::with_capacity(k),
        r_squared: Vec::with_capacity(k),
        between_dialogue_share: Vec::with_capacity(k),
        pairs: user.len(),
    };
    for b in 0..k {
        let y: Vec<f64> = bot.iter().map(|r| r[b]).collect();
        let fit = ols_fit_named(&x, &y, &names)?;
        m.intercepts.push(fit.coefficients[0]);
        m.r_squared.push(fit.r_squared);
        for u in 0..k {
            m.beta[u][b] = fit.coefficients[u + 1];
            m.std_errors[u][b] = fit.std_errors[u + 1];
            m.t_values[u][b] = fit.t_values[u + 1];
            m.p_values[u][b] = fit.p_values[u + 1];
            m.significant[u][b] = fit.p_values[u + 1] < corrected_alpha;
            m.uncorrected_significant += (fit.p_values[u + 1] < 0.05) as usize;
        }
        m.between_dialogue_share.push(groups.and_then(|g| {
            let mut by: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for (gi, v) in g.iter().zip(&y) {
                by.entry(*gi).or_default().push(*v);
            }
            icc_oneway(&by.into_values().collect::<Vec<_>>())
        }));
    }
    Ok(m)
}

/// [`fit_coupling`] over every pair where both turns are scored.
pub fn coupling_regression(pairs: &[TurnPair<'_>]) -> Result<CouplingMatrix, DynamicsError> {
    let mut user = Vec::new();
    let mut bot = Vec::new();
    let mut groups = Vec::new();
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    for p in pairs {
        if let (Some(u), Some(b)) = (p.user_turn.emotions, p.bot_turn.emotions) {
            user.push(*u.as_array());
            bot.push(*b.as_array());
            let next = ids.len();
            groups.push(*ids.entry(p.dialogue_id).or_insert(next));
        }
    }
    if user.len() < MIN_COUPLING_PAIRS {
        return Err(DynamicsError::TooFewPairs { needed: MIN_COUPLING_PAIRS, got: user.len() });
    }
    fit_coupling(&user, &bot, Some(&groups))
}
