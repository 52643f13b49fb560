use log::warn;

use super::{midranks, normal_two_sided, StatsError, TestResult};

/// Largest number of non-zero differences for which the Wilcoxon p-value is
/// computed from the exact null distribution.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

/// Paired Wilcoxon signed-rank test on `x − y`, two-sided.
///
/// Zero differences are dropped. The statistic is the sum of ranks of the
/// positive differences (W+). With at most [`WILCOXON_EXACT_MAX_N`] non-zero
/// differences the p-value comes from the exact permutation distribution of
/// W+ (mid-ranks for ties); above that a tie-corrected normal approximation
/// is used.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    if d.is_empty() {
        if !x.is_empty() {
            warn!("wilcoxon: all {} differences are zero, p = 1", x.len());
        }
        return Ok(TestResult::new("wilcoxon_signed_rank", 0.0, 1.0, vec![x.len()]));
    }
    let n = d.len();
    if n < 5 {
        return Err(StatsError::TooFewObservations { needed: 5, got: n });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = midranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();

    let p = if n <= WILCOXON_EXACT_MAX_N {
        exact_signed_rank_p(&ranks, w_plus)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|&t| (t.pow(3) - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        if var <= 0.0 { 1.0 } else { normal_two_sided((w_plus - mean) / var.sqrt()) }
    };
    let total = (n * (n + 1)) as f64 / 2.0;
    let rank_biserial = (2.0 * w_plus - total) / total;
    Ok(TestResult::new("wilcoxon_signed_rank", w_plus, p, vec![n])
        .with_effect("rank_biserial", rank_biserial))
}

/// Exact two-sided p for the signed-rank sum: counts sign assignments by
/// dynamic programming over doubled (integral) mid-ranks.
fn exact_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let observed = (w_plus * 2.0).round() as usize;
    let total: f64 = counts.iter().sum();
    let lower: f64 = counts[..=observed].iter().sum();
    let upper: f64 = counts[observed..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// Cliff's delta: `(#{x_i > y_j} − #{x_i < y_j}) / (|x||y|)`.
pub fn cliffs_delta(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut ys = y.to_vec();
    ys.sort_by(f64::total_cmp);
    let mut balance: i64 = 0;
    for &xi in x {
        let below = ys.partition_point(|&v| v < xi) as i64;
        let not_above = ys.partition_point(|&v| v <= xi) as i64;
        balance += below - (ys.len() as i64 - not_above);
    }
    Ok(balance as f64 / (x.len() * y.len()) as f64)
}

/// Mann-Whitney U test, two-sided, tie-corrected normal approximation with
/// continuity correction. The statistic is `U_x` (pairs with `x > y`, ties
/// counted one half); the effect size is Cliff's delta of `x` against `y`.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    for s in [x, y] {
        if s.len() < 3 {
            return Err(StatsError::TooFewObservations { needed: 3, got: s.len() });
        }
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_x: f64 = ranks[..x.len()].iter().sum();
    let u_x = rank_sum_x - nx * (nx + 1.0) / 2.0;

    let n = nx + ny;
    let tie_term: f64 = ties.iter().map(|&t| (t.pow(3) - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = nx * ny / 12.0 * ((n + 1.0) - tie_term);
    let mu = nx * ny / 2.0;
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((u_x - mu).abs() - 0.5).max(0.0) / var.sqrt();
        normal_two_sided(z)
    };
    let delta = 2.0 * u_x / (nx * ny) - 1.0;
    Ok(TestResult::new("mann_whitney_u", u_x, p, vec![x.len(), y.len()]).with_effect("cliffs_delta", delta))
}
