use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{StatsError, TestResult};

/// Up to this many deltas the sign-flip distribution is enumerated exactly.
pub const EXACT_MAX_N: usize = 12;

const MIN_RESAMPLES: usize = 1000;

fn tolerance(deltas: &[f64]) -> f64 {
    1e-9 * (1.0 + deltas.iter().map(|d| d.abs()).sum::<f64>())
}

/// Paired sign-flip permutation test of `mean(deltas) ≠ 0`, two-sided.
///
/// Enumerates all `2^n` sign assignments when `n <= EXACT_MAX_N` or when
/// `2^n <= resamples`; otherwise draws `resamples` random assignments and
/// reports `(1 + #extreme) / (1 + resamples)`.
pub fn paired_sign_flip_permutation(
    deltas: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<TestResult, StatsError> {
    if deltas.len() < 5 {
        return Err(StatsError::TooFewObservations { needed: 5, got: deltas.len() });
    }
    let n = deltas.len();
    let exact = n <= EXACT_MAX_N || (n < 63 && (1usize << n) <= resamples);
    if exact {
        Ok(sign_flip_exact(deltas))
    } else {
        if resamples < MIN_RESAMPLES {
            return Err(StatsError::InvalidArgument(format!(
                "{resamples} resamples; at least {MIN_RESAMPLES} required"
            )));
        }
        Ok(sign_flip_monte_carlo(deltas, resamples, seed))
    }
}

/// Exact sign-flip p-value by full enumeration. Intended for small `n`.
pub fn sign_flip_exact(deltas: &[f64]) -> TestResult {
    let n = deltas.len();
    let observed: f64 = deltas.iter().sum();
    let threshold = observed.abs() - tolerance(deltas);
    let p = if deltas.iter().all(|d| *d == 0.0) {
        1.0
    } else {
        fn walk(rest: &[f64], acc: f64, threshold: f64) -> u64 {
            match rest.split_first() {
                None => (acc.abs() >= threshold) as u64,
                Some((d, tail)) => walk(tail, acc + d, threshold) + walk(tail, acc - d, threshold),
            }
        }
        walk(deltas, 0.0, threshold) as f64 / 2f64.powi(n as i32)
    };
    TestResult::new("sign_flip_exact", observed / n as f64, p, vec![n])
}

/// Monte Carlo sign-flip p-value with add-one smoothing.
pub fn sign_flip_monte_carlo(deltas: &[f64], resamples: usize, seed: u64) -> TestResult {
    let n = deltas.len();
    let observed: f64 = deltas.iter().sum();
    if deltas.iter().all(|d| *d == 0.0) {
        return TestResult::new("sign_flip_monte_carlo", 0.0, 1.0, vec![n]);
    }
    let threshold = observed.abs() - tolerance(deltas);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..resamples {
        let s: f64 = deltas.iter().map(|&d| if rng.random::<bool>() { d } else { -d }).sum();
        if s.abs() >= threshold {
            extreme += 1;
        }
    }
    let p = (1 + extreme) as f64 / (1 + resamples) as f64;
    TestResult::new("sign_flip_monte_carlo", observed / n as f64, p, vec![n])
}
