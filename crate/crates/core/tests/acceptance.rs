//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails. Tolerances are fixed here.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use affectdyn::corpus::{mask_corpus, Corpus, EmotionVector};
use affectdyn::dynamics::{dtw, post_spike_analysis};
use affectdyn::pipeline::{
    generate_fixture, run_pipeline, write_fixture_bundle, Analysis, FixtureKind, RunConfig, REPORT_SCHEMA,
};
use affectdyn::psychosocial::{build_axis, node2vec_embed, planted_partition, project_scores, AxisSpec, BipartiteGraph, Node2vecParams};
use affectdyn::stats::{
    bonferroni_alpha, bonferroni_z_cutoff, chi_squared_independence, mann_whitney_u, ols_fit, one_sample_t,
    paired_sign_flip_permutation, wilcoxon_signed_rank,
};
use affectdyn::style::{category_rates, lsm_score, self_reference_shift, style_matching_test, Lexicon};
use affectdyn::topics::{dp_means, EmbeddingMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const DTW_TOL: f64 = 1e-9;
const DTW_BUDGET: Duration = Duration::from_secs(5);
const EXACT_TOL: f64 = 1e-12;
const CHI2_TOL: f64 = 1e-4;
const Z_CUTOFF_TARGET: f64 = 2.77;
const Z_CUTOFF_TOL: f64 = 0.01;
const OLS_TOL: f64 = 1e-8;
const CALIBRATION_RUNS: usize = 200;
const CALIBRATION_BAND: (f64, f64) = (0.025, 0.075);
const AUC_MIN: f64 = 0.95;
const NODE2VEC_BUDGET: Duration = Duration::from_secs(30);
const SMOKE_BUDGET: Duration = Duration::from_secs(60);
const ALPHA_8: f64 = 0.00625;
const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 8] {
    std::array::from_fn(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random::<f64>() })
}

fn cosine(a: &[f64; 8], b: &[f64; 8]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if a == b {
        0.0
    } else if na == 0.0 || nb == 0.0 {
        1.0
    } else {
        (1.0 - dot / (na * nb)).clamp(0.0, 2.0)
    }
}

/// Minimum cost over every monotone path from (0,0) to the far corner.
fn brute_dtw(a: &[[f64; 8]], b: &[[f64; 8]]) -> f64 {
    fn go(a: &[[f64; 8]], b: &[[f64; 8]], i: usize, j: usize) -> f64 {
        let here = cosine(&a[i], &b[j]);
        if i + 1 == a.len() && j + 1 == b.len() {
            return here;
        }
        let mut best = f64::INFINITY;
        if i + 1 < a.len() {
            best = best.min(go(a, b, i + 1, j));
        }
        if j + 1 < b.len() {
            best = best.min(go(a, b, i, j + 1));
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            best = best.min(go(a, b, i + 1, j + 1));
        }
        here + best
    }
    go(a, b, 0, 0)
}

fn dtw_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a: Vec<[f64; 8]> = (0..rng.random_range(1..=6)).map(|_| unit_vector(&mut rng)).collect();
        let b: Vec<[f64; 8]> = (0..rng.random_range(1..=6)).map(|_| unit_vector(&mut rng)).collect();
        let ea: Vec<EmotionVector> = a.iter().map(|v| EmotionVector::new(*v).unwrap()).collect();
        let eb: Vec<EmotionVector> = b.iter().map(|v| EmotionVector::new(*v).unwrap()).collect();
        worst = worst.max((dtw(&ea, &eb).raw_cost - brute_dtw(&a, &b)).abs());
    }
    let t = start.elapsed();
    ensure(worst <= DTW_TOL && t < DTW_BUDGET, format!("max |dp - enumeration| = {worst:.2e}, {:.2} s", t.as_secs_f64()))
}

fn midranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let below = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn wilcoxon_enumerated(d: &[f64]) -> f64 {
    let d: Vec<f64> = d.iter().copied().filter(|x| *x != 0.0).collect();
    let n = d.len();
    let ranks = midranks(&d.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let observed: f64 = ranks.iter().zip(&d).filter(|(_, x)| **x > 0.0).map(|(r, _)| r).sum();
    let (mut lo, mut hi) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        let w: f64 = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| ranks[k]).sum();
        lo += (w <= observed + 1e-9) as u64;
        hi += (w >= observed - 1e-9) as u64;
    }
    (2.0 * lo.min(hi) as f64 / (1u64 << n) as f64).min(1.0)
}

fn sign_flip_enumerated(d: &[f64]) -> f64 {
    let n = d.len();
    let observed: f64 = d.iter().sum::<f64>().abs();
    let mut hits = 0u64;
    for mask in 0u32..(1 << n) {
        let s: f64 = (0..n).map(|k| if mask >> k & 1 == 1 { -d[k] } else { d[k] }).sum();
        hits += (s.abs() >= observed - 1e-9) as u64;
    }
    hits as f64 / (1u64 << n) as f64
}

fn exact_tests() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst_w, mut worst_p, mut fixtures) = (0.0f64, 0.0f64, 0);
    for n in 5..=12 {
        for rep in 0..25 {
            // Every other fixture is rounded to one decimal to force ties.
            let round = |x: f64| if rep % 2 == 0 { x } else { (x * 10.0).round() / 10.0 };
            let x: Vec<f64> = (0..n).map(|_| round(rng.random_range(-1.0..1.5))).collect();
            let y: Vec<f64> = (0..n).map(|_| round(rng.random_range(-1.0..1.0))).collect();
            let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            if d.iter().filter(|v| **v != 0.0).count() >= 5 {
                let p = wilcoxon_signed_rank(&x, &y).unwrap().p_value;
                worst_w = worst_w.max((p - wilcoxon_enumerated(&d)).abs());
            }
            let p = paired_sign_flip_permutation(&d, 10_000, 1).unwrap().p_value;
            worst_p = worst_p.max((p - sign_flip_enumerated(&d)).abs());
            fixtures += 1;
        }
    }
    ensure(
        worst_w <= EXACT_TOL && worst_p <= EXACT_TOL,
        format!("{fixtures} fixtures n=5..12: wilcoxon max diff {worst_w:.1e}, sign-flip max diff {worst_p:.1e}"),
    )
}

fn chi_squared() -> Check {
    let r = chi_squared_independence(&[vec![10.0, 20.0], vec![20.0, 10.0]]).map_err(|e| e.to_string())?;
    let chi_ok = (r.chi2 - 6.6667).abs() <= CHI2_TOL;
    let v_ok = (r.cramers_v - (r.chi2 / 60.0).sqrt()).abs() < 1e-12;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let rows: Vec<f64> = (0..rng.random_range(2..6)).map(|_| rng.random_range(1..10) as f64).collect();
        let cols: Vec<f64> = (0..rng.random_range(2..6)).map(|_| rng.random_range(1..10) as f64).collect();
        let t: Vec<Vec<f64>> = rows.iter().map(|a| cols.iter().map(|b| a * b).collect()).collect();
        let r = chi_squared_independence(&t).map_err(|e| e.to_string())?;
        for z in r.residuals.iter().flatten() {
            worst = worst.max(z.map_or(f64::INFINITY, f64::abs));
        }
    }
    ensure(
        chi_ok && v_ok && worst < 1e-9,
        format!("chi2 = {:.4}, V = {:.4}; independent tables max |residual| = {worst:.1e}", r.chi2, r.cramers_v),
    )
}

fn bonferroni() -> Check {
    let alpha = bonferroni_alpha(0.05, 8).map_err(|e| e.to_string())?;
    let z = bonferroni_z_cutoff(0.05, 8).map_err(|e| e.to_string())?;
    ensure(
        alpha == 0.00625 && (z - Z_CUTOFF_TARGET).abs() <= Z_CUTOFF_TOL,
        format!("alpha = {alpha} (want 0.00625); z cutoff = {z:.4} (want {Z_CUTOFF_TARGET} ± {Z_CUTOFF_TOL})"),
    )
}

/// Solves `(XᵀX) β = Xᵀy` by Gaussian elimination with partial pivoting.
fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len() + 1;
    let row = |i: usize| std::iter::once(1.0).chain(x[i].iter().copied()).collect::<Vec<f64>>();
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..x.len() {
        let r = row(i);
        for j in 0..p {
            for k in 0..p {
                a[j][k] += r[j] * r[k];
            }
            a[j][p] += r[j] * y[i];
        }
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        for r in 0..p {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=p {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

fn ols() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(1..=5);
        let n = rng.random_range(30..120);
        let beta: Vec<f64> = (0..=k).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| beta[0] + r.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>() + noise.sample(&mut rng))
            .collect();
        let fit = ols_fit(&x, &y).map_err(|e| e.to_string())?;
        for (a, b) in fit.coefficients.iter().zip(normal_equations(&x, &y)) {
            worst = worst.max((a - b).abs());
        }
    }
    let x: Vec<Vec<f64>> = (1..=10).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = (1..=10).map(|i| 2.0 * i as f64).collect();
    let fit = ols_fit(&x, &y).map_err(|e| e.to_string())?;
    ensure(
        worst <= OLS_TOL && fit.coefficients[1] == 2.0 && fit.r_squared == 1.0,
        format!("max |qr - normal eq| = {worst:.1e}; y=2x gives beta = {}, R² = {}", fit.coefficients[1], fit.r_squared),
    )
}

fn fixture_config(dir: &Path, kind: FixtureKind, n: usize, seed: u64, analyses: &[Analysis]) -> RunConfig {
    let path = write_fixture_bundle(dir, kind, n, seed).unwrap();
    let mut cfg = RunConfig::load(&path).unwrap();
    cfg.analyses = analyses.to_vec();
    cfg
}

fn mirroring_and_independent() -> Check {
    let analyses = [Analysis::Ingest, Analysis::Salient, Analysis::DialogueLevel, Analysis::TurnLevel];
    let mut failures = Vec::new();
    let (mut beta_lo, mut beta_hi, mut v_min, mut d_min, mut p_max) = (f64::INFINITY, f64::NEG_INFINITY, 1.0f64, f64::INFINITY, 0.0f64);
    let (mut null_ok, mut sig_max) = (0, 0);
    for seed in SEEDS {
        let dir = tempfile::tempdir().unwrap();
        let r = run_pipeline(&fixture_config(dir.path(), FixtureKind::Mirroring, 200, seed, &analyses)).map_err(|e| e.to_string())?;
        let t = r.turn_level.unwrap();
        let dl = r.dialogue_level.unwrap();
        for k in 0..8 {
            beta_lo = beta_lo.min(t.coupling.beta[k][k]);
            beta_hi = beta_hi.max(t.coupling.beta[k][k]);
        }
        v_min = v_min.min(t.association.cramers_v);
        p_max = p_max.max(dl.dtw.test.p_value);
        d_min = d_min.min(dl.dtw.test.effect_size.unwrap_or(f64::NAN));

        let dir = tempfile::tempdir().unwrap();
        let r = run_pipeline(&fixture_config(dir.path(), FixtureKind::Independent, 200, seed, &analyses)).map_err(|e| e.to_string())?;
        let p = r.dialogue_level.unwrap().dtw.test.p_value;
        null_ok += (p > 0.05) as usize;
        let sig = r.turn_level.unwrap().coupling.uncorrected_significant;
        sig_max = sig_max.max(sig);
        if sig as f64 > 0.10 * 64.0 {
            failures.push(format!("independent seed {seed}: {sig}/64 significant"));
        }
    }
    if !(0.9..=1.1).contains(&beta_lo) || !(0.9..=1.1).contains(&beta_hi) {
        failures.push("mirroring diagonal beta".into());
    }
    if v_min <= 0.5 {
        failures.push("mirroring V".into());
    }
    if p_max >= ALPHA_8 || !(d_min > 0.5) {
        failures.push("mirroring dtw".into());
    }
    if null_ok < 4 {
        failures.push("independent dtw".into());
    }
    let detail = format!(
        "mirroring: diag beta in [{beta_lo:.3}, {beta_hi:.3}], min V = {v_min:.3}, max dtw p = {p_max:.2e}, min d = {d_min:.2}; \
         independent: dtw p > 0.05 in {null_ok}/5, max significant {sig_max}/64{}",
        if failures.is_empty() { String::new() } else { format!(" [{}]", failures.join("; ")) }
    );
    ensure(failures.is_empty(), detail)
}

fn spike_amplify() -> Check {
    let (mut worst_dev, mut worst_p, mut strata) = (0.0f64, 0.0f64, 0);
    let mut small = 0;
    for seed in SEEDS {
        let mut c = generate_fixture(FixtureKind::SpikeAmplify, 200, seed).map_err(|e| e.to_string())?;
        mask_corpus(&mut c, 0.05);
        let r = post_spike_analysis(&c, 0.5, 10_000, seed).map_err(|e| e.to_string())?;
        for row in &r.rows {
            if row.n < 20 {
                small += 1;
                continue;
            }
            strata += 1;
            worst_dev = worst_dev.max((row.matched_delta - 0.10).abs());
            worst_p = worst_p.max(row.contrast_test.as_ref().map_or(1.0, |t| t.p_value));
        }
    }
    ensure(
        strata > 0 && worst_dev <= 0.02 && worst_p < ALPHA_8,
        format!("{strata} strata with n >= 20 over 5 seeds ({small} smaller): max |matched - 0.10| = {worst_dev:.4}, max contrast p = {worst_p:.2e}"),
    )
}

fn calibration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| z.sample(&mut rng)).collect() };
    let mut rejects = [0usize; 4];
    for run in 0..CALIBRATION_RUNS {
        let (x, y) = (draw(30), draw(30));
        rejects[0] += (wilcoxon_signed_rank(&x, &y).unwrap().p_value < 0.05) as usize;
        rejects[1] += (mann_whitney_u(&x, &draw(25)).unwrap().p_value < 0.05) as usize;
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        rejects[2] += (paired_sign_flip_permutation(&d, 2000, run as u64).unwrap().p_value < 0.05) as usize;
        rejects[3] += (one_sample_t(&y, 0.0).unwrap().p_value < 0.05) as usize;
    }
    let rates: Vec<f64> = rejects.iter().map(|r| *r as f64 / CALIBRATION_RUNS as f64).collect();
    let ok = rates.iter().all(|r| (CALIBRATION_BAND.0..=CALIBRATION_BAND.1).contains(r));
    let names = ["wilcoxon", "mann-whitney", "permutation", "one-sample t"];
    let detail: Vec<String> = names.iter().zip(&rates).map(|(n, r)| format!("{n} {:.1}%", 100.0 * r)).collect();
    ensure(ok, format!("rejection at 0.05 over {CALIBRATION_RUNS} null runs: {}", detail.join(", ")))
}

fn auc(pos: &[f64], neg: &[f64]) -> f64 {
    let s: f64 = pos.iter().flat_map(|p| neg.iter().map(move |n| if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 })).sum();
    s / (pos.len() * neg.len()) as f64
}

fn node2vec_partition() -> Check {
    let start = Instant::now();
    let mut aucs = Vec::new();
    for seed in SEEDS {
        let g = BipartiteGraph::build(&planted_partition(20, 100, 5, 0.05, seed));
        let emb = node2vec_embed(&g, &Node2vecParams { seed, ..Default::default() }).map_err(|e| e.to_string())?;
        let axis = build_axis(&emb, &AxisSpec::new("block", &[("a00", "b00")])).map_err(|e| e.to_string())?;
        let t = project_scores(&emb, &[axis], g.communities(), &Default::default());
        let pick = |p: char| t.rows.iter().filter(|r| r.community.starts_with(p)).map(|r| r.score).collect::<Vec<_>>();
        aucs.push(auc(&pick('b'), &pick('a')));
    }
    let t = start.elapsed();
    let min = aucs.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(min >= AUC_MIN && t < NODE2VEC_BUDGET, format!("AUC per seed {aucs:.3?}, {:.1} s", t.as_secs_f64()))
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn matrix(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
    let ids = (0..rows.len()).map(|i| format!("x{i:03}")).collect();
    EmbeddingMatrix::new(ids, rows, None).unwrap()
}

fn dpmeans() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut failures = Vec::new();
    let mut iterations = 0;
    for set in 0..50 {
        let dims = rng.random_range(2..=5);
        let n = rng.random_range(20..=60);
        let centres: Vec<Vec<f64>> = (0..rng.random_range(1..=4)).map(|_| (0..dims).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
        let noise = Normal::new(0.0, rng.random_range(0.3..3.0)).unwrap();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let c = &centres[rng.random_range(0..centres.len())];
                c.iter().map(|v| v + noise.sample(&mut rng)).collect()
            })
            .collect();
        let lambda = rng.random_range(0.5..60.0);
        let m = matrix(rows.clone());
        let r = match catch_unwind(AssertUnwindSafe(|| dp_means(&m, lambda))) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => return Err(e.to_string()),
            Err(_) => {
                failures.push(format!("set {set}: objective rose"));
                continue;
            }
        };
        iterations += r.objective.len() - 1;
        if r.objective.windows(2).any(|w| w[1] > w[0] + 1e-9 * w[0].abs().max(1.0)) {
            failures.push(format!("set {set}: objective rose"));
        }
        let recomputed: f64 = rows.iter().zip(&r.assignments).map(|(x, &k)| sq(x, &r.clusters[k].centroid)).sum::<f64>()
            + lambda * r.clusters.len() as f64;
        if (recomputed - r.objective.last().unwrap()).abs() > 1e-6 * recomputed.max(1.0) {
            failures.push(format!("set {set}: objective trace disagrees with assignments"));
        }

        let max_pair = rows.iter().flat_map(|a| rows.iter().map(move |b| sq(a, b))).fold(0.0, f64::max);
        let k_big = dp_means(&m, max_pair * 1.01 + 1e-6).unwrap().clusters.len();
        let k_small = dp_means(&m, 1e-9).unwrap().clusters.len();
        if k_big != 1 || k_small != n {
            failures.push(format!("set {set}: extremes gave {k_big} and {k_small} of {n}"));
        }
    }
    let mut blobs = 0;
    for seed in SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut rows = Vec::new();
        for _ in 0..15 {
            rows.push(vec![rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)]);
            rows.push(vec![10.0 + rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)]);
        }
        let r = dp_means(&matrix(rows), 4.0).unwrap();
        let split = r.assignments.iter().step_by(2).all(|&k| k == r.assignments[0])
            && r.assignments.iter().skip(1).step_by(2).all(|&k| k == r.assignments[1])
            && r.assignments[0] != r.assignments[1];
        blobs += (r.clusters.len() == 2 && split) as usize;
    }
    if blobs != SEEDS.len() {
        failures.push(format!("two-blob recovered in {blobs}/5"));
    }
    ensure(
        failures.is_empty(),
        format!("50 datasets, {iterations} iterations, extremes and two-blob fixture checked{}", if failures.is_empty() { String::new() } else { format!(" [{}]", failures.join("; ")) }),
    )
}

fn smoke() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path(), FixtureKind::Mirroring, 100, 42, &Analysis::ALL);
    let start = Instant::now();
    let a = run_pipeline(&cfg).map_err(|e| e.to_string())?.to_json();
    let t = start.elapsed();
    let b = run_pipeline(&cfg).map_err(|e| e.to_string())?.to_json();
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).map_err(|e| format!("schema: {e}"))?;
    let instance: serde_json::Value = serde_json::from_str(&a).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    ensure(
        t < SMOKE_BUDGET && errors.is_empty() && a == b,
        format!(
            "all 9 analyses on 100 dialogues in {:.1} s; schema errors: {}; identical bytes: {}",
            t.as_secs_f64(),
            if errors.is_empty() { "none".into() } else { errors.join(" | ") },
            a == b
        ),
    )
}

fn masked(kind: FixtureKind, n: usize, seed: u64) -> Corpus {
    let mut c = generate_fixture(kind, n, seed).unwrap();
    mask_corpus(&mut c, 0.05);
    c
}

fn style() -> Check {
    let lex = Lexicon::function_words();
    let texts = ["I think we should go to the park", "you and me, but not them", "so what is it that they did?"];
    let lsm_ok = texts.iter().all(|t| {
        let p = category_rates(t, lex);
        lsm_score(&p, &p) == 1.0
    });
    let mut null_pass = 0;
    for seed in 0..100 {
        let c = masked(FixtureKind::StyleNull, 100, 1000 + seed);
        let r = style_matching_test(&c, lex, 0.5).map_err(|e| e.to_string())?;
        null_pass += (r.test.p_value > 0.05) as usize;
    }
    let c = masked(FixtureKind::FirstPerson, 100, 7);
    let r = self_reference_shift(&c, lex, 0.5).map_err(|e| e.to_string())?;
    let row = r.rows.iter().find(|r| r.category == "i").ok_or("no `i` row")?;
    let p = row.test.as_ref().map_or(1.0, |t| t.p_value);
    ensure(
        lsm_ok && null_pass >= 90 && p < 0.01 && row.diff_pp > 0.0,
        format!(
            "LSM(identical) = 1: {lsm_ok}; StyleNull p > 0.05 in {null_pass}/100; first-person shift {:+.2} pp, p = {p:.2e}",
            row.diff_pp
        ),
    )
}

fn main() {
    let checks: [(&str, fn() -> Check); 12] = [
        ("DTW oracle equivalence", dtw_oracle),
        ("exact-test equivalence", exact_tests),
        ("chi-squared hand check", chi_squared),
        ("Bonferroni constants", bonferroni),
        ("OLS oracle", ols),
        ("mirroring / independent fixtures", mirroring_and_independent),
        ("SpikeAmplify fixture", spike_amplify),
        ("calibration under the null", calibration),
        ("node2vec planted partition", node2vec_partition),
        ("DP-Means", dpmeans),
        ("end-to-end smoke", smoke),
        ("style", style),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let result = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
