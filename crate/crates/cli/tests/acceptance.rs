//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL (...)` line before asserting.

use std::process::Command;
use std::time::{Duration, Instant};

use curstat::bandwidth::{
    amse_optimal_c, amse_terms, bootstrap_bandwidth, log_grid, mc_bandwidth, mc_estimates,
    numeric_argmin, summarize, BandwidthPlan, BootstrapConfig, Smoother, TargetMethod,
};
use curstat::estimators::{fit_msle, naive_F, EstimateCurve, Method, SmoothedMle, Target, G_FLOOR};
use curstat::kernels::triweight;
use curstat::mle::{fit_mle, gcm_left_slopes, pava, CusumDiagram, ObservedSample};
use curstat::sim::{child_seed, sample_current_status, truth_gamma4_exp3, TruthSpec};
use curstat::smoothed::{fit_smoothed, GridSpec, Measure};

const SM_F: TargetMethod = TargetMethod::new(Target::F, Smoother::Smle);

fn report(n: u32, pass: bool, detail: String) {
    println!(
        "criterion {n}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn uniform(seed: u64, i: u64) -> f64 {
    (child_seed(seed, i) >> 11) as f64 / (1u64 << 53) as f64
}

/// Composite Simpson rule with `nodes` (odd) points, written out here so the
/// checks do not lean on the library's own quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> f64 {
    let m = nodes - 1;
    let step = (b - a) / m as f64;
    let inner: f64 = (1..m)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + step * i as f64))
        .sum();
    (f(a) + f(b) + inner) * step / 3.0
}

#[test]
fn criterion_1_closed_form_constants() {
    let start = Instant::now();
    let tr = truth_gamma4_exp3();
    let k = triweight();
    let c4 = amse_optimal_c(SM_F, &tr, 4.0, &k).unwrap();
    let c65 = amse_optimal_c(SM_F, &tr, 6.5, &k).unwrap();
    let h4 = BandwidthPlan::new(SM_F, c4, 10_000).unwrap().h();
    let h65 = BandwidthPlan::new(SM_F, c65, 10_000).unwrap().h();
    let elapsed = start.elapsed();
    let pass = (c4 - 6.467).abs() <= 0.005
        && (c65 - 10.426).abs() <= 0.005
        && (h4 - 1.025).abs() <= 0.002
        && (h65 - 1.652).abs() <= 0.002
        && elapsed < Duration::from_secs(1);
    report(
        1,
        pass,
        format!("c(4) = {c4:.4}, c(6.5) = {c65:.4}, h = {h4:.4}, {h65:.4}, {elapsed:?}"),
    );
}

#[test]
fn criterion_2_optimal_constants_match_numeric_argmin() {
    let start = Instant::now();
    let tr = truth_gamma4_exp3();
    let k = triweight();
    let mut worst = 0.0f64;
    let mut skipped = 0;
    let mut checked = 0;
    let mut i = 0;
    while checked < 20 {
        let t = 2.2 + 9.8 * uniform(31, i);
        i += 1;
        for tm in TargetMethod::ALL {
            match amse_terms(tm, &tr, t, &k) {
                Ok(terms) => {
                    let closed = terms.optimal_c();
                    let numeric = numeric_argmin(|c| terms.amse(c));
                    worst = worst.max(((closed - numeric) / closed).abs());
                }
                Err(_) => skipped += 1,
            }
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    let pass = worst < 1e-5 && skipped == 0 && elapsed < Duration::from_secs(10);
    report(2, pass, format!("worst relative gap {worst:.2e} over 20 points x 6 targets, {skipped} degenerate, {elapsed:?}"));
}

/// Maximizes the current status log likelihood over nondecreasing vectors on
/// the grid `{0, 1/400, …, 1}` by dynamic programming.
fn grid_mle(deltas: &[u8]) -> (Vec<f64>, f64) {
    let levels = 401;
    let ll = |d: u8, j: usize| {
        let f = j as f64 / 400.0;
        let v = if d == 1 { f.ln() } else { (1.0 - f).ln() };
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let n = deltas.len();
    let mut best = vec![vec![f64::NEG_INFINITY; levels]; n];
    let mut arg = vec![vec![0usize; levels]; n];
    for (j, b) in best[0].iter_mut().enumerate() {
        *b = ll(deltas[0], j);
    }
    for i in 1..n {
        let (mut run, mut run_arg) = (f64::NEG_INFINITY, 0);
        for j in 0..levels {
            if best[i - 1][j] > run {
                run = best[i - 1][j];
                run_arg = j;
            }
            best[i][j] = run + ll(deltas[i], j);
            arg[i][j] = run_arg;
        }
    }
    let (mut j, mut top) = (0, f64::NEG_INFINITY);
    for (l, &v) in best[n - 1].iter().enumerate() {
        if v > top {
            top = v;
            j = l;
        }
    }
    let mut path = vec![0.0; n];
    for i in (0..n).rev() {
        path[i] = j as f64 / 400.0;
        if i > 0 {
            j = arg[i][j];
        }
    }
    (path, top)
}

fn loglik(deltas: &[u8], f: &[f64]) -> f64 {
    deltas
        .iter()
        .zip(f)
        .map(|(&d, &v)| {
            let x = if d == 1 { v.ln() } else { (1.0 - v).ln() };
            if x.is_nan() {
                f64::NEG_INFINITY
            } else {
                x
            }
        })
        .sum()
}

#[test]
fn criterion_3_mle_oracles() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for n in 1..=6usize {
        for pattern in 0u32..(1 << n) {
            let deltas: Vec<u8> = (0..n).map(|i| ((pattern >> i) & 1) as u8).collect();
            let recs: Vec<(f64, u8)> = deltas
                .iter()
                .enumerate()
                .map(|(i, &d)| (1.0 + i as f64, d))
                .collect();
            let mle = fit_mle(&ObservedSample::new(&recs).unwrap());
            let fitted: Vec<f64> = recs.iter().map(|r| mle.eval(r.0)).collect();
            let (grid, grid_ll) = grid_mle(&deltas);
            let close = fitted
                .iter()
                .zip(&grid)
                .all(|(a, b)| (a - b).abs() <= 1.0 / 400.0 + 1e-12);
            if !close || loglik(&deltas, &fitted) < grid_ll - 1e-12 {
                failures.push(format!("{deltas:?}"));
            }
        }
    }
    let mut worst = 0.0f64;
    for case in 0..1000u64 {
        let len = 8;
        let values: Vec<f64> = (0..len).map(|i| uniform(case, i) * 4.0 - 2.0).collect();
        let weights: Vec<f64> = (0..len)
            .map(|i| 0.05 + uniform(case + 7919, i) * 3.0)
            .collect();
        let iso = pava(&values, &weights).unwrap();
        let slopes = gcm_left_slopes(&CusumDiagram::weighted(&values, &weights).unwrap());
        for (a, b) in iso.iter().zip(&slopes) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && worst <= 1e-12 && elapsed < Duration::from_secs(30);
    report(
        3,
        pass,
        format!(
            "{} grid mismatches, pava vs hull worst {worst:.1e}, {elapsed:?}",
            failures.len()
        ),
    );
}

#[test]
fn criterion_4_boundary_kernel() {
    let start = Instant::now();
    let k = triweight();
    let fam = k.boundary();
    let (mut mass, mut first) = (0.0f64, 0.0f64);
    for i in 0..=100 {
        let beta = i as f64 / 100.0;
        let m0 = simpson(|u| fam.eval(beta, u), -1.0, beta, 4001);
        let m1 = simpson(|u| u * fam.eval(beta, u), -1.0, beta, 4001);
        mass = mass.max((m0 - 1.0).abs());
        first = first.max(m1.abs());
    }
    let mut full = 0.0f64;
    for i in 0..=2000 {
        let u = -1.0 + i as f64 / 1000.0;
        full = full.max((fam.eval(1.0, u) - k.density(u)).abs());
    }
    let elapsed = start.elapsed();
    let pass = mass < 1e-8 && first < 1e-8 && full <= 1e-14 && elapsed < Duration::from_secs(5);
    report(
        4,
        pass,
        format!("mass {mass:.1e}, first moment {first:.1e}, k^1 - k {full:.1e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_5_msle_equals_naive_where_touching() {
    use rayon::prelude::*;
    let start = Instant::now();
    let tr = truth_gamma4_exp3();
    let k = triweight();
    let worst = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let s = sample_current_status(&tr, 500, child_seed(5, seed))
                .unwrap()
                .sample;
            let sm = fit_smoothed(&s, &k, 0.7, GridSpec::default()).unwrap();
            let fit = fit_msle(&sm).unwrap();
            let grid = sm.grid();
            let (g, g1) = (sm.values(Measure::G), sm.values(Measure::G1));
            let active = fit.active_segments();
            let naive: Vec<f64> = active.iter().map(|&i| g1[i] / g[i]).collect();
            let weights: Vec<f64> = active
                .iter()
                .map(|&i| g[i] * (grid[i + 1] - grid[i]))
                .collect();
            let iso = pava(&naive, &weights).unwrap();
            let mut touch_gap = 0.0f64;
            let mut pava_gap = 0.0f64;
            for (j, &i) in active.iter().enumerate() {
                let msle = fit.msle_F(grid[i]).unwrap();
                pava_gap = pava_gap.max((msle - iso[j]).abs());
                if fit.touch_mask()[i] && g[i] > G_FLOOR {
                    touch_gap = touch_gap.max((msle - naive_F(&sm, grid[i]).unwrap()).abs());
                }
            }
            (touch_gap, pava_gap)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let elapsed = start.elapsed();
    let pass = worst.0 < 1e-8 && worst.1 < 1e-8 && elapsed < Duration::from_secs(60);
    report(
        5,
        pass,
        format!(
            "touch gap {:.1e}, pava gap {:.1e}, {elapsed:?}",
            worst.0, worst.1
        ),
    );
}

#[test]
fn criterion_6_asymptotic_normality() {
    let start = Instant::now();
    let tr = truth_gamma4_exp3();
    let k = triweight();
    let c = 6.467;
    let n = 10_000;
    let vals: Vec<f64> = mc_estimates(&tr, n, 300, c, 4.0, SM_F, &k, 606)
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    let s = summarize(&vals, tr.event_cdf(4.0), n, 0.4);
    let terms = amse_terms(SM_F, &tr, 4.0, &k).unwrap();
    let (mu, sigma) = (terms.asymptotic_mean(c), terms.asymptotic_sd(c));
    let elapsed = start.elapsed();
    let pass = (s.normalized_mean - mu).abs() <= 0.3 * mu.abs()
        && (s.normalized_sd - sigma).abs() <= 0.2 * sigma
        && elapsed < Duration::from_secs(300);
    report(
        6,
        pass,
        format!(
            "mean {:.4} vs {mu:.4}, sd {:.4} vs {sigma:.4}, {elapsed:?}",
            s.normalized_mean, s.normalized_sd
        ),
    );
}

#[test]
fn criterion_7_bandwidth_selectors() {
    let start = Instant::now();
    let tr = truth_gamma4_exp3();
    let k = triweight();
    let mc = mc_bandwidth(
        &tr,
        2000,
        200,
        &log_grid(1.0, 100.0, 60),
        4.0,
        SM_F,
        &k,
        707,
    )
    .unwrap();
    let s = sample_current_status(&tr, 2000, 708).unwrap().sample;
    let cfg = BootstrapConfig::new(2000, 500, 100, 10.0, 4.0, 709);
    let boot = bootstrap_bandwidth(&s, &cfg, SM_F, &k).unwrap();
    let elapsed = start.elapsed();
    let pass = (4.0..=11.0).contains(&mc.c_hat)
        && (3.0..=16.0).contains(&boot.c_hat)
        && elapsed < Duration::from_secs(600);
    report(
        7,
        pass,
        format!(
            "Monte Carlo c = {:.3}, bootstrap c = {:.3}, {elapsed:?}",
            mc.c_hat, boot.c_hat
        ),
    );
}

/// Shape and conservation checks on one sample; returns a description of
/// the first violation.
fn shape_violations(sample: &ObservedSample, h: f64) -> Option<String> {
    let k = triweight();
    let smle = SmoothedMle::fit(sample, &k, h).unwrap();
    if let Some((lo, hi)) = smle.support() {
        let (lo, hi) = (lo.min(0.0), hi);
        let steps = ((hi - lo) / (h / 32.0)).ceil() as usize;
        let ts: Vec<f64> = (0..=steps)
            .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
            .collect();
        let fs: Vec<f64> = ts.iter().map(|&t| smle.smle_f(t).unwrap()).collect();
        if let Some(v) = fs.iter().find(|&&v| v < 0.0) {
            return Some(format!("negative SMLE density {v}"));
        }
        let integral: f64 = ts
            .windows(2)
            .zip(fs.windows(2))
            .map(|(t, f)| 0.5 * (f[0] + f[1]) * (t[1] - t[0]))
            .sum();
        if (integral - smle.total_mass()).abs() >= 1e-4 {
            return Some(format!(
                "SMLE density integrates to {integral}, mass {}",
                smle.total_mass()
            ));
        }
    }
    let end = sample.max_time() + h;
    let ts: Vec<f64> = (0..=800).map(|i| end * i as f64 / 800.0).collect();
    for m in [Method::Mle, Method::Naive, Method::Msle, Method::Smle] {
        let curve =
            EstimateCurve::fit(m, Target::F, sample, &k, Some(h), GridSpec::default()).unwrap();
        let vals: Vec<f64> = ts.iter().filter_map(|&t| curve.eval(t).ok()).collect();
        if let Some(v) = vals.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Some(format!("{} F value {v} outside [0, 1]", m.name()));
        }
        if matches!(m, Method::Mle | Method::Msle) && vals.windows(2).any(|w| w[1] < w[0]) {
            return Some(format!("{} F decreases", m.name()));
        }
    }
    None
}

#[test]
fn criterion_8_conservation_and_shape() {
    let tr = truth_gamma4_exp3();
    let mut samples: Vec<(ObservedSample, f64)> = vec![
        (
            ObservedSample::new(&[(1.0, 1u8), (2.0, 0), (3.0, 1)]).unwrap(),
            0.5,
        ),
        (
            ObservedSample::new(&[(0.1, 1u8), (0.2, 1), (0.4, 0), (5.0, 1)]).unwrap(),
            0.3,
        ),
    ];
    for (i, (n, h)) in [(200, 0.7), (500, 0.7), (2000, 1.0), (10_000, 1.025)]
        .iter()
        .enumerate()
    {
        for rep in 0..5 {
            let s = sample_current_status(&tr, *n, child_seed(800 + i as u64, rep))
                .unwrap()
                .sample;
            samples.push((s, *h));
        }
    }
    let bad: Vec<String> = samples
        .iter()
        .filter_map(|(s, h)| shape_violations(s, *h))
        .collect();
    report(
        8,
        bad.is_empty(),
        format!("{} samples, violations: {bad:?}", samples.len()),
    );
}

fn run_twice(args: &[&str], threads: Option<&str>) -> (Vec<u8>, Vec<u8>) {
    let once = || {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_curstat"));
        cmd.args(args);
        match threads {
            Some(t) => cmd.env("CURSTAT_THREADS", t),
            None => cmd.env_remove("CURSTAT_THREADS"),
        };
        let out = cmd.output().unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    (once(), once())
}

#[test]
fn criterion_9_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let gen = sample_current_status(&truth_gamma4_exp3(), 2000, 909).unwrap();
    let input = dir.path().join("d.csv");
    let mut text = String::from("t,delta\n");
    for (t, d) in &gen.records {
        text.push_str(&format!("{t},{d}\n"));
    }
    std::fs::write(&input, text).unwrap();
    let input = input.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "simulate", "--n", "2000", "--B", "50", "--t", "4", "--seed", "9",
        ],
        vec![
            "simulate", "--n", "1000", "--B", "20", "--t", "4", "--method", "msle", "--target",
            "f", "--seed", "9",
        ],
        vec![
            "bandwidth",
            "--input",
            input,
            "--t",
            "4",
            "--m",
            "500",
            "--B",
            "50",
            "--seed",
            "9",
        ],
        vec![
            "estimate",
            "--input",
            input,
            "--method",
            "smle,msle",
            "--target",
            "F,f",
            "--select-bootstrap",
            "--t",
            "4",
            "--B",
            "20",
            "--seed",
            "9",
        ],
        vec![
            "reproduce-table1",
            "--n",
            "1000",
            "--m",
            "250",
            "--B",
            "20",
            "--c0",
            "5,10",
            "--seed",
            "9",
        ],
    ];
    let mut mismatches = Vec::new();
    for args in &commands {
        let (a, b) = run_twice(args, None);
        let (c, d) = run_twice(args, Some("1"));
        let (e, _) = run_twice(args, Some("4"));
        if !(a == b && b == c && c == d && d == e) {
            mismatches.push(args[0]);
        }
    }
    report(
        9,
        mismatches.is_empty(),
        format!("{} commands, mismatches: {mismatches:?}", commands.len()),
    );
}
