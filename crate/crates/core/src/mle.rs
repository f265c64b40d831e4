//! The nonparametric maximum likelihood estimator for current status data.
//!
//! With observation times sorted, `T₍₁₎ < … < T₍ₘ₎`, the cumulative sum
//! diagram has points `P₀ = (0, 0)` and
//! `Pᵢ = (𝔾ₙ(T₍ᵢ₎), 𝔾ₙ,₁(T₍ᵢ₎))`, the empirical distribution of the times
//! against the empirical subdistribution of times with `Δ = 1`. The MLE at
//! `T₍ᵢ₎` is the left slope at `Pᵢ` of the greatest convex minorant of the
//! diagram, extended to a right-continuous step function.
//!
//! Tied times are collapsed into one diagram point whose increments are the
//! group counts; slopes are compared with exact integer arithmetic.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::lower_hull;

/// All observations sharing one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TieGroup {
    pub time: f64,
    /// Number of observations at `time`.
    pub total: u64,
    /// Number of those with `Δ = 1`.
    pub events: u64,
}

/// Current status observations `(Tᵢ, Δᵢ)`, sorted by time with ties
/// collapsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedSample {
    groups: Vec<TieGroup>,
    n: u64,
}

impl ObservedSample {
    /// Validates, sorts and tie-collapses raw `(t, δ)` pairs.
    pub fn new<D>(records: &[(f64, D)]) -> Result<ObservedSample>
    where
        D: Copy + Into<i64>,
    {
        if records.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut pairs = Vec::with_capacity(records.len());
        for (index, &(time, delta)) in records.iter().enumerate() {
            if !time.is_finite() {
                return Err(Error::NonFiniteTime { index });
            }
            if time < 0.0 {
                return Err(Error::NegativeTime { index, time });
            }
            let value: i64 = delta.into();
            if value != 0 && value != 1 {
                return Err(Error::BadIndicator { index, value });
            }
            pairs.push((time, value as u64));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut groups: Vec<TieGroup> = Vec::new();
        for (time, delta) in pairs {
            match groups.last_mut() {
                Some(g) if g.time == time => {
                    g.total += 1;
                    g.events += delta;
                }
                _ => groups.push(TieGroup {
                    time,
                    total: 1,
                    events: delta,
                }),
            }
        }
        Ok(ObservedSample {
            groups,
            n: records.len() as u64,
        })
    }

    pub fn groups(&self) -> &[TieGroup] {
        &self.groups
    }

    /// Total number of observations.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn event_count(&self) -> u64 {
        self.groups.iter().map(|g| g.events).sum()
    }

    pub fn min_time(&self) -> f64 {
        self.groups[0].time
    }

    pub fn max_time(&self) -> f64 {
        self.groups[self.groups.len() - 1].time
    }

    pub fn cusum(&self) -> CusumDiagram {
        cusum(self)
    }
}

/// Cumulative sum diagram, starting at `P₀ = (0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CusumDiagram {
    points: Vec<(f64, f64)>,
    // Integer cumulative counts, present for diagrams built from a sample.
    counts: Option<Vec<(u64, u64)>>,
}

/// Builds the diagram `Pᵢ = (i/n, (1/n) Σ_{j≤i} Δ₍ⱼ₎)` with one point per
/// tie group.
pub fn cusum(sample: &ObservedSample) -> CusumDiagram {
    let n = sample.n as f64;
    let mut counts = Vec::with_capacity(sample.groups.len() + 1);
    counts.push((0u64, 0u64));
    let (mut x, mut y) = (0u64, 0u64);
    for g in &sample.groups {
        x += g.total;
        y += g.events;
        counts.push((x, y));
    }
    let points = counts
        .iter()
        .map(|&(x, y)| (x as f64 / n, y as f64 / n))
        .collect();
    CusumDiagram {
        points,
        counts: Some(counts),
    }
}

impl CusumDiagram {
    /// The diagram of a weighted isotonic regression problem:
    /// `Pᵢ = (Σ_{j≤i} wⱼ, Σ_{j≤i} wⱼvⱼ)`.
    pub fn weighted(values: &[f64], weights: &[f64]) -> Result<CusumDiagram> {
        check_weights(values, weights)?;
        let mut points = Vec::with_capacity(values.len() + 1);
        points.push((0.0, 0.0));
        let (mut x, mut y) = (0.0, 0.0);
        for (v, w) in values.iter().zip(weights) {
            x += w;
            y += w * v;
            points.push((x, y));
        }
        Ok(CusumDiagram {
            points,
            counts: None,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn hull(&self) -> Vec<usize> {
        match &self.counts {
            Some(c) => lower_hull(c.len(), false, |a, b, d| {
                let (xa, ya) = (c[a].0 as i128, c[a].1 as i128);
                let (xb, yb) = (c[b].0 as i128 - xa, c[b].1 as i128 - ya);
                let (xd, yd) = (c[d].0 as i128 - xa, c[d].1 as i128 - ya);
                (xb * yd - yb * xd).cmp(&0)
            }),
            None => {
                let p = &self.points;
                lower_hull(p.len(), false, |a, b, d| {
                    let cross = (p[b].0 - p[a].0) * (p[d].1 - p[a].1)
                        - (p[b].1 - p[a].1) * (p[d].0 - p[a].0);
                    cross.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
                })
            }
        }
    }

    fn edge_slope(&self, a: usize, b: usize) -> f64 {
        match &self.counts {
            Some(c) => (c[b].1 - c[a].1) as f64 / (c[b].0 - c[a].0) as f64,
            None => (self.points[b].1 - self.points[a].1) / (self.points[b].0 - self.points[a].0),
        }
    }

    /// Left derivative of the greatest convex minorant at each point
    /// `P₁, …, Pₘ`.
    pub fn gcm_left_slopes(&self) -> Vec<f64> {
        let hull = self.hull();
        let mut slopes = Vec::with_capacity(self.points.len().saturating_sub(1));
        for edge in hull.windows(2) {
            let s = self.edge_slope(edge[0], edge[1]);
            slopes.extend(std::iter::repeat_n(s, edge[1] - edge[0]));
        }
        slopes
    }
}

/// Left slopes of the greatest convex minorant of `diagram`.
pub fn gcm_left_slopes(diagram: &CusumDiagram) -> Vec<f64> {
    diagram.gcm_left_slopes()
}

/// A right-continuous nondecreasing step function with values in `[0, 1]`,
/// zero before its first jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    jump_times: Vec<f64>,
    values: Vec<f64>,
}

impl StepDistribution {
    /// Builds a step function from jump locations and the values taken from
    /// each jump onwards. Both must be strictly increasing.
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>) -> Result<StepDistribution> {
        if jump_times.len() != values.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                weights: jump_times.len(),
            });
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&jump_times) || !increasing(&values) {
            return Err(Error::InvalidConfig(
                "jump times and values must increase".into(),
            ));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v))
            || values.first().is_some_and(|&v| v <= 0.0)
        {
            return Err(Error::InvalidConfig(
                "step values must lie in (0, 1]".into(),
            ));
        }
        Ok(StepDistribution { jump_times, values })
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Jump sizes `pⱼ = Fⱼ − Fⱼ₋₁`.
    pub fn masses(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.values
            .iter()
            .map(|&v| {
                let p = v - prev;
                prev = v;
                p
            })
            .collect()
    }

    /// Value at the last jump, or 0 with no jumps.
    pub fn total_mass(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.jump_times.partition_point(|&tau| tau <= t);
        if idx == 0 {
            0.0
        } else {
            self.values[idx - 1]
        }
    }
}

/// The nonparametric MLE of the event-time distribution.
pub fn fit_mle(sample: &ObservedSample) -> StepDistribution {
    let slopes = cusum(sample).gcm_left_slopes();
    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut current = 0.0;
    for (g, &s) in sample.groups.iter().zip(&slopes) {
        if s > current {
            jump_times.push(g.time);
            values.push(s);
            current = s;
        }
    }
    StepDistribution { jump_times, values }
}

/// Normalized log likelihood `(1/n) Σ {δ log F(t) + (1 − δ) log(1 − F(t))}`
/// for per-group values `F(T₍ᵢ₎)`. Terms with a zero coefficient contribute
/// nothing, so boundary values are allowed where the data permit them.
pub fn log_likelihood(sample: &ObservedSample, group_values: &[f64]) -> f64 {
    let xlogy = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * y.ln() };
    sample
        .groups
        .iter()
        .zip(group_values)
        .map(|(g, &f)| xlogy(g.events as f64, f) + xlogy((g.total - g.events) as f64, 1.0 - f))
        .sum::<f64>()
        / sample.n as f64
}

fn check_weights(values: &[f64], weights: &[f64]) -> Result<()> {
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch {
            values: values.len(),
            weights: weights.len(),
        });
    }
    if let Some((index, &weight)) = weights.iter().enumerate().find(|(_, &w)| !(w > 0.0)) {
        return Err(Error::NonpositiveWeight { index, weight });
    }
    Ok(())
}

/// Weighted least-squares nondecreasing fit by pooling adjacent violators.
pub fn pava(values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    check_weights(values, weights)?;
    // (weighted mean, total weight, number of entries)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let mut block = (v, w, 1usize);
        while let Some(&(mean, weight, len)) = blocks.last() {
            if mean <= block.0 {
                break;
            }
            blocks.pop();
            let total = weight + block.1;
            block = (
                (mean * weight + block.0 * block.1) / total,
                total,
                len + block.2,
            );
        }
        blocks.push(block);
    }
    Ok(blocks
        .into_iter()
        .flat_map(|(mean, _, len)| std::iter::repeat_n(mean, len))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Maximizes the log likelihood over nondecreasing vectors on the grid
    /// `{0, 1/400, …, 1}` by dynamic programming over the monotone chain.
    fn grid_mle(deltas: &[u8]) -> Vec<f64> {
        const STEPS: usize = 400;
        let term = |d: u8, k: usize| {
            let v = k as f64 / STEPS as f64;
            let p = if d == 1 { v } else { 1.0 - v };
            if p == 0.0 {
                f64::NEG_INFINITY
            } else {
                p.ln()
            }
        };
        let mut best = vec![vec![0.0; STEPS + 1]; deltas.len()];
        let mut arg = vec![vec![0usize; STEPS + 1]; deltas.len()];
        for (i, &d) in deltas.iter().enumerate() {
            let (mut run_max, mut run_arg) = (f64::NEG_INFINITY, 0);
            for k in 0..=STEPS {
                let prev = if i == 0 {
                    (0.0, 0)
                } else {
                    if best[i - 1][k] > run_max {
                        run_max = best[i - 1][k];
                        run_arg = k;
                    }
                    (run_max, run_arg)
                };
                best[i][k] = prev.0 + term(d, k);
                arg[i][k] = prev.1;
            }
        }
        let last = deltas.len() - 1;
        let mut k = (0..=STEPS)
            .max_by(|&a, &b| best[last][a].partial_cmp(&best[last][b]).unwrap())
            .unwrap();
        let mut out = vec![0.0; deltas.len()];
        for i in (0..deltas.len()).rev() {
            out[i] = k as f64 / STEPS as f64;
            k = arg[i][k];
        }
        out
    }

    fn sample_of(times: &[f64], deltas: &[u8]) -> ObservedSample {
        let recs: Vec<(f64, u8)> = times.iter().copied().zip(deltas.iter().copied()).collect();
        ObservedSample::new(&recs).unwrap()
    }

    #[test]
    fn build_sample_examples() {
        let s = ObservedSample::new(&[(2.0, 1u8)]).unwrap();
        assert_eq!(
            s.groups(),
            &[TieGroup {
                time: 2.0,
                total: 1,
                events: 1
            }]
        );
        let s = ObservedSample::new(&[(3.0, 0u8), (1.0, 1), (3.0, 1)]).unwrap();
        assert_eq!(s.groups().len(), 2);
        assert_eq!(
            (
                s.groups()[0].time,
                s.groups()[0].total,
                s.groups()[0].events
            ),
            (1.0, 1, 1)
        );
        assert_eq!(
            (
                s.groups()[1].time,
                s.groups()[1].total,
                s.groups()[1].events
            ),
            (3.0, 2, 1)
        );
        assert_eq!(s.n(), 3);
    }

    #[test]
    fn build_sample_errors() {
        assert!(matches!(
            ObservedSample::new(&[(1.0, 2u8)]),
            Err(Error::BadIndicator { index: 0, value: 2 })
        ));
        assert!(matches!(
            ObservedSample::new(&[(1.0, 1u8), (-0.5, 0)]),
            Err(Error::NegativeTime { index: 1, .. })
        ));
        assert!(matches!(
            ObservedSample::new::<u8>(&[]),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            ObservedSample::new(&[(f64::NAN, 1u8)]),
            Err(Error::NonFiniteTime { index: 0 })
        ));
    }

    #[test]
    fn cusum_examples() {
        let s = sample_of(&[1.0, 2.0, 3.0], &[1, 0, 1]);
        let third = 1.0 / 3.0;
        assert_eq!(
            s.cusum().points(),
            &[
                (0.0, 0.0),
                (third, third),
                (2.0 * third, third),
                (1.0, 2.0 * third)
            ]
        );
        let ones = sample_of(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1]);
        for &(x, y) in ones.cusum().points() {
            assert_eq!(x, y);
        }
        let zeros = sample_of(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 0, 0]);
        assert!(zeros.cusum().points().iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn slopes_examples() {
        let ones = sample_of(&[1.0, 2.0, 3.0], &[1, 1, 1]);
        assert_eq!(ones.cusum().gcm_left_slopes(), vec![1.0; 3]);
        let zeros = sample_of(&[1.0, 2.0, 3.0], &[0, 0, 0]);
        assert_eq!(zeros.cusum().gcm_left_slopes(), vec![0.0; 3]);
        let s = sample_of(&[1.0, 2.0, 3.0], &[1, 0, 1]);
        assert_eq!(s.cusum().gcm_left_slopes(), vec![0.5, 0.5, 1.0]);
        // Oracle agrees.
        assert_eq!(grid_mle(&[1, 0, 1]), vec![0.5, 0.5, 1.0]);
    }

    #[test]
    fn fit_examples() {
        let ones = fit_mle(&sample_of(&[1.0, 2.0, 3.0], &[1, 1, 1]));
        assert_eq!(ones.jump_times(), &[1.0]);
        assert_eq!(ones.values(), &[1.0]);
        let zeros = fit_mle(&sample_of(&[1.0, 2.0, 3.0], &[0, 0, 0]));
        assert!(zeros.jump_times().is_empty());
        assert_eq!(zeros.eval(10.0), 0.0);
        let f = fit_mle(&sample_of(&[1.0, 2.0, 3.0], &[1, 0, 1]));
        assert_eq!(f.jump_times(), &[1.0, 3.0]);
        assert_eq!(f.values(), &[0.5, 1.0]);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.eval(2.9), 0.5);
        assert_eq!(f.eval(3.0), 1.0);
        assert_eq!(f.masses(), vec![0.5, 0.5]);
    }

    #[test]
    fn mle_matches_grid_maximization() {
        for n in 1..=6usize {
            let times: Vec<f64> = (1..=n).map(|i| i as f64).collect();
            for pattern in 0..(1u32 << n) {
                let deltas: Vec<u8> = (0..n).map(|i| ((pattern >> i) & 1) as u8).collect();
                let sample = sample_of(&times, &deltas);
                let fit = fit_mle(&sample);
                let mle: Vec<f64> = times.iter().map(|&t| fit.eval(t)).collect();
                let grid = grid_mle(&deltas);
                for (a, b) in mle.iter().zip(&grid) {
                    assert!(
                        (a - b).abs() <= 1.0 / 400.0 + 1e-12,
                        "{deltas:?}: {mle:?} vs {grid:?}"
                    );
                }
                assert!(log_likelihood(&sample, &mle) >= log_likelihood(&sample, &grid) - 1e-12);
            }
        }
    }

    #[test]
    fn pava_examples() {
        assert_eq!(
            pava(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(pava(&[2.0, 1.0], &[1.0, 1.0]).unwrap(), vec![1.5, 1.5]);
        assert!(matches!(
            pava(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            pava(&[1.0, 2.0], &[1.0, 0.0]),
            Err(Error::NonpositiveWeight { index: 1, .. })
        ));
    }

    #[test]
    fn pava_equals_gcm_slopes_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let values: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let weights: Vec<f64> = (0..8).map(|_| rng.gen_range(0.05..3.0)).collect();
            let iso = pava(&values, &weights).unwrap();
            let slopes = CusumDiagram::weighted(&values, &weights)
                .unwrap()
                .gcm_left_slopes();
            for (a, b) in iso.iter().zip(&slopes) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ties_are_weighted() {
        // Two observations at t = 1 (one event) then one at t = 2 (no event):
        // pooled value 1/3 over both groups.
        let s = ObservedSample::new(&[(1.0, 1u8), (1.0, 0), (2.0, 0)]).unwrap();
        let f = fit_mle(&s);
        assert_eq!(f.values(), &[1.0 / 3.0]);
        assert_eq!(f.jump_times(), &[1.0]);
    }

    fn arb_sample() -> impl Strategy<Value = Vec<(f64, u8)>> {
        prop::collection::vec(((0u32..40).prop_map(|k| k as f64 * 0.25), 0u8..2), 1..60)
    }

    proptest! {
        #[test]
        fn fit_is_monotone_in_unit_interval(recs in arb_sample()) {
            let s = ObservedSample::new(&recs).unwrap();
            let f = fit_mle(&s);
            let mut prev = 0.0;
            for g in s.groups() {
                let v = f.eval(g.time);
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert!(v >= prev);
                prev = v;
            }
        }

        #[test]
        fn residuals_vanish_on_constancy_intervals(recs in arb_sample()) {
            let s = ObservedSample::new(&recs).unwrap();
            let f = fit_mle(&s);
            let mut edges = vec![f64::NEG_INFINITY];
            edges.extend_from_slice(f.jump_times());
            edges.push(f64::INFINITY);
            for w in edges.windows(2) {
                let r: f64 = s
                    .groups()
                    .iter()
                    .filter(|g| g.time >= w[0] && g.time < w[1])
                    .map(|g| g.events as f64 - g.total as f64 * f.eval(g.time))
                    .sum();
                prop_assert!(r.abs() < 1e-12 * s.n() as f64, "residual {}", r);
            }
        }

        #[test]
        fn pava_is_idempotent(v in prop::collection::vec(-5.0f64..5.0, 1..30), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w: Vec<f64> = v.iter().map(|_| rng.gen_range(0.1..2.0)).collect();
            let once = pava(&v, &w).unwrap();
            let twice = pava(&once, &w).unwrap();
            prop_assert_eq!(once.clone(), twice);
            prop_assert!(once.windows(2).all(|p| p[0] <= p[1]));
        }
    }
}
