//! Bandwidth selection.
//!
//! Pointwise bandwidths take the form `h = c·n^{-α}` with `α = 1/5` for the
//! distribution function and `α = 1/7` for the density and hazard. For each
//! (target, smoother) pair the asymptotic mean squared error of the estimate
//! at `t` is
//!
//! ```text
//! aMSE(c) = ¼ c⁴ m₂(k)² B(t)² + c^{-p} V(t)
//! ```
//!
//! with `p = 1` for `F` and `p = 3` otherwise, minimized at
//! `c* = (p V / (m₂² B²))^{1/(4+p)}`. The bias factors `B` are
//!
//! | target | MSLE | SMLE |
//! |---|---|---|
//! | `F` | `f₀′ + 2f₀g′/g` | `f₀′` |
//! | `f` | `q = f₀″ + 2(g″f₀ + g′f₀′)/g − 2g′²f₀/g²` | `f₀″` |
//! | `λ` | `q/(1−F₀) + f₀(f₀′ + 2g′f₀/g)/(1−F₀)²` | `(f₀″ + f₀f₀′/(1−F₀))/(1−F₀)` |
//!
//! and the variance factors are `F₀(1−F₀)/g·∫k²` for `F`,
//! `F₀(1−F₀)/g·∫k′²` for `f` and `F₀/(g(1−F₀))·∫k′²` for `λ`.
//!
//! In practice `F₀` and `g` are unknown; [`bootstrap_bandwidth`] estimates the
//! MSE curve by resampling from smoothed pilot estimates, and
//! [`mc_bandwidth`] computes it by simulation from a known truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit_msle, SmoothedMle, Target};
use crate::kernels::Kernel;
use crate::mle::{fit_mle, ObservedSample, StepDistribution};
use crate::sim::{child_seed, sample_current_status, TruthSpec};
use crate::smoothed::{fit_smoothed, GridSpec, Measure};

/// Bias factors below this are treated as zero.
pub const DEGENERATE_BIAS: f64 = 1e-12;

/// The smoother whose bandwidth is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Smoother {
    #[serde(rename = "MS")]
    Msle,
    #[serde(rename = "SM")]
    Smle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetMethod {
    pub target: Target,
    pub method: Smoother,
}

impl TargetMethod {
    pub const fn new(target: Target, method: Smoother) -> TargetMethod {
        TargetMethod { target, method }
    }

    pub const ALL: [TargetMethod; 6] = [
        TargetMethod::new(Target::F, Smoother::Msle),
        TargetMethod::new(Target::Density, Smoother::Msle),
        TargetMethod::new(Target::Hazard, Smoother::Msle),
        TargetMethod::new(Target::F, Smoother::Smle),
        TargetMethod::new(Target::Density, Smoother::Smle),
        TargetMethod::new(Target::Hazard, Smoother::Smle),
    ];

    /// Rate exponent `α` in `h = c·n^{-α}`.
    pub fn alpha(self) -> f64 {
        match self.target {
            Target::F => 0.2,
            _ => 1.0 / 7.0,
        }
    }

    /// Exponent `p` of the variance term `c^{-p}V`.
    pub fn variance_power(self) -> i32 {
        match self.target {
            Target::F => 1,
            _ => 3,
        }
    }

    /// Exponent `r` of the normalization `n^r(estimate − truth)`.
    pub fn rate(self) -> f64 {
        match self.target {
            Target::F => 0.4,
            _ => 2.0 / 7.0,
        }
    }

    pub fn label(self) -> String {
        let m = match self.method {
            Smoother::Msle => "MS",
            Smoother::Smle => "SM",
        };
        format!("{m}-{}", self.target.name())
    }
}

/// `h = c·n^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthPlan {
    pub target_method: TargetMethod,
    pub alpha: f64,
    pub c: f64,
    pub n: u64,
}

impl BandwidthPlan {
    pub fn new(target_method: TargetMethod, c: f64, n: u64) -> Result<BandwidthPlan> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonpositiveBandwidth(c));
        }
        if n == 0 {
            return Err(Error::EmptySample);
        }
        Ok(BandwidthPlan {
            target_method,
            alpha: target_method.alpha(),
            c,
            n,
        })
    }

    pub fn h(&self) -> f64 {
        self.c * (self.n as f64).powf(-self.alpha)
    }
}

/// Bias and variance factors of the aMSE at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmseTerms {
    pub bias: f64,
    pub variance: f64,
    pub m2: f64,
    pub power: i32,
}

impl AmseTerms {
    pub fn amse(&self, c: f64) -> f64 {
        0.25 * c.powi(4) * self.m2 * self.m2 * self.bias * self.bias
            + c.powi(-self.power) * self.variance
    }

    pub fn optimal_c(&self) -> f64 {
        let p = self.power as f64;
        (p * self.variance / (self.m2 * self.m2 * self.bias * self.bias)).powf(1.0 / (4.0 + p))
    }

    /// Asymptotic mean `½c²m₂B` of the normalized estimation error.
    pub fn asymptotic_mean(&self, c: f64) -> f64 {
        0.5 * c * c * self.m2 * self.bias
    }

    /// Asymptotic standard deviation `√(c^{-p}V)` of the normalized error.
    pub fn asymptotic_sd(&self, c: f64) -> f64 {
        (c.powi(-self.power) * self.variance).sqrt()
    }
}

pub fn amse_terms(
    tm: TargetMethod,
    truth: &dyn TruthSpec,
    t: f64,
    kernel: &Kernel,
) -> Result<AmseTerms> {
    let g = truth.censor_density(t);
    if !(g > 0.0) {
        return Err(Error::ZeroCensoringDensity(t));
    }
    let (dg, d2g) = (truth.censor_density_d1(t), truth.censor_density_d2(t));
    let big_f = truth.event_cdf(t);
    let (f, df, d2f) = (
        truth.event_density(t),
        truth.event_density_d1(t),
        truth.event_density_d2(t),
    );
    let surv = 1.0 - big_f;
    if tm.target == Target::Hazard && !(surv > 0.0) {
        return Err(Error::HazardDenominatorViolation {
            t,
            value: big_f,
            ceiling: 0.0,
        });
    }
    let q = d2f + 2.0 * (d2g * f + dg * df) / g - 2.0 * dg * dg * f / (g * g);
    let bias = match (tm.method, tm.target) {
        (Smoother::Msle, Target::F) => df + 2.0 * f * dg / g,
        (Smoother::Msle, Target::Density) => q,
        (Smoother::Msle, Target::Hazard) => q / surv + f / (surv * surv) * (df + 2.0 * dg * f / g),
        (Smoother::Smle, Target::F) => df,
        (Smoother::Smle, Target::Density) => d2f,
        (Smoother::Smle, Target::Hazard) => (d2f + f * df / surv) / surv,
    };
    if !(bias.abs() >= DEGENERATE_BIAS) {
        return Err(Error::DegenerateBias(t));
    }
    let variance = match tm.target {
        Target::F => big_f * surv / g * kernel.l2_k(),
        Target::Density => big_f * surv / g * kernel.l2_kprime(),
        Target::Hazard => big_f / (g * surv) * kernel.l2_kprime(),
    };
    if !(variance > 0.0) {
        return Err(Error::DegenerateVariance(t));
    }
    Ok(AmseTerms {
        bias,
        variance,
        m2: kernel.m2(),
        power: tm.variance_power(),
    })
}

/// Asymptotic mean squared error of the `tm` estimate at `t` for `h = c·n^{-α}`,
/// normalized by the convergence rate.
pub fn amse(
    tm: TargetMethod,
    truth: &dyn TruthSpec,
    t: f64,
    kernel: &Kernel,
    c: f64,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::NonpositiveBandwidth(c));
    }
    Ok(amse_terms(tm, truth, t, kernel)?.amse(c))
}

/// Closed-form minimizer of [`amse`] in `c`.
pub fn amse_optimal_c(
    tm: TargetMethod,
    truth: &dyn TruthSpec,
    t: f64,
    kernel: &Kernel,
) -> Result<f64> {
    Ok(amse_terms(tm, truth, t, kernel)?.optimal_c())
}

/// Minimizes `f` over `c > 0` by a log-spaced scan of `[1e-6, 1e6]`
/// followed by golden-section search in `log c`.
pub fn numeric_argmin<F: Fn(f64) -> f64>(f: F) -> f64 {
    let phi = |s: f64| f(s.exp());
    let (lo, hi, steps) = ((1e-6f64).ln(), (1e6f64).ln(), 480);
    let step = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + step * i as f64)
        .map(|s| (s, phi(s)))
        .fold(
            (lo, f64::INFINITY),
            |acc, (s, v)| if v < acc.1 { (s, v) } else { acc },
        );
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = phi(x2);
        }
    }
    (0.5 * (a + b)).exp()
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
                .collect()
        }
    }
}

/// Evaluates the `tm` estimate at `t` for each bandwidth in `hs`.
///
/// The SMLE reuses one MLE fit across bandwidths.
pub fn estimates_at(
    sample: &ObservedSample,
    tm: TargetMethod,
    kernel: &Kernel,
    hs: &[f64],
    t: f64,
) -> Vec<Result<f64>> {
    match tm.method {
        Smoother::Smle => {
            let mle = fit_mle(sample);
            hs.iter()
                .map(|&h| smle_value(&mle, kernel, h, tm.target, t))
                .collect()
        }
        Smoother::Msle => hs
            .iter()
            .map(|&h| {
                let sm = fit_smoothed(sample, kernel, h, GridSpec::default())?;
                let fit = fit_msle(&sm)?;
                match tm.target {
                    Target::F => fit.msle_F(t),
                    Target::Density => fit.msle_f(t),
                    Target::Hazard => fit.msle_lambda(t),
                }
            })
            .collect(),
    }
}

fn smle_value(
    mle: &StepDistribution,
    kernel: &Kernel,
    h: f64,
    target: Target,
    t: f64,
) -> Result<f64> {
    let s = SmoothedMle::new(mle.clone(), kernel, h)?;
    match target {
        Target::F => s.smle_F(t),
        Target::Density => s.smle_f(t),
        Target::Hazard => s.smle_lambda(t),
    }
}

/// Per-candidate squared deviations of one replicate; `None` where the
/// estimate was undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateErrors {
    pub index: usize,
    pub squared: Vec<Option<f64>>,
}

/// Averages replicate rows in index order, so the result does not depend on
/// the order in which replicates were produced.
pub fn aggregate_replicates(rows: &[ReplicateErrors], candidates: usize) -> Vec<Option<f64>> {
    let mut order: Vec<&ReplicateErrors> = rows.iter().collect();
    order.sort_by_key(|r| r.index);
    (0..candidates)
        .map(|j| {
            let (mut sum, mut count) = (0.0, 0usize);
            for r in &order {
                if let Some(v) = r.squared[j] {
                    sum += v;
                    count += 1;
                }
            }
            (count > 0).then(|| sum / count as f64)
        })
        .collect()
}

/// Grid minimizer of `curve`, refined by a parabola through the minimum and
/// its two neighbours in `log c` when the minimum is interior.
/// Index of the smallest defined value; the first one on ties.
pub fn grid_argmin(curve: &[Option<f64>]) -> Option<usize> {
    curve
        .iter()
        .enumerate()
        .filter_map(|(j, v)| v.map(|v| (j, v)))
        .fold(None, |acc: Option<(usize, f64)>, (j, v)| match acc {
            Some((_, best)) if best <= v => acc,
            _ => Some((j, v)),
        })
        .map(|(j, _)| j)
}

pub fn refine_minimizer(c_grid: &[f64], curve: &[Option<f64>]) -> Option<f64> {
    let j = grid_argmin(curve)?;
    if j == 0 || j + 1 == c_grid.len() {
        return Some(c_grid[j]);
    }
    let (Some(y0), Some(y1), Some(y2)) = (curve[j - 1], curve[j], curve[j + 1]) else {
        return Some(c_grid[j]);
    };
    let (s0, s1, s2) = (c_grid[j - 1].ln(), c_grid[j].ln(), c_grid[j + 1].ln());
    let num = (s1 - s0).powi(2) * (y1 - y2) - (s1 - s2).powi(2) * (y1 - y0);
    let den = (s1 - s0) * (y1 - y2) - (s1 - s2) * (y1 - y0);
    if !(den.abs() > 0.0) {
        return Some(c_grid[j]);
    }
    let s = (s1 - 0.5 * num / den).clamp(s0, s2);
    Some(s.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Size of the original sample.
    pub n: u64,
    /// Size of each bootstrap sample, at most `n`.
    pub m: u64,
    /// Number of bootstrap replicates.
    pub b: usize,
    /// Pilot constant; the pilot bandwidth is `c0·n^{-1/5}`.
    pub c0: f64,
    pub c_grid: Vec<f64>,
    pub t: f64,
    pub seed: u64,
    /// Parabolic refinement of the grid minimizer.
    pub refine: bool,
}

impl BootstrapConfig {
    /// 60 log-spaced candidates over `[c0/10, 10·c0]`.
    pub fn new(n: u64, m: u64, b: usize, c0: f64, t: f64, seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            n,
            m,
            b,
            c0,
            c_grid: log_grid(c0 / 10.0, 10.0 * c0, 60),
            t,
            seed,
            refine: true,
        }
    }

    pub fn h0(&self) -> f64 {
        self.c0 * (self.n as f64).powf(-0.2)
    }

    fn validate(&self) -> Result<()> {
        if self.c_grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if let Some(&c) = self.c_grid.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidConfig(format!(
                "candidate constant {c} is not positive"
            )));
        }
        if self.m == 0 || self.m > self.n {
            return Err(Error::InvalidConfig(format!(
                "bootstrap size m = {} must lie in 1..={}",
                self.m, self.n
            )));
        }
        if self.b == 0 {
            return Err(Error::InvalidConfig(
                "at least one replicate is required".into(),
            ));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::NonpositiveBandwidth(self.c0));
        }
        if !self.t.is_finite() {
            return Err(Error::InvalidConfig(
                "evaluation point must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// A selected constant with its estimated MSE curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSelection {
    pub c_hat: f64,
    pub h_hat: f64,
    pub curve: Vec<(f64, Option<f64>)>,
    /// Value the replicates are compared against: the pilot estimate for the
    /// bootstrap, the true value for Monte Carlo.
    pub reference: f64,
    pub seed: u64,
}

/// Inverse-cdf sampler for a tabulated nondecreasing function, restricted to
/// the stretch where it strictly increases.
#[derive(Debug, Clone)]
pub struct TabulatedSampler {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedSampler {
    pub fn new(xs: &[f64], cdf: &[f64]) -> Result<TabulatedSampler> {
        const MIN_SLOPE: f64 = 1e-12;
        let mut kx: Vec<f64> = Vec::new();
        let mut kf: Vec<f64> = Vec::new();
        for i in 0..xs.len() {
            let (x, f) = (xs[i], cdf[i]);
            match kx.last().copied() {
                None => {
                    kx.push(x);
                    kf.push(f);
                }
                Some(lx) => {
                    let lf = kf[kf.len() - 1];
                    if f > lf + MIN_SLOPE * (x - lx) {
                        // Start the rise where the flat stretch ends.
                        let (px, pf) = (xs[i - 1], cdf[i - 1]);
                        if px > lx && pf >= lf && f > pf {
                            let last = kx.len() - 1;
                            kx[last] = px;
                            kf[last] = pf;
                        }
                        kx.push(x);
                        kf.push(f);
                    }
                }
            }
        }
        if kx.len() < 2 || !(kf[kf.len() - 1] - kf[0] > MIN_SLOPE) {
            return Err(Error::PilotDegenerate(
                "pilot distribution has no increasing stretch to invert".into(),
            ));
        }
        Ok(TabulatedSampler { xs: kx, cdf: kf })
    }

    /// Mass between the ends of the increasing stretch.
    pub fn mass(&self) -> f64 {
        self.cdf[self.cdf.len() - 1] - self.cdf[0]
    }

    /// Quantile at `u ∈ [0, 1]` of the distribution rescaled to unit mass.
    pub fn quantile(&self, u: f64) -> f64 {
        let v = self.cdf[0] + u * self.mass();
        let j = self
            .cdf
            .partition_point(|&c| c < v)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        (x0 + (x1 - x0) * (v - c0) / (c1 - c0)).clamp(x0, x1)
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

/// Pilot estimates the smoothed bootstrap resamples from.
#[derive(Debug, Clone)]
pub struct BootstrapPilot {
    pub events: TabulatedSampler,
    pub censoring: TabulatedSampler,
    /// Target estimate at the pilot bandwidth on the original sample.
    pub reference: f64,
    pub h0: f64,
}

pub fn bootstrap_pilot(
    sample: &ObservedSample,
    config: &BootstrapConfig,
    tm: TargetMethod,
    kernel: &Kernel,
) -> Result<BootstrapPilot> {
    let h0 = config.h0();
    let smle = SmoothedMle::fit(sample, kernel, h0)?;
    let (lo, hi) = smle
        .support()
        .ok_or_else(|| Error::PilotDegenerate("the MLE has no mass".into()))?;
    let steps = ((hi - lo) / (h0 / 32.0)).ceil().max(1.0) as usize;
    let xs: Vec<f64> = (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect();
    let fx: Vec<f64> = xs.iter().map(|&x| smle.smle_F(x)).collect::<Result<_>>()?;
    let events = TabulatedSampler::new(&xs, &fx)?;

    let sm = fit_smoothed(sample, kernel, h0, GridSpec::default())?;
    let censoring = TabulatedSampler::new(sm.grid(), sm.values(Measure::CumG))?;

    let reference = estimates_at(sample, tm, kernel, &[h0], config.t)
        .pop()
        .expect("one bandwidth in, one estimate out")
        .map_err(|e| Error::PilotDegenerate(format!("pilot estimate at t = {}: {e}", config.t)))?;
    Ok(BootstrapPilot {
        events,
        censoring,
        reference,
        h0,
    })
}

/// Draws bootstrap sample `index` of size `m` from the pilot. Event and
/// censoring times come from independent child streams.
pub fn bootstrap_sample(
    pilot: &BootstrapPilot,
    m: usize,
    seed: u64,
    index: usize,
) -> Result<ObservedSample> {
    let rep = child_seed(seed, index as u64);
    let mut rx = ChaCha8Rng::seed_from_u64(child_seed(rep, 0));
    let mut rt = ChaCha8Rng::seed_from_u64(child_seed(rep, 1));
    let records: Vec<(f64, u8)> = (0..m)
        .map(|_| {
            let x = pilot.events.draw(&mut rx);
            let t = pilot.censoring.draw(&mut rt).max(0.0);
            (t, u8::from(x <= t))
        })
        .collect();
    ObservedSample::new(&records)
}

fn squared_errors(
    sample: &ObservedSample,
    tm: TargetMethod,
    kernel: &Kernel,
    c_grid: &[f64],
    size: u64,
    t: f64,
    reference: f64,
) -> Vec<Option<f64>> {
    let scale = (size as f64).powf(-tm.alpha());
    let hs: Vec<f64> = c_grid.iter().map(|c| c * scale).collect();
    estimates_at(sample, tm, kernel, &hs, t)
        .into_iter()
        .map(|r| r.ok().map(|v| (v - reference).powi(2)))
        .collect()
}

/// Squared deviations of bootstrap replicate `index` from the pilot value.
pub fn bootstrap_replicate(
    pilot: &BootstrapPilot,
    config: &BootstrapConfig,
    tm: TargetMethod,
    kernel: &Kernel,
    index: usize,
) -> Result<ReplicateErrors> {
    let s = bootstrap_sample(pilot, config.m as usize, config.seed, index)?;
    Ok(ReplicateErrors {
        index,
        squared: squared_errors(
            &s,
            tm,
            kernel,
            &config.c_grid,
            config.m,
            config.t,
            pilot.reference,
        ),
    })
}

fn select(
    c_grid: &[f64],
    curve: Vec<Option<f64>>,
    refine: bool,
    n: u64,
    tm: TargetMethod,
    reference: f64,
    seed: u64,
) -> Result<BandwidthSelection> {
    let c_hat = if refine {
        refine_minimizer(c_grid, &curve)
    } else {
        grid_argmin(&curve).map(|j| c_grid[j])
    }
    .ok_or_else(|| Error::PilotDegenerate("no candidate bandwidth produced an estimate".into()))?;
    Ok(BandwidthSelection {
        c_hat,
        h_hat: c_hat * (n as f64).powf(-tm.alpha()),
        curve: c_grid.iter().copied().zip(curve).collect(),
        reference,
        seed,
    })
}

/// Smoothed-bootstrap choice of `c`: resamples `m` event times from the
/// pilot SMLE and `m` censoring times from the pilot `Ĝ`, estimates the
/// squared error of the target estimate at bandwidth `c·m^{-α}` against the
/// pilot value, and minimizes the average over `c`. The returned `h_hat`
/// scales with the original `n`.
pub fn bootstrap_bandwidth(
    sample: &ObservedSample,
    config: &BootstrapConfig,
    tm: TargetMethod,
    kernel: &Kernel,
) -> Result<BandwidthSelection> {
    config.validate()?;
    if config.n != sample.n() {
        return Err(Error::InvalidConfig(format!(
            "configured n = {} but the sample has {} records",
            config.n,
            sample.n()
        )));
    }
    let pilot = bootstrap_pilot(sample, config, tm, kernel)?;
    let rows: Vec<ReplicateErrors> = (0..config.b)
        .into_par_iter()
        .map(|i| bootstrap_replicate(&pilot, config, tm, kernel, i))
        .collect::<Result<_>>()?;
    let curve = aggregate_replicates(&rows, config.c_grid.len());
    select(
        &config.c_grid,
        curve,
        config.refine,
        config.n,
        tm,
        pilot.reference,
        config.seed,
    )
}

/// Value of the estimated quantity under `truth`.
pub fn true_value(truth: &dyn TruthSpec, target: Target, t: f64) -> f64 {
    match target {
        Target::F => truth.event_cdf(t),
        Target::Density => truth.event_density(t),
        Target::Hazard => truth.event_hazard(t),
    }
}

/// Squared errors of Monte Carlo replicate `index` against the truth.
#[allow(clippy::too_many_arguments)]
pub fn mc_replicate(
    truth: &dyn TruthSpec,
    sample_size: usize,
    c_grid: &[f64],
    t: f64,
    tm: TargetMethod,
    kernel: &Kernel,
    seed: u64,
    index: usize,
) -> Result<ReplicateErrors> {
    let s = sample_current_status(truth, sample_size, child_seed(seed, index as u64))?.sample;
    Ok(ReplicateErrors {
        index,
        squared: squared_errors(
            &s,
            tm,
            kernel,
            c_grid,
            sample_size as u64,
            t,
            true_value(truth, tm.target, t),
        ),
    })
}

/// Monte Carlo MSE curve of the `tm` estimate at `t` from `b` samples of
/// size `sample_size` drawn from `truth`, and its minimizer.
#[allow(clippy::too_many_arguments)]
pub fn mc_bandwidth(
    truth: &dyn TruthSpec,
    sample_size: usize,
    b: usize,
    c_grid: &[f64],
    t: f64,
    tm: TargetMethod,
    kernel: &Kernel,
    seed: u64,
) -> Result<BandwidthSelection> {
    if c_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if b == 0 || sample_size == 0 {
        return Err(Error::InvalidConfig(
            "replicate count and sample size must be positive".into(),
        ));
    }
    let rows: Vec<ReplicateErrors> = (0..b)
        .into_par_iter()
        .map(|i| mc_replicate(truth, sample_size, c_grid, t, tm, kernel, seed, i))
        .collect::<Result<_>>()?;
    let curve = aggregate_replicates(&rows, c_grid.len());
    select(
        c_grid,
        curve,
        true,
        sample_size as u64,
        tm,
        true_value(truth, tm.target, t),
        seed,
    )
}

/// Distribution summary of replicated estimates at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub truth: f64,
    /// `n^r(mean − truth)`.
    pub normalized_mean: f64,
    /// `n^r·sd`.
    pub normalized_sd: f64,
    pub rate: f64,
}

/// Replicated estimates of the `tm` target at `t` with bandwidth
/// `c·n^{-α}`, one entry per replicate in index order.
#[allow(clippy::too_many_arguments)]
pub fn mc_estimates(
    truth: &dyn TruthSpec,
    sample_size: usize,
    b: usize,
    c: f64,
    t: f64,
    tm: TargetMethod,
    kernel: &Kernel,
    seed: u64,
) -> Result<Vec<Result<f64>>> {
    let h = BandwidthPlan::new(tm, c, sample_size as u64)?.h();
    (0..b)
        .into_par_iter()
        .map(|i| {
            let s = sample_current_status(truth, sample_size, child_seed(seed, i as u64))?.sample;
            Ok(estimates_at(&s, tm, kernel, &[h], t)
                .pop()
                .expect("one estimate"))
        })
        .collect()
}

/// Mean, sample standard deviation and their `n^r`-normalized versions.
pub fn summarize(values: &[f64], truth: f64, sample_size: usize, rate: f64) -> EstimateSummary {
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let sd = if count > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    let scale = (sample_size as f64).powf(rate);
    EstimateSummary {
        count,
        mean,
        sd,
        truth,
        normalized_mean: scale * (mean - truth),
        normalized_sd: scale * sd,
        rate,
    }
}
