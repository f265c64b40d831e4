//! Kernel-smoothed subdensities of the observation times.
//!
//! For `i ∈ {0, 1}` the subdensity of times with `Δ = i` is estimated by
//!
//! ```text
//! ĝₙ,ᵢ(t) = (1/n) Σⱼ k_h(t − Tⱼ) 1{Δⱼ = i}              t ≥ h
//! ĝₙ,ᵢ(t) = (1/n) Σⱼ (1/h) k^β((t − Tⱼ)/h) 1{Δⱼ = i}     0 ≤ t < h, β = t/h
//! ```
//!
//! with the boundary kernel `k^β` of [`crate::kernels`]. Everything is
//! tabulated once on a uniform grid over `[0, T₍ₙ₎ + h]`; the integrated
//! versions `Ĝₙ,ᵢ` are running trapezoid sums of the tabulated densities.
//!
//! The boundary kernel takes negative values for part of its support, so in
//! sparse data the corrected estimate can dip below zero. Such values are
//! clipped to zero (with zero derivative), keeping every `Ĝ` nondecreasing.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::mle::ObservedSample;

/// Grid resolution for the tabulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// At least this many intervals per bandwidth.
    PerBandwidth(usize),
    /// Exactly this many uniformly spaced points over `[0, T₍ₙ₎ + h]`.
    Points(usize),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::PerBandwidth(32)
    }
}

/// Coarsest admissible grid: 16 intervals per bandwidth.
pub const MIN_POINTS_PER_BANDWIDTH: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothOptions {
    pub grid: GridSpec,
    /// Use the boundary kernel on `[0, h)`. Disabling it is only useful for
    /// comparisons.
    pub boundary_correction: bool,
}

impl Default for SmoothOptions {
    fn default() -> Self {
        SmoothOptions {
            grid: GridSpec::default(),
            boundary_correction: true,
        }
    }
}

/// Tabulated quantity selector for [`SmoothedMeasures::eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    G0,
    G1,
    G,
    G0Prime,
    G1Prime,
    GPrime,
    CumG0,
    CumG1,
    CumG,
}

impl Measure {
    fn is_cumulative(self) -> bool {
        matches!(self, Measure::CumG0 | Measure::CumG1 | Measure::CumG)
    }
}

/// Smoothed subdensities, their derivatives and integrals on a shared grid.
#[derive(Debug, Clone)]
pub struct SmoothedMeasures {
    sample: ObservedSample,
    kernel: Kernel,
    h: f64,
    grid: Vec<f64>,
    g0: Vec<f64>,
    g1: Vec<f64>,
    g: Vec<f64>,
    g0_prime: Vec<f64>,
    g1_prime: Vec<f64>,
    g_prime: Vec<f64>,
    cum_g0: Vec<f64>,
    cum_g1: Vec<f64>,
    cum_g: Vec<f64>,
}

/// Smooths `sample` with `kernel` at bandwidth `h` on the default grid
/// (spacing at most `h/32`).
pub fn fit_smoothed(
    sample: &ObservedSample,
    kernel: &Kernel,
    h: f64,
    grid: GridSpec,
) -> Result<SmoothedMeasures> {
    SmoothedMeasures::fit(
        sample,
        kernel,
        h,
        SmoothOptions {
            grid,
            ..SmoothOptions::default()
        },
    )
}

fn build_grid(end: f64, h: f64, spec: GridSpec) -> Result<Vec<f64>> {
    let points = match spec {
        GridSpec::PerBandwidth(k) => {
            if (k as f64) < MIN_POINTS_PER_BANDWIDTH {
                return Err(Error::GridTooCoarse {
                    spacing: h / k as f64,
                    limit: h / MIN_POINTS_PER_BANDWIDTH,
                });
            }
            (end / (h / k as f64)).ceil() as usize + 1
        }
        GridSpec::Points(p) => p,
    };
    if points < 2 {
        return Err(Error::InvalidConfig(
            "grid needs at least two points".into(),
        ));
    }
    let spacing = end / (points - 1) as f64;
    let limit = h / MIN_POINTS_PER_BANDWIDTH;
    if spacing > limit * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse { spacing, limit });
    }
    let mut grid: Vec<f64> = (0..points).map(|i| i as f64 * spacing).collect();
    grid[points - 1] = end;
    Ok(grid)
}

impl SmoothedMeasures {
    pub fn fit(
        sample: &ObservedSample,
        kernel: &Kernel,
        h: f64,
        options: SmoothOptions,
    ) -> Result<SmoothedMeasures> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonpositiveBandwidth(h));
        }
        let grid = build_grid(sample.max_time() + h, h, options.grid)?;
        let groups = sample.groups();
        let times: Vec<f64> = groups.iter().map(|g| g.time).collect();
        let n = sample.n() as f64;
        let boundary = kernel.boundary();

        // [g0, g1, g0', g1'] per node; each node is independent of the others.
        let rows: Vec<[f64; 4]> = grid
            .par_iter()
            .map(|&t| {
                let lo = times.partition_point(|&x| x <= t - h);
                let hi = times.partition_point(|&x| x < t + h);
                let mut acc = [0.0; 4];
                let coeffs =
                    (options.boundary_correction && t < h).then(|| boundary.coefficients(t / h));
                for g in &groups[lo..hi] {
                    let u = (t - g.time) / h;
                    let k = kernel.density(u);
                    let dk = kernel.derivative(u);
                    let (val, der) = match coeffs {
                        // u ≤ β = t/h holds for every T ≥ 0, so the support
                        // indicator of k^β never cuts.
                        Some(c) => (
                            c.apply(u, k) / h,
                            ((c.da - c.db * u) * k - c.b * k + (c.a - c.b * u) * dk) / (h * h),
                        ),
                        None => (k / h, dk / (h * h)),
                    };
                    let w0 = (g.total - g.events) as f64 / n;
                    let w1 = g.events as f64 / n;
                    acc[0] += w0 * val;
                    acc[1] += w1 * val;
                    acc[2] += w0 * der;
                    acc[3] += w1 * der;
                }
                for (v, d) in [(0, 2), (1, 3)] {
                    if acc[v] < 0.0 {
                        acc[v] = 0.0;
                        acc[d] = 0.0;
                    }
                }
                acc
            })
            .collect();

        let g0: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let g1: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        let g0_prime: Vec<f64> = rows.iter().map(|r| r[2]).collect();
        let g1_prime: Vec<f64> = rows.iter().map(|r| r[3]).collect();
        let g: Vec<f64> = g0.iter().zip(&g1).map(|(a, b)| a + b).collect();
        let g_prime: Vec<f64> = g0_prime.iter().zip(&g1_prime).map(|(a, b)| a + b).collect();
        let cum_g0 = cumulative_trapezoid(&grid, &g0);
        let cum_g1 = cumulative_trapezoid(&grid, &g1);
        let cum_g = cum_g0.iter().zip(&cum_g1).map(|(a, b)| a + b).collect();
        Ok(SmoothedMeasures {
            sample: sample.clone(),
            kernel: kernel.clone(),
            h,
            grid,
            g0,
            g1,
            g,
            g0_prime,
            g1_prime,
            g_prime,
            cum_g0,
            cum_g1,
            cum_g,
        })
    }

    pub fn sample(&self) -> &ObservedSample {
        &self.sample
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Right end of the tabulated domain, `T₍ₙ₎ + h`.
    pub fn domain_end(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// The tabulated values of `which` at the grid nodes.
    pub fn values(&self, which: Measure) -> &[f64] {
        match which {
            Measure::G0 => &self.g0,
            Measure::G1 => &self.g1,
            Measure::G => &self.g,
            Measure::G0Prime => &self.g0_prime,
            Measure::G1Prime => &self.g1_prime,
            Measure::GPrime => &self.g_prime,
            Measure::CumG0 => &self.cum_g0,
            Measure::CumG1 => &self.cum_g1,
            Measure::CumG => &self.cum_g,
        }
    }

    /// Linear interpolation of the tabulation, exact at grid nodes. Beyond
    /// the grid densities vanish and distribution functions keep their
    /// terminal value.
    pub fn eval(&self, which: Measure, t: f64) -> Result<f64> {
        let values = self.values(which);
        if !(t >= 0.0) {
            return Err(Error::OutOfDomain {
                t,
                lo: 0.0,
                hi: self.domain_end(),
            });
        }
        if t >= self.domain_end() {
            return Ok(if t == self.domain_end() || which.is_cumulative() {
                values[values.len() - 1]
            } else {
                0.0
            });
        }
        Ok(interpolate(&self.grid, values, t))
    }
}

/// Piecewise linear interpolation on a strictly increasing grid; `t` must
/// lie in `[grid[0], grid[last]]`.
pub(crate) fn interpolate(grid: &[f64], values: &[f64], t: f64) -> f64 {
    let j = grid.partition_point(|&x| x <= t).clamp(1, grid.len() - 1) - 1;
    let (t0, t1) = (grid[j], grid[j + 1]);
    if t == t0 {
        return values[j];
    }
    values[j] + (values[j + 1] - values[j]) * (t - t0) / (t1 - t0)
}

pub(crate) fn cumulative_trapezoid(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..grid.len() {
        acc += 0.5 * (values[i - 1] + values[i]) * (grid[i] - grid[i - 1]);
        out.push(acc);
    }
    out
}
