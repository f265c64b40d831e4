//! Estimators of `F₀`, `f₀` and the hazard `λ₀ = f₀/(1 − F₀)`.
//!
//! * naive: the ratio `ĝₙ,₁/ĝₙ` of smoothed subdensities and its derivative;
//! * MSLE: slope of the lower convex hull of the continuous cusum diagram
//!   `t ↦ (Ĝₙ(t), Ĝₙ,₁(t))`;
//! * SMLE: the MLE convolved with `K_h`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::lower_hull;
use crate::kernels::Kernel;
use crate::mle::{fit_mle, ObservedSample, StepDistribution};
use crate::smoothed::{interpolate, GridSpec, Measure, SmoothedMeasures};

/// Ratios with a denominator density at or below this are undefined.
pub const G_FLOOR: f64 = 1e-8;
/// Hazards require `F(t) < 1 − F_CEILING`.
pub const F_CEILING: f64 = 1e-6;

fn hazard(t: f64, f: f64, big_f: f64) -> Result<f64> {
    let denom = 1.0 - big_f;
    if !(denom > F_CEILING) {
        return Err(Error::HazardDenominatorViolation {
            t,
            value: big_f,
            ceiling: F_CEILING,
        });
    }
    Ok(f / denom)
}

fn density_at(sm: &SmoothedMeasures, t: f64) -> Result<f64> {
    let g = sm.eval(Measure::G, t)?;
    if !(g > G_FLOOR) {
        return Err(Error::DensityFloorViolation {
            t,
            value: g,
            floor: G_FLOOR,
        });
    }
    Ok(g)
}

/// `ĝₙ,₁(t)/ĝₙ(t)`.
#[allow(non_snake_case)]
pub fn naive_F(sm: &SmoothedMeasures, t: f64) -> Result<f64> {
    let g = density_at(sm, t)?;
    Ok(sm.eval(Measure::G1, t)? / g)
}

/// `(ĝₙĝ′ₙ,₁ − ĝ′ₙĝₙ,₁)/ĝₙ²`; may be negative.
pub fn naive_f(sm: &SmoothedMeasures, t: f64) -> Result<f64> {
    let g = density_at(sm, t)?;
    let g1 = sm.eval(Measure::G1, t)?;
    let dg = sm.eval(Measure::GPrime, t)?;
    let dg1 = sm.eval(Measure::G1Prime, t)?;
    Ok((g * dg1 - dg * g1) / (g * g))
}

pub fn naive_lambda(sm: &SmoothedMeasures, t: f64) -> Result<f64> {
    hazard(t, naive_f(sm, t)?, naive_F(sm, t)?)
}

/// Error-free sum of two floats (Knuth's TwoSum).
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Running sums kept as unevaluated `hi + lo` pairs so that differences of
/// nearby partial sums stay accurate.
fn compensated_cumsum(values: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0)];
    let (mut hi, mut lo) = (0.0, 0.0);
    for v in values {
        let (s, e) = two_sum(hi, v);
        hi = s;
        lo += e;
        out.push((hi, lo));
    }
    out
}

fn diff(c: &[(f64, f64)], a: usize, b: usize) -> f64 {
    (c[b].0 - c[a].0) + (c[b].1 - c[a].1)
}

/// Lower convex hull of the discretized continuous cusum diagram.
///
/// Grid segment `[tᵢ, tᵢ₊₁)` contributes the increment
/// `(ĝₙ(tᵢ)Δᵢ, ĝₙ,₁(tᵢ)Δᵢ)`, so its own slope is the naive ratio at `tᵢ` and
/// the hull slopes coincide with the weighted isotonic regression of the
/// naive values with weights `ĝₙ(tᵢ)Δᵢ`. Segments with `ĝₙ(tᵢ) = 0` have no
/// width and are skipped.
#[derive(Debug, Clone)]
pub struct ConvexHullFit {
    source: SmoothedMeasures,
    /// Grid index of each segment with positive width.
    active: Vec<usize>,
    /// CCSD points `(x, y, t)` at the active segment starts, plus the end.
    ccsd: Vec<(f64, f64, f64)>,
    /// Indices into `ccsd` of the hull vertices.
    hull_vertices: Vec<usize>,
    segment_slopes: Vec<f64>,
    /// Value of the MSLE at each grid node.
    node_values: Vec<f64>,
    /// Whether the segment starting at each grid node is its own hull edge.
    touch: Vec<bool>,
}

pub fn fit_msle(sm: &SmoothedMeasures) -> Result<ConvexHullFit> {
    ConvexHullFit::new(sm)
}

impl ConvexHullFit {
    pub fn new(sm: &SmoothedMeasures) -> Result<ConvexHullFit> {
        let grid = sm.grid();
        let g = sm.values(Measure::G);
        let g1 = sm.values(Measure::G1);
        let nseg = grid.len() - 1;
        let active: Vec<usize> = (0..nseg).filter(|&i| g[i] > 0.0).collect();
        if active.is_empty() {
            return Err(Error::DegenerateSupport);
        }
        let width = |i: usize| grid[i + 1] - grid[i];
        let cx = compensated_cumsum(active.iter().map(|&i| g[i] * width(i)));
        let cy = compensated_cumsum(active.iter().map(|&i| g1[i] * width(i)));
        let mut ccsd: Vec<(f64, f64, f64)> = (0..active.len())
            .map(|s| (cx[s].0 + cx[s].1, cy[s].0 + cy[s].1, grid[active[s]]))
            .collect();
        let last = active.len();
        ccsd.push((
            cx[last].0 + cx[last].1,
            cy[last].0 + cy[last].1,
            grid[active[last - 1] + 1],
        ));

        let slope = |a: usize, b: usize| {
            if b == a + 1 {
                let i = active[a];
                g1[i] / g[i]
            } else {
                (diff(&cy, a, b) / diff(&cx, a, b)).clamp(0.0, 1.0)
            }
        };
        let hull_vertices = lower_hull(ccsd.len(), true, |a, b, c| {
            slope(b, c)
                .partial_cmp(&slope(a, b))
                .unwrap_or(Ordering::Equal)
        });
        let segment_slopes: Vec<f64> = hull_vertices
            .windows(2)
            .map(|e| slope(e[0], e[1]))
            .collect();

        let mut seg_value = vec![0.0; active.len()];
        let mut seg_touch = vec![false; active.len()];
        for (k, e) in hull_vertices.windows(2).enumerate() {
            for s in e[0]..e[1] {
                seg_value[s] = segment_slopes[k];
                seg_touch[s] = e[1] == e[0] + 1;
            }
        }
        // Nodes inside a zero-width run take the slope on their right: x does
        // not move there, and the hull slope is right-continuous in x.
        let mut node_values = vec![0.0; grid.len()];
        let mut touch = vec![false; grid.len()];
        let mut next = active.len();
        for i in (0..grid.len()).rev() {
            if next > 0 && active[next - 1] == i {
                next -= 1;
                touch[i] = seg_touch[next];
            }
            node_values[i] = if next < active.len() {
                seg_value[next]
            } else {
                seg_value[active.len() - 1]
            };
        }
        Ok(ConvexHullFit {
            source: sm.clone(),
            active,
            ccsd,
            hull_vertices,
            segment_slopes,
            node_values,
            touch,
        })
    }

    pub fn source(&self) -> &SmoothedMeasures {
        &self.source
    }

    /// CCSD points `(Ĝₙ, Ĝₙ,₁, t)` at the starts of positive-width segments,
    /// followed by the end point.
    pub fn ccsd(&self) -> &[(f64, f64, f64)] {
        &self.ccsd
    }

    pub fn hull_vertices(&self) -> &[usize] {
        &self.hull_vertices
    }

    /// Slope of each hull edge; nondecreasing.
    pub fn segment_slopes(&self) -> &[f64] {
        &self.segment_slopes
    }

    /// Grid indices of the segments with positive width.
    pub fn active_segments(&self) -> &[usize] {
        &self.active
    }

    /// MSLE values at the grid nodes.
    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    /// Per grid node: the hull coincides with the CCSD on the segment that
    /// starts there.
    pub fn touch_mask(&self) -> &[bool] {
        &self.touch
    }

    /// Final hull slope.
    pub fn final_slope(&self) -> f64 {
        self.segment_slopes[self.segment_slopes.len() - 1]
    }

    /// Whether the estimate reaches 1 at the end of the support.
    pub fn saturated(&self) -> bool {
        self.final_slope() >= 1.0 - 1e-12
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let grid = self.source.grid();
        let end = grid[grid.len() - 1];
        if !(t >= 0.0 && t <= end) {
            return Err(Error::OutOfDomain {
                t,
                lo: 0.0,
                hi: end,
            });
        }
        Ok(grid.partition_point(|&x| x <= t).clamp(1, grid.len()) - 1)
    }

    #[allow(non_snake_case)]
    pub fn msle_F(&self, t: f64) -> Result<f64> {
        self.locate(t)?;
        Ok(interpolate(self.source.grid(), &self.node_values, t))
    }

    /// Derivative in `t` of [`Self::msle_F`]: the naive density where the hull
    /// touches the CCSD, zero on pooled stretches.
    pub fn msle_f(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        let grid = self.source.grid();
        let touching = self.touch[i] || (t == grid[i] && i > 0 && self.touch[i - 1]);
        if touching {
            naive_f(&self.source, t)
        } else {
            Ok(0.0)
        }
    }

    pub fn msle_lambda(&self, t: f64) -> Result<f64> {
        hazard(t, self.msle_f(t)?, self.msle_F(t)?)
    }
}

/// The MLE convolved with a scaled kernel. No boundary correction is applied.
#[derive(Debug, Clone)]
pub struct SmoothedMle {
    mle: StepDistribution,
    masses: Vec<f64>,
    kernel: Kernel,
    h: f64,
}

impl SmoothedMle {
    pub fn new(mle: StepDistribution, kernel: &Kernel, h: f64) -> Result<SmoothedMle> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonpositiveBandwidth(h));
        }
        let masses = mle.masses();
        Ok(SmoothedMle {
            mle,
            masses,
            kernel: kernel.clone(),
            h,
        })
    }

    pub fn fit(sample: &ObservedSample, kernel: &Kernel, h: f64) -> Result<SmoothedMle> {
        SmoothedMle::new(fit_mle(sample), kernel, h)
    }

    pub fn mle(&self) -> &StepDistribution {
        &self.mle
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn total_mass(&self) -> f64 {
        self.mle.total_mass()
    }

    /// `[τ₁ − h, τ_last + h]`, outside of which the density vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        let tau = self.mle.jump_times();
        Some((*tau.first()? - self.h, *tau.last()? + self.h))
    }

    fn sum(&self, t: f64, term: impl Fn(f64) -> f64) -> Result<f64> {
        if t.is_nan() {
            return Err(Error::OutOfDomain {
                t,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            });
        }
        Ok(self
            .mle
            .jump_times()
            .iter()
            .zip(&self.masses)
            .map(|(&tau, &p)| p * term((t - tau) / self.h))
            .sum())
    }

    #[allow(non_snake_case)]
    pub fn smle_F(&self, t: f64) -> Result<f64> {
        self.sum(t, |u| self.kernel.cdf(u))
    }

    pub fn smle_f(&self, t: f64) -> Result<f64> {
        Ok(self.sum(t, |u| self.kernel.density(u))? / self.h)
    }

    pub fn smle_lambda(&self, t: f64) -> Result<f64> {
        hazard(t, self.smle_f(t)?, self.smle_F(t)?)
    }
}

#[allow(non_snake_case)]
pub fn smle_F(mle: &StepDistribution, kernel: &Kernel, h: f64, t: f64) -> Result<f64> {
    SmoothedMle::new(mle.clone(), kernel, h)?.smle_F(t)
}

pub fn smle_f(mle: &StepDistribution, kernel: &Kernel, h: f64, t: f64) -> Result<f64> {
    SmoothedMle::new(mle.clone(), kernel, h)?.smle_f(t)
}

pub fn smle_lambda(mle: &StepDistribution, kernel: &Kernel, h: f64, t: f64) -> Result<f64> {
    SmoothedMle::new(mle.clone(), kernel, h)?.smle_lambda(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mle,
    Naive,
    Msle,
    Smle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    F,
    #[serde(rename = "f")]
    Density,
    #[serde(rename = "lambda")]
    Hazard,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mle => "mle",
            Method::Naive => "naive",
            Method::Msle => "msle",
            Method::Smle => "smle",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.to_ascii_lowercase().as_str() {
            "mle" => Some(Method::Mle),
            "naive" => Some(Method::Naive),
            "msle" => Some(Method::Msle),
            "smle" => Some(Method::Smle),
            _ => None,
        }
    }
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::F => "F",
            Target::Density => "f",
            Target::Hazard => "lambda",
        }
    }

    pub fn parse(s: &str) -> Option<Target> {
        match s {
            "F" => Some(Target::F),
            "f" => Some(Target::Density),
            "lambda" | "hazard" => Some(Target::Hazard),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
enum Fitted {
    Mle(StepDistribution),
    Naive(SmoothedMeasures),
    Msle(ConvexHullFit),
    Smle(SmoothedMle),
}

/// A fitted estimator of one target, evaluable pointwise.
#[derive(Debug, Clone)]
pub struct EstimateCurve {
    kind: Method,
    target: Target,
    h: Option<f64>,
    fitted: Fitted,
}

impl EstimateCurve {
    /// Fits `kind` for `target`. Smoothing methods need a bandwidth; the MLE
    /// only estimates `F`.
    pub fn fit(
        kind: Method,
        target: Target,
        sample: &ObservedSample,
        kernel: &Kernel,
        h: Option<f64>,
        grid: GridSpec,
    ) -> Result<EstimateCurve> {
        let need_h =
            || h.ok_or_else(|| Error::InvalidConfig(format!("{} needs a bandwidth", kind.name())));
        let fitted = match kind {
            Method::Mle => {
                if target != Target::F {
                    return Err(Error::InvalidConfig("the MLE only estimates F".into()));
                }
                Fitted::Mle(fit_mle(sample))
            }
            Method::Naive => Fitted::Naive(crate::smoothed::fit_smoothed(
                sample,
                kernel,
                need_h()?,
                grid,
            )?),
            Method::Msle => {
                let sm = crate::smoothed::fit_smoothed(sample, kernel, need_h()?, grid)?;
                Fitted::Msle(fit_msle(&sm)?)
            }
            Method::Smle => Fitted::Smle(SmoothedMle::fit(sample, kernel, need_h()?)?),
        };
        Ok(EstimateCurve {
            kind,
            target,
            h: if kind == Method::Mle { None } else { h },
            fitted,
        })
    }

    /// Builds the curve from an already smoothed sample (naive or MSLE).
    pub fn from_smoothed(
        kind: Method,
        target: Target,
        sm: &SmoothedMeasures,
    ) -> Result<EstimateCurve> {
        let fitted = match kind {
            Method::Naive => Fitted::Naive(sm.clone()),
            Method::Msle => Fitted::Msle(fit_msle(sm)?),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "{} is not built from smoothed measures",
                    kind.name()
                )))
            }
        };
        Ok(EstimateCurve {
            kind,
            target,
            h: Some(sm.bandwidth()),
            fitted,
        })
    }

    pub fn kind(&self) -> Method {
        self.kind
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn bandwidth(&self) -> Option<f64> {
        self.h
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match (&self.fitted, self.target) {
            (Fitted::Mle(m), _) => {
                if t.is_nan() {
                    return Err(Error::OutOfDomain {
                        t,
                        lo: f64::NEG_INFINITY,
                        hi: f64::INFINITY,
                    });
                }
                Ok(m.eval(t))
            }
            (Fitted::Naive(sm), Target::F) => naive_F(sm, t),
            (Fitted::Naive(sm), Target::Density) => naive_f(sm, t),
            (Fitted::Naive(sm), Target::Hazard) => naive_lambda(sm, t),
            (Fitted::Msle(fit), Target::F) => fit.msle_F(t),
            (Fitted::Msle(fit), Target::Density) => fit.msle_f(t),
            (Fitted::Msle(fit), Target::Hazard) => fit.msle_lambda(t),
            (Fitted::Smle(s), Target::F) => s.smle_F(t),
            (Fitted::Smle(s), Target::Density) => s.smle_f(t),
            (Fitted::Smle(s), Target::Hazard) => s.smle_lambda(t),
        }
    }

    /// Right end of the natural evaluation range.
    pub fn domain_end(&self) -> f64 {
        match &self.fitted {
            Fitted::Mle(m) => m.jump_times().last().copied().unwrap_or(0.0),
            Fitted::Naive(sm) => sm.domain_end(),
            Fitted::Msle(fit) => fit.source().domain_end(),
            Fitted::Smle(s) => s.support().map_or(0.0, |(_, hi)| hi),
        }
    }
}
