//! Analytic truths and seeded samplers for simulation studies.
//!
//! The built-in design draws event times from a shifted Gamma distribution
//! with integer shape and censoring times from an exponential distribution;
//! [`truth_gamma4_exp3`] gives shift 2, shape 4 and censoring mean 3.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::mle::ObservedSample;

/// Analytic event-time and censoring-time distributions.
///
/// `event_*` describe `F₀` and its derivatives, `censor_*` describe `G`.
pub trait TruthSpec: Send + Sync {
    fn event_cdf(&self, x: f64) -> f64;
    fn event_density(&self, x: f64) -> f64;
    fn event_density_d1(&self, x: f64) -> f64;
    fn event_density_d2(&self, x: f64) -> f64;
    fn event_density_d3(&self, x: f64) -> f64;
    fn censor_cdf(&self, t: f64) -> f64;
    fn censor_density(&self, t: f64) -> f64;
    fn censor_density_d1(&self, t: f64) -> f64;
    fn censor_density_d2(&self, t: f64) -> f64;

    /// Draws one latent event time.
    fn draw_event(&self, rng: &mut dyn RngCore) -> f64;
    /// Draws one censoring time.
    fn draw_censor(&self, rng: &mut dyn RngCore) -> f64;

    /// `λ₀ = f₀ / (1 − F₀)`.
    fn event_hazard(&self, x: f64) -> f64 {
        self.event_density(x) / (1.0 - self.event_cdf(x))
    }
}

/// Event time `shift + Gamma(shape, 1)`, censoring time exponential with
/// mean `censor_mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaExpTruth {
    shape: u32,
    shift: f64,
    censor_mean: f64,
    // Polynomials p_d with f₀^{(d)}(shift + y) = p_d(y) e^{-y}, lowest degree first.
    density_polys: [Vec<f64>; 4],
}

impl GammaExpTruth {
    pub fn new(shape: u32, shift: f64, censor_mean: f64) -> GammaExpTruth {
        assert!(shape >= 1, "shape must be at least 1");
        assert!(censor_mean > 0.0, "censoring mean must be positive");
        let k = shape as usize;
        let mut p0 = vec![0.0; k];
        p0[k - 1] = 1.0 / factorial(k - 1);
        let p1 = differentiate(&p0);
        let p2 = differentiate(&p1);
        let p3 = differentiate(&p2);
        GammaExpTruth {
            shape,
            shift,
            censor_mean,
            density_polys: [p0, p1, p2, p3],
        }
    }

    pub fn shape(&self) -> u32 {
        self.shape
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn censor_mean(&self) -> f64 {
        self.censor_mean
    }

    fn density_derivative(&self, order: usize, x: f64) -> f64 {
        let y = x - self.shift;
        if y <= 0.0 {
            return 0.0;
        }
        horner(&self.density_polys[order], y) * (-y).exp()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

fn horner(coeffs: &[f64], y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
}

// d/dy [p(y) e^{-y}] = (p'(y) − p(y)) e^{-y}
fn differentiate(p: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = p.iter().map(|c| -c).collect();
    for (j, c) in p.iter().enumerate().skip(1) {
        out[j - 1] += j as f64 * c;
    }
    out
}

fn unit_exponential(rng: &mut dyn RngCore) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln()
}

impl TruthSpec for GammaExpTruth {
    fn event_cdf(&self, x: f64) -> f64 {
        let y = x - self.shift;
        if y <= 0.0 {
            return 0.0;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..self.shape as usize {
            term *= y / j as f64;
            sum += term;
        }
        1.0 - (-y).exp() * sum
    }

    fn event_density(&self, x: f64) -> f64 {
        self.density_derivative(0, x)
    }

    fn event_density_d1(&self, x: f64) -> f64 {
        self.density_derivative(1, x)
    }

    fn event_density_d2(&self, x: f64) -> f64 {
        self.density_derivative(2, x)
    }

    fn event_density_d3(&self, x: f64) -> f64 {
        self.density_derivative(3, x)
    }

    fn censor_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            1.0 - (-t / self.censor_mean).exp()
        }
    }

    fn censor_density(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            (-t / self.censor_mean).exp() / self.censor_mean
        }
    }

    fn censor_density_d1(&self, t: f64) -> f64 {
        -self.censor_density(t) / self.censor_mean
    }

    fn censor_density_d2(&self, t: f64) -> f64 {
        self.censor_density(t) / (self.censor_mean * self.censor_mean)
    }

    fn draw_event(&self, rng: &mut dyn RngCore) -> f64 {
        self.shift + (0..self.shape).map(|_| unit_exponential(rng)).sum::<f64>()
    }

    fn draw_censor(&self, rng: &mut dyn RngCore) -> f64 {
        self.censor_mean * unit_exponential(rng)
    }
}

/// Shifted Gamma(4) event times (shift 2) with exponential censoring of
/// mean 3.
pub fn truth_gamma4_exp3() -> GammaExpTruth {
    GammaExpTruth::new(4, 2.0, 3.0)
}

/// A simulated current status sample.
#[derive(Debug, Clone)]
pub struct GeneratedSample {
    /// Records `(tᵢ, δᵢ)` in generation order.
    pub records: Vec<(f64, u8)>,
    pub sample: ObservedSample,
    /// Latent event times aligned with `records`; only kept on request.
    pub hidden_x: Option<Vec<f64>>,
    pub seed: u64,
}

/// Draws `n` current status observations. Each record consumes the event
/// draws first, then the censoring draw, from one ChaCha8 stream.
pub fn sample_current_status(
    truth: &dyn TruthSpec,
    n: usize,
    seed: u64,
) -> Result<GeneratedSample> {
    generate(truth, n, seed, false)
}

/// As [`sample_current_status`], retaining the latent event times.
pub fn sample_current_status_with_latent(
    truth: &dyn TruthSpec,
    n: usize,
    seed: u64,
) -> Result<GeneratedSample> {
    generate(truth, n, seed, true)
}

fn generate(
    truth: &dyn TruthSpec,
    n: usize,
    seed: u64,
    keep_latent: bool,
) -> Result<GeneratedSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    let mut hidden = keep_latent.then(|| Vec::with_capacity(n));
    for _ in 0..n {
        let x = truth.draw_event(&mut rng);
        let t = truth.draw_censor(&mut rng);
        records.push((t, u8::from(x <= t)));
        if let Some(h) = hidden.as_mut() {
            h.push(x);
        }
    }
    let sample = ObservedSample::new(&records)?;
    Ok(GeneratedSample {
        records,
        sample,
        hidden_x: hidden,
        seed,
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix(master ^ splitmix(index))
}
