//! Smoothing kernels on `[-1, 1]`, their scaled versions and the boundary
//! kernel family used for density estimation near the origin.
//!
//! A [`Kernel`] is a symmetric probability density supported on `[-1, 1]`
//! that is twice continuously differentiable when extended by zero. Besides
//! the density `k`, its distribution function `K` and derivative `k'`, a
//! kernel carries the three constants that enter every asymptotic MSE
//! expression: `m2 = ∫u²k`, `∫k²` and `∫k'²`.
//!
//! Near the left edge of the support of the observation times the ordinary
//! kernel estimate is inconsistent. The boundary kernel
//!
//! ```text
//! k^β(u) = (ν₂,β − ν₁,β u) / (ν₀,β ν₂,β − ν₁,β²) · k(u) · 1(-1, β](u)
//! ```
//!
//! with partial moments `νᵢ,β = ∫_{-1}^{β} uⁱ k(u) du` restores the zeroth and
//! first moment conditions on the truncated support. See
//! [`BoundaryKernelFamily`].

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{simpson, SIMPSON_NODES};

/// Number of β nodes in the cached partial-moment table.
pub const NU_TABLE_NODES: usize = 1025;

/// Kernel constants appearing in the asymptotic MSE expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    /// Second moment `∫u²k(u)du`.
    pub m2: f64,
    /// `∫k(u)²du`.
    pub l2_k: f64,
    /// `∫k'(u)²du`.
    pub l2_kprime: f64,
}

/// A symmetric probability density with support `[-1, 1]`.
///
/// Cheap to clone; the constants and the boundary moment table are computed
/// once at construction and shared.
#[derive(Clone)]
pub struct Kernel {
    inner: Arc<KernelInner>,
}

struct KernelInner {
    name: String,
    density: fn(f64) -> f64,
    cdf: fn(f64) -> f64,
    derivative: fn(f64) -> f64,
    constants: KernelConstants,
    nu_table: NuTable,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.inner.name)
            .field("constants", &self.inner.constants)
            .finish()
    }
}

impl Kernel {
    /// Builds a kernel from its density, distribution function and
    /// derivative, each only consulted on `[-1, 1]`.
    ///
    /// The kernel conditions are checked numerically: unit mass (to 1e-10),
    /// symmetry, nonnegativity, vanishing at `±1` and `K(-1) = 0`, `K(1) = 1`.
    pub fn new(
        name: impl Into<String>,
        density: fn(f64) -> f64,
        cdf: fn(f64) -> f64,
        derivative: fn(f64) -> f64,
    ) -> Result<Kernel> {
        let name = name.into();
        let mass = simpson(density, -1.0, 1.0, SIMPSON_NODES);
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidKernel(format!(
                "{name}: ∫k = {mass}, expected 1"
            )));
        }
        for i in 0..=200 {
            let u = i as f64 / 200.0;
            let (a, b) = (density(u), density(-u));
            if a < 0.0 || b < 0.0 {
                return Err(Error::InvalidKernel(format!(
                    "{name}: negative at u = ±{u}"
                )));
            }
            if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                return Err(Error::InvalidKernel(format!(
                    "{name}: not symmetric at u = {u}"
                )));
            }
        }
        if density(1.0).abs() > 1e-12 || density(-1.0).abs() > 1e-12 {
            return Err(Error::InvalidKernel(format!("{name}: k(±1) must vanish")));
        }
        if cdf(-1.0).abs() > 1e-10 || (cdf(1.0) - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidKernel(format!(
                "{name}: K(-1) = 0 and K(1) = 1 required"
            )));
        }
        let mut kernel = KernelInner {
            name,
            density,
            cdf,
            derivative,
            constants: KernelConstants {
                m2: 0.0,
                l2_k: 0.0,
                l2_kprime: 0.0,
            },
            nu_table: NuTable::default(),
        };
        kernel.constants = constants_of(density, derivative);
        kernel.nu_table = NuTable::build(density);
        Ok(Kernel {
            inner: Arc::new(kernel),
        })
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// `k(u)`, zero outside `(-1, 1)`.
    #[inline]
    pub fn density(&self, u: f64) -> f64 {
        if u.abs() < 1.0 {
            (self.inner.density)(u)
        } else {
            0.0
        }
    }

    /// `K(u) = ∫_{-∞}^{u} k`.
    #[inline]
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= -1.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            (self.inner.cdf)(u)
        }
    }

    /// `k'(u)`, zero outside `(-1, 1)`.
    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        if u.abs() < 1.0 {
            (self.inner.derivative)(u)
        } else {
            0.0
        }
    }

    pub fn constants(&self) -> KernelConstants {
        self.inner.constants
    }

    pub fn m2(&self) -> f64 {
        self.inner.constants.m2
    }

    pub fn l2_k(&self) -> f64 {
        self.inner.constants.l2_k
    }

    pub fn l2_kprime(&self) -> f64 {
        self.inner.constants.l2_kprime
    }

    /// The kernel rescaled to bandwidth `h`.
    pub fn scaled(&self, h: f64) -> Result<ScaledKernel<'_>> {
        ScaledKernel::new(self, h)
    }

    /// The boundary kernel family `β ↦ k^β` built on this kernel.
    pub fn boundary(&self) -> BoundaryKernelFamily<'_> {
        BoundaryKernelFamily { kernel: self }
    }
}

/// The triweight kernel `k(u) = 35/32 (1 − u²)³` on `[-1, 1]`.
pub fn triweight() -> Kernel {
    static TRIWEIGHT: OnceLock<Kernel> = OnceLock::new();
    TRIWEIGHT
        .get_or_init(|| {
            Kernel::new(
                "triweight",
                triweight_density,
                triweight_cdf,
                triweight_derivative,
            )
            .expect("triweight satisfies the kernel conditions")
        })
        .clone()
}

fn triweight_density(u: f64) -> f64 {
    let s = 1.0 - u * u;
    35.0 / 32.0 * s * s * s
}

fn triweight_cdf(u: f64) -> f64 {
    let u2 = u * u;
    0.5 + 35.0 / 32.0 * u * (1.0 - u2 + 0.6 * u2 * u2 - u2 * u2 * u2 / 7.0)
}

fn triweight_derivative(u: f64) -> f64 {
    let s = 1.0 - u * u;
    -105.0 / 16.0 * u * s * s
}

/// Looks up a built-in kernel by name.
pub fn by_name(name: &str) -> Option<Kernel> {
    match name {
        "triweight" => Some(triweight()),
        _ => None,
    }
}

/// `m2`, `∫k²` and `∫k'²` by composite Simpson on [`SIMPSON_NODES`] nodes.
pub fn kernel_constants(kernel: &Kernel) -> KernelConstants {
    constants_of(kernel.inner.density, kernel.inner.derivative)
}

fn constants_of(density: fn(f64) -> f64, derivative: fn(f64) -> f64) -> KernelConstants {
    KernelConstants {
        m2: simpson(|u| u * u * density(u), -1.0, 1.0, SIMPSON_NODES),
        l2_k: simpson(|u| density(u).powi(2), -1.0, 1.0, SIMPSON_NODES),
        l2_kprime: simpson(|u| derivative(u).powi(2), -1.0, 1.0, SIMPSON_NODES),
    }
}

/// `K_h(u) = K(u/h)`, `k_h(u) = k(u/h)/h`, `k'_h(u) = k'(u/h)/h²`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledKernel<'a> {
    kernel: &'a Kernel,
    h: f64,
}

impl<'a> ScaledKernel<'a> {
    pub fn new(kernel: &'a Kernel, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonpositiveBandwidth(h));
        }
        Ok(ScaledKernel { kernel, h })
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn cdf(&self, u: f64) -> f64 {
        self.kernel.cdf(u / self.h)
    }

    pub fn density(&self, u: f64) -> f64 {
        self.kernel.density(u / self.h) / self.h
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.kernel.derivative(u / self.h) / (self.h * self.h)
    }
}

/// Coefficients of the boundary kernel at one β: `k^β(u) = (a − b·u)·k(u)`
/// on `(-1, β]`, together with their β-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCoefficients {
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub da: f64,
    pub db: f64,
}

impl BoundaryCoefficients {
    /// `k^β(u)` given `k(u)`; the caller is responsible for the support
    /// indicator.
    #[inline]
    pub fn apply(&self, u: f64, k_u: f64) -> f64 {
        (self.a - self.b * u) * k_u
    }
}

/// The family `β ↦ k^β`, `β ∈ [0, 1]`, of linear boundary kernels.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryKernelFamily<'a> {
    kernel: &'a Kernel,
}

impl<'a> BoundaryKernelFamily<'a> {
    pub fn kernel(&self) -> &'a Kernel {
        self.kernel
    }

    /// Partial moment `νᵢ,β = ∫_{-1}^{β} uⁱ k(u) du` from the cached table.
    ///
    /// The table holds quadrature values on [`NU_TABLE_NODES`] β nodes and
    /// interpolates with cubic Hermite polynomials using the exact slopes
    /// `dνᵢ/dβ = βⁱ k(β)`.
    pub fn nu(&self, i: usize, beta: f64) -> f64 {
        assert!(i <= 2, "partial moments are defined for i = 0, 1, 2");
        self.kernel
            .inner
            .nu_table
            .eval(i, beta.clamp(0.0, 1.0), self.kernel.inner.density)
    }

    /// Partial moment by direct composite Simpson quadrature on `[-1, β]`.
    pub fn nu_quadrature(&self, i: usize, beta: f64) -> f64 {
        assert!(i <= 2, "partial moments are defined for i = 0, 1, 2");
        let k = self.kernel.inner.density;
        simpson(
            |u| u.powi(i as i32) * k(u),
            -1.0,
            beta.clamp(0.0, 1.0),
            SIMPSON_NODES,
        )
    }

    pub fn coefficients(&self, beta: f64) -> BoundaryCoefficients {
        let beta = beta.clamp(0.0, 1.0);
        let (n0, n1, n2) = (self.nu(0, beta), self.nu(1, beta), self.nu(2, beta));
        let kb = self.kernel.density(beta);
        let (d0, d1, d2) = (kb, beta * kb, beta * beta * kb);
        let det = n0 * n2 - n1 * n1;
        let ddet = d0 * n2 + n0 * d2 - 2.0 * n1 * d1;
        BoundaryCoefficients {
            beta,
            a: n2 / det,
            b: n1 / det,
            da: (d2 * det - n2 * ddet) / (det * det),
            db: (d1 * det - n1 * ddet) / (det * det),
        }
    }

    /// `k^β(u)`; zero outside `(-1, β]`.
    pub fn eval(&self, beta: f64, u: f64) -> f64 {
        if u <= -1.0 || u > beta {
            return 0.0;
        }
        self.coefficients(beta).apply(u, self.kernel.density(u))
    }

    /// `ν₀,β ν₂,β − ν₁,β²`, positive for every β in `[0, 1]`.
    pub fn determinant(&self, beta: f64) -> f64 {
        let (n0, n1, n2) = (self.nu(0, beta), self.nu(1, beta), self.nu(2, beta));
        n0 * n2 - n1 * n1
    }
}

#[derive(Default)]
struct NuTable {
    values: Vec<[f64; 3]>,
}

impl NuTable {
    fn build(density: fn(f64) -> f64) -> NuTable {
        let last = (NU_TABLE_NODES - 1) as f64;
        let mut values: Vec<[f64; 3]> = (0..NU_TABLE_NODES)
            .map(|j| {
                let beta = j as f64 / last;
                [
                    simpson(density, -1.0, beta, SIMPSON_NODES),
                    simpson(|u| u * density(u), -1.0, beta, SIMPSON_NODES),
                    simpson(|u| u * u * density(u), -1.0, beta, SIMPSON_NODES),
                ]
            })
            .collect();
        // Symmetry and unit mass fix the end nodes exactly, so k^1 = k.
        let m2 = values[NU_TABLE_NODES - 1][2];
        values[0] = [0.5, values[0][1], 0.5 * m2];
        values[NU_TABLE_NODES - 1] = [1.0, 0.0, m2];
        NuTable { values }
    }

    fn eval(&self, i: usize, beta: f64, density: fn(f64) -> f64) -> f64 {
        let last = NU_TABLE_NODES - 1;
        let pos = beta * last as f64;
        let j = (pos.floor() as usize).min(last - 1);
        let s = pos - j as f64;
        if s == 0.0 {
            return self.values[j][i];
        }
        if s == 1.0 {
            return self.values[j + 1][i];
        }
        let step = 1.0 / last as f64;
        let (b0, b1) = (j as f64 * step, (j + 1) as f64 * step);
        let slope = |b: f64| b.powi(i as i32) * if b.abs() < 1.0 { density(b) } else { 0.0 };
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[j][i]
            + h10 * step * slope(b0)
            + h01 * self.values[j + 1][i]
            + h11 * step * slope(b1)
    }
}
