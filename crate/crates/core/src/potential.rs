//! Potential kernel of the planar simple random walk.
//!
//! `a(x) = (2π)⁻² ∬_{[−π,π]²} (1 − cos(x·θ)) / (1 − (cos θ₁ + cos θ₂)/2) dθ`.
//!
//! The inner integral over `θ₂` has the closed form
//! `∫ cos(mθ₂) / (A − cos θ₂) dθ₂ = 2π e^{−|m|t} / sinh t` with `cosh t = A`,
//! which leaves a one-dimensional integral over `[0, π]` with an analytic
//! integrand. Gauss–Legendre converges geometrically on it.

use std::f64::consts::{FRAC_2_PI, LN_2, PI};
use std::sync::Arc;

use crate::domain::Site;
use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// Constant term `(2γ + 3 ln 2)/π` of the large-`|x|` expansion.
pub const K0: f64 = (2.0 * EULER_GAMMA + 3.0 * LN_2) / PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_lo^hi f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Evaluation policy for `a(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialKernelConfig {
    pub quadrature_points_per_axis: usize,
    /// Beyond this radius the asymptotic expansion is used.
    pub asymptotic_cutoff_radius: f64,
}

impl Default for PotentialKernelConfig {
    fn default() -> Self {
        PotentialKernelConfig {
            quadrature_points_per_axis: 512,
            asymptotic_cutoff_radius: 50.0,
        }
    }
}

impl PotentialKernelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.quadrature_points_per_axis < 128 {
            return Err(Error::domain(format!(
                "quadrature_points_per_axis = {} must be at least 128",
                self.quadrature_points_per_axis
            )));
        }
        if self.asymptotic_cutoff_radius.is_nan() || self.asymptotic_cutoff_radius < 20.0 {
            return Err(Error::domain(format!(
                "asymptotic_cutoff_radius = {} must be at least 20",
                self.asymptotic_cutoff_radius
            )));
        }
        Ok(())
    }
}

/// Potential kernel evaluator with a precomputed quadrature rule.
#[derive(Debug, Clone)]
pub struct PotentialKernel {
    config: PotentialKernelConfig,
    rule: Arc<GaussLegendre>,
}

impl PotentialKernel {
    pub fn new(config: PotentialKernelConfig) -> Result<Self> {
        config.validate()?;
        Ok(PotentialKernel {
            config,
            rule: Arc::new(GaussLegendre::new(config.quadrature_points_per_axis)),
        })
    }

    /// Kernel that never switches to the expansion.
    pub fn quadrature_only() -> Self {
        Self::new(PotentialKernelConfig {
            asymptotic_cutoff_radius: f64::INFINITY,
            ..Default::default()
        })
        .expect("default order is valid")
    }

    pub fn config(&self) -> &PotentialKernelConfig {
        &self.config
    }

    /// `a(x)` by quadrature.
    pub fn exact(&self, x: Site) -> f64 {
        // a is invariant under the lattice symmetries; put the larger
        // coordinate in the decaying exponential.
        let (p, q) = {
            let (ax, ay) = (x.x.unsigned_abs(), x.y.unsigned_abs());
            (ax.min(ay) as f64, ax.max(ay) as f64)
        };
        if p == 0.0 && q == 0.0 {
            return 0.0;
        }
        let integral = self.rule.integrate(0.0, PI, |theta| {
            let half_sin = (0.5 * theta).sin();
            let u = 2.0 * half_sin * half_sin;
            let sinh_t = (u * (u + 2.0)).sqrt();
            let t = (u + sinh_t).ln_1p();
            let osc = (0.5 * p * theta).sin();
            // 1 − cos(pθ) e^{−qt}, arranged to avoid cancellation near θ = 0.
            let num = 2.0 * osc * osc - (p * theta).cos() * (-q * t).exp_m1();
            num / sinh_t
        });
        FRAC_2_PI * integral
    }

    /// `exact` within the cutoff radius, `asymptotic` beyond it.
    pub fn value(&self, x: Site) -> f64 {
        if x.norm() <= self.config.asymptotic_cutoff_radius {
            self.exact(x)
        } else {
            potential_asymptotic(x).expect("nonzero beyond the cutoff")
        }
    }
}

impl Default for PotentialKernel {
    fn default() -> Self {
        Self::new(PotentialKernelConfig::default()).expect("default config is valid")
    }
}

/// `(2/π) ln|x| + k₀`.
pub fn potential_asymptotic(x: Site) -> Result<f64> {
    if x == Site::ORIGIN {
        return Err(Error::domain("the asymptotic expansion is singular at the origin"));
    }
    Ok(FRAC_2_PI * x.norm().ln() + K0)
}
