//! Closed-form continuous Green's function and Brownian harmonic measure on
//! pacman domains.
//!
//! The chain `z ↦ ((z + z0)/2n)^{c_α}` (argument taken in `[0, 2π)`) followed
//! by `u ↦ −(u + 1/u)` sends the domain conformally onto the upper half-plane.
//! Green's functions are conformally invariant and Brownian motion from `p`
//! leaves the half-plane with a Cauchy law centered at `Re p` with scale `Im p`,
//! so both quantities reduce to elementary formulas.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::{sector_angle, PacmanGeometry};
use crate::error::{Error, Result};
use crate::measure::ArcMeasure;

/// Points this close to the tip, or to `u = 0`, are rejected.
const SINGULAR_GUARD: f64 = 1e-9;

/// Slack when checking that a point lies in the closed domain.
const CLOSURE_SLACK: f64 = 1e-9;

/// The conformal map from a pacman domain to the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalChain {
    geometry: PacmanGeometry,
}

impl ConformalChain {
    pub fn new(geometry: PacmanGeometry) -> Self {
        ConformalChain { geometry }
    }

    pub fn geometry(&self) -> &PacmanGeometry {
        &self.geometry
    }

    /// `((z + z0)/2n)^{c_α}` into the closed upper half-disk.
    ///
    /// Points on the slit (α = 0) are read as lying on its upper side.
    pub fn to_halfdisk(&self, z: Complex64) -> Result<Complex64> {
        let g = &self.geometry;
        let w = g.from_tip(z);
        let r = w.norm();
        if r < SINGULAR_GUARD {
            return Err(Error::domain("the tip of the domain is a singular point of the map"));
        }
        let theta = sector_angle(w);
        if r > g.radius() * (1.0 + CLOSURE_SLACK) || theta > g.opening() + CLOSURE_SLACK {
            return Err(Error::domain(format!("point {z} lies outside the closed domain")));
        }
        let c = g.c_alpha();
        Ok(Complex64::from_polar((r / g.radius()).powf(c), c * theta))
    }

    pub fn to_halfplane(&self, z: Complex64) -> Result<Complex64> {
        halfdisk_to_halfplane(self.to_halfdisk(z)?)
    }

    /// Preimage on the boundary of the domain of a real point `t` of the
    /// half-plane boundary.
    pub fn boundary_point(&self, t: f64) -> Complex64 {
        let g = &self.geometry;
        let inv_c = 1.0 / g.c_alpha();
        let w = if t.abs() >= 2.0 {
            // Root of u + 1/u = −t with |u| ≤ 1.
            let modulus = 2.0 / (t.abs() + (t * t - 4.0).sqrt());
            let angle = if t < 0.0 { 0.0 } else { g.opening() };
            Complex64::from_polar(g.radius() * modulus.powf(inv_c), angle)
        } else {
            let phi = (-0.5 * t).acos();
            Complex64::from_polar(g.radius(), phi * inv_c)
        };
        w - g.z0().to_complex()
    }
}

/// `((z + z0)/2n)^{c_α}`.
pub fn map_to_halfdisk(g: &PacmanGeometry, z: Complex64) -> Result<Complex64> {
    ConformalChain::new(*g).to_halfdisk(z)
}

/// `−(u + 1/u)`, sending the upper half-disk to the upper half-plane.
pub fn halfdisk_to_halfplane(u: Complex64) -> Result<Complex64> {
    if u.norm() < SINGULAR_GUARD {
        return Err(Error::domain("u = 0 is a pole of the half-disk map"));
    }
    Ok(-(u + u.inv()))
}

/// Green's function of the upper half-plane,
/// `ln|a − conj(b)| − ln|a − b|`.
pub fn green_halfplane(a: Complex64, b: Complex64) -> Result<f64> {
    if !(a.im > 0.0 && b.im > 0.0) {
        return Err(Error::domain(format!("points {a} and {b} must lie in the upper half-plane")));
    }
    let d2 = (a - b).norm_sqr();
    if d2 == 0.0 {
        return Err(Error::singular("Green's function is infinite on the diagonal"));
    }
    // |a − conj(b)|² = |a − b|² + 4 Im a Im b.
    Ok(0.5 * (4.0 * a.im * b.im / d2).ln_1p())
}

/// Green's function `g_D(z, w)` of the pacman domain.
pub fn green_pacman(g: &PacmanGeometry, z: Complex64, w: Complex64) -> Result<f64> {
    for p in [z, w] {
        if !g.contains(p) {
            return Err(Error::domain(format!("point {p} is not strictly inside the domain")));
        }
    }
    if z == w {
        return Err(Error::singular("Green's function is infinite on the diagonal"));
    }
    let chain = ConformalChain::new(*g);
    green_halfplane(chain.to_halfplane(z)?, chain.to_halfplane(w)?)
}

/// Cauchy mass of `[lo, hi]` seen from `p` in the upper half-plane. Either
/// end may be infinite.
pub fn cauchy_mass(p: Complex64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    let x1 = (lo - p.re) / p.im;
    let x2 = (hi - p.re) / p.im;
    // arctan x2 − arctan x1 without cancellation in the tails.
    let angle = match (x1.is_finite(), x2.is_finite()) {
        (true, true) => (x2 - x1).atan2(1.0 + x1 * x2),
        (true, false) => 1f64.atan2(x1),
        (false, true) => 1f64.atan2(-x2),
        (false, false) => PI,
    };
    angle / PI
}

/// Brownian harmonic measure of each arc `I_k`, seen from `x`.
pub fn bm_arc_measure(g: &PacmanGeometry, x: Complex64) -> Result<ArcMeasure> {
    if !g.contains(x) {
        return Err(Error::domain(format!("start point {x} is not strictly inside the domain")));
    }
    let p = ConformalChain::new(*g).to_halfplane(x)?;
    let n_arcs = g.arc_count();
    let c = g.c_alpha();
    // Image of radius r on either ray sits at ∓(s + 1/s), s = (r/2n)^c.
    let edge = |k: usize| -> f64 {
        if k == 0 {
            return f64::INFINITY;
        }
        let s = ((k as f64 * g.bucket_width()) / g.radius()).min(1.0).powf(c);
        s + s.recip()
    };
    let mut probs = Vec::with_capacity(n_arcs);
    for k in 1..=n_arcs {
        let outer = edge(k - 1);
        let mass = if k < n_arcs {
            let inner = edge(k);
            cauchy_mass(p, -outer, -inner) + cauchy_mass(p, inner, outer)
        } else {
            // Both ray pieces and the circular arc form one interval.
            cauchy_mass(p, -outer, outer)
        };
        probs.push(mass);
    }
    Ok(ArcMeasure::exact(probs))
}

/// Exit point of Brownian motion from `x`, driven by one uniform variate
/// `u ∈ (0, 1)` through the inverse Cauchy law.
pub fn bm_exit_point(g: &PacmanGeometry, x: Complex64, u: f64) -> Result<Complex64> {
    if !g.contains(x) {
        return Err(Error::domain(format!("start point {x} is not strictly inside the domain")));
    }
    let chain = ConformalChain::new(*g);
    let p = chain.to_halfplane(x)?;
    let t = p.re + p.im * (PI * (u - 0.5)).tan();
    Ok(chain.boundary_point(t))
}

/// Shape of the arc exit bound,
/// `(k0 k)^{c−1} / ((k^c − k0^c)² ln^c n)`.
pub fn arc_exit_bound(g: &PacmanGeometry, k0: usize, k: usize) -> f64 {
    let c = g.c_alpha();
    let (k0f, kf) = (k0 as f64, k as f64);
    let gap = kf.powf(c) - k0f.powf(c);
    (k0f * kf).powf(c - 1.0) / (gap * gap * (g.n() as f64).ln().powf(c))
}

/// Ratio `max C(k) / min C(k)` of the prefactors `C(k) = measure(k)/bound(k)`
/// over arcs with `|k − k0| ≥ 2`, together with the prefactors themselves.
pub fn prefactor_spread(g: &PacmanGeometry, measure: &ArcMeasure, k0: usize) -> (f64, Vec<(usize, f64)>) {
    let prefactors: Vec<(usize, f64)> = (1..=measure.arc_count())
        .filter(|&k| k.abs_diff(k0) >= 2)
        .map(|k| (k, measure.arc(k) / arc_exit_bound(g, k0, k)))
        .collect();
    let (lo, hi) = prefactors
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &(_, c)| (l.min(c), h.max(c)));
    (hi / lo, prefactors)
}
