//! Desk-scale comparison of the discrete and continuous Green's functions:
//! error fields, rate sweeps with log-log fits, and the exit-radius
//! discrepancy estimator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::domain::{LatticeDomain, PacmanGeometry, Site, MIN_SCALE};
use crate::error::{Error, Result};
use crate::green_continuous::{bm_exit_point, green_pacman};
use crate::green_discrete::green_solve;
use crate::solver::SolverConfig;
use crate::walk::{trial_rng, walk_from, McEstimate, WalkRunConfig};

/// Smallest `|w|` kept in the error region, `(n/ln² n)^{c_α/2}`.
pub fn region_min_radius(g: &PacmanGeometry) -> f64 {
    let n = g.n() as f64;
    (n / g.bucket_width()).powf(0.5 * g.c_alpha())
}

/// Rate scale `ln² n / n`.
pub fn rate_scale(n: u32) -> f64 {
    let nf = n as f64;
    nf.ln().powi(2) / nf
}

/// `|G(w) − (2/π) g(0, w)|` at the lattice points of the error region.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorField {
    pub region_min_radius: f64,
    pub points: Vec<(Site, f64)>,
}

impl ErrorField {
    pub fn sup(&self) -> f64 {
        self.points.iter().fold(0.0, |m, &(_, e)| m.max(e))
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().map(|&(_, e)| e).sum::<f64>() / self.points.len() as f64
    }
}

/// One solve of `G(0, ·)` compared with the continuous Green's function over
/// `|w| ≥ (n/ln² n)^{c_α/2}`.
pub fn error_field(g: &PacmanGeometry, cfg: &SolverConfig) -> Result<ErrorField> {
    let domain = LatticeDomain::pacman(g);
    let field = green_solve(&domain, Site::ORIGIN, cfg)?;
    let r_min = region_min_radius(g);
    let origin = Complex64::new(0.0, 0.0);
    let points = field
        .iter()
        .filter(|(w, _)| *w != Site::ORIGIN && w.norm() >= r_min)
        .map(|(w, big_g)| Ok((w, (big_g - 2.0 / PI * green_pacman(g, origin, w.to_complex())?).abs())))
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(Error::domain("the error region contains no lattice points"));
    }
    Ok(ErrorField {
        region_min_radius: r_min,
        points,
    })
}

/// Least-squares fit of `ln value` against `ln scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(s, v)) = points.iter().find(|&&(s, v)| !(s > 0.0 && v > 0.0) || !s.is_finite() || !v.is_finite()) {
        return Err(Error::domain(format!("log-log fit needs positive finite data, got ({s}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all scales are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alphas: Vec<f64>,
    pub ns: Vec<u32>,
    pub solver: SolverConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alphas: vec![0.0, PI / 2.0, PI],
            ns: vec![32, 64, 128, 256],
            solver: SolverConfig::default(),
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::domain("no alphas given"));
        }
        for &a in &self.alphas {
            PacmanGeometry::new(a, MIN_SCALE)?;
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < MIN_SCALE) {
            return Err(Error::domain(format!("n = {n} is below the minimum scale {MIN_SCALE}")));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("ns must be strictly increasing"));
        }
        if self.ns.len() < 3 {
            return Err(Error::Fit(format!("need at least 3 scales, got {}", self.ns.len())));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub n: u32,
    pub sup_error: f64,
    pub mean_error: f64,
    pub region_min_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFitResult {
    pub alpha: f64,
    pub c_alpha: f64,
    pub points: Vec<RatePoint>,
    pub fit: LogLogFit,
}

/// Error fields for every `(α, n)`, fitted per `α` against `ln² n / n`.
pub fn rate_sweep(cfg: &ExperimentConfig) -> Result<Vec<RateFitResult>> {
    cfg.validate()?;
    let tasks: Vec<(usize, u32)> = (0..cfg.alphas.len())
        .flat_map(|a| cfg.ns.iter().map(move |&n| (a, n)))
        .collect();
    let fields = tasks
        .par_iter()
        .map(|&(a, n)| {
            let g = PacmanGeometry::new(cfg.alphas[a], n)?;
            let f = error_field(&g, &cfg.solver)?;
            Ok(RatePoint {
                n,
                sup_error: f.sup(),
                mean_error: f.mean(),
                region_min_radius: f.region_min_radius,
            })
        })
        .collect::<Vec<Result<RatePoint>>>();
    let mut results = Vec::with_capacity(cfg.alphas.len());
    for (a, &alpha) in cfg.alphas.iter().enumerate() {
        let points = tasks
            .iter()
            .zip(&fields)
            .filter(|((ta, _), _)| *ta == a)
            .map(|(_, r)| r.clone())
            .collect::<Result<Vec<_>>>()?;
        let data: Vec<(f64, f64)> = points.iter().map(|p| (rate_scale(p.n), p.sup_error)).collect();
        let fit = fit_loglog(&data)?;
        results.push(RateFitResult {
            alpha,
            c_alpha: PacmanGeometry::new(alpha, MIN_SCALE)?.c_alpha(),
            points,
            fit,
        });
    }
    Ok(results)
}

/// Start point at distance `ln n` from the middle of the ray piece of arc
/// `k0`, above the first ray.
pub fn near_arc_point(g: &PacmanGeometry, k0: usize) -> Complex64 {
    let l = g.bucket_width();
    let inner = (k0 as f64 - 1.0) * l;
    let outer = (k0 as f64 * l).min(g.radius());
    g.tip() + Complex64::new(0.5 * (inner + outer), (g.n() as f64).ln())
}

/// Lattice point nearest [`near_arc_point`].
pub fn near_arc_site(g: &PacmanGeometry, k0: usize) -> Site {
    let z = near_arc_point(g, k0);
    Site::new(z.re.round() as i64, z.im.round() as i64)
}

/// Start configuration of [`expdiff_estimate`] after its preconditions
/// were checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDiffSetup {
    /// Arc of the boundary point nearest to `x`.
    pub k0: usize,
    pub distance_x: f64,
    pub distance_xy: f64,
    /// `k0^{c_α−1} n^{−c_α} ln^{c_α+1} n`.
    pub bound_scale: f64,
}

/// Checks `x` interior, `y` inside, `d(x, ∂D) ≤ 10 ln n` and
/// `|x − y| ≤ 10 ln n`.
pub fn expdiff_setup(g: &PacmanGeometry, x: Site, y: Complex64) -> Result<ExpDiffSetup> {
    if !g.contains_site(x) {
        return Err(Error::domain(format!("x = {x} is not an interior site")));
    }
    if !g.contains(y) {
        return Err(Error::domain(format!("y = {y} is not strictly inside the domain")));
    }
    let ln_n = (g.n() as f64).ln();
    let xc = x.to_complex();
    let distance_x = g.boundary_distance(xc);
    let distance_xy = (xc - y).norm();
    if distance_x > 10.0 * ln_n {
        return Err(Error::domain(format!(
            "d(x, boundary) = {distance_x} exceeds 10 ln n = {}",
            10.0 * ln_n
        )));
    }
    if distance_xy > 10.0 * ln_n {
        return Err(Error::domain(format!("|x − y| = {distance_xy} exceeds 10 ln n = {}", 10.0 * ln_n)));
    }
    let k0 = g.arc_of_point(g.nearest_boundary_point(xc));
    let c = g.c_alpha();
    Ok(ExpDiffSetup {
        k0,
        distance_x,
        distance_xy,
        bound_scale: (k0 as f64).powf(c - 1.0) * (g.n() as f64).powf(-c) * ln_n.powf(c + 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDiff {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub setup: ExpDiffSetup,
}

/// Mean of `|ln(|S_T| / |B_τ|)|` for a walk from `x` and an independent
/// Brownian motion from `y`, under the preconditions of [`expdiff_setup`].
/// The Brownian exit point is sampled exactly through the inverse Cauchy law.
pub fn expdiff_estimate(g: &PacmanGeometry, x: Site, y: Complex64, cfg: &WalkRunConfig) -> Result<ExpDiff> {
    let setup = expdiff_setup(g, x, y)?;
    let domain = LatticeDomain::pacman(g);
    cfg.validate_for(&domain)?;
    let from = domain.require_interior(x)?;
    let samples = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let (b, _, _) = walk_from(&domain, from, from, cfg.max_steps_per_trial, &mut rng)?;
            let s = domain.boundary()[b].norm();
            let bm = bm_exit_point(g, y, rng.random::<f64>())?.norm();
            Ok((s / bm).ln().abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let sum: f64 = samples.iter().sum();
    let sum_sq: f64 = samples.iter().map(|v| v * v).sum();
    let mc = McEstimate::from_sums(sum, sum_sq, cfg.trials);
    Ok(ExpDiff {
        estimate: mc.estimate,
        std_error: mc.std_error,
        trials: cfg.trials,
        setup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_power_law() {
        let pts: Vec<(f64, f64)> = [32u32, 64, 128, 256]
            .iter()
            .map(|&n| (rate_scale(n), rate_scale(n).powf(0.7)))
            .collect();
        let f = fit_loglog(&pts).unwrap();
        assert!((f.slope - 0.7).abs() < 1e-10);
        assert!(f.intercept.abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_examples() {
        let f = fit_loglog(&[(1.0, 3.0), (2.0, 3.0), (5.0, 3.0)]).unwrap();
        assert_eq!(f.slope, 0.0);
        let f = fit_loglog(&[(1.0, 2.0), (2.0, 4.0), (4.0, 8.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14);
        assert!((f.intercept - 2f64.ln()).abs() < 1e-14);
        let noisy = fit_loglog(&[(1.0, 1.0), (2.0, 3.0), (3.0, 2.0), (4.0, 5.0)]).unwrap();
        assert!((0.0..=1.0).contains(&noisy.r_squared));
        assert!(matches!(fit_loglog(&[(1.0, 1.0), (2.0, 2.0)]), Err(Error::Fit(_))));
        assert!(matches!(fit_loglog(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::Domain(_))));
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = |ns: Vec<u32>| ExperimentConfig { ns, ..Default::default() }.validate();
        assert!(matches!(bad(vec![8]), Err(Error::Fit(_))));
        assert!(bad(vec![32, 16, 64]).is_err());
        assert!(bad(vec![4, 16, 64]).is_err());
        let alphas = ExperimentConfig {
            alphas: vec![4.0],
            ..Default::default()
        };
        assert!(alphas.validate().is_err());
    }

    #[test]
    fn error_field_is_finite_and_decays() {
        let cfg = SolverConfig::default();
        let g32 = PacmanGeometry::new(PI, 32).unwrap();
        let f32 = error_field(&g32, &cfg).unwrap();
        assert!(f32.points.iter().all(|&(w, e)| e >= 0.0 && e.is_finite() && w.norm() >= f32.region_min_radius));
        assert!(f32.points.iter().all(|&(w, _)| w != Site::ORIGIN));
        let f64_ = error_field(&PacmanGeometry::new(PI, 64).unwrap(), &cfg).unwrap();
        assert!(f64_.sup() < f32.sup());
    }

    #[test]
    fn expdiff_preconditions() {
        let g = PacmanGeometry::new(PI, 64).unwrap();
        let cfg = WalkRunConfig::for_scale(64, 100, 1);
        // The origin is about n away from the boundary.
        assert!(matches!(
            expdiff_estimate(&g, Site::ORIGIN, Complex64::new(0.0, 0.0), &cfg),
            Err(Error::Domain(_))
        ));
        let x = near_arc_site(&g, 2);
        let far = x.to_complex() + Complex64::new(0.0, 60.0);
        assert!(matches!(expdiff_estimate(&g, x, far, &cfg), Err(Error::Domain(_))));
        let r = expdiff_estimate(&g, x, x.to_complex(), &cfg).unwrap();
        assert_eq!(r.setup.k0, 2);
        assert!(r.estimate >= 0.0 && r.std_error >= 0.0);
    }

    #[test]
    fn expdiff_standard_error_scaling() {
        let g = PacmanGeometry::new(PI, 64).unwrap();
        let x = near_arc_site(&g, 4);
        let y = x.to_complex();
        let a = expdiff_estimate(&g, x, y, &WalkRunConfig::for_scale(64, 20_000, 9)).unwrap();
        let b = expdiff_estimate(&g, x, y, &WalkRunConfig::for_scale(64, 40_000, 9)).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() <= 0.1, "ratio {ratio}");
    }
}
