//! Iterative solvers for `(I − P) x = b` on the interior sites of a lattice
//! domain, where `P` is the simple-random-walk transition matrix killed on
//! leaving the domain. The operator is symmetric positive definite.

use crate::domain::{LatticeDomain, Link};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    ConjugateGradient,
    GaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Target for the max-norm residual `‖b − (I − P)x‖∞`.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::ConjugateGradient,
            residual_tolerance: 1e-10,
            max_iterations: 200_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tolerance > 0.0 && self.residual_tolerance <= 1e-6) {
            return Err(Error::domain(format!(
                "residual_tolerance = {} must lie in (0, 1e-6]",
                self.residual_tolerance
            )));
        }
        if self.max_iterations < 1000 {
            return Err(Error::domain(format!(
                "max_iterations = {} must be at least 1000",
                self.max_iterations
            )));
        }
        Ok(())
    }
}

/// `y = (I − P) x`.
fn apply(links: &[[Link; 4]], x: &[f64], y: &mut [f64]) {
    for (i, nb) in links.iter().enumerate() {
        let mut s = 0.0;
        for l in nb {
            if !l.is_boundary() {
                s += x[l.raw_index()];
            }
        }
        y[i] = x[i] - 0.25 * s;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn residual(links: &[[Link; 4]], x: &[f64], b: &[f64], r: &mut [f64]) -> f64 {
    apply(links, x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    max_abs(r)
}

/// Solves `(I − P) x = b`. A conjugate-gradient breakdown falls back to
/// Gauss–Seidel with the same budget.
pub fn solve(domain: &LatticeDomain, b: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    assert_eq!(b.len(), domain.interior_len(), "right-hand side has wrong length");
    let links = domain.links();
    match cfg.method {
        SolverMethod::GaussSeidel => gauss_seidel(links, b, cfg),
        SolverMethod::ConjugateGradient => match conjugate_gradient(links, b, cfg) {
            Err(CgFailure::Breakdown) => gauss_seidel(links, b, cfg),
            Err(CgFailure::Exhausted(e)) => Err(e),
            Ok(x) => Ok(x),
        },
    }
}

enum CgFailure {
    Breakdown,
    Exhausted(Error),
}

fn conjugate_gradient(
    links: &[[Link; 4]],
    b: &[f64],
    cfg: &SolverConfig,
) -> std::result::Result<Vec<f64>, CgFailure> {
    let n = b.len();
    let tol = cfg.residual_tolerance;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;

    loop {
        if max_abs(&r) <= tol {
            // The recursive residual drifts; confirm against the true one.
            let true_res = residual(links, &x, b, &mut r);
            if true_res <= tol {
                return Ok(x);
            }
            p.copy_from_slice(&r);
            rr = dot(&r, &r);
        }
        if iterations >= cfg.max_iterations {
            let res = residual(links, &x, b, &mut r);
            return Err(CgFailure::Exhausted(Error::Convergence {
                iterations,
                residual: res,
            }));
        }
        apply(links, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap.is_nan() || pap <= 0.0 || !pap.is_finite() {
            return Err(CgFailure::Breakdown);
        }
        let step = rr / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
        iterations += 1;
    }
}

fn gauss_seidel(links: &[[Link; 4]], b: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut res = residual(links, &x, b, &mut r);
    for sweep in 0..cfg.max_iterations {
        if res <= cfg.residual_tolerance {
            return Ok(x);
        }
        for i in 0..n {
            let mut s = 0.0;
            for l in &links[i] {
                if !l.is_boundary() {
                    s += x[l.raw_index()];
                }
            }
            x[i] = b[i] + 0.25 * s;
        }
        // Gauss–Seidel leaves a residual only from neighbors updated later in
        // the sweep; checking every few sweeps keeps the cost down.
        if sweep % 8 == 7 || sweep + 1 == cfg.max_iterations {
            res = residual(links, &x, b, &mut r);
        }
    }
    if res <= cfg.residual_tolerance {
        return Ok(x);
    }
    Err(Error::Convergence {
        iterations: cfg.max_iterations,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{PacmanGeometry, Site};

    fn plus() -> LatticeDomain {
        LatticeDomain::from_interior([
            Site::new(0, 0),
            Site::new(1, 0),
            Site::new(-1, 0),
            Site::new(0, 1),
            Site::new(0, -1),
        ])
        .unwrap()
    }

    #[test]
    fn both_methods_agree() {
        let g = PacmanGeometry::new(1.0, 8).unwrap();
        let d = LatticeDomain::pacman(&g);
        let b: Vec<f64> = (0..d.interior_len()).map(|i| ((i * 7919) % 13) as f64 / 13.0).collect();
        let cg = solve(&d, &b, &SolverConfig::default()).unwrap();
        let gs = solve(
            &d,
            &b,
            &SolverConfig {
                method: SolverMethod::GaussSeidel,
                ..Default::default()
            },
        )
        .unwrap();
        let diff = cg.iter().zip(&gs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-6, "diff {diff}");
        let mut r = vec![0.0; b.len()];
        assert!(residual(d.links(), &cg, &b, &mut r) <= 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_residual() {
        let g = PacmanGeometry::new(1.0, 32).unwrap();
        let d = LatticeDomain::pacman(&g);
        let mut b = vec![0.0; d.interior_len()];
        b[d.interior_index(Site::ORIGIN).unwrap()] = 1.0;
        let cfg = SolverConfig {
            max_iterations: 1000,
            residual_tolerance: 1e-300f64.max(f64::MIN_POSITIVE),
            ..Default::default()
        };
        match solve(&d, &b, &cfg) {
            Err(Error::Convergence { iterations, residual }) => {
                assert_eq!(iterations, 1000);
                assert!(residual > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let d = plus();
        let b = vec![0.0; 5];
        for cfg in [
            SolverConfig { residual_tolerance: 1e-3, ..Default::default() },
            SolverConfig { residual_tolerance: 0.0, ..Default::default() },
            SolverConfig { max_iterations: 10, ..Default::default() },
        ] {
            assert!(matches!(solve(&d, &b, &cfg), Err(Error::Domain(_))));
        }
    }
}
