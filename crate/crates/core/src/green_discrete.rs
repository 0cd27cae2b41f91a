//! Discrete Green's function and Dirichlet problems for the simple random walk.
//!
//! `G_D(z, w)` is the expected number of visits to `w` before the walk from
//! `z` leaves `D`. As a function of `z` it solves
//! `(1/4) Σ_e G(z + e, w) − G(z, w) = −δ_w(z)` with zero boundary values.

use crate::domain::{LatticeDomain, Site, SiteRef};
use crate::error::{Error, Result};
use crate::potential::PotentialKernel;
use crate::solver::{self, SolverConfig};

/// One real value per interior site of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<'a> {
    domain: &'a LatticeDomain,
    values: Vec<f64>,
}

impl<'a> ScalarField<'a> {
    pub fn new(domain: &'a LatticeDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.interior_len() {
            return Err(Error::domain(format!(
                "field has {} values for {} interior sites",
                values.len(),
                domain.interior_len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at interior site {}", domain.interior()[i])));
        }
        Ok(ScalarField { domain, values })
    }

    pub fn domain(&self) -> &'a LatticeDomain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a site; boundary sites read as zero, other sites as `None`.
    pub fn get(&self, s: Site) -> Option<f64> {
        match self.domain.locate(s)? {
            SiteRef::Interior(i) => Some(self.values[i]),
            SiteRef::Boundary(_) => Some(0.0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.domain.interior().iter().copied().zip(self.values.iter().copied())
    }

    /// `max_z |self(z) − other(z)|`.
    pub fn max_abs_diff(&self, other: &ScalarField<'_>) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "fields over different domains");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `G_D(·, w)` by a single linear solve.
pub fn green_solve<'a>(domain: &'a LatticeDomain, w: Site, cfg: &SolverConfig) -> Result<ScalarField<'a>> {
    let source = domain.require_interior(w)?;
    let mut rhs = vec![0.0; domain.interior_len()];
    rhs[source] = 1.0;
    let values = solver::solve(domain, &rhs, cfg)?;
    ScalarField::new(domain, values)
}

/// Discrete-harmonic extension of boundary data `h` (indexed like
/// `domain.boundary()`), i.e. `z ↦ E^z[h(S_T)]`.
pub fn dirichlet_solve<'a>(domain: &'a LatticeDomain, h: &[f64], cfg: &SolverConfig) -> Result<ScalarField<'a>> {
    if h.len() != domain.boundary_len() {
        return Err(Error::domain(format!(
            "boundary data has {} values for {} boundary sites",
            h.len(),
            domain.boundary_len()
        )));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("boundary data must be finite"));
    }
    let rhs: Vec<f64> = (0..domain.interior_len())
        .map(|i| {
            0.25 * domain
                .neighbors_of(i)
                .filter_map(|r| match r {
                    SiteRef::Boundary(j) => Some(h[j]),
                    SiteRef::Interior(_) => None,
                })
                .sum::<f64>()
        })
        .collect();
    let values = solver::solve(domain, &rhs, cfg)?;
    ScalarField::new(domain, values)
}

/// `G_D(z, w) = E^z[a(S_T − w)] − a(z − w)`, evaluating `a` by quadrature.
pub fn green_via_potential<'a>(domain: &'a LatticeDomain, w: Site, cfg: &SolverConfig) -> Result<ScalarField<'a>> {
    green_via_potential_with(domain, w, &PotentialKernel::quadrature_only(), cfg)
}

pub fn green_via_potential_with<'a>(
    domain: &'a LatticeDomain,
    w: Site,
    kernel: &PotentialKernel,
    cfg: &SolverConfig,
) -> Result<ScalarField<'a>> {
    domain.require_interior(w)?;
    let rel = |s: &Site| Site::new(s.x - w.x, s.y - w.y);
    let h: Vec<f64> = domain.boundary().iter().map(|b| kernel.value(rel(b))).collect();
    let extension = dirichlet_solve(domain, &h, cfg)?;
    let values = extension
        .iter()
        .map(|(z, v)| v - kernel.value(rel(&z)))
        .collect();
    ScalarField::new(domain, values)
}

/// Discrete harmonic measure of each arc `I_1..I_N` seen from `start`, one
/// Dirichlet solve per arc with indicator data. Entry `k − 1` holds arc `k`.
pub fn arc_harmonic_measure(domain: &LatticeDomain, start: Site, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let g = domain.require_geometry()?;
    let i = domain.require_interior(start)?;
    (1..=g.arc_count())
        .map(|k| {
            let h: Vec<f64> = (0..domain.boundary_len())
                .map(|j| if domain.boundary_arc(j) == Some(k) { 1.0 } else { 0.0 })
                .collect();
            Ok(dirichlet_solve(domain, &h, cfg)?.values[i])
        })
        .collect()
}
