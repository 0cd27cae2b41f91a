//! Pacman domains and their lattice discretization.
//!
//! The continuous domain is the open disk sector
//! `{ r e^{iθ} : 0 < θ < 2π − α, 0 < r < 2n }` translated by `−z0`, where `z0`
//! is the lattice point nearest to `n e^{i(π − α/2)}`. The origin therefore sits
//! roughly `n` away from both the tip `−z0` and the circular part of the boundary.
//!
//! The boundary is cut into radial buckets `I_1, ..., I_N` of width `ln² n`
//! measured from the tip; the last bucket also holds the circular arc.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest supported scale. Below it `ln² n` drops under 4 and the arc
/// decomposition degenerates.
pub const MIN_SCALE: u32 = 8;

/// Points whose angle is within this many radians of a wedge edge count as
/// lying on that edge.
const ANGLE_EPS: f64 = 1e-10;

/// Unit steps of the simple random walk, in the order used for neighbor tables.
pub const STEPS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x as f64, self.y as f64)
    }

    pub fn offset(self, dx: i64, dy: i64) -> Site {
        Site::new(self.x + dx, self.y + dy)
    }

    pub fn norm(self) -> f64 {
        (self.x as f64).hypot(self.y as f64)
    }

    /// Row-major key: by `y`, then by `x`.
    fn row_major(self) -> (i64, i64) {
        (self.y, self.x)
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Continuous description of a pacman domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacmanGeometry {
    alpha: f64,
    n: u32,
    z0: Site,
    c_alpha: f64,
    arc_count: usize,
    bucket_width: f64,
}

/// Rate exponent `π / (2π − α)`.
pub fn rate_exponent(alpha: f64) -> f64 {
    PI / (2.0 * PI - alpha)
}

/// Number of boundary arcs, `⌈2n / ln² n⌉`.
pub fn arc_count(n: u32) -> usize {
    let ln = (n as f64).ln();
    (2.0 * n as f64 / (ln * ln)).ceil() as usize
}

/// Lattice point closest to `target`; ties go to the smaller `x`, then the smaller `y`.
fn nearest_lattice_point(target: Complex64) -> Site {
    let xs = [target.re.floor() as i64, target.re.ceil() as i64];
    let ys = [target.im.floor() as i64, target.im.ceil() as i64];
    let mut best: Option<(f64, Site)> = None;
    for &x in &xs {
        for &y in &ys {
            let site = Site::new(x, y);
            let d = (site.to_complex() - target).norm_sqr();
            best = match best {
                None => Some((d, site)),
                Some((bd, bs)) => {
                    if d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && site < bs) {
                        Some((d, site))
                    } else {
                        Some((bd, bs))
                    }
                }
            };
        }
    }
    best.map(|(_, s)| s).expect("four candidates")
}

impl PacmanGeometry {
    /// Builds the geometry of `D_α(n)`. Requires `0 ≤ α ≤ π` and `n ≥ 8`.
    pub fn new(alpha: f64, n: u32) -> Result<Self> {
        if !(0.0..=PI).contains(&alpha) {
            return Err(Error::domain(format!("alpha = {alpha} is outside [0, π]")));
        }
        if n < MIN_SCALE {
            return Err(Error::domain(format!("n = {n} is below the minimum scale {MIN_SCALE}")));
        }
        let nf = n as f64;
        let z0 = nearest_lattice_point(Complex64::from_polar(nf, PI - alpha / 2.0));
        let ln = nf.ln();
        Ok(PacmanGeometry {
            alpha,
            n,
            z0,
            c_alpha: rate_exponent(alpha),
            arc_count: arc_count(n),
            bucket_width: ln * ln,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn z0(&self) -> Site {
        self.z0
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    /// Number of arcs `N`.
    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    /// Radial width `ln² n` of each arc.
    pub fn bucket_width(&self) -> f64 {
        self.bucket_width
    }

    /// Outer radius `2n`.
    pub fn radius(&self) -> f64 {
        2.0 * self.n as f64
    }

    /// Opening angle `2π − α` of the sector.
    pub fn opening(&self) -> f64 {
        2.0 * PI - self.alpha
    }

    /// The re-entrant tip `−z0`.
    pub fn tip(&self) -> Complex64 {
        -self.z0.to_complex()
    }

    /// Coordinates relative to the tip, `z + z0`.
    pub fn from_tip(&self, z: Complex64) -> Complex64 {
        z + self.z0.to_complex()
    }

    /// Membership in the open domain.
    pub fn contains(&self, z: Complex64) -> bool {
        let w = self.from_tip(z);
        let r = w.norm();
        r > 0.0 && r < self.radius() && self.angle_inside(w)
    }

    /// Membership for lattice points; the radial test is done in integers.
    pub fn contains_site(&self, z: Site) -> bool {
        let wx = z.x + self.z0.x;
        let wy = z.y + self.z0.y;
        let r2 = wx * wx + wy * wy;
        let outer = 2 * self.n as i64;
        r2 > 0
            && r2 < outer * outer
            && self.angle_inside(Complex64::new(wx as f64, wy as f64))
    }

    fn angle_inside(&self, w: Complex64) -> bool {
        let theta = sector_angle(w);
        theta > ANGLE_EPS && theta < self.opening() - ANGLE_EPS
    }

    /// Arc index `k ∈ {1..N}` of a point, by its distance from the tip.
    pub fn arc_of_point(&self, z: Complex64) -> usize {
        let r = self.from_tip(z).norm();
        let k = (r / self.bucket_width).floor() as usize + 1;
        k.min(self.arc_count)
    }

    pub fn arc_index(&self, z: Site) -> usize {
        self.arc_of_point(z.to_complex())
    }

    /// Closest point of the continuous boundary (two rays and the circular
    /// arc) to `z`.
    pub fn nearest_boundary_point(&self, z: Complex64) -> Complex64 {
        let w = self.from_tip(z);
        let r = w.norm();
        let on_ray = |angle: f64| {
            let dir = Complex64::from_polar(1.0, angle);
            let t = (w * dir.conj()).re.clamp(0.0, self.radius());
            dir * t
        };
        let mut best = [on_ray(0.0), on_ray(self.opening())]
            .into_iter()
            .min_by(|a, b| (a - w).norm().total_cmp(&(b - w).norm()))
            .expect("two rays");
        if r > 0.0 {
            let theta = sector_angle(w);
            let on_circle = if theta <= self.opening() {
                w * (self.radius() / r)
            } else if theta - self.opening() < 2.0 * PI - theta {
                Complex64::from_polar(self.radius(), self.opening())
            } else {
                Complex64::new(self.radius(), 0.0)
            };
            if (on_circle - w).norm() < (best - w).norm() {
                best = on_circle;
            }
        }
        best - self.z0.to_complex()
    }

    /// Distance from `z` to the continuous boundary.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        (self.nearest_boundary_point(z) - z).norm()
    }
}

/// Argument of `w` normalized to `[0, 2π)`.
pub fn sector_angle(w: Complex64) -> f64 {
    let theta = w.im.atan2(w.re);
    if theta < 0.0 {
        theta + 2.0 * PI
    } else {
        theta
    }
}

/// A link from an interior site to one of its four lattice neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteRef {
    Interior(usize),
    Boundary(usize),
}

const BOUNDARY_BIT: u32 = 1 << 31;
const OUTSIDE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Link(u32);

impl Link {
    #[inline]
    pub(crate) fn resolve(self) -> SiteRef {
        if self.0 & BOUNDARY_BIT != 0 {
            SiteRef::Boundary((self.0 & !BOUNDARY_BIT) as usize)
        } else {
            SiteRef::Interior(self.0 as usize)
        }
    }

    #[inline]
    pub(crate) fn is_boundary(self) -> bool {
        self.0 & BOUNDARY_BIT != 0
    }

    #[inline]
    pub(crate) fn raw_index(self) -> usize {
        (self.0 & !BOUNDARY_BIT) as usize
    }
}

/// Dense label grid over the bounding box of the domain plus a one-site margin.
#[derive(Debug, Clone, PartialEq)]
struct SiteGrid {
    x_min: i64,
    y_min: i64,
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl SiteGrid {
    fn new(x_min: i64, x_max: i64, y_min: i64, y_max: i64) -> Self {
        let width = (x_max - x_min + 1) as usize;
        let height = (y_max - y_min + 1) as usize;
        SiteGrid {
            x_min,
            y_min,
            width,
            height,
            labels: vec![OUTSIDE; width * height],
        }
    }

    fn slot(&self, s: Site) -> Option<usize> {
        let dx = s.x - self.x_min;
        let dy = s.y - self.y_min;
        if dx < 0 || dy < 0 || dx as usize >= self.width || dy as usize >= self.height {
            None
        } else {
            Some(dy as usize * self.width + dx as usize)
        }
    }

    fn get(&self, s: Site) -> u32 {
        self.slot(s).map_or(OUTSIDE, |i| self.labels[i])
    }

    fn set(&mut self, s: Site, label: u32) {
        let i = self.slot(s).expect("site inside grid");
        self.labels[i] = label;
    }
}

/// Interior and boundary lattice sites of a domain.
///
/// Interior sites are numbered row-major (by `y`, then `x`); boundary sites
/// likewise in their own numbering. Boundary sites are exactly the
/// non-interior sites one step from an interior site.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDomain {
    geometry: Option<PacmanGeometry>,
    interior: Vec<Site>,
    boundary: Vec<Site>,
    boundary_arcs: Vec<usize>,
    neighbors: Vec<[Link; 4]>,
    grid: SiteGrid,
}

impl LatticeDomain {
    /// Discretizes a pacman domain: interior sites are the lattice points
    /// inside the open domain.
    pub fn pacman(geometry: &PacmanGeometry) -> Self {
        let reach = 2 * geometry.n() as i64 + 1;
        let z0 = geometry.z0();
        let mut interior = Vec::new();
        for y in (-z0.y - reach)..=(-z0.y + reach) {
            for x in (-z0.x - reach)..=(-z0.x + reach) {
                let s = Site::new(x, y);
                if geometry.contains_site(s) {
                    interior.push(s);
                }
            }
        }
        Self::build(interior, Some(*geometry))
    }

    /// Domain from an arbitrary finite set of interior sites. Such domains
    /// carry no arc decomposition.
    pub fn from_interior<I: IntoIterator<Item = Site>>(sites: I) -> Result<Self> {
        let interior: Vec<Site> = sites.into_iter().collect();
        if interior.is_empty() {
            return Err(Error::domain("a lattice domain needs at least one interior site"));
        }
        Ok(Self::build(interior, None))
    }

    fn build(mut interior: Vec<Site>, geometry: Option<PacmanGeometry>) -> Self {
        interior.sort_by_key(|s| s.row_major());
        interior.dedup();
        let (mut x_min, mut x_max, mut y_min, mut y_max) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for s in &interior {
            x_min = x_min.min(s.x);
            x_max = x_max.max(s.x);
            y_min = y_min.min(s.y);
            y_max = y_max.max(s.y);
        }
        let mut grid = SiteGrid::new(x_min - 1, x_max + 1, y_min - 1, y_max + 1);
        for (i, s) in interior.iter().enumerate() {
            grid.set(*s, i as u32);
        }

        let mut boundary = Vec::new();
        for s in &interior {
            for (dx, dy) in STEPS {
                let t = s.offset(dx, dy);
                if grid.get(t) == OUTSIDE {
                    // Mark so each boundary site is collected once.
                    grid.set(t, BOUNDARY_BIT);
                    boundary.push(t);
                }
            }
        }
        boundary.sort_by_key(|s| s.row_major());
        for (j, s) in boundary.iter().enumerate() {
            grid.set(*s, BOUNDARY_BIT | j as u32);
        }

        let neighbors = interior
            .iter()
            .map(|s| STEPS.map(|(dx, dy)| Link(grid.get(s.offset(dx, dy)))))
            .collect();

        let boundary_arcs = match &geometry {
            Some(g) => boundary.iter().map(|b| g.arc_index(*b)).collect(),
            None => Vec::new(),
        };

        LatticeDomain {
            geometry,
            interior,
            boundary,
            boundary_arcs,
            neighbors,
            grid,
        }
    }

    pub fn geometry(&self) -> Option<&PacmanGeometry> {
        self.geometry.as_ref()
    }

    pub(crate) fn require_geometry(&self) -> Result<&PacmanGeometry> {
        self.geometry
            .as_ref()
            .ok_or_else(|| Error::domain("operation needs a pacman domain with arc decomposition"))
    }

    pub fn interior(&self) -> &[Site] {
        &self.interior
    }

    pub fn boundary(&self) -> &[Site] {
        &self.boundary
    }

    pub fn interior_len(&self) -> usize {
        self.interior.len()
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }

    /// Arc index of boundary site `j`, if the domain has an arc decomposition.
    pub fn boundary_arc(&self, j: usize) -> Option<usize> {
        self.boundary_arcs.get(j).copied()
    }

    pub fn locate(&self, s: Site) -> Option<SiteRef> {
        match self.grid.get(s) {
            OUTSIDE => None,
            label => Some(Link(label).resolve()),
        }
    }

    pub fn interior_index(&self, s: Site) -> Option<usize> {
        match self.locate(s) {
            Some(SiteRef::Interior(i)) => Some(i),
            _ => None,
        }
    }

    pub(crate) fn require_interior(&self, s: Site) -> Result<usize> {
        self.interior_index(s)
            .ok_or_else(|| Error::domain(format!("site {s} is not an interior site")))
    }

    pub fn neighbors_of(&self, i: usize) -> impl Iterator<Item = SiteRef> + '_ {
        self.neighbors[i].iter().map(|l| l.resolve())
    }

    pub(crate) fn links(&self) -> &[[Link; 4]] {
        &self.neighbors
    }
}
