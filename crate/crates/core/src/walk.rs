//! Monte Carlo simple random walk: exit sampling, arc exit frequencies and
//! visit-count estimates of the Green's function.
//!
//! Trial `t` of a run draws from ChaCha8 seeded with the run seed on stream
//! `t`, so results do not depend on how trials are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{LatticeDomain, Site};
use crate::error::{Error, Result};
use crate::measure::ArcMeasure;

/// Default step budget factor: `100·(2n)²` steps per trial.
pub const BUDGET_FACTOR: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkRunConfig {
    pub trials: u64,
    pub seed: u64,
    pub max_steps_per_trial: u64,
}

/// `100·(2n)²`.
pub fn default_step_budget(n: u32) -> u64 {
    let d = 2 * n as u64;
    BUDGET_FACTOR * d * d
}

impl WalkRunConfig {
    /// Config with the default step budget for scale `n`.
    pub fn for_scale(n: u32, trials: u64, seed: u64) -> Self {
        WalkRunConfig {
            trials,
            seed,
            max_steps_per_trial: default_step_budget(n),
        }
    }

    /// Checks positivity, and the budget floor when the domain has a scale.
    pub fn validate_for(&self, domain: &LatticeDomain) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials must be positive"));
        }
        if self.max_steps_per_trial == 0 {
            return Err(Error::domain("max_steps_per_trial must be positive"));
        }
        if let Some(g) = domain.geometry() {
            let floor = default_step_budget(g.n());
            if self.max_steps_per_trial < floor {
                return Err(Error::domain(format!(
                    "max_steps_per_trial = {} is below 100·(2n)² = {floor}",
                    self.max_steps_per_trial
                )));
            }
        }
        Ok(())
    }
}

/// RNG for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Outcome of one walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitSample {
    /// First site visited outside the interior.
    pub exit: Site,
    /// Index of `exit` in the domain's boundary list.
    pub boundary_index: usize,
    /// Times the walk occupied the start site, counting time 0.
    pub visits: u64,
    pub steps: u64,
}

/// Runs a walk from `start` until it leaves the interior.
pub fn simulate_exit<R: RngCore>(
    domain: &LatticeDomain,
    start: Site,
    max_steps: u64,
    rng: &mut R,
) -> Result<ExitSample> {
    let i = domain.require_interior(start)?;
    let (boundary_index, hits, steps) = walk_from(domain, i, i, max_steps, rng)?;
    Ok(ExitSample {
        exit: domain.boundary()[boundary_index],
        boundary_index,
        visits: hits,
        steps,
    })
}

/// Walks from interior index `from`; returns the boundary index hit, the
/// number of times `target` was occupied, and the number of steps.
pub(crate) fn walk_from<R: RngCore>(
    domain: &LatticeDomain,
    from: usize,
    target: usize,
    max_steps: u64,
    rng: &mut R,
) -> Result<(usize, u64, u64)> {
    let links = domain.links();
    let mut here = from;
    let mut hits = 0u64;
    let mut steps = 0u64;
    let mut bits = 0u64;
    let mut left = 0u32;
    loop {
        if here == target {
            hits += 1;
        }
        if steps == max_steps {
            return Err(Error::StepBudget { budget: max_steps });
        }
        if left == 0 {
            bits = rng.next_u64();
            left = 32;
        }
        let link = links[here][(bits & 3) as usize];
        bits >>= 2;
        left -= 1;
        steps += 1;
        if link.is_boundary() {
            return Ok((link.raw_index(), hits, steps));
        }
        here = link.raw_index();
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl McEstimate {
    pub(crate) fn from_sums(sum: f64, sum_sq: f64, trials: u64) -> Self {
        let t = trials as f64;
        let mean = sum / t;
        let var = if trials > 1 {
            ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            estimate: mean,
            std_error: (var / t).sqrt(),
            trials,
        }
    }
}

/// Runs every trial of `cfg` in parallel, folding each into an accumulator;
/// accumulators are merged with an integer sum, so the result does not depend
/// on scheduling.
fn run_trials<T, F>(cfg: &WalkRunConfig, zero: T, trial: F, merge: fn(T, T) -> T) -> Result<T>
where
    T: Send + Sync + Clone,
    F: Fn(&mut T, &mut ChaCha8Rng) -> Result<()> + Sync,
{
    (0..cfg.trials)
        .into_par_iter()
        .try_fold(
            || zero.clone(),
            |mut acc, t| {
                trial(&mut acc, &mut trial_rng(cfg.seed, t))?;
                Ok(acc)
            },
        )
        .try_reduce(|| zero.clone(), |a, b| Ok(merge(a, b)))
}

/// Empirical exit distribution over arcs from `x`.
pub fn walk_arc_measure(domain: &LatticeDomain, x: Site, cfg: &WalkRunConfig) -> Result<ArcMeasure> {
    let g = domain.require_geometry()?;
    cfg.validate_for(domain)?;
    let i = domain.require_interior(x)?;
    let n_arcs = g.arc_count();
    let counts = run_trials(
        cfg,
        vec![0u64; n_arcs],
        |counts, rng| {
            let (b, _, _) = walk_from(domain, i, i, cfg.max_steps_per_trial, rng)?;
            let k = domain.boundary_arc(b).expect("pacman boundary sites carry arcs");
            counts[k - 1] += 1;
            Ok(())
        },
        |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            a
        },
    )?;
    Ok(ArcMeasure::from_counts(&counts, cfg.trials))
}

/// Estimate of `G(w, w)` from the number of visits to `w`.
pub fn green_mc(domain: &LatticeDomain, w: Site, cfg: &WalkRunConfig) -> Result<McEstimate> {
    green_mc_from(domain, w, w, cfg)
}

/// Estimate of `G(start, w)` from the number of visits to `w`.
pub fn green_mc_from(domain: &LatticeDomain, start: Site, w: Site, cfg: &WalkRunConfig) -> Result<McEstimate> {
    cfg.validate_for(domain)?;
    let from = domain.require_interior(start)?;
    let target = domain.require_interior(w)?;
    let (sum, sum_sq) = run_trials(
        cfg,
        (0u128, 0u128),
        |acc, rng| {
            let (_, hits, _) = walk_from(domain, from, target, cfg.max_steps_per_trial, rng)?;
            let h = hits as u128;
            acc.0 += h;
            acc.1 += h * h;
            Ok(())
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok(McEstimate::from_sums(sum as f64, sum_sq as f64, cfg.trials))
}

/// Mean number of steps before exit from `start`.
pub fn mean_exit_steps(domain: &LatticeDomain, start: Site, cfg: &WalkRunConfig) -> Result<McEstimate> {
    cfg.validate_for(domain)?;
    let from = domain.require_interior(start)?;
    let (sum, sum_sq) = run_trials(
        cfg,
        (0u128, 0u128),
        |acc, rng| {
            let (_, _, steps) = walk_from(domain, from, from, cfg.max_steps_per_trial, rng)?;
            let s = steps as u128;
            acc.0 += s;
            acc.1 += s * s;
            Ok(())
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    )?;
    Ok(McEstimate::from_sums(sum as f64, sum_sq as f64, cfg.trials))
}

/// Exit sites of every trial, in trial order.
pub fn exit_samples(domain: &LatticeDomain, start: Site, cfg: &WalkRunConfig) -> Result<Vec<ExitSample>> {
    cfg.validate_for(domain)?;
    domain.require_interior(start)?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| simulate_exit(domain, start, cfg.max_steps_per_trial, &mut trial_rng(cfg.seed, t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PacmanGeometry;
    use crate::green_discrete::green_solve;
    use crate::solver::SolverConfig;

    fn plus_shape() -> LatticeDomain {
        LatticeDomain::from_interior([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)].map(|(x, y)| Site::new(x, y))).unwrap()
    }

    fn cfg(trials: u64, seed: u64) -> WalkRunConfig {
        WalkRunConfig {
            trials,
            seed,
            max_steps_per_trial: 1_000_000,
        }
    }

    #[test]
    fn single_site_exits_in_one_step() {
        let d = LatticeDomain::from_interior([Site::ORIGIN]).unwrap();
        for t in 0..20 {
            let s = simulate_exit(&d, Site::ORIGIN, 10, &mut trial_rng(3, t)).unwrap();
            assert_eq!((s.steps, s.visits), (1, 1));
            assert_eq!(s.exit.norm(), 1.0);
        }
        let e = green_mc(&d, Site::ORIGIN, &cfg(1000, 1)).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn plus_shape_visits() {
        let d = plus_shape();
        let e = green_mc(&d, Site::ORIGIN, &cfg(100_000, 11)).unwrap();
        assert!((e.estimate - 4.0 / 3.0).abs() <= 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn runs_are_deterministic() {
        let g = PacmanGeometry::new(0.0, 16).unwrap();
        let d = LatticeDomain::pacman(&g);
        let c = WalkRunConfig::for_scale(16, 2000, 7);
        let a = walk_arc_measure(&d, Site::ORIGIN, &c).unwrap();
        let b = walk_arc_measure(&d, Site::ORIGIN, &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 1.0);
        assert_eq!(exit_samples(&d, Site::ORIGIN, &c).unwrap(), exit_samples(&d, Site::ORIGIN, &c).unwrap());
        let other = walk_arc_measure(&d, Site::ORIGIN, &WalkRunConfig { seed: 8, ..c }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn budget_is_enforced() {
        let g = PacmanGeometry::new(PI_HALF, 8).unwrap();
        let d = LatticeDomain::pacman(&g);
        let short = WalkRunConfig {
            trials: 10,
            seed: 0,
            max_steps_per_trial: 100,
        };
        assert!(matches!(walk_arc_measure(&d, Site::ORIGIN, &short), Err(Error::Domain(_))));
        let mut rng = trial_rng(0, 0);
        assert!(matches!(
            simulate_exit(&d, Site::ORIGIN, 2, &mut rng),
            Err(Error::StepBudget { budget: 2 })
        ));
        assert!(simulate_exit(&d, Site::new(1000, 0), 2, &mut rng).is_err());
    }

    const PI_HALF: f64 = std::f64::consts::FRAC_PI_2;

    #[test]
    fn green_matches_solver_on_small_pacman() {
        let g = PacmanGeometry::new(std::f64::consts::PI, 8).unwrap();
        let d = LatticeDomain::pacman(&g);
        let exact = green_solve(&d, Site::ORIGIN, &SolverConfig::default()).unwrap().get(Site::ORIGIN).unwrap();
        let e = green_mc(&d, Site::ORIGIN, &WalkRunConfig::for_scale(8, 100_000, 3)).unwrap();
        assert!((e.estimate - exact).abs() <= 3.0 * e.std_error, "{e:?} vs {exact}");
    }

    #[test]
    fn exit_time_scales_quadratically() {
        let means: Vec<f64> = [8u32, 16, 32]
            .iter()
            .map(|&n| {
                let g = PacmanGeometry::new(PI_HALF, n).unwrap();
                let d = LatticeDomain::pacman(&g);
                mean_exit_steps(&d, Site::ORIGIN, &WalkRunConfig::for_scale(n, 4000, 1)).unwrap().estimate
            })
            .collect();
        for w in means.windows(2) {
            let r = w[1] / w[0];
            assert!((2.5..=6.0).contains(&r), "{means:?}");
        }
    }
}
