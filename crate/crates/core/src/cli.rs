//! Command-line front end of `pacman-lab`.
//!
//! Every subcommand validates its parameters before doing any heavy work.
//! Files are written through a temporary file in the target directory and
//! renamed into place, and each run leaves a JSON manifest beside its main
//! output listing every file written with its SHA-256 digest.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{LatticeDomain, PacmanGeometry, Site};
use crate::experiments::{expdiff_estimate, expdiff_setup, rate_sweep, ExperimentConfig};
use crate::green_continuous::{bm_arc_measure, green_pacman};
use crate::green_discrete::green_solve;
use crate::plot::{arc_histogram, rate_loglog};
use crate::potential::{potential_asymptotic, PotentialKernel};
use crate::solver::SolverConfig;
use crate::walk::{walk_arc_measure, WalkRunConfig};

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "PACMAN_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "pacman-lab", version, about = "Green's functions of lattice pacman domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Discrete Green's function G(source, ·) over the whole domain.
    Field(FieldArgs),
    /// Sweep of the sup error against n, with log-log fits per alpha.
    Rate(RateArgs),
    /// Exit distribution over the boundary arcs.
    Arcs(ArcsArgs),
    /// Potential kernel at one lattice point, printed to stdout.
    Potential(PotentialArgs),
    /// Mean log-ratio of walk and Brownian exit radii.
    Expdiff(ExpdiffArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Field(_) => "field",
            Command::Rate(_) => "rate",
            Command::Arcs(_) => "arcs",
            Command::Potential(_) => "potential",
            Command::Expdiff(_) => "expdiff",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Rate(a) => Some(a.seed),
            Command::Arcs(a) => a.seed,
            Command::Expdiff(a) => Some(a.seed),
            _ => None,
        }
    }
}

/// A pair `a,b` given on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
        let parse = |t: &str| {
            let v = t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("{t:?} is not finite"))
            }
        };
        Ok(Pair(parse(a)?, parse(b)?))
    }
}

impl Pair {
    fn complex(self) -> Complex64 {
        Complex64::new(self.0, self.1)
    }

    fn site(self, flag: &str) -> Result<Site, Failure> {
        let ok = |v: f64| v.fract() == 0.0 && v.abs() < 1e15;
        if ok(self.0) && ok(self.1) {
            Ok(Site::new(self.0 as i64, self.1 as i64))
        } else {
            Err(Failure::Usage(format!("{flag}: expected integer lattice coordinates, got {},{}", self.0, self.1)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FieldArgs {
    /// Cut angle in radians, in [0, π].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long)]
    pub n: u32,
    /// Source site `x,y`.
    #[arg(long, default_value = "0,0", allow_negative_numbers = true)]
    pub source: Pair,
    /// Also fill the continuous Green's function and the difference.
    #[arg(long)]
    pub continuous: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RateArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<u32>,
    /// Per-n rows; summary rows go to the same path with extension `.summary.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ArcsMode {
    /// Exact Brownian harmonic measure.
    Bm,
    /// Monte Carlo random walk.
    Walk,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ArcsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long)]
    pub n: u32,
    /// Start point `x,y`; lattice coordinates in walk mode.
    #[arg(long, allow_negative_numbers = true)]
    pub start: Pair,
    #[arg(long, value_enum)]
    pub mode: ArcsMode,
    /// Number of walks (walk mode).
    #[arg(long)]
    pub trials: Option<u64>,
    /// RNG seed (walk mode).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PotentialArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub x: i64,
    #[arg(long, allow_negative_numbers = true)]
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExpdiffArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long)]
    pub n: u32,
    /// Walk start, a lattice site `x,y`.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Pair,
    /// Brownian start `x,y`.
    #[arg(long, allow_negative_numbers = true)]
    pub y: Pair,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

fn usage(flag: &str) -> impl FnOnce(crate::error::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{flag}: {e}"))
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// One file written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Command,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<OutputDigest>,
}

/// Path of the manifest written beside `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Path of the summary table written beside the per-n rate table.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.csv")
}

/// Writes `bytes` to `path` by way of a temporary file in the same
/// directory, so `path` never holds partial content.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Full round-trip precision (17 significant digits).
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Collects output files, then writes them and the manifest.
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { files: Vec::new() }
    }

    fn add(&mut self, path: &Path, content: String) {
        self.files.push((path.to_path_buf(), content.into_bytes()));
    }

    fn commit(self, cmd: &Command, started: u128) -> Result<(), Failure> {
        let mut digests = Vec::new();
        for (path, bytes) in &self.files {
            write_atomic(path, bytes).map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))?;
            digests.push(OutputDigest {
                path: path.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
            });
        }
        let manifest = RunManifest {
            subcommand: cmd.name().to_string(),
            parameters: cmd.clone(),
            seed: cmd.seed(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            outputs: digests,
        };
        let main = &self.files.first().expect("every run writes a file").0;
        let json = serde_json::to_string_pretty(&manifest).map_err(runtime)? + "\n";
        let path = manifest_path(main);
        write_atomic(&path, json.as_bytes()).map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))
    }
}

/// Angles typed with a handful of digits may land just outside `[0, π]`;
/// those within this distance of an endpoint are snapped onto it.
const ALPHA_SNAP: f64 = 1e-6;

fn snap_alpha(alpha: f64) -> f64 {
    if alpha > PI && alpha - PI <= ALPHA_SNAP {
        PI
    } else if alpha < 0.0 && -alpha <= ALPHA_SNAP {
        0.0
    } else {
        alpha
    }
}

fn geometry(alpha: f64, n: u32) -> Result<PacmanGeometry, Failure> {
    PacmanGeometry::new(snap_alpha(alpha), n).map_err(usage("--alpha/--n"))
}

fn run_field(a: &FieldArgs) -> Result<Outputs, Failure> {
    let g = geometry(a.alpha, a.n)?;
    let source = a.source.site("--source")?;
    if !g.contains_site(source) {
        return Err(Failure::Usage(format!("--source: {source} is not an interior site")));
    }
    let domain = LatticeDomain::pacman(&g);
    let field = green_solve(&domain, source, &SolverConfig::default()).map_err(runtime)?;
    let mut csv = String::from("x,y,G,g,diff\n");
    for (w, big_g) in field.iter() {
        let _ = write!(csv, "{},{},{}", w.x, w.y, num(big_g));
        if a.continuous && w != source {
            let small = green_pacman(&g, source.to_complex(), w.to_complex()).map_err(runtime)?;
            let _ = writeln!(csv, ",{},{}", num(small), num(big_g - std::f64::consts::FRAC_2_PI * small));
        } else {
            csv.push_str(",,\n");
        }
    }
    let mut out = Outputs::new();
    out.add(&a.out, csv);
    Ok(out)
}

fn run_rate(a: &RateArgs) -> Result<Outputs, Failure> {
    let cfg = ExperimentConfig {
        alphas: a.alphas.iter().map(|&x| snap_alpha(x)).collect(),
        ns: a.ns.clone(),
        solver: SolverConfig::default(),
        seed: a.seed,
    };
    cfg.validate().map_err(usage("--alphas/--ns"))?;
    let results = rate_sweep(&cfg).map_err(runtime)?;
    let mut rows = String::from("alpha,n,sup_error,mean_error,region_min_radius\n");
    let mut summary = String::from("alpha,slope,intercept,r2,c_alpha\n");
    let mut plot_points = Vec::new();
    for r in &results {
        for p in &r.points {
            let _ = writeln!(
                rows,
                "{},{},{},{},{}",
                num(r.alpha),
                p.n,
                num(p.sup_error),
                num(p.mean_error),
                num(p.region_min_radius)
            );
            plot_points.push((r.alpha, p.n, p.sup_error));
        }
        let _ = writeln!(
            summary,
            "{},{},{},{},{}",
            num(r.alpha),
            num(r.fit.slope),
            num(r.fit.intercept),
            num(r.fit.r_squared),
            num(r.c_alpha)
        );
    }
    let mut out = Outputs::new();
    out.add(&a.out, rows);
    out.add(&summary_path(&a.out), summary);
    if let Some(p) = &a.plot {
        out.add(p, rate_loglog(&plot_points).map_err(runtime)?);
    }
    Ok(out)
}

fn run_arcs(a: &ArcsArgs) -> Result<Outputs, Failure> {
    let g = geometry(a.alpha, a.n)?;
    let (csv, probs) = match a.mode {
        ArcsMode::Bm => {
            let x = a.start.complex();
            if !g.contains(x) {
                return Err(Failure::Usage(format!("--start: {x} is not strictly inside the domain")));
            }
            let m = bm_arc_measure(&g, x).map_err(runtime)?;
            let mut csv = String::from("k,measure\n");
            for (i, p) in m.probabilities().iter().enumerate() {
                let _ = writeln!(csv, "{},{}", i + 1, num(*p));
            }
            (csv, m.probabilities().to_vec())
        }
        ArcsMode::Walk => {
            let trials = a.trials.ok_or_else(|| Failure::Usage("--trials is required in walk mode".into()))?;
            let seed = a.seed.ok_or_else(|| Failure::Usage("--seed is required in walk mode".into()))?;
            let start = a.start.site("--start")?;
            if !g.contains_site(start) {
                return Err(Failure::Usage(format!("--start: {start} is not an interior site")));
            }
            let cfg = WalkRunConfig::for_scale(a.n, trials, seed);
            let domain = LatticeDomain::pacman(&g);
            cfg.validate_for(&domain).map_err(usage("--trials"))?;
            let m = walk_arc_measure(&domain, start, &cfg).map_err(runtime)?;
            let se = m.std_errors().expect("Monte Carlo measures carry standard errors");
            let mut csv = String::from("k,p,stderr\n");
            for (i, (p, s)) in m.probabilities().iter().zip(se).enumerate() {
                let _ = writeln!(csv, "{},{},{}", i + 1, num(*p), num(*s));
            }
            (csv, m.probabilities().to_vec())
        }
    };
    let mut out = Outputs::new();
    out.add(&a.out, csv);
    if let Some(p) = &a.plot {
        out.add(p, arc_histogram(&probs).map_err(runtime)?);
    }
    Ok(out)
}

fn run_expdiff(a: &ExpdiffArgs) -> Result<Outputs, Failure> {
    let g = geometry(a.alpha, a.n)?;
    let x = a.x.site("--x")?;
    let y = a.y.complex();
    expdiff_setup(&g, x, y).map_err(usage("--x/--y"))?;
    if a.trials == 0 {
        return Err(Failure::Usage("--trials: must be positive".into()));
    }
    let cfg = WalkRunConfig::for_scale(a.n, a.trials, a.seed);
    let r = expdiff_estimate(&g, x, y, &cfg).map_err(runtime)?;
    let csv = format!(
        "estimate,stderr,bound_scale,k0,distance_x,distance_xy\n{},{},{},{},{},{}\n",
        num(r.estimate),
        num(r.std_error),
        num(r.setup.bound_scale),
        r.setup.k0,
        num(r.setup.distance_x),
        num(r.setup.distance_xy)
    );
    let mut out = Outputs::new();
    out.add(&a.out, csv);
    Ok(out)
}

fn potential_line(a: &PotentialArgs) -> String {
    let x = Site::new(a.x, a.y);
    let exact = PotentialKernel::quadrature_only().exact(x);
    let mut line = format!("x,y,exact,asymptotic,difference\n{},{},{}", a.x, a.y, num(exact));
    match potential_asymptotic(x) {
        Ok(asym) => {
            let _ = writeln!(line, ",{},{}", num(asym), num(exact - asym));
        }
        Err(_) => line.push_str(",,\n"),
    }
    line
}

/// Runs a parsed command, returning what it printed to stdout.
pub fn execute(cmd: &Command) -> Result<String, Failure> {
    let started = now_ms();
    let outputs = match cmd {
        Command::Potential(a) => return Ok(potential_line(a)),
        Command::Field(a) => run_field(a)?,
        Command::Rate(a) => run_rate(a)?,
        Command::Arcs(a) => run_arcs(a)?,
        Command::Expdiff(a) => run_expdiff(a)?,
    };
    let listing: String = outputs.files.iter().map(|(p, _)| format!("wrote {}\n", p.display())).collect();
    outputs.commit(cmd, started)?;
    Ok(listing)
}

fn configure_workers() {
    if let Some(k) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

/// Parses `argv` (program name first), runs it and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_workers();
    match execute(&cli.command) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(f) => {
            eprintln!("pacman-lab: {f}");
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_parsing() {
        assert_eq!("3,-4".parse::<Pair>().unwrap(), Pair(3.0, -4.0));
        assert_eq!(" 1.5 , 2".parse::<Pair>().unwrap(), Pair(1.5, 2.0));
        assert!("3".parse::<Pair>().is_err());
        assert!("a,b".parse::<Pair>().is_err());
        assert!(Pair(1.5, 0.0).site("--start").is_err());
        assert_eq!(Pair(-2.0, 7.0).site("--start").unwrap(), Site::new(-2, 7));
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn alpha_snapping() {
        assert_eq!(snap_alpha(3.1415927), PI);
        assert_eq!(snap_alpha(-1e-9), 0.0);
        assert_eq!(snap_alpha(1.5707963), 1.5707963);
        assert_eq!(snap_alpha(3.2), 3.2);
    }

    #[test]
    fn paths() {
        assert_eq!(summary_path(Path::new("out/rates.csv")), PathBuf::from("out/rates.summary.csv"));
        assert_eq!(manifest_path(Path::new("a.csv")), PathBuf::from("a.csv.manifest.json"));
    }

    #[test]
    fn potential_output() {
        let origin = potential_line(&PotentialArgs { x: 0, y: 0 });
        assert_eq!(origin.lines().nth(1).unwrap(), "0,0,0.0000000000000000e0,,");
        let one = potential_line(&PotentialArgs { x: 1, y: 0 });
        let fields: Vec<&str> = one.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields.len(), 5);
        assert!((fields[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parameters_round_trip() {
        let cli = Cli::try_parse_from([
            "pacman-lab", "rate", "--alphas", "0,3.1415927", "--ns", "32,64,128", "--out", "r.csv", "--seed", "42",
        ])
        .unwrap();
        let json = serde_json::to_string(&cli.command).unwrap();
        let back: Command = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cli.command);
    }

    #[test]
    fn usage_errors() {
        let parse = |args: &[&str]| Cli::try_parse_from(std::iter::once("pacman-lab").chain(args.iter().copied()));
        assert!(parse(&["rate", "--alphas", "0", "--ns", "8", "--out", "x.csv"]).is_err());
        assert!(parse(&["field", "--alpha", "0", "--n", "16"]).is_err());
        assert!(parse(&["potential", "--x", "one", "--y", "0"]).is_err());
        assert!(parse(&["potential", "--x", "-3", "--y", "2"]).is_ok());
        let rate = parse(&["rate", "--alphas", "3.1415927", "--ns", "8", "--out", "x.csv", "--seed", "1"]).unwrap();
        assert!(matches!(execute(&rate.command), Err(Failure::Usage(_))));
    }
}
