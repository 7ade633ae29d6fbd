//! Flag definitions, the optional flat-JSON config file, and the resolution
//! step that turns raw flags into validated command inputs.
//!
//! Every per-command flag is declared `Option` so a value can come from three
//! places, in priority order: an explicit flag, a config-file key, a built-in
//! default. Config keys use the flag spelling without the leading dashes
//! (`grid-points`, `self-test`, ...). Unknown keys are rejected rather than
//! ignored, so a typo cannot silently fall back to a default.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use younglat::ensemble::CanonicalSpec;
use younglat::inversion::invert;
use younglat::{Error, MacroState, ProfileParams, Result};

#[derive(Parser)]
#[command(
    name = "younglat",
    version,
    about = "Constrained Bernoulli ensembles, their local limit law, and Young-diagram limit shapes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,

    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Seed for the sampling commands (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Residual tolerance wherever a parameter inversion runs (default 1e-12).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Flat JSON object whose keys mirror the flags; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Recover profile parameters (a, b) from a density/moment target.
    Invert(InvertArgs),
    /// Export one of the limit curves as two-column CSV.
    Profile(ProfileArgs),
    /// Draw constrained configurations and stream them as NDJSON.
    Sample(SampleArgs),
    /// Scan the joint-law Gaussian approximation error across lattice sizes.
    Llt(LltArgs),
    /// Measure how sampled height curves approach the limit shape.
    Converge(ConvergeArgs),
    /// Identify the height chart and the logarithmic chart of one state.
    Vershik(VershikArgs),
}

#[derive(Args)]
pub struct InvertArgs {
    /// Target density, strictly between 0 and 1.
    #[arg(long)]
    rho: Option<f64>,

    /// Target scaled moment, |m| < rho(1-rho)/2.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
}

#[derive(Args)]
pub struct ProfileArgs {
    /// Level parameter of the occupation profile, in (0, 1).
    #[arg(long, conflicts_with = "rho")]
    a: Option<f64>,

    /// Slope parameter of the occupation profile.
    #[arg(long, conflicts_with = "m", allow_negative_numbers = true)]
    b: Option<f64>,

    /// Target density; inverted to (a, b) together with --m.
    #[arg(long)]
    rho: Option<f64>,

    /// Target scaled moment; inverted to (a, b) together with --rho.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,

    /// Which curve to export: beta | psi | bose | fermi.
    #[arg(long)]
    curve: Option<String>,

    /// Number of grid points (default 201).
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,
}

#[derive(Args)]
pub struct SampleArgs {
    /// Lattice half-width; the site window is {-ell, ..., ell}.
    #[arg(long)]
    ell: Option<u32>,

    /// Exact particle number; pairs with --m-int.
    #[arg(long, conflicts_with = "rho")]
    k: Option<u32>,

    /// Exact weighted sum; pairs with --k.
    #[arg(long = "m-int", conflicts_with = "m", allow_negative_numbers = true)]
    m_int: Option<i64>,

    /// Target density; rounded to the nearest feasible particle number.
    #[arg(long)]
    rho: Option<f64>,

    /// Target scaled moment; rounded to the nearest feasible weighted sum.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,

    /// Sampler: exact | mcmc (default exact).
    #[arg(long)]
    method: Option<String>,

    /// Number of configurations to draw (default 100).
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
pub struct LltArgs {
    /// Comma-separated lattice sizes, e.g. 40,80,160.
    #[arg(long)]
    n: Option<String>,

    /// Occupation means: const:<p> or profile:<a>,<b>.
    #[arg(long)]
    alpha: Option<String>,

    /// Comma-separated deterministically empty sites (1-based).
    #[arg(long)]
    defects: Option<String>,
}

#[derive(Args)]
pub struct ConvergeArgs {
    /// Target density, strictly between 0 and 1.
    #[arg(long)]
    rho: Option<f64>,

    /// Target scaled moment, |m| < rho(1-rho)/2.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,

    /// Comma-separated lattice half-widths, e.g. 50,200.
    #[arg(long)]
    ell: Option<String>,

    /// Chain samples per lattice size (default 100).
    #[arg(long)]
    samples: Option<usize>,

    /// Compare the limit curve against itself instead of sampling.
    #[arg(long = "self-test")]
    self_test: bool,
}

#[derive(Args)]
pub struct VershikArgs {
    /// Target density, strictly between 0 and 1.
    #[arg(long)]
    rho: Option<f64>,

    /// Target scaled moment, |m| < rho(1-rho)/2.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,

    /// Number of grid points for both charts (default 201).
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,
}

/// Config keys accepted by every command.
const GLOBAL_KEYS: &[&str] = &["out", "seed", "tol"];

fn command_keys(cmd: &Cmd) -> &'static [&'static str] {
    match cmd {
        Cmd::Invert(_) => &["rho", "m"],
        Cmd::Profile(_) => &["a", "b", "rho", "m", "curve", "grid-points"],
        Cmd::Sample(_) => &["ell", "k", "m-int", "rho", "m", "method", "count"],
        Cmd::Llt(_) => &["n", "alpha", "defects"],
        Cmd::Converge(_) => &["rho", "m", "ell", "samples", "self-test"],
        Cmd::Vershik(_) => &["rho", "m", "grid-points"],
    }
}

/// The config file parsed into a key/value map, with keys already checked
/// against the command's flag set.
pub struct ConfigMap(serde_json::Map<String, Value>);

impl ConfigMap {
    fn empty() -> Self {
        Self(serde_json::Map::new())
    }

    fn load(path: &Path, known: &[&'static str]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::OutOfDomain(format!("config is not valid JSON: {e}")))?;
        let map = match value {
            Value::Object(m) => m,
            _ => {
                return Err(Error::OutOfDomain(
                    "config must be a flat JSON object".into(),
                ))
            }
        };
        for (key, value) in &map {
            if !known.contains(&key.as_str()) && !GLOBAL_KEYS.contains(&key.as_str()) {
                return Err(Error::OutOfDomain(format!(
                    "unknown config key `{key}` for this command"
                )));
            }
            if !(value.is_number() || value.is_string() || value.is_boolean()) {
                return Err(Error::OutOfDomain(format!(
                    "config key `{key}` must be a number, string, or boolean"
                )));
            }
        }
        Ok(Self(map))
    }

    /// Flag value if present, else the config value parsed with the same
    /// `FromStr` the flag uses, else `None`.
    fn fill<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        let Some(value) = self.0.get(key) else {
            return Ok(None);
        };
        let text = match value {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        text.parse::<T>()
            .map(Some)
            .map_err(|e| Error::OutOfDomain(format!("config key `{key}`: {e}")))
    }

    /// Boolean switches: the flag can only assert, so the config value is
    /// OR-ed in (a config `true` cannot be switched back off).
    fn fill_switch(&self, key: &str, flag: bool) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.0.get(key) {
            None => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(_) => Err(Error::OutOfDomain(format!(
                "config key `{key}` must be a boolean"
            ))),
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::OutOfDomain(format!("--{flag} is required (flag or config key)")))
}

fn parse_list<T>(flag: &str, text: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(
            part.parse::<T>()
                .map_err(|e| Error::OutOfDomain(format!("--{flag}: `{part}`: {e}")))?,
        );
    }
    if out.is_empty() {
        return Err(Error::OutOfDomain(format!(
            "--{flag} needs at least one value"
        )));
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Mcmc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Mcmc => "mcmc",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Method::Exact),
            "mcmc" => Ok(Method::Mcmc),
            other => Err(format!("method must be `exact` or `mcmc`, got `{other}`")),
        }
    }
}

#[derive(Clone, Copy)]
pub enum AlphaSpec {
    Const(f64),
    Profile(f64, f64),
}

impl FromStr for AlphaSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("alpha must be `const:<p>` or `profile:<a>,<b>`, got `{s}`");
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "const" => rest.trim().parse::<f64>().map(AlphaSpec::Const).map_err(|_| bad()),
            "profile" => {
                let (a, b) = rest.split_once(',').ok_or_else(bad)?;
                let a = a.trim().parse::<f64>().map_err(|_| bad())?;
                let b = b.trim().parse::<f64>().map_err(|_| bad())?;
                Ok(AlphaSpec::Profile(a, b))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Beta,
    Psi,
    Bose,
    Fermi,
}

impl CurveKind {
    pub fn column(self) -> &'static str {
        match self {
            CurveKind::Beta => "beta",
            CurveKind::Psi => "psi",
            CurveKind::Bose => "l",
            CurveKind::Fermi => "psi_fermi",
        }
    }
}

impl FromStr for CurveKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "beta" => Ok(CurveKind::Beta),
            "psi" => Ok(CurveKind::Psi),
            "bose" => Ok(CurveKind::Bose),
            "fermi" => Ok(CurveKind::Fermi),
            other => Err(format!(
                "curve must be one of beta, psi, bose, fermi; got `{other}`"
            )),
        }
    }
}

/// Round a macroscopic target onto the integer constraint lattice: nearest
/// integers, clamped into the feasible region.
pub fn discretize(ell: u32, rho: f64, m: f64) -> Result<CanonicalSpec> {
    if !(rho.is_finite() && (0.0..=1.0).contains(&rho)) {
        return Err(Error::OutOfDomain(format!("rho = {rho} not in [0, 1]")));
    }
    if !m.is_finite() {
        return Err(Error::OutOfDomain(format!("m = {m} not finite")));
    }
    let n = 2 * ell as i64 + 1;
    let k = (rho * n as f64).round().clamp(0.0, n as f64) as u32;
    let probe = CanonicalSpec::new(ell, k, 0)?;
    let (lo, hi) = probe.weighted_sum_bounds();
    let m_int = (m * (n * n) as f64).round().clamp(lo as f64, hi as f64) as i64;
    CanonicalSpec::new(ell, k, m_int)
}

pub struct InvertCmd {
    pub rho: f64,
    pub m: f64,
    pub tol: f64,
}

pub struct ProfileCmd {
    pub params: ProfileParams,
    pub curve: CurveKind,
    pub grid_points: usize,
}

pub struct SampleCmd {
    pub spec: CanonicalSpec,
    /// The macroscopic pair the user asked for, when given that way.
    pub target: Option<(f64, f64)>,
    pub method: Method,
    pub count: usize,
    pub seed: u64,
}

pub struct LltCmd {
    pub ns: Vec<usize>,
    pub alpha: AlphaSpec,
    pub defects: BTreeSet<usize>,
}

pub struct ConvergeCmd {
    pub rho: f64,
    pub m: f64,
    pub ells: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub self_test: bool,
}

pub struct VershikCmd {
    pub rho: f64,
    pub m: f64,
    pub grid_points: usize,
}

pub enum Action {
    Invert(InvertCmd),
    Profile(ProfileCmd),
    Sample(SampleCmd),
    Llt(LltCmd),
    Converge(ConvergeCmd),
    Vershik(VershikCmd),
}

/// Merge flags with the config file and validate everything that does not
/// need heavy computation.
pub fn resolve(cli: Cli) -> Result<(Option<PathBuf>, Action)> {
    let cfg = match &cli.config {
        Some(path) => ConfigMap::load(path, command_keys(&cli.cmd))?,
        None => ConfigMap::empty(),
    };
    let out = cfg.fill("out", cli.out)?;
    let seed = cfg.fill("seed", cli.seed)?.unwrap_or(0);
    let tol = cfg.fill("tol", cli.tol)?.unwrap_or(1e-12);

    let action = match cli.cmd {
        Cmd::Invert(a) => {
            let rho = require(cfg.fill("rho", a.rho)?, "rho")?;
            let m = require(cfg.fill("m", a.m)?, "m")?;
            Action::Invert(InvertCmd { rho, m, tol })
        }
        Cmd::Profile(a) => {
            let params = resolve_params(
                cfg.fill("a", a.a)?,
                cfg.fill("b", a.b)?,
                cfg.fill("rho", a.rho)?,
                cfg.fill("m", a.m)?,
                tol,
            )?;
            let curve = cfg.fill("curve", a.curve)?
                .map(|s| s.parse::<CurveKind>().map_err(Error::OutOfDomain))
                .transpose()?
                .unwrap_or(CurveKind::Beta);
            let grid_points = cfg.fill("grid-points", a.grid_points)?.unwrap_or(201);
            if grid_points < 2 {
                return Err(Error::GridTooCoarse {
                    got: grid_points,
                    need: 2,
                });
            }
            Action::Profile(ProfileCmd {
                params,
                curve,
                grid_points,
            })
        }
        Cmd::Sample(a) => {
            let ell = require(cfg.fill("ell", a.ell)?, "ell")?;
            let k = cfg.fill("k", a.k)?;
            let m_int = cfg.fill("m-int", a.m_int)?;
            let rho = cfg.fill("rho", a.rho)?;
            let m = cfg.fill("m", a.m)?;
            let (spec, target) = match (k, m_int, rho, m) {
                (Some(k), Some(m_int), None, None) => {
                    let spec = CanonicalSpec::new(ell, k, m_int)?;
                    if !spec.feasible() {
                        return Err(Error::InfeasibleConstraint(format!(
                            "no configuration on {} sites has K = {k} and M = {m_int}",
                            spec.n()
                        )));
                    }
                    (spec, None)
                }
                (None, None, Some(rho), Some(m)) => (discretize(ell, rho, m)?, Some((rho, m))),
                _ => {
                    return Err(Error::OutOfDomain(
                        "give either --k with --m-int, or --rho with --m".into(),
                    ))
                }
            };
            let method = cfg.fill("method", a.method)?
                .map(|s| s.parse::<Method>().map_err(Error::OutOfDomain))
                .transpose()?
                .unwrap_or(Method::Exact);
            let count = cfg.fill("count", a.count)?.unwrap_or(100);
            if count == 0 {
                return Err(Error::OutOfDomain("--count must be positive".into()));
            }
            Action::Sample(SampleCmd {
                spec,
                target,
                method,
                count,
                seed,
            })
        }
        Cmd::Llt(a) => {
            let mut ns: Vec<usize> = parse_list("n", &require(cfg.fill("n", a.n)?, "n")?)?;
            ns.sort_unstable();
            ns.dedup();
            let alpha = require(cfg.fill("alpha", a.alpha)?, "alpha")?
                .parse::<AlphaSpec>()
                .map_err(Error::OutOfDomain)?;
            let defects: BTreeSet<usize> = match cfg.fill("defects", a.defects)? {
                Some(text) => parse_list("defects", &text)?.into_iter().collect(),
                None => BTreeSet::new(),
            };
            Action::Llt(LltCmd { ns, alpha, defects })
        }
        Cmd::Converge(a) => {
            let rho = require(cfg.fill("rho", a.rho)?, "rho")?;
            let m = require(cfg.fill("m", a.m)?, "m")?;
            let mut ells: Vec<u32> = parse_list("ell", &require(cfg.fill("ell", a.ell)?, "ell")?)?;
            ells.sort_unstable();
            ells.dedup();
            let samples = cfg.fill("samples", a.samples)?.unwrap_or(100);
            if samples == 0 {
                return Err(Error::OutOfDomain("--samples must be positive".into()));
            }
            let self_test = cfg.fill_switch("self-test", a.self_test)?;
            Action::Converge(ConvergeCmd {
                rho,
                m,
                ells,
                samples,
                seed,
                tol,
                self_test,
            })
        }
        Cmd::Vershik(a) => {
            let rho = require(cfg.fill("rho", a.rho)?, "rho")?;
            let m = require(cfg.fill("m", a.m)?, "m")?;
            let grid_points = cfg.fill("grid-points", a.grid_points)?.unwrap_or(201);
            Action::Vershik(VershikCmd {
                rho,
                m,
                grid_points,
            })
        }
    };
    Ok((out, action))
}

/// Profile parameters from either the direct pair (a, b) or the macroscopic
/// pair (rho, m) via inversion.
fn resolve_params(
    a: Option<f64>,
    b: Option<f64>,
    rho: Option<f64>,
    m: Option<f64>,
    tol: f64,
) -> Result<ProfileParams> {
    match (a, b, rho, m) {
        (Some(a), Some(b), None, None) => ProfileParams::new(a, b),
        (None, None, Some(rho), Some(m)) => {
            Ok(invert(&MacroState::new(rho, m)?, tol)?.params)
        }
        _ => Err(Error::OutOfDomain(
            "give either --a with --b, or --rho with --m".into(),
        )),
    }
}
