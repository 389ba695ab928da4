//! Sweep configuration: problem, methods, step-count sequence, inner solver.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Lorenz96,
    Brusselator,
    Advection,
    Linear,
}

impl FromStr for ProblemKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lorenz96" => Ok(Self::Lorenz96),
            "brusselator" => Ok(Self::Brusselator),
            "advection" => Ok(Self::Advection),
            "linear" => Ok(Self::Linear),
            other => Err(HarnessError::Config(format!(
                "unknown problem '{other}' (expected lorenz96, brusselator, advection or linear)"
            ))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lorenz96 => "lorenz96",
            Self::Brusselator => "brusselator",
            Self::Advection => "advection",
            Self::Linear => "linear",
        })
    }
}

/// Which projection pair couples the full model to its surrogate.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ProjectionChoice {
    /// The problem's own surrogate: identity for Lorenz '96 and the linear
    /// fixture, the nested coarse grid for the PDE problems.
    #[default]
    Default,
    Identity,
    Mesh1d,
    Mesh2d,
    File(PathBuf),
}

impl FromStr for ProjectionChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(Self::Default),
            "identity" => Ok(Self::Identity),
            "mesh1d" => Ok(Self::Mesh1d),
            "mesh2d" => Ok(Self::Mesh2d),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Self::File(PathBuf::from(p))),
                _ => Err(HarnessError::Config(format!(
                    "unknown projection '{s}' (expected identity, mesh1d, mesh2d or file:<path>)"
                ))),
            },
        }
    }
}

/// One entry of the method list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MethodSpec {
    /// A coupling scheme, built in or loaded from a scheme file, by name.
    Scheme(String),
    /// Plain Runge–Kutta of the given order on the full model.
    RkFull(u32),
    /// Plain Runge–Kutta of the given order on the surrogate alone, lifted.
    RkSurrogate(u32),
}

pub const DEFAULT_RK_ORDER: u32 = 3;

pub const BUILTIN_METHODS: [&str; 5] =
    ["euler", "mri-ralston2", "spc-ralston2", "mri-ralston3", "spc-ralston3"];

impl MethodSpec {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        let s = s.trim();
        let (base, order) = match s.split_once(':') {
            Some((b, o)) => {
                let o: u32 = o.parse().map_err(|_| {
                    HarnessError::Config(format!("bad order suffix in method '{s}'"))
                })?;
                (b, Some(o))
            }
            None => (s, None),
        };
        let rk_order = |o: Option<u32>| -> Result<u32, HarnessError> {
            let o = o.unwrap_or(DEFAULT_RK_ORDER);
            if (1..=4).contains(&o) {
                Ok(o)
            } else {
                Err(HarnessError::Config(format!("no built-in Runge–Kutta method of order {o}")))
            }
        };
        match base {
            "rk-full" => Ok(Self::RkFull(rk_order(order)?)),
            "rk-surrogate" => Ok(Self::RkSurrogate(rk_order(order)?)),
            "" => Err(HarnessError::Config("empty method name".into())),
            name if order.is_none() => Ok(Self::Scheme(name.to_string())),
            _ => Err(HarnessError::Config(format!(
                "order suffix only applies to rk-full and rk-surrogate, got '{s}'"
            ))),
        }
    }

    pub fn parse_list(s: &str) -> Result<Vec<Self>, HarnessError> {
        let list: Vec<Self> = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(Self::parse)
            .collect::<Result<_, _>>()?;
        if list.is_empty() {
            return Err(HarnessError::Config("method list is empty".into()));
        }
        Ok(list)
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Scheme(n) => f.write_str(n),
            Self::RkFull(o) if *o == DEFAULT_RK_ORDER => f.write_str("rk-full"),
            Self::RkSurrogate(o) if *o == DEFAULT_RK_ORDER => f.write_str("rk-surrogate"),
            Self::RkFull(o) => write!(f, "rk-full:{o}"),
            Self::RkSurrogate(o) => write!(f, "rk-surrogate:{o}"),
        }
    }
}

/// Geometric step counts `round(n0 · ratio^k)`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSequence {
    pub n0: usize,
    pub ratio: f64,
    pub count: usize,
}

impl StepSequence {
    pub fn new(n0: usize, ratio: f64, count: usize) -> Result<Self, HarnessError> {
        let seq = Self { n0, ratio, count };
        seq.counts()?;
        Ok(seq)
    }

    pub fn counts(&self) -> Result<Vec<usize>, HarnessError> {
        if self.n0 == 0 {
            return Err(HarnessError::Config("initial step count must be positive".into()));
        }
        if !(self.ratio > 1.0) || !self.ratio.is_finite() {
            return Err(HarnessError::Config(format!(
                "step ratio must exceed 1, got {}",
                self.ratio
            )));
        }
        if self.count < 4 {
            return Err(HarnessError::Config(format!(
                "need at least 4 step sizes for slope fitting, got {}",
                self.count
            )));
        }
        let counts: Vec<usize> = (0..self.count)
            .map(|k| (self.n0 as f64 * self.ratio.powi(k as i32)).round() as usize)
            .collect();
        if counts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::Config(format!(
                "step counts {counts:?} are not strictly increasing; use a larger ratio or n0"
            )));
        }
        Ok(counts)
    }
}

impl FromStr for StepSequence {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("expected --steps n0,ratio,count, got '{s}'"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [n0, ratio, count] = parts[..] else {
            return Err(bad());
        };
        Self::new(
            n0.parse().map_err(|_| bad())?,
            ratio.parse().map_err(|_| bad())?,
            count.parse().map_err(|_| bad())?,
        )
    }
}

/// Problem selection and physical/grid parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub fine_p: Option<usize>,
    pub coarse_p: Option<usize>,
    pub surrogate_forcing: Option<f64>,
    pub t_end: Option<f64>,
    pub projection: ProjectionChoice,
}

impl ProblemConfig {
    pub fn new(kind: ProblemKind) -> Self {
        Self {
            kind,
            fine_p: None,
            coarse_p: None,
            surrogate_forcing: None,
            t_end: None,
            projection: ProjectionChoice::Default,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub problem: ProblemConfig,
    pub methods: Vec<MethodSpec>,
    pub steps: StepSequence,
    /// Inner method order; `None` picks scheme order + 1 per scheme.
    pub inner_order: Option<u32>,
    pub micro_steps: usize,
    pub jobs: usize,
    pub scheme_file: Option<PathBuf>,
    /// Discard one untimed run per method before the sweep.
    pub warm_up: bool,
    /// Compare the reference with one at twice the step size.
    pub reference_check: bool,
}

impl SweepConfig {
    /// Defaults for a problem: all five schemes plus both plain RK baselines
    /// and the problem's standard step sequence.
    pub fn for_problem(kind: ProblemKind) -> Self {
        let mut methods: Vec<MethodSpec> =
            BUILTIN_METHODS.iter().map(|m| MethodSpec::Scheme(m.to_string())).collect();
        methods.push(MethodSpec::RkFull(DEFAULT_RK_ORDER));
        methods.push(MethodSpec::RkSurrogate(DEFAULT_RK_ORDER));
        Self {
            problem: ProblemConfig::new(kind),
            methods,
            steps: default_steps(kind),
            inner_order: None,
            micro_steps: 1,
            jobs: 1,
            scheme_file: None,
            warm_up: true,
            reference_check: true,
        }
    }

    /// Reads a TOML configuration; see [`ConfigFile`].
    pub fn from_file(path: &Path) -> Result<ConfigFile, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.steps.counts()?;
        if self.methods.is_empty() {
            return Err(HarnessError::Config("method list is empty".into()));
        }
        if self.micro_steps == 0 {
            return Err(HarnessError::Config("micro-steps must be positive".into()));
        }
        if self.jobs == 0 {
            return Err(HarnessError::Config("jobs must be positive".into()));
        }
        if let Some(o) = self.inner_order {
            if !(1..=4).contains(&o) {
                return Err(HarnessError::Config(format!("no built-in inner method of order {o}")));
            }
        }
        Ok(())
    }
}

pub fn default_steps(kind: ProblemKind) -> StepSequence {
    let sqrt2 = std::f64::consts::SQRT_2;
    match kind {
        ProblemKind::Linear => StepSequence {
            n0: 10,
            ratio: 2.0,
            count: 6,
        },
        ProblemKind::Lorenz96 => StepSequence {
            n0: 10,
            ratio: 2.0,
            count: 6,
        },
        // Forward Euler on the 65² diffusion needs H below about 0.03.
        ProblemKind::Brusselator => StepSequence {
            n0: 256,
            ratio: sqrt2,
            count: 8,
        },
        // Upwind CFL on the 101² grid needs H below about 1.6e-3.
        ProblemKind::Advection => StepSequence {
            n0: 1280,
            ratio: sqrt2,
            count: 8,
        },
    }
}

/// `--config` document. Every field is optional; command-line flags win.
///
/// ```toml
/// problem = "brusselator"
/// methods = ["euler", "mri-ralston3", "rk-full:1"]
/// steps = { n0 = 20, ratio = 1.5, count = 8 }
/// inner_order = 4
/// micro_steps = 1
/// projection = "mesh2d"
/// fine_p = 65
/// coarse_p = 33
/// tend = 0.5
/// jobs = 1
/// out = "brus.csv"
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: Option<String>,
    pub methods: Option<Vec<String>>,
    pub steps: Option<StepSequence>,
    pub inner_order: Option<u32>,
    pub micro_steps: Option<usize>,
    pub projection: Option<String>,
    pub fine_p: Option<usize>,
    pub coarse_p: Option<usize>,
    pub surrogate_forcing: Option<f64>,
    pub tend: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub scheme_file: Option<PathBuf>,
    pub warm_up: Option<bool>,
    pub reference_check: Option<bool>,
}
