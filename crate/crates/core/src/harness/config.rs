use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{step_count, SchemeConfig};
use crate::metrics::NormKind;
use crate::problems::Problem;

/// Version of the configuration schema understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Top-level configuration document: global settings and a list of
/// `[[experiment]]` tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Seed for randomized diagnostics.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

impl ConfigFile {
    pub fn new(experiments: Vec<ExperimentConfig>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            out_dir: None,
            workers: None,
            seed: None,
            experiments,
        }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!(
                    "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                    cfg.schema_version
                ),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        let mut names = std::collections::HashSet::new();
        for e in &self.experiments {
            if !names.insert(e.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate experiment name `{}`", e.name)));
            }
            e.validate()?;
        }
        Ok(())
    }
}

/// Problem selector with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Bernoulli {
        lambda1: f64,
        lambda2: f64,
        m: u32,
    },
    Fisher1d {
        diffusion: f64,
        rate: f64,
        capacity: f64,
        domain: (f64, f64),
        dx: f64,
    },
    Fisher2d {
        diffusion: (f64, f64),
        rate: f64,
        capacity: f64,
        domain: (f64, f64),
        dx: f64,
    },
    Fisher3d {
        diffusion: (f64, f64, f64),
        rate: f64,
        capacity: f64,
        domain: (f64, f64),
        dx: f64,
    },
}

impl ProblemSpec {
    /// Grid spacing, or `None` for ODE problems.
    pub fn dx(&self) -> Option<f64> {
        match self {
            ProblemSpec::Bernoulli { .. } => None,
            ProblemSpec::Fisher1d { dx, .. } | ProblemSpec::Fisher2d { dx, .. } | ProblemSpec::Fisher3d { dx, .. } => {
                Some(*dx)
            }
        }
    }

    /// The same problem on a grid of spacing `new_dx` (ODEs are unchanged).
    pub fn with_dx(&self, new_dx: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ProblemSpec::Bernoulli { .. } => {}
            ProblemSpec::Fisher1d { dx, .. } | ProblemSpec::Fisher2d { dx, .. } | ProblemSpec::Fisher3d { dx, .. } => {
                *dx = new_dx
            }
        }
        out
    }

    pub fn build(&self) -> Result<Problem> {
        match *self {
            ProblemSpec::Bernoulli { lambda1, lambda2, m } => Problem::bernoulli(lambda1, lambda2, m),
            ProblemSpec::Fisher1d {
                diffusion,
                rate,
                capacity,
                domain,
                dx,
            } => Problem::fisher_1d(diffusion, rate, capacity, domain, dx),
            ProblemSpec::Fisher2d {
                diffusion,
                rate,
                capacity,
                domain,
                dx,
            } => Problem::fisher_2d(diffusion.0, diffusion.1, rate, capacity, domain, dx),
            ProblemSpec::Fisher3d {
                diffusion,
                rate,
                capacity,
                domain,
                dx,
            } => Problem::fisher_3d([diffusion.0, diffusion.1, diffusion.2], rate, capacity, domain, dx),
        }
    }

    /// Problem label used in the output tables, including the final time.
    pub fn label(&self, t_end: f64) -> String {
        match self {
            ProblemSpec::Bernoulli { lambda1, lambda2, m } => {
                format!("bernoulli[lambda1={lambda1};lambda2={lambda2};m={m};T={t_end}]")
            }
            ProblemSpec::Fisher1d {
                diffusion,
                rate,
                capacity,
                domain,
                ..
            } => format!(
                "fisher1d[D={diffusion};r={rate};K={capacity};x=({};{});T={t_end}]",
                domain.0, domain.1
            ),
            ProblemSpec::Fisher2d {
                diffusion,
                rate,
                capacity,
                domain,
                ..
            } => format!(
                "fisher2d[D=({};{});r={rate};K={capacity};x=({};{});T={t_end}]",
                diffusion.0, diffusion.1, domain.0, domain.1
            ),
            ProblemSpec::Fisher3d {
                diffusion,
                rate,
                capacity,
                domain,
                ..
            } => format!(
                "fisher3d[D=({};{};{});r={rate};K={capacity};x=({};{});T={t_end}]",
                diffusion.0, diffusion.1, diffusion.2, domain.0, domain.1
            ),
        }
    }
}

/// Which solution the errors are measured against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// The problem's closed-form or formula reference.
    Analytic,
    /// Strang splitting on the same grid with step `dt / refine`.
    Oracle { refine: u32 },
    /// The same scheme and step on a nested grid of spacing `dx`.
    Refined { dx: f64 },
}

/// How the per-step errors of a run are reduced to one number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeMode {
    /// Error at the final time only.
    Final,
    Max,
    L2Unweighted,
    L2Weighted,
}

impl TimeMode {
    pub fn label(self) -> &'static str {
        match self {
            TimeMode::Final => "final",
            TimeMode::Max => "max",
            TimeMode::L2Unweighted => "l2-unweighted",
            TimeMode::L2Weighted => "l2-weighted",
        }
    }
}

/// One error column: spatial norm, reduction in time, and relative flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measure {
    pub norm: NormKind,
    pub time: TimeMode,
    #[serde(default)]
    pub relative: bool,
}

impl Measure {
    pub fn new(norm: NormKind, time: TimeMode, relative: bool) -> Self {
        Self { norm, time, relative }
    }

    /// Value of the `norm` column, e.g. `l2/final`.
    pub fn label(&self) -> String {
        format!("{}/{}", self.norm.label(), self.time.label())
    }
}

fn default_true() -> bool {
    true
}

/// One sweep: every scheme at every step size, grid spacing and final time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub schemes: Vec<SchemeConfig>,
    pub dts: Vec<f64>,
    /// Grid spacings to sweep; empty means the problem's own spacing.
    #[serde(default)]
    pub dxs: Vec<f64>,
    #[serde(default = "default_final_times")]
    pub final_times: Vec<f64>,
    #[serde(default = "default_measures")]
    pub measures: Vec<Measure>,
    #[serde(default = "default_reference")]
    pub reference: ReferenceSpec,
    /// Record rates between adjacent step sizes.
    #[serde(default = "default_true")]
    pub rates: bool,
    /// Write wall-clock seconds; off gives byte-identical reruns.
    #[serde(default = "default_true")]
    pub timing: bool,
    /// Field snapshots at every final time.
    #[serde(default)]
    pub snapshots: bool,
    /// Solution norms (and analytic errors) after every step.
    #[serde(default)]
    pub series: bool,
    /// Overrides the exponential-action tolerance of every scheme.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn default_final_times() -> Vec<f64> {
    vec![1.0]
}

fn default_measures() -> Vec<Measure> {
    vec![Measure::new(NormKind::L2, TimeMode::Final, false)]
}

fn default_reference() -> ReferenceSpec {
    ReferenceSpec::Analytic
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, problem: ProblemSpec) -> Self {
        Self {
            name: name.into(),
            problem,
            schemes: Vec::new(),
            dts: Vec::new(),
            dxs: Vec::new(),
            final_times: default_final_times(),
            measures: default_measures(),
            reference: ReferenceSpec::Analytic,
            rates: true,
            timing: true,
            snapshots: false,
            series: false,
            tolerance: None,
        }
    }

    /// Grid spacings of the sweep (a single `None` for ODEs).
    pub fn grid_spacings(&self) -> Vec<Option<f64>> {
        match self.problem.dx() {
            None => vec![None],
            Some(dx) if self.dxs.is_empty() => vec![Some(dx)],
            Some(_) => self.dxs.iter().map(|&d| Some(d)).collect(),
        }
    }

    /// Scheme configurations with the tolerance override applied.
    pub fn effective_schemes(&self) -> Vec<SchemeConfig> {
        self.schemes
            .iter()
            .map(|s| {
                let mut s = s.clone();
                if let Some(tol) = self.tolerance {
                    s.backend.tolerance = tol;
                }
                s
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(format!("experiment `{}`: {msg}", self.name)));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return bad("names use ASCII letters, digits, `-` and `_`".into());
        }
        if self.dts.is_empty() || self.final_times.is_empty() || self.measures.is_empty() {
            return bad("dts, final_times and measures must be nonempty".into());
        }
        if self.rates && self.dts.len() > 1 {
            for w in self.dts.windows(2) {
                if (w[1] - 0.5 * w[0]).abs() > 1e-12 * w[0] {
                    return bad(format!("rates need dts halving exactly, found {} then {}", w[0], w[1]));
                }
            }
        }
        if self.final_times.iter().any(|t| !(*t >= 0.0)) {
            return bad("final times must be nonnegative".into());
        }
        for &dt in &self.dts {
            for &t in &self.final_times {
                step_count(0.0, t, dt).map_err(|e| Error::InvalidConfig(format!("experiment `{}`: {e}", self.name)))?;
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                return bad(format!("tolerance must be positive, got {tol}"));
            }
        }
        for s in self.effective_schemes() {
            s.validate()?;
        }
        let ode = self.problem.dx().is_none();
        if ode && !self.dxs.is_empty() {
            return bad("grid spacings given for an ODE problem".into());
        }
        let in_time = self.measures.iter().any(|m| m.time != TimeMode::Final);
        match &self.reference {
            ReferenceSpec::Analytic => {}
            ReferenceSpec::Oracle { refine } => {
                if *refine < 2 {
                    return bad("oracle refinement must be at least 2".into());
                }
                if in_time {
                    return bad("in-time error aggregation needs the analytic reference".into());
                }
            }
            ReferenceSpec::Refined { dx } => {
                if ode {
                    return bad("refined-grid references need a spatial problem".into());
                }
                if in_time {
                    return bad("in-time error aggregation needs the analytic reference".into());
                }
                for spacing in self.grid_spacings().into_iter().flatten() {
                    let ratio = spacing / dx;
                    if !(ratio >= 1.0) || (ratio - ratio.round()).abs() > 1e-9 * ratio {
                        return bad(format!("reference spacing {dx} does not nest in {spacing}"));
                    }
                }
            }
        }
        for dx in self.grid_spacings().into_iter().flatten() {
            self.problem.with_dx(dx).build().map_err(|e| match e {
                Error::InvalidConfig(m) => Error::InvalidConfig(format!("experiment `{}`: {m}", self.name)),
                other => other,
            })?;
        }
        Ok(())
    }
}
