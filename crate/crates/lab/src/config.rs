//! TOML configuration. Every [`BenchmarkSpec`] field has a key; values given
//! on the command line replace file values.
//!
//! ```toml
//! problem = "ac-circle"
//! scheme = "be"
//! eps = 0.2
//! sigma = 1e-4
//! reaction = { kind = "quintic", beta = 1.0 }
//!
//! [sweep]
//! schemes = ["be", "eyre"]
//! eps = [0.2, 0.1]
//! sigma = [1e-4]
//! ```

use std::path::{Path, PathBuf};

use phasestep_core::bench::{default_grid_size, BenchmarkSpec, Problem};
use phasestep_core::{Reaction, SchemeId};
use serde::Deserialize;

use crate::error::{LabError, LabResult};
use crate::io;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: Option<Problem>,
    pub scheme: Option<SchemeId>,
    pub eps: Option<f64>,
    pub sigma: Option<f64>,
    pub n: Option<usize>,
    pub t_max: Option<f64>,
    pub reaction: Option<Reaction>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub sweep: SweepGrid,
}

/// Axes of a sweep; `n` defaults per `eps`.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub schemes: Vec<SchemeId>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    /// Richardson reference times from TR runs.
    #[serde(default)]
    pub reference: bool,
}

impl Config {
    pub fn parse(text: &str) -> LabResult<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        Self::parse(&io::read_to_string(path)?)
    }

    /// `other`'s values win where set.
    pub fn merged(mut self, other: Config) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(problem, scheme, eps, sigma, n, t_max, reaction, threads, output);
        if !other.sweep.schemes.is_empty() {
            self.sweep.schemes = other.sweep.schemes;
        }
        if !other.sweep.eps.is_empty() {
            self.sweep.eps = other.sweep.eps;
        }
        if !other.sweep.sigma.is_empty() {
            self.sweep.sigma = other.sweep.sigma;
        }
        self.sweep.reference |= other.sweep.reference;
        self
    }

    pub fn problem(&self) -> Problem {
        self.problem.unwrap_or(Problem::AcCircle)
    }

    pub fn reaction(&self) -> Reaction {
        self.reaction.unwrap_or_default()
    }

    pub fn threads(&self) -> LabResult<usize> {
        match self.threads {
            Some(0) => Err(LabError::Invalid("threads must be at least 1".into())),
            Some(t) => Ok(t),
            None => Ok(1),
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(io::default_output_dir)
    }

    /// Validated single-run spec.
    pub fn benchmark_spec(&self) -> LabResult<BenchmarkSpec> {
        let missing = |what: &str| LabError::Invalid(format!("{what} is required"));
        let scheme = self.scheme.ok_or_else(|| missing("scheme"))?;
        let eps = self.eps.ok_or_else(|| missing("eps"))?;
        let sigma = self.sigma.ok_or_else(|| missing("sigma"))?;
        self.spec_for(scheme, eps, sigma)
    }

    pub fn spec_for(&self, scheme: SchemeId, eps: f64, sigma: f64) -> LabResult<BenchmarkSpec> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(LabError::Invalid(format!("eps must be positive, got {eps}")));
        }
        let mut spec = BenchmarkSpec::new(self.problem(), scheme, eps, sigma)
            .with_reaction(self.reaction())
            .with_n(self.n.unwrap_or_else(|| default_grid_size(eps)));
        if let Some(t) = self.t_max {
            spec.t_max = t;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// `classic`, `quintic` or `cubic-shifted`, with `beta` for the last two.
pub fn parse_reaction(kind: &str, beta: Option<f64>) -> LabResult<Reaction> {
    let r = match kind {
        "classic" => {
            if beta.is_some() {
                return Err(LabError::Invalid("classic reaction takes no beta".into()));
            }
            Reaction::Classic
        }
        "quintic" => Reaction::Quintic { beta: beta.unwrap_or(1.0) },
        "cubic-shifted" => Reaction::CubicShifted { beta: beta.unwrap_or(0.0) },
        other => {
            return Err(LabError::Invalid(format!(
                "unknown reaction {other:?}; expected classic, quintic or cubic-shifted"
            )))
        }
    };
    r.validate()?;
    Ok(r)
}
