//! Run configuration: built-in defaults, then a TOML file, then flags.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

/// Problems with the invocation itself; they map to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyIdentities,
    VerifyEstimates,
    NfrCheck,
    Simulate,
    Uniqueness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::VerifyEstimates => "verify-estimates",
            Command::NfrCheck => "nfr-check",
            Command::Simulate => "simulate",
            Command::Uniqueness => "uniqueness",
        }
    }

    fn default_n_max(self) -> usize {
        match self {
            Command::VerifyIdentities | Command::NfrCheck | Command::Uniqueness => 16,
            // the second-stage sets are empty below this band at K = 8
            Command::VerifyEstimates => 48,
            Command::Simulate => 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Initial data for the field-based commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Datum {
    Zero,
    /// `a·2cos x`.
    Cos,
    /// Modes 1 and 2 with a phase offset.
    TwoMode,
    /// Seeded coefficients on `|n| ≤ n_max/4`.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    M1Sign,
}

/// Geometric `M` grid: `lo·2^{j/per_octave}` up to `hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MSweep {
    pub lo: f64,
    pub hi: f64,
    pub per_octave: u32,
}

impl MSweep {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, k] = parts.as_slice() else {
            return bad(format!("--m-sweep expects lo:hi:octaves, got {text:?}"));
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError(format!("--m-sweep: {s:?} is not a number")))
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        let per_octave = k
            .trim()
            .parse::<u32>()
            .map_err(|_| ConfigError(format!("--m-sweep: {k:?} is not a positive integer")))?;
        let sweep = Self { lo, hi, per_octave };
        sweep.validate()?;
        Ok(sweep)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lo >= 2.0 && self.hi.is_finite() && self.hi > self.lo) || self.per_octave == 0 {
            return bad(format!(
                "M sweep needs 2 ≤ lo < hi and at least one step per octave, got {}:{}:{}",
                self.lo, self.hi, self.per_octave
            ));
        }
        if (self.hi / self.lo).log2() < 5.0 - 1e-9 {
            return bad(format!(
                "M sweep {}:{} spans {:.2} octaves; decay fits need at least 5",
                self.lo,
                self.hi,
                (self.hi / self.lo).log2()
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let steps = ((self.hi / self.lo).log2() * self.per_octave as f64 + 1e-9).floor() as i32;
        (0..=steps)
            .map(|j| self.lo * 2f64.powf(j as f64 / self.per_octave as f64))
            .collect()
    }
}

/// Settings as they arrive from a file or from flags; every field optional.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Spectral band: modes |n| ≤ n_max.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Sobolev index.
    #[arg(long)]
    pub s: Option<f64>,
    /// Resonance threshold M.
    #[arg(long)]
    pub m: Option<f64>,
    /// M grid for decay fits, as lo:hi:steps-per-octave.
    #[arg(long, value_name = "LO:HI:OCTAVES")]
    pub m_sweep: Option<String>,
    /// Comparability constant K of the second reduction stage.
    #[arg(long)]
    pub k_const: Option<f64>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time T.
    #[arg(long)]
    pub time: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the parallel scans.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Samples per ratio scan.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub datum: Option<Datum>,
    /// Size of the initial datum (ℓ² norm of its coefficients for `random`).
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Extra runs at dt/2, dt/4, … for convergence tables.
    #[arg(long)]
    pub dt_levels: Option<u32>,
    /// Frequency split N of the uniqueness experiment.
    #[arg(long)]
    pub n_split: Option<usize>,
    #[arg(long, value_enum, hide = true)]
    #[serde(skip)]
    pub inject_fault: Option<Fault>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { $($f: $top.$f.clone().or_else(|| $base.$f.clone()),)* }
    };
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("config {}: {e}", path.display())))
    }

    /// Fields of `top` win over those of `self`.
    pub fn overlay(&self, top: &Settings) -> Settings {
        overlay!(
            self, top, n_max, s, m, m_sweep, k_const, dt, time, seed, out, format, workers, samples, datum,
            amplitude, dt_levels, n_split, inject_fault
        )
    }

    pub fn resolve(&self, command: Command) -> Result<RunConfig, ConfigError> {
        let n_max = self.n_max.unwrap_or(command.default_n_max());
        if n_max == 0 {
            return bad("n_max must be positive");
        }
        let s = self.s.unwrap_or(0.25);
        let m = self.m.unwrap_or(8.0);
        let k_const = self.k_const.unwrap_or(8.0);
        let time = self.time.unwrap_or(match command {
            Command::Uniqueness => 0.5,
            _ => 0.25,
        });
        // largest power of two inside the stability bound dt ≤ 0.5/n_max²
        let dt = self
            .dt
            .unwrap_or_else(|| 2f64.powi(-((2.0 * (n_max * n_max) as f64).log2().ceil() as i32)));
        let m_sweep = match &self.m_sweep {
            Some(text) => MSweep::parse(text)?,
            None => MSweep { lo: 16.0, hi: 1024.0, per_octave: 1 },
        };
        let cfg = RunConfig {
            command,
            n_max,
            s,
            m,
            m_sweep,
            k_const,
            dt,
            time,
            seed: self.seed.unwrap_or(0),
            format: self.format.unwrap_or(Format::Json),
            samples: self.samples.unwrap_or(200),
            datum: self.datum.unwrap_or(match command {
                Command::NfrCheck | Command::VerifyIdentities => Datum::Random,
                _ => Datum::TwoMode,
            }),
            amplitude: self.amplitude.unwrap_or(0.5),
            dt_levels: self.dt_levels.unwrap_or(0),
            n_split: self.n_split.unwrap_or(4),
            inject_fault: self.inject_fault,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved configuration, embedded in every report.
///
/// The output path and worker count are execution details and are left out,
/// so reports of the same inputs are identical wherever they are written.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: Command,
    pub n_max: usize,
    pub s: f64,
    pub m: f64,
    pub m_sweep: MSweep,
    pub k_const: f64,
    pub dt: f64,
    pub time: f64,
    pub seed: u64,
    pub format: Format,
    pub samples: usize,
    pub datum: Datum,
    pub amplitude: f64,
    pub dt_levels: u32,
    pub n_split: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<Fault>,
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                bad(format!("{name} must be positive and finite, got {x}"))
            }
        };
        positive("M", self.m)?;
        positive("dt", self.dt)?;
        positive("time", self.time)?;
        if !(self.k_const.is_finite() && self.k_const >= 1.0) {
            return bad(format!("K must be at least 1, got {}", self.k_const));
        }
        if !self.s.is_finite() {
            return bad("s must be finite");
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad(format!("amplitude must be nonnegative, got {}", self.amplitude));
        }
        if self.samples == 0 {
            return bad("samples must be positive");
        }
        if matches!(self.command, Command::VerifyEstimates | Command::Uniqueness)
            && !(self.s > 1.0 / 6.0 && self.s < 0.5)
        {
            return bad(format!(
                "s = {} is outside 1/6 < s < 1/2, the range of the unconditional uniqueness theorem \
                 for which the estimates are stated",
                self.s
            ));
        }
        Ok(())
    }
}
