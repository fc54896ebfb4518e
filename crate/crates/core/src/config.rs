//! Flat `key = value` scenario files and the built-in presets.
//!
//! Keys are the scenario field names in SI units (`eps_r`, `l_c`, `f`, ...),
//! source fields as `source_x`/`source_y`/`aperture_width`/..., plus the
//! solver settings and `dx`. `#` starts a comment. A `preset` key selects the
//! base the remaining keys override.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{BackgroundIndex, ChannelScenario, DEFAULT_CELL_BUDGET};
use crate::solver::SolverConfig;

/// Default cell size: a quarter of the cavity radius.
pub const DEFAULT_DX: f64 = 0.125e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Full 600 mm channel.
    Paper,
    /// 150 mm channel with a narrower lateral margin.
    Fast,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(Preset::Paper),
            "fast" => Some(Preset::Fast),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Paper => "paper",
            Preset::Fast => "fast",
        }
    }

    pub fn config(self) -> RunConfig {
        let scenario = match self {
            Preset::Paper => ChannelScenario::default(),
            Preset::Fast => ChannelScenario {
                d: 150e-3,
                margin: 12e-3,
                ..ChannelScenario::default()
            },
        };
        RunConfig {
            scenario,
            solver: SolverConfig::default(),
            dx: DEFAULT_DX,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

/// Everything that determines a simulation's result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ChannelScenario,
    pub solver: SolverConfig,
    pub dx: f64,
    pub cell_budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Preset::Paper.config()
    }
}

pub const KEYS: &[&str] = &[
    "preset",
    "eps_r",
    "tan_delta",
    "l_d",
    "r",
    "w",
    "sigma_ground",
    "sigma_fill",
    "f",
    "l_c",
    "d",
    "n_layers",
    "margin",
    "source_x",
    "source_y",
    "aperture_width",
    "amplitude",
    "ramp_cycles",
    "background_index",
    "courant",
    "settle_traversals",
    "measure_cycles",
    "pml_thickness",
    "pml_target_reflection",
    "dx",
    "cell_budget",
];

impl RunConfig {
    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = || -> std::result::Result<f64, String> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{value}` is not a finite number"))
        };
        let count = || -> std::result::Result<usize, String> {
            value
                .parse::<usize>()
                .map_err(|_| format!("`{value}` is not a non-negative integer"))
        };
        let s = &mut self.scenario;
        match key {
            "preset" => {
                let preset = Preset::parse(value)
                    .ok_or_else(|| format!("unknown preset `{value}` (paper, fast)"))?;
                *self = preset.config();
            }
            "eps_r" => s.surface.eps_r = num()?,
            "tan_delta" => s.surface.tan_delta = num()?,
            "l_d" => s.surface.l_d = num()?,
            "r" => s.surface.r = num()?,
            "w" => s.surface.w = num()?,
            "sigma_ground" => s.surface.sigma_ground = num()?,
            "sigma_fill" => s.surface.sigma_fill = num()?,
            "f" => s.f = num()?,
            "l_c" => s.l_c = num()?,
            "d" => s.d = num()?,
            "n_layers" => s.n_layers = count()? as u32,
            "margin" => s.margin = num()?,
            "source_x" => s.source.position.0 = num()?,
            "source_y" => s.source.position.1 = num()?,
            "aperture_width" => s.source.aperture_width = num()?,
            "amplitude" => s.source.amplitude = num()?,
            "ramp_cycles" => s.source.ramp_cycles = num()?,
            "background_index" => {
                s.background_index = BackgroundIndex::parse(value)
                    .ok_or_else(|| format!("`{value}` is not one of eps_eff, tm_neff"))?
            }
            "courant" => self.solver.courant = num()?,
            "settle_traversals" => self.solver.settle_traversals = num()?,
            "measure_cycles" => self.solver.measure_cycles = num()?,
            "pml_thickness" => self.solver.pml_thickness = count()?,
            "pml_target_reflection" => self.solver.pml_target_reflection = num()?,
            "dx" => self.dx = num()?,
            "cell_budget" => self.cell_budget = count()?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. A `preset` line resets
    /// everything set before it.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                path: None,
                line,
                column: 1,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::UnknownKey {
                    key: key.to_string(),
                    line,
                });
            }
            self.set(key, value)
                .map_err(|message| Error::InvalidValue {
                    key: key.to_string(),
                    line,
                    message,
                })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str, base: RunConfig) -> Result<Self> {
        let mut cfg = base;
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, base: RunConfig) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, base).map_err(|e| match e {
            Error::UnknownKey { key, line } => Error::Parse {
                path: Some(path.to_path_buf()),
                line,
                column: 1,
                message: format!("unknown configuration key `{key}`"),
            },
            Error::InvalidValue { key, line, message } => Error::Parse {
                path: Some(path.to_path_buf()),
                line,
                column: 1,
                message: format!("invalid value for `{key}`: {message}"),
            },
            other => other.with_path(path),
        })
    }

    /// Canonical text form; parsing it back reproduces `self` exactly.
    pub fn to_text(&self) -> String {
        let s = &self.scenario;
        let v = &self.solver;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        kv("eps_r", format!("{:?}", s.surface.eps_r));
        kv("tan_delta", format!("{:?}", s.surface.tan_delta));
        kv("l_d", format!("{:?}", s.surface.l_d));
        kv("r", format!("{:?}", s.surface.r));
        kv("w", format!("{:?}", s.surface.w));
        kv("sigma_ground", format!("{:?}", s.surface.sigma_ground));
        kv("sigma_fill", format!("{:?}", s.surface.sigma_fill));
        kv("f", format!("{:?}", s.f));
        kv("l_c", format!("{:?}", s.l_c));
        kv("d", format!("{:?}", s.d));
        kv("n_layers", s.n_layers.to_string());
        kv("margin", format!("{:?}", s.margin));
        kv("source_x", format!("{:?}", s.source.position.0));
        kv("source_y", format!("{:?}", s.source.position.1));
        kv("aperture_width", format!("{:?}", s.source.aperture_width));
        kv("amplitude", format!("{:?}", s.source.amplitude));
        kv("ramp_cycles", format!("{:?}", s.source.ramp_cycles));
        kv("background_index", s.background_index.as_str().to_string());
        kv("courant", format!("{:?}", v.courant));
        kv("settle_traversals", format!("{:?}", v.settle_traversals));
        kv("measure_cycles", format!("{:?}", v.measure_cycles));
        kv("pml_thickness", v.pml_thickness.to_string());
        kv(
            "pml_target_reflection",
            format!("{:?}", v.pml_target_reflection),
        );
        kv("dx", format!("{:?}", self.dx));
        kv("cell_budget", self.cell_budget.to_string());
        out
    }

    /// SHA-256 over the canonical text.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}
