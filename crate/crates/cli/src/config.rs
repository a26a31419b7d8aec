//! The TOML experiment config. Every numeric default lives in [`defaults`].

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use dimdist::distortion::{BoundParams, HolderData};
use dimdist::dyadic::{DyadicParams, Mode};
use dimdist::holder::Exponent;

/// Defaults applied when the config leaves a value out.
///
/// | key                        | default          |
/// |----------------------------|------------------|
/// | `deltas.start`             | 1/4              |
/// | `deltas.ratio`             | 1/2              |
/// | `deltas.count`             | 8                |
/// | `thetas`                   | [1/4, 1/2, 1]    |
/// | `tolerances.bisection`     | 1e-3             |
/// | `tolerances.residual_cap`  | 0.1              |
/// | `tolerances.violation`     | 0.05             |
/// | `tolerances.cu`            | 1/2              |
/// | `box_scales`               | `deltas` times the diameter of `E` |
/// | `dyadic.mode`              | relaxed          |
/// | `dyadic.b`                 | 1/2 relaxed, 1/72 strict |
/// | `dyadic.c0`, `dyadic.C0`   | 1, 6             |
/// | `dyadic.max_level`         | deepest level above the resolution floor |
/// | `profile.epsilon`          | 0.1              |
/// | `profile.radii`            | `deltas` times the diameter of `E` |
/// | `gradient.s`, `gradient.p` | 1, 2             |
pub mod defaults {
    pub const DELTA_START: f64 = 0.25;
    pub const DELTA_RATIO: f64 = 0.5;
    pub const DELTA_COUNT: usize = 8;
    pub const THETAS: [f64; 3] = [0.25, 0.5, 1.0];
    pub const BISECTION_TOL: f64 = 1e-3;
    pub const RESIDUAL_CAP: f64 = 0.1;
    pub const VIOLATION_TOL: f64 = 0.05;
    pub const CU: f64 = 0.5;
    pub const PROFILE_EPSILON: f64 = 0.1;
    pub const GRADIENT_S: f64 = 1.0;
    pub const GRADIENT_P: f64 = 2.0;
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub input: Option<InputConfig>,
    /// Target space for map files.
    pub target: Option<InputConfig>,
    pub map: Option<MapConfig>,
    #[serde(default)]
    pub dyadic: DyadicConfig,
    pub thetas: Option<Vec<f64>>,
    pub deltas: Option<GridConfig>,
    pub box_scales: Option<GridConfig>,
    pub bound: Option<BoundParams>,
    pub holder: Option<HolderData>,
    #[serde(default)]
    pub gradient: GradientConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
}

/// Exactly one of `generator`, `points` and `matrix`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub generator: Option<String>,
    pub points: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
    /// `euclidean` or `chebyshev`, for point files.
    pub metric: Option<String>,
    /// Snowflake exponent applied after loading.
    pub snowflake: Option<f64>,
}

/// Either a generated map (`kind`, e.g. `power(1/2)`) or a CSV of
/// `(source id, target id)` rows into `[target]`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub kind: Option<String>,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicConfig {
    pub mode: Option<Mode>,
    pub b: Option<f64>,
    pub c0: Option<f64>,
    #[serde(rename = "C0")]
    pub big_c0: Option<f64>,
    pub max_level: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_ratio() -> f64 {
    defaults::DELTA_RATIO
}

fn default_count() -> usize {
    defaults::DELTA_COUNT
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { start: defaults::DELTA_START, ratio: defaults::DELTA_RATIO, count: defaults::DELTA_COUNT }
    }
}

impl GridConfig {
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        if !(self.start > 0.0 && self.start.is_finite()) {
            bail!("{name}.start = {} must be positive", self.start);
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            bail!("{name}.ratio = {} must lie in (0, 1)", self.ratio);
        }
        if self.count == 0 {
            bail!("{name}.count must be at least 1");
        }
        Ok(dimdist::dimension::geometric_grid(self.start, self.ratio, self.count))
    }

    pub fn scaled(&self, by: f64) -> GridConfig {
        GridConfig { start: self.start * by, ..*self }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientConfig {
    pub s: Option<f64>,
    pub p: Option<Exponent>,
    /// Optional per-point weights for the `L^p` norm.
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub epsilon: Option<f64>,
    pub radii: Option<GridConfig>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub bisection: Option<f64>,
    pub residual_cap: Option<f64>,
    pub violation: Option<f64>,
    /// Ambient uniform-perfectness constant in the level window.
    pub cu: Option<f64>,
    /// Target perfectness; measured when absent.
    pub cu_prime: Option<f64>,
    /// Use this input dimension for every δ instead of the per-scale value.
    pub d_override: Option<f64>,
}

impl Config {
    /// Reads a config and resolves its file paths against the config's
    /// directory.
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: Config = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        for input in [config.input.as_mut(), config.target.as_mut()].into_iter().flatten() {
            input.points.as_mut().map(resolve);
            input.matrix.as_mut().map(resolve);
        }
        if let Some(map) = config.map.as_mut() {
            map.file.as_mut().map(resolve);
        }
        config.out.as_mut().map(resolve);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        for &t in self.thetas() {
            if !(t > 0.0 && t <= 1.0) {
                bail!("theta = {t} is outside (0, 1]");
            }
        }
        self.deltas()?;
        let t = &self.tolerances;
        for (name, v) in [("bisection", t.bisection), ("residual_cap", t.residual_cap), ("violation", t.violation)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    bail!("tolerances.{name} = {v} must be a nonnegative number");
                }
            }
        }
        if let Some(g) = &self.box_scales {
            g.values("box_scales")?;
        }
        for input in [&self.input, &self.target].into_iter().flatten() {
            for file in [&input.points, &input.matrix].into_iter().flatten() {
                if !file.exists() {
                    bail!("input file {} does not exist", file.display());
                }
            }
        }
        if let Some(file) = self.map.as_ref().and_then(|m| m.file.as_ref()) {
            if !file.exists() {
                bail!("map file {} does not exist", file.display());
            }
        }
        Ok(())
    }

    pub fn thetas(&self) -> &[f64] {
        self.thetas.as_deref().unwrap_or(&defaults::THETAS)
    }

    pub fn deltas(&self) -> Result<Vec<f64>> {
        let grid = self.deltas.unwrap_or_default();
        let values = grid.values("deltas")?;
        if values[0] >= 1.0 {
            bail!("deltas must lie below 1, got start {}", values[0]);
        }
        Ok(values)
    }

    /// Dyadic parameters, with `mode` forced by the command line if given.
    pub fn dyadic_params(&self, mode: Option<Mode>, default_max_level: impl FnOnce(f64) -> usize) -> Result<DyadicParams> {
        let mode = mode.or(self.dyadic.mode).unwrap_or(Mode::Relaxed);
        let base = match mode {
            Mode::Strict => DyadicParams::strict(0),
            Mode::Relaxed => DyadicParams::relaxed(0),
        };
        let ratio = self.dyadic.b.unwrap_or(base.ratio);
        let params = DyadicParams {
            ratio,
            separation: self.dyadic.c0.unwrap_or(base.separation),
            covering: self.dyadic.big_c0.unwrap_or(base.covering),
            max_level: self.dyadic.max_level.unwrap_or_else(|| default_max_level(ratio)),
            mode,
        };
        params.validate()?;
        Ok(params)
    }
}
