//! Deterministic test sets (Cantor endpoints, `{n^-p} ∪ {0}`, grids,
//! products, unions) and the sample maps used in experiments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distortion::HolderData;
use crate::error::{Error, Result};
use crate::holder::MapSample;
use crate::metric::{BaseMetric, FiniteMetricSpace, SubsetRef};

/// Default cap on the number of generated points.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Endpoints of the level-`depth` intervals of the middle-gap Cantor
    /// construction with ratio `ratio` on `[0, 1]`.
    Cantor { ratio: f64, depth: u32 },
    /// `{n^-p : 1 ≤ n ≤ n_max} ∪ {0}`.
    SequenceSet { exponent: f64, n_max: usize },
    /// `n` equally spaced values in `[0, 1]` per axis.
    Grid { n: usize, dim: usize },
    Product { left: Box<GeneratorSpec>, right: Box<GeneratorSpec> },
    Union { left: Box<GeneratorSpec>, right: Box<GeneratorSpec> },
}

/// A generated point set, all of which forms the subset of interest.
#[derive(Clone, Debug)]
pub struct Generated {
    pub space: FiniteMetricSpace,
    pub subset: SubsetRef,
    /// Smallest distance between distinct points (0 for a single point).
    pub resolution_floor: f64,
}

impl GeneratorSpec {
    pub fn dim(&self) -> usize {
        match self {
            GeneratorSpec::Cantor { .. } | GeneratorSpec::SequenceSet { .. } => 1,
            GeneratorSpec::Grid { dim, .. } => *dim,
            GeneratorSpec::Product { left, right } => left.dim() + right.dim(),
            GeneratorSpec::Union { left, .. } => left.dim(),
        }
    }

    /// Number of points before deduplication; `None` on overflow.
    pub fn point_count(&self) -> Option<usize> {
        match self {
            GeneratorSpec::Cantor { depth, .. } => 2usize.checked_pow(depth.checked_add(1)?),
            GeneratorSpec::SequenceSet { n_max, .. } => n_max.checked_add(1),
            GeneratorSpec::Grid { n, dim } => n.checked_pow(u32::try_from(*dim).ok()?),
            GeneratorSpec::Product { left, right } => left.point_count()?.checked_mul(right.point_count()?),
            GeneratorSpec::Union { left, right } => left.point_count()?.checked_add(right.point_count()?),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::Cantor { ratio, .. } => {
                if !(*ratio > 0.0 && *ratio <= 0.5) {
                    return Err(Error::domain(format!("cantor ratio {ratio} is outside (0, 1/2]")));
                }
            }
            GeneratorSpec::SequenceSet { exponent, n_max } => {
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::domain(format!("sequence exponent {exponent} must be positive")));
                }
                if *n_max == 0 {
                    return Err(Error::domain("sequence_set needs n_max ≥ 1"));
                }
            }
            GeneratorSpec::Grid { n, dim } => {
                if *n == 0 || *dim == 0 {
                    return Err(Error::domain("grid needs n ≥ 1 and dim ≥ 1"));
                }
            }
            GeneratorSpec::Product { left, right } => {
                left.validate()?;
                right.validate()?;
            }
            GeneratorSpec::Union { left, right } => {
                left.validate()?;
                right.validate()?;
                if left.dim() != right.dim() {
                    return Err(Error::domain(format!(
                        "union of {}-dimensional and {}-dimensional sets",
                        left.dim(),
                        right.dim()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Rows of coordinates, sorted lexicographically and deduplicated.
    fn rows(&self) -> Vec<Vec<f64>> {
        let mut rows = match self {
            GeneratorSpec::Cantor { ratio, depth } => cantor_endpoints(*ratio, *depth).into_iter().map(|x| vec![x]).collect(),
            GeneratorSpec::SequenceSet { exponent, n_max } => {
                let mut v = vec![vec![0.0]];
                v.extend((1..=*n_max).map(|n| vec![(n as f64).powf(-exponent)]));
                v
            }
            GeneratorSpec::Grid { n, dim } => {
                let axis: Vec<f64> = if *n == 1 {
                    vec![0.0]
                } else {
                    (0..*n).map(|i| i as f64 / (*n - 1) as f64).collect()
                };
                let mut rows = vec![Vec::new()];
                for _ in 0..*dim {
                    rows = rows
                        .into_iter()
                        .flat_map(|r| {
                            axis.iter().map(move |&a| {
                                let mut r = r.clone();
                                r.push(a);
                                r
                            })
                        })
                        .collect();
                }
                rows
            }
            GeneratorSpec::Product { left, right } => {
                let a = left.rows();
                let b = right.rows();
                a.iter()
                    .flat_map(|x| b.iter().map(move |y| x.iter().chain(y).copied().collect()))
                    .collect()
            }
            GeneratorSpec::Union { left, right } => {
                let mut v = left.rows();
                v.extend(right.rows());
                v
            }
        };
        rows.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        rows.dedup();
        rows
    }
}

/// Level-`depth` interval endpoints in increasing order. Right children are
/// placed at `a + (1 − λ)L` so that coinciding endpoints (λ = 1/2) compare
/// equal and collapse.
fn cantor_endpoints(ratio: f64, depth: u32) -> Vec<f64> {
    let mut lefts = vec![0.0];
    let mut len = 1.0;
    for _ in 0..depth {
        let shift = (1.0 - ratio) * len;
        lefts = lefts.iter().flat_map(|&a| [a, a + shift]).collect();
        len *= ratio;
    }
    let mut pts: Vec<f64> = lefts.iter().flat_map(|&a| [a, a + len]).collect();
    pts.dedup();
    pts
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    generate_with_budget(spec, DEFAULT_POINT_BUDGET)
}

pub fn generate_with_budget(spec: &GeneratorSpec, budget: usize) -> Result<Generated> {
    spec.validate()?;
    match spec.point_count() {
        Some(n) if n <= budget => {}
        Some(n) => {
            return Err(Error::capacity(format!("{spec} would produce {n} points, budget is {budget}")));
        }
        None => return Err(Error::capacity(format!("{spec} is too large to count"))),
    }
    let rows = spec.rows();
    let dim = spec.dim();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let space = FiniteMetricSpace::from_coords(dim, flat, BaseMetric::Euclidean)?;
    let subset = SubsetRef::full(&space);
    let resolution_floor = if space.len() > 1 { space.resolution_floor() } else { 0.0 };
    Ok(Generated { space, subset, resolution_floor })
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Cantor { ratio, depth } => write!(f, "cantor({ratio},{depth})"),
            GeneratorSpec::SequenceSet { exponent, n_max } => write!(f, "sequence_set({exponent},{n_max})"),
            GeneratorSpec::Grid { n, dim } => write!(f, "grid({n},{dim})"),
            GeneratorSpec::Product { left, right } => write!(f, "product({left},{right})"),
            GeneratorSpec::Union { left, right } => write!(f, "union({left},{right})"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    /// Parses `cantor(1/3,10)`, `sequence_set(2,2000)`, `grid(1025,1)`,
    /// `product(a,b)` and `union(a,b)`; numbers may be fractions.
    fn from_str(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parser = SpecParser { text: &compact, pos: 0 };
        let spec = parser.spec()?;
        if parser.pos != compact.len() {
            return Err(parser.error("trailing characters"));
        }
        Ok(spec)
    }
}

struct SpecParser<'a> {
    text: &'a str,
    pos: usize,
}

impl SpecParser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::domain(format!("generator spec {:?}: {what} at offset {}", self.text, self.pos))
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn token(&mut self) -> &str {
        let start = self.pos;
        let len = self
            .rest()
            .find([',', '(', ')'])
            .unwrap_or(self.rest().len());
        self.pos += len;
        &self.text[start..start + len]
    }

    fn number(&mut self) -> Result<f64> {
        let tok = self.token().to_string();
        let value = match tok.split_once('/') {
            Some((a, b)) => match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(a), Ok(b)) if b != 0.0 => Some(a / b),
                _ => None,
            },
            None => tok.parse::<f64>().ok(),
        };
        value.ok_or_else(|| self.error(&format!("cannot read number {tok:?}")))
    }

    fn integer(&mut self) -> Result<usize> {
        let tok = self.token().to_string();
        tok.parse()
            .map_err(|_| self.error(&format!("cannot read integer {tok:?}")))
    }

    fn spec(&mut self) -> Result<GeneratorSpec> {
        let name = self.token().to_ascii_lowercase();
        self.expect('(')?;
        let spec = match name.as_str() {
            "cantor" => {
                let ratio = self.number()?;
                self.expect(',')?;
                let depth = self.integer()?;
                let depth = u32::try_from(depth).map_err(|_| self.error("depth too large"))?;
                GeneratorSpec::Cantor { ratio, depth }
            }
            "sequence_set" => {
                let exponent = self.number()?;
                self.expect(',')?;
                GeneratorSpec::SequenceSet { exponent, n_max: self.integer()? }
            }
            "grid" => {
                let n = self.integer()?;
                self.expect(',')?;
                GeneratorSpec::Grid { n, dim: self.integer()? }
            }
            "product" | "union" => {
                let left = Box::new(self.spec()?);
                self.expect(',')?;
                let right = Box::new(self.spec()?);
                if name == "product" {
                    GeneratorSpec::Product { left, right }
                } else {
                    GeneratorSpec::Union { left, right }
                }
            }
            other => return Err(self.error(&format!("unknown generator {other:?}"))),
        };
        self.expect(')')?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    /// `x ↦ x^a` on samples of `[0, ∞)`.
    Power { a: f64 },
    /// `x ↦ c·x`.
    Linear { c: f64 },
    /// Identity into the same points under `d^epsilon`.
    SnowflakeTarget { epsilon: f64 },
}

impl FromStr for MapKind {
    type Err = Error;

    /// `identity`, `power(1/2)`, `linear(3)`, `snowflake_target(2/3)`.
    fn from_str(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "identity" {
            return Ok(MapKind::Identity);
        }
        let (name, arg) = compact
            .strip_suffix(')')
            .and_then(|s| s.split_once('('))
            .ok_or_else(|| Error::domain(format!("cannot read map {text:?}")))?;
        let mut parser = SpecParser { text: arg, pos: 0 };
        let v = parser.number()?;
        if parser.pos != arg.len() {
            return Err(parser.error("trailing characters"));
        }
        match name {
            "power" => Ok(MapKind::Power { a: v }),
            "linear" => Ok(MapKind::Linear { c: v }),
            "snowflake_target" => Ok(MapKind::SnowflakeTarget { epsilon: v }),
            other => Err(Error::domain(format!("unknown map {other:?}"))),
        }
    }
}

impl MapKind {
    /// Hölder data `(p, α)` used to evaluate the distortion bound for this
    /// map: `x^a` with `a < 1` at `α = a, p = 1/(1 - a)`; Lipschitz maps
    /// (including `x^a`, `a ≥ 1`, on the unit-interval samples) at `α = 1,
    /// p = 2`. Snowflake targets have no finite `p` and return `None`.
    pub fn holder_data(&self) -> Option<HolderData> {
        match *self {
            MapKind::Identity | MapKind::Linear { .. } => Some(HolderData { p: 2.0, alpha: 1.0 }),
            MapKind::Power { a } if a > 0.0 && a < 1.0 => Some(HolderData { p: 1.0 / (1.0 - a), alpha: a }),
            MapKind::Power { a } if a >= 1.0 => Some(HolderData { p: 2.0, alpha: 1.0 }),
            MapKind::Power { .. } | MapKind::SnowflakeTarget { .. } => None,
        }
    }
}

/// Builds the sampled map on `source`. Images that coincide share one
/// target point.
pub fn generate_map(kind: MapKind, source: &FiniteMetricSpace) -> Result<MapSample> {
    let one_dimensional = || -> Result<Vec<f64>> {
        if source.ambient_dim() != Some(1) || source.snowflake_exponent() != 1.0 {
            return Err(Error::domain("power and linear maps need a one-dimensional coordinate source"));
        }
        Ok((0..source.len()).map(|i| source.coords(i).unwrap()[0]).collect())
    };
    match kind {
        MapKind::Identity => Ok(MapSample::identity(source.clone())),
        MapKind::SnowflakeTarget { epsilon } => {
            let target = source.snowflake(epsilon)?;
            MapSample::new(source.clone(), target, (0..source.len()).collect())
        }
        MapKind::Power { a } => {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::domain(format!("power exponent {a} must be positive")));
            }
            let xs = one_dimensional()?;
            if let Some(x) = xs.iter().find(|&&x| x < 0.0) {
                return Err(Error::domain(format!("power map needs nonnegative samples, got {x}")));
            }
            line_map(source, xs.iter().map(|x| x.powf(a)).collect())
        }
        MapKind::Linear { c } => {
            if !c.is_finite() {
                return Err(Error::domain("linear factor must be finite"));
            }
            let xs = one_dimensional()?;
            line_map(source, xs.iter().map(|x| c * x).collect())
        }
    }
}

fn line_map(source: &FiniteMetricSpace, images: Vec<f64>) -> Result<MapSample> {
    let mut uniq = images.clone();
    uniq.sort_by(f64::total_cmp);
    uniq.dedup();
    let assignment = images
        .iter()
        .map(|y| uniq.binary_search_by(|u| u.total_cmp(y)).expect("image present"))
        .collect();
    let target = FiniteMetricSpace::from_coords(1, uniq, BaseMetric::Euclidean)?;
    MapSample::new(source.clone(), target, assignment)
}
