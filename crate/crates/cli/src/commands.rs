use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context as _, Result};
use rayon::prelude::*;
use serde::Serialize;

use dimdist::dimension::{
    box_dimension, hausdorff_dimension, intermediate_dimension, DimensionEstimate, EstimatorOptions,
};
use dimdist::distortion::{distortion_experiment, evaluate_bound, BoundValue, ExperimentOptions, HolderData, PushforwardReport};
use dimdist::dyadic::{build_system, default_max_level, verify_system, DyadicSystem, Mode};
use dimdist::generators::{generate, generate_map, GeneratorSpec, MapKind};
use dimdist::holder::{estimate_ch_profile, hajlasz_gradient, Exponent, MapSample};
use dimdist::io::{fmt_f64, read_distance_matrix, read_map, read_point_cloud, to_json, write_csv, write_point_cloud};
use dimdist::metric::diameter;
use dimdist::{BaseMetric, FiniteMetricSpace, SubsetRef};

use crate::config::{defaults, Config, GridConfig, InputConfig};
use crate::{exit, GlobalArgs};

const DEFAULT_OUT: &str = "dimdist-out";

/// Failure to write a result file.
#[derive(Debug, thiserror::Error)]
#[error("writing {path}: {source}")]
pub struct WriteError {
    path: PathBuf,
    source: std::io::Error,
}

pub struct Context {
    config: Config,
    out: PathBuf,
    mode: Option<Mode>,
}

struct Input {
    space: FiniteMetricSpace,
    subset: SubsetRef,
    label: String,
}

fn load(input: &InputConfig, what: &str) -> Result<Input> {
    let sources = [input.generator.is_some(), input.points.is_some(), input.matrix.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        bail!("[{what}] needs exactly one of generator, points, matrix");
    }
    let base = match input.metric.as_deref().unwrap_or("euclidean") {
        "euclidean" => BaseMetric::Euclidean,
        "chebyshev" => BaseMetric::Chebyshev,
        other => bail!("[{what}] metric {other:?} is not one of euclidean, chebyshev"),
    };
    let (space, label) = if let Some(spec) = &input.generator {
        let spec: GeneratorSpec = spec.parse().with_context(|| format!("[{what}] generator"))?;
        (generate(&spec)?.space, spec.to_string())
    } else if let Some(path) = &input.points {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        (read_point_cloud(file, base).with_context(|| format!("reading {}", path.display()))?, path.display().to_string())
    } else {
        let path = input.matrix.as_ref().unwrap();
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        (read_distance_matrix(file).with_context(|| format!("reading {}", path.display()))?, path.display().to_string())
    };
    let space = match input.snowflake {
        Some(eps) => space.snowflake(eps)?,
        None => space,
    };
    let subset = SubsetRef::full(&space);
    Ok(Input { space, subset, label })
}

fn estimator_options(config: &Config, space: &FiniteMetricSpace) -> EstimatorOptions {
    let t = &config.tolerances;
    EstimatorOptions {
        cu: t.cu.unwrap_or(defaults::CU),
        bisection_tol: t.bisection.unwrap_or(defaults::BISECTION_TOL),
        residual_cap: t.residual_cap.unwrap_or(defaults::RESIDUAL_CAP),
        ..EstimatorOptions::for_space(space)
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(buf)
}

fn series_csv(est: &DimensionEstimate) -> Result<Vec<u8>> {
    csv_bytes(&["delta", "s"], est.series.iter().map(|p| vec![p.delta, p.s]))
}

#[derive(Serialize)]
#[serde(untagged)]
enum Outcome<T> {
    Ok(T),
    Failed { error: String },
}

impl<T> Outcome<T> {
    fn from_result(r: dimdist::Result<T>, no_scales: &mut bool) -> Result<Self> {
        match r {
            Ok(v) => Ok(Outcome::Ok(v)),
            Err(dimdist::Error::NoUsableScales(msg)) => {
                *no_scales = true;
                Ok(Outcome::Failed { error: format!("no usable scales: {msg}") })
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Context {
    pub fn new(args: &GlobalArgs) -> Result<Context> {
        let config = match &args.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let out = args
            .out
            .clone()
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok(Context { config, out, mode: args.mode() })
    }

    fn input(&self) -> Result<Input> {
        let input = self
            .config
            .input
            .as_ref()
            .ok_or_else(|| anyhow!("the config has no [input] table"))?;
        load(input, "input")
    }

    fn system(&self, input: &Input) -> Result<DyadicSystem> {
        let params = self.config.dyadic_params(self.mode, |b| default_max_level(&input.space, b))?;
        Ok(build_system(&input.space, &params)?)
    }

    fn map_kind(&self) -> Result<Option<MapKind>> {
        match self.config.map.as_ref().and_then(|m| m.kind.as_deref()) {
            Some(text) => Ok(Some(text.parse().context("[map] kind")?)),
            None => Ok(None),
        }
    }

    fn map(&self, input: &Input) -> Result<MapSample> {
        let map = self.config.map.as_ref().ok_or_else(|| anyhow!("the config has no [map] table"))?;
        match (self.map_kind()?, &map.file) {
            (Some(kind), None) => Ok(generate_map(kind, &input.space)?),
            (None, Some(path)) => {
                let target = self
                    .config
                    .target
                    .as_ref()
                    .ok_or_else(|| anyhow!("a map file needs a [target] table"))?;
                let target = load(target, "target")?;
                let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                Ok(read_map(file, input.space.clone(), target.space).with_context(|| format!("reading {}", path.display()))?)
            }
            _ => bail!("[map] needs exactly one of kind, file"),
        }
    }

    fn holder_data(&self) -> Result<HolderData> {
        if let Some(h) = self.config.holder {
            return Ok(h);
        }
        self.map_kind()?
            .and_then(|k| k.holder_data())
            .ok_or_else(|| anyhow!("set [holder] p and alpha; they cannot be inferred for this map"))
    }

    /// Scales relative to the diameter of `E` (or absolute when `E` is a point).
    fn relative_grid(&self, explicit: Option<GridConfig>, input: &Input) -> GridConfig {
        explicit.unwrap_or_else(|| {
            let d = diameter(&input.space, &input.subset);
            self.config.deltas.unwrap_or_default().scaled(if d > 0.0 { d } else { 1.0 })
        })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out.join(name);
        let wrap = |source| WriteError { path: path.clone(), source };
        std::fs::create_dir_all(&self.out).map_err(wrap)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.out).map_err(wrap)?;
        tmp.write_all(bytes).map_err(wrap)?;
        tmp.persist(&path).map_err(|e| wrap(e.error))?;
        Ok(())
    }

    fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = to_json(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn net(&self) -> Result<u8> {
        let input = self.input()?;
        let sys = self.system(&input)?;
        let report = verify_system(&input.space, &sys);
        self.write("system.json", sys.to_json()?.as_bytes())?;
        self.write_json("verification.json", &report)?;
        println!("input: {} ({} points)", input.label, input.space.len());
        println!("mode: {:?}, b = {}, levels: {}, cubes: {}", sys.params.mode, sys.params.ratio, report.levels, report.cubes);
        println!("violations: {}", report.fatal);
        println!("(iv) flags: {}", report.counts.ball_containment);
        Ok(if report.is_clean() { exit::OK } else { exit::VIOLATION })
    }

    pub fn dims(&self) -> Result<u8> {
        let input = self.input()?;
        let sys = self.system(&input)?;
        let options = estimator_options(&self.config, &input.space);
        let deltas = self.config.deltas()?;
        let box_scales = self.relative_grid(self.config.box_scales, &input).values("box_scales")?;

        let boxed = box_dimension(&input.space, &input.subset, &box_scales)?;
        let mut no_scales = false;
        let hausdorff = Outcome::from_result(hausdorff_dimension(&sys, &input.subset, &deltas, &options), &mut no_scales)?;
        let per_theta: Vec<(f64, dimdist::Result<DimensionEstimate>)> = self
            .config
            .thetas()
            .par_iter()
            .map(|&theta| (theta, intermediate_dimension(&sys, &input.subset, theta, &deltas, &options)))
            .collect();

        #[derive(Serialize)]
        struct ThetaEntry {
            theta: f64,
            #[serde(flatten)]
            estimate: Outcome<DimensionEstimate>,
        }
        let mut intermediate = Vec::new();
        for (theta, est) in per_theta {
            if let Ok(e) = &est {
                self.write(&format!("theta_{theta}.csv"), &series_csv(e)?)?;
            }
            intermediate.push(ThetaEntry { theta, estimate: Outcome::from_result(est, &mut no_scales)? });
        }
        self.write(
            "box.csv",
            &csv_bytes(
                &["r", "count", "s"],
                boxed
                    .series
                    .iter()
                    .zip(&boxed.diagnostics.counts)
                    .map(|(p, &c)| vec![p.delta, c as f64, p.s]),
            )?,
        )?;
        if let Outcome::Ok(h) = &hausdorff {
            self.write("hausdorff.csv", &series_csv(h)?)?;
        }

        #[derive(Serialize)]
        struct DimsReport<'a> {
            input: &'a str,
            points: usize,
            params: dimdist::dyadic::DyadicParams,
            options: EstimatorOptions,
            #[serde(rename = "box")]
            boxed: DimensionEstimate,
            hausdorff: Outcome<DimensionEstimate>,
            intermediate: Vec<ThetaEntry>,
        }
        println!("input: {} ({} points)", input.label, input.space.len());
        println!("box: {:.6}", boxed.value);
        match &hausdorff {
            Outcome::Ok(h) => println!("hausdorff: {:.6}", h.value),
            Outcome::Failed { error } => println!("hausdorff: {error}"),
        }
        for t in &intermediate {
            match &t.estimate {
                Outcome::Ok(e) => println!("theta {}: {:.6}", t.theta, e.value),
                Outcome::Failed { error } => println!("theta {}: {error}", t.theta),
            }
        }
        self.write_json(
            "dims.json",
            &DimsReport {
                input: &input.label,
                points: input.space.len(),
                params: sys.params,
                options,
                boxed,
                hausdorff,
                intermediate,
            },
        )?;
        Ok(if no_scales { exit::NO_USABLE_SCALES } else { exit::OK })
    }

    pub fn holder(&self) -> Result<u8> {
        let input = self.input()?;
        let f = self.map(&input)?;
        let h = self.holder_data()?;
        let radii = self.relative_grid(self.config.profile.radii, &input).values("profile.radii")?;
        let epsilon = self.config.profile.epsilon.unwrap_or(defaults::PROFILE_EPSILON);
        let profile = estimate_ch_profile(&f, &input.subset, h.alpha, h.p, &radii, epsilon)?;
        self.write_json("profile.json", &profile)?;
        self.write(
            "profile.csv",
            &csv_bytes(&["r", "balls", "sum"], profile.entries.iter().map(|e| vec![e.r, e.balls as f64, e.sum]))?,
        )?;
        println!("alpha = {}, p = {}, epsilon = {epsilon}", h.alpha, h.p);
        println!("largest sum: {:.6}, slope: {:.4}, bounded: {}", profile.empirical_ce, profile.slope, profile.bounded);
        Ok(exit::OK)
    }

    pub fn gradient(&self) -> Result<u8> {
        let input = self.input()?;
        let f = self.map(&input)?;
        let g = &self.config.gradient;
        let s = g.s.unwrap_or(defaults::GRADIENT_S);
        let p = g.p.unwrap_or(Exponent::Finite(defaults::GRADIENT_P));
        let solution = hajlasz_gradient(&f, s, p, g.weights.as_deref())?;
        if let Some((x, y)) = solution.first_violation(&f) {
            bail!("solver returned an infeasible gradient at pair ({x}, {y})");
        }
        self.write_json("gradient.json", &solution)?;
        println!("s = {s}, p = {}, method: {:?}", p.as_f64(), solution.method);
        println!("seminorm: {:.16e}", solution.seminorm);
        Ok(exit::OK)
    }

    pub fn bounds(&self) -> Result<u8> {
        let params = self.config.bound.ok_or_else(|| anyhow!("the config has no [bound] table"))?;
        let value = evaluate_bound(&params)?;

        #[derive(Serialize)]
        struct BoundReport {
            params: dimdist::distortion::BoundParams,
            value: BoundValue,
        }
        match value {
            BoundValue::Value(v) => println!("{}", fmt_f64(v)),
            BoundValue::Interval { lower, upper } => println!("[{}, {}]", fmt_f64(lower), fmt_f64(upper)),
        }
        self.write_json("bounds.json", &BoundReport { params, value })?;
        Ok(exit::OK)
    }

    pub fn experiment(&self) -> Result<u8> {
        let input = self.input()?;
        let f = self.map(&input)?;
        let holder = self.holder_data()?;
        let sys = self.system(&input)?;
        let deltas = self.config.deltas()?;
        let t = &self.config.tolerances;
        let options = ExperimentOptions {
            estimator: estimator_options(&self.config, &input.space),
            cu_prime: t.cu_prime,
            tolerance: t.violation.unwrap_or(defaults::VIOLATION_TOL),
            d_override: t.d_override,
        };
        let runs: Vec<(f64, dimdist::Result<PushforwardReport>)> = self
            .config
            .thetas()
            .par_iter()
            .map(|&theta| (theta, distortion_experiment(&sys, &f, &input.subset, theta, holder, &deltas, &options)))
            .collect();

        #[derive(Serialize)]
        struct Summary {
            theta: f64,
            d_headline: Option<f64>,
            image_headline: Option<f64>,
            bound_headline: Option<f64>,
            deltas_used: usize,
            violations: usize,
            error: Option<String>,
        }
        let mut summaries = Vec::new();
        let mut violations = 0;
        for (theta, run) in runs {
            match run {
                Ok(report) => {
                    self.write_json(&format!("experiment_theta_{theta}.json"), &report)?;
                    self.write(
                        &format!("experiment_theta_{theta}.csv"),
                        &csv_bytes(&["delta", "empirical", "bound"], report.plot_rows().into_iter().map(|(a, b, c)| vec![a, b, c]))?,
                    )?;
                    println!(
                        "theta {theta}: dim {:.4} -> image {:.4}, bound {:.4}, {} deltas, {} violations",
                        report.d_headline,
                        report.image_headline,
                        report.bound_headline,
                        report.records.len(),
                        report.violations
                    );
                    violations += report.violations;
                    summaries.push(Summary {
                        theta,
                        d_headline: Some(report.d_headline),
                        image_headline: Some(report.image_headline),
                        bound_headline: Some(report.bound_headline),
                        deltas_used: report.records.len(),
                        violations: report.violations,
                        error: None,
                    });
                }
                Err(dimdist::Error::NoUsableScales(msg)) => {
                    println!("theta {theta}: no usable scales ({msg})");
                    summaries.push(Summary {
                        theta,
                        d_headline: None,
                        image_headline: None,
                        bound_headline: None,
                        deltas_used: 0,
                        violations: 0,
                        error: Some(format!("no usable scales: {msg}")),
                    });
                }
                Err(e) => return Err(anyhow::Error::from(e).context(format!("theta = {theta}"))),
            }
        }
        let usable = summaries.iter().any(|s| s.error.is_none());
        self.write_json("experiment.json", &summaries)?;
        Ok(if violations > 0 {
            exit::VIOLATION
        } else if !usable {
            exit::NO_USABLE_SCALES
        } else {
            exit::OK
        })
    }

    pub fn generate(&self, spec: Option<&str>) -> Result<u8> {
        let text = match spec {
            Some(s) => s.to_string(),
            None => self
                .config
                .input
                .as_ref()
                .and_then(|i| i.generator.clone())
                .ok_or_else(|| anyhow!("give a generator spec or set input.generator"))?,
        };
        let spec: GeneratorSpec = text.parse()?;
        let g = generate(&spec)?;
        let mut buf = Vec::new();
        write_point_cloud(&mut buf, &g.space)?;
        self.write("points.csv", &buf)?;
        println!("{spec}: {} points, resolution floor {:e}", g.space.len(), g.resolution_floor);
        Ok(exit::OK)
    }
}
