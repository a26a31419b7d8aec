//! Closed-form distortion bounds, and the cover-pushing pipeline that turns
//! an optimal admissible cover of `E` into an admissible cover of `f(E)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::{
    bisect_unit_crossing, extrapolate, intermediate_problem, AntichainCover, CoverSolver, Diagnostics, EstimatorOptions,
    LevelRange, SeriesPoint, SkippedScale,
};
use crate::dyadic::{CubeId, DyadicSystem};
use crate::error::{Error, Result};
use crate::holder::MapSample;
use crate::metric::{estimate_uniform_perfectness, SubsetRef};
use crate::stats::is_geometric;

/// Shift applied to `d` when the bound coincides with it.
pub const D_PERTURBATION: f64 = 1e-6;
pub const DEFAULT_TOLERANCE: f64 = 0.05;
/// Fallback for `c_u'` when the target sample is not measurably perfect.
pub const DEFAULT_TARGET_CU: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    /// Compactly Hölder maps.
    Thm11,
    /// Newtonian maps with an `L^p` upper gradient.
    Cor12Newtonian,
    /// Quasisymmetric maps between Ahlfors regular spaces.
    Cor12Qs,
    /// Triebel–Lizorkin maps, and Besov maps with `q ≤ p`.
    #[serde(alias = "thm13-TL")]
    Thm13Tl,
    /// Besov maps with `p < q < ∞`.
    Thm13Besov,
    /// Hausdorff and box dimension version, dispatched on `space`.
    Thm14,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionSpace {
    Besov,
    TriebelLizorkin,
}

/// Inputs to [`evaluate_bound`]. Fields a variant does not use are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub variant: BoundVariant,
    pub d: f64,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default, rename = "Q")]
    pub big_q: Option<f64>,
    #[serde(default)]
    pub space: Option<FunctionSpace>,
}

impl BoundParams {
    pub fn thm11(p: f64, alpha: f64, d: f64) -> Self {
        BoundParams {
            variant: BoundVariant::Thm11,
            d,
            p: Some(p),
            q: None,
            s: None,
            alpha: Some(alpha),
            big_q: None,
            space: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundValue {
    Value(f64),
    Interval { lower: f64, upper: f64 },
}

impl BoundValue {
    /// The upper end (the value itself for single-valued bounds).
    pub fn upper(&self) -> f64 {
        match *self {
            BoundValue::Value(v) => v,
            BoundValue::Interval { upper, .. } => upper,
        }
    }
}

fn need(name: &str, v: Option<f64>) -> Result<f64> {
    let v = v.ok_or_else(|| Error::domain(format!("missing parameter {name}")))?;
    if v.is_nan() {
        return Err(Error::domain(format!("{name} is NaN")));
    }
    Ok(v)
}

fn require(ok: bool, hypothesis: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("hypothesis violated: {hypothesis}")))
    }
}

/// `max{ p·d/(α·p + d), d }`.
pub fn thm11_bound(p: f64, alpha: f64, d: f64) -> f64 {
    (p * d / (alpha * p + d)).max(d)
}

fn tl_form(p: f64, s: f64, q_dim: f64, d: f64) -> f64 {
    (p * d / (s * p - q_dim + d)).max(d)
}

fn besov_form(p: f64, q: f64, s: f64, q_dim: f64, d: f64) -> f64 {
    (q * d / ((s - q_dim / p) * q + d)).max(d)
}

pub fn evaluate_bound(params: &BoundParams) -> Result<BoundValue> {
    let d = params.d;
    require(d >= 0.0 && d.is_finite(), "d ≥ 0")?;
    match params.variant {
        BoundVariant::Thm11 => {
            let p = need("p", params.p)?;
            let alpha = need("alpha", params.alpha)?;
            require(p > 1.0 && p.is_finite(), "p ∈ (1, ∞)")?;
            require(alpha > 0.0 && alpha.is_finite(), "α ∈ (0, ∞)")?;
            if d == 0.0 {
                return Ok(BoundValue::Value(0.0));
            }
            Ok(BoundValue::Value(thm11_bound(p, alpha, d)))
        }
        BoundVariant::Cor12Newtonian | BoundVariant::Cor12Qs => {
            let p = need("p", params.p)?;
            let q_dim = need("Q", params.big_q)?;
            require(q_dim > 1.0 && q_dim.is_finite(), "Q ∈ (1, ∞)")?;
            require(p > q_dim && p.is_finite(), "p ∈ (Q, ∞)")?;
            require(d < q_dim, "d < Q")?;
            let upper = p * d / (p - q_dim + d);
            if params.variant == BoundVariant::Cor12Newtonian {
                return Ok(BoundValue::Value(upper));
            }
            require(d > 0.0, "d ∈ (0, Q)")?;
            Ok(BoundValue::Interval {
                lower: (p - q_dim) * d / (p - d),
                upper,
            })
        }
        BoundVariant::Thm13Tl | BoundVariant::Thm13Besov => {
            let p = need("p", params.p)?;
            let s = need("s", params.s)?;
            let q_dim = need("Q", params.big_q)?;
            require(s > 0.0 && s.is_finite(), "s ∈ (0, ∞)")?;
            require(q_dim > 0.0 && q_dim.is_finite(), "Q > 0")?;
            require(p > q_dim / s && p.is_finite(), "p ∈ (Q/s, ∞)")?;
            require(d < q_dim, "d < Q")?;
            if params.variant == BoundVariant::Thm13Tl {
                return Ok(BoundValue::Value(tl_form(p, s, q_dim, d)));
            }
            let q = need("q", params.q)?;
            require(q > p && q.is_finite(), "p < q < ∞")?;
            Ok(BoundValue::Value(besov_form(p, q, s, q_dim, d)))
        }
        BoundVariant::Thm14 => {
            let p = need("p", params.p)?;
            let s = need("s", params.s)?;
            let q_dim = need("Q", params.big_q)?;
            let space = params
                .space
                .ok_or_else(|| Error::domain("missing parameter space (besov or triebel-lizorkin)"))?;
            require(s > 0.0 && s.is_finite(), "s ∈ (0, ∞)")?;
            require(q_dim > 0.0 && q_dim.is_finite(), "Q > 0")?;
            require(p > q_dim / s && p.is_finite(), "p ∈ (Q/s, ∞)")?;
            match (space, params.q) {
                (FunctionSpace::Besov, Some(q)) if q > p => {
                    require(q.is_finite(), "q < ∞")?;
                    Ok(BoundValue::Value(besov_form(p, q, s, q_dim, d)))
                }
                (FunctionSpace::Besov, None) => Err(Error::domain("missing parameter q")),
                (_, q) => {
                    if let Some(q) = q {
                        require(q > 0.0, "q ∈ (0, ∞]")?;
                    }
                    Ok(BoundValue::Value(tl_form(p, s, q_dim, d)))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Blue,
    Green,
}

/// Red iff `|f(Q)| ≥ δ_Y`, blue iff `|f(Q)| ∈ [δ_Y^(1/θ), δ_Y)`, green below.
pub fn color_of(image_diam: f64, delta_y: f64, theta: f64) -> Color {
    if image_diam >= delta_y {
        Color::Red
    } else if image_diam >= delta_y.powf(1.0 / theta) {
        Color::Blue
    } else {
        Color::Green
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoredCube {
    pub cube: CubeId,
    pub level: usize,
    pub image_diam: f64,
    pub color: Color,
    pub row: usize,
}

fn check_scale(delta_y: f64, theta: f64) -> Result<()> {
    if !(delta_y > 0.0 && delta_y < 1.0) {
        return Err(Error::domain(format!("delta_Y = {delta_y} is outside (0, 1)")));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::domain(format!("theta = {theta} is outside (0, 1]")));
    }
    Ok(())
}

pub fn classify_cubes(
    f: &MapSample,
    sys: &DyadicSystem,
    cubes: &[CubeId],
    delta_y: f64,
    theta: f64,
    row: usize,
) -> Result<Vec<ColoredCube>> {
    check_scale(delta_y, theta)?;
    if sys.n_points != f.source().len() {
        return Err(Error::domain("dyadic system and map source differ in size"));
    }
    cubes
        .iter()
        .map(|&c| {
            if c >= sys.cubes.len() {
                return Err(Error::domain(format!("unknown cube {c}")));
            }
            let cube = sys.cube(c);
            if cube.members.is_empty() {
                return Err(Error::domain(format!("cube {c} has no members")));
            }
            let image_diam = f.image_diameter(&cube.members);
            Ok(ColoredCube {
                cube: c,
                level: cube.level,
                image_diam,
                color: color_of(image_diam, delta_y, theta),
                row,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionGraph {
    pub vertices: Vec<ColoredCube>,
    /// `(parent, child)` vertex indices.
    pub edges: Vec<(usize, usize)>,
    /// Index of the last row built.
    pub terminal_row: usize,
    /// A red cube remained with no children left to split into.
    pub nonterminated: bool,
    pub delta_y: f64,
    pub theta: f64,
}

impl SubdivisionGraph {
    /// Vertices with no outgoing edge.
    pub fn leaves(&self) -> Vec<usize> {
        let mut has_child = vec![false; self.vertices.len()];
        for &(a, _) in &self.edges {
            has_child[a] = true;
        }
        (0..self.vertices.len()).filter(|&v| !has_child[v]).collect()
    }

    /// Leaf colors (terminated graphs only), edge parents, and rows.
    pub fn check(&self) -> Result<()> {
        for &(a, b) in &self.edges {
            if self.vertices[a].color != Color::Red {
                return Err(Error::domain(format!("edge from non-red vertex {a}")));
            }
            if self.vertices[b].row != self.vertices[a].row + 1 {
                return Err(Error::domain(format!("edge {a} → {b} skips a row")));
            }
        }
        if !self.nonterminated {
            if let Some(v) = self.leaves().into_iter().find(|&v| self.vertices[v].color == Color::Red) {
                return Err(Error::domain(format!("red leaf {v}")));
            }
        }
        Ok(())
    }

    pub fn count(&self, color: Color) -> usize {
        self.vertices.iter().filter(|v| v.color == color).count()
    }
}

/// Splits red cubes into their children meeting `E`, one row at a time,
/// until a row has no red cubes or a red cube has no children.
pub fn build_subdivision_graph(
    sys: &DyadicSystem,
    f: &MapSample,
    subset: &SubsetRef,
    initial: &AntichainCover,
    delta_y: f64,
    theta: f64,
) -> Result<SubdivisionGraph> {
    for (i, &a) in initial.cubes.iter().enumerate() {
        if a >= sys.cubes.len() {
            return Err(Error::domain(format!("unknown cube {a}")));
        }
        for &b in &initial.cubes[i + 1..] {
            if sys.is_within(a, b) || sys.is_within(b, a) {
                return Err(Error::domain(format!("initial cover is nested: cubes {a} and {b}")));
            }
        }
    }
    let mask = subset.mask(sys.n_points);
    let meets = |c: CubeId| sys.cube(c).members.iter().any(|&m| mask[m]);
    let mut vertices = classify_cubes(f, sys, &initial.cubes, delta_y, theta, 0)?;
    let mut edges = Vec::new();
    let mut row_start = 0;
    let mut row = 0;
    let mut nonterminated = false;
    loop {
        let row_end = vertices.len();
        let mut next = Vec::new();
        for v in row_start..row_end {
            if vertices[v].color != Color::Red {
                continue;
            }
            let children: Vec<CubeId> = sys
                .cube(vertices[v].cube)
                .children
                .iter()
                .copied()
                .filter(|&c| meets(c))
                .collect();
            if children.is_empty() {
                nonterminated = true;
                continue;
            }
            for ch in classify_cubes(f, sys, &children, delta_y, theta, row + 1)? {
                next.push((v, ch));
            }
        }
        if next.is_empty() {
            break;
        }
        for (parent, ch) in next {
            edges.push((parent, vertices.len()));
            vertices.push(ch);
        }
        row_start = row_end;
        row += 1;
    }
    Ok(SubdivisionGraph {
        vertices,
        edges,
        terminal_row: row,
        nonterminated,
        delta_y,
        theta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushforwardEntry {
    pub cube: CubeId,
    pub color: Color,
    /// `|f(Q)|` for blue cubes; the enlarged diameter `M = δ_Y^(1/θ)` for green.
    pub diameter: f64,
    /// Largest diameter the enlargement can produce, `2M/c_u'` for green.
    pub worst_diameter: f64,
    pub enlarged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushforwardCover {
    pub entries: Vec<PushforwardEntry>,
    pub delta_y: f64,
    pub theta: f64,
    pub cu_prime: f64,
}

impl PushforwardCover {
    /// `[δ_Y^(1/θ), max(δ_Y, 2·δ_Y^(1/θ)/c_u')]`.
    pub fn admissible_interval(&self) -> (f64, f64) {
        let lower = self.delta_y.powf(1.0 / self.theta);
        (lower, self.delta_y.max(2.0 * lower / self.cu_prime))
    }

    /// Entries whose reported or worst-case diameter leaves the interval.
    pub fn inadmissible(&self) -> Vec<usize> {
        let (lo, hi) = self.admissible_interval();
        (0..self.entries.len())
            .filter(|&i| {
                let e = &self.entries[i];
                !(e.diameter >= lo && e.diameter <= hi && e.worst_diameter >= lo && e.worst_diameter <= hi)
            })
            .collect()
    }

    pub fn sum(&self, s: f64) -> f64 {
        self.entries.iter().map(|e| e.diameter.powf(s)).sum()
    }

    /// Exponent where `Σ |U|^s` crosses 1.
    pub fn critical_exponent(&self, bracket_hi: f64, tol: f64) -> f64 {
        bisect_unit_crossing(|s| self.sum(s), bracket_hi, tol).s
    }
}

pub fn pushforward_cover(graph: &SubdivisionGraph, cu_prime: f64) -> Result<PushforwardCover> {
    if !(cu_prime > 0.0 && cu_prime < 1.0) {
        return Err(Error::domain(format!("c_u' = {cu_prime} is outside (0, 1)")));
    }
    if graph.nonterminated {
        return Err(Error::domain(
            "subdivision stopped at the deepest level with red cubes left; the image cover is incomplete",
        ));
    }
    let m = graph.delta_y.powf(1.0 / graph.theta);
    let entries = graph
        .leaves()
        .into_iter()
        .map(|v| {
            let c = &graph.vertices[v];
            match c.color {
                Color::Blue => Ok(PushforwardEntry {
                    cube: c.cube,
                    color: Color::Blue,
                    diameter: c.image_diam,
                    worst_diameter: c.image_diam,
                    enlarged: false,
                }),
                Color::Green => Ok(PushforwardEntry {
                    cube: c.cube,
                    color: Color::Green,
                    diameter: m,
                    worst_diameter: 2.0 * m / cu_prime,
                    enlarged: true,
                }),
                Color::Red => Err(Error::domain(format!("red leaf at cube {}", c.cube))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PushforwardCover {
        entries,
        delta_y: graph.delta_y,
        theta: graph.theta,
        cu_prime,
    })
}

/// Hölder data of the map under test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderData {
    pub p: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub estimator: EstimatorOptions,
    /// Measured on the target sample when `None`.
    pub cu_prime: Option<f64>,
    pub tolerance: f64,
    /// Input dimension used for every δ instead of the per-scale estimate.
    pub d_override: Option<f64>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            estimator: EstimatorOptions::default(),
            cu_prime: None,
            tolerance: DEFAULT_TOLERANCE,
            d_override: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorCounts {
    pub red: usize,
    pub blue: usize,
    pub green: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub delta: f64,
    pub levels: LevelRange,
    /// Critical exponent of the optimal admissible cover of `E` at this δ.
    pub d_measured: f64,
    /// The `d` entering the bound, after any override or perturbation.
    pub d_used: f64,
    pub bound: f64,
    pub delta_y: f64,
    pub initial_cubes: usize,
    pub counts: ColorCounts,
    pub rows: usize,
    pub nonterminated: bool,
    pub image_sets: usize,
    /// `Σ |U|^s` of the image cover at `s = d_used` and `s = bound`.
    pub sum_at_d: f64,
    pub sum_at_bound: f64,
    /// Critical exponent of the image cover; `None` when nonterminated.
    pub empirical: Option<f64>,
    pub admissible: bool,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushforwardReport {
    pub theta: f64,
    pub holder: HolderData,
    pub cu_prime: f64,
    pub cu_prime_measured: bool,
    pub tolerance: f64,
    pub records: Vec<DeltaRecord>,
    pub skipped: Vec<SkippedScale>,
    /// Extrapolated `dim_θ E`, `dim_θ f(E)` and the bound at the former.
    pub d_headline: f64,
    pub image_headline: f64,
    pub bound_headline: f64,
    pub image_diagnostics: Diagnostics,
    pub violations: usize,
    pub inadmissible_entries: usize,
}

impl PushforwardReport {
    pub fn has_violation(&self) -> bool {
        self.violations > 0
    }

    /// `(δ, empirical, bound)` rows for plotting.
    pub fn plot_rows(&self) -> Vec<(f64, f64, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.empirical.map(|e| (r.delta, e, r.bound)))
            .collect()
    }
}

/// `c_u'` measured on the whole target sample over a halving radius grid
/// below half its diameter; `None` when a ball holds only its center.
pub fn measure_target_perfectness(f: &MapSample) -> Option<f64> {
    let target = f.target();
    if target.len() < 2 {
        return None;
    }
    let all = SubsetRef::full(target);
    let diam = target.diameter_of(all.ids());
    let radii: Vec<f64> = (1..=8).map(|i| diam * 0.5f64.powi(i)).collect();
    estimate_uniform_perfectness(target, &all, &radii)
        .ok()
        .and_then(|p| p.constant())
        .filter(|&c| c > 0.0 && c < 1.0)
}

/// Runs the per-δ pipeline: optimal admissible cover of `E` at its critical
/// exponent `d`, `δ_Y = δ^(d/D)` with `D` the compactly-Hölder bound,
/// coloring and subdivision, pushforward, and the critical exponent of the
/// image cover, which is compared against `D`.
pub fn distortion_experiment(
    sys: &DyadicSystem,
    f: &MapSample,
    subset: &SubsetRef,
    theta: f64,
    holder: HolderData,
    deltas: &[f64],
    options: &ExperimentOptions,
) -> Result<PushforwardReport> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::domain(format!("theta = {theta} is outside (0, 1]")));
    }
    evaluate_bound(&BoundParams::thm11(holder.p, holder.alpha, 1.0))?;
    if let Some(d) = options.d_override {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::domain(format!("supplied d = {d} must be nonnegative")));
        }
    }
    let mut grid = deltas.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    if grid.is_empty() || !is_geometric(&grid) {
        return Err(Error::domain("delta grid must be non-empty and geometric"));
    }
    let (cu_prime, measured) = match options.cu_prime {
        Some(c) => (c, false),
        None => match measure_target_perfectness(f) {
            Some(c) => (c, true),
            None => (DEFAULT_TARGET_CU, false),
        },
    };
    if !(cu_prime > 0.0 && cu_prime < 1.0) {
        return Err(Error::domain(format!("c_u' = {cu_prime} is outside (0, 1)")));
    }
    let solver = CoverSolver::new(sys, subset)?;
    let est = &options.estimator;
    let outcomes: Vec<Result<std::result::Result<DeltaRecord, SkippedScale>>> = grid
        .par_iter()
        .map(|&delta| {
            let problem = match intermediate_problem(sys, theta, delta, est.cu, solver.resolution())? {
                Ok(p) => p,
                Err(skip) => return Ok(Err(skip)),
            };
            let root = solver.critical_exponent(problem.levels, problem.policy, est.bracket_hi, est.bisection_tol)?;
            let initial = solver.solve(root.s, problem.levels, problem.policy)?;
            let mut d_used = options.d_override.unwrap_or(root.s);
            let mut bound = thm11_bound(holder.p, holder.alpha, d_used);
            if bound == d_used || d_used == 0.0 {
                d_used += D_PERTURBATION;
                bound = thm11_bound(holder.p, holder.alpha, d_used);
            }
            let delta_y = delta.powf(d_used / bound);
            let graph = build_subdivision_graph(sys, f, subset, &initial, delta_y, theta)
                .map_err(|e| Error::domain(format!("delta = {delta}: {e}")))?;
            let counts = ColorCounts {
                red: graph.count(Color::Red),
                blue: graph.count(Color::Blue),
                green: graph.count(Color::Green),
            };
            let mut record = DeltaRecord {
                delta,
                levels: problem.levels,
                d_measured: root.s,
                d_used,
                bound,
                delta_y,
                initial_cubes: initial.cubes.len(),
                counts,
                rows: graph.terminal_row + 1,
                nonterminated: graph.nonterminated,
                image_sets: 0,
                sum_at_d: f64::NAN,
                sum_at_bound: f64::NAN,
                empirical: None,
                admissible: false,
                violation: false,
            };
            if !graph.nonterminated {
                let cover = pushforward_cover(&graph, cu_prime)?;
                let s_img = cover.critical_exponent(est.bracket_hi, est.bisection_tol);
                record.image_sets = cover.entries.len();
                record.sum_at_d = cover.sum(d_used);
                record.sum_at_bound = cover.sum(bound);
                record.empirical = Some(s_img);
                record.admissible = cover.inadmissible().is_empty();
                record.violation = s_img > bound + options.tolerance;
            }
            Ok(Ok(record))
        })
        .collect();
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o? {
            Ok(r) => records.push(r),
            Err(s) => skipped.push(s),
        }
    }
    if records.is_empty() {
        return Err(Error::NoUsableScales(
            "every delta gave an empty or unresolved level window".into(),
        ));
    }
    let input_series: Vec<SeriesPoint> = records
        .iter()
        .map(|r| SeriesPoint { delta: r.delta, s: r.d_measured })
        .collect();
    let image_series: Vec<SeriesPoint> = records
        .iter()
        .filter_map(|r| r.empirical.map(|s| SeriesPoint { delta: r.delta_y, s }))
        .collect();
    let (d_headline, _) = extrapolate(&input_series, est.residual_cap);
    let (image_headline, image_diagnostics) = extrapolate(&image_series, est.residual_cap);
    let d_for_bound = options.d_override.unwrap_or(d_headline);
    let bound_headline = if d_for_bound == 0.0 { 0.0 } else { thm11_bound(holder.p, holder.alpha, d_for_bound) };
    let violations = records.iter().filter(|r| r.violation).count();
    let inadmissible_entries = records.iter().filter(|r| r.empirical.is_some() && !r.admissible).count();
    Ok(PushforwardReport {
        theta,
        holder,
        cu_prime,
        cu_prime_measured: measured,
        tolerance: options.tolerance,
        records,
        skipped,
        d_headline,
        image_headline,
        bound_headline,
        image_diagnostics,
        violations,
        inadmissible_entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{build_system, DyadicParams};
    use crate::generators::{generate, generate_map, MapKind};
    use crate::metric::{BaseMetric, FiniteMetricSpace};

    #[test]
    fn thm11_example_and_limit() {
        let v = evaluate_bound(&BoundParams::thm11(2.0, 0.5, 0.5)).unwrap().upper();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let d = 0.7;
        let v = evaluate_bound(&BoundParams::thm11(1e6, 1.0, d)).unwrap().upper();
        assert!((v - d).abs() < 1e-5);
    }

    #[test]
    fn tl_at_unit_smoothness_matches_newtonian() {
        let base = BoundParams {
            variant: BoundVariant::Thm13Tl,
            d: 0.8,
            p: Some(3.0),
            q: Some(2.0),
            s: Some(1.0),
            alpha: None,
            big_q: Some(2.0),
            space: None,
        };
        let tl = evaluate_bound(&base).unwrap().upper();
        let cor = evaluate_bound(&BoundParams { variant: BoundVariant::Cor12Newtonian, ..base }).unwrap().upper();
        assert_eq!(tl, cor);
    }

    #[test]
    fn hypotheses_are_named() {
        let err = evaluate_bound(&BoundParams::thm11(1.0, 0.5, 0.3)).unwrap_err();
        assert!(err.to_string().contains("p ∈ (1, ∞)"));
        let qs = BoundParams {
            variant: BoundVariant::Cor12Qs,
            d: 2.5,
            p: Some(4.0),
            q: None,
            s: None,
            alpha: None,
            big_q: Some(2.0),
            space: None,
        };
        assert!(evaluate_bound(&qs).unwrap_err().to_string().contains("d < Q"));
        let ok = evaluate_bound(&BoundParams { d: 1.0, ..qs }).unwrap();
        assert_eq!(ok, BoundValue::Interval { lower: 2.0 / 3.0, upper: 4.0 / 3.0 });
    }

    #[test]
    fn thm14_dispatch() {
        let base = BoundParams {
            variant: BoundVariant::Thm14,
            d: 0.5,
            p: Some(4.0),
            q: Some(8.0),
            s: Some(1.0),
            alpha: None,
            big_q: Some(2.0),
            space: Some(FunctionSpace::Besov),
        };
        let besov = evaluate_bound(&base).unwrap().upper();
        assert!((besov - besov_form(4.0, 8.0, 1.0, 2.0, 0.5)).abs() < 1e-15);
        let low_q = evaluate_bound(&BoundParams { q: Some(2.0), ..base }).unwrap().upper();
        assert_eq!(low_q, tl_form(4.0, 1.0, 2.0, 0.5));
        let tl = evaluate_bound(&BoundParams { space: Some(FunctionSpace::TriebelLizorkin), ..base }).unwrap().upper();
        assert_eq!(tl, low_q);
        // no d < Q requirement here
        assert!(evaluate_bound(&BoundParams { d: 3.0, ..base }).is_ok());
    }

    #[test]
    fn color_boundaries() {
        let dy = 0.01;
        assert_eq!(color_of(dy, dy, 0.5), Color::Red);
        assert_eq!(color_of(0.0, dy, 0.5), Color::Green);
        assert_eq!(color_of((dy.powf(2.0) + dy) / 2.0, dy, 0.5), Color::Blue);
        // θ = 1 leaves no room for blue
        assert_eq!(color_of(dy * 0.999, dy, 1.0), Color::Green);
    }

    fn cantor_setup(depth: u32) -> (crate::generators::Generated, DyadicSystem) {
        let g = generate(&format!("cantor(1/3,{depth})").parse().unwrap()).unwrap();
        let k = crate::dyadic::default_max_level(&g.space, 0.5);
        let sys = build_system(&g.space, &DyadicParams::relaxed(k)).unwrap();
        (g, sys)
    }

    #[test]
    fn identity_has_no_red_cubes() {
        let (g, sys) = cantor_setup(6);
        let f = MapSample::identity(g.space.clone());
        let solver = CoverSolver::new(&sys, &g.subset).unwrap();
        let cover = solver
            .solve(0.6, LevelRange { lo: 3, hi: 5 }, crate::dimension::DiameterPolicy::Members)
            .unwrap();
        let graph = build_subdivision_graph(&sys, &f, &g.subset, &cover, 0.9, 0.5).unwrap();
        assert_eq!(graph.count(Color::Red), 0);
        assert!(graph.edges.is_empty());
        graph.check().unwrap();
    }

    #[test]
    fn expanding_map_subdivides() {
        let (g, sys) = cantor_setup(8);
        let f = generate_map(MapKind::Linear { c: 10.0 }, &g.space).unwrap();
        let solver = CoverSolver::new(&sys, &g.subset).unwrap();
        let cover = solver
            .solve(0.6, LevelRange { lo: 4, hi: 6 }, crate::dimension::DiameterPolicy::Members)
            .unwrap();
        let graph = build_subdivision_graph(&sys, &f, &g.subset, &cover, 0.05, 0.5).unwrap();
        assert!(graph.terminal_row >= 1);
        assert!(!graph.nonterminated);
        graph.check().unwrap();
        let push = pushforward_cover(&graph, 0.5).unwrap();
        assert!(push.inadmissible().is_empty());
    }

    #[test]
    fn nested_initial_cover_rejected() {
        let (g, sys) = cantor_setup(3);
        let f = MapSample::identity(g.space.clone());
        let root = sys.roots().next().unwrap();
        let child = sys.cube(root).children[0];
        let cover = AntichainCover { cubes: vec![root, child], levels: LevelRange { lo: 0, hi: 1 }, s: 1.0, cost: 0.0 };
        assert!(build_subdivision_graph(&sys, &f, &g.subset, &cover, 0.5, 1.0).is_err());
    }

    #[test]
    fn all_green_cover_respects_enlargement_bounds() {
        let s = FiniteMetricSpace::from_coords(1, vec![0.0, 0.001, 0.5, 0.501], BaseMetric::Euclidean).unwrap();
        let sys = build_system(&s, &DyadicParams::relaxed(12)).unwrap();
        let all = SubsetRef::full(&s);
        let f = MapSample::identity(s.clone());
        let solver = CoverSolver::new(&sys, &all).unwrap();
        let cover = solver
            .solve(1.0, LevelRange { lo: 6, hi: 8 }, crate::dimension::DiameterPolicy::Members)
            .unwrap();
        let graph = build_subdivision_graph(&sys, &f, &all, &cover, 0.2, 0.5).unwrap();
        assert_eq!(graph.count(Color::Green), graph.vertices.len());
        let push = pushforward_cover(&graph, 0.5).unwrap();
        let m = 0.2f64.powf(2.0);
        for e in &push.entries {
            assert!(e.diameter >= m && e.worst_diameter <= 4.0 * m);
        }
    }
}
