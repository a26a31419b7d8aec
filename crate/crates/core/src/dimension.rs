//! Box-counting, Hausdorff and θ-intermediate dimension estimates.
//!
//! Box counting uses greedy covering numbers. The cover-based estimates solve,
//! for each scale δ, the exact minimum of `Σ w(Q)^s` over antichains of dyadic
//! cubes from an admissible level window, find the exponent where that
//! minimum equals 1, and extrapolate the per-scale exponents to δ → 0 along
//! `1 / log(1/δ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{CubeId, DyadicSystem};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, SubsetRef};
use crate::stats::{fit_line, is_geometric};

/// Largest subset accepted by the exact covering-number oracle.
pub const EXACT_ORACLE_LIMIT: usize = 12;
pub const DEFAULT_BISECTION_TOL: f64 = 1e-3;
pub const DEFAULT_RESIDUAL_CAP: f64 = 0.1;
/// Ambient uniform-perfectness constant used in the level window when none
/// is supplied.
pub const DEFAULT_AMBIENT_CU: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMethod {
    Greedy,
    ExactOracle,
}

/// Relative slack on `r` in covering comparisons, so that distances equal to
/// `r` up to rounding in the generated coordinates count as `r`.
pub const COVER_SLACK: f64 = 1e-9;

/// Smallest number of sets of diameter at most `r` covering `E`.
///
/// `Greedy` scans points in id order and puts each into the first open group
/// it can join without the group's diameter exceeding `r`; `ExactOracle`
/// minimizes over all partitions and is limited to 12 points.
pub fn covering_number(space: &FiniteMetricSpace, subset: &SubsetRef, r: f64, method: CoverMethod) -> Result<usize> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("covering radius {r} is not positive")));
    }
    let ids = subset.ids();
    let r = r * (1.0 + COVER_SLACK);
    match method {
        CoverMethod::Greedy => Ok(greedy_cover_groups(space, ids, r)),
        CoverMethod::ExactOracle => {
            if ids.len() > EXACT_ORACLE_LIMIT {
                return Err(Error::capacity(format!(
                    "exact covering oracle is limited to {EXACT_ORACLE_LIMIT} points, got {}",
                    ids.len()
                )));
            }
            Ok(exact_cover_groups(space, ids, r))
        }
    }
}

fn greedy_cover_groups(space: &FiniteMetricSpace, ids: &[usize], r: f64) -> usize {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    'points: for &x in ids {
        for g in groups.iter_mut() {
            if g.iter().all(|&m| space.d(x, m) <= r) {
                g.push(x);
                continue 'points;
            }
        }
        groups.push(vec![x]);
    }
    groups.len()
}

fn exact_cover_groups(space: &FiniteMetricSpace, ids: &[usize], r: f64) -> usize {
    let n = ids.len();
    let full = (1usize << n) - 1;
    let mut fits = vec![false; full + 1];
    fits[0] = true;
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        fits[mask] = fits[rest] && (0..n).filter(|&j| rest >> j & 1 == 1).all(|j| space.d(ids[low], ids[j]) <= r);
    }
    let mut best = vec![usize::MAX; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let low = 1usize << mask.trailing_zeros();
        let rest = mask ^ low;
        // the part holding the lowest remaining point, over all its subsets
        let mut sub = rest;
        loop {
            let part = sub | low;
            if fits[part] && best[mask ^ part] != usize::MAX {
                best[mask] = best[mask].min(best[mask ^ part] + 1);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DimensionKind {
    Box,
    Hausdorff,
    Intermediate { theta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub delta: f64,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SkippedScale {
    EmptyWindow { delta: f64 },
    BeyondResolution { delta: f64, k_max: i64, depth: usize },
    /// The finest window level or the diameter floor is below the smallest
    /// cube diameter of `E`, where covers only see isolated points.
    BelowSampleResolution { delta: f64, k_max: i64, resolution: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// How `value` follows from `series`.
    pub rule: String,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub fallback_used: bool,
    /// Slopes between consecutive scales (box) or consecutive exponents.
    pub local_slopes: Vec<f64>,
    /// Raw covering counts for box estimates.
    pub counts: Vec<usize>,
    pub skipped: Vec<SkippedScale>,
    pub caveats: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub kind: DimensionKind,
    pub value: f64,
    /// `[smallest, largest]` scale actually used.
    pub scale_window: (f64, f64),
    /// Strictly decreasing in δ.
    pub series: Vec<SeriesPoint>,
    pub diagnostics: Diagnostics,
}

/// Least-squares slope of `log N(E, r)` against `log(1/r)`.
pub fn box_dimension(space: &FiniteMetricSpace, subset: &SubsetRef, scales: &[f64]) -> Result<DimensionEstimate> {
    if scales.len() < 4 {
        return Err(Error::domain("box dimension needs at least 4 scales"));
    }
    if scales.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::domain("scales must be positive and finite"));
    }
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.total_cmp(a));
    if !is_geometric(&scales) {
        return Err(Error::domain("scale grid must be geometric with distinct values"));
    }
    let counts: Vec<usize> = scales
        .iter()
        .map(|&r| greedy_cover_groups(space, subset.ids(), r * (1.0 + COVER_SLACK)))
        .collect();
    let xs: Vec<f64> = scales.iter().map(|r| (1.0 / r).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = fit_line(&xs, &ys);
    let local_slopes = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let mut caveats = Vec::new();
    let floor = space.diameter_of(subset.ids()).min(space.resolution_floor());
    if subset.len() > 1 && scales.last().is_some_and(|&r| r < floor) {
        caveats.push(format!(
            "scales below the resolution floor {floor:e} see isolated points only"
        ));
    }
    let series = scales
        .iter()
        .zip(&ys)
        .map(|(&r, &lnn)| SeriesPoint {
            delta: r,
            s: if r < 1.0 { lnn / (1.0 / r).ln() } else { 0.0 },
        })
        .collect();
    Ok(DimensionEstimate {
        kind: DimensionKind::Box,
        value: fit.slope.max(0.0),
        scale_window: (*scales.last().unwrap(), scales[0]),
        series,
        diagnostics: Diagnostics {
            rule: "least-squares slope of ln N(E,r) against ln(1/r)".into(),
            slope: fit.slope,
            intercept: fit.intercept,
            residual: fit.rms_residual,
            fallback_used: false,
            local_slopes,
            counts,
            skipped: Vec::new(),
            caveats,
        },
    })
}

/// Constants entering the admissible level window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowConstants {
    /// Uniform-perfectness constant of the ambient space.
    pub cu: f64,
    pub c0: f64,
    #[serde(rename = "C0")]
    pub big_c0: f64,
    pub b: f64,
}

impl WindowConstants {
    pub fn from_system(sys: &DyadicSystem, cu: f64) -> Self {
        WindowConstants {
            cu,
            c0: sys.params.separation,
            big_c0: sys.params.covering,
            b: sys.params.ratio,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cu > 0.0 && self.c0 > 0.0 && self.big_c0 > 0.0) {
            return Err(Error::domain("window constants must be positive"));
        }
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(Error::domain(format!("b = {} is outside (0, 1)", self.b)));
        }
        Ok(())
    }

    /// Smallest `k ≥ 0` with `b^k ≤ bound`.
    fn first_level_below(&self, bound: f64) -> i64 {
        let k = (bound.ln() / self.b.ln() - 1e-9).ceil() as i64;
        k.max(0)
    }

    /// Largest `k` with `b^k ≥ bound`.
    fn last_level_above(&self, bound: f64) -> i64 {
        (bound.ln() / self.b.ln() + 1e-9).floor() as i64
    }
}

/// Level window `{ k : 3/(cu·c0)·δ^(1/θ) ≤ b^k ≤ δ/(4·C0) }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelWindow {
    pub k_min: i64,
    pub k_max: i64,
    pub theta: f64,
    pub delta: f64,
    pub constants: WindowConstants,
}

impl LevelWindow {
    pub fn is_empty(&self) -> bool {
        self.k_min > self.k_max
    }

    pub fn range(&self) -> Option<LevelRange> {
        (!self.is_empty()).then_some(LevelRange {
            lo: self.k_min as usize,
            hi: self.k_max as usize,
        })
    }
}

pub fn admissible_levels(theta: f64, delta: f64, constants: WindowConstants) -> Result<LevelWindow> {
    check_theta(theta)?;
    check_delta(delta)?;
    constants.validate()?;
    let upper = delta / (4.0 * constants.big_c0);
    let lower = 3.0 / (constants.cu * constants.c0) * delta.powf(1.0 / theta);
    Ok(LevelWindow {
        k_min: constants.first_level_below(upper),
        k_max: constants.last_level_above(lower),
        theta,
        delta,
        constants,
    })
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("theta = {theta} is outside (0, 1]")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("delta = {delta} is outside (0, 1)")))
    }
}

/// Inclusive range of levels a cover may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRange {
    pub lo: usize,
    pub hi: usize,
}

/// How a cube's diameter enters `Σ w(Q)^s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiameterPolicy {
    /// Member-set diameter; zero-diameter cubes cost `0^s` (1 at `s = 0`).
    Members,
    /// Member-set diameter enlarged to at least `floor`, the smallest
    /// admissible cover-set diameter at the current scale.
    Enlarged { floor: f64 },
}

impl DiameterPolicy {
    fn weight(&self, diam: f64) -> f64 {
        match *self {
            DiameterPolicy::Members => diam,
            DiameterPolicy::Enlarged { floor } => diam.max(floor),
        }
    }
}

/// An antichain of cubes covering a subset within a level range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntichainCover {
    pub cubes: Vec<CubeId>,
    pub levels: LevelRange,
    pub s: f64,
    pub cost: f64,
}

impl AntichainCover {
    /// Checks non-nesting, coverage of `subset` and level membership.
    pub fn check(&self, sys: &DyadicSystem, subset: &SubsetRef) -> Result<()> {
        for &c in &self.cubes {
            let level = sys.cube(c).level;
            if level < self.levels.lo || level > self.levels.hi {
                return Err(Error::domain(format!("cube {c} at level {level} is outside the window")));
            }
        }
        for (i, &a) in self.cubes.iter().enumerate() {
            for &b in &self.cubes[i + 1..] {
                if sys.is_within(a, b) || sys.is_within(b, a) {
                    return Err(Error::domain(format!("cubes {a} and {b} are nested")));
                }
            }
        }
        let mut covered = vec![false; sys.n_points];
        for &c in &self.cubes {
            for &m in &sys.cube(c).members {
                covered[m] = true;
            }
        }
        if let Some(&x) = subset.ids().iter().find(|&&x| !covered[x]) {
            return Err(Error::domain(format!("point {x} is not covered")));
        }
        Ok(())
    }
}

/// Exact minimum-cost antichain covers of one subset over one system.
pub struct CoverSolver<'a> {
    sys: &'a DyadicSystem,
    meets: Vec<bool>,
    resolution: f64,
}

impl<'a> CoverSolver<'a> {
    pub fn new(sys: &'a DyadicSystem, subset: &SubsetRef) -> Result<Self> {
        if let Some(&bad) = subset.ids().iter().find(|&&x| x >= sys.n_points) {
            return Err(Error::domain(format!("subset member {bad} is not in the system")));
        }
        let mask = subset.mask(sys.n_points);
        let meets: Vec<bool> = sys
            .cubes
            .iter()
            .map(|c| c.members.iter().any(|&m| mask[m]))
            .collect();
        let resolution = sys
            .cubes
            .iter()
            .zip(&meets)
            .filter(|(c, &m)| m && c.diam > 0.0)
            .map(|(c, _)| c.diam)
            .fold(f64::INFINITY, f64::min);
        Ok(CoverSolver { sys, meets, resolution })
    }

    /// Smallest positive diameter among cubes meeting `E` (infinite when
    /// every such cube is a single point).
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn system(&self) -> &DyadicSystem {
        self.sys
    }

    fn check_range(&self, levels: LevelRange) -> Result<()> {
        if levels.lo > levels.hi {
            return Err(Error::domain("level window is empty"));
        }
        if levels.hi > self.sys.depth() {
            return Err(Error::domain(format!(
                "level window reaches {} but the system stops at {}",
                levels.hi,
                self.sys.depth()
            )));
        }
        Ok(())
    }

    /// Bottom-up DP; `take[c]` records whether `c` itself is used when its
    /// ancestors are not.
    fn run(&self, s: f64, levels: LevelRange, policy: DiameterPolicy) -> (f64, Vec<f64>, Vec<bool>) {
        let sys = self.sys;
        let end = sys.level_start[levels.hi + 1];
        let mut cost = vec![0.0; end];
        let mut take = vec![false; end];
        for k in (0..=levels.hi).rev() {
            for c in sys.level(k) {
                if !self.meets[c] {
                    continue;
                }
                let cube = sys.cube(c);
                let own = policy.weight(cube.diam).powf(s);
                if k == levels.hi {
                    cost[c] = own;
                    take[c] = true;
                    continue;
                }
                let below: f64 = cube.children.iter().map(|&ch| cost[ch]).sum();
                if k >= levels.lo && own <= below {
                    cost[c] = own;
                    take[c] = true;
                } else {
                    cost[c] = below;
                }
            }
        }
        let total = sys.roots().filter(|&r| self.meets[r]).map(|r| cost[r]).sum();
        (total, cost, take)
    }

    pub fn cost(&self, s: f64, levels: LevelRange, policy: DiameterPolicy) -> Result<f64> {
        self.check_range(levels)?;
        Ok(self.run(s, levels, policy).0)
    }

    pub fn solve(&self, s: f64, levels: LevelRange, policy: DiameterPolicy) -> Result<AntichainCover> {
        self.check_range(levels)?;
        let (total, _, take) = self.run(s, levels, policy);
        let mut cubes = Vec::new();
        let mut stack: Vec<CubeId> = self.sys.roots().filter(|&r| self.meets[r]).rev().collect();
        while let Some(c) = stack.pop() {
            if take[c] {
                cubes.push(c);
            } else {
                stack.extend(self.sys.cube(c).children.iter().rev().filter(|&&ch| self.meets[ch]));
            }
        }
        Ok(AntichainCover {
            cubes,
            levels,
            s,
            cost: total,
        })
    }

    /// Exponent where the minimal cover cost crosses 1.
    pub fn critical_exponent(&self, levels: LevelRange, policy: DiameterPolicy, bracket_hi: f64, tol: f64) -> Result<Root> {
        self.check_range(levels)?;
        Ok(bisect_unit_crossing(|s| self.run(s, levels, policy).0, bracket_hi, tol))
    }
}

/// `min_cover_cost`: the minimal `Σ w(Q)^s` over admissible antichains and one
/// minimizer.
pub fn min_cover_cost(
    sys: &DyadicSystem,
    subset: &SubsetRef,
    s: f64,
    window: &LevelWindow,
    policy: DiameterPolicy,
) -> Result<(f64, AntichainCover)> {
    let levels = window
        .range()
        .ok_or_else(|| Error::domain("level window is empty"))?;
    let cover = CoverSolver::new(sys, subset)?.solve(s, levels, policy)?;
    Ok((cover.cost, cover))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub s: f64,
    /// False when the cost never dropped to 1 inside the widened bracket.
    pub bracketed: bool,
}

/// Bisection for `cost(s) = 1` on a non-increasing cost; `cost(0) ≤ 1` gives 0.
pub fn bisect_unit_crossing(cost: impl Fn(f64) -> f64, bracket_hi: f64, tol: f64) -> Root {
    if cost(0.0) <= 1.0 {
        return Root { s: 0.0, bracketed: true };
    }
    let mut hi = bracket_hi.max(tol);
    let mut widenings = 0;
    while cost(hi) > 1.0 {
        if widenings == 6 {
            return Root { s: hi, bracketed: false };
        }
        hi *= 2.0;
        widenings += 1;
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if cost(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Root {
        s: 0.5 * (lo + hi),
        bracketed: true,
    }
}

/// Tunables shared by the cover-based estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// Ambient uniform-perfectness constant in the level window.
    pub cu: f64,
    pub bisection_tol: f64,
    /// Above this RMS residual the extrapolation falls back to the last
    /// per-scale exponent.
    pub residual_cap: f64,
    /// Initial upper end of the bisection bracket (ambient dimension + 2).
    pub bracket_hi: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            cu: DEFAULT_AMBIENT_CU,
            bisection_tol: DEFAULT_BISECTION_TOL,
            residual_cap: DEFAULT_RESIDUAL_CAP,
            bracket_hi: 3.0,
        }
    }
}

impl EstimatorOptions {
    pub fn for_space(space: &FiniteMetricSpace) -> Self {
        EstimatorOptions {
            bracket_hi: space.ambient_dim().unwrap_or(1) as f64 + 2.0,
            ..Self::default()
        }
    }
}

/// The cover problem at one scale: which levels, and the smallest
/// admissible cover-set diameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleProblem {
    pub delta: f64,
    pub levels: LevelRange,
    pub policy: DiameterPolicy,
}

/// Per-scale setup for `dim_θ`: the admissible window for θ < 1, and for
/// θ = 1 (where that window is always inverted) the single coarsest level
/// with `b^k ≤ δ/(4·C0)`. Cover sets are enlarged to `δ^(1/θ)`. Scales whose
/// window or floor falls below the solver resolution are skipped.
pub fn intermediate_problem(
    sys: &DyadicSystem,
    theta: f64,
    delta: f64,
    cu: f64,
    resolution: f64,
) -> Result<std::result::Result<ScaleProblem, SkippedScale>> {
    check_theta(theta)?;
    check_delta(delta)?;
    let constants = WindowConstants::from_system(sys, cu);
    let window = if theta == 1.0 {
        let mut w = admissible_levels(theta, delta, constants)?;
        w.k_max = w.k_min;
        w
    } else {
        admissible_levels(theta, delta, constants)?
    };
    if window.is_empty() {
        return Ok(Err(SkippedScale::EmptyWindow { delta }));
    }
    if window.k_max > sys.depth() as i64 {
        return Ok(Err(SkippedScale::BeyondResolution {
            delta,
            k_max: window.k_max,
            depth: sys.depth(),
        }));
    }
    let floor = delta.powf(1.0 / theta);
    if resolution.is_finite() && (sys.params.scale(window.k_max as usize) < resolution || floor < resolution) {
        return Ok(Err(SkippedScale::BelowSampleResolution {
            delta,
            k_max: window.k_max,
            resolution,
        }));
    }
    Ok(Ok(ScaleProblem {
        delta,
        levels: window.range().expect("non-empty"),
        policy: DiameterPolicy::Enlarged { floor },
    }))
}

/// Per-scale setup for `dim_H`: levels from the coarsest with
/// `b^k ≤ δ/(4·C0)` down to the deepest level, cover sets enlarged to
/// `resolution_floor` (pass [`CoverSolver::resolution`]).
pub fn hausdorff_problem(
    sys: &DyadicSystem,
    delta: f64,
    resolution_floor: f64,
) -> Result<std::result::Result<ScaleProblem, SkippedScale>> {
    check_delta(delta)?;
    let constants = WindowConstants::from_system(sys, DEFAULT_AMBIENT_CU);
    let k_min = constants.first_level_below(delta / (4.0 * constants.big_c0));
    if k_min > sys.depth() as i64 {
        return Ok(Err(SkippedScale::BeyondResolution {
            delta,
            k_max: k_min,
            depth: sys.depth(),
        }));
    }
    Ok(Ok(ScaleProblem {
        delta,
        levels: LevelRange {
            lo: k_min as usize,
            hi: sys.depth(),
        },
        policy: DiameterPolicy::Enlarged {
            floor: resolution_floor,
        },
    }))
}

/// Solves one scale: the critical exponent and its optimal cover.
pub fn solve_scale(solver: &CoverSolver<'_>, problem: &ScaleProblem, options: &EstimatorOptions) -> Result<(Root, AntichainCover)> {
    let root = solver.critical_exponent(problem.levels, problem.policy, options.bracket_hi, options.bisection_tol)?;
    let cover = solver.solve(root.s, problem.levels, problem.policy)?;
    Ok((root, cover))
}

fn check_grid(deltas: &[f64]) -> Result<Vec<f64>> {
    if deltas.is_empty() {
        return Err(Error::domain("delta grid is empty"));
    }
    for &d in deltas {
        check_delta(d)?;
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if !is_geometric(&sorted) {
        return Err(Error::domain("delta grid must be geometric with distinct values"));
    }
    Ok(sorted)
}

/// Affine fit of `s` against `1/ln(1/δ)`; the intercept is the δ → 0 value.
pub fn extrapolate(series: &[SeriesPoint], residual_cap: f64) -> (f64, Diagnostics) {
    let mut diag = Diagnostics {
        rule: "intercept of the least-squares line s = a + c/ln(1/delta); last s(delta) when the RMS residual exceeds the cap".into(),
        ..Diagnostics::default()
    };
    diag.local_slopes = series.windows(2).map(|w| w[1].s - w[0].s).collect();
    match series {
        [] => (0.0, diag),
        [only] => {
            diag.intercept = only.s;
            (only.s.max(0.0), diag)
        }
        _ => {
            let xs: Vec<f64> = series.iter().map(|p| 1.0 / (1.0 / p.delta).ln()).collect();
            let ys: Vec<f64> = series.iter().map(|p| p.s).collect();
            let fit = fit_line(&xs, &ys);
            diag.slope = fit.slope;
            diag.intercept = fit.intercept;
            diag.residual = fit.rms_residual;
            let value = if fit.rms_residual > residual_cap {
                diag.fallback_used = true;
                series.last().unwrap().s
            } else {
                fit.intercept
            };
            (value.max(0.0), diag)
        }
    }
}

fn cover_estimate(
    sys: &DyadicSystem,
    subset: &SubsetRef,
    deltas: &[f64],
    kind: DimensionKind,
    options: &EstimatorOptions,
    problem: impl Fn(f64, f64) -> Result<std::result::Result<ScaleProblem, SkippedScale>> + Sync,
) -> Result<DimensionEstimate> {
    let deltas = check_grid(deltas)?;
    let solver = CoverSolver::new(sys, subset)?;
    if subset.len() == 1 {
        return Ok(DimensionEstimate {
            kind,
            value: 0.0,
            scale_window: (*deltas.last().unwrap(), deltas[0]),
            series: Vec::new(),
            diagnostics: Diagnostics {
                rule: "a single point has dimension 0".into(),
                ..Diagnostics::default()
            },
        });
    }
    let results: Vec<Result<std::result::Result<SeriesPoint, SkippedScale>>> = deltas
        .par_iter()
        .map(|&delta| {
            Ok(match problem(delta, solver.resolution())? {
                Ok(p) => {
                    let root = solver.critical_exponent(p.levels, p.policy, options.bracket_hi, options.bisection_tol)?;
                    Ok(SeriesPoint { delta, s: root.s })
                }
                Err(skip) => Err(skip),
            })
        })
        .collect();
    let mut series = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r? {
            Ok(p) => series.push(p),
            Err(s) => skipped.push(s),
        }
    }
    if series.is_empty() {
        let hint = match kind {
            DimensionKind::Intermediate { .. } => {
                "no delta produced a usable level window; smaller theta needs smaller delta, and the window must stay above the system depth"
            }
            _ => "no delta produced a usable level window; use deltas above the resolution floor",
        };
        return Err(Error::NoUsableScales(hint.into()));
    }
    let (value, mut diag) = extrapolate(&series, options.residual_cap);
    diag.skipped = skipped;
    if subset.len() > 1 {
        diag.caveats.push(format!(
            "finite sample: scales below b^K = {:e} are not resolved",
            sys.params.scale(sys.depth())
        ));
    }
    let scale_window = (series.last().unwrap().delta, series[0].delta);
    Ok(DimensionEstimate {
        kind,
        value,
        scale_window,
        series,
        diagnostics: diag,
    })
}

/// θ-intermediate dimension of `E`.
pub fn intermediate_dimension(
    sys: &DyadicSystem,
    subset: &SubsetRef,
    theta: f64,
    deltas: &[f64],
    options: &EstimatorOptions,
) -> Result<DimensionEstimate> {
    check_theta(theta)?;
    cover_estimate(
        sys,
        subset,
        deltas,
        DimensionKind::Intermediate { theta },
        options,
        |delta, resolution| intermediate_problem(sys, theta, delta, options.cu, resolution),
    )
}

/// Effective Hausdorff exponent of `E` over the resolved scales.
pub fn hausdorff_dimension(
    sys: &DyadicSystem,
    subset: &SubsetRef,
    deltas: &[f64],
    options: &EstimatorOptions,
) -> Result<DimensionEstimate> {
    let mut est = cover_estimate(sys, subset, deltas, DimensionKind::Hausdorff, options, |delta, resolution| {
        hausdorff_problem(sys, delta, resolution)
    })?;
    if subset.len() > 1 {
        est.diagnostics.caveats.push(
            "resolution floor binds: every window runs to the deepest level, so this is the effective exponent over the sampled scales".into(),
        );
    }
    Ok(est)
}

/// `start, start·ratio, …` (`count` values).
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * ratio.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{build_system, DyadicParams};
    use crate::metric::BaseMetric;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_coords(1, xs.to_vec(), BaseMetric::Euclidean).unwrap()
    }

    #[test]
    fn covering_examples() {
        let s = line(&[0.0, 1.0]);
        let all = SubsetRef::full(&s);
        assert_eq!(covering_number(&s, &all, 0.5, CoverMethod::Greedy).unwrap(), 2);
        let t = line(&[0.0, 0.4, 1.0]);
        let all = SubsetRef::full(&t);
        assert_eq!(covering_number(&t, &all, 0.5, CoverMethod::ExactOracle).unwrap(), 2);
        assert_eq!(covering_number(&t, &all, 0.5, CoverMethod::Greedy).unwrap(), 2);
        let one = line(&[7.0]);
        assert_eq!(covering_number(&one, &SubsetRef::full(&one), 1e-9, CoverMethod::Greedy).unwrap(), 1);
        let big = line(&(0..13).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(
            covering_number(&big, &SubsetRef::full(&big), 1.0, CoverMethod::ExactOracle),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn greedy_never_beats_exact() {
        let s = FiniteMetricSpace::from_points(
            &[
                vec![0.0, 0.0],
                vec![0.9, 0.1],
                vec![0.2, 0.8],
                vec![1.1, 1.0],
                vec![0.5, 0.5],
                vec![2.0, 0.3],
                vec![1.6, 1.7],
            ],
            BaseMetric::Euclidean,
        )
        .unwrap();
        let all = SubsetRef::full(&s);
        for r in [0.3, 0.7, 1.0, 1.5, 3.0] {
            let g = covering_number(&s, &all, r, CoverMethod::Greedy).unwrap();
            let e = covering_number(&s, &all, r, CoverMethod::ExactOracle).unwrap();
            assert!(g >= e, "r={r}: greedy {g} < exact {e}");
        }
    }

    #[test]
    fn isolated_points_have_flat_counts() {
        let s = line(&[0.0, 1.0, 2.0]);
        let est = box_dimension(&s, &SubsetRef::full(&s), &geometric_grid(0.4, 0.5, 5)).unwrap();
        assert!(est.value.abs() < 1e-12);
        assert!(!est.diagnostics.caveats.is_empty());
    }

    #[test]
    fn box_needs_four_geometric_scales() {
        let s = line(&[0.0, 1.0]);
        let all = SubsetRef::full(&s);
        assert!(box_dimension(&s, &all, &[0.5, 0.25, 0.125]).is_err());
        assert!(box_dimension(&s, &all, &[0.5, 0.25, 0.125, 0.1]).is_err());
    }

    #[test]
    fn window_examples() {
        let c = WindowConstants { cu: 1.0, c0: 1.0, big_c0: 6.0, b: 0.5 };
        let w = admissible_levels(1.0, 2f64.powi(-10), c).unwrap();
        assert!(w.is_empty());
        // θ = 1/2, δ = 2^-6: k_min = ⌈log2(24·2^6)⌉ = 11, k_max = ⌊log2(2^12/3)⌋ = 10
        let w = admissible_levels(0.5, 2f64.powi(-6), c).unwrap();
        assert_eq!((w.k_min, w.k_max), (11, 10));
        assert!(w.is_empty());
        // small δ opens the window
        let w = admissible_levels(0.5, 2f64.powi(-12), c).unwrap();
        assert_eq!(w.k_min, 17);
        assert_eq!(w.k_max, 22);
        assert!(admissible_levels(0.0, 0.1, c).is_err());
        assert!(admissible_levels(0.5, 1.0, c).is_err());
    }

    #[test]
    fn singleton_estimates_are_zero() {
        let space = FiniteMetricSpace::from_points(&[vec![0.5]], BaseMetric::Euclidean).unwrap();
        let sys = crate::dyadic::build_system(&space, &crate::dyadic::DyadicParams::relaxed(0)).unwrap();
        let all = SubsetRef::full(&space);
        let deltas = geometric_grid(0.25, 0.5, 4);
        let opts = EstimatorOptions::default();
        assert_eq!(hausdorff_dimension(&sys, &all, &deltas, &opts).unwrap().value, 0.0);
        assert_eq!(intermediate_dimension(&sys, &all, 0.5, &deltas, &opts).unwrap().value, 0.0);
    }

    #[test]
    fn singleton_cover_costs_nothing() {
        let s = line(&[0.0, 5.0]);
        let sys = build_system(&s, &DyadicParams::relaxed(3)).unwrap();
        let e = SubsetRef::new(&s, vec![0]).unwrap();
        let solver = CoverSolver::new(&sys, &e).unwrap();
        let levels = LevelRange { lo: 0, hi: 3 };
        assert_eq!(solver.cost(0.7, levels, DiameterPolicy::Members).unwrap(), 0.0);
        assert_eq!(solver.cost(0.0, levels, DiameterPolicy::Members).unwrap(), 1.0);
    }

    #[test]
    fn zero_exponent_counts_coarsest_cubes() {
        let xs: Vec<f64> = (0..32).map(|i| f64::from(i) / 31.0).collect();
        let s = line(&xs);
        let sys = build_system(&s, &DyadicParams::relaxed(5)).unwrap();
        let all = SubsetRef::full(&s);
        let solver = CoverSolver::new(&sys, &all).unwrap();
        for lo in 0..=3 {
            let levels = LevelRange { lo, hi: 5 };
            let cover = solver.solve(0.0, levels, DiameterPolicy::Members).unwrap();
            assert_eq!(cover.cost, sys.level(lo).len() as f64);
            cover.check(&sys, &all).unwrap();
        }
    }

    #[test]
    fn window_past_depth_rejected() {
        let s = line(&[0.0, 1.0]);
        let sys = build_system(&s, &DyadicParams::relaxed(2)).unwrap();
        let solver = CoverSolver::new(&sys, &SubsetRef::full(&s)).unwrap();
        assert!(solver.cost(1.0, LevelRange { lo: 0, hi: 3 }, DiameterPolicy::Members).is_err());
        assert!(solver.cost(1.0, LevelRange { lo: 2, hi: 1 }, DiameterPolicy::Members).is_err());
    }

    #[test]
    fn bisection_finds_unit_crossing() {
        // 4 sets of diameter 1/4: 4·(1/4)^s = 1 at s = 1
        let root = bisect_unit_crossing(|s| 4.0 * 0.25f64.powf(s), 3.0, 1e-6);
        assert!((root.s - 1.0).abs() < 1e-6);
        // needs widening: 2^10 sets of diameter 1/2
        let root = bisect_unit_crossing(|s| 1024.0 * 0.5f64.powf(s), 3.0, 1e-6);
        assert!((root.s - 10.0).abs() < 1e-6);
        assert_eq!(bisect_unit_crossing(|_| 1.0, 3.0, 1e-3).s, 0.0);
    }

    #[test]
    fn extrapolation_recovers_affine_intercept() {
        let series: Vec<SeriesPoint> = geometric_grid(0.1, 0.5, 6)
            .into_iter()
            .map(|delta| SeriesPoint { delta, s: 0.4 + 0.7 / (1.0 / delta).ln() })
            .collect();
        let (v, diag) = extrapolate(&series, 0.05);
        assert!((v - 0.4).abs() < 1e-12);
        assert!(!diag.fallback_used);
    }

    #[test]
    fn extrapolation_falls_back_on_noise() {
        let series: Vec<SeriesPoint> = geometric_grid(0.1, 0.5, 5)
            .into_iter()
            .enumerate()
            .map(|(i, delta)| SeriesPoint { delta, s: if i % 2 == 0 { 0.2 } else { 0.9 } })
            .collect();
        let (v, diag) = extrapolate(&series, 0.05);
        assert!(diag.fallback_used);
        assert_eq!(v, 0.2);
    }
}
