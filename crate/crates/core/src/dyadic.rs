//! Nested dyadic cube systems over a finite metric space.
//!
//! Each level `k` has a set of centers that are `c0·b^k`-separated and
//! `C0·b^k`-dense. Level-`K` cubes collect each point at its nearest center;
//! coarser cubes are unions of finer cubes, each finer cube joining the
//! coarser center nearest to its own center. Centers are nested (every
//! level-`k` center is also a level-`k+1` center), so a center always lies in
//! its own cube and no cube is empty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

/// Hard cap on the number of levels.
pub const MAX_LEVELS: usize = 40;

pub type CubeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Enforces `12·C0·b ≤ c0` and `C0 > 5·c0`.
    Strict,
    /// Any `b ∈ (0,1)`; theory-dependent consumers should treat results as
    /// heuristic.
    Relaxed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicParams {
    /// Scale ratio between consecutive levels.
    #[serde(rename = "b")]
    pub ratio: f64,
    /// Center separation constant.
    #[serde(rename = "c0")]
    pub separation: f64,
    /// Covering constant.
    #[serde(rename = "C0")]
    pub covering: f64,
    pub max_level: usize,
    pub mode: Mode,
}

impl DyadicParams {
    pub fn strict(max_level: usize) -> Self {
        DyadicParams {
            ratio: 1.0 / 72.0,
            separation: 1.0,
            covering: 6.0,
            max_level,
            mode: Mode::Strict,
        }
    }

    pub fn relaxed(max_level: usize) -> Self {
        DyadicParams {
            ratio: 0.5,
            separation: 1.0,
            covering: 6.0,
            max_level,
            mode: Mode::Relaxed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::domain(format!("b = {} is outside (0, 1)", self.ratio)));
        }
        if !(self.separation > 0.0 && self.covering > 0.0) {
            return Err(Error::domain("c0 and C0 must be positive"));
        }
        if self.covering < self.separation {
            return Err(Error::domain(format!(
                "C0 = {} is below c0 = {}; greedy nets cannot guarantee covering",
                self.covering, self.separation
            )));
        }
        if self.max_level > MAX_LEVELS {
            return Err(Error::domain(format!(
                "max level {} exceeds the cap of {MAX_LEVELS}",
                self.max_level
            )));
        }
        if self.mode == Mode::Strict {
            if 12.0 * self.covering * self.ratio > self.separation {
                return Err(Error::domain(format!(
                    "strict mode requires 12·C0·b ≤ c0, got {}",
                    12.0 * self.covering * self.ratio
                )));
            }
            if self.covering <= 5.0 * self.separation {
                return Err(Error::domain("strict mode requires C0 > 5·c0"));
            }
        }
        Ok(())
    }

    /// `b^k`.
    pub fn scale(&self, level: usize) -> f64 {
        self.ratio.powi(level as i32)
    }

    pub fn outer_radius(&self, level: usize) -> f64 {
        2.0 * self.covering * self.scale(level)
    }

    pub fn inner_radius(&self, level: usize) -> f64 {
        self.separation * self.scale(level) / 3.0
    }
}

/// `⌈log(floor) / log b⌉` capped at [`MAX_LEVELS`]; 0 for singletons.
pub fn default_max_level(space: &FiniteMetricSpace, ratio: f64) -> usize {
    let floor = space.resolution_floor();
    if floor <= 0.0 {
        return 0;
    }
    let k = (floor.ln() / ratio.ln() - 1e-9).ceil();
    if k <= 0.0 {
        0
    } else {
        (k as usize).min(MAX_LEVELS)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: usize,
    pub center: usize,
    pub parent: Option<CubeId>,
    pub children: Vec<CubeId>,
    /// Sorted point ids.
    pub members: Vec<usize>,
    pub diam: f64,
    pub outer_radius: f64,
    pub inner_radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DyadicSystem {
    pub params: DyadicParams,
    /// Level-`k` centers in selection order.
    pub levels: Vec<Vec<usize>>,
    /// All cubes, grouped by level; the cubes of level `k` are
    /// `cubes[level_start[k]..level_start[k + 1]]`, one per level-`k` center.
    pub cubes: Vec<DyadicCube>,
    pub level_start: Vec<usize>,
    pub n_points: usize,
    /// `cube_index[k][x]` is the level-`k` cube containing `x`.
    #[serde(skip)]
    cube_index: Vec<Vec<u32>>,
}

impl DyadicSystem {
    /// Assembles a system from parts without checking any invariant; used for
    /// hand-built systems and deserialized input. Call [`verify_system`] to
    /// audit it.
    pub fn from_parts(
        params: DyadicParams,
        levels: Vec<Vec<usize>>,
        cubes: Vec<DyadicCube>,
        n_points: usize,
    ) -> Self {
        let mut level_start = vec![0; levels.len() + 1];
        for c in &cubes {
            if c.level < levels.len() {
                level_start[c.level + 1] += 1;
            }
        }
        for k in 0..levels.len() {
            level_start[k + 1] += level_start[k];
        }
        let mut sys = DyadicSystem {
            params,
            levels,
            cubes,
            level_start,
            n_points,
            cube_index: Vec::new(),
        };
        sys.rebuild_index();
        sys
    }

    /// Restores the point-to-cube index after deserialization. Points in no
    /// cube (or several) keep `u32::MAX` or the last cube seen.
    pub fn rebuild_index(&mut self) {
        let mut index = vec![vec![u32::MAX; self.n_points]; self.levels.len()];
        for (id, c) in self.cubes.iter().enumerate() {
            if c.level < index.len() {
                for &m in &c.members {
                    if m < self.n_points {
                        index[c.level][m] = id as u32;
                    }
                }
            }
        }
        self.cube_index = index;
    }

    /// Deepest level `K`.
    pub fn depth(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn level(&self, k: usize) -> std::ops::Range<CubeId> {
        self.level_start[k]..self.level_start[k + 1]
    }

    pub fn roots(&self) -> std::ops::Range<CubeId> {
        self.level(0)
    }

    pub fn cube(&self, id: CubeId) -> &DyadicCube {
        &self.cubes[id]
    }

    /// Level-`k` cube containing point `x`.
    pub fn cube_containing(&self, level: usize, x: usize) -> Option<CubeId> {
        let v = *self.cube_index.get(level)?.get(x)?;
        (v != u32::MAX).then_some(v as usize)
    }

    /// Whether `a` is `b` or one of its descendants.
    pub fn is_within(&self, a: CubeId, b: CubeId) -> bool {
        let mut cur = Some(a);
        let target_level = self.cubes[b].level;
        while let Some(c) = cur {
            if c == b {
                return true;
            }
            if self.cubes[c].level <= target_level {
                return false;
            }
            cur = self.cubes[c].parent;
        }
        false
    }

    pub fn max_children(&self) -> usize {
        self.cubes.iter().map(|c| c.children.len()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut sys: DyadicSystem = serde_json::from_str(text)?;
        sys.rebuild_index();
        Ok(sys)
    }
}

/// Per-level centers by nested farthest-point insertion: level `k+1` starts
/// from the level-`k` centers and inserts the farthest remaining point while
/// it is at least `c0·b^(k+1)` from every center. Ties go to the lowest id.
pub fn build_net_points(space: &FiniteMetricSpace, params: &DyadicParams) -> Result<Vec<Vec<usize>>> {
    params.validate()?;
    let n = space.len();
    if n == 0 {
        return Err(Error::domain("cannot build nets on an empty space"));
    }
    let mut is_center = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut centers: Vec<usize> = Vec::new();
    let mut levels = Vec::with_capacity(params.max_level + 1);

    let insert = |c: usize, centers: &mut Vec<usize>, nearest: &mut [f64], is_center: &mut [bool]| {
        centers.push(c);
        is_center[c] = true;
        for (y, slot) in nearest.iter_mut().enumerate() {
            let d = space.d(c, y);
            if d < *slot {
                *slot = d;
            }
        }
    };

    insert(0, &mut centers, &mut nearest, &mut is_center);
    for k in 0..=params.max_level {
        let threshold = params.separation * params.scale(k);
        while centers.len() < n {
            let mut pick: Option<usize> = None;
            for y in 0..n {
                if is_center[y] || nearest[y] < threshold {
                    continue;
                }
                if pick.is_none_or(|p| nearest[y] > nearest[p]) {
                    pick = Some(y);
                }
            }
            match pick {
                Some(c) => insert(c, &mut centers, &mut nearest, &mut is_center),
                None => break,
            }
        }
        levels.push(centers.clone());
    }
    Ok(levels)
}

fn nearest_of(space: &FiniteMetricSpace, x: usize, candidates: &[usize]) -> usize {
    let mut best = candidates[0];
    let mut best_d = space.d(x, best);
    for &c in &candidates[1..] {
        let d = space.d(x, c);
        if d < best_d || (d == best_d && c < best) {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Assigns points to cubes given per-level centers.
pub fn build_cubes(
    space: &FiniteMetricSpace,
    centers: &[Vec<usize>],
    params: &DyadicParams,
) -> Result<DyadicSystem> {
    params.validate()?;
    let n = space.len();
    if centers.len() != params.max_level + 1 {
        return Err(Error::domain(format!(
            "got {} center levels, expected {}",
            centers.len(),
            params.max_level + 1
        )));
    }
    for (k, level) in centers.iter().enumerate() {
        if level.is_empty() {
            return Err(Error::domain(format!("level {k} has no centers")));
        }
        let mut seen = vec![false; n];
        for &c in level {
            space.check_id(c)?;
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::domain(format!("center {c} repeated at level {k}")));
            }
        }
    }
    let depth = params.max_level;

    // slot of each center within its level
    let slot_of = |level: &[usize]| {
        let mut slot = vec![usize::MAX; n];
        for (i, &c) in level.iter().enumerate() {
            slot[c] = i;
        }
        slot
    };

    // per level: members of each cube (indexed by center slot) and the parent slot
    let mut members: Vec<Vec<Vec<usize>>> = vec![Vec::new(); depth + 1];
    let mut parent_slot: Vec<Vec<usize>> = vec![Vec::new(); depth + 1];

    let finest = &centers[depth];
    let slots = slot_of(finest);
    let mut groups = vec![Vec::new(); finest.len()];
    for x in 0..n {
        groups[slots[nearest_of(space, x, finest)]].push(x);
    }
    members[depth] = groups;

    for k in (0..depth).rev() {
        let coarse = &centers[k];
        let slots = slot_of(coarse);
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); coarse.len()];
        let mut parents = Vec::with_capacity(centers[k + 1].len());
        for (i, &z) in centers[k + 1].iter().enumerate() {
            let p = slots[nearest_of(space, z, coarse)];
            parents.push(p);
            groups[p].extend_from_slice(&members[k + 1][i]);
        }
        for g in groups.iter_mut() {
            g.sort_unstable();
        }
        members[k] = groups;
        parent_slot[k + 1] = parents;
    }

    let mut level_start = vec![0; depth + 2];
    for k in 0..=depth {
        level_start[k + 1] = level_start[k] + centers[k].len();
    }
    let mut cubes = Vec::with_capacity(level_start[depth + 1]);
    for k in 0..=depth {
        for (i, group) in members[k].iter_mut().enumerate() {
            let parent = (k > 0).then(|| level_start[k - 1] + parent_slot[k][i]);
            cubes.push(DyadicCube {
                level: k,
                center: centers[k][i],
                parent,
                children: Vec::new(),
                diam: space.diameter_of(group),
                members: std::mem::take(group),
                outer_radius: params.outer_radius(k),
                inner_radius: params.inner_radius(k),
            });
        }
    }
    for id in 0..cubes.len() {
        if let Some(p) = cubes[id].parent {
            cubes[p].children.push(id);
        }
    }
    Ok(DyadicSystem::from_parts(*params, centers.to_vec(), cubes, n))
}

/// Nets plus cube assignment in one call.
pub fn build_system(space: &FiniteMetricSpace, params: &DyadicParams) -> Result<DyadicSystem> {
    let centers = build_net_points(space, params)?;
    build_cubes(space, &centers, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum Violation {
    /// (i): a finer cube is not inside the coarser cube holding its points.
    Nesting { level: usize, point: usize, cube: CubeId },
    /// (ii): a point lies in zero or several cubes of one level.
    Partition { level: usize, point: usize, count: usize },
    /// (iii), outer ball: a member at distance ≥ `2·C0·b^k` from the center.
    OuterBall { cube: CubeId, point: usize, distance: f64, radius: f64 },
    /// (iii), inner ball: a point within `c0·b^k/3` of a center but outside
    /// that center's cube.
    InnerBall { cube: CubeId, point: usize, distance: f64 },
    /// (iv) surrogate: `2·C0·b^(k+1) + d(z_child, z_parent) > 2·C0·b^k`.
    BallContainment { cube: CubeId, parent: CubeId, lhs: f64, rhs: f64 },
    /// Center separation `d(z_i, z_j) ≥ c0·b^k`.
    Separation { level: usize, a: usize, b: usize, distance: f64 },
    /// Center density `min_i d(z_i, x) < C0·b^k`.
    Covering { level: usize, point: usize, distance: f64 },
}

impl Violation {
    /// Violations of (i), (ii) and the outer ball are fatal in every mode; the
    /// rest only in strict mode.
    pub fn is_fatal(&self, mode: Mode) -> bool {
        match self {
            Violation::Nesting { .. } | Violation::Partition { .. } | Violation::OuterBall { .. } => true,
            _ => mode == Mode::Strict,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub nesting: usize,
    pub partition: usize,
    pub outer_ball: usize,
    pub inner_ball: usize,
    pub ball_containment: usize,
    pub separation: usize,
    pub covering: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mode: Mode,
    pub levels: usize,
    pub cubes: usize,
    pub max_children: usize,
    pub counts: ViolationCounts,
    /// Number of violations that break the system's contract in its mode.
    pub fatal: usize,
    /// Violations beyond this many are counted but not listed.
    pub listed_limit: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.fatal == 0
    }
}

const LISTED_LIMIT: usize = 200;
const RELATIVE_SLACK: f64 = 1e-12;

/// Audits a system against the nested-partition, ball-sandwich and net
/// properties. Never fails; every problem is listed in the report.
pub fn verify_system(space: &FiniteMetricSpace, sys: &DyadicSystem) -> VerificationReport {
    let params = &sys.params;
    let mut counts = ViolationCounts::default();
    let mut violations = Vec::new();
    let mut fatal = 0;
    let mut record = |v: Violation, counts: &mut ViolationCounts| {
        match &v {
            Violation::Nesting { .. } => counts.nesting += 1,
            Violation::Partition { .. } => counts.partition += 1,
            Violation::OuterBall { .. } => counts.outer_ball += 1,
            Violation::InnerBall { .. } => counts.inner_ball += 1,
            Violation::BallContainment { .. } => counts.ball_containment += 1,
            Violation::Separation { .. } => counts.separation += 1,
            Violation::Covering { .. } => counts.covering += 1,
        }
        if v.is_fatal(params.mode) {
            fatal += 1;
        }
        if violations.len() < LISTED_LIMIT {
            violations.push(v);
        }
    };

    let n = space.len();
    let depth_levels = sys.levels.len();

    // (ii) partition, and a point -> cube table per level
    let mut owner = vec![vec![usize::MAX; n]; depth_levels];
    for k in 0..depth_levels {
        let mut count = vec![0usize; n];
        for id in sys.level(k) {
            for &m in &sys.cubes[id].members {
                if m < n {
                    count[m] += 1;
                    owner[k][m] = id;
                }
            }
        }
        for (x, &c) in count.iter().enumerate() {
            if c != 1 {
                record(Violation::Partition { level: k, point: x, count: c }, &mut counts);
            }
        }
    }

    // (i) nesting: the parent of x's level-(k+1) cube is x's level-k cube
    for k in 1..depth_levels {
        for x in 0..n {
            let fine = owner[k][x];
            if fine == usize::MAX {
                continue;
            }
            let coarse = owner[k - 1][x];
            if sys.cubes[fine].parent != Some(coarse) {
                record(Violation::Nesting { level: k, point: x, cube: fine }, &mut counts);
            }
        }
    }

    for (id, cube) in sys.cubes.iter().enumerate() {
        let k = cube.level;
        let outer = params.outer_radius(k);
        for &m in &cube.members {
            let d = space.d(cube.center, m);
            if d >= outer {
                record(
                    Violation::OuterBall { cube: id, point: m, distance: d, radius: outer },
                    &mut counts,
                );
            }
        }
        let inner = params.inner_radius(k);
        let owners = &owner[k];
        for y in 0..n {
            if owners[y] != id {
                let d = space.d(cube.center, y);
                if d < inner {
                    record(Violation::InnerBall { cube: id, point: y, distance: d }, &mut counts);
                }
            }
        }
        if let Some(p) = cube.parent {
            let parent = &sys.cubes[p];
            let lhs = params.outer_radius(k) + space.d(cube.center, parent.center);
            let rhs = params.outer_radius(parent.level);
            if lhs > rhs * (1.0 + RELATIVE_SLACK) {
                record(Violation::BallContainment { cube: id, parent: p, lhs, rhs }, &mut counts);
            }
        }
    }

    for (k, centers) in sys.levels.iter().enumerate() {
        let sep = params.separation * params.scale(k);
        if let Some((a, b, d)) = closest_pair(space, centers) {
            if d < sep {
                record(Violation::Separation { level: k, a, b, distance: d }, &mut counts);
            }
        }
        let cover = params.covering * params.scale(k);
        for x in 0..n {
            let own = owner[k][x];
            if own != usize::MAX && space.d(sys.cubes[own].center, x) < cover {
                continue;
            }
            let d = centers.iter().map(|&z| space.d(z, x)).fold(f64::INFINITY, f64::min);
            if d >= cover {
                record(Violation::Covering { level: k, point: x, distance: d }, &mut counts);
            }
        }
    }

    VerificationReport {
        mode: params.mode,
        levels: depth_levels,
        cubes: sys.cubes.len(),
        max_children: sys.max_children(),
        counts,
        fatal,
        listed_limit: LISTED_LIMIT,
        violations,
    }
}

fn closest_pair(space: &FiniteMetricSpace, ids: &[usize]) -> Option<(usize, usize, f64)> {
    if ids.len() < 2 {
        return None;
    }
    if let Some(1) = space.ambient_dim() {
        let mut order: Vec<usize> = ids.to_vec();
        order.sort_by(|&a, &b| space.coords(a).unwrap()[0].total_cmp(&space.coords(b).unwrap()[0]));
        return order
            .windows(2)
            .map(|w| (w[0], w[1], space.d(w[0], w[1])))
            .min_by(|a, b| a.2.total_cmp(&b.2));
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let d = space.d(a, b);
            if best.is_none_or(|(_, _, v)| d < v) {
                best = Some((a, b, d));
            }
        }
    }
    best
}

/// Theoretical bound `C_d^((6·C0 / (c0·b)) · log2 C_d)` on the number of
/// children of any cube. Astronomically loose in practice; may be `inf`.
pub fn child_bound(params: &DyadicParams, doubling: u64) -> Result<f64> {
    if doubling == 0 {
        return Err(Error::domain("doubling constant must be at least 1"));
    }
    let cd = doubling as f64;
    let exponent = 6.0 * params.covering / (params.separation * params.ratio) * cd.log2();
    Ok(cd.powf(exponent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::BaseMetric;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_coords(1, xs.to_vec(), BaseMetric::Euclidean).unwrap()
    }

    fn relaxed(k: usize) -> DyadicParams {
        DyadicParams::relaxed(k)
    }

    #[test]
    fn strict_defaults_satisfy_hypotheses() {
        DyadicParams::strict(3).validate().unwrap();
        let mut bad = DyadicParams::strict(3);
        bad.ratio = 0.5;
        assert!(bad.validate().is_err());
        relaxed(3).validate().unwrap();
    }

    #[test]
    fn net_examples() {
        let p = relaxed(0);
        assert_eq!(build_net_points(&line(&[0.0, 10.0]), &p).unwrap(), vec![vec![0, 1]]);
        assert_eq!(build_net_points(&line(&[0.0, 0.1]), &p).unwrap(), vec![vec![0]]);
        let single = build_net_points(&line(&[3.0]), &relaxed(4)).unwrap();
        assert!(single.iter().all(|l| l == &vec![0]));
    }

    #[test]
    fn singleton_chain() {
        let s = line(&[3.0]);
        let sys = build_system(&s, &relaxed(3)).unwrap();
        assert_eq!(sys.cubes.len(), 4);
        assert!(sys.cubes.iter().all(|c| c.diam == 0.0 && c.members == vec![0]));
        for k in 1..4 {
            assert_eq!(sys.cubes[k].parent, Some(k - 1));
        }
    }

    #[test]
    fn two_far_points_give_two_roots() {
        let s = line(&[0.0, 10.0]);
        let sys = build_system(&s, &relaxed(1)).unwrap();
        assert_eq!(sys.roots().len(), 2);
        for r in sys.roots() {
            assert_eq!(sys.cubes[r].children.len(), 1);
        }
        assert!(verify_system(&s, &sys).is_clean());
    }

    #[test]
    fn grid_partition_verified() {
        let s = line(&(0..16).map(f64::from).collect::<Vec<_>>());
        let sys = build_system(&s, &relaxed(4)).unwrap();
        let report = verify_system(&s, &sys);
        assert_eq!(report.counts.partition, 0);
        assert_eq!(report.counts.nesting, 0);
        assert_eq!(report.counts.outer_ball, 0);
        assert_eq!(report.counts.separation, 0);
        assert_eq!(report.counts.covering, 0);
    }

    #[test]
    fn strict_system_is_clean() {
        let xs: Vec<f64> = (0..60).map(|i| (f64::from(i) * 0.37).sin() * 5.0 + f64::from(i) * 0.01).collect();
        let s = line(&xs);
        let sys = build_system(&s, &DyadicParams::strict(2)).unwrap();
        let report = verify_system(&s, &sys);
        assert_eq!(report.fatal, 0, "{:?}", report.violations);
        assert_eq!(report.counts.inner_ball, 0);
    }

    #[test]
    fn misassigned_point_reported() {
        let s = line(&[0.0, 10.0]);
        let mut sys = build_system(&s, &relaxed(1)).unwrap();
        // move point 1 into root 0 without removing it from root 1
        sys.cubes[0].members.push(1);
        let report = verify_system(&s, &sys);
        assert!(report.counts.partition >= 1);
        assert!(!report.is_clean());
    }

    #[test]
    fn mismatched_centers_rejected() {
        let s = line(&[0.0, 1.0]);
        assert!(build_cubes(&s, &[vec![0], vec![5]], &relaxed(1)).is_err());
        assert!(build_cubes(&s, &[vec![0]], &relaxed(1)).is_err());
        assert!(build_net_points(&s, &DyadicParams { ratio: 1.5, ..relaxed(1) }).is_err());
    }

    #[test]
    fn child_bound_values() {
        assert_eq!(child_bound(&relaxed(1), 1).unwrap(), 1.0);
        assert_eq!(child_bound(&relaxed(1), 2).unwrap(), 2f64.powi(72));
    }

    #[test]
    fn json_round_trip_restores_index() {
        let s = line(&[0.0, 0.3, 1.0, 4.0]);
        let sys = build_system(&s, &relaxed(3)).unwrap();
        let back = DyadicSystem::from_json(&sys.to_json().unwrap()).unwrap();
        for k in 0..=3 {
            for x in 0..4 {
                assert_eq!(back.cube_containing(k, x), sys.cube_containing(k, x));
            }
        }
    }

    #[test]
    fn default_depth_reaches_singletons() {
        let s = line(&[0.0, 0.25, 1.0]);
        let k = default_max_level(&s, 0.5);
        assert_eq!(k, 2);
        let sys = build_system(&s, &relaxed(k)).unwrap();
        assert!(sys.level(k).all(|c| sys.cubes[c].members.len() == 1));
    }
}
