//! Finite metric spaces and the basic statistics the rest of the crate
//! builds on: distances, diameters, greedy ball covers, doubling and
//! uniform-perfectness estimates.
//!
//! Balls are open throughout: `B(x, r) = { y : d(x, y) < r }`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this many points the full distance matrix is not materialized.
pub const DEFAULT_CACHE_THRESHOLD: usize = 4096;

/// Number of random triples checked for the triangle inequality on explicit
/// matrices too large for an exhaustive check.
pub const DEFAULT_TRIANGLE_SAMPLES: usize = 20_000;

const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMetric {
    Euclidean,
    Chebyshev,
    /// Distances come from a user-supplied square matrix.
    Explicit,
}

/// The metric of a space as seen from outside: a base metric, possibly
/// raised to a snowflake exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Chebyshev,
    Explicit,
    Snowflake { base: Box<Metric>, exponent: f64 },
}

#[derive(Clone, Debug)]
pub struct FiniteMetricSpace {
    len: usize,
    /// Coordinate dimension; 0 for explicit-matrix spaces.
    dim: usize,
    coords: Vec<f64>,
    matrix: Option<Vec<f64>>,
    base: BaseMetric,
    /// Snowflake exponent; 1 means the base metric itself.
    exponent: f64,
    cache: Option<Vec<f64>>,
}

impl FiniteMetricSpace {
    /// Builds a coordinate space from row vectors.
    pub fn from_points(points: &[Vec<f64>], base: BaseMetric) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::domain(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            flat.extend_from_slice(p);
        }
        Self::from_coords(dim, flat, base)
    }

    /// Builds a coordinate space from a row-major coordinate buffer.
    pub fn from_coords(dim: usize, coords: Vec<f64>, base: BaseMetric) -> Result<Self> {
        Self::from_coords_with_threshold(dim, coords, base, DEFAULT_CACHE_THRESHOLD)
    }

    pub fn from_coords_with_threshold(
        dim: usize,
        coords: Vec<f64>,
        base: BaseMetric,
        cache_threshold: usize,
    ) -> Result<Self> {
        if base == BaseMetric::Explicit {
            return Err(Error::domain("explicit metric needs a distance matrix"));
        }
        if dim == 0 {
            return Err(Error::domain("coordinate dimension must be positive"));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::domain("coordinate buffer is empty or ragged"));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite coordinate in point {}",
                bad / dim
            )));
        }
        let len = coords.len() / dim;
        // distinct ids must be at positive distance
        let mut order: Vec<usize> = (0..len).collect();
        let row = |i: usize| &coords[i * dim..(i + 1) * dim];
        order.sort_by(|&a, &b| {
            row(a)
                .iter()
                .zip(row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for w in order.windows(2) {
            if row(w[0]) == row(w[1]) {
                return Err(Error::domain(format!(
                    "points {} and {} coincide",
                    w[0].min(w[1]),
                    w[0].max(w[1])
                )));
            }
        }
        let mut space = FiniteMetricSpace {
            len,
            dim,
            coords,
            matrix: None,
            base,
            exponent: 1.0,
            cache: None,
        };
        space.build_cache(cache_threshold);
        Ok(space)
    }

    /// Builds a space from a square, row-major distance matrix. Matrices that
    /// are not metrics are rejected.
    pub fn from_matrix(len: usize, matrix: Vec<f64>) -> Result<Self> {
        Self::from_matrix_checked(len, matrix, DEFAULT_TRIANGLE_SAMPLES)
    }

    pub fn from_matrix_checked(len: usize, matrix: Vec<f64>, triangle_samples: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::domain("distance matrix is empty"));
        }
        if matrix.len() != len * len {
            return Err(Error::domain(format!(
                "distance matrix has {} entries, expected {}",
                matrix.len(),
                len * len
            )));
        }
        for i in 0..len {
            if matrix[i * len + i] != 0.0 {
                return Err(Error::domain(format!("d({i},{i}) is not zero")));
            }
            for j in (i + 1)..len {
                let a = matrix[i * len + j];
                if !a.is_finite() || a <= 0.0 {
                    return Err(Error::domain(format!(
                        "d({i},{j}) = {a} is not a positive finite distance"
                    )));
                }
                if a != matrix[j * len + i] {
                    return Err(Error::domain(format!("matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        let violates = |i: usize, j: usize, k: usize| {
            let dij = matrix[i * len + j];
            let bound = matrix[i * len + k] + matrix[k * len + j];
            dij > bound * (1.0 + 1e-12)
        };
        if len <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for i in 0..len {
                for j in 0..len {
                    for k in 0..len {
                        if violates(i, j, k) {
                            return Err(Error::domain(format!(
                                "triangle inequality fails for ({i},{j}) via {k}"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..triangle_samples {
                let t = sample(&mut rng, len, 3);
                let (i, j, k) = (t.index(0), t.index(1), t.index(2));
                if violates(i, j, k) {
                    return Err(Error::domain(format!(
                        "triangle inequality fails for ({i},{j}) via {k}"
                    )));
                }
            }
        }
        Ok(FiniteMetricSpace {
            len,
            dim: 0,
            coords: Vec::new(),
            matrix: Some(matrix),
            base: BaseMetric::Explicit,
            exponent: 1.0,
            cache: None,
        })
    }

    /// The same points under the metric `d^exponent`.
    pub fn snowflake(&self, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::domain(format!(
                "snowflake exponent {exponent} is outside (0, 1]"
            )));
        }
        let mut out = self.clone();
        out.exponent = self.exponent * exponent;
        if let Some(cache) = out.cache.as_mut() {
            for v in cache.iter_mut() {
                *v = v.powf(exponent);
            }
        }
        Ok(out)
    }

    /// The same points with every distance multiplied by `lambda`, up to
    /// rounding in the coordinates.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("scale factor {lambda} must be positive")));
        }
        let base_factor = lambda.powf(1.0 / self.exponent);
        let mut out = self.clone();
        match out.matrix.as_mut() {
            Some(m) => m.iter_mut().for_each(|v| *v *= base_factor),
            None => out.coords.iter_mut().for_each(|v| *v *= base_factor),
        }
        if out.cache.is_some() {
            out.cache = None;
            out.build_cache(usize::MAX);
        }
        Ok(out)
    }

    fn build_cache(&mut self, threshold: usize) {
        if self.len > threshold || self.matrix.is_some() {
            return;
        }
        let n = self.len;
        let mut cache = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.raw(i, j);
                cache[i * n + j] = v;
                cache[j * n + i] = v;
            }
        }
        self.cache = Some(cache);
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn base_distance(&self, x: usize, y: usize) -> f64 {
        match self.base {
            BaseMetric::Explicit => self.matrix.as_ref().expect("explicit matrix")[x * self.len + y],
            BaseMetric::Euclidean => self
                .point(x)
                .iter()
                .zip(self.point(y))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            BaseMetric::Chebyshev => self
                .point(x)
                .iter()
                .zip(self.point(y))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        }
    }

    fn raw(&self, x: usize, y: usize) -> f64 {
        let d = self.base_distance(x, y);
        if self.exponent == 1.0 {
            d
        } else {
            d.powf(self.exponent)
        }
    }

    /// Unchecked distance; panics on out-of-range ids.
    #[inline]
    pub fn d(&self, x: usize, y: usize) -> f64 {
        match &self.cache {
            Some(c) => c[x * self.len + y],
            None => self.raw(x, y),
        }
    }

    /// Distance with id validation.
    pub fn distance(&self, x: usize, y: usize) -> Result<f64> {
        self.check_id(x)?;
        self.check_id(y)?;
        Ok(self.d(x, y))
    }

    pub fn check_id(&self, x: usize) -> Result<()> {
        if x < self.len {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "unknown point id {x} (space has {} points)",
                self.len
            )))
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Coordinate dimension, or `None` for explicit-matrix spaces.
    pub fn ambient_dim(&self) -> Option<usize> {
        (self.dim > 0).then_some(self.dim)
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        (self.dim > 0 && i < self.len).then(|| self.point(i))
    }

    pub fn snowflake_exponent(&self) -> f64 {
        self.exponent
    }

    pub fn base_metric(&self) -> BaseMetric {
        self.base
    }

    pub fn metric(&self) -> Metric {
        let base = match self.base {
            BaseMetric::Euclidean => Metric::Euclidean,
            BaseMetric::Chebyshev => Metric::Chebyshev,
            BaseMetric::Explicit => Metric::Explicit,
        };
        if self.exponent == 1.0 {
            base
        } else {
            Metric::Snowflake {
                base: Box::new(base),
                exponent: self.exponent,
            }
        }
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    /// 1-d coordinate spaces have order-determined diameters.
    fn is_line(&self) -> bool {
        self.dim == 1
    }

    /// Diameter of a set of ids (0 for singletons and the empty set).
    pub fn diameter_of(&self, ids: &[usize]) -> f64 {
        if ids.len() < 2 {
            return 0.0;
        }
        if self.is_line() {
            let (lo, hi) = ids.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let x = self.coords[i];
                (lo.min(x), hi.max(x))
            });
            let d = hi - lo;
            return if self.exponent == 1.0 { d } else { d.powf(self.exponent) };
        }
        let mut best = 0.0f64;
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                best = best.max(self.d(i, j));
            }
        }
        best
    }

    /// Smallest positive distance between two points; 0 for singletons.
    pub fn resolution_floor(&self) -> f64 {
        if self.len < 2 {
            return 0.0;
        }
        if self.is_line() {
            let mut xs = self.coords.clone();
            xs.sort_by(f64::total_cmp);
            let gap = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            return if self.exponent == 1.0 { gap } else { gap.powf(self.exponent) };
        }
        let mut best = f64::INFINITY;
        for i in 0..self.len {
            for j in (i + 1)..self.len {
                best = best.min(self.d(i, j));
            }
        }
        best
    }

    /// Greedy farthest-point-first cover of `ids` by open `r`-balls centered
    /// at points of `ids`, seeded with `seed` when given. Returns the centers
    /// in selection order; ties go to the lowest id.
    pub fn greedy_ball_cover(&self, ids: &[usize], r: f64, seed: Option<usize>) -> Vec<usize> {
        if ids.is_empty() {
            return Vec::new();
        }
        let first = seed.unwrap_or_else(|| *ids.iter().min().expect("non-empty"));
        let mut nearest: Vec<f64> = ids.iter().map(|&i| self.d(first, i)).collect();
        let mut centers = vec![first];
        loop {
            let mut pick: Option<(usize, f64)> = None;
            for (slot, &i) in ids.iter().enumerate() {
                let v = nearest[slot];
                if v < r {
                    continue;
                }
                match pick {
                    Some((j, best)) if v < best || (v == best && ids[j] < i) => {}
                    _ => pick = Some((slot, v)),
                }
            }
            let Some((slot, _)) = pick else { break };
            let c = ids[slot];
            centers.push(c);
            for (s, &i) in ids.iter().enumerate() {
                nearest[s] = nearest[s].min(self.d(c, i));
            }
        }
        centers
    }

    /// Ids of `B(x, r)`.
    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        (0..self.len).filter(|&y| self.d(x, y) < r).collect()
    }
}

/// A non-empty set of point ids of one space, kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetRef {
    ids: Vec<usize>,
}

impl SubsetRef {
    pub fn new(space: &FiniteMetricSpace, mut ids: Vec<usize>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::domain("subset must be non-empty"));
        }
        ids.sort_unstable();
        ids.dedup();
        if let Some(&bad) = ids.iter().find(|&&i| i >= space.len()) {
            return Err(Error::domain(format!("subset member {bad} is not a point id")));
        }
        Ok(SubsetRef { ids })
    }

    pub fn full(space: &FiniteMetricSpace) -> Self {
        SubsetRef {
            ids: (0..space.len()).collect(),
        }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Membership mask over the ids of a space with `n` points.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.ids {
            m[i] = true;
        }
        m
    }
}

pub fn diameter(space: &FiniteMetricSpace, subset: &SubsetRef) -> f64 {
    space.diameter_of(subset.ids())
}

/// Lower estimate of the doubling constant: for each sampled `(x, r)`, the
/// number of greedy `r`-balls (farthest-point-first from `x`) needed to cover
/// `B(x, 2r)`; the maximum over the sample is returned.
pub fn estimate_doubling_constant(space: &FiniteMetricSpace, sample: &[(usize, f64)]) -> Result<usize> {
    if sample.is_empty() {
        return Err(Error::domain("doubling estimate needs at least one (center, radius) sample"));
    }
    let mut worst = 1;
    for &(x, r) in sample {
        space.check_id(x)?;
        if !(r > 0.0) {
            return Err(Error::domain(format!("sample radius {r} is not positive")));
        }
        let big = space.ball(x, 2.0 * r);
        worst = worst.max(space.greedy_ball_cover(&big, r, Some(x)).len());
    }
    Ok(worst)
}

/// Outcome of a uniform-perfectness measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Perfectness {
    /// Every sampled annulus `B(x,r) \ B(x,c r)` is non-empty for `c = constant`,
    /// and `constant` is the largest value with that property.
    Perfect { constant: f64, worst_point: usize, worst_radius: f64 },
    /// Some sampled ball contains only its center.
    NotUniformlyPerfectAtResolution { resolution_floor: f64, point: usize, radius: f64 },
}

impl Perfectness {
    pub fn constant(&self) -> Option<f64> {
        match self {
            Perfectness::Perfect { constant, .. } => Some(*constant),
            _ => None,
        }
    }
}

/// Measures the uniform-perfectness constant of `E` over the given radii,
/// sampling every point of `E` as a center. For each `(x, r)` the best
/// constant is `max{ d(x,x') : d(x,x') < r } / r`; the reported value is the
/// minimum of those over the sample.
pub fn estimate_uniform_perfectness(
    space: &FiniteMetricSpace,
    subset: &SubsetRef,
    radii: &[f64],
) -> Result<Perfectness> {
    let ids = subset.ids();
    if ids.len() < 2 {
        return Err(Error::domain("uniform perfectness needs at least two points"));
    }
    if radii.is_empty() {
        return Err(Error::domain("radius grid is empty"));
    }
    let diam = space.diameter_of(ids);
    if let Some(bad) = radii.iter().find(|&&r| !(r > 0.0 && r < diam)) {
        return Err(Error::domain(format!(
            "radius {bad} is outside (0, |E|) = (0, {diam})"
        )));
    }
    // farthest in-ball distance per (x, r); radii sorted so each x is one scan
    let mut sorted: Vec<f64> = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<(f64, usize, f64)> = None;
    let mut dists = Vec::with_capacity(ids.len());
    for &x in ids {
        dists.clear();
        dists.extend(ids.iter().filter(|&&y| y != x).map(|&y| space.d(x, y)));
        dists.sort_by(f64::total_cmp);
        for &r in &sorted {
            let below = dists.partition_point(|&v| v < r);
            if below == 0 {
                return Ok(Perfectness::NotUniformlyPerfectAtResolution {
                    resolution_floor: perfectness_floor(space, ids),
                    point: x,
                    radius: r,
                });
            }
            let c = dists[below - 1] / r;
            if best.is_none_or(|(b, _, _)| c < b) {
                best = Some((c, x, r));
            }
        }
    }
    let (constant, worst_point, worst_radius) = best.expect("non-empty sample");
    Ok(Perfectness::Perfect {
        constant,
        worst_point,
        worst_radius,
    })
}

/// Largest nearest-neighbour distance in `ids`: below it some ball holds
/// only its center.
fn perfectness_floor(space: &FiniteMetricSpace, ids: &[usize]) -> f64 {
    ids.iter()
        .map(|&x| {
            ids.iter()
                .filter(|&&y| y != x)
                .map(|&y| space.d(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_coords(1, xs.to_vec(), BaseMetric::Euclidean).unwrap()
    }

    #[test]
    fn euclidean_pythagoras() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]], BaseMetric::Euclidean)
            .unwrap();
        assert_eq!(s.distance(0, 1).unwrap(), 5.0);
        assert_eq!(s.distance(1, 1).unwrap(), 0.0);
    }

    #[test]
    fn snowflake_square_root() {
        let s = line(&[0.0, 4.0]).snowflake(0.5).unwrap();
        assert_eq!(s.distance(0, 1).unwrap(), 2.0);
        assert!(matches!(s.metric(), Metric::Snowflake { exponent, .. } if exponent == 0.5));
        assert!(line(&[0.0, 1.0]).snowflake(1.5).is_err());
    }

    #[test]
    fn unknown_id_is_domain_error() {
        let s = line(&[0.0, 1.0]);
        assert!(matches!(s.distance(0, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn duplicate_points_rejected() {
        assert!(FiniteMetricSpace::from_coords(1, vec![0.0, 1.0, 0.0], BaseMetric::Euclidean).is_err());
    }

    #[test]
    fn chebyshev_takes_max_coordinate() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]], BaseMetric::Chebyshev)
            .unwrap();
        assert_eq!(s.d(0, 1), 4.0);
    }

    #[test]
    fn diameters() {
        let s = line(&[0.0, 1.0]);
        assert_eq!(diameter(&s, &SubsetRef::full(&s)), 1.0);
        assert_eq!(diameter(&s, &SubsetRef::new(&s, vec![1]).unwrap()), 0.0);
        let tri = FiniteMetricSpace::from_points(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            BaseMetric::Euclidean,
        )
        .unwrap();
        // brute force over the three pairs
        let brute = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(a, b)| tri.d(a, b))
            .fold(0.0, f64::max);
        assert_eq!(diameter(&tri, &SubsetRef::full(&tri)), brute);
        assert!((brute - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn line_fast_path_matches_pairwise() {
        let xs = [0.3, -1.2, 4.5, 2.0, 0.0];
        let s = line(&xs);
        let m = FiniteMetricSpace::from_points(
            &xs.iter().map(|&x| vec![x, 0.0]).collect::<Vec<_>>(),
            BaseMetric::Euclidean,
        )
        .unwrap();
        let ids = [0, 1, 3, 4];
        assert_eq!(s.diameter_of(&ids), m.diameter_of(&ids));
        let sf = s.snowflake(0.5).unwrap();
        assert!((sf.diameter_of(&ids) - m.snowflake(0.5).unwrap().diameter_of(&ids)).abs() < 1e-15);
    }

    #[test]
    fn explicit_matrix_validation() {
        let ok = FiniteMetricSpace::from_matrix(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
        assert!(ok.is_ok());
        let asym = FiniteMetricSpace::from_matrix(2, vec![0.0, 1.0, 2.0, 0.0]);
        assert!(asym.is_err());
        let triangle = FiniteMetricSpace::from_matrix(3, vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]);
        assert!(triangle.is_err());
        let zero = FiniteMetricSpace::from_matrix(2, vec![0.0, 0.0, 0.0, 0.0]);
        assert!(zero.is_err());
    }

    #[test]
    fn doubling_examples() {
        let two = line(&[0.0, 10.0]);
        assert_eq!(estimate_doubling_constant(&two, &[(0, 1.0)]).unwrap(), 1);
        let single = line(&[0.5]);
        assert_eq!(estimate_doubling_constant(&single, &[(0, 1.0)]).unwrap(), 1);
        // B(5, 2) = {4, 5, 6}; open unit balls around grid points hold one point each
        let grid = line(&(0..11).map(f64::from).collect::<Vec<_>>());
        assert_eq!(estimate_doubling_constant(&grid, &[(5, 1.0)]).unwrap(), 3);
        assert!(estimate_doubling_constant(&grid, &[]).is_err());
    }

    #[test]
    fn perfectness_examples() {
        let grid = line(&(0..=10).map(|i| f64::from(i) / 10.0).collect::<Vec<_>>());
        let all = SubsetRef::full(&grid);
        let c = estimate_uniform_perfectness(&grid, &all, &[0.2, 0.3, 0.5, 0.8])
            .unwrap()
            .constant()
            .unwrap();
        assert!(c >= 0.5 - 1e-12 && c <= 1.0, "c = {c}");

        let two = line(&[0.0, 1.0]);
        let out = estimate_uniform_perfectness(&two, &SubsetRef::full(&two), &[0.5]).unwrap();
        assert!(matches!(
            out,
            Perfectness::NotUniformlyPerfectAtResolution { resolution_floor, .. } if resolution_floor == 1.0
        ));

        let single = line(&[0.0, 1.0]);
        let e = SubsetRef::new(&single, vec![0]).unwrap();
        assert!(estimate_uniform_perfectness(&single, &e, &[0.5]).is_err());
    }

    #[test]
    fn perfectness_monotone_when_grid_extends_down() {
        let grid = line(&(0..=40).map(|i| f64::from(i) / 40.0).collect::<Vec<_>>());
        let all = SubsetRef::full(&grid);
        let coarse = estimate_uniform_perfectness(&grid, &all, &[0.5, 0.7]).unwrap().constant().unwrap();
        let fine = estimate_uniform_perfectness(&grid, &all, &[0.06, 0.1, 0.5, 0.7])
            .unwrap()
            .constant()
            .unwrap();
        assert!(fine <= coarse);
    }
}
