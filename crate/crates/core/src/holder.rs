//! Hölder coefficients of sampled maps, ε-disjoint ball covers with their
//! coefficient p-sums, and minimal Hajłasz s-gradients.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, SubsetRef};
use crate::stats::fit_line;

/// A map between finite metric spaces, given by source id → target id.
#[derive(Clone, Debug)]
pub struct MapSample {
    source: FiniteMetricSpace,
    target: FiniteMetricSpace,
    assignment: Vec<usize>,
}

impl MapSample {
    pub fn new(source: FiniteMetricSpace, target: FiniteMetricSpace, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != source.len() {
            return Err(Error::domain(format!(
                "assignment has {} entries for {} source points",
                assignment.len(),
                source.len()
            )));
        }
        if let Some((i, &t)) = assignment.iter().enumerate().find(|(_, &t)| t >= target.len()) {
            return Err(Error::domain(format!(
                "source point {i} maps to target id {t}, but the target has {} points",
                target.len()
            )));
        }
        Ok(MapSample { source, target, assignment })
    }

    pub fn identity(space: FiniteMetricSpace) -> Self {
        let assignment = (0..space.len()).collect();
        MapSample {
            target: space.clone(),
            source: space,
            assignment,
        }
    }

    pub fn source(&self) -> &FiniteMetricSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteMetricSpace {
        &self.target
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn image(&self, x: usize) -> usize {
        self.assignment[x]
    }

    /// `d_Y(f x, f y)`.
    pub fn image_distance(&self, x: usize, y: usize) -> f64 {
        self.target.d(self.assignment[x], self.assignment[y])
    }

    /// Diameter of `f(ids)` in the target.
    pub fn image_diameter(&self, ids: &[usize]) -> f64 {
        let mut images: Vec<usize> = ids.iter().map(|&x| self.assignment[x]).collect();
        images.sort_unstable();
        images.dedup();
        self.target.diameter_of(&images)
    }

    /// The same map with target distances multiplied by `lambda`.
    pub fn with_scaled_target(&self, lambda: f64) -> Result<Self> {
        Ok(MapSample {
            source: self.source.clone(),
            target: self.target.scaled(lambda)?,
            assignment: self.assignment.clone(),
        })
    }
}

/// `max d_Y(f x, f y) / d_X(x, y)^α` over distinct pairs of `B`.
pub fn holder_coefficient(f: &MapSample, ball: &SubsetRef, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha = {alpha} must be positive")));
    }
    if let Some(&bad) = ball.ids().iter().find(|&&x| x >= f.source.len()) {
        return Err(Error::domain(format!("point {bad} is not in the source")));
    }
    Ok(coefficient(f, ball.ids(), alpha))
}

fn coefficient(f: &MapSample, ids: &[usize], alpha: f64) -> f64 {
    let mut best = 0.0f64;
    for (i, &x) in ids.iter().enumerate() {
        for &y in &ids[i + 1..] {
            let dy = f.image_distance(x, y);
            if dy > 0.0 {
                best = best.max(dy / f.source.d(x, y).powf(alpha));
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    /// Nominal radius; disjointness holds for the balls of radius `ε·radius`.
    pub radius: f64,
    /// Radius within which the ball's share of the subset is guaranteed.
    pub effective_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub balls: Vec<Ball>,
    pub epsilon: f64,
    pub covered: SubsetRef,
}

impl BallCover {
    /// Every covered point within the effective radius of some center, and
    /// the shrunken balls `B(x_i, ε·r_i)` pairwise disjoint (checked through
    /// `d(x_i, x_j) ≥ ε·(r_i + r_j)`).
    pub fn check(&self, space: &FiniteMetricSpace) -> Result<()> {
        for &x in self.covered.ids() {
            if !self.balls.iter().any(|b| space.d(x, b.center) <= b.effective_radius) {
                return Err(Error::domain(format!("point {x} is not covered")));
            }
        }
        for (i, a) in self.balls.iter().enumerate() {
            for b in &self.balls[i + 1..] {
                if space.d(a.center, b.center) < self.epsilon * (a.radius + b.radius) {
                    return Err(Error::domain(format!(
                        "shrunken balls at {} and {} intersect",
                        a.center, b.center
                    )));
                }
            }
        }
        Ok(())
    }

    /// Source points inside each ball's effective radius.
    pub fn members(&self, space: &FiniteMetricSpace, ball: &Ball) -> Vec<usize> {
        space.ball(ball.center, ball.effective_radius * (1.0 + 1e-12))
    }
}

/// Greedy cover: a point of `E` becomes a center when it is at least `2εr`
/// from every accepted center. Coverage is then guaranteed at `r(1 + 2ε)`.
pub fn epsilon_disjoint_cover(space: &FiniteMetricSpace, subset: &SubsetRef, r: f64, epsilon: f64) -> Result<BallCover> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius {r} must be positive")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon = {epsilon} is outside (0, 1)")));
    }
    let gap = 2.0 * epsilon * r;
    let mut centers: Vec<usize> = Vec::new();
    for &x in subset.ids() {
        if centers.iter().all(|&c| space.d(x, c) >= gap) {
            centers.push(x);
        }
    }
    let effective_radius = r * (1.0 + 2.0 * epsilon);
    Ok(BallCover {
        balls: centers
            .into_iter()
            .map(|center| Ball { center, radius: r, effective_radius })
            .collect(),
        epsilon,
        covered: subset.clone(),
    })
}

/// `Σ_i |f|_{α, B_i}^p` over the balls of `cover`.
pub fn ch_p_sum(f: &MapSample, cover: &BallCover, alpha: f64, p: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha = {alpha} must be positive")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("p = {p} is outside (1, inf)")));
    }
    Ok(cover
        .balls
        .iter()
        .map(|b| coefficient(f, &cover.members(&f.source, b), alpha).powf(p))
        .sum())
}

/// Sums whose log-log slope against `r` falls below `-DIVERGENCE_SLOPE` are
/// reported as diverging.
pub const DIVERGENCE_SLOPE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub r: f64,
    pub balls: usize,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChProfile {
    pub alpha: f64,
    pub p: f64,
    pub epsilon: f64,
    pub entries: Vec<ProfileEntry>,
    /// Largest sum over the grid.
    pub empirical_ce: f64,
    /// Least-squares slope of `ln sum` against `ln r` over positive sums.
    pub slope: f64,
    pub bounded: bool,
}

pub fn estimate_ch_profile(
    f: &MapSample,
    subset: &SubsetRef,
    alpha: f64,
    p: f64,
    radii: &[f64],
    epsilon: f64,
) -> Result<ChProfile> {
    if radii.is_empty() {
        return Err(Error::domain("radius grid is empty"));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let mut entries = Vec::with_capacity(radii.len());
    for &r in &radii {
        let cover = epsilon_disjoint_cover(&f.source, subset, r, epsilon)?;
        let sum = ch_p_sum(f, &cover, alpha, p)?;
        entries.push(ProfileEntry { r, balls: cover.balls.len(), sum });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = entries
        .iter()
        .filter(|e| e.sum > 0.0)
        .map(|e| (e.r.ln(), e.sum.ln()))
        .unzip();
    let slope = if xs.len() >= 2 { fit_line(&xs, &ys).slope } else { 0.0 };
    Ok(ChProfile {
        alpha,
        p,
        epsilon,
        empirical_ce: entries.iter().map(|e| e.sum).fold(0.0, f64::max),
        entries,
        slope,
        bounded: slope >= -DIVERGENCE_SLOPE,
    })
}

/// Integrability exponent of a gradient norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinite);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| Error::domain(format!("cannot read exponent {t:?}")))?;
        Exponent::finite(p)
    }

    pub fn finite(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinite)
        } else if p > 0.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::domain(format!("exponent {p} must be positive")))
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Exponent::Finite(p) => s.serialize_f64(p),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::finite(p),
            Raw::Text(t) => Exponent::parse(&t),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// All constraints vacuous.
    Zero,
    /// `g ≡ max c / 2`.
    ClosedForm,
    /// Log-barrier Newton iterations on the convex program.
    Barrier,
    /// Projected subgradient with Polyak steps.
    Subgradient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSolution {
    pub g: Vec<f64>,
    pub s: f64,
    pub p: Exponent,
    pub seminorm: f64,
    pub method: GradientMethod,
    /// Iterations used by the numerical solver.
    pub iterations: usize,
}

impl GradientSolution {
    /// First pair violating `c_xy = d_Y(f x, f y)/d(x, y)^s ≤ g(x) + g(y)`.
    pub fn first_violation(&self, f: &MapSample) -> Option<(usize, usize)> {
        let n = f.source.len();
        for x in 0..n {
            for y in x + 1..n {
                if !satisfies(f, self.s, &self.g, x, y) {
                    return Some((x, y));
                }
            }
        }
        None
    }
}

fn satisfies(f: &MapSample, s: f64, g: &[f64], x: usize, y: usize) -> bool {
    let dy = f.image_distance(x, y);
    dy == 0.0 || dy / f.source.d(x, y).powf(s) <= g[x] + g[y]
}

/// Problems up to this many points use the barrier solver.
pub const BARRIER_LIMIT: usize = 256;
pub const DEFAULT_SUBGRADIENT_ITERATIONS: usize = 10_000;

/// `‖g‖_p` with point weights (counting measure when `weights` is `None`).
pub fn weighted_norm(g: &[f64], p: Exponent, weights: Option<&[f64]>) -> f64 {
    match p {
        Exponent::Infinite => g.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(p) => {
            let sum: f64 = g
                .iter()
                .enumerate()
                .map(|(i, &v)| weights.map_or(1.0, |w| w[i]) * v.powf(p))
                .sum();
            sum.powf(1.0 / p)
        }
    }
}

struct Constraint {
    x: usize,
    y: usize,
    c: f64,
}

/// Minimal `‖g‖_p` subject to `g(x) + g(y) ≥ c_xy = d_Y(f x, f y)/d(x, y)^s`.
///
/// `p = ∞` has the closed form `g ≡ max c / 2`. Finite `p ≥ 1` is a convex
/// program solved by a log-barrier Newton method up to [`BARRIER_LIMIT`]
/// points and by projected subgradient beyond; `p < 1` is not convex and
/// gets a feasible barrier solution for the `p = 1` problem. Every returned
/// `g` is repaired until each pair satisfies the constraint as evaluated in
/// floating point.
pub fn hajlasz_gradient(f: &MapSample, s: f64, p: Exponent, weights: Option<&[f64]>) -> Result<GradientSolution> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("smoothness s = {s} must be positive")));
    }
    let n = f.source.len();
    if n == 0 {
        return Err(Error::domain("source has no points"));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::domain(format!("{} weights for {n} points", w.len())));
        }
        if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::domain("weights must be positive and finite"));
        }
    }
    let mut constraints = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let dx = f.source.d(x, y);
            let dy = f.image_distance(x, y);
            if dy == 0.0 {
                continue;
            }
            if dx == 0.0 {
                return Err(Error::domain(format!(
                    "source points {x} and {y} coincide but their images differ"
                )));
            }
            constraints.push(Constraint { x, y, c: dy / dx.powf(s) });
        }
    }
    let c_max = constraints.iter().map(|k| k.c).fold(0.0, f64::max);
    let (mut g, method, iterations) = if constraints.is_empty() {
        (vec![0.0; n], GradientMethod::Zero, 0)
    } else {
        match p {
            Exponent::Infinite => (vec![c_max / 2.0; n], GradientMethod::ClosedForm, 0),
            Exponent::Finite(pv) => {
                let q = pv.max(1.0);
                let w: Vec<f64> = (0..n).map(|i| weights.map_or(1.0, |w| w[i])).collect();
                // normalized problem: c ≤ 1
                let scaled: Vec<Constraint> = constraints
                    .iter()
                    .map(|k| Constraint { x: k.x, y: k.y, c: k.c / c_max })
                    .collect();
                let (h, method, it) = if n <= BARRIER_LIMIT {
                    let (h, it) = barrier_solve(n, &scaled, q, &w);
                    (h, GradientMethod::Barrier, it)
                } else {
                    let (h, it) = subgradient_solve(n, &scaled, q, &w, DEFAULT_SUBGRADIENT_ITERATIONS);
                    (h, GradientMethod::Subgradient, it)
                };
                (h.into_iter().map(|v| v * c_max).collect(), method, it)
            }
        }
    };
    repair(f, s, &mut g, &constraints);
    let seminorm = weighted_norm(&g, p, weights);
    Ok(GradientSolution { g, s, p, seminorm, method, iterations })
}

/// Raises endpoints of violated constraints by half the deficit, then by
/// single ulps, until the constraint holds exactly as `satisfies` checks it.
fn repair(f: &MapSample, s: f64, g: &mut [f64], constraints: &[Constraint]) {
    for v in g.iter_mut() {
        *v = v.max(0.0);
    }
    for _ in 0..4 {
        let mut clean = true;
        for k in constraints {
            let deficit = k.c - (g[k.x] + g[k.y]);
            if deficit > 0.0 {
                g[k.x] += deficit / 2.0;
                g[k.y] += deficit / 2.0;
            }
            while !satisfies(f, s, g, k.x, k.y) {
                clean = false;
                g[k.x] = g[k.x].next_up();
                g[k.y] = g[k.y].next_up();
            }
        }
        if clean {
            break;
        }
    }
}

/// Minimizes `Σ w_i g_i^p` with barrier terms for `g_i > 0` and
/// `g_x + g_y > c_xy`. Inputs are normalized so every `c ≤ 1`.
fn barrier_solve(n: usize, cons: &[Constraint], p: f64, w: &[f64]) -> (Vec<f64>, usize) {
    let objective = |g: &[f64]| -> f64 { g.iter().zip(w).map(|(v, wi)| wi * v.powf(p)).sum() };
    let barrier_terms = (cons.len() + n) as f64;
    let phi = |g: &[f64], t: f64| -> f64 {
        let mut val = t * objective(g);
        for v in g {
            if *v <= 0.0 {
                return f64::INFINITY;
            }
            val -= v.ln();
        }
        for k in cons {
            let slack = g[k.x] + g[k.y] - k.c;
            if slack <= 0.0 {
                return f64::INFINITY;
            }
            val -= slack.ln();
        }
        val
    };
    let mut g = vec![1.0; n];
    let mut t = barrier_terms / objective(&g).max(1e-12);
    let mut iterations = 0;
    loop {
        for _ in 0..200 {
            iterations += 1;
            let mut grad = DVector::zeros(n);
            let mut hess = DMatrix::zeros(n, n);
            for i in 0..n {
                let gi = g[i];
                grad[i] = t * p * w[i] * gi.powf(p - 1.0) - 1.0 / gi;
                let curvature = if p > 1.0 { t * p * (p - 1.0) * w[i] * gi.powf(p - 2.0) } else { 0.0 };
                hess[(i, i)] = curvature + 1.0 / (gi * gi);
            }
            for k in cons {
                let slack = g[k.x] + g[k.y] - k.c;
                let inv = 1.0 / slack;
                let inv2 = inv * inv;
                grad[k.x] -= inv;
                grad[k.y] -= inv;
                hess[(k.x, k.x)] += inv2;
                hess[(k.y, k.y)] += inv2;
                hess[(k.x, k.y)] += inv2;
                hess[(k.y, k.x)] += inv2;
            }
            let step = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => -&grad,
            };
            let decrement = -grad.dot(&step);
            if decrement / 2.0 < 1e-12 {
                break;
            }
            let current = phi(&g, t);
            let mut a = 1.0;
            let mut moved = false;
            while a > 1e-16 {
                let trial: Vec<f64> = g.iter().zip(step.iter()).map(|(v, d)| v + a * d).collect();
                let val = phi(&trial, t);
                if val.is_finite() && val <= current - 0.25 * a * decrement {
                    g = trial;
                    moved = true;
                    break;
                }
                a *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if barrier_terms / t < 1e-10 * objective(&g).max(1e-12) {
            break;
        }
        t *= 20.0;
    }
    (g, iterations)
}

/// Projected subgradient on `Σ w g^p + λ·Σ max(0, c − g_x − g_y)` with an
/// exact-penalty weight `λ`, Polyak steps against a shrinking target below
/// the best value seen, and the best iterate returned.
fn subgradient_solve(n: usize, cons: &[Constraint], p: f64, w: &[f64], iterations: usize) -> (Vec<f64>, usize) {
    let w_max = w.iter().copied().fold(0.0, f64::max);
    let lambda = 2.0 * p * w_max;
    let value = |g: &[f64]| -> f64 {
        let obj: f64 = g.iter().zip(w).map(|(v, wi)| wi * v.powf(p)).sum();
        let pen: f64 = cons.iter().map(|k| (k.c - g[k.x] - g[k.y]).max(0.0)).sum();
        obj + lambda * pen
    };
    // feasible start: g_x = max_y c_xy / 2
    let mut g = vec![0.0; n];
    for k in cons {
        g[k.x] = f64::max(g[k.x], k.c / 2.0);
        g[k.y] = f64::max(g[k.y], k.c / 2.0);
    }
    let mut best = g.clone();
    let mut best_val = value(&g);
    let mut sub = vec![0.0; n];
    for it in 0..iterations {
        for (i, v) in sub.iter_mut().enumerate() {
            *v = p * w[i] * g[i].max(1e-300).powf(p - 1.0);
        }
        for k in cons {
            if g[k.x] + g[k.y] < k.c {
                sub[k.x] -= lambda;
                sub[k.y] -= lambda;
            }
        }
        let norm2: f64 = sub.iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            break;
        }
        let target = best_val * (1.0 - 0.1 / (1.0 + it as f64).sqrt());
        let step = (value(&g) - target) / norm2;
        for (v, d) in g.iter_mut().zip(&sub) {
            *v = (*v - step * d).max(0.0);
        }
        let val = value(&g);
        if val < best_val {
            best_val = val;
            best.copy_from_slice(&g);
        }
    }
    (best, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::BaseMetric;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_coords(1, xs.to_vec(), BaseMetric::Euclidean).unwrap()
    }

    fn mapped(xs: &[f64], ys: &[f64]) -> MapSample {
        let source = line(xs);
        let mut uniq: Vec<f64> = ys.to_vec();
        uniq.sort_by(f64::total_cmp);
        uniq.dedup();
        let assignment = ys.iter().map(|y| uniq.iter().position(|u| u == y).unwrap()).collect();
        MapSample::new(source, line(&uniq), assignment).unwrap()
    }

    #[test]
    fn sqrt_coefficient_is_one() {
        let xs: Vec<f64> = (0..=100).map(|k| f64::from(k) / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sqrt()).collect();
        let f = mapped(&xs, &ys);
        let all = SubsetRef::full(f.source());
        let c = holder_coefficient(&f, &all, 0.5).unwrap();
        assert!((c - 1.0).abs() < 1e-6, "{c}");
    }

    #[test]
    fn constant_and_identity_coefficients() {
        let xs = [0.0, 0.25, 0.5, 1.0];
        let f = mapped(&xs, &[2.0; 4]);
        assert_eq!(holder_coefficient(&f, &SubsetRef::full(f.source()), 1.0).unwrap(), 0.0);
        let id = MapSample::identity(line(&xs));
        let c = holder_coefficient(&id, &SubsetRef::full(id.source()), 1.0).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
        let one = SubsetRef::new(id.source(), vec![2]).unwrap();
        assert_eq!(holder_coefficient(&id, &one, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn cover_examples() {
        let s = line(&[0.0, 1.0]);
        let c = epsilon_disjoint_cover(&s, &SubsetRef::full(&s), 0.3, 0.5).unwrap();
        assert_eq!(c.balls.len(), 2);
        let s = line(&[0.0, 0.01]);
        let c = epsilon_disjoint_cover(&s, &SubsetRef::full(&s), 0.3, 0.5).unwrap();
        assert_eq!(c.balls.len(), 1);
        assert!((c.balls[0].effective_radius - 0.6).abs() < 1e-15);
        c.check(&s).unwrap();
        let s = line(&[4.0]);
        assert_eq!(epsilon_disjoint_cover(&s, &SubsetRef::full(&s), 1.0, 0.2).unwrap().balls.len(), 1);
    }

    #[test]
    fn p_sum_matches_per_ball_brute_force() {
        let xs: Vec<f64> = (0..10).map(|k| f64::from(k) / 9.0).collect();
        let f = MapSample::identity(line(&xs));
        let all = SubsetRef::full(f.source());
        let cover = epsilon_disjoint_cover(f.source(), &all, 0.25, 0.8).unwrap();
        assert_eq!(cover.balls.len(), 3);
        let sum = ch_p_sum(&f, &cover, 1.0, 2.0).unwrap();
        let mut brute = 0.0;
        for b in &cover.balls {
            let ids: Vec<usize> = (0..10).filter(|&i| (xs[i] - xs[b.center]).abs() <= b.effective_radius).collect();
            let mut c: f64 = 0.0;
            for &i in &ids {
                for &j in &ids {
                    if i != j {
                        c = c.max((xs[i] - xs[j]).abs() / (xs[i] - xs[j]).abs());
                    }
                }
            }
            assert!(c <= 1.0 + 1e-12);
            brute += c * c;
        }
        assert!((sum - brute).abs() < 1e-12);
    }

    #[test]
    fn two_point_gradient() {
        let f = mapped(&[0.0, 1.0], &[0.0, 2.0]);
        for p in [1.0, 2.0, 3.5] {
            let sol = hajlasz_gradient(&f, 1.0, Exponent::Finite(p), None).unwrap();
            assert!((sol.seminorm - 2f64.powf(1.0 / p)).abs() < 1e-6, "p={p}: {}", sol.seminorm);
            assert!(sol.first_violation(&f).is_none());
        }
        let sol = hajlasz_gradient(&f, 1.0, Exponent::Infinite, None).unwrap();
        assert_eq!(sol.g, vec![1.0, 1.0]);
    }

    #[test]
    fn constant_map_has_zero_gradient() {
        let f = mapped(&[0.0, 0.3, 0.9], &[1.0; 3]);
        let sol = hajlasz_gradient(&f, 0.5, Exponent::Finite(2.0), None).unwrap();
        assert_eq!(sol.seminorm, 0.0);
        assert_eq!(sol.method, GradientMethod::Zero);
    }

    #[test]
    fn subgradient_path_is_feasible_and_close() {
        let xs: Vec<f64> = (0..12).map(|k| f64::from(k * k) / 121.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sqrt()).collect();
        let f = mapped(&xs, &ys);
        let exact = hajlasz_gradient(&f, 1.0, Exponent::Finite(2.0), None).unwrap();
        let n = xs.len();
        let mut cons = Vec::new();
        let mut c_max: f64 = 0.0;
        for x in 0..n {
            for y in x + 1..n {
                let c = f.image_distance(x, y) / f.source().d(x, y);
                c_max = c_max.max(c);
                cons.push(Constraint { x, y, c });
            }
        }
        for k in &mut cons {
            k.c /= c_max;
        }
        let (h, _) = subgradient_solve(n, &cons, 2.0, &vec![1.0; n], 20_000);
        let mut g: Vec<f64> = h.iter().map(|v| v * c_max).collect();
        repair(&f, 1.0, &mut g, &cons.iter().map(|k| Constraint { x: k.x, y: k.y, c: k.c * c_max }).collect::<Vec<_>>());
        let approx = weighted_norm(&g, Exponent::Finite(2.0), None);
        assert!(approx >= exact.seminorm - 1e-6);
        assert!(approx <= exact.seminorm * 1.05, "{approx} vs {}", exact.seminorm);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!(Exponent::parse("inf").unwrap(), Exponent::Infinite);
        assert_eq!(Exponent::parse("2").unwrap(), Exponent::Finite(2.0));
        assert!(Exponent::parse("-1").is_err());
        let json = serde_json::to_string(&Exponent::Infinite).unwrap();
        assert_eq!(serde_json::from_str::<Exponent>(&json).unwrap(), Exponent::Infinite);
    }
}
