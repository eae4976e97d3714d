//! Morse index formula checks on regions of R² and R³ bounded by round
//! circles and spheres.
//!
//! For a field `V` with isolated interior zeros and no zeros on `∂M`, the
//! formula `Ind(V) + Ind(∂₋V) = χ(M)` is checked by computing interior
//! indices with the index engine and indices of the tangential field on the
//! inward-pointing part of the boundary. The doubling identity
//! `2·Ind(V) + Σ ind(V̄, p) = 2χ(M) − χ(∂M)` is checked on the same data,
//! and one boundary zero per side is re-measured directly on the doubled,
//! collar-damped field.
//!
//! Collar coordinates around a boundary sphere of radius `r` are `(y, s)`:
//! `y` is a chart on the unit sphere and `s ∈ [0, 1)` is the distance into
//! `M` divided by the collar width `w`. In these coordinates `V` splits into
//! a tangential part `V_t` and a normal part `V_v` (positive pointing into
//! `M`).

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::degree::DegreeOptions;
use crate::fields::{central_differences, dot, norm, FnField, PolyField, VectorField};
use crate::index::{index_at, IndexError};
use crate::mesh::cached_mesh;

/// Sampling floor for `‖V‖` on the boundary.
pub const BOUNDARY_FLOOR: f64 = 1e-9;
/// `|⟨V, n⟩|` below this counts as tangent.
pub const TRANSVERSE_TOL: f64 = 1e-9;
/// Angular resolution of tangential zeros on circles.
pub const BISECTION_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MorseError {
    #[error("invalid scenario: {message}")]
    InvalidScenario { message: String },
    #[error("declared zero {point:?} is not in the interior of M")]
    ZeroNotInterior { point: Vec<f64> },
    #[error("declared zero {point:?} has field norm {norm:e}")]
    NotAZero { point: Vec<f64>, norm: f64 },
    #[error("field norm {norm:e} at boundary point {point:?}")]
    VanishesOnBoundary { point: Vec<f64>, norm: f64 },
    #[error("possible undeclared zero near {point:?}")]
    UndeclaredZero { point: Vec<f64> },
    #[error("field is tangent to boundary {boundary} on a whole neighbourhood of {point:?}")]
    NonTransverse { boundary: usize, point: Vec<f64> },
    #[error("tangential field on boundary {boundary} has non-isolated zeros near {point:?}")]
    NonIsolatedTangentialZeros { boundary: usize, point: Vec<f64> },
    #[error("tangential field vanishes identically on boundary {boundary}, which points inward")]
    IdenticallyZeroInward { boundary: usize },
    #[error("collar of width {collar_width} around boundary {boundary} contains the zero {point:?}")]
    CollarContainsZero { boundary: usize, point: Vec<f64>, collar_width: f64 },
    #[error("in-situ index {measured} at {point:?} differs from the predicted {predicted}")]
    SpotCheckMismatch { point: Vec<f64>, predicted: i64, measured: i64 },
    #[error("smooth step argument {s} outside [0, 1)")]
    Domain { s: f64 },
    #[error("{source}")]
    Index { source: IndexError },
}

impl MorseError {
    pub fn is_cross_check_failure(&self) -> bool {
        match self {
            MorseError::SpotCheckMismatch { .. } => true,
            MorseError::Index { source } => source.is_cross_check_failure(),
            _ => false,
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        MorseError::InvalidScenario { message: message.into() }
    }
}

impl From<IndexError> for MorseError {
    fn from(source: IndexError) -> Self {
        MorseError::Index { source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// M lies inside the sphere.
    Encloses,
    /// M lies outside the sphere.
    Excludes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySphere {
    pub center: Vec<f64>,
    pub radius: f64,
    pub side: Side,
}

impl BoundarySphere {
    /// +1 when the outward normal of M is the radial direction.
    fn sigma(&self) -> f64 {
        match self.side {
            Side::Encloses => 1.0,
            Side::Excludes => -1.0,
        }
    }

    pub fn point(&self, unit: &[f64]) -> Vec<f64> {
        self.center.iter().zip(unit).map(|(c, u)| c + self.radius * u).collect()
    }

    pub fn outward_normal(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter().map(|u| self.sigma() * u).collect()
    }

    /// Signed distance into M (negative outside M on this sphere's side).
    fn depth(&self, x: &[f64]) -> f64 {
        let dist = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
        self.sigma() * (self.radius - dist)
    }
}

/// Euler characteristic of a round sphere of dimension `dim − 1`.
fn sphere_chi(dim: usize) -> i64 {
    if dim % 2 == 1 {
        2
    } else {
        0
    }
}

/// A compact region of R^dim bounded by round spheres, a polynomial field
/// on it, its declared interior zeros and declared Euler characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub boundaries: Vec<BoundarySphere>,
    pub field: PolyField,
    pub zeros: Vec<Vec<f64>>,
    #[serde(rename = "chi_M")]
    pub chi_m: i64,
    pub chi_boundary: i64,
}

impl MorseScenario {
    pub fn from_json(text: &str) -> Result<Self, MorseError> {
        serde_json::from_str(text).map_err(|e| MorseError::invalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boundaries.iter().all(|b| b.depth(x) >= 0.0)
    }

    /// Distance from `x` to the nearest boundary sphere.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.boundaries.iter().map(|b| b.depth(x).abs()).fold(f64::INFINITY, f64::min)
    }

    fn outer_radius(&self) -> f64 {
        self.boundaries
            .iter()
            .filter(|b| b.side == Side::Encloses)
            .map(|b| b.radius)
            .fold(0.0, f64::max)
    }

    /// Structural checks plus the zero and boundary invariants. Returns the
    /// grid screening summary on success.
    pub fn validate(&self) -> Result<Screening, MorseError> {
        self.check_shape()?;
        for z in &self.zeros {
            if !self.boundaries.iter().all(|b| b.depth(z) > 1e-6) {
                return Err(MorseError::ZeroNotInterior { point: z.clone() });
            }
            let len = norm(&self.field.eval_unchecked(z));
            if !(len < crate::index::ZERO_TOLERANCE) {
                return Err(MorseError::NotAZero { point: z.clone(), norm: len });
            }
        }
        for b in &self.boundaries {
            let (point, len) = boundary_min_norm(&self.field, b, &Sampling::default());
            if !(len > BOUNDARY_FLOOR) {
                return Err(MorseError::VanishesOnBoundary { point, norm: len });
            }
        }
        screen_for_zeros(self)
    }

    fn check_shape(&self) -> Result<(), MorseError> {
        if !(2..=3).contains(&self.dim) {
            return Err(MorseError::invalid(format!("dimension {} not in 2..=3", self.dim)));
        }
        if self.field.dim() != self.dim || self.field.dim_out() != self.dim {
            return Err(MorseError::invalid("field dimension differs from scenario dimension"));
        }
        if self.boundaries.is_empty() {
            return Err(MorseError::invalid("at least one boundary sphere is required"));
        }
        for b in &self.boundaries {
            if b.center.len() != self.dim || !(b.radius > 0.0 && b.radius.is_finite()) {
                return Err(MorseError::invalid("boundary needs a center in R^dim and a positive radius"));
            }
        }
        let enclosing: Vec<&BoundarySphere> = self.boundaries.iter().filter(|b| b.side == Side::Encloses).collect();
        if enclosing.len() != 1 {
            return Err(MorseError::invalid("exactly one enclosing sphere is required"));
        }
        let outer = enclosing[0];
        let excluded: Vec<&BoundarySphere> = self.boundaries.iter().filter(|b| b.side == Side::Excludes).collect();
        for (i, e) in excluded.iter().enumerate() {
            let gap = outer.radius - norm(&diff(&e.center, &outer.center)) - e.radius;
            if !(gap > 0.0) {
                return Err(MorseError::invalid("excluded sphere must lie strictly inside the enclosing one"));
            }
            for f in &excluded[i + 1..] {
                if norm(&diff(&e.center, &f.center)) <= e.radius + f.radius {
                    return Err(MorseError::invalid("excluded spheres must be disjoint"));
                }
            }
        }
        let expected = self.boundaries.len() as i64 * sphere_chi(self.dim);
        if self.chi_boundary != expected {
            return Err(MorseError::invalid(format!(
                "chi_boundary {} disagrees with {} boundary spheres (expected {expected})",
                self.chi_boundary,
                self.boundaries.len()
            )));
        }
        Ok(())
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Boundary sampling resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    /// Uniform angles per circle, offset by half a step.
    pub angular_samples: usize,
    /// Sphere mesh level for two-dimensional boundaries.
    pub sphere_level: u32,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { angular_samples: 720, sphere_level: 4 }
    }
}

impl Sampling {
    fn angle(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * (k as f64 + 0.5) / self.angular_samples as f64
    }

    /// Unit sample directions: offset angles on circles, vertices of a
    /// rotated sphere mesh on spheres. The rotation keeps the samples off
    /// the coordinate planes.
    fn units(&self, dim: usize) -> Vec<Vec<f64>> {
        if dim == 2 {
            (0..self.angular_samples)
                .map(|k| {
                    let t = self.angle(k);
                    vec![t.cos(), t.sin()]
                })
                .collect()
        } else {
            let mesh = cached_mesh(2, self.sphere_level).expect("level within cap");
            mesh.vertices().map(rotate_generic).collect()
        }
    }
}

fn rotate_generic(v: &[f64]) -> Vec<f64> {
    // Rodrigues rotation about (1, 2, 3)/√14 by 0.7 rad
    let k = {
        let a = [1.0, 2.0, 3.0];
        let l = norm(&a);
        [a[0] / l, a[1] / l, a[2] / l]
    };
    let (s, c) = 0.7f64.sin_cos();
    let kv = dot(&k, v);
    let cross = [k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]];
    (0..3).map(|i| v[i] * c + cross[i] * s + k[i] * kv * (1.0 - c)).collect()
}

/// Minimum of `‖V‖` over a boundary sphere: sample, then refine every
/// sampled local minimum by pattern search in a chart around it.
fn boundary_min_norm(field: &PolyField, b: &BoundarySphere, sampling: &Sampling) -> (Vec<f64>, f64) {
    let dim = b.center.len();
    let units = sampling.units(dim);
    let norms: Vec<f64> = units.iter().map(|u| norm(&field.eval_unchecked(&b.point(u)))).collect();
    let neighbours = sample_neighbours(dim, sampling);
    let spacing = if dim == 2 {
        2.0 * std::f64::consts::PI / sampling.angular_samples as f64
    } else {
        0.5f64.powi(sampling.sphere_level as i32 + 1)
    };
    let mut best = (b.point(&units[0]), norms[0]);
    for (i, u) in units.iter().enumerate() {
        if neighbours[i].iter().any(|&j| norms[j] < norms[i]) {
            continue;
        }
        let chart = Chart::centered_at(u);
        let f = |y: &[f64]| norm(&field.eval_unchecked(&b.point(&chart.unit(y))));
        let y = pattern_search(f, vec![0.0; dim - 1], spacing);
        let len = f(&y);
        if len < best.1 {
            best = (b.point(&chart.unit(&y)), len);
        }
    }
    best
}

/// Adjacency of the boundary samples.
fn sample_neighbours(dim: usize, sampling: &Sampling) -> Vec<Vec<usize>> {
    if dim == 2 {
        let n = sampling.angular_samples;
        return (0..n).map(|k| vec![(k + n - 1) % n, (k + 1) % n]).collect();
    }
    let mesh = cached_mesh(2, sampling.sphere_level).expect("level within cap");
    let mut sets: Vec<HashSet<usize>> = vec![HashSet::new(); mesh.vertex_count()];
    for cell in mesh.simplices() {
        for &a in cell {
            for &c in cell {
                if a != c {
                    sets[a].insert(c);
                }
            }
        }
    }
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Compass search for a local minimum, halving the step down to 1e-12.
fn pattern_search(f: impl Fn(&[f64]) -> f64, mut y: Vec<f64>, mut step: f64) -> Vec<f64> {
    let mut value = f(&y);
    while step > 1e-12 && value > 0.0 {
        let mut improved = false;
        for i in 0..y.len() {
            for dir in [1.0, -1.0] {
                let mut trial = y.clone();
                trial[i] += dir * step;
                let v = f(&trial);
                if v < value {
                    (y, value, improved) = (trial, v, true);
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    y
}

/// Result of the grid screening for undeclared zeros. This is a soundness
/// check at grid resolution, not a proof that no other zeros exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Screening {
    pub spacing: f64,
    pub points_scanned: usize,
    pub min_norm_outside_zero_balls: f64,
    pub note: &'static str,
}

/// Radius of the ball around each declared zero excluded from screening and
/// used for its index sphere.
fn zero_radius(scenario: &MorseScenario, z: &[f64]) -> f64 {
    let to_boundary = scenario.boundary_distance(z);
    let to_other = scenario
        .zeros
        .iter()
        .filter(|w| w.as_slice() != z)
        .map(|w| norm(&diff(w, z)))
        .fold(f64::INFINITY, f64::min);
    (0.5 * to_boundary).min(0.4 * to_other).min(0.1 * scenario.outer_radius())
}

fn screen_for_zeros(scenario: &MorseScenario) -> Result<Screening, MorseError> {
    let dim = scenario.dim;
    let outer = scenario
        .boundaries
        .iter()
        .find(|b| b.side == Side::Encloses)
        .expect("shape checked");
    let h = 0.02 * outer.radius;
    let steps = (2.0 * outer.radius / h).round() as i64;
    let balls: Vec<(Vec<f64>, f64)> = scenario.zeros.iter().map(|z| (z.clone(), zero_radius(scenario, z))).collect();
    let outside_balls = |x: &[f64]| balls.iter().all(|(z, r)| norm(&diff(x, z)) > *r);
    let total = (steps + 1).pow(dim as u32);

    let results: Vec<(usize, f64, Option<Vec<f64>>)> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let x: Vec<f64> = (0..dim)
                .map(|i| {
                    let k = rest % (steps + 1);
                    rest /= steps + 1;
                    outer.center[i] - outer.radius + k as f64 * h
                })
                .collect();
            if !scenario.contains(&x) || !outside_balls(&x) {
                return (0, f64::INFINITY, None);
            }
            let v = scenario.field.eval_unchecked(&x);
            let len = norm(&v);
            let jac = scenario.field.jacobian(&x).expect("dimension checked");
            let jac_norm = jac.iter().flatten().map(|a| a * a).sum::<f64>().sqrt();
            // a linear model predicts a zero within one grid cell
            let suspicious = len <= h * jac_norm || len < BOUNDARY_FLOOR;
            let found = if suspicious {
                newton_zero(&scenario.field, &x).filter(|z| scenario.contains(z) && outside_balls(z))
            } else {
                None
            };
            (1, len, found)
        })
        .collect();

    let mut points = 0;
    let mut min_norm = f64::INFINITY;
    for (count, len, found) in results {
        if let Some(point) = found {
            return Err(MorseError::UndeclaredZero { point });
        }
        points += count;
        min_norm = min_norm.min(len);
    }
    Ok(Screening {
        spacing: h,
        points_scanned: points,
        min_norm_outside_zero_balls: min_norm,
        note: "grid screening at the stated spacing; not a proof of zero-freeness",
    })
}

fn newton_zero(field: &dyn VectorField, start: &[f64]) -> Option<Vec<f64>> {
    let d = field.dim_in();
    let mut x = start.to_vec();
    for _ in 0..60 {
        let v = field.eval_unchecked(&x);
        if norm(&v) < 1e-12 {
            return Some(x);
        }
        let jac = field.jacobian(&x).ok()?;
        let m = DMatrix::from_fn(d, d, |i, j| jac[i][j]);
        let rhs = DVector::from_iterator(d, v.iter().map(|c| -c));
        let step = m.lu().solve(&rhs)?;
        let len = step.norm();
        let scale = if len > 0.1 { 0.1 / len } else { 1.0 };
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi += scale * si;
        }
        if !x.iter().all(|c| c.is_finite()) {
            return None;
        }
    }
    (norm(&field.eval_unchecked(&x)) < 1e-10).then_some(x)
}

/// Local coordinates `y ∈ R^{dim−1}` on the unit sphere around a base
/// direction `p`: an angle offset on circles, inverse stereographic
/// projection from `−p` on 2-spheres.
#[derive(Debug, Clone)]
pub struct Chart {
    base: Vec<f64>,
    frame: Vec<Vec<f64>>,
}

impl Chart {
    pub fn centered_at(p: &[f64]) -> Self {
        let base = p.to_vec();
        let frame = if p.len() == 2 {
            vec![vec![-p[1], p[0]]]
        } else {
            let axis = (0..3)
                .min_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs()))
                .expect("three coordinates");
            let mut e1: Vec<f64> = (0..3).map(|i| if i == axis { 1.0 } else { 0.0 }).collect();
            let proj = dot(&e1, p);
            e1.iter_mut().zip(p).for_each(|(a, b)| *a -= proj * b);
            let l = norm(&e1);
            e1.iter_mut().for_each(|a| *a /= l);
            let e2 = vec![
                p[1] * e1[2] - p[2] * e1[1],
                p[2] * e1[0] - p[0] * e1[2],
                p[0] * e1[1] - p[1] * e1[0],
            ];
            vec![e1, e2]
        };
        Self { base, frame }
    }

    fn combine(&self, base_coeff: f64, frame_coeffs: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.base.iter().map(|b| base_coeff * b).collect();
        for (e, &c) in self.frame.iter().zip(frame_coeffs) {
            out.iter_mut().zip(e).for_each(|(o, ei)| *o += c * ei);
        }
        out
    }

    pub fn unit(&self, y: &[f64]) -> Vec<f64> {
        if self.base.len() == 2 {
            self.combine(y[0].cos(), &[y[0].sin()])
        } else {
            let r2 = y[0] * y[0] + y[1] * y[1];
            let q = 1.0 + r2;
            self.combine((1.0 - r2) / q, &[2.0 * y[0] / q, 2.0 * y[1] / q])
        }
    }

    /// Ambient vectors ∂unit/∂y_i.
    pub fn tangent_basis(&self, y: &[f64]) -> Vec<Vec<f64>> {
        if self.base.len() == 2 {
            vec![self.combine(-y[0].sin(), &[y[0].cos()])]
        } else {
            let q = 1.0 + y[0] * y[0] + y[1] * y[1];
            let q2 = q * q;
            vec![
                self.combine(-4.0 * y[0] / q2, &[2.0 / q - 4.0 * y[0] * y[0] / q2, -4.0 * y[0] * y[1] / q2]),
                self.combine(-4.0 * y[1] / q2, &[-4.0 * y[0] * y[1] / q2, 2.0 / q - 4.0 * y[1] * y[1] / q2]),
            ]
        }
    }

    /// Chart coordinates of a unit vector, if it is not the chart's pole.
    pub fn coords_of(&self, unit: &[f64]) -> Option<Vec<f64>> {
        let along = dot(unit, &self.base);
        if self.base.len() == 2 {
            Some(vec![dot(unit, &self.frame[0]).atan2(along)])
        } else if 1.0 + along > 1e-12 {
            Some(self.frame.iter().map(|e| dot(unit, e) / (1.0 + along)).collect())
        } else {
            None
        }
    }
}

/// `(V_t, V_v)` of `V` at collar coordinates `(y, s)`, `s ≥ 0`, where `V_t`
/// is in chart components and `V_v = ds/dt` (positive into M).
fn collar_split(
    field: &dyn VectorField,
    boundary: &BoundarySphere,
    chart: &Chart,
    width: f64,
    y: &[f64],
    s: f64,
) -> (Vec<f64>, f64) {
    let unit = chart.unit(y);
    let rho = boundary.radius - boundary.sigma() * width * s;
    let x: Vec<f64> = boundary.center.iter().zip(&unit).map(|(c, u)| c + rho * u).collect();
    let v = field.eval_unchecked(&x);
    let basis = chart.tangent_basis(y);
    let k = basis.len();
    let gram = DMatrix::from_fn(k, k, |i, j| dot(&basis[i], &basis[j]));
    let proj = DVector::from_iterator(k, basis.iter().map(|b| dot(b, &v) / rho));
    let tangential = gram.lu().solve(&proj).expect("chart basis is independent");
    let normal = -boundary.sigma() * dot(&v, &unit) / width;
    (tangential.iter().copied().collect(), normal)
}

/// The tangential field `V − ⟨V, n⟩n` at a boundary point.
pub fn tangential_vector(scenario: &MorseScenario, boundary: usize, unit: &[f64]) -> Vec<f64> {
    let b = &scenario.boundaries[boundary];
    let x = b.point(unit);
    let v = scenario.field.eval_unchecked(&x);
    let n = b.outward_normal(unit);
    let nu = dot(&v, &n);
    v.iter().zip(&n).map(|(a, c)| a - nu * c).collect()
}

/// On a circle, the scalar `g(θ) = ⟨V, t(θ)⟩` with `t` the counterclockwise
/// unit tangent.
pub fn tangential_scalar(scenario: &MorseScenario, boundary: usize, theta: f64) -> f64 {
    let b = &scenario.boundaries[boundary];
    let x = b.point(&[theta.cos(), theta.sin()]);
    let v = scenario.field.eval_unchecked(&x);
    -v[0] * theta.sin() + v[1] * theta.cos()
}

/// Pairing of V with the outward normal of M.
pub fn normal_pairing(scenario: &MorseScenario, boundary: usize, unit: &[f64]) -> f64 {
    let b = &scenario.boundaries[boundary];
    dot(&scenario.field.eval_unchecked(&b.point(unit)), &b.outward_normal(unit))
}

/// The tangential field on a boundary sphere in the chart centered at `p`.
pub fn tangential_chart_field<'a>(
    scenario: &'a MorseScenario,
    boundary: usize,
    p: &[f64],
) -> impl VectorField + 'a {
    let chart = Chart::centered_at(p);
    let k = scenario.dim - 1;
    FnField::new(k, k, move |y: &[f64]| {
        collar_split(&scenario.field, &scenario.boundaries[boundary], &chart, 1.0, y, 0.0).0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flow {
    Inward,
    Outward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub boundary: usize,
    pub samples: Vec<BoundarySample>,
}

impl Classification {
    pub fn inward_count(&self) -> usize {
        self.samples.iter().filter(|s| s.nu < 0.0).count()
    }
}

/// Signs of `⟨V, n⟩` at boundary samples. A neighbourhood on which `V` is
/// tangent (every vertex of a sample edge or triangle with `|ν| < 1e−9`)
/// rejects the scenario; isolated tangencies are where ∂₋M meets ∂₊M.
pub fn classify_boundary(scenario: &MorseScenario, sampling: &Sampling) -> Result<Vec<Classification>, MorseError> {
    scenario.check_shape()?;
    let units = sampling.units(scenario.dim);
    let mut out = Vec::new();
    for (bi, b) in scenario.boundaries.iter().enumerate() {
        let samples: Vec<BoundarySample> = units
            .iter()
            .map(|u| {
                let point = b.point(u);
                let nu = dot(&scenario.field.eval_unchecked(&point), &b.outward_normal(u));
                BoundarySample { point, nu }
            })
            .collect();
        let tangent = |i: usize| samples[i].nu.abs() < TRANSVERSE_TOL;
        if scenario.dim == 2 {
            for i in 0..samples.len() {
                if tangent(i) && tangent((i + 1) % samples.len()) {
                    return Err(MorseError::NonTransverse { boundary: bi, point: samples[i].point.clone() });
                }
            }
        } else {
            let mesh = cached_mesh(2, sampling.sphere_level).expect("level within cap");
            let flat = mesh.simplices().find(|c| c.iter().all(|&v| tangent(v))).map(|c| c[0]);
            if let Some(v) = flat {
                return Err(MorseError::NonTransverse { boundary: bi, point: samples[v].point.clone() });
            }
        }
        out.push(Classification { boundary: bi, samples });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryZero {
    pub boundary: usize,
    pub point: Vec<f64>,
    /// Direction on the unit sphere of the boundary.
    pub unit: Vec<f64>,
    /// Index of the tangential field on the boundary sphere.
    pub index: i64,
    pub flow: Flow,
}

/// A boundary sphere on which the tangential field vanishes identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalComponent {
    pub boundary: usize,
    pub flow: Flow,
    /// Euler characteristic of the boundary sphere, the total index any
    /// perturbation of the zero tangential field would carry.
    pub chi: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryIndices {
    pub zeros: Vec<BoundaryZero>,
    pub normal_components: Vec<NormalComponent>,
}

/// Zeros of the tangential field on every boundary sphere with their
/// indices and flow direction.
pub fn boundary_indices(scenario: &MorseScenario, opts: &DegreeOptions) -> Result<BoundaryIndices, MorseError> {
    classify_boundary(scenario, &Sampling::default())?;
    let mut out = BoundaryIndices { zeros: Vec::new(), normal_components: Vec::new() };
    for bi in 0..scenario.boundaries.len() {
        let found = if scenario.dim == 2 {
            circle_zeros(scenario, bi)?
        } else {
            sphere_zeros(scenario, bi, opts)?
        };
        match found {
            Found::Isolated(zeros) => out.zeros.extend(zeros),
            Found::Identically(flow) => {
                if flow == Flow::Inward {
                    return Err(MorseError::IdenticallyZeroInward { boundary: bi });
                }
                out.normal_components.push(NormalComponent { boundary: bi, flow, chi: sphere_chi(scenario.dim) });
            }
        }
    }
    Ok(out)
}

enum Found {
    Isolated(Vec<BoundaryZero>),
    Identically(Flow),
}

fn flow_at(scenario: &MorseScenario, boundary: usize, unit: &[f64]) -> Result<Flow, MorseError> {
    let nu = normal_pairing(scenario, boundary, unit);
    if nu.abs() < TRANSVERSE_TOL {
        let point = scenario.boundaries[boundary].point(unit);
        let norm = norm(&scenario.field.eval_unchecked(&point));
        return Err(MorseError::VanishesOnBoundary { point, norm });
    }
    Ok(if nu < 0.0 { Flow::Inward } else { Flow::Outward })
}

fn circle_zeros(scenario: &MorseScenario, bi: usize) -> Result<Found, MorseError> {
    let sampling = Sampling::default();
    let count = sampling.angular_samples;
    let g: Vec<f64> = (0..count).map(|k| tangential_scalar(scenario, bi, sampling.angle(k))).collect();
    let scale = g.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let tol = 1e-12 * (1.0 + scale);
    let is_zero = |k: usize| g[k].abs() <= tol;

    if (0..count).all(is_zero) {
        return Ok(Found::Identically(flow_at(scenario, bi, &[1.0, 0.0])?));
    }
    let b = &scenario.boundaries[bi];
    let start = (0..count).find(|&k| !is_zero(k)).expect("some sample is nonzero");
    let mut zeros = Vec::new();
    let mut a = start;
    loop {
        // next nonzero sample after a, possibly across a run of zero samples
        let mut next = (a + 1) % count;
        let mut skipped = 0;
        while is_zero(next) {
            next = (next + 1) % count;
            skipped += 1;
        }
        if skipped > 1 {
            let point = b.point(&unit_at(sampling.angle((a + 1) % count)));
            return Err(MorseError::NonIsolatedTangentialZeros { boundary: bi, point });
        }
        let lo = sampling.angle(a);
        let mut hi = sampling.angle(next);
        if hi <= lo {
            hi += 2.0 * std::f64::consts::PI;
        }
        let (sa, sb) = (g[a].signum(), g[next].signum());
        let zero_at = if sa != sb {
            Some(bisect(|t| tangential_scalar(scenario, bi, t), lo, hi, sa))
        } else if skipped == 1 {
            // touches zero without changing sign
            Some(sampling.angle((a + 1) % count))
        } else {
            None
        };
        if let Some(theta) = zero_at {
            let unit = unit_at(theta);
            let index = match (sa > 0.0, sb > 0.0) {
                (false, true) => 1,
                (true, false) => -1,
                _ => 0,
            };
            zeros.push(BoundaryZero {
                boundary: bi,
                point: b.point(&unit),
                flow: flow_at(scenario, bi, &unit)?,
                unit,
                index,
            });
        }
        a = next;
        if a == start {
            break;
        }
    }
    Ok(Found::Isolated(zeros))
}

fn unit_at(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, sign_lo: f64) -> f64 {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sphere_zeros(scenario: &MorseScenario, bi: usize, opts: &DegreeOptions) -> Result<Found, MorseError> {
    let sampling = Sampling::default();
    let units = sampling.units(3);
    let b = &scenario.boundaries[bi];
    let ratios: Vec<f64> = units
        .iter()
        .map(|u| {
            let t = norm(&tangential_vector(scenario, bi, u));
            let v = norm(&scenario.field.eval_unchecked(&b.point(u)));
            t / v
        })
        .collect();
    if ratios.iter().all(|&r| r < 1e-9) {
        return Ok(Found::Identically(flow_at(scenario, bi, &units[0])?));
    }

    let neighbours = sample_neighbours(3, &sampling);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for (i, &r) in ratios.iter().enumerate() {
        let local_min = neighbours[i].iter().all(|&j| ratios[j] >= r);
        if !local_min || r > 0.5 {
            continue;
        }
        if let Some(u) = newton_on_sphere(scenario, bi, &units[i]) {
            if found.iter().all(|f| norm(&diff(f, &u)) > 1e-6) {
                found.push(u);
            }
        }
    }
    if found.len() > 64 {
        return Err(MorseError::NonIsolatedTangentialZeros { boundary: bi, point: b.point(&found[0]) });
    }

    let mut zeros = Vec::new();
    for u in &found {
        let chart = Chart::centered_at(u);
        let nearest = found
            .iter()
            .filter(|w| *w != u)
            .filter_map(|w| chart.coords_of(w))
            .map(|y| norm(&y))
            .fold(f64::INFINITY, f64::min);
        let radius = 0.5f64.min(0.4 * nearest);
        let field = tangential_chart_field(scenario, bi, u);
        let index = match index_at(&field, &[0.0, 0.0], radius, opts) {
            Ok(r) => r.index,
            Err(IndexError::VanishesOnSphere { .. }) => {
                return Err(MorseError::NonIsolatedTangentialZeros { boundary: bi, point: b.point(u) })
            }
            Err(e) => return Err(e.into()),
        };
        zeros.push(BoundaryZero {
            boundary: bi,
            point: b.point(u),
            unit: u.clone(),
            index,
            flow: flow_at(scenario, bi, u)?,
        });
    }
    Ok(Found::Isolated(zeros))
}

/// Newton iteration on the chart tangential field, re-centering the chart
/// at every step.
fn newton_on_sphere(scenario: &MorseScenario, bi: usize, start: &[f64]) -> Option<Vec<f64>> {
    let mut unit = start.to_vec();
    let scale = norm(&scenario.field.eval_unchecked(&scenario.boundaries[bi].point(start)));
    for _ in 0..100 {
        let field = tangential_chart_field(scenario, bi, &unit);
        let t = field.eval_unchecked(&[0.0, 0.0]);
        if norm(&t) <= 1e-13 * (1.0 + scale) {
            return Some(unit);
        }
        let jac = central_differences(&field, &[0.0, 0.0]);
        let m = DMatrix::from_fn(2, 2, |i, j| jac[i][j]);
        let rhs = DVector::from_vec(vec![-t[0], -t[1]]);
        let step = m.lu().solve(&rhs)?;
        let len = step.norm();
        let damp = if len > 0.2 { 0.2 / len } else { 1.0 };
        let chart = Chart::centered_at(&unit);
        unit = chart.unit(&[damp * step[0], damp * step[1]]);
        if !unit.iter().all(|c| c.is_finite()) {
            return None;
        }
    }
    let field = tangential_chart_field(scenario, bi, &unit);
    (norm(&field.eval_unchecked(&[0.0, 0.0])) <= 1e-10 * (1.0 + scale)).then_some(unit)
}

/// `h(s) = σ(2s)` with `σ(u) = e(u)/(e(u) + e(1 − u))`, `e(u) = exp(−1/u)`
/// for `u > 0` and 0 otherwise. Smooth, `h(0) = 0`, positive on `(0, ½]`,
/// identically 1 on `[½, 1)`.
pub fn smooth_step(s: f64) -> Result<f64, MorseError> {
    if !(0.0..1.0).contains(&s) {
        return Err(MorseError::Domain { s });
    }
    Ok(step_unchecked(s))
}

fn step_unchecked(s: f64) -> f64 {
    let e = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    let u = 2.0 * s;
    if u >= 1.0 {
        return 1.0;
    }
    let (a, b) = (e(u), e(1.0 - u));
    a / (a + b)
}

/// The doubled, collar-damped field in collar coordinates `(y, s)`,
/// `s ∈ (−1, 1)`: `(V_t(y, |s|), sgn(s)·h(|s|)·V_v(y, |s|))`.
pub fn doubled_collar_field<'a>(
    scenario: &'a MorseScenario,
    boundary: usize,
    p: &[f64],
    collar_width: f64,
) -> impl VectorField + 'a {
    let chart = Chart::centered_at(p);
    let d = scenario.dim;
    FnField::new(d, d, move |ys: &[f64]| {
        let (y, s) = ys.split_at(d - 1);
        let s = s[0];
        let (mut out, normal) =
            collar_split(&scenario.field, &scenario.boundaries[boundary], &chart, collar_width, y, s.abs());
        out.push(s.signum() * step_unchecked(s.abs().min(0.999_999)) * normal);
        out
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotCheck {
    pub point: Vec<f64>,
    pub flow: Flow,
    pub tangential_index: i64,
    pub predicted: i64,
    pub measured: i64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    /// 2·Ind(V) + Σ signed boundary contributions.
    pub doubled_sum: i64,
    /// 2χ(M) − χ(∂M).
    pub target: i64,
    pub holds: bool,
    pub collar_width: f64,
    pub convention: &'static str,
    pub spot_checks: Vec<SpotCheck>,
}

pub const SIGN_CONVENTION: &str =
    "ind(doubled, p) = +tangential index on the inward part, -tangential index on the outward part";

fn signed_contribution(flow: Flow, index: i64) -> i64 {
    match flow {
        Flow::Inward => index,
        Flow::Outward => -index,
    }
}

/// Default collar width: a fifth of the smallest boundary radius.
pub fn default_collar_width(scenario: &MorseScenario) -> f64 {
    0.2 * scenario.boundaries.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min)
}

/// Checks the doubling identity and re-measures one boundary zero per flow
/// direction on the doubled field.
pub fn double_check(
    scenario: &MorseScenario,
    collar_width: f64,
    opts: &DegreeOptions,
) -> Result<DoublingReport, MorseError> {
    scenario.validate()?;
    let interior = interior_indices(scenario, opts)?;
    let boundary = boundary_indices(scenario, opts)?;
    doubling_from_parts(scenario, collar_width, &interior, &boundary, opts)
}

fn doubling_from_parts(
    scenario: &MorseScenario,
    collar_width: f64,
    interior: &[(Vec<f64>, i64)],
    boundary: &BoundaryIndices,
    opts: &DegreeOptions,
) -> Result<DoublingReport, MorseError> {
    if !(collar_width > 0.0) {
        return Err(MorseError::invalid("collar width must be positive"));
    }
    for (bi, b) in scenario.boundaries.iter().enumerate() {
        let limit = match b.side {
            Side::Encloses => b.radius,
            Side::Excludes => f64::INFINITY,
        };
        if collar_width >= limit {
            return Err(MorseError::invalid("collar width exceeds the enclosing radius"));
        }
        for z in &scenario.zeros {
            if b.depth(z) < collar_width {
                return Err(MorseError::CollarContainsZero { boundary: bi, point: z.clone(), collar_width });
            }
        }
    }
    let ind_v: i64 = interior.iter().map(|(_, i)| i).sum();
    let boundary_sum: i64 = boundary.zeros.iter().map(|z| signed_contribution(z.flow, z.index)).sum::<i64>()
        + boundary
            .normal_components
            .iter()
            .map(|c| signed_contribution(c.flow, c.chi))
            .sum::<i64>();
    let doubled_sum = 2 * ind_v + boundary_sum;
    let target = 2 * scenario.chi_m - scenario.chi_boundary;

    let mut spot_checks = Vec::new();
    for flow in [Flow::Inward, Flow::Outward] {
        let Some(z) = boundary.zeros.iter().find(|z| z.flow == flow && z.index != 0) else {
            continue;
        };
        let check = spot_check(scenario, z, &boundary.zeros, collar_width, opts)?;
        if check.measured != check.predicted {
            return Err(MorseError::SpotCheckMismatch {
                point: check.point,
                predicted: check.predicted,
                measured: check.measured,
            });
        }
        spot_checks.push(check);
    }
    Ok(DoublingReport {
        doubled_sum,
        target,
        holds: doubled_sum == target,
        collar_width,
        convention: SIGN_CONVENTION,
        spot_checks,
    })
}

fn spot_check(
    scenario: &MorseScenario,
    zero: &BoundaryZero,
    all: &[BoundaryZero],
    collar_width: f64,
    opts: &DegreeOptions,
) -> Result<SpotCheck, MorseError> {
    let chart = Chart::centered_at(&zero.unit);
    let nearest = all
        .iter()
        .filter(|z| z.boundary == zero.boundary && z.unit != zero.unit)
        .filter_map(|z| chart.coords_of(&z.unit))
        .map(|y| norm(&y))
        .fold(f64::INFINITY, f64::min);
    let radius = 0.3f64.min(0.4 * nearest);
    let doubled = doubled_collar_field(scenario, zero.boundary, &zero.unit, collar_width);
    let precondition = value_preconditioner(scenario, zero, collar_width);
    let field = FnField::new(scenario.dim, scenario.dim, |x: &[f64]| {
        let v = DVector::from_vec(doubled.eval_unchecked(x));
        (&precondition * v).iter().copied().collect()
    });
    let origin = vec![0.0; scenario.dim];
    let measured = index_at(&field, &origin, radius, opts)?.index;
    Ok(SpotCheck {
        point: zero.point.clone(),
        flow: zero.flow,
        tangential_index: zero.index,
        predicted: signed_contribution(zero.flow, zero.index),
        measured,
        radius,
    })
}

/// A constant map `L` with `det L > 0` applied to the values of the doubled
/// field. `L ∘ F` is joined to `F` through GL⁺ without creating zeros, so
/// the index is unchanged; `L` only undoes the anisotropy of the tangential
/// linearization and balances the normal part, which the PL engine would
/// otherwise need meshes beyond the level cap to resolve.
fn value_preconditioner(scenario: &MorseScenario, zero: &BoundaryZero, collar_width: f64) -> DMatrix<f64> {
    let d = scenario.dim;
    let k = d - 1;
    let mut l = DMatrix::identity(d, d);
    let tangential = tangential_chart_field(scenario, zero.boundary, &zero.unit);
    let jac = central_differences(&tangential, &vec![0.0; k]);
    let jt = DMatrix::from_fn(k, k, |i, j| jac[i][j]);
    if let Some(inv) = jt.clone().try_inverse() {
        let mut block = inv;
        if jt.determinant() < 0.0 {
            block.row_mut(0).neg_mut();
        }
        l.view_mut((0, 0), (k, k)).copy_from(&block);
    }
    let chart = Chart::centered_at(&zero.unit);
    let (_, normal) = collar_split(
        &scenario.field,
        &scenario.boundaries[zero.boundary],
        &chart,
        collar_width,
        &vec![0.0; k],
        0.0,
    );
    if normal != 0.0 {
        l[(k, k)] = 1.0 / normal.abs();
    }
    l
}

fn interior_indices(scenario: &MorseScenario, opts: &DegreeOptions) -> Result<Vec<(Vec<f64>, i64)>, MorseError> {
    scenario
        .zeros
        .iter()
        .map(|z| {
            let r = index_at(&scenario.field, z, zero_radius(scenario, z), opts)?;
            Ok((z.clone(), r.index))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorZero {
    pub point: Vec<f64>,
    pub index: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub ind_v: i64,
    pub interior_zeros: Vec<InteriorZero>,
    pub boundary_zeros: Vec<BoundaryZero>,
    pub normal_components: Vec<NormalComponent>,
    pub ind_dminus_v: i64,
    pub chi_m: i64,
    pub chi_boundary: i64,
    pub formula_holds: bool,
    pub doubling_check: Option<DoublingReport>,
    pub screening: Screening,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseOptions {
    pub degree: DegreeOptions,
    /// `None` uses [`default_collar_width`].
    pub collar_width: Option<f64>,
    pub doubling: bool,
}

impl Default for MorseOptions {
    fn default() -> Self {
        Self { degree: DegreeOptions::default(), collar_width: None, doubling: true }
    }
}

/// `Ind(V) + Ind(∂₋V)` against `χ(M)`, plus the doubling identity.
pub fn morse_check(scenario: &MorseScenario, opts: &MorseOptions) -> Result<MorseReport, MorseError> {
    let screening = scenario.validate()?;
    let interior = interior_indices(scenario, &opts.degree)?;
    let boundary = boundary_indices(scenario, &opts.degree)?;
    let ind_v: i64 = interior.iter().map(|(_, i)| i).sum();
    let ind_dminus_v: i64 = boundary.zeros.iter().filter(|z| z.flow == Flow::Inward).map(|z| z.index).sum();
    let doubling_check = if opts.doubling {
        let width = opts.collar_width.unwrap_or_else(|| default_collar_width(scenario));
        Some(doubling_from_parts(scenario, width, &interior, &boundary, &opts.degree)?)
    } else {
        None
    };
    Ok(MorseReport {
        scenario: scenario.name.clone(),
        ind_v,
        interior_zeros: interior.into_iter().map(|(point, index)| InteriorZero { point, index }).collect(),
        boundary_zeros: boundary.zeros,
        normal_components: boundary.normal_components,
        ind_dminus_v,
        chi_m: scenario.chi_m,
        chi_boundary: scenario.chi_boundary,
        formula_holds: ind_v + ind_dminus_v == scenario.chi_m,
        doubling_check,
        screening,
    })
}

const BUNDLED: [(&str, &str); 8] = [
    ("disk_source", include_str!("../scenarios/disk_source.json")),
    ("disk_saddle", include_str!("../scenarios/disk_saddle.json")),
    ("disk_constant", include_str!("../scenarios/disk_constant.json")),
    ("disk_power2", include_str!("../scenarios/disk_power2.json")),
    ("annulus_constant", include_str!("../scenarios/annulus_constant.json")),
    ("ball_source", include_str!("../scenarios/ball_source.json")),
    ("ball_constant", include_str!("../scenarios/ball_constant.json")),
    ("ball_saddle", include_str!("../scenarios/ball_saddle.json")),
];

/// The eight scenarios shipped with the crate.
pub fn bundled_scenarios() -> Vec<MorseScenario> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            let mut s = MorseScenario::from_json(text).expect("bundled scenario parses");
            s.name.get_or_insert_with(|| name.to_string());
            s
        })
        .collect()
}

pub fn bundled_scenario(name: &str) -> Option<MorseScenario> {
    bundled_scenarios().into_iter().find(|s| s.name.as_deref() == Some(name))
}
