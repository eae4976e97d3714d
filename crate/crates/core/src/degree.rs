//! Topological degree of `x ↦ V(c + r·x)/‖V(c + r·x)‖` on the unit sphere.
//!
//! Two independent routes are provided. [`winding_number`] accumulates
//! image angle increments around S¹. [`pl_degree`] evaluates the map on the
//! vertices of a [`TriangulatedSphere`], refines until every image simplex
//! fits in an open hemisphere, draws a random target `p` and sums
//! `sign det W` over the simplices whose image cone contains `p`.
//! [`degree`] runs both (or PL at two consecutive levels for n ≥ 2) and
//! refuses to answer when they disagree.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fields::{norm, VectorField};
use crate::mesh::{cached_mesh, chord, max_level, refine, MeshError, TriangulatedSphere};

pub const DEFAULT_MIN_NORM_FLOOR: f64 = 1e-10;
pub const DEFAULT_EPS_COVER: f64 = 1e-9;
pub const DEFAULT_MAX_RETRIES: u32 = 50;
pub const DEFAULT_DIAMETER_THRESHOLD: f64 = 0.5;

/// Image simplices with `|det W|` at or below this are treated as flat and
/// cannot cover a generic target.
const DEGENERATE_DET: f64 = 1e-14;

const WINDING_MAX_DOUBLINGS: u32 = 4;
const WINDING_RESIDUAL: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegreeError {
    #[error("field norm {norm:e} at {point:?} is below the floor {floor:e}")]
    MinNorm { point: Vec<f64>, norm: f64, floor: f64 },
    #[error("winding number did not converge: residual {residual} at {samples} samples")]
    NonConvergentWinding { residual: f64, samples: usize },
    #[error("image simplices still have chordal diameter {max_diameter} at the level cap {level}")]
    RefinementCap { level: u32, max_diameter: f64 },
    #[error("no generic target after {retries} retries; simplex {simplex} keeps a barycentric coordinate within eps of 0")]
    DegenerateTarget { retries: u32, simplex: usize },
    #[error("degree methods disagree: {first:?} vs {second:?}")]
    MethodDisagreement { first: Confirmation, second: Confirmation },
    #[error("field has dimension {field} but the sphere lives in R^{sphere}")]
    DimensionMismatch { field: usize, sphere: usize },
    #[error("sphere dimension {n} is not supported")]
    UnsupportedDimension { n: usize },
    #[error("invalid input: {message}")]
    InvalidInput { message: String },
}

impl DegreeError {
    fn input(message: String) -> Self {
        DegreeError::InvalidInput { message }
    }

    /// True for failures of an internal cross-check rather than bad input.
    pub fn is_cross_check_failure(&self) -> bool {
        matches!(self, DegreeError::MethodDisagreement { .. })
    }
}

impl From<MeshError> for DegreeError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::UnsupportedDimension(n) => DegreeError::UnsupportedDimension { n },
            MeshError::LevelCap { level, .. } => DegreeError::RefinementCap {
                level,
                max_diameter: f64::NAN,
            },
        }
    }
}

/// The normalized map of a field restricted to a round sphere.
#[derive(Clone, Copy)]
pub struct SphereMap<'a> {
    field: &'a dyn VectorField,
    center: &'a [f64],
    radius: f64,
    floor: f64,
}

impl<'a> SphereMap<'a> {
    pub fn new(field: &'a dyn VectorField, center: &'a [f64], radius: f64) -> Result<Self, DegreeError> {
        let d = field.dim_in();
        if field.dim_out() != d {
            return Err(DegreeError::input(format!(
                "field maps R^{d} to R^{}, not a vector field",
                field.dim_out()
            )));
        }
        if center.len() != d {
            return Err(DegreeError::DimensionMismatch { field: d, sphere: center.len() });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(DegreeError::input(format!("radius must be positive, got {radius}")));
        }
        if !(1..=3).contains(&(d.saturating_sub(1))) {
            return Err(DegreeError::UnsupportedDimension { n: d.saturating_sub(1) });
        }
        Ok(Self { field, center, radius, floor: DEFAULT_MIN_NORM_FLOOR })
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// Dimension of the sphere.
    pub fn n(&self) -> usize {
        self.field.dim_in() - 1
    }

    pub fn point(&self, unit: &[f64]) -> Vec<f64> {
        self.center.iter().zip(unit).map(|(c, u)| c + self.radius * u).collect()
    }

    /// Normalized image of a unit vector together with the raw field norm.
    pub fn image(&self, unit: &[f64]) -> Result<(Vec<f64>, f64), DegreeError> {
        let x = self.point(unit);
        let mut v = self.field.eval_unchecked(&x);
        let len = norm(&v);
        if !(len > self.floor) {
            return Err(DegreeError::MinNorm { point: x, norm: len, floor: self.floor });
        }
        v.iter_mut().for_each(|c| *c /= len);
        Ok((v, len))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Winding,
    Pl,
}

/// One independent evaluation of a degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Confirmation {
    pub method: Method,
    pub mesh_level: Option<u32>,
    pub samples: Option<usize>,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub method: Method,
    pub mesh_level: u32,
    pub target_retries: u32,
    pub min_image_norm: f64,
    pub seed: u64,
    pub target: Vec<f64>,
    pub max_image_diameter: f64,
    /// Independent runs that agreed with `degree`.
    pub confirmations: Vec<Confirmation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingOutcome {
    pub degree: i64,
    pub samples: usize,
    pub residual: f64,
    pub min_image_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeOptions {
    pub seed: u64,
    /// First mesh level tried by the PL route.
    pub start_level: u32,
    pub winding_samples: usize,
    pub eps_cover: f64,
    pub max_retries: u32,
    pub diameter_threshold: f64,
    pub min_norm_floor: f64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            start_level: 1,
            winding_samples: 64,
            eps_cover: DEFAULT_EPS_COVER,
            max_retries: DEFAULT_MAX_RETRIES,
            diameter_threshold: DEFAULT_DIAMETER_THRESHOLD,
            min_norm_floor: DEFAULT_MIN_NORM_FLOOR,
        }
    }
}

impl DegreeOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Degree of a circle map by angle accumulation at `samples` uniform
/// angles, doubling the density (at most four times) whenever an increment
/// reaches π/2 or the total is not within 0.05 of an integer.
pub fn winding_number(map: &SphereMap<'_>, samples: usize) -> Result<WindingOutcome, DegreeError> {
    if map.n() != 1 {
        return Err(DegreeError::input(format!(
            "winding number needs a circle map, got S^{}",
            map.n()
        )));
    }
    if samples < 16 {
        return Err(DegreeError::input(format!("need at least 16 samples, got {samples}")));
    }
    let mut residual = f64::NAN;
    let mut count = samples;
    for _ in 0..=WINDING_MAX_DOUBLINGS {
        let images = (0..count)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / count as f64;
                map.image(&[theta.cos(), theta.sin()])
            })
            .collect::<Result<Vec<_>, _>>()?;
        let min_image_norm = images.iter().map(|(_, n)| *n).fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        let mut resolved = true;
        for k in 0..count {
            let (a, _) = &images[k];
            let (b, _) = &images[(k + 1) % count];
            let step = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
            if step.abs() >= PI / 2.0 {
                resolved = false;
                break;
            }
            total += step;
        }
        if resolved {
            let turns = total / (2.0 * PI);
            let degree = turns.round();
            residual = (turns - degree).abs();
            if residual < WINDING_RESIDUAL {
                return Ok(WindingOutcome {
                    degree: degree as i64,
                    samples: count,
                    residual,
                    min_image_norm,
                });
            }
        }
        count *= 2;
    }
    Err(DegreeError::NonConvergentWinding { residual, samples: count / 2 })
}

enum Cover {
    Miss,
    Hit(i64),
    Boundary,
}

macro_rules! cover_fixed {
    ($name:ident, $k:literal) => {
        fn $name(images: &[f64], cell: &[usize], target: &[f64], eps: f64) -> Cover {
            // columns are the image vertices, i.e. the transpose of the row matrix
            let m = SMatrix::<f64, $k, $k>::from_fn(|i, j| images[cell[j] * $k + i]);
            let det = m.determinant();
            if det.abs() <= DEGENERATE_DET {
                return Cover::Miss;
            }
            let p = SVector::<f64, $k>::from_column_slice(target);
            let Some(lambda) = m.lu().solve(&p) else {
                return Cover::Miss;
            };
            if lambda.iter().any(|l| l.abs() <= eps) {
                Cover::Boundary
            } else if lambda.iter().all(|&l| l > eps) {
                Cover::Hit(if det > 0.0 { 1 } else { -1 })
            } else {
                Cover::Miss
            }
        }
    };
}

cover_fixed!(cover2, 2);
cover_fixed!(cover3, 3);
cover_fixed!(cover4, 4);

fn cover(k: usize, images: &[f64], cell: &[usize], target: &[f64], eps: f64) -> Cover {
    match k {
        2 => cover2(images, cell, target, eps),
        3 => cover3(images, cell, target, eps),
        4 => cover4(images, cell, target, eps),
        _ => unreachable!("sphere dimension checked at construction"),
    }
}

/// Count of target preimages, or the lowest simplex index sitting on the
/// target's boundary.
fn count_coverage(mesh: &TriangulatedSphere, images: &[f64], target: &[f64], eps: f64) -> Result<i64, usize> {
    let k = mesh.ambient_dim();
    (0..mesh.simplex_count())
        .into_par_iter()
        .map(|s| match cover(k, images, mesh.simplex(s), target, eps) {
            Cover::Miss => Ok(0),
            Cover::Hit(sign) => Ok(sign),
            Cover::Boundary => Err(s),
        })
        .reduce(
            || Ok(0),
            |a, b| match (a, b) {
                (Ok(x), Ok(y)) => Ok(x + y),
                (Err(i), Err(j)) => Err(i.min(j)),
                (Err(i), _) | (_, Err(i)) => Err(i),
            },
        )
}

struct Sampled {
    images: Vec<f64>,
    min_norm: f64,
    max_diameter: f64,
}

fn sample(map: &SphereMap<'_>, mesh: &TriangulatedSphere) -> Result<Sampled, DegreeError> {
    let k = mesh.ambient_dim();
    let evaluated: Vec<Result<(Vec<f64>, f64), DegreeError>> =
        (0..mesh.vertex_count()).into_par_iter().map(|i| map.image(mesh.vertex(i))).collect();
    let mut images = Vec::with_capacity(k * evaluated.len());
    let mut min_norm = f64::INFINITY;
    for r in evaluated {
        let (img, len) = r?;
        images.extend(img);
        min_norm = min_norm.min(len);
    }
    let max_diameter = (0..mesh.simplex_count())
        .into_par_iter()
        .map(|s| {
            let cell = mesh.simplex(s);
            let mut d = 0.0f64;
            for a in 0..cell.len() {
                for b in a + 1..cell.len() {
                    let (u, v) = (cell[a] * k, cell[b] * k);
                    d = d.max(chord(&images[u..u + k], &images[v..v + k]));
                }
            }
            d
        })
        .reduce(|| 0.0, f64::max);
    Ok(Sampled { images, min_norm, max_diameter })
}

fn random_target(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let len = norm(&v);
        if len > 1e-6 {
            return v.into_iter().map(|c| c / len).collect();
        }
    }
}

fn pl_degree_with<F>(
    map: &SphereMap<'_>,
    mut mesh: Arc<TriangulatedSphere>,
    opts: &DegreeOptions,
    next: F,
) -> Result<DegreeReport, DegreeError>
where
    F: Fn(&TriangulatedSphere) -> Result<Arc<TriangulatedSphere>, DegreeError>,
{
    let n = map.n();
    if mesh.n() != n {
        return Err(DegreeError::DimensionMismatch { field: n + 1, sphere: mesh.ambient_dim() });
    }
    let map = map.with_floor(opts.min_norm_floor);
    let sampled = loop {
        let s = sample(&map, &mesh)?;
        if s.max_diameter < opts.diameter_threshold {
            break s;
        }
        if mesh.level() >= max_level(n) {
            return Err(DegreeError::RefinementCap { level: mesh.level(), max_diameter: s.max_diameter });
        }
        mesh = next(&mesh)?;
    };

    let k = n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last_boundary = 0;
    for retry in 0..=opts.max_retries {
        let target = random_target(&mut rng, k);
        match count_coverage(&mesh, &sampled.images, &target, opts.eps_cover) {
            Ok(degree) => {
                return Ok(DegreeReport {
                    degree,
                    method: Method::Pl,
                    mesh_level: mesh.level(),
                    target_retries: retry,
                    min_image_norm: sampled.min_norm,
                    seed: opts.seed,
                    target,
                    max_image_diameter: sampled.max_diameter,
                    confirmations: Vec::new(),
                })
            }
            Err(simplex) => last_boundary = simplex,
        }
    }
    Err(DegreeError::DegenerateTarget { retries: opts.max_retries, simplex: last_boundary })
}

/// PL signed-coverage degree starting from `mesh`; finer levels come from
/// [`refine`] when the hemisphere condition fails.
pub fn pl_degree(map: &SphereMap<'_>, mesh: &TriangulatedSphere, seed: u64) -> Result<DegreeReport, DegreeError> {
    let opts = DegreeOptions::with_seed(seed);
    pl_degree_opts(map, mesh, &opts)
}

pub fn pl_degree_opts(
    map: &SphereMap<'_>,
    mesh: &TriangulatedSphere,
    opts: &DegreeOptions,
) -> Result<DegreeReport, DegreeError> {
    pl_degree_with(map, Arc::new(mesh.clone()), opts, |m| Ok(Arc::new(refine(m)?)))
}

/// PL degree on the shared standard meshes, starting at `level`.
pub fn pl_degree_at_level(map: &SphereMap<'_>, level: u32, opts: &DegreeOptions) -> Result<DegreeReport, DegreeError> {
    let n = map.n();
    let mesh = cached_mesh(n, level)?;
    pl_degree_with(map, mesh, opts, |m| Ok(cached_mesh(n, m.level() + 1)?))
}

/// Cross-checked degree: winding vs PL on S¹, PL at two consecutive mesh
/// levels on S² and S³.
pub fn degree(map: &SphereMap<'_>, opts: &DegreeOptions) -> Result<DegreeReport, DegreeError> {
    let n = map.n();
    let mut report = pl_degree_at_level(map, opts.start_level, opts)?;
    let primary = Confirmation {
        method: Method::Pl,
        mesh_level: Some(report.mesh_level),
        samples: None,
        degree: report.degree,
    };
    let second = if n == 1 {
        let w = winding_number(&map.with_floor(opts.min_norm_floor), opts.winding_samples)?;
        Confirmation { method: Method::Winding, mesh_level: None, samples: Some(w.samples), degree: w.degree }
    } else {
        let level = report.mesh_level + 1;
        if level > max_level(n) {
            return Err(DegreeError::RefinementCap { level, max_diameter: report.max_image_diameter });
        }
        let finer = pl_degree_at_level(map, level, opts)?;
        Confirmation { method: Method::Pl, mesh_level: Some(finer.mesh_level), samples: None, degree: finer.degree }
    };
    if second.degree != primary.degree {
        return Err(DegreeError::MethodDisagreement { first: primary, second });
    }
    report.confirmations = vec![primary, second];
    Ok(report)
}
