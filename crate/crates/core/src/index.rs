//! Indices of isolated zeros and the suspension sign relation.
//!
//! The index of a zero `z` is the degree of `V/‖V‖` on a small sphere around
//! `z`. Appending `±x_{n+1}` to a field on Rⁿ multiplies the index by ±1;
//! [`check_lemma21`] measures both sides of that relation independently.

use serde::Serialize;
use thiserror::Error;

use crate::degree::{degree, DegreeError, DegreeOptions, DegreeReport, SphereMap};
use crate::fields::{norm, Interpolated, PolyField, Sign, VectorField};
use crate::mesh::{cached_mesh, MeshError};

pub const DEFAULT_RADIUS: f64 = 0.5;
/// Largest field norm accepted at a declared zero.
pub const ZERO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexError {
    #[error("declared zero {point:?} has field norm {norm:e}")]
    NotAZero { point: Vec<f64>, norm: f64 },
    #[error("field nearly vanishes at {witness:?} (norm {norm:e}) on the test sphere; shrink the radius")]
    VanishesOnSphere { witness: Vec<f64>, norm: f64 },
    #[error("radius must be positive and finite, got {radius}")]
    InvalidRadius { radius: f64 },
    #[error("invalid input: {message}")]
    Invalid { message: String },
    #[error("{source}")]
    Degree { source: DegreeError },
}

impl IndexError {
    fn invalid(message: impl Into<String>) -> Self {
        IndexError::Invalid { message: message.into() }
    }

    pub fn is_cross_check_failure(&self) -> bool {
        matches!(self, IndexError::Degree { source: e } if e.is_cross_check_failure())
    }
}

impl From<DegreeError> for IndexError {
    fn from(e: DegreeError) -> Self {
        match e {
            DegreeError::MinNorm { point, norm, .. } => IndexError::VanishesOnSphere { witness: point, norm },
            source => IndexError::Degree { source },
        }
    }
}

impl From<MeshError> for IndexError {
    fn from(e: MeshError) -> Self {
        IndexError::Degree { source: e.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub zero: Vec<f64>,
    pub radius: f64,
    pub index: i64,
    pub degree_report: DegreeReport,
}

/// Index of `field` at the isolated zero `zero`, measured on the sphere of
/// the given radius. The radius is never shrunk automatically.
pub fn index_at(
    field: &dyn VectorField,
    zero: &[f64],
    radius: f64,
    opts: &DegreeOptions,
) -> Result<IndexReport, IndexError> {
    local_degree(field, zero, radius, opts, true)
}

/// Degree of the normalized field on the sphere around `point`. Without
/// `require_zero` a regular point is allowed and yields 0.
fn local_degree(
    field: &dyn VectorField,
    zero: &[f64],
    radius: f64,
    opts: &DegreeOptions,
    require_zero: bool,
) -> Result<IndexReport, IndexError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(IndexError::InvalidRadius { radius });
    }
    if zero.len() != field.dim_in() {
        return Err(IndexError::invalid(format!(
            "zero has {} coordinates, field lives on R^{}",
            zero.len(),
            field.dim_in()
        )));
    }
    let at_zero = norm(&field.eval_unchecked(zero));
    if require_zero && !(at_zero < ZERO_TOLERANCE) {
        return Err(IndexError::NotAZero { point: zero.to_vec(), norm: at_zero });
    }
    let map = SphereMap::new(field, zero, radius)?;
    let report = degree(&map, opts)?;
    Ok(IndexReport {
        zero: zero.to_vec(),
        radius,
        index: report.degree,
        degree_report: report,
    })
}

/// Smallest `‖(1 − t)V(x) + tW(x)‖` over a sphere mesh and a uniform t-grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyReport {
    pub min_norm: f64,
    pub witness_point: Vec<f64>,
    pub witness_t: f64,
    pub radius: f64,
    pub grid: usize,
    pub mesh_level: u32,
}

/// Scans the straight-line homotopy between `v` and `w` over the vertices
/// of the level-`mesh_level` sphere of `radius` around `center` and
/// `t ∈ {0, 1/grid, …, 1}`.
pub fn verify_homotopy_nonvanishing(
    v: &dyn VectorField,
    w: &dyn VectorField,
    center: &[f64],
    radius: f64,
    grid: usize,
    mesh_level: u32,
) -> Result<HomotopyReport, IndexError> {
    let d = v.dim_in();
    if w.dim_in() != d || v.dim_out() != w.dim_out() || center.len() != d {
        return Err(IndexError::invalid("fields and center must share one dimension"));
    }
    if grid == 0 {
        return Err(IndexError::invalid("grid must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(IndexError::InvalidRadius { radius });
    }
    let mesh = cached_mesh(d - 1, mesh_level)?;
    let mut best = HomotopyReport {
        min_norm: f64::INFINITY,
        witness_point: Vec::new(),
        witness_t: 0.0,
        radius,
        grid,
        mesh_level,
    };
    for unit in mesh.vertices() {
        let x: Vec<f64> = center.iter().zip(unit).map(|(c, u)| c + radius * u).collect();
        let a = v.eval_unchecked(&x);
        let b = w.eval_unchecked(&x);
        for step in 0..=grid {
            let t = step as f64 / grid as f64;
            let len = a
                .iter()
                .zip(&b)
                .map(|(p, q)| {
                    let c = (1.0 - t) * p + t * q;
                    c * c
                })
                .sum::<f64>()
                .sqrt();
            if len < best.min_norm {
                best.min_norm = len;
                best.witness_point = x.clone();
                best.witness_t = t;
            }
        }
    }
    Ok(best)
}

/// Degrees of `(1 − t)V + tW` at `t ∈ {0, ¼, ½, ¾, 1}`, skipping values of
/// `t` where the interpolated field nearly vanishes on the sphere.
pub fn homotopy_degrees(
    v: &dyn VectorField,
    w: &dyn VectorField,
    center: &[f64],
    radius: f64,
    opts: &DegreeOptions,
) -> Result<Vec<(f64, Option<i64>)>, IndexError> {
    let mut out = Vec::new();
    for step in 0..=4 {
        let t = step as f64 / 4.0;
        let mid = Interpolated { from: v, to: w, t };
        let map = SphereMap::new(&mid, center, radius)?;
        match degree(&map, opts) {
            Ok(r) => out.push((t, Some(r.degree))),
            Err(DegreeError::MinNorm { .. }) => out.push((t, None)),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma21Report {
    pub base_index: i64,
    pub suspended_index: i64,
    pub sign: i64,
    pub relation_holds: bool,
    /// Whether `x_{n+1}·W_{n+1}(x)` had the sign of `sign` at every scanned
    /// point with `x_{n+1} ≠ 0`. A grid observation, not a proof.
    pub hypothesis_scan_holds: bool,
    pub base: IndexReport,
    pub suspended: IndexReport,
}

/// Computes `ind(V̄, 0)` for `base` on Rⁿ and `ind(W, 0)` for its
/// suspension `W = (V̄, sign·x_{n+1})` and compares `W`'s index with
/// `sign · ind(V̄, 0)`. A base that does not vanish at the origin has
/// local degree 0 on both sides.
pub fn check_lemma21(
    base: &PolyField,
    sign: Sign,
    radius: f64,
    opts: &DegreeOptions,
) -> Result<Lemma21Report, IndexError> {
    let n = base.dim();
    let base_report = local_degree(base, &vec![0.0; n], radius, opts, false)?;
    let suspended_field = base.suspend(sign);
    let suspended_report = local_degree(&suspended_field, &vec![0.0; n + 1], radius, opts, false)?;
    let hypothesis_scan_holds = normal_sign_scan(&suspended_field, radius, 3)? == Some(sign);
    Ok(Lemma21Report {
        base_index: base_report.index,
        suspended_index: suspended_report.index,
        sign: sign.as_i64(),
        relation_holds: suspended_report.index == sign.as_i64() * base_report.index,
        hypothesis_scan_holds,
        base: base_report,
        suspended: suspended_report,
    })
}

/// Common sign of `x_last · V_last(x)` over the sphere-mesh vertices with
/// `x_last ≠ 0`, or `None` if both signs (or a zero) occur.
pub fn normal_sign_scan(field: &dyn VectorField, radius: f64, mesh_level: u32) -> Result<Option<Sign>, IndexError> {
    let d = field.dim_in();
    let mesh = cached_mesh(d - 1, mesh_level)?;
    let mut seen_pos = false;
    let mut seen_neg = false;
    for unit in mesh.vertices() {
        let x: Vec<f64> = unit.iter().map(|u| radius * u).collect();
        let last = x[d - 1];
        if last == 0.0 {
            continue;
        }
        let product = last * field.eval_unchecked(&x)[d - 1];
        if product > 0.0 {
            seen_pos = true;
        } else if product < 0.0 {
            seen_neg = true;
        } else {
            return Ok(None);
        }
    }
    Ok(match (seen_pos, seen_neg) {
        (true, false) => Some(Sign::Plus),
        (false, true) => Some(Sign::Minus),
        _ => None,
    })
}
