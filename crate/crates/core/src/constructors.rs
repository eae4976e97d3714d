//! Explicit sphere maps of every degree.
//!
//! `P_m + iQ_m = (x₁ + ix₂)^m` gives a planar field whose normalization has
//! degree `m` on S¹. For n ≥ 2 the field
//! `(±x₁, x₂, …, x_{n−1}, P_m(x_n, x_{n+1}), Q_m(x_n, x_{n+1}))` realizes
//! degree `±m` on Sⁿ; on S¹ negative degrees use the conjugate power
//! `(P_m, −Q_m)`.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::degree::{degree, DegreeError, DegreeOptions, Method, SphereMap};
use crate::fields::{Monomial, PolyField, Sign, VectorField};
use crate::index::{check_lemma21, IndexError, Lemma21Report};
use crate::mesh::cached_mesh;

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructError {
    #[error("n must be at least 1")]
    InvalidDimension,
    #[error("degree table only covers n <= 3, got n_max = {n_max}")]
    TableTooLarge { n_max: usize },
    #[error("empty degree range {m_min}..={m_max}")]
    EmptyRange { m_min: i64, m_max: i64 },
    #[error("alpha_{n}^{m} computed degree {computed}")]
    DegreeMismatch { n: usize, m: i64, computed: i64 },
    #[error("alpha_{n}^{m}: {source}")]
    Degree { n: usize, m: i64, source: DegreeError },
    #[error("{source}")]
    Index { source: IndexError },
}

impl ConstructError {
    pub fn is_cross_check_failure(&self) -> bool {
        match self {
            ConstructError::DegreeMismatch { .. } => true,
            ConstructError::Degree { source, .. } => source.is_cross_check_failure(),
            ConstructError::Index { source: e } => e.is_cross_check_failure(),
            _ => false,
        }
    }
}

fn binomial(m: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// `(P_m, Q_m)` on R², the real and imaginary parts of `(x₁ + ix₂)^m`,
/// expanded binomially. `m = 0` gives the constant field `(1, 0)`.
pub fn power_pair(m: u32) -> PolyField {
    let mut p = Vec::new();
    let mut q = Vec::new();
    for k in 0..=m {
        // i^k cycles through 1, i, -1, -i
        let c = binomial(m, k);
        let term = Monomial::new(0.0, vec![m - k, k]);
        match k % 4 {
            0 => p.push(Monomial { coeff: c, ..term }),
            1 => q.push(Monomial { coeff: c, ..term }),
            2 => p.push(Monomial { coeff: -c, ..term }),
            _ => q.push(Monomial { coeff: -c, ..term }),
        }
    }
    PolyField::new(2, vec![p, q]).expect("power pair is well formed")
}

/// The field realizing `α_n^m` together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSpec {
    pub n: usize,
    pub m: i64,
    pub field: PolyField,
}

impl AlphaSpec {
    /// Minimum of `‖V̄_m‖` over the vertices of the unit-sphere mesh.
    pub fn min_norm_on_sphere(&self, level: u32) -> f64 {
        let mesh = cached_mesh(self.n, level).expect("n checked at construction");
        mesh.vertices()
            .map(|x| crate::fields::norm(&self.field.eval_unchecked(x)))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn build_alpha(n: usize, m: i64) -> Result<AlphaSpec, ConstructError> {
    if n == 0 {
        return Err(ConstructError::InvalidDimension);
    }
    let pair = power_pair(m.unsigned_abs() as u32);
    let d = n + 1;
    let lift = |comp: &[Monomial]| -> Vec<Monomial> {
        comp.iter()
            .map(|t| {
                let mut e = vec![0; d];
                e[n - 1] = t.exponents[0];
                e[n] = t.exponents[1];
                Monomial::new(t.coeff, e)
            })
            .collect()
    };
    let mut components: Vec<Vec<Monomial>> = (0..n - 1)
        .map(|i| {
            let mut e = vec![0; d];
            e[i] = 1;
            vec![Monomial::new(1.0, e)]
        })
        .collect();
    components.push(lift(&pair.components()[0]));
    components.push(lift(&pair.components()[1]));
    if m < 0 {
        // negate x_1, or the imaginary part when there is no leading block
        let target = if n == 1 { 1 } else { 0 };
        components[target].iter_mut().for_each(|t| t.coeff = -t.coeff);
    }
    let field = PolyField::new(d, components).expect("alpha field is well formed");
    Ok(AlphaSpec { n, m, field })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeRow {
    pub n: usize,
    pub m: i64,
    pub degree: i64,
    pub method: String,
    pub mesh_level: u32,
}

/// Computes `deg α_n^m` for every `n ∈ 1..=n_max` and `m ∈ m_min..=m_max`.
/// Any row whose degree differs from `m` is a hard failure.
pub fn degree_table(
    n_max: usize,
    m_min: i64,
    m_max: i64,
    opts: &DegreeOptions,
) -> Result<Vec<DegreeRow>, ConstructError> {
    if n_max > 3 {
        return Err(ConstructError::TableTooLarge { n_max });
    }
    if n_max == 0 {
        return Err(ConstructError::InvalidDimension);
    }
    if m_min > m_max {
        return Err(ConstructError::EmptyRange { m_min, m_max });
    }
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for m in m_min..=m_max {
            rows.push(degree_row(n, m, opts)?);
        }
    }
    Ok(rows)
}

pub fn degree_row(n: usize, m: i64, opts: &DegreeOptions) -> Result<DegreeRow, ConstructError> {
    let alpha = build_alpha(n, m)?;
    let center = vec![0.0; n + 1];
    let map = SphereMap::new(&alpha.field, &center, 1.0).map_err(|source| ConstructError::Degree { n, m, source })?;
    let report = degree(&map, opts).map_err(|source| ConstructError::Degree { n, m, source })?;
    if report.degree != m {
        return Err(ConstructError::DegreeMismatch { n, m, computed: report.degree });
    }
    let methods: Vec<&str> = report
        .confirmations
        .iter()
        .map(|c| match c.method {
            Method::Winding => "winding",
            Method::Pl => "pl",
        })
        .collect();
    let mut method = methods.clone();
    method.dedup();
    Ok(DegreeRow {
        n,
        m,
        degree: report.degree,
        method: method.join("+"),
        mesh_level: report.mesh_level,
    })
}

/// CSV with header `n,m,degree,method,mesh_level`.
pub fn rows_to_csv(rows: &[DegreeRow]) -> String {
    let mut out = String::from("n,m,degree,method,mesh_level\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.n, r.m, r.degree, r.method, r.mesh_level);
    }
    out
}

/// Result of reading `α_n^m` as a suspension of `α_{n−1}^{|m|}` along the
/// first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuspensionConsistency {
    pub n: usize,
    pub m: i64,
    /// The coordinate-shifted field equals the suspension structurally.
    pub structural_match: bool,
    pub lemma: Lemma21Report,
}

/// Moves `x₁` to the last slot (a conjugation, which preserves indices) and
/// checks that `V̄_m` becomes `suspend(V̄'_{|m|}, sign m)` where `V̄'` is the
/// field one dimension down, then runs the suspension index check on it.
pub fn suspension_consistency(
    n: usize,
    m: i64,
    radius: f64,
    opts: &DegreeOptions,
) -> Result<SuspensionConsistency, ConstructError> {
    if n < 2 {
        return Err(ConstructError::InvalidDimension);
    }
    let alpha = build_alpha(n, m)?;
    let lower = build_alpha(n - 1, m.abs())?;
    let sign = if m < 0 { Sign::Minus } else { Sign::Plus };
    let shift: Vec<usize> = (1..=n).chain(std::iter::once(0)).collect();
    let shifted = alpha
        .field
        .permute_coordinates(&shift)
        .expect("shift is a permutation of the right length");
    let structural_match = shifted == lower.field.suspend(sign);
    let lemma = check_lemma21(&lower.field, sign, radius, opts).map_err(|source| ConstructError::Index { source })?;
    Ok(SuspensionConsistency { n, m, structural_match, lemma })
}
