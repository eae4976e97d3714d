//! Polynomial vector fields on R^d.
//!
//! A [`PolyField`] stores each output component as a normalized list of
//! [`Monomial`]s, so evaluation and Jacobians are exact up to floating-point
//! rounding and structural equality is well defined. Arbitrary evaluable
//! mappings implement [`VectorField`] and get finite-difference Jacobians.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("monomial {monomial} in component {component} has zero exponent in the last variable, so the hyperplane is not invariant")]
    NonInvariantHyperplane { component: usize, monomial: Monomial },
    #[error("invalid field: {0}")]
    Invalid(String),
}

/// Anything that maps points of R^d to vectors. Implementations must be pure.
pub trait VectorField: Send + Sync {
    fn dim_in(&self) -> usize;

    fn dim_out(&self) -> usize;

    /// Evaluates without a dimension check; `x.len()` must equal `dim_in()`.
    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64>;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, FieldError> {
        check_dim(self.dim_in(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    /// Row-major `dim_out × dim_in` Jacobian. The default uses central
    /// differences with a step scaled to the magnitude of each coordinate.
    fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, FieldError> {
        check_dim(self.dim_in(), x.len())?;
        Ok(central_differences(self, x))
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), FieldError> {
    if expected == got {
        Ok(())
    } else {
        Err(FieldError::DimensionMismatch { expected, got })
    }
}

pub fn central_differences<F: VectorField + ?Sized>(field: &F, x: &[f64]) -> Vec<Vec<f64>> {
    let d = field.dim_in();
    let mut jac = vec![vec![0.0; d]; field.dim_out()];
    let mut probe = x.to_vec();
    for j in 0..d {
        let h = 1e-6 * (1.0 + x[j].abs());
        probe[j] = x[j] + h;
        let plus = field.eval_unchecked(&probe);
        probe[j] = x[j] - h;
        let minus = field.eval_unchecked(&probe);
        probe[j] = x[j];
        for (i, row) in jac.iter_mut().enumerate() {
            row[j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    jac
}

/// `coeff · ∏ x_j^{exponents[j]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(rename = "c")]
    pub coeff: f64,
    #[serde(rename = "e")]
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: f64, exponents: Vec<u32>) -> Self {
        Self { coeff, exponents }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .fold(self.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        for (j, &e) in self.exponents.iter().enumerate() {
            match e {
                0 => {}
                1 => write!(f, "*x{}", j + 1)?,
                _ => write!(f, "*x{}^{}", j + 1, e)?,
            }
        }
        Ok(())
    }
}

/// Merges equal exponent vectors, drops zero coefficients and sorts the
/// exponent vectors lexicographically.
fn normalize(mut terms: Vec<Monomial>) -> Vec<Monomial> {
    terms.sort_by(|a, b| a.exponents.cmp(&b.exponents));
    let mut out: Vec<Monomial> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if last.exponents == t.exponents => last.coeff += t.coeff,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out
}

fn eval_poly(terms: &[Monomial], x: &[f64]) -> f64 {
    terms.iter().map(|t| t.eval(x)).sum()
}

fn diff_poly(terms: &[Monomial], var: usize, x: &[f64]) -> f64 {
    terms
        .iter()
        .filter(|t| t.exponents[var] > 0)
        .map(|t| {
            let e = t.exponents[var];
            t.exponents
                .iter()
                .zip(x)
                .enumerate()
                .fold(t.coeff * e as f64, |acc, (j, (&ej, &xj))| {
                    let p = if j == var { ej - 1 } else { ej };
                    acc * xj.powi(p as i32)
                })
        })
        .sum()
}

/// A vector field whose components are multivariate polynomials in
/// `dim` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField {
    dim: usize,
    components: Vec<Vec<Monomial>>,
}

impl PolyField {
    /// Builds a field from raw components, validating exponent lengths and
    /// normalizing every component.
    pub fn new(dim: usize, components: Vec<Vec<Monomial>>) -> Result<Self, FieldError> {
        if dim == 0 {
            return Err(FieldError::Invalid("dimension must be at least 1".into()));
        }
        for (i, comp) in components.iter().enumerate() {
            for m in comp {
                if m.exponents.len() != dim {
                    return Err(FieldError::Invalid(format!(
                        "component {i}: monomial {m} has {} exponents, expected {dim}",
                        m.exponents.len()
                    )));
                }
                if !m.coeff.is_finite() {
                    return Err(FieldError::Invalid(format!(
                        "component {i}: non-finite coefficient"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            components: components.into_iter().map(normalize).collect(),
        })
    }

    /// The identity field `x ↦ x`.
    pub fn identity(dim: usize) -> Self {
        Self::linear(&identity_rows(dim)).expect("square identity")
    }

    /// `x ↦ A·x` for a square matrix given as rows.
    pub fn linear(rows: &[Vec<f64>]) -> Result<Self, FieldError> {
        let dim = rows.len();
        let components = rows
            .iter()
            .map(|row| {
                check_dim(dim, row.len())?;
                Ok(row
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| Monomial::new(a, unit_exponent(dim, j)))
                    .collect())
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Self::new(dim, components)
    }

    /// A field whose components are constants.
    pub fn constant(value: &[f64]) -> Self {
        let dim = value.len();
        let components = value
            .iter()
            .map(|&c| vec![Monomial::new(c, vec![0; dim])])
            .collect();
        Self::new(dim, components).expect("constant field")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Vec<Monomial>] {
        &self.components
    }

    pub fn max_degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .map(Monomial::total_degree)
            .max()
            .unwrap_or(0)
    }

    /// Scales component `i` by `factor`.
    pub fn scale_component(&self, i: usize, factor: f64) -> Self {
        let mut components = self.components.clone();
        for m in &mut components[i] {
            m.coeff *= factor;
        }
        Self::new(self.dim, components).expect("scaling preserves validity")
    }

    /// Appends `sign · x_{n+1}` as a new last component; the existing
    /// components are lifted unchanged and ignore the new variable.
    pub fn suspend(&self, sign: Sign) -> Self {
        let dim = self.dim + 1;
        let mut components: Vec<Vec<Monomial>> = self
            .components
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|m| {
                        let mut e = m.exponents.clone();
                        e.push(0);
                        Monomial::new(m.coeff, e)
                    })
                    .collect()
            })
            .collect();
        components.push(vec![Monomial::new(sign.value(), unit_exponent(dim, dim - 1))]);
        Self::new(dim, components).expect("suspension preserves validity")
    }

    /// Restricts to the hyperplane `x_{n+1} = 0`. The last component must
    /// vanish identically there: every one of its monomials needs a positive
    /// exponent in the last variable.
    pub fn restrict(&self) -> Result<Self, FieldError> {
        if self.dim < 2 || self.components.len() != self.dim {
            return Err(FieldError::Invalid(
                "restriction needs a vector field on R^{n+1} with n >= 1".into(),
            ));
        }
        let last = self.dim - 1;
        if let Some(m) = self.components[last].iter().find(|m| m.exponents[last] == 0) {
            return Err(FieldError::NonInvariantHyperplane {
                component: last,
                monomial: m.clone(),
            });
        }
        let components = self.components[..last]
            .iter()
            .map(|comp| {
                comp.iter()
                    .filter(|m| m.exponents[last] == 0)
                    .map(|m| Monomial::new(m.coeff, m.exponents[..last].to_vec()))
                    .collect()
            })
            .collect();
        Self::new(last, components)
    }

    /// Conjugates by a coordinate permutation: with `y_i = x_{perm[i]}`,
    /// returns `G(y) = P·F(P⁻¹y)`. Conjugation preserves indices of zeros.
    pub fn permute_coordinates(&self, perm: &[usize]) -> Result<Self, FieldError> {
        check_dim(self.dim, perm.len())?;
        check_dim(self.dim, self.components.len())?;
        let mut seen = vec![false; self.dim];
        for &p in perm {
            if p >= self.dim || seen[p] {
                return Err(FieldError::Invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let components = perm
            .iter()
            .map(|&src| {
                self.components[src]
                    .iter()
                    .map(|m| Monomial::new(m.coeff, perm.iter().map(|&p| m.exponents[p]).collect()))
                    .collect()
            })
            .collect();
        Self::new(self.dim, components)
    }

    pub fn from_json(text: &str) -> Result<Self, FieldError> {
        let file: FieldFile =
            serde_json::from_str(text).map_err(|e| FieldError::Invalid(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FieldFile::from(self)).expect("field serializes")
    }
}

impl VectorField for PolyField {
    fn dim_in(&self) -> usize {
        self.dim
    }

    fn dim_out(&self) -> usize {
        self.components.len()
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| eval_poly(c, x)).collect()
    }

    fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, FieldError> {
        check_dim(self.dim, x.len())?;
        Ok(self
            .components
            .iter()
            .map(|c| (0..self.dim).map(|j| diff_poly(c, j, x)).collect())
            .collect())
    }
}

/// JSON interchange form: `{ "dim": d, "components": [[{"c": .., "e": [..]}, ..], ..] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldFile {
    pub dim: usize,
    pub components: Vec<Vec<Monomial>>,
}

impl From<&PolyField> for FieldFile {
    fn from(f: &PolyField) -> Self {
        Self {
            dim: f.dim,
            components: f.components.clone(),
        }
    }
}

impl TryFrom<FieldFile> for PolyField {
    type Error = FieldError;

    fn try_from(file: FieldFile) -> Result<Self, FieldError> {
        PolyField::new(file.dim, file.components)
    }
}

impl Serialize for PolyField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FieldFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        FieldFile::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

/// Orientation of the appended coordinate in a suspension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i64> for Sign {
    type Error = FieldError;

    fn try_from(v: i64) -> Result<Self, FieldError> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(FieldError::Invalid(format!("sign must be +1 or -1, got {v}"))),
        }
    }
}

/// Wraps a closure as an opaque [`VectorField`].
pub struct FnField<F> {
    dim_in: usize,
    dim_out: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim_in: usize, dim_out: usize, f: F) -> Self {
        Self { dim_in, dim_out, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

/// Straight-line interpolation `(1 − t)·V + t·W` of two fields.
pub struct Interpolated<'a> {
    pub from: &'a dyn VectorField,
    pub to: &'a dyn VectorField,
    pub t: f64,
}

impl VectorField for Interpolated<'_> {
    fn dim_in(&self) -> usize {
        self.from.dim_in()
    }

    fn dim_out(&self) -> usize {
        self.from.dim_out()
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let a = self.from.eval_unchecked(x);
        let b = self.to.eval_unchecked(x);
        a.iter()
            .zip(&b)
            .map(|(u, v)| (1.0 - self.t) * u + self.t * v)
            .collect()
    }
}

fn unit_exponent(dim: usize, j: usize) -> Vec<u32> {
    let mut e = vec![0; dim];
    e[j] = 1;
    e
}

fn identity_rows(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mono(c: f64, e: &[u32]) -> Monomial {
        Monomial::new(c, e.to_vec())
    }

    fn square_pair() -> PolyField {
        PolyField::new(
            2,
            vec![
                vec![mono(1.0, &[2, 0]), mono(-1.0, &[0, 2])],
                vec![mono(2.0, &[1, 1])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn eval_identity() {
        let f = PolyField::identity(2);
        assert_eq!(f.eval(&[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
    }

    #[test]
    fn eval_square_pair() {
        let f = square_pair();
        assert_eq!(f.eval(&[1.0, 1.0]).unwrap(), vec![0.0, 2.0]);

        // (0.6 + 0.8i)^2 by complex multiplication
        let (re, im) = (0.6f64, 0.8f64);
        let expected = [re * re - im * im, 2.0 * re * im];
        let got = f.eval(&[0.6, 0.8]).unwrap();
        assert!((got[0] - expected[0]).abs() < 1e-15);
        assert!((got[1] - expected[1]).abs() < 1e-15);
        assert!((got[0] + 0.28).abs() < 1e-12 && (got[1] - 0.96).abs() < 1e-12);
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let f = PolyField::identity(2);
        assert_eq!(
            f.eval(&[1.0, 2.0, 3.0]),
            Err(FieldError::DimensionMismatch { expected: 2, got: 3 })
        );
        assert!(f.jacobian(&[1.0]).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let id = PolyField::identity(2);
        assert_eq!(id.jacobian(&[0.3, -7.0]).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let sq = square_pair();
        assert_eq!(sq.jacobian(&[1.0, 0.0]).unwrap(), vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    }

    #[test]
    fn normalization_merges_and_sorts() {
        let f = PolyField::new(
            2,
            vec![vec![mono(1.0, &[0, 1]), mono(2.0, &[1, 0]), mono(-1.0, &[0, 1])]],
        )
        .unwrap();
        assert_eq!(f.components()[0], vec![mono(2.0, &[1, 0])]);
        let g = PolyField::new(1, vec![vec![mono(1.0, &[2]), mono(3.0, &[0])]]).unwrap();
        assert_eq!(g.components()[0], vec![mono(3.0, &[0]), mono(1.0, &[2])]);
    }

    #[test]
    fn zero_polynomial_is_representable() {
        let f = PolyField::new(2, vec![vec![], vec![mono(1.0, &[0, 0])]]).unwrap();
        assert_eq!(f.eval(&[5.0, 5.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn bad_exponent_length_rejected() {
        assert!(PolyField::new(2, vec![vec![mono(1.0, &[1])]]).is_err());
    }

    #[test]
    fn suspend_examples() {
        let w = PolyField::identity(2).suspend(Sign::Minus);
        let expected = PolyField::linear(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, -1.0],
        ])
        .unwrap();
        assert_eq!(w, expected);

        // (P_3, Q_3) = (x1^3 - 3 x1 x2^2, 3 x1^2 x2 - x2^3)
        let cubic = PolyField::new(
            2,
            vec![
                vec![mono(1.0, &[3, 0]), mono(-3.0, &[1, 2])],
                vec![mono(3.0, &[2, 1]), mono(-1.0, &[0, 3])],
            ],
        )
        .unwrap();
        let s = cubic.suspend(Sign::Plus);
        assert_eq!(s.eval(&[1.0, 0.0, 0.5]).unwrap(), vec![1.0, 0.0, 0.5]);
    }

    #[test]
    fn suspended_last_component_vanishes_on_hyperplane() {
        let s = square_pair().suspend(Sign::Minus);
        for i in 0..10 {
            for j in 0..10 {
                let x = [-1.0 + 0.2 * i as f64, -1.0 + 0.2 * j as f64, 0.0];
                assert_eq!(s.eval(&x).unwrap()[2], 0.0);
            }
        }
    }

    #[test]
    fn restrict_examples() {
        let w = PolyField::identity(2).suspend(Sign::Minus);
        assert_eq!(w.restrict().unwrap(), PolyField::identity(2));

        let bad = PolyField::new(
            3,
            vec![
                vec![mono(1.0, &[1, 0, 0])],
                vec![mono(1.0, &[0, 1, 0])],
                vec![mono(1.0, &[1, 1, 0])],
            ],
        )
        .unwrap();
        match bad.restrict() {
            Err(FieldError::NonInvariantHyperplane { component, monomial }) => {
                assert_eq!(component, 2);
                assert_eq!(monomial, mono(1.0, &[1, 1, 0]));
            }
            other => panic!("expected non-invariance, got {other:?}"),
        }
    }

    #[test]
    fn restrict_agrees_with_field_on_hyperplane() {
        let f = PolyField::new(
            3,
            vec![
                vec![mono(1.0, &[1, 0, 0]), mono(2.0, &[0, 1, 1])],
                vec![mono(-1.0, &[0, 2, 0])],
                vec![mono(1.0, &[1, 0, 1]), mono(1.0, &[0, 0, 3])],
            ],
        )
        .unwrap();
        let r = f.restrict().unwrap();
        let x = [0.3, -0.7];
        let full = f.eval(&[0.3, -0.7, 0.0]).unwrap();
        assert_eq!(r.eval(&x).unwrap(), full[..2].to_vec());
    }

    #[test]
    fn permutation_moves_first_coordinate_last() {
        // F(x) = (x1, x2^2, x3): with y = (x2, x3, x1), G(y) = (y1^2, y2, y3)
        let f = PolyField::new(
            3,
            vec![
                vec![mono(1.0, &[1, 0, 0])],
                vec![mono(1.0, &[0, 2, 0])],
                vec![mono(1.0, &[0, 0, 1])],
            ],
        )
        .unwrap();
        let g = f.permute_coordinates(&[1, 2, 0]).unwrap();
        assert_eq!(g.eval(&[2.0, 3.0, 5.0]).unwrap(), vec![4.0, 3.0, 5.0]);
        assert!(f.permute_coordinates(&[0, 0, 1]).is_err());
    }

    #[test]
    fn json_round_trip_and_format() {
        let f = square_pair();
        let text = f.to_json();
        assert!(text.contains("\"c\"") && text.contains("\"e\""));
        assert_eq!(PolyField::from_json(&text).unwrap(), f);
        let parsed =
            PolyField::from_json(r#"{"dim": 2, "components": [[{"c": 1, "e": [1, 0]}], [{"c": -1, "e": [0, 1]}]]}"#)
                .unwrap();
        assert_eq!(parsed.eval(&[2.0, 3.0]).unwrap(), vec![2.0, -3.0]);
        assert!(PolyField::from_json(r#"{"dim": 2, "components": [[{"c": 1, "e": [1]}]]}"#).is_err());
    }

    #[test]
    fn fn_field_uses_finite_difference_jacobian() {
        let f = FnField::new(2, 2, |x: &[f64]| vec![x[0].sin(), x[0] * x[1]]);
        let j = f.jacobian(&[0.5, 2.0]).unwrap();
        assert!((j[0][0] - 0.5f64.cos()).abs() < 1e-8);
        assert!((j[1][0] - 2.0).abs() < 1e-8);
        assert!((j[1][1] - 0.5).abs() < 1e-8);
    }

    fn arb_field(dim: usize, max_exp: u32) -> impl Strategy<Value = PolyField> {
        let mono = (
            -2.0f64..2.0,
            proptest::collection::vec(0..=max_exp, dim),
        )
            .prop_map(|(c, e)| Monomial::new(c, e));
        proptest::collection::vec(proptest::collection::vec(mono, 0..5), dim)
            .prop_map(move |comps| PolyField::new(dim, comps).unwrap())
    }

    proptest! {
        #[test]
        fn jacobian_matches_central_differences(
            f in arb_field(3, 3),
            x in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let exact = f.jacobian(&x).unwrap();
            let approx = central_differences(&f, &x);
            for (row_e, row_a) in exact.iter().zip(&approx) {
                for (e, a) in row_e.iter().zip(row_a) {
                    prop_assert!((e - a).abs() <= 1e-6 * (1.0 + e.abs()), "{} vs {}", e, a);
                }
            }
        }

        #[test]
        fn restrict_inverts_suspend(f in arb_field(2, 3), minus in any::<bool>()) {
            let sign = if minus { Sign::Minus } else { Sign::Plus };
            prop_assert_eq!(f.suspend(sign).restrict().unwrap(), f);
        }

        #[test]
        fn suspension_is_tangent_to_hyperplane(
            f in arb_field(2, 3),
            x in proptest::collection::vec(-3.0f64..3.0, 2),
        ) {
            let s = f.suspend(Sign::Minus);
            prop_assert_eq!(s.eval(&[x[0], x[1], 0.0]).unwrap()[2], 0.0);
        }

        #[test]
        fn evaluation_is_pure(f in arb_field(3, 2), x in proptest::collection::vec(-1.0f64..1.0, 3)) {
            prop_assert_eq!(f.eval(&x).unwrap(), f.eval(&x).unwrap());
        }
    }
}
