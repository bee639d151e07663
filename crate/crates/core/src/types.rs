//! Observations, fits, directions and the equivariance transforms.
//!
//! The parameter layout is intercept first: `beta[0]` is the intercept and
//! `beta[1..]` the slope block. The extended covariate `w = (1, x)` is derived
//! on demand and never stored.

use serde::{Deserialize, Serialize};

use crate::error::{DepthError, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    x: Vec<f64>,
    y: f64,
}

impl Observation {
    pub fn new(x: Vec<f64>, y: f64) -> Result<Self> {
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(DepthError::NonFinite("observation"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    observations: Vec<Observation>,
    p: usize,
}

impl ObservationSet {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        let first = observations.first().ok_or(DepthError::Empty)?;
        let p = first.x.len() + 1;
        if p < 2 {
            return Err(DepthError::InvalidDimension(p));
        }
        if let Some(bad) = observations.iter().find(|o| o.x.len() + 1 != p) {
            return Err(DepthError::DimensionMismatch {
                expected: p - 1,
                found: bad.x.len(),
            });
        }
        Ok(Self { observations, p })
    }

    /// Simple-regression convenience constructor (p = 2).
    pub fn from_xy(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(DepthError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        let obs = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| Observation::new(vec![a], b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observation> {
        self.observations.iter()
    }

    /// First covariate of every observation.
    pub fn xs(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.x[0]).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.y).collect()
    }

    pub fn residuals(&self, beta: &ParamVector) -> Result<Vec<f64>> {
        self.observations.iter().map(|o| residual(o, beta)).collect()
    }

    pub(crate) fn check_beta(&self, beta: &ParamVector) -> Result<()> {
        if beta.dim() != self.p {
            return Err(DepthError::DimensionMismatch {
                expected: self.p,
                found: beta.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.len() < 2 {
            return Err(DepthError::InvalidDimension(beta.len()));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(DepthError::NonFinite("parameter vector"));
        }
        Ok(Self(beta))
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![0.0; p.max(2)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn intercept(&self) -> f64 {
        self.0[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.0[1..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `beta + b`, the fit that matches `transform_regression(set, b)`.
    pub fn shifted(&self, b: &[f64]) -> Result<Self> {
        if b.len() != self.dim() {
            return Err(DepthError::DimensionMismatch {
                expected: self.dim(),
                found: b.len(),
            });
        }
        Self::new(self.0.iter().zip(b).map(|(a, c)| a + c).collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|v| v * s).collect())
    }

    /// Slope block mapped by `A^{-1}`, matching `transform_affine(set, A)`.
    pub fn affine_mapped(&self, a: &[Vec<f64>]) -> Result<Self> {
        let slopes = linalg::solve(a, self.slopes())?;
        let mut out = vec![self.intercept()];
        out.extend(slopes);
        Self::new(out)
    }
}

/// A direction on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitDirection(Vec<f64>);

impl UnitDirection {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(DepthError::InvalidArgument("direction has zero norm".into()));
        }
        Ok(Self(v.into_iter().map(|c| c / norm).collect()))
    }

    pub fn from_angle(theta: f64) -> Self {
        Self(vec![theta.cos(), theta.sin()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Polar angle in [0, 2π) of the first two coordinates.
    pub fn angle(&self) -> f64 {
        let a = self.0[1].atan2(self.0[0]);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthValue {
    pub normalized: f64,
    /// Raw count (half-integer for the sign formulation).
    pub count: Option<f64>,
    pub exact: bool,
    pub witness_direction: Option<UnitDirection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResidualSign {
    Negative,
    Zero,
    Positive,
}

impl ResidualSign {
    /// Exact sign, no tolerance.
    pub fn of(t: f64) -> Self {
        if t > 0.0 {
            ResidualSign::Positive
        } else if t < 0.0 {
            ResidualSign::Negative
        } else {
            ResidualSign::Zero
        }
    }

    pub fn value(self) -> i32 {
        match self {
            ResidualSign::Negative => -1,
            ResidualSign::Zero => 0,
            ResidualSign::Positive => 1,
        }
    }
}

/// `y - beta0 - x' beta1`.
pub fn residual(obs: &Observation, beta: &ParamVector) -> Result<f64> {
    if obs.x.len() + 1 != beta.dim() {
        return Err(DepthError::DimensionMismatch {
            expected: obs.x.len() + 1,
            found: beta.dim(),
        });
    }
    Ok(obs.y - fitted(&obs.x, beta.as_slice()))
}

#[inline]
pub(crate) fn fitted(x: &[f64], beta: &[f64]) -> f64 {
    x.iter().zip(&beta[1..]).fold(beta[0], |acc, (a, b)| acc + a * b)
}

pub fn extend_w(obs: &Observation) -> Vec<f64> {
    let mut w = Vec::with_capacity(obs.x.len() + 1);
    w.push(1.0);
    w.extend_from_slice(&obs.x);
    w
}

/// Replaces each response `y` by `y + w'b`.
pub fn transform_regression(set: &ObservationSet, b: &[f64]) -> Result<ObservationSet> {
    if b.len() != set.p {
        return Err(DepthError::DimensionMismatch {
            expected: set.p,
            found: b.len(),
        });
    }
    let obs = set
        .iter()
        .map(|o| Observation::new(o.x.clone(), o.y + fitted(&o.x, b)))
        .collect::<Result<Vec<_>>>()?;
    ObservationSet::new(obs)
}

/// `y -> s y`.
pub fn transform_scale(set: &ObservationSet, s: f64) -> Result<ObservationSet> {
    if s == 0.0 {
        return Err(DepthError::ZeroScale);
    }
    if !s.is_finite() {
        return Err(DepthError::NonFinite("scale factor"));
    }
    let obs = set
        .iter()
        .map(|o| Observation::new(o.x.clone(), s * o.y))
        .collect::<Result<Vec<_>>>()?;
    ObservationSet::new(obs)
}

/// `x -> A'x` on the covariates; `A` is (p-1)x(p-1) and nonsingular.
pub fn transform_affine(set: &ObservationSet, a: &[Vec<f64>]) -> Result<ObservationSet> {
    let q = set.p - 1;
    if a.len() != q || a.iter().any(|row| row.len() != q) {
        return Err(DepthError::DimensionMismatch {
            expected: q,
            found: a.len(),
        });
    }
    if linalg::det(a) == 0.0 {
        return Err(DepthError::SingularTransform);
    }
    let obs = set
        .iter()
        .map(|o| {
            let x: Vec<f64> = (0..q)
                .map(|j| (0..q).map(|i| a[i][j] * o.x[i]).sum())
                .collect();
            Observation::new(x, o.y)
        })
        .collect::<Result<Vec<_>>>()?;
    ObservationSet::new(obs)
}

/// The four-point configuration used throughout the golden tests.
pub fn four_point_example() -> ObservationSet {
    ObservationSet::from_xy(&[0.125, 0.5, 0.75, 0.875], &[1.0, 0.0, -1.0, 2.0])
        .expect("static data")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(x: &[f64], y: f64) -> Observation {
        Observation::new(x.to_vec(), y).unwrap()
    }

    #[test]
    fn residual_examples() {
        let zero = ParamVector::zeros(2);
        assert_eq!(residual(&obs(&[0.5], 0.0), &zero).unwrap(), 0.0);
        assert_eq!(residual(&obs(&[0.125], 1.0), &zero).unwrap(), 1.0);
        let line = ParamVector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(residual(&obs(&[2.0], 5.0), &line).unwrap(), 0.0);
    }

    #[test]
    fn residual_dimension_mismatch() {
        let b = ParamVector::zeros(3);
        assert!(matches!(
            residual(&obs(&[1.0], 0.0), &b),
            Err(DepthError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn extend_w_examples() {
        assert_eq!(extend_w(&obs(&[0.5], 0.0)), vec![1.0, 0.5]);
        assert_eq!(extend_w(&obs(&[0.125], 1.0)), vec![1.0, 0.125]);
        assert_eq!(extend_w(&obs(&[3.0, -4.0], 1.0)), vec![1.0, 3.0, -4.0]);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(Observation::new(vec![f64::NAN], 0.0).is_err());
        assert!(Observation::new(vec![0.0], f64::INFINITY).is_err());
        assert!(ParamVector::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn set_invariants() {
        assert_eq!(ObservationSet::new(vec![]), Err(DepthError::Empty));
        assert!(matches!(
            ObservationSet::new(vec![obs(&[], 1.0)]),
            Err(DepthError::InvalidDimension(1))
        ));
        assert!(matches!(
            ObservationSet::new(vec![obs(&[1.0], 1.0), obs(&[1.0, 2.0], 0.0)]),
            Err(DepthError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transforms() {
        let set = four_point_example();
        assert_eq!(transform_regression(&set, &[0.0, 0.0]).unwrap(), set);
        let shifted = transform_regression(&set, &[1.0, 0.0]).unwrap();
        for (a, b) in shifted.iter().zip(set.iter()) {
            assert_eq!(a.y(), b.y() + 1.0);
            assert_eq!(a.x(), b.x());
        }
        let neg = transform_scale(&set, -1.0).unwrap();
        assert_eq!(neg.ys(), vec![-1.0, 0.0, 1.0, -2.0]);
        assert_eq!(transform_scale(&set, 0.0), Err(DepthError::ZeroScale));
        assert_eq!(
            transform_affine(&set, &[vec![0.0]]),
            Err(DepthError::SingularTransform)
        );
        let doubled = transform_affine(&set, &[vec![2.0]]).unwrap();
        assert_eq!(doubled.xs(), vec![0.25, 1.0, 1.5, 1.75]);
    }

    #[test]
    fn unit_direction_is_normalized() {
        let d = UnitDirection::new(vec![3.0, 4.0]).unwrap();
        let n: f64 = d.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() <= 1e-12);
        assert!(UnitDirection::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn residual_sign_is_exact() {
        assert_eq!(ResidualSign::of(0.0), ResidualSign::Zero);
        assert_eq!(ResidualSign::of(-0.0), ResidualSign::Zero);
        assert_eq!(ResidualSign::of(1e-300), ResidualSign::Positive);
        assert_eq!(ResidualSign::of(-1e-300).value(), -1);
    }
}
