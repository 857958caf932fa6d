//! Built-in quotient maps on normed spaces.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, Open01};
use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::{check_finite, euclidean, BoxDomain, Quotient, Rng64, Sampler, Section};

/// `π(x) = A x` from `ℝ^s` onto `ℝ^k` with the Euclidean distance. Fibers are
/// affine subspaces, so both fiber distances have closed forms through the
/// pseudo-inverse `Aᵀ(AAᵀ)⁻¹`.
#[derive(Debug, Clone)]
pub struct LinearQuotient {
    weights: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

impl LinearQuotient {
    /// `rows` are the rows of `A`; they must be linearly independent.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let s = rows.first().map_or(0, Vec::len);
        if k == 0 || s == 0 || rows.iter().any(|r| r.len() != s) {
            return Err(Error::InvalidArgument("weights must be a non-empty rectangular matrix".into()));
        }
        if k > s {
            return Err(Error::InvalidArgument(format!("cannot map R^{s} onto R^{k}")));
        }
        let weights = DMatrix::from_fn(k, s, |i, j| rows[i][j]);
        let gram = &weights * weights.transpose();
        let inv = gram
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("weights are not of full row rank".into()))?;
        let pinv = weights.transpose() * inv;
        Ok(Self { weights, pinv })
    }

    /// `π(x₁, …, x_s) = x₁`.
    pub fn first_coordinate(s: usize) -> Self {
        let mut row = vec![0.0; s];
        row[0] = 1.0;
        Self::new(&[row]).expect("unit row has full rank")
    }

    pub fn weights(&self) -> Vec<Vec<f64>> {
        (0..self.weights.nrows())
            .map(|i| self.weights.row(i).iter().copied().collect())
            .collect()
    }

    fn lift_norm(&self, v: DVector<f64>) -> f64 {
        (&self.pinv * v).norm()
    }
}

impl Quotient for LinearQuotient {
    fn name(&self) -> String {
        format!("linear R^{} -> R^{}", self.total_dim(), self.base_dim())
    }

    fn total_dim(&self) -> usize {
        self.weights.ncols()
    }

    fn base_dim(&self) -> usize {
        self.weights.nrows()
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                got: x.len(),
            });
        }
        check_finite(x)?;
        Ok((&self.weights * DVector::from_column_slice(x)).iter().copied().collect())
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        euclidean(x, y)
    }

    fn fiber_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let px = DVector::from_vec(self.project(x)?);
        Ok(self.lift_norm(px - DVector::from_column_slice(y)))
    }

    fn fiber_to_fiber_distance(&self, y1: &[f64], y2: &[f64]) -> Result<f64> {
        Ok(self.lift_norm(DVector::from_column_slice(y1) - DVector::from_column_slice(y2)))
    }

    fn sample_total(&self, rng: &mut Rng64) -> Vec<f64> {
        (0..self.total_dim()).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    fn scaling(&self) -> Option<f64> {
        Some(1.0)
    }

    fn fiber_point(&self, y: &[f64], rng: &mut Rng64) -> Result<Vec<f64>> {
        let s = self.total_dim();
        let u = DVector::from_fn(s, |_, _| rng.gen_range(-2.0..2.0));
        let proj = &self.pinv * &self.weights;
        let x = &self.pinv * DVector::from_column_slice(y) + (DMatrix::identity(s, s) - proj) * u;
        Ok(x.iter().copied().collect())
    }
}

/// `π(x) = 1/x` from `(0, 1)` onto `(1, ∞)`. Fibers are single points.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReciprocalQuotient;

impl ReciprocalQuotient {
    fn preimage(y: f64) -> Result<f64> {
        if y > 1.0 && y.is_finite() {
            Ok(1.0 / y)
        } else {
            Err(Error::OutsideDomain {
                what: "reciprocal base (1, inf)",
                point: vec![y],
            })
        }
    }
}

impl Quotient for ReciprocalQuotient {
    fn name(&self) -> String {
        "reciprocal (0,1) -> (1,inf)".into()
    }

    fn total_dim(&self) -> usize {
        1
    }

    fn base_dim(&self) -> usize {
        1
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        match x {
            [v] if *v > 0.0 && *v < 1.0 => Ok(vec![1.0 / v]),
            [_] => Err(Error::OutsideDomain {
                what: "reciprocal total space (0, 1)",
                point: x.to_vec(),
            }),
            _ => Err(Error::DimensionMismatch { expected: 1, got: x.len() }),
        }
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        (x[0] - y[0]).abs()
    }

    fn fiber_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok((x[0] - Self::preimage(y[0])?).abs())
    }

    fn fiber_to_fiber_distance(&self, y1: &[f64], y2: &[f64]) -> Result<f64> {
        Ok((Self::preimage(y1[0])? - Self::preimage(y2[0])?).abs())
    }

    fn sample_total(&self, rng: &mut Rng64) -> Vec<f64> {
        vec![Open01.sample(rng)]
    }

    fn fiber_point(&self, y: &[f64], _rng: &mut Rng64) -> Result<Vec<f64>> {
        Ok(vec![Self::preimage(y[0])?])
    }
}

/// `φ(y) = 1/y`, the section of [`ReciprocalQuotient`].
pub fn reciprocal_section(lo: f64, hi: f64, seed: u64) -> Result<Section> {
    if lo < 1.0 {
        return Err(Error::InvalidArgument("reciprocal section domain must lie in (1, inf)".into()));
    }
    Section::new(
        "reciprocal",
        Arc::new(ReciprocalQuotient),
        Sampler::random(BoxDomain::interval(lo, hi)?, seed),
        |y| Ok(vec![1.0 / y[0]]),
    )
}

/// `π(x) = sign(x)|x|^p` on `ℝ`. Singleton fibers.
#[derive(Debug, Clone, Copy)]
pub struct PowerQuotient {
    pub power: f64,
}

impl Quotient for PowerQuotient {
    fn name(&self) -> String {
        format!("power x^{}", self.power)
    }

    fn total_dim(&self) -> usize {
        1
    }

    fn base_dim(&self) -> usize {
        1
    }

    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_finite(x)?;
        Ok(vec![x[0].signum() * x[0].abs().powf(self.power)])
    }

    fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        (x[0] - y[0]).abs()
    }

    fn fiber_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok((x[0] - y[0].signum() * y[0].abs().powf(1.0 / self.power)).abs())
    }

    fn fiber_to_fiber_distance(&self, y1: &[f64], y2: &[f64]) -> Result<f64> {
        let root = |v: f64| v.signum() * v.abs().powf(1.0 / self.power);
        Ok((root(y1[0]) - root(y2[0])).abs())
    }

    fn sample_total(&self, rng: &mut Rng64) -> Vec<f64> {
        vec![rng.gen_range(-2.0..2.0)]
    }

    fn fiber_point(&self, y: &[f64], _rng: &mut Rng64) -> Result<Vec<f64>> {
        Ok(vec![y[0].signum() * y[0].abs().powf(1.0 / self.power)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fiber_distance_is_offset_along_normal() {
        let q = LinearQuotient::new(&[vec![1.0, 1.0]]).unwrap();
        // fiber x1 + x2 = 0; distance from (1,1) is 2/sqrt(2)
        let d = q.fiber_distance(&[1.0, 1.0], &[0.0]).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-14);
        let ff = q.fiber_to_fiber_distance(&[0.0], &[2.0]).unwrap();
        assert!((ff - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_weights_rejected() {
        assert!(LinearQuotient::new(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
        assert!(LinearQuotient::new(&[vec![1.0], vec![0.0]]).is_err());
    }

    #[test]
    fn reciprocal_domain() {
        let q = ReciprocalQuotient;
        assert_eq!(q.project(&[0.5]).unwrap(), vec![2.0]);
        assert!(q.project(&[1.0]).is_err());
        assert!(q.project(&[-0.5]).is_err());
        assert!(q.fiber_distance(&[0.5], &[0.5]).is_err());
        assert_eq!(q.fiber_distance(&[0.5], &[4.0]).unwrap(), 0.25);
    }

    #[test]
    fn power_fiber_is_real_root() {
        let q = PowerQuotient { power: 3.0 };
        assert!((q.fiber_distance(&[0.0], &[-8.0]).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(q.project(&[-2.0]).unwrap(), vec![-8.0]);
    }
}
