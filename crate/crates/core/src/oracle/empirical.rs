use nalgebra::{DMatrix, DVector};

use super::assignment::hungarian;
use crate::error::{Error, Result};

/// Largest cloud accepted by [`empirical_w2_squared`].
pub const MAX_CLOUD_SIZE: usize = 512;

/// `n` points in `R^d` (one per row) with uniform weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleCloud {
    points: DMatrix<f64>,
}

impl SampleCloud {
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::invalid("a sample cloud needs at least one point"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample cloud has non-finite entries"));
        }
        Ok(SampleCloud { points })
    }

    pub fn from_points(points: &[DVector<f64>]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::invalid("a sample cloud needs at least one point"))?;
        let d = first.len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::invalid("points have different dimensions"));
        }
        Self::new(DMatrix::from_fn(points.len(), d, |i, j| points[i][j]))
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }
}

/// Squared W2 between two uniform empirical measures of equal size, from an
/// exact optimal assignment.
pub fn empirical_w2_squared(x: &SampleCloud, y: &SampleCloud) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "clouds have {} and {} points; only equal sizes are supported",
            x.len(),
            y.len()
        )));
    }
    if x.dim() != y.dim() {
        return Err(Error::invalid(format!("clouds live in R^{} and R^{}", x.dim(), y.dim())));
    }
    let n = x.len();
    if n > MAX_CLOUD_SIZE {
        return Err(Error::invalid(format!("clouds of {n} points exceed the limit of {MAX_CLOUD_SIZE}")));
    }
    let cost = DMatrix::from_fn(n, n, |i, j| (x.points.row(i) - y.points.row(j)).norm_squared());
    Ok(hungarian(&cost).cost / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud1(v: &[f64]) -> SampleCloud {
        SampleCloud::new(DMatrix::from_column_slice(v.len(), 1, v)).unwrap()
    }

    #[test]
    fn examples() {
        let x = cloud1(&[0.0, 1.0]);
        assert_eq!(empirical_w2_squared(&x, &x).unwrap(), 0.0);
        assert_eq!(empirical_w2_squared(&x, &cloud1(&[10.0, 11.0])).unwrap(), 100.0);
        assert_eq!(empirical_w2_squared(&cloud1(&[0.0, 1.0]), &cloud1(&[11.0, 10.0])).unwrap(), 100.0);
    }

    #[test]
    fn rejections() {
        assert!(empirical_w2_squared(&cloud1(&[0.0]), &cloud1(&[0.0, 1.0])).is_err());
        assert!(SampleCloud::new(DMatrix::zeros(0, 2)).is_err());
        assert!(SampleCloud::new(DMatrix::from_element(1, 1, f64::NAN)).is_err());
        let big = cloud1(&vec![0.0; MAX_CLOUD_SIZE + 1]);
        assert!(empirical_w2_squared(&big, &big).is_err());
    }
}
