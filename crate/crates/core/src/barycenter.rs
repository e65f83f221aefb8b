//! Wasserstein barycenters of Gaussian laws that share a correlation frame.
//!
//! When every `OᵀΣ_iO` factors as `D_i C D_i` with the same `(O, C)`, the
//! barycenter with weights `p_i` is `N(Σ p_i m_i, O D C D Oᵀ)` where
//! `D = Σ p_i D_i`. Finding a common frame for more than two laws is left to
//! the caller; it is validated here.

use nalgebra::{DMatrix, DVector};

use crate::correlation::{reconstruction_residual, scale_both, std_devs, CorrelationMatrix, SharedCorrelationFrame};
use crate::error::{Error, Result};
use crate::symmat::{orthogonality_defect, PsdMatrix, SymMatrix, DEFAULT_RANK_TOL};
use crate::transport::{w2_squared, GaussianLaw};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// An orthogonal matrix and a correlation matrix, without per-law scales.
#[derive(Clone, Debug, PartialEq)]
pub struct CommonFrame {
    pub o: DMatrix<f64>,
    pub c: CorrelationMatrix,
}

impl CommonFrame {
    pub fn new(o: DMatrix<f64>, c: CorrelationMatrix) -> Result<Self> {
        if o.nrows() != c.dim() || o.ncols() != c.dim() {
            return Err(Error::invalid("rotation and correlation dimensions differ"));
        }
        let defect = orthogonality_defect(&o);
        if defect > 1e-10 {
            return Err(Error::invalid(format!("matrix is not orthogonal (defect {defect:e})")));
        }
        Ok(CommonFrame { o, c })
    }

    pub fn identity(dim: usize) -> Self {
        CommonFrame {
            o: DMatrix::identity(dim, dim),
            c: CorrelationMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }
}

impl From<&SharedCorrelationFrame> for CommonFrame {
    fn from(frame: &SharedCorrelationFrame) -> Self {
        CommonFrame {
            o: frame.o.clone(),
            c: frame.c.clone(),
        }
    }
}

/// Laws, weights and a frame valid for every law.
#[derive(Clone, Debug, PartialEq)]
pub struct BarycenterProblem {
    laws: Vec<GaussianLaw>,
    weights: Vec<f64>,
    frame: CommonFrame,
    scales: Vec<DVector<f64>>,
    residuals: Vec<f64>,
}

impl BarycenterProblem {
    pub fn new(laws: Vec<GaussianLaw>, weights: Vec<f64>, frame: CommonFrame, frame_tol: f64) -> Result<Self> {
        if laws.is_empty() {
            return Err(Error::invalid("at least one law is required"));
        }
        if weights.len() != laws.len() {
            return Err(Error::invalid(format!(
                "{} weights for {} laws",
                weights.len(),
                laws.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {sum}, not 1")));
        }
        let d = frame.dim();
        if laws.iter().any(|l| l.dim() != d) {
            return Err(Error::invalid("laws and frame have different dimensions"));
        }

        let mut scales = Vec::with_capacity(laws.len());
        let mut residuals = Vec::with_capacity(laws.len());
        for law in &laws {
            let rotated = law.cov().sym().conjugate(&frame.o);
            let sd = std_devs(&rotated, DEFAULT_RANK_TOL);
            let residual = reconstruction_residual(&rotated, &sd, &frame.c);
            if residual > frame_tol {
                return Err(Error::InvalidFrame {
                    residual,
                    tolerance: frame_tol,
                });
            }
            scales.push(sd);
            residuals.push(residual);
        }
        Ok(BarycenterProblem {
            laws,
            weights,
            frame,
            scales,
            residuals,
        })
    }

    pub fn laws(&self) -> &[GaussianLaw] {
        &self.laws
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn frame(&self) -> &CommonFrame {
        &self.frame
    }

    /// Standard deviations of `OᵀΣ_iO` for each law.
    pub fn scales(&self) -> &[DVector<f64>] {
        &self.scales
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }
}

/// `η_α = N(α m_μ + (1−α) m_ν, O D_α C D_α Oᵀ)` with `D_α = α D_μ + (1−α) D_ν`.
pub fn barycenter_two(
    law_mu: &GaussianLaw,
    law_nu: &GaussianLaw,
    alpha: f64,
    frame: &SharedCorrelationFrame,
) -> Result<GaussianLaw> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} is outside [0, 1]")));
    }
    let problem = BarycenterProblem::new(
        vec![law_mu.clone(), law_nu.clone()],
        vec![alpha, 1.0 - alpha],
        CommonFrame::from(frame),
        frame.frame_tol,
    )?;
    barycenter_n(&problem)
}

/// `N(Σ p_i m_i, O D C D Oᵀ)` with `D = Σ p_i D_i`.
pub fn barycenter_n(problem: &BarycenterProblem) -> Result<GaussianLaw> {
    if let Some(k) = problem.weights.iter().position(|&w| w == 1.0) {
        return Ok(problem.laws[k].clone());
    }
    let d = problem.dim();
    let mut mean = DVector::zeros(d);
    let mut scale = DVector::zeros(d);
    for ((law, sd), &w) in problem.laws.iter().zip(&problem.scales).zip(&problem.weights) {
        mean += law.mean() * w;
        scale += sd * w;
    }
    let o = &problem.frame.o;
    let cov = o * scale_both(problem.frame.c.matrix(), &scale, &scale) * o.transpose();
    let cov = PsdMatrix::new(SymMatrix::new(cov)?)?;
    GaussianLaw::new(mean, cov)
}

/// `Σ p_i W2²(η, law_i)`.
pub fn barycenter_functional(eta: &GaussianLaw, problem: &BarycenterProblem) -> Result<f64> {
    let mut total = 0.0;
    for (law, &w) in problem.laws.iter().zip(&problem.weights) {
        total += w * w2_squared(eta, law)?;
    }
    Ok(total)
}
