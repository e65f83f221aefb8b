//! Frobenius residuals of the matrix identities used to derive `V` in a
//! shared-correlation frame.

use nalgebra::{DMatrix, DVector};

use crate::correlation::{std_devs, SharedCorrelationFrame};
use crate::error::{Error, Result};
use crate::symmat::{sqrt_gram, sqrt_psd, PsdMatrix, DEFAULT_RANK_TOL};
use crate::transport::v_closed_form;

fn product_root(a: &PsdMatrix, b: &PsdMatrix) -> Result<PsdMatrix> {
    Ok(sqrt_gram(&(sqrt_psd(b).matrix() * sqrt_psd(a).matrix())))
}

/// `‖OᵀΣ^{1/2}O − (OᵀΣO)^{1/2}‖_F`.
pub fn os_residual(sigma: &PsdMatrix, o: &DMatrix<f64>) -> Result<f64> {
    let lhs = sqrt_psd(sigma).sym().conjugate(o);
    let rhs = sqrt_psd(&sigma.conjugate(o)?);
    Ok((lhs.matrix() - rhs.matrix()).norm())
}

/// `‖((OᵀΣ_μO)^{1/2} OᵀΣ_νO (OᵀΣ_μO)^{1/2})^{1/2} − Oᵀ(Σ_μ^{1/2}Σ_νΣ_μ^{1/2})^{1/2}O‖_F`.
pub fn raco_residual(sigma_mu: &PsdMatrix, sigma_nu: &PsdMatrix, o: &DMatrix<f64>) -> Result<f64> {
    let lhs = product_root(&sigma_mu.conjugate(o)?, &sigma_nu.conjugate(o)?)?;
    let rhs = product_root(sigma_mu, sigma_nu)?.sym().conjugate(o);
    Ok((lhs.matrix() - rhs.matrix()).norm())
}

/// With `Σ̃ = OᵀΣO`:
/// `‖Σ̃_μ^{1/2} dg(Σ̃_ν)^{1/2} dg(Σ̃_μ)^{-1/2} Σ̃_μ^{1/2} − (Σ̃_μ^{1/2} Σ̃_ν Σ̃_μ^{1/2})^{1/2}‖_F`.
/// Needs every diagonal entry of `Σ̃_μ` to be positive.
pub fn map_ident_residual(
    frame: &SharedCorrelationFrame,
    sigma_mu: &PsdMatrix,
    sigma_nu: &PsdMatrix,
) -> Result<f64> {
    let a = sigma_mu.conjugate(&frame.o)?;
    let b = sigma_nu.conjugate(&frame.o)?;
    let sa = std_devs(a.sym(), DEFAULT_RANK_TOL);
    let sb = std_devs(b.sym(), DEFAULT_RANK_TOL);
    if sa.iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid("rotated source covariance has a zero variance"));
    }
    let ratio = DVector::from_fn(sa.len(), |i, _| sb[i] / sa[i]);
    let a_half = sqrt_psd(&a);
    let lhs = a_half.matrix() * DMatrix::from_diagonal(&ratio) * a_half.matrix();
    let rhs = product_root(&a, &b)?;
    Ok((lhs - rhs.matrix()).norm())
}

/// `|V(QᵀΣ_μQ, QᵀΣ_νQ) − V(Σ_μ, Σ_ν)|`.
pub fn conjugation_invariance_residual(
    sigma_mu: &PsdMatrix,
    sigma_nu: &PsdMatrix,
    q: &DMatrix<f64>,
) -> Result<f64> {
    let rotated = v_closed_form(&sigma_mu.conjugate(q)?, &sigma_nu.conjugate(q)?)?;
    Ok((rotated - v_closed_form(sigma_mu, sigma_nu)?).abs())
}
