//! Closed-form quadratic transport between Gaussian laws.
//!
//! `W2²(N(m_μ,Σ_μ), N(m_ν,Σ_ν)) = |m_μ − m_ν|² + tr(Σ_μ + Σ_ν) − 2V` with
//! `V = tr((Σ_μ^{1/2} Σ_ν Σ_μ^{1/2})^{1/2})`, the largest trace of a
//! cross-covariance `Θ` for which `[[Σ_μ, Θ], [Θᵀ, Σ_ν]]` is PSD. In a
//! shared-correlation frame the same value reads `Σ_i d_μ,i · d_ν,i`, and
//! the optimal coupling is `(m_μ + O D_μ Z, m_ν + O D_ν Z)` with
//! `Z ~ N(0, C)`.
//!
//! Non-Gaussian optimal couplings exist between degenerate Gaussians (e.g.
//! a random sign flip on a coordinate that one of the laws does not charge);
//! only the Gaussian ones are built here.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::correlation::{frame_residuals, scale_both, std_devs, SharedCorrelationFrame};
use crate::error::{Error, Result};
use crate::symmat::{inv_sqrt_psd, nuclear_norm, orthogonality_defect, sqrt_gram, sqrt_psd, PsdMatrix, SymMatrix, DEFAULT_RANK_TOL};

/// Negative radicands down to this multiple of the problem scale are treated
/// as round-off and clamped to zero.
const RADICAND_TOL: f64 = 1e-10;

/// A Gaussian law `N(mean, cov)` on `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianLaw {
    mean: DVector<f64>,
    cov: PsdMatrix,
}

impl GaussianLaw {
    pub fn new(mean: DVector<f64>, cov: PsdMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::invalid(format!(
                "mean has length {} but covariance is {}x{}",
                mean.len(),
                cov.dim(),
                cov.dim()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("mean has non-finite entries"));
        }
        Ok(GaussianLaw { mean, cov })
    }

    pub fn centered(cov: PsdMatrix) -> Self {
        let mean = DVector::zeros(cov.dim());
        GaussianLaw { mean, cov }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &PsdMatrix {
        &self.cov
    }

    /// `n` independent draws `mean + Σ^{1/2} ξ`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<DVector<f64>> {
        let root = sqrt_psd(&self.cov);
        (0..n)
            .map(|_| {
                let xi = DVector::from_fn(self.dim(), |_, _| rng.sample(StandardNormal));
                &self.mean + root.matrix() * xi
            })
            .collect()
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// `Σ_a^{-1/2} (Σ_a^{1/2} Σ_b Σ_a^{1/2})^{1/2} Σ_a^{-1/2}`, the symmetric
/// matrix of the Monge map from `N(0, Σ_a)` to `N(0, Σ_b)`.
pub(crate) fn monge_matrix(a: &PsdMatrix, b: &PsdMatrix, rank_tol: f64) -> Result<SymMatrix> {
    check_dims(a.dim(), b.dim())?;
    let a_inv_half = inv_sqrt_psd(a, rank_tol)?;
    // (A^{1/2} B A^{1/2})^{1/2} = (xᵀx)^{1/2} with x = B^{1/2} A^{1/2}.
    let root = sqrt_gram(&(sqrt_psd(b).matrix() * sqrt_psd(a).matrix()));
    Ok(SymMatrix::symmetrized(
        a_inv_half.matrix() * root.matrix() * a_inv_half.matrix(),
    ))
}

/// `V(Σ_μ, Σ_ν) = tr((Σ_μ^{1/2} Σ_ν Σ_μ^{1/2})^{1/2})`, evaluated as the sum of
/// singular values of `Σ_ν^{1/2} Σ_μ^{1/2}`. Both forms agree exactly; the
/// second avoids squaring the condition number.
pub fn v_closed_form(sigma_mu: &PsdMatrix, sigma_nu: &PsdMatrix) -> Result<f64> {
    check_dims(sigma_mu.dim(), sigma_nu.dim())?;
    Ok(nuclear_norm(&(sqrt_psd(sigma_nu).matrix() * sqrt_psd(sigma_mu).matrix())))
}

/// `Σ_i d_μ,i · d_ν,i`.
pub fn v_frame(frame: &SharedCorrelationFrame) -> f64 {
    frame.d_mu.dot(&frame.d_nu)
}

/// `Θ = O D_μ C D_ν Oᵀ`.
pub fn optimal_theta(frame: &SharedCorrelationFrame) -> DMatrix<f64> {
    &frame.o * scale_both(frame.c.matrix(), &frame.d_mu, &frame.d_nu) * frame.o.transpose()
}

fn clamp_radicand(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value < -RADICAND_TOL * scale.max(1.0) {
        return Err(Error::NumericalInconsistency(format!(
            "{what} is {value:e}, below the round-off band"
        )));
    }
    Ok(value.max(0.0))
}

/// Squared Bures-Wasserstein distance `tr(Σ_μ + Σ_ν) − 2V`.
pub fn bw_squared(sigma_mu: &PsdMatrix, sigma_nu: &PsdMatrix) -> Result<f64> {
    let v = v_closed_form(sigma_mu, sigma_nu)?;
    let total = sigma_mu.trace() + sigma_nu.trace();
    clamp_radicand(total - 2.0 * v, total, "Bures-Wasserstein radicand")
}

pub fn bw_distance(sigma_mu: &PsdMatrix, sigma_nu: &PsdMatrix) -> Result<f64> {
    Ok(bw_squared(sigma_mu, sigma_nu)?.sqrt())
}

/// `|m_μ − m_ν|² + bw²(Σ_μ, Σ_ν)`.
pub fn w2_squared(law_mu: &GaussianLaw, law_nu: &GaussianLaw) -> Result<f64> {
    check_dims(law_mu.dim(), law_nu.dim())?;
    let shift = (law_mu.mean() - law_nu.mean()).norm_squared();
    Ok(shift + bw_squared(law_mu.cov(), law_nu.cov())?)
}

pub fn w2_gaussian(law_mu: &GaussianLaw, law_nu: &GaussianLaw) -> Result<f64> {
    Ok(w2_squared(law_mu, law_nu)?.sqrt())
}

/// A Gaussian optimal coupling: its cross-covariance, joint covariance and
/// transport cost.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalCoupling {
    pub theta: DMatrix<f64>,
    pub gamma: PsdMatrix,
    pub w2_squared: f64,
    pub bw_squared: f64,
    pub frame: SharedCorrelationFrame,
}

impl OptimalCoupling {
    pub fn dim(&self) -> usize {
        self.theta.nrows()
    }

    /// `[O D_μ; O D_ν] · C · [O D_μ; O D_ν]ᵀ`.
    pub fn factored_gamma(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut stacked = DMatrix::zeros(2 * d, d);
        stacked.rows_mut(0, d).copy_from(&self.frame.mu_factor());
        stacked.rows_mut(d, d).copy_from(&self.frame.nu_factor());
        &stacked * self.frame.c.matrix() * stacked.transpose()
    }
}

/// Tolerance on the smallest eigenvalue of the joint covariance.
pub const GAMMA_PSD_TOL: f64 = 1e-9;

/// Joint covariance `[[Σ_μ, Θ], [Θᵀ, Σ_ν]]` of the optimal coupling built
/// from a frame.
pub fn coupling_covariance(
    frame: &SharedCorrelationFrame,
    law_mu: &GaussianLaw,
    law_nu: &GaussianLaw,
) -> Result<OptimalCoupling> {
    check_dims(law_mu.dim(), law_nu.dim())?;
    let (rm, rn) = frame_residuals(frame, law_mu.cov(), law_nu.cov())?;
    if rm.max(rn) > frame.frame_tol {
        return Err(Error::InvalidFrame {
            residual: rm.max(rn),
            tolerance: frame.frame_tol,
        });
    }
    let d = law_mu.dim();
    let theta = optimal_theta(frame);
    let mut gamma = DMatrix::zeros(2 * d, 2 * d);
    gamma.view_mut((0, 0), (d, d)).copy_from(law_mu.cov().matrix());
    gamma.view_mut((d, d), (d, d)).copy_from(law_nu.cov().matrix());
    gamma.view_mut((0, d), (d, d)).copy_from(&theta);
    gamma.view_mut((d, 0), (d, d)).copy_from(&theta.transpose());
    let gamma = PsdMatrix::with_tol(SymMatrix::new(gamma)?, GAMMA_PSD_TOL).map_err(|e| match e {
        Error::NotPsd { min_eigenvalue, .. } => Error::NumericalInconsistency(format!(
            "joint covariance has eigenvalue {min_eigenvalue:e}"
        )),
        other => other,
    })?;

    let total = law_mu.cov().trace() + law_nu.cov().trace();
    let bw2 = clamp_radicand(total - 2.0 * theta.trace(), total, "coupling cost")?;
    let shift = (law_mu.mean() - law_nu.mean()).norm_squared();
    Ok(OptimalCoupling {
        theta,
        gamma,
        w2_squared: shift + bw2,
        bw_squared: bw2,
        frame: frame.clone(),
    })
}

/// Affine Monge map `x ↦ matrix·x + shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct MongeMap {
    pub matrix: SymMatrix,
    pub shift: DVector<f64>,
}

impl MongeMap {
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.matrix.matrix() * x + &self.shift
    }

    /// `‖A Σ_μ A − Σ_ν‖_F / ‖Σ_ν‖_F` (absolute when `Σ_ν = 0`).
    pub fn pushforward_residual(&self, sigma_mu: &PsdMatrix, sigma_nu: &PsdMatrix) -> f64 {
        let a = self.matrix.matrix();
        let pushed = a * sigma_mu.matrix() * a;
        (pushed - sigma_nu.matrix()).norm() / sigma_nu.sym().frobenius().max(f64::MIN_POSITIVE)
    }
}

/// Optimal transport map between Gaussians with an invertible source
/// covariance.
pub fn monge_map(law_mu: &GaussianLaw, law_nu: &GaussianLaw, rank_tol: f64) -> Result<MongeMap> {
    check_dims(law_mu.dim(), law_nu.dim())?;
    let matrix = monge_matrix(law_mu.cov(), law_nu.cov(), rank_tol)?;
    let shift = law_nu.mean() - matrix.matrix() * law_mu.mean();
    Ok(MongeMap { matrix, shift })
}

/// `n` draws `(m_μ + O D_μ Z, m_ν + O D_ν Z)` with `Z = C^{1/2} ξ`,
/// `ξ ~ N(0, I)`. Deterministic in `seed`.
pub fn sample_coupling(
    coupling: &OptimalCoupling,
    law_mu: &GaussianLaw,
    law_nu: &GaussianLaw,
    n: usize,
    seed: u64,
) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let frame = &coupling.frame;
    check_dims(frame.dim(), law_mu.dim())?;
    check_dims(frame.dim(), law_nu.dim())?;
    let c_half = sqrt_psd(&frame.c.to_psd()?);
    let left = frame.mu_factor() * c_half.matrix();
    let right = frame.nu_factor() * c_half.matrix();
    let d = frame.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (0..n)
        .map(|_| {
            let xi = DVector::from_fn(d, |_, _| rng.sample(StandardNormal));
            (law_mu.mean() + &left * &xi, law_nu.mean() + &right * &xi)
        })
        .collect();
    Ok(pairs)
}

/// `Σ_i (sqrt((OᵀΣ_μO)_ii) − sqrt((OᵀΣ_νO)_ii))²`, a lower bound on
/// `bw²(Σ_μ, Σ_ν)` for every orthogonal `O`, attained exactly on
/// shared-correlation frames.
pub fn cauchy_schwarz_bound(sigma_mu: &PsdMatrix, sigma_nu: &PsdMatrix, o: &DMatrix<f64>) -> Result<f64> {
    check_dims(sigma_mu.dim(), sigma_nu.dim())?;
    if o.nrows() != sigma_mu.dim() || o.ncols() != sigma_mu.dim() {
        return Err(Error::invalid("rotation has the wrong shape"));
    }
    let defect = orthogonality_defect(o);
    if defect > 1e-10 {
        return Err(Error::invalid(format!("matrix is not orthogonal (defect {defect:e})")));
    }
    let da = std_devs(&sigma_mu.sym().conjugate(o), DEFAULT_RANK_TOL);
    let db = std_devs(&sigma_nu.sym().conjugate(o), DEFAULT_RANK_TOL);
    Ok(da.iter().zip(db.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{shared_correlation_frame, FrameConfig};
    use crate::random::{random_law, random_orthogonal, random_spd};
    use crate::symmat::is_psd;

    fn diag(v: &[f64]) -> PsdMatrix {
        PsdMatrix::from_diagonal(v).unwrap()
    }

    fn law1(m: f64, var: f64) -> GaussianLaw {
        GaussianLaw::new(DVector::from_vec(vec![m]), diag(&[var])).unwrap()
    }

    fn frame(a: &PsdMatrix, b: &PsdMatrix) -> SharedCorrelationFrame {
        shared_correlation_frame(a, b, &FrameConfig::default()).unwrap()
    }

    #[test]
    fn v_examples() {
        assert!((v_closed_form(&PsdMatrix::identity(3), &PsdMatrix::identity(3)).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(v_closed_form(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap(), 0.0);
        assert!((v_closed_form(&diag(&[4.0, 1.0]), &diag(&[1.0, 4.0])).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn v_frame_examples() {
        let i = PsdMatrix::identity(3);
        assert!((v_frame(&frame(&i, &i)) - 3.0).abs() < 1e-14);
        assert_eq!(v_frame(&frame(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]))), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (a, b) = (random_spd(4, &mut rng), random_spd(4, &mut rng));
        let v = v_closed_form(&a, &b).unwrap();
        assert!((v_frame(&frame(&a, &b)) - v).abs() <= 1e-8 * v.max(1.0));
    }

    #[test]
    fn theta_examples() {
        let i = PsdMatrix::identity(2);
        assert!((optimal_theta(&frame(&i, &i)) - DMatrix::identity(2, 2)).abs().max() < 1e-14);
        assert_eq!(optimal_theta(&frame(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]))), DMatrix::zeros(2, 2));
    }

    #[test]
    fn theta_matches_explicit_formula_for_spd_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (a, b) = (random_spd(3, &mut rng), random_spd(3, &mut rng));
        let theta = optimal_theta(&frame(&a, &b));
        let a_half = sqrt_psd(&a);
        let a_inv_half = inv_sqrt_psd(&a, DEFAULT_RANK_TOL).unwrap();
        let inner = PsdMatrix::from_matrix(a_half.matrix() * b.matrix() * a_half.matrix()).unwrap();
        let explicit = a_half.matrix() * sqrt_psd(&inner).matrix() * a_inv_half.matrix();
        assert!((theta - explicit).norm() <= 1e-8);
    }

    #[test]
    fn bw_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_spd(3, &mut rng);
        assert!(bw_distance(&s, &s).unwrap() < 1e-6);
        assert!(bw_squared(&s, &s).unwrap() < 1e-12);
        let bw = bw_distance(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap();
        assert_eq!(bw, 2.0_f64.sqrt());
        assert!((bw_distance(&diag(&[4.0]), &diag(&[9.0])).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn w2_examples() {
        let l = law1(0.0, 1.0);
        assert_eq!(w2_gaussian(&l, &l).unwrap(), 0.0);
        assert!((w2_gaussian(&law1(0.0, 1.0), &law1(3.0, 4.0)).unwrap() - 10.0_f64.sqrt()).abs() < 1e-14);
        let cov = random_spd(2, &mut ChaCha8Rng::seed_from_u64(1));
        let a = GaussianLaw::new(DVector::from_vec(vec![1.0, 2.0]), cov.clone()).unwrap();
        let b = GaussianLaw::new(DVector::from_vec(vec![4.0, 6.0]), cov).unwrap();
        assert!((w2_gaussian(&a, &b).unwrap() - 5.0).abs() < 1e-6);
    }

    #[test]
    fn coupling_examples() {
        let i = PsdMatrix::identity(2);
        let l = GaussianLaw::centered(i.clone());
        let c = coupling_covariance(&frame(&i, &i), &l, &l).unwrap();
        let expected = DMatrix::from_fn(4, 4, |r, s| if r % 2 == s % 2 { 1.0 } else { 0.0 });
        assert!((c.gamma.matrix() - expected).abs().max() < 1e-14);
        assert!(c.w2_squared.abs() < 1e-14);

        let (a, b) = (diag(&[1.0, 0.0]), diag(&[0.0, 1.0]));
        let c = coupling_covariance(&frame(&a, &b), &GaussianLaw::centered(a.clone()), &GaussianLaw::centered(b.clone())).unwrap();
        assert_eq!(c.theta, DMatrix::zeros(2, 2));
        assert_eq!(c.gamma.matrix(), &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0])));
        assert_eq!(c.bw_squared, 2.0);
    }

    #[test]
    fn coupling_on_random_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_law(random_spd(4, &mut rng), 1.0, &mut rng);
        let b = random_law(random_spd(4, &mut rng), 1.0, &mut rng);
        let f = frame(a.cov(), b.cov());
        let c = coupling_covariance(&f, &a, &b).unwrap();
        assert!(is_psd(c.gamma.sym(), 1e-9).is_psd);
        let v = v_closed_form(a.cov(), b.cov()).unwrap();
        assert!((c.theta.trace() - v).abs() <= 1e-8 * v.max(1.0));
        assert!((c.w2_squared - w2_squared(&a, &b).unwrap()).abs() <= 1e-8);
        assert!((c.gamma.matrix().view((0, 0), (4, 4)) - a.cov().matrix()).abs().max() <= 1e-12);
        assert!((c.gamma.matrix().view((4, 4), (4, 4)) - b.cov().matrix()).abs().max() <= 1e-12);
        assert!((c.factored_gamma() - c.gamma.matrix()).norm() <= 1e-10 * c.gamma.sym().frobenius().max(1.0));
    }

    #[test]
    fn coupling_rejects_foreign_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let (a, b, other) = (random_spd(3, &mut rng), random_spd(3, &mut rng), random_spd(3, &mut rng));
        let f = frame(&a, &b);
        let res = coupling_covariance(&f, &GaussianLaw::centered(a), &GaussianLaw::centered(other));
        assert!(matches!(res, Err(Error::InvalidFrame { .. })));
    }

    #[test]
    fn monge_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let s = random_spd(3, &mut rng);
        let l = GaussianLaw::centered(s.clone());
        let m = monge_map(&l, &l, DEFAULT_RANK_TOL).unwrap();
        assert!((m.matrix.matrix() - DMatrix::identity(3, 3)).abs().max() < 1e-10);

        let m = monge_map(&law1(0.0, 1.0), &law1(5.0, 4.0), DEFAULT_RANK_TOL).unwrap();
        assert!((m.matrix.matrix()[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((m.apply(&DVector::from_vec(vec![1.0]))[0] - 7.0).abs() < 1e-14);

        let (a, b) = (random_spd(3, &mut rng), random_spd(3, &mut rng));
        let m = monge_map(&GaussianLaw::centered(a.clone()), &GaussianLaw::centered(b.clone()), DEFAULT_RANK_TOL).unwrap();
        assert!(m.pushforward_residual(&a, &b) <= 1e-8);
        assert!(is_psd(&m.matrix, 0.0).min_eigenvalue > 0.0);

        let singular = GaussianLaw::centered(diag(&[1.0, 0.0]));
        assert!(matches!(
            monge_map(&singular, &GaussianLaw::centered(PsdMatrix::identity(2)), DEFAULT_RANK_TOL),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_exact_for_identical_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let l = random_law(random_spd(3, &mut rng), 2.0, &mut rng);
        let f = frame(l.cov(), l.cov());
        let c = coupling_covariance(&f, &l, &l).unwrap();
        let s1 = sample_coupling(&c, &l, &l, 50, 9).unwrap();
        let s2 = sample_coupling(&c, &l, &l, 50, 9).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.iter().all(|(x, y)| x == y));
        assert!(sample_coupling(&c, &l, &l, 0, 9).is_err());

        let i = PsdMatrix::identity(2);
        let li = GaussianLaw::centered(i.clone());
        let ci = coupling_covariance(&frame(&i, &i), &li, &li).unwrap();
        let one = sample_coupling(&ci, &li, &li, 1, 123).unwrap();
        assert_eq!(one, sample_coupling(&ci, &li, &li, 1, 123).unwrap());
    }

    #[test]
    fn cauchy_schwarz_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let (a, b) = (random_spd(3, &mut rng), random_spd(3, &mut rng));
        let f = frame(&a, &b);
        let bw2 = bw_squared(&a, &b).unwrap();
        assert!((cauchy_schwarz_bound(&a, &b, &f.o).unwrap() - bw2).abs() <= 1e-8);
        for _ in 0..100 {
            let o = random_orthogonal(3, &mut rng);
            assert!(cauchy_schwarz_bound(&a, &b, &o).unwrap() <= bw2 + 1e-9);
            assert!(cauchy_schwarz_bound(&a, &a, &o).unwrap() < 1e-20);
        }
        let skew = DMatrix::from_row_slice(3, 3, &[1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(cauchy_schwarz_bound(&a, &b, &skew).is_err());
    }

    #[test]
    fn self_distance_of_ill_conditioned_covariance() {
        // Eigenvalues 4.84 and 1.56e-5.
        let a = PsdMatrix::from_rows(&[
            vec![3.05148868647874, 2.336782801441845],
            vec![2.336782801441845, 1.7894968490747962],
        ])
        .unwrap();
        assert!((v_closed_form(&a, &a).unwrap() - a.trace()).abs() <= 1e-12);
        assert!(bw_squared(&a, &a).unwrap() <= 1e-12);
    }
}
