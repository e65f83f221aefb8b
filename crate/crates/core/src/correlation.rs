//! Correlation matrices and shared-correlation frames.
//!
//! Two covariance matrices `Σ_μ`, `Σ_ν` *share* a correlation matrix `C`
//! when `Σ = dg(Σ)^{1/2} · C · dg(Σ)^{1/2}` holds for both. The central
//! object of the crate is an orthogonal `O` such that the rotated pair
//! `OᵀΣ_μO`, `OᵀΣ_νO` shares some `C`: in that frame the optimal Gaussian
//! coupling is coordinatewise comonotone.
//!
//! Construction, by branch:
//!
//! * `Σ_μ` invertible: `O` diagonalizes the Monge matrix
//!   `Σ_μ^{-1/2}(Σ_μ^{1/2}Σ_νΣ_μ^{1/2})^{1/2}Σ_μ^{-1/2}`.
//! * only `Σ_ν` invertible: the same with the roles swapped.
//! * both singular: the `ε → 0` limit of the frames of `(Σ_μ + εI, Σ_ν)`.
//!   By default the limit is taken in closed form: on `range(Σ_μ)` the frame
//!   diagonalizes the Monge matrix between the compressed pair, and on
//!   `ker(Σ_μ)` any orthonormal basis works because `X` has no component
//!   there. [`ContinuationMode::Geometric`] instead follows a geometric
//!   schedule `ε_n = eps0 · ratioⁿ` numerically.
//!
//! Entries of `C` between a coordinate carrying only `μ`-variance and one
//! carrying only `ν`-variance are not fixed by either covariance. They are
//! completed by conditional independence given the shared coordinates, which
//! keeps `C` positive semi-definite. Any such completion gives an optimal
//! coupling since `tr Θ = Σ_i d_μ,i d_ν,i` only involves the diagonal of `C`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::symmat::{
    self, orthogonality_defect, sym_eigen, truncate_spectrum, PsdMatrix, SymMatrix, DEFAULT_RANK_TOL,
};
use crate::transport::monge_matrix;

pub const DEFAULT_FRAME_TOL: f64 = 1e-8;

/// A PSD matrix with unit diagonal and entries in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix(SymMatrix);

impl CorrelationMatrix {
    /// Validates a user-supplied correlation matrix. Diagonal entries within
    /// `1e-12` of one are snapped to one and off-diagonal entries within
    /// `1e-12` of `±1` are clamped.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let s = SymMatrix::new(m)?;
        let n = s.dim();
        let mut m = s.into_inner();
        for i in 0..n {
            if (m[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("diagonal entry {i} is {}, expected 1", m[(i, i)])));
            }
            m[(i, i)] = 1.0;
            for j in 0..n {
                if i != j {
                    if m[(i, j)].abs() > 1.0 + 1e-12 {
                        return Err(Error::invalid(format!("entry ({i},{j}) outside [-1, 1]")));
                    }
                    m[(i, j)] = m[(i, j)].clamp(-1.0, 1.0);
                }
            }
        }
        let s = SymMatrix::symmetrized(m);
        let check = symmat::is_psd(&s, 1e-10);
        if !check.is_psd {
            return Err(Error::NotPsd {
                min_eigenvalue: check.min_eigenvalue,
                threshold: -1e-10 * check.max_eigenvalue.max(1.0),
            });
        }
        Ok(CorrelationMatrix(s))
    }

    // Unit diagonal and clamping are imposed; PSD-ness is the caller's job.
    pub(crate) fn from_raw(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if i == j { 1.0 } else { m[(i, j)].clamp(-1.0, 1.0) };
            }
        }
        CorrelationMatrix(SymMatrix::symmetrized(m))
    }

    pub fn identity(dim: usize) -> Self {
        CorrelationMatrix(SymMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.0.matrix()
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.0
    }

    /// `ε·I + (1 − ε)·C`.
    pub fn blend(&self, eps: f64) -> CorrelationMatrix {
        let n = self.dim();
        let m = DMatrix::identity(n, n) * eps + self.matrix() * (1.0 - eps);
        CorrelationMatrix::from_raw(m)
    }

    /// The matrix as a PSD matrix (for factorizations such as sampling).
    pub fn to_psd(&self) -> Result<PsdMatrix> {
        PsdMatrix::with_tol(self.0.clone(), 1e-10)
    }
}

/// `diag(Σ_11, …, Σ_dd)`.
pub fn dg(s: &SymMatrix) -> DMatrix<f64> {
    DMatrix::from_diagonal(&s.diagonal())
}

/// Standard deviations `sqrt(Σ_ii)`, with variances at or below
/// `rank_tol · max_k Σ_kk` treated as exactly zero.
pub fn std_devs(s: &SymMatrix, rank_tol: f64) -> DVector<f64> {
    let diag = s.diagonal();
    let scale = diag.iter().fold(0.0_f64, |a, &v| a.max(v));
    diag.map(|v| if scale > 0.0 && v > rank_tol * scale { v.sqrt() } else { 0.0 })
}

/// Correlation matrix of a covariance, with the indicator convention on
/// zero-variance coordinates (unit diagonal, zero off-diagonal).
pub fn correlation_of(s: &PsdMatrix) -> CorrelationMatrix {
    correlation_with_tol(s.sym(), DEFAULT_RANK_TOL)
}

pub fn correlation_with_tol(s: &SymMatrix, rank_tol: f64) -> CorrelationMatrix {
    let sd = std_devs(s, rank_tol);
    let n = s.dim();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if sd[i] > 0.0 && sd[j] > 0.0 {
            s.matrix()[(i, j)] / (sd[i] * sd[j])
        } else {
            0.0
        }
    });
    CorrelationMatrix::from_raw(m)
}

/// `‖Σ − D·C·D‖_F / max(1, ‖Σ‖_F)` with `D` the standard deviations of `Σ`.
pub fn reconstruction_residual(s: &SymMatrix, sd: &DVector<f64>, c: &CorrelationMatrix) -> f64 {
    let rebuilt = scale_both(c.matrix(), sd, sd);
    (s.matrix() - rebuilt).norm() / s.frobenius().max(1.0)
}

// diag(left) · m · diag(right)
pub(crate) fn scale_both(m: &DMatrix<f64>, left: &DVector<f64>, right: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| left[i] * m[(i, j)] * right[j])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharedCheck {
    pub shared: bool,
    pub residual_1: f64,
    pub residual_2: f64,
}

/// Whether both matrices reconstruct as `dg(Σ)^{1/2}·C·dg(Σ)^{1/2}` up to
/// `tol · max(1, ‖Σ‖_F)` in Frobenius norm.
pub fn shares_correlation(
    s1: &PsdMatrix,
    s2: &PsdMatrix,
    c: &CorrelationMatrix,
    tol: f64,
) -> Result<SharedCheck> {
    if s1.dim() != s2.dim() || s1.dim() != c.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {}, {}, {}",
            s1.dim(),
            s2.dim(),
            c.dim()
        )));
    }
    let r1 = reconstruction_residual(s1.sym(), &std_devs(s1.sym(), DEFAULT_RANK_TOL), c);
    let r2 = reconstruction_residual(s2.sym(), &std_devs(s2.sym(), DEFAULT_RANK_TOL), c);
    Ok(SharedCheck {
        shared: r1 <= tol && r2 <= tol,
        residual_1: r1,
        residual_2: r2,
    })
}

/// `Σ_i^{(ε)} = (dg(Σ_i)+εI)^{1/2} (εI+(1−ε)C) (dg(Σ_i)+εI)^{1/2}`: a
/// positive definite pair sharing the blended correlation, converging to
/// the input pair as `ε → 0`.
pub fn regularize_pair(
    s1: &PsdMatrix,
    s2: &PsdMatrix,
    c: &CorrelationMatrix,
    eps: f64,
) -> Result<(PsdMatrix, PsdMatrix, CorrelationMatrix)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let check = shares_correlation(s1, s2, c, DEFAULT_FRAME_TOL)?;
    if !check.shared {
        return Err(Error::NotSharedCorrelation {
            residual_1: check.residual_1,
            residual_2: check.residual_2,
        });
    }
    let blended = c.blend(eps);
    let lift = |s: &PsdMatrix| {
        let var = s.sym().diagonal().map(|v| v.max(0.0) + eps);
        let sd = var.map(f64::sqrt);
        let mut m = scale_both(blended.matrix(), &sd, &sd);
        m.set_diagonal(&var);
        PsdMatrix::from_matrix(m)
    };
    Ok((lift(s1)?, lift(s2)?, blended))
}

/// Which construction produced a frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameBranch {
    NonsingularMu,
    NonsingularNu,
    EpsilonContinuation,
}

impl FrameBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameBranch::NonsingularMu => "NonsingularMu",
            FrameBranch::NonsingularNu => "NonsingularNu",
            FrameBranch::EpsilonContinuation => "EpsilonContinuation",
        }
    }
}

/// How the ε-continuation is carried out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ContinuationMode {
    /// Direct branches when either covariance is invertible; the closed-form
    /// `ε → 0` limit when both are singular.
    #[default]
    Auto,
    /// Always follow the numerical schedule on `Σ_μ + ε_n I`, even for
    /// invertible inputs.
    Geometric,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameConfig {
    pub rank_tol: f64,
    pub frame_tol: f64,
    pub eps0: f64,
    pub eps_ratio: f64,
    pub continuation_tol: f64,
    pub max_steps: usize,
    pub mode: ContinuationMode,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            rank_tol: DEFAULT_RANK_TOL,
            frame_tol: DEFAULT_FRAME_TOL,
            eps0: 1e-2,
            eps_ratio: 0.5,
            continuation_tol: 1e-7,
            max_steps: 60,
            mode: ContinuationMode::Auto,
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.rank_tol) && positive(self.frame_tol) && positive(self.continuation_tol)) {
            return Err(Error::invalid("tolerances must be positive and finite"));
        }
        if !(positive(self.eps0) && self.eps0 < 1.0) {
            return Err(Error::invalid("eps0 must lie in (0, 1)"));
        }
        if !(self.eps_ratio > 0.0 && self.eps_ratio < 1.0) {
            return Err(Error::invalid("eps_ratio must lie in (0, 1)"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be positive"));
        }
        Ok(())
    }
}

/// An orthogonal frame `O` in which `OᵀΣ_μO = D_μ·C·D_μ` and
/// `OᵀΣ_νO = D_ν·C·D_ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedCorrelationFrame {
    pub o: DMatrix<f64>,
    pub c: CorrelationMatrix,
    /// Standard deviations of `OᵀΣ_μO`.
    pub d_mu: DVector<f64>,
    /// Standard deviations of `OᵀΣ_νO`.
    pub d_nu: DVector<f64>,
    pub residual_mu: f64,
    pub residual_nu: f64,
    pub branch: FrameBranch,
    pub eps_used: Option<f64>,
    /// Tolerance the residuals were accepted against.
    pub frame_tol: f64,
}

impl SharedCorrelationFrame {
    pub fn dim(&self) -> usize {
        self.o.nrows()
    }

    pub fn max_residual(&self) -> f64 {
        self.residual_mu.max(self.residual_nu)
    }

    /// `O·D_μ`, the factor mapping a `N(0, C)` draw to the `μ` side.
    pub fn mu_factor(&self) -> DMatrix<f64> {
        scale_columns(&self.o, &self.d_mu)
    }

    /// `O·D_ν`.
    pub fn nu_factor(&self) -> DMatrix<f64> {
        scale_columns(&self.o, &self.d_nu)
    }
}

pub(crate) fn scale_columns(m: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, &v) in s.iter().enumerate() {
        out.column_mut(j).scale_mut(v);
    }
    out
}

/// Finds an orthogonal frame in which the two covariances share a
/// correlation matrix. See the module docs for the branch logic.
pub fn shared_correlation_frame(
    sigma_mu: &PsdMatrix,
    sigma_nu: &PsdMatrix,
    cfg: &FrameConfig,
) -> Result<SharedCorrelationFrame> {
    cfg.validate()?;
    if sigma_mu.dim() != sigma_nu.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            sigma_mu.dim(),
            sigma_nu.dim()
        )));
    }
    let builder = FrameBuilder::new(sigma_mu, sigma_nu, cfg);
    match cfg.mode {
        ContinuationMode::Geometric => builder.geometric(),
        ContinuationMode::Auto => {
            let (mu_ok, nu_ok) = (sigma_mu.is_invertible(cfg.rank_tol), sigma_nu.is_invertible(cfg.rank_tol));
            // With both invertible, the better-conditioned side keeps the
            // inverse root in the Monge matrix small.
            if mu_ok && (!nu_ok || inverse_condition(sigma_mu) >= inverse_condition(sigma_nu)) {
                let o = sym_eigen(&monge_matrix(sigma_mu, sigma_nu, cfg.rank_tol)?).vectors;
                let cand = builder.assemble(o, Side::Mu);
                builder.finish(cand, FrameBranch::NonsingularMu, None)
            } else if nu_ok {
                let o = sym_eigen(&monge_matrix(sigma_nu, sigma_mu, cfg.rank_tol)?).vectors;
                let cand = builder.assemble(o, Side::Nu);
                builder.finish(cand, FrameBranch::NonsingularNu, None)
            } else {
                let o = builder.range_reduced_basis()?;
                let cand = builder.assemble(o, Side::Mu);
                builder.finish(cand, FrameBranch::EpsilonContinuation, None)
            }
        }
    }
}

fn inverse_condition(s: &PsdMatrix) -> f64 {
    s.eigen().min() / s.eigen().max()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Mu,
    Nu,
}

struct Candidate {
    o: DMatrix<f64>,
    c: CorrelationMatrix,
    d_mu: DVector<f64>,
    d_nu: DVector<f64>,
    residual_mu: f64,
    residual_nu: f64,
}

impl Candidate {
    fn max_residual(&self) -> f64 {
        self.residual_mu.max(self.residual_nu)
    }

    fn into_frame(self, branch: FrameBranch, eps_used: Option<f64>, frame_tol: f64) -> SharedCorrelationFrame {
        SharedCorrelationFrame {
            o: self.o,
            c: self.c,
            d_mu: self.d_mu,
            d_nu: self.d_nu,
            residual_mu: self.residual_mu,
            residual_nu: self.residual_nu,
            branch,
            eps_used,
            frame_tol,
        }
    }
}

struct FrameBuilder<'a> {
    mu: &'a PsdMatrix,
    nu: &'a PsdMatrix,
    cfg: &'a FrameConfig,
}

impl<'a> FrameBuilder<'a> {
    fn new(mu: &'a PsdMatrix, nu: &'a PsdMatrix, cfg: &'a FrameConfig) -> Self {
        FrameBuilder { mu, nu, cfg }
    }

    fn finish(
        &self,
        cand: Candidate,
        branch: FrameBranch,
        eps_used: Option<f64>,
    ) -> Result<SharedCorrelationFrame> {
        let tol = self.cfg.frame_tol;
        if cand.max_residual() > tol {
            return Err(Error::InvalidFrame {
                residual: cand.max_residual(),
                tolerance: tol,
            });
        }
        Ok(cand.into_frame(branch, eps_used, tol))
    }

    /// Closed-form `ε → 0` limit for singular `Σ_μ`: Monge eigenbasis of the
    /// pair compressed to `range(Σ_μ)`, then an eigenbasis of `Σ_ν`
    /// compressed to `ker(Σ_μ)`.
    fn range_reduced_basis(&self) -> Result<DMatrix<f64>> {
        let d = self.mu.dim();
        let eig = self.mu.eigen();
        let r = self.mu.rank(self.cfg.rank_tol);
        let mut o = DMatrix::zeros(d, d);
        if r > 0 {
            let ur = eig.vectors.columns(0, r).into_owned();
            let a1 = PsdMatrix::from_diagonal(&eig.values.as_slice()[..r])?;
            let b11 = truncate_spectrum(
                &self.nu.sym().conjugate(&ur),
                self.cfg.rank_tol * self.nu.eigen().max(),
                self.nu.min_eig_tol(),
            )?;
            let e = sym_eigen(&monge_matrix(&a1, &b11, self.cfg.rank_tol)?).vectors;
            o.columns_mut(0, r).copy_from(&(ur * e));
        }
        if r < d {
            let uk = eig.vectors.columns(r, d - r).into_owned();
            let bk = self.nu.sym().conjugate(&uk);
            let f = sym_eigen(&bk).vectors;
            o.columns_mut(r, d - r).copy_from(&(uk * f));
        }
        Ok(o)
    }

    fn geometric(&self) -> Result<SharedCorrelationFrame> {
        let d = self.mu.dim();
        let cfg = *self.cfg;
        let mut best: Option<(Candidate, f64)> = None;
        let mut prev: Option<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> = None;
        let mut steps = 0;
        for n in 0..cfg.max_steps {
            steps = n + 1;
            let eps = cfg.eps0 * cfg.eps_ratio.powi(n as i32);
            let shifted = self.mu.matrix() + DMatrix::<f64>::identity(d, d) * eps;
            let shifted = PsdMatrix::with_tol(SymMatrix::symmetrized(shifted), self.mu.min_eig_tol())?;
            if !shifted.is_invertible(cfg.rank_tol) {
                break;
            }
            let o = sym_eigen(&monge_matrix(&shifted, self.nu, cfg.rank_tol)?).vectors;
            let cand = self.assemble(o, Side::Mu);

            // Reconstructions in the original coordinates do not depend on
            // how O is chosen inside degenerate eigenspaces.
            let rec_mu = &cand.o * scale_both(cand.c.matrix(), &cand.d_mu, &cand.d_mu) * cand.o.transpose();
            let rec_nu = &cand.o * scale_both(cand.c.matrix(), &cand.d_nu, &cand.d_nu) * cand.o.transpose();
            let stabilized = match &prev {
                Some((po, pc, pmu, pnu)) => {
                    let frame_step = ((&cand.o - po).norm_squared() + (cand.c.matrix() - pc).norm_squared()).sqrt();
                    let rec_step = ((&rec_mu - pmu).norm_squared() + (&rec_nu - pnu).norm_squared()).sqrt();
                    frame_step.min(rec_step) <= cfg.continuation_tol
                }
                None => false,
            };
            prev = Some((cand.o.clone(), cand.c.matrix().clone(), rec_mu, rec_nu));

            let done = stabilized && cand.max_residual() <= cfg.frame_tol;
            let better = best.as_ref().is_none_or(|(b, _)| cand.max_residual() < b.max_residual());
            if done {
                return Ok(cand.into_frame(FrameBranch::EpsilonContinuation, Some(eps), cfg.frame_tol));
            }
            if better {
                best = Some((cand, eps));
            }
        }
        match best {
            Some((cand, eps)) if cand.max_residual() <= cfg.frame_tol => {
                Ok(cand.into_frame(FrameBranch::EpsilonContinuation, Some(eps), cfg.frame_tol))
            }
            Some((cand, eps)) => Err(Error::ContinuationDiverged {
                steps,
                best: Box::new(cand.into_frame(FrameBranch::EpsilonContinuation, Some(eps), cfg.frame_tol)),
            }),
            None => Err(Error::NumericalInconsistency(
                "epsilon schedule starts below the rank tolerance".into(),
            )),
        }
    }

    /// Builds `C`, the scales and the residuals for a candidate frame.
    fn assemble(&self, o: DMatrix<f64>, primary: Side) -> Candidate {
        let rank_tol = self.cfg.rank_tol;
        let at = self.mu.sym().conjugate(&o);
        let bt = self.nu.sym().conjugate(&o);
        let da = std_devs(&at, rank_tol);
        let db = std_devs(&bt, rank_tol);
        let ((p, dp), (q, dq)) = match primary {
            Side::Mu => ((&at, &da), (&bt, &db)),
            Side::Nu => ((&bt, &db), (&at, &da)),
        };

        let c = merged_correlation(p, dp, q, dq, rank_tol);
        let c = CorrelationMatrix::from_raw(c);
        let residual_mu = (at.matrix() - scale_both(c.matrix(), &da, &da)).norm() / self.mu.sym().frobenius().max(1.0);
        let residual_nu = (bt.matrix() - scale_both(c.matrix(), &db, &db)).norm() / self.nu.sym().frobenius().max(1.0);
        Candidate {
            o,
            c,
            d_mu: da,
            d_nu: db,
            residual_mu,
            residual_nu,
        }
    }

}

/// Correlation matrix that agrees with `p` on coordinates where `dp > 0`
/// and with `q` where `dq > 0`. Pairs made of a `p`-only and a `q`-only
/// coordinate are filled by conditional independence given the coordinates
/// both sides charge, `C₂₃ = C₂₁ C₁₁⁺ C₁₃`, which keeps `C` PSD.
fn merged_correlation(
    p: &SymMatrix,
    dp: &DVector<f64>,
    q: &SymMatrix,
    dq: &DVector<f64>,
    rank_tol: f64,
) -> DMatrix<f64> {
    let n = dp.len();
    let mut c = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if dp[i] > 0.0 && dp[j] > 0.0 {
                p.matrix()[(i, j)] / (dp[i] * dp[j])
            } else if dq[i] > 0.0 && dq[j] > 0.0 {
                q.matrix()[(i, j)] / (dq[i] * dq[j])
            } else {
                0.0
            };
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }

    let both: Vec<usize> = (0..n).filter(|&i| dp[i] > 0.0 && dq[i] > 0.0).collect();
    let p_only: Vec<usize> = (0..n).filter(|&i| dp[i] > 0.0 && dq[i] == 0.0).collect();
    let q_only: Vec<usize> = (0..n).filter(|&i| dp[i] == 0.0 && dq[i] > 0.0).collect();
    if both.is_empty() || p_only.is_empty() || q_only.is_empty() {
        return c;
    }
    let c11 = c.select_rows(&both).select_columns(&both);
    let eig = sym_eigen(&SymMatrix::symmetrized(c11));
    let cut = rank_tol * eig.max().max(0.0);
    let pinv = eig.map_values(|l| if l > cut { 1.0 / l } else { 0.0 });
    let c21 = c.select_rows(&p_only).select_columns(&both);
    let c13 = c.select_rows(&both).select_columns(&q_only);
    let c23 = c21 * pinv * c13;
    for (a, &i) in p_only.iter().enumerate() {
        for (b, &j) in q_only.iter().enumerate() {
            let v = c23[(a, b)].clamp(-1.0, 1.0);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Checks the frame invariants against a pair of covariances.
pub fn frame_residuals(frame: &SharedCorrelationFrame, mu: &PsdMatrix, nu: &PsdMatrix) -> Result<(f64, f64)> {
    if frame.dim() != mu.dim() || frame.dim() != nu.dim() {
        return Err(Error::invalid("frame and covariance dimensions differ"));
    }
    let at = mu.sym().conjugate(&frame.o);
    let bt = nu.sym().conjugate(&frame.o);
    let rm = (at.matrix() - scale_both(frame.c.matrix(), &frame.d_mu, &frame.d_mu)).norm()
        / mu.sym().frobenius().max(1.0);
    let rn = (bt.matrix() - scale_both(frame.c.matrix(), &frame.d_nu, &frame.d_nu)).norm()
        / nu.sym().frobenius().max(1.0);
    Ok((rm, rn))
}

/// Largest deviation of `oᵀo` from the identity; frames keep this ≤ 1e-10.
pub fn frame_orthogonality(frame: &SharedCorrelationFrame) -> f64 {
    orthogonality_defect(&frame.o)
}
