//! Quadratic Wasserstein geometry between Gaussian laws, built on
//! shared-correlation orthogonal frames.
//!
//! For covariances `Σ_μ, Σ_ν` there is an orthogonal `O` and a correlation
//! matrix `C` with `OᵀΣ_μO = D_μ C D_μ` and `OᵀΣ_νO = D_ν C D_ν`, `D` being
//! the diagonal standard deviations. In that frame the optimal coupling is
//! comonotone coordinate by coordinate: `V = Σ_i d_μ,i d_ν,i`,
//! `Θ = O D_μ C D_ν Oᵀ`, and barycenters interpolate the scales `D`. The
//! construction covers singular covariances.
//!
//! ```
//! use gaussot::{shared_correlation_frame, v_frame, v_closed_form, FrameConfig, PsdMatrix};
//!
//! let mu = PsdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]])?;
//! let nu = PsdMatrix::from_diagonal(&[1.0, 0.0])?;
//! let frame = shared_correlation_frame(&mu, &nu, &FrameConfig::default())?;
//! assert!((v_frame(&frame) - v_closed_form(&mu, &nu)?).abs() < 1e-10);
//! # Ok::<(), gaussot::Error>(())
//! ```

pub mod barycenter;
pub mod correlation;
pub mod error;
pub mod oracle;
pub mod random;
pub mod symmat;
pub mod transport;

pub use barycenter::{barycenter_functional, barycenter_n, barycenter_two, BarycenterProblem, CommonFrame};
pub use correlation::{
    correlation_of, dg, regularize_pair, shared_correlation_frame, shares_correlation, ContinuationMode,
    CorrelationMatrix, FrameBranch, FrameConfig, SharedCheck, SharedCorrelationFrame, DEFAULT_FRAME_TOL,
};
pub use error::{Error, Result};
pub use symmat::{
    inv_sqrt_psd, is_psd, nuclear_norm, sqrt_gram, sqrt_psd, sym_eigen, EigenSystem, PsdCheck, PsdMatrix, SymMatrix, DEFAULT_MIN_EIG_TOL,
    DEFAULT_RANK_TOL,
};
pub use transport::{
    bw_distance, bw_squared, cauchy_schwarz_bound, coupling_covariance, monge_map, optimal_theta, sample_coupling,
    v_closed_form, v_frame, w2_gaussian, w2_squared, GaussianLaw, MongeMap, OptimalCoupling,
};

/// Re-exported so downstream crates build matrices with the same version.
pub use nalgebra;
