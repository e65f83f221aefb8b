//! Verification machinery that does not rely on the closed forms: a direct
//! search over cross-covariances, exact discrete OT on samples, Monte Carlo
//! cost estimates and residuals of the algebraic identities behind the
//! frame construction.

mod assignment;
mod brute_force;
mod empirical;
mod identities;
mod mc;

pub use assignment::{hungarian, Assignment};
pub use brute_force::{theta_brute_force, BruteForceResult, GridConfig, MAX_BRUTE_FORCE_DIM};
pub use empirical::{empirical_w2_squared, SampleCloud, MAX_CLOUD_SIZE};
pub use identities::{conjugation_invariance_residual, map_ident_residual, os_residual, raco_residual};
pub use mc::{coupling_cost_mc, sample_product_coupling, McEstimate};
