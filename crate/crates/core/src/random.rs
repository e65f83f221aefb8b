//! Seeded generators for matrices and laws, shared by tests, benches and the
//! CLI `verify` command.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::symmat::PsdMatrix;
use crate::transport::GaussianLaw;

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let qr = gaussian_matrix(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `G·Gᵀ` with `G` a `dim × rank` Gaussian matrix: PSD of rank `rank`
/// (almost surely), positive definite when `rank >= dim`.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> PsdMatrix {
    let g = gaussian_matrix(dim, rank, rng);
    PsdMatrix::from_matrix(&g * g.transpose()).expect("Gram matrices are PSD")
}

/// Positive definite matrix with a spectrum kept away from zero.
pub fn random_spd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PsdMatrix {
    let g = gaussian_matrix(dim, dim + 2, rng);
    let m = &g * g.transpose() / (dim as f64) + DMatrix::identity(dim, dim) * 0.1;
    PsdMatrix::from_matrix(m).expect("shifted Gram matrices are PSD")
}

pub fn random_law<R: Rng + ?Sized>(cov: PsdMatrix, mean_scale: f64, rng: &mut R) -> GaussianLaw {
    let mean = gaussian_vector(cov.dim(), rng) * mean_scale;
    GaussianLaw::new(mean, cov).expect("dimensions agree")
}

/// Which singularity pattern a random covariance pair should have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairKind {
    /// Both positive definite.
    Spd,
    /// One singular (chosen at random), the other positive definite.
    RankDeficient,
    /// Both singular.
    DoublySingular,
}

pub fn random_pair<R: Rng + ?Sized>(kind: PairKind, dim: usize, rng: &mut R) -> (PsdMatrix, PsdMatrix) {
    match kind {
        PairKind::Spd => (random_spd(dim, rng), random_spd(dim, rng)),
        PairKind::RankDeficient => {
            let rank = if dim == 1 { 0 } else { rng.random_range(1..dim) };
            let singular = random_psd(dim, rank, rng);
            let regular = random_spd(dim, rng);
            if rng.random_bool(0.5) {
                (singular, regular)
            } else {
                (regular, singular)
            }
        }
        PairKind::DoublySingular => {
            let (ra, rb) = if dim == 1 {
                (0, 0)
            } else {
                (rng.random_range(1..dim), rng.random_range(1..dim))
            };
            (random_psd(dim, ra, rng), random_psd(dim, rb, rng))
        }
    }
}
