//! Dense symmetric and positive semi-definite matrix kernel.
//!
//! Everything here works on small dense matrices (dimensions up to a few
//! hundred). Eigendecompositions are canonicalized (descending eigenvalues,
//! fixed eigenvector signs) so that downstream constructions are
//! deterministic and vary continuously with their input whenever the
//! spectrum is simple.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance below which eigenvalues are treated as zero.
pub const DEFAULT_MIN_EIG_TOL: f64 = 1e-10;

/// Relative threshold separating invertible from singular matrices.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// A real symmetric matrix. Construction symmetrizes, so `m[(i, j)]` and
/// `m[(j, i)]` are always bit-identical.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(Self::symmetrized(m))
    }

    /// Builds from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("rows must all have length equal to the row count"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    // Caller guarantees finiteness; only symmetrizes.
    pub(crate) fn symmetrized(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// `oᵀ · self · o`.
    pub fn conjugate(&self, o: &DMatrix<f64>) -> SymMatrix {
        SymMatrix::symmetrized(o.transpose() * &self.0 * o)
    }

    pub fn diagonal(&self) -> DVector<f64> {
        self.0.diagonal()
    }
}

/// Eigenvalues sorted in descending order with orthonormal eigenvectors in
/// the matching columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * self.vectors.transpose()
    }
}

/// Symmetric eigendecomposition with canonical ordering and sign.
///
/// Eigenvalues come out descending (stable with respect to the backend order
/// on exact ties). Each eigenvector is flipped so its entry of largest
/// magnitude is non-negative, the lowest row index winning ties.
pub fn sym_eigen(a: &SymMatrix) -> EigenSystem {
    let n = a.dim();
    let eig = SymmetricEigen::new(a.matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    EigenSystem { values, vectors }
}

/// Result of a PSD test, with the extreme eigenvalues as witnesses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// True iff the smallest eigenvalue is at least `-tol · max(1, λ_max)`.
pub fn is_psd(a: &SymMatrix, tol: f64) -> PsdCheck {
    let values = a.matrix().clone().symmetric_eigenvalues();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    psd_check(min, max, tol)
}

fn psd_check(min: f64, max: f64, tol: f64) -> PsdCheck {
    PsdCheck {
        is_psd: min >= -tol * max.max(1.0),
        min_eigenvalue: min,
        max_eigenvalue: max,
    }
}

/// A symmetric matrix known to be positive semi-definite up to
/// `min_eig_tol`. The canonical eigendecomposition is cached.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdMatrix {
    base: SymMatrix,
    min_eig_tol: f64,
    eigen: EigenSystem,
}

impl PsdMatrix {
    pub fn new(base: SymMatrix) -> Result<Self> {
        Self::with_tol(base, DEFAULT_MIN_EIG_TOL)
    }

    pub fn with_tol(base: SymMatrix, min_eig_tol: f64) -> Result<Self> {
        if !(min_eig_tol >= 0.0 && min_eig_tol.is_finite()) {
            return Err(Error::invalid("min_eig_tol must be a nonnegative finite number"));
        }
        let eigen = sym_eigen(&base);
        let check = psd_check(eigen.min(), eigen.max(), min_eig_tol);
        if !check.is_psd {
            return Err(Error::NotPsd {
                min_eigenvalue: check.min_eigenvalue,
                threshold: -min_eig_tol * check.max_eigenvalue.max(1.0),
            });
        }
        Ok(PsdMatrix {
            base,
            min_eig_tol,
            eigen,
        })
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        Self::new(SymMatrix::new(m)?)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(rows)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::from_diagonal(diag)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(SymMatrix::identity(dim)).expect("identity is PSD")
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(SymMatrix::zeros(dim)).expect("zero matrix is PSD")
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.base
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.base.matrix()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn trace(&self) -> f64 {
        self.base.trace()
    }

    pub fn min_eig_tol(&self) -> f64 {
        self.min_eig_tol
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    /// Invertible per `rank_tol`: `λ_min > rank_tol · λ_max`.
    pub fn is_invertible(&self, rank_tol: f64) -> bool {
        let max = self.eigen.max();
        max > 0.0 && self.eigen.min() > rank_tol * max
    }

    /// Numerical rank: eigenvalues above `rank_tol · λ_max`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let max = self.eigen.max();
        if max <= 0.0 {
            return 0;
        }
        self.eigen.values.iter().filter(|&&v| v > rank_tol * max).count()
    }

    /// `oᵀ · self · o`, re-validated with the same tolerance.
    pub fn conjugate(&self, o: &DMatrix<f64>) -> Result<PsdMatrix> {
        PsdMatrix::with_tol(self.base.conjugate(o), self.min_eig_tol)
    }
}

/// `s` with eigenvalues at or below `floor` set to zero. Compressions of a
/// larger matrix carry round-off on the parent's scale, which the block's own
/// scale cannot detect; `floor` supplies that scale.
pub(crate) fn truncate_spectrum(s: &SymMatrix, floor: f64, min_eig_tol: f64) -> Result<PsdMatrix> {
    let eig = sym_eigen(s);
    let kept = SymMatrix::symmetrized(eig.map_values(|l| if l > floor { l } else { 0.0 }));
    PsdMatrix::with_tol(kept, min_eig_tol)
}

/// Symmetric PSD square root.
///
/// Eigenvalues at or below the eigensolver noise level `8·n·ε·λ_max` are set
/// to zero before taking roots, so round-off in the null space of a
/// rank-deficient input does not leak into the root at order `sqrt(ε)`.
/// Small eigenvalues above that level are kept: their roots are not small.
pub fn sqrt_psd(s: &PsdMatrix) -> PsdMatrix {
    let eig = s.eigen();
    let cutoff = 8.0 * s.dim() as f64 * f64::EPSILON * eig.max().max(0.0);
    let root = eig.map_values(|l| if l > cutoff { l.sqrt() } else { 0.0 });
    let root = SymMatrix::symmetrized(root);
    // The root of an accepted PSD matrix is PSD by construction; re-run the
    // eigensolver only to cache a canonical decomposition for later use.
    let eigen = sym_eigen(&root);
    PsdMatrix {
        base: root,
        min_eig_tol: s.min_eig_tol(),
        eigen,
    }
}

/// `(xᵀx)^{1/2}` for square `x`, from the symmetric eigensystem of
/// `[[0, x], [xᵀ, 0]]`, whose eigenvalues are `±σ_i(x)` with eigenvectors
/// `(u_i, ±v_i)/√2`. Eigenvalues there carry absolute error `ε‖x‖`, so small
/// singular values are not lost to the `sqrt(ε)` amplification of rooting
/// an eigendecomposition of `xᵀx`.
pub fn sqrt_gram(x: &DMatrix<f64>) -> PsdMatrix {
    let root = SymMatrix::symmetrized(jordan_wielandt(x).map_values_lower(x.nrows()));
    let eigen = sym_eigen(&root);
    PsdMatrix {
        base: root,
        min_eig_tol: DEFAULT_MIN_EIG_TOL,
        eigen,
    }
}

/// Sum of the singular values of a square `x`.
pub fn nuclear_norm(x: &DMatrix<f64>) -> f64 {
    0.5 * jordan_wielandt(x).values.iter().map(|l| l.abs()).sum::<f64>()
}

fn jordan_wielandt(x: &DMatrix<f64>) -> EigenSystem {
    let n = x.nrows();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, n), (n, n)).copy_from(x);
    h.view_mut((n, 0), (n, n)).copy_from(&x.transpose());
    sym_eigen(&SymMatrix(h))
}

impl EigenSystem {
    // Σ_k |λ_k| z_k zₖᵀ restricted to the trailing n×n block; each ±σ pair
    // contributes σ v vᵀ / 2.
    fn map_values_lower(&self, n: usize) -> DMatrix<f64> {
        let lower = self.vectors.rows(n, n);
        let mut scaled = lower.into_owned();
        for (j, &lambda) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(lambda.abs());
        }
        scaled * lower.transpose()
    }
}

/// Inverse symmetric square root of a positive definite matrix.
pub fn inv_sqrt_psd(s: &PsdMatrix, rank_tol: f64) -> Result<SymMatrix> {
    let eig = s.eigen();
    let threshold = rank_tol * eig.max();
    if !(eig.max() > 0.0 && eig.min() > threshold) {
        return Err(Error::SingularMatrix {
            min_eigenvalue: eig.min(),
            threshold,
        });
    }
    Ok(SymMatrix::symmetrized(eig.map_values(|l| 1.0 / l.sqrt())))
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest entry of `|oᵀo − I|`.
pub fn orthogonality_defect(o: &DMatrix<f64>) -> f64 {
    let n = o.ncols();
    max_abs(&(o.transpose() * o - DMatrix::<f64>::identity(n, n)))
}
