//! Direct search for `max tr Θ` subject to `[[Σ_μ, Θ], [Θᵀ, Σ_ν]] ⪰ 0`.
//!
//! A coarse grid over the box `|Θ_ij| ≤ sqrt(Σ_μ,ii Σ_ν,jj)` locates the
//! best feasible grid point. Refinement maximizes the exact-penalty objective
//! `tr Θ + M·min(0, λ_min(Γ_Θ) + tol)`, which is concave because `λ_min` is
//! concave in `Θ`. Each coordinate is maximized by golden-section search with
//! the remaining coordinates maximized out in nested searches, so every 1-d
//! search sees a concave (hence unimodal) function and the ridge where the
//! feasible set is not smooth cannot stall the search. The refined point is
//! finally pulled back radially onto the set accepted by `is_psd`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::symmat::{is_psd, PsdMatrix, SymMatrix};

/// The grid has `resolution^(d²)` points, so only `d ≤ 2` is supported.
pub const MAX_BRUTE_FORCE_DIM: usize = 2;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Weight of the constraint violation in the penalized objective, relative
/// to the scale `sqrt(tr Σ_μ · tr Σ_ν)`.
const PENALTY: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    /// Grid points per axis of the box (at least 2).
    pub resolution: usize,
    /// Relative accuracy the refined value is expected to reach.
    pub accuracy: f64,
    /// Tolerance handed to the PSD test of the joint covariance.
    pub psd_tol: f64,
    /// Golden-section iterations per coordinate in the nested refinement.
    pub golden_iters: usize,
    /// Grid points within `near_tol·max(1, best)` of the best trace are kept
    /// as near-maximizers.
    pub near_tol: f64,
    pub max_near: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            resolution: 11,
            accuracy: 1e-3,
            psd_tol: 1e-9,
            golden_iters: 20,
            near_tol: 1e-9,
            max_near: 64,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::invalid("grid resolution must be at least 2"));
        }
        if !(self.accuracy > 0.0 && self.psd_tol >= 0.0 && self.near_tol >= 0.0) {
            return Err(Error::invalid("grid tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    /// Trace of `theta_hat`.
    pub v_hat: f64,
    pub theta_hat: DMatrix<f64>,
    /// Whether any grid point was feasible.
    pub feasible: bool,
    /// Grid spacing as a fraction of the box half-width.
    pub grid_resolution: f64,
    /// Best trace on the grid before refinement.
    pub grid_best: f64,
    pub grid_points: usize,
    pub feasible_points: usize,
    /// Feasible grid points whose trace is within `near_tol` of `grid_best`,
    /// in lexicographic order of their entries.
    pub near_maximizers: Vec<DMatrix<f64>>,
}

struct Search<'a> {
    a: &'a PsdMatrix,
    b: &'a PsdMatrix,
    d: usize,
    psd_tol: f64,
    penalty: f64,
    golden_iters: usize,
}

impl Search<'_> {
    fn theta(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, x)
    }

    fn gamma(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.d;
        let mut g = DMatrix::zeros(2 * d, 2 * d);
        g.view_mut((0, 0), (d, d)).copy_from(self.a.matrix());
        g.view_mut((d, d), (d, d)).copy_from(self.b.matrix());
        for i in 0..d {
            for j in 0..d {
                g[(i, d + j)] = x[i * d + j];
                g[(d + j, i)] = x[i * d + j];
            }
        }
        g
    }

    fn feasible(&self, x: &[f64]) -> bool {
        is_psd(&SymMatrix::symmetrized(self.gamma(x)), self.psd_tol).is_psd
    }

    fn trace(&self, x: &[f64]) -> f64 {
        (0..self.d).map(|i| x[i * self.d + i]).sum()
    }

    /// Extreme eigenvalues of the joint covariance, on fixed-size matrices
    /// to keep the nested searches cheap.
    fn extreme_eigenvalues(&self, x: &[f64]) -> (f64, f64) {
        let (a, b) = (self.a.matrix(), self.b.matrix());
        if self.d == 1 {
            let g = Matrix2::new(a[(0, 0)], x[0], x[0], b[(0, 0)]);
            let e = g.symmetric_eigenvalues();
            (e.min(), e.max())
        } else {
            #[rustfmt::skip]
            let g = Matrix4::new(
                a[(0, 0)], a[(0, 1)], x[0], x[1],
                a[(1, 0)], a[(1, 1)], x[2], x[3],
                x[0], x[2], b[(0, 0)], b[(0, 1)],
                x[1], x[3], b[(1, 0)], b[(1, 1)],
            );
            let e = g.symmetric_eigenvalues();
            (e.min(), e.max())
        }
    }

    fn penalized(&self, x: &[f64]) -> f64 {
        let (min, max) = self.extreme_eigenvalues(x);
        let slack = min + self.psd_tol * max.max(1.0);
        self.trace(x) + self.penalty * slack.min(0.0)
    }

    /// Maximizes over `coords[level..]` with the earlier coordinates held,
    /// leaving the maximizer in `x`.
    fn nested(&self, x: &mut [f64], coords: &[(usize, f64)], level: usize) -> f64 {
        let Some(&(k, w)) = coords.get(level) else {
            return self.penalized(x);
        };
        let eval = |t: f64, x: &mut [f64]| {
            x[k] = t;
            self.nested(x, coords, level + 1)
        };
        let (mut lo, mut hi) = (-w, w);
        let mut p = hi - GOLDEN * (hi - lo);
        let mut q = lo + GOLDEN * (hi - lo);
        let mut fp = eval(p, x);
        let mut fq = eval(q, x);
        for _ in 0..self.golden_iters {
            if fp < fq {
                lo = p;
                p = q;
                fp = fq;
                q = lo + GOLDEN * (hi - lo);
                fq = eval(q, x);
            } else {
                hi = q;
                q = p;
                fq = fp;
                p = hi - GOLDEN * (hi - lo);
                fp = eval(p, x);
            }
        }
        eval(if fp >= fq { p } else { q }, x)
    }

    /// Largest `t ∈ [0, 1]` with `t·x` accepted by `is_psd`.
    fn pull_back(&self, x: &[f64]) -> f64 {
        let scaled = |t: f64| x.iter().map(|v| v * t).collect::<Vec<_>>();
        if self.feasible(x) {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.feasible(&scaled(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Maximizes `tr Θ` over PSD-feasible cross-covariances by grid search and
/// golden-section refinement. Uses no closed-form expression for the optimum.
pub fn theta_brute_force(sigma_mu: &PsdMatrix, sigma_nu: &PsdMatrix, cfg: &GridConfig) -> Result<BruteForceResult> {
    cfg.validate()?;
    let d = sigma_mu.dim();
    if sigma_nu.dim() != d {
        return Err(Error::invalid(format!("dimension mismatch: {d} vs {}", sigma_nu.dim())));
    }
    if d > MAX_BRUTE_FORCE_DIM {
        return Err(Error::UnsupportedDimension {
            dim: d,
            max: MAX_BRUTE_FORCE_DIM,
        });
    }
    let scale = (sigma_mu.trace() * sigma_nu.trace()).sqrt().max(1.0);
    let search = Search {
        a: sigma_mu,
        b: sigma_nu,
        d,
        psd_tol: cfg.psd_tol,
        penalty: PENALTY * scale,
        golden_iters: cfg.golden_iters,
    };

    let half_width: Vec<f64> = (0..d * d)
        .map(|k| {
            let (i, j) = (k / d, k % d);
            (sigma_mu.matrix()[(i, i)].max(0.0) * sigma_nu.matrix()[(j, j)].max(0.0)).sqrt()
        })
        .collect();
    let active: Vec<usize> = (0..d * d).filter(|&k| half_width[k] > 0.0).collect();

    let res = cfg.resolution;
    let grid_points = res.pow(active.len() as u32);
    let step = 2.0 / (res - 1) as f64;
    let point = |mut idx: usize| {
        let mut x = vec![0.0; d * d];
        for &k in &active {
            let t = (idx % res) as f64 * step - 1.0;
            idx /= res;
            x[k] = t * half_width[k];
        }
        x
    };

    let mut feasible: Vec<(f64, Vec<f64>)> = (0..grid_points)
        .into_par_iter()
        .filter_map(|idx| {
            let x = point(idx);
            search.feasible(&x).then(|| (search.trace(&x), x))
        })
        .collect();
    feasible.sort_by(|(ta, xa), (tb, xb)| tb.total_cmp(ta).then_with(|| lexicographic(xa, xb)));

    let (grid_best, grid_x) = match feasible.first() {
        Some((t, x)) => (*t, x.clone()),
        None => {
            // Θ = 0 is always feasible for PSD inputs; reaching this means the
            // grid missed it (even resolution) and everything else failed.
            let zero = vec![0.0; d * d];
            if !search.feasible(&zero) {
                return Err(Error::NumericalInconsistency("Θ = 0 is not feasible".into()));
            }
            (0.0, zero)
        }
    };
    let near_cut = grid_best - cfg.near_tol * grid_best.abs().max(1.0);
    let mut near: Vec<&Vec<f64>> = feasible.iter().filter(|(t, _)| *t >= near_cut).map(|(_, x)| x).collect();
    near.sort_by(|a, b| lexicographic(a, b));
    let near_maximizers = near.into_iter().take(cfg.max_near).map(|x| search.theta(x)).collect();

    let (mut v_hat, mut x_hat) = (grid_best, grid_x);
    if !active.is_empty() {
        // Off-diagonal entries outermost, diagonal entries innermost.
        let mut coords: Vec<(usize, f64)> = active.iter().map(|&k| (k, half_width[k])).collect();
        coords.sort_by_key(|&(k, _)| (k / d == k % d, k));
        let mut x = vec![0.0; d * d];
        search.nested(&mut x, &coords, 0);
        let t = search.pull_back(&x);
        let refined: Vec<f64> = x.iter().map(|v| v * t).collect();
        let value = search.trace(&refined);
        if value > v_hat && search.feasible(&refined) {
            v_hat = value;
            x_hat = refined;
        }
    }

    Ok(BruteForceResult {
        v_hat,
        theta_hat: search.theta(&x_hat),
        feasible: !feasible.is_empty(),
        grid_resolution: step,
        grid_best,
        grid_points,
        feasible_points: feasible.len(),
        near_maximizers,
    })
}
