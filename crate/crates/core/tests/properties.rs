use gaussot::correlation::{frame_orthogonality, frame_residuals};
use gaussot::nalgebra::{DMatrix, DVector};
use gaussot::{
    barycenter_two, bw_distance, bw_squared, coupling_covariance, is_psd, shared_correlation_frame, v_closed_form, v_frame,
    sym_eigen, w2_squared, FrameConfig, GaussianLaw, PsdMatrix, SymMatrix, DEFAULT_RANK_TOL,
};
use proptest::prelude::*;

/// `G·Gᵀ` for a `dim × rank` factor, so singular covariances come up often.
fn covariance(dim: usize) -> impl Strategy<Value = PsdMatrix> {
    (0..=dim).prop_flat_map(move |rank| {
        prop::collection::vec(-2.0..2.0f64, dim * rank).prop_map(move |entries| {
            let g = DMatrix::from_vec(dim, rank, entries);
            PsdMatrix::new(SymMatrix::new(&g * g.transpose()).unwrap()).unwrap()
        })
    })
}

fn law(dim: usize) -> impl Strategy<Value = GaussianLaw> {
    (prop::collection::vec(-3.0..3.0f64, dim), covariance(dim))
        .prop_map(|(m, cov)| GaussianLaw::new(DVector::from_vec(m), cov).unwrap())
}

fn pair() -> impl Strategy<Value = (PsdMatrix, PsdMatrix)> {
    (1..=4usize).prop_flat_map(|d| (covariance(d), covariance(d)))
}

/// Every eigenvalue is round-off or clearly nonzero, never in the band
/// between round-off and the rank threshold where the frame is ill-posed.
fn separated(s: &SymMatrix) -> bool {
    let e = sym_eigen(s);
    let top = e.max().max(f64::MIN_POSITIVE);
    e.values.iter().all(|&l| l <= 1e-13 * top || l >= 1e-6 * top)
}

/// `b` compressed onto the numerical range and kernel of `a`.
fn compressions(a: &PsdMatrix, b: &PsdMatrix) -> Vec<SymMatrix> {
    let (d, r) = (a.dim(), a.rank(DEFAULT_RANK_TOL));
    let v = &a.eigen().vectors;
    [(0, r), (r, d - r)]
        .into_iter()
        .filter(|&(_, n)| n > 0 && r < d)
        .map(|(start, n)| b.sym().conjugate(&v.columns(start, n).into_owned()))
        .collect()
}

fn well_posed(a: &PsdMatrix, b: &PsdMatrix) -> bool {
    let scale = a.eigen().max().max(b.eigen().max());
    let block_ok = |k: &SymMatrix| sym_eigen(k).values.iter().all(|&l| l <= 1e-13 * scale || l >= 1e-6 * scale);
    separated(a.sym())
        && separated(b.sym())
        && compressions(a, b).iter().chain(&compressions(b, a)).all(block_ok)
}

fn scale(a: &PsdMatrix, b: &PsdMatrix) -> f64 {
    (a.trace() + b.trace()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn frame_reconstructs_both_covariances((a, b) in pair()) {
        prop_assume!(well_posed(&a, &b));
        let f = shared_correlation_frame(&a, &b, &FrameConfig::default()).unwrap();
        let (ra, rb) = frame_residuals(&f, &a, &b).unwrap();
        prop_assert!(ra <= 1e-8 * scale(&a, &b), "residual_mu {ra:e}");
        prop_assert!(rb <= 1e-8 * scale(&a, &b), "residual_nu {rb:e}");
        prop_assert!(frame_orthogonality(&f) <= 1e-10);
        prop_assert!(is_psd(f.c.sym(), 1e-9).is_psd);
    }

    #[test]
    fn frame_value_matches_closed_form((a, b) in pair()) {
        prop_assume!(well_posed(&a, &b));
        let f = shared_correlation_frame(&a, &b, &FrameConfig::default()).unwrap();
        let v = v_closed_form(&a, &b).unwrap();
        prop_assert!((v_frame(&f) - v).abs() <= 1e-8 * scale(&a, &b));
    }

    #[test]
    fn bures_wasserstein_is_a_metric(
        (a, b, c) in (1..=3usize).prop_flat_map(|d| (covariance(d), covariance(d), covariance(d)))
    ) {
        // Round-off in bw² is O(ε·scale); distances carry its square root.
        let eps2 = 1e-10 * (a.trace() + b.trace() + c.trace()).max(1.0);
        let tol = eps2.sqrt();
        let ab = bw_distance(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - bw_distance(&b, &a).unwrap()).abs() <= tol);
        prop_assert!(bw_squared(&a, &a).unwrap() <= eps2);
        prop_assert!(ab <= bw_distance(&a, &c).unwrap() + bw_distance(&c, &b).unwrap() + tol);
    }

    #[test]
    fn coupling_is_feasible_and_attains_w2(
        (mu, nu) in (1..=4usize).prop_flat_map(|d| (law(d), law(d)))
    ) {
        prop_assume!(well_posed(mu.cov(), nu.cov()));
        let f = shared_correlation_frame(mu.cov(), nu.cov(), &FrameConfig::default()).unwrap();
        let coupling = coupling_covariance(&f, &mu, &nu).unwrap();
        let w2 = w2_squared(&mu, &nu).unwrap();
        prop_assert!((coupling.w2_squared - w2).abs() <= 1e-8 * (w2 + scale(mu.cov(), nu.cov())));
        let d = mu.dim();
        let gamma = coupling.gamma.matrix();
        let cost = (mu.mean() - nu.mean()).norm_squared() + gamma.trace()
            - 2.0 * gamma.view((0, d), (d, d)).trace();
        prop_assert!((cost - w2).abs() <= 1e-8 * (w2 + scale(mu.cov(), nu.cov())));
    }

    #[test]
    fn two_law_barycenter_lies_on_the_geodesic(
        (mu, nu) in (1..=3usize).prop_flat_map(|d| (law(d), law(d))),
        alpha in 0.0..=1.0f64,
    ) {
        prop_assume!(well_posed(mu.cov(), nu.cov()));
        let f = shared_correlation_frame(mu.cov(), nu.cov(), &FrameConfig::default()).unwrap();
        let eta = barycenter_two(&mu, &nu, alpha, &f).unwrap();
        let total = w2_squared(&mu, &nu).unwrap().sqrt();
        let to_mu = w2_squared(&mu, &eta).unwrap().sqrt();
        let to_nu = w2_squared(&eta, &nu).unwrap().sqrt();
        let tol = (1e-10 * scale(mu.cov(), nu.cov())).sqrt();
        prop_assert!((to_mu - (1.0 - alpha) * total).abs() <= tol, "{to_mu} vs {}", (1.0 - alpha) * total);
        prop_assert!((to_nu - alpha * total).abs() <= tol, "{to_nu} vs {}", alpha * total);
    }
}
