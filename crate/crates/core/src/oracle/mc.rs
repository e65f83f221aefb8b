use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::transport::GaussianLaw;

const ROUNDING_FLOOR: f64 = 1e-12;

/// Sample mean of a cost and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean, plus a
    /// rounding floor so deterministic costs (zero standard error) still match.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + ROUNDING_FLOOR * value.abs().max(1.0)
    }
}

/// Mean and standard error of `‖x_k − y_k‖²` over the pairs.
pub fn coupling_cost_mc(pairs: &[(DVector<f64>, DVector<f64>)]) -> Result<McEstimate> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::invalid("at least two pairs are needed for a standard error"));
    }
    let costs: Vec<f64> = pairs.iter().map(|(x, y)| (x - y).norm_squared()).collect();
    let mean = costs.iter().sum::<f64>() / n as f64;
    let var = costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1) as f64;
    Ok(McEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
    })
}

/// Pairs drawn from the independent coupling `μ ⊗ ν`.
pub fn sample_product_coupling(
    law_mu: &GaussianLaw,
    law_nu: &GaussianLaw,
    n: usize,
    seed: u64,
) -> Vec<(DVector<f64>, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = law_mu.sample(n, &mut rng);
    let ys = law_nu.sample(n, &mut rng);
    xs.into_iter().zip(ys).collect()
}
